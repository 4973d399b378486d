//! The JSON problem description consumed by `khessian solve`.

use serde::{Deserialize, Serialize};

use khessian_core::iterate::NewtonOptions;
use khessian_core::pde::{GridShape, Monomial, RhsSpec};
use khessian_core::seeds::{seed_for_negative, seed_for_positive, seed_for_zero, SeedQuadratic};

use crate::error::{CliError, CliResult};
use crate::presets;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub n: usize,
    pub k: usize,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    pub rhs: RhsConfig,
    #[serde(default)]
    pub seed: SeedConfig,
    pub grid: GridConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub rng_seed: u64,
}

fn default_alpha() -> f64 {
    0.5
}

/// Right-hand side: inline monomials, a constant, or the right-hand side of
/// a named preset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum RhsConfig {
    Terms { terms: Vec<Monomial> },
    Constant { constant: f64 },
    Preset { preset: String },
}

/// `l` selects the positive-target seed; `"full"` is the equal-entry seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Level {
    Index(usize),
    Named(Full),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Full {
    #[serde(rename = "full")]
    Full,
}

impl Level {
    pub const FULL: Level = Level::Named(Full::Full);

    pub fn resolve(self, k: usize, n: usize) -> usize {
        match self {
            Level::Index(l) => l,
            Level::Named(Full::Full) => n + 1 - k,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedConfig {
    /// Only used when `f` is positive at the origin; defaults to `"full"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l: Option<Level>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub m: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub tol_lin: f64,
    pub tol_newton: f64,
    pub max_iter: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let o = NewtonOptions::default();
        SolverConfig {
            tol_lin: o.tol_lin,
            tol_newton: o.tol_newton,
            max_iter: o.max_iter,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub directory: String,
    #[serde(default)]
    pub emit_plots_csv: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            directory: "out".into(),
            emit_plots_csv: false,
        }
    }
}

/// Everything `solve` needs, derived from a validated config.
#[derive(Debug, Clone)]
pub struct Problem {
    pub rhs: RhsSpec,
    pub seed: SeedQuadratic,
    pub shape: GridShape,
    pub options: NewtonOptions,
}

fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Usage(msg.into()))
}

impl ProblemConfig {
    pub fn from_json(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Usage(format!("invalid config: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn rhs_spec(&self) -> CliResult<RhsSpec> {
        let spec = match &self.rhs {
            RhsConfig::Terms { terms } => RhsSpec { n: self.n, terms: terms.clone(), alpha: self.alpha },
            RhsConfig::Constant { constant } => RhsSpec { alpha: self.alpha, ..RhsSpec::constant(self.n, *constant) },
            RhsConfig::Preset { preset } => {
                let base = presets::load(preset)?;
                if base.n != self.n {
                    return usage(format!("rhs preset {preset:?} is for n = {}, config has n = {}", base.n, self.n));
                }
                return ProblemConfig { rhs: base.rhs, ..self.clone() }.rhs_spec();
            }
        };
        spec.validate().map_err(|e| CliError::Usage(format!("invalid rhs: {e}")))?;
        Ok(spec)
    }

    /// Checks ranges and builds the solver inputs; the seed branch follows
    /// the sign of `f` at the origin.
    pub fn problem(&self) -> CliResult<Problem> {
        let (n, k) = (self.n, self.k);
        if !(2..=4).contains(&n) {
            return usage(format!("n = {n} outside 2..=4"));
        }
        if k < 2 || k + 1 > n {
            return usage(format!("k = {k} outside 2..=n-1 = {}", n - 1));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return usage(format!("alpha = {} outside (0, 1)", self.alpha));
        }
        let s = &self.solver;
        if !(s.tol_lin > 0.0 && s.tol_newton > 0.0) {
            return usage("tolerances must be positive");
        }
        let shape = GridShape::new(n, self.grid.m).map_err(|e| CliError::Usage(e.to_string()))?;
        let rhs = self.rhs_spec()?;
        let c = rhs.at_origin();
        let seed = if c == 0.0 {
            seed_for_zero(k, n, self.alpha, rhs.coefficient_bound())
        } else if c < 0.0 {
            seed_for_negative(k, n, c)
        } else {
            let l = self.seed.l.unwrap_or(Level::FULL).resolve(k, n);
            if l == 0 || l > n + 1 - k {
                return usage(format!("seed level l = {l} outside 1..={}", n + 1 - k));
            }
            seed_for_positive(k, n, c, l)
        }
        .and_then(|s| s.with_alpha(self.alpha))
        .map_err(CliError::Seed)?;
        let options = NewtonOptions {
            tol_newton: s.tol_newton,
            max_iter: s.max_iter,
            tol_lin: s.tol_lin,
            ..NewtonOptions::default()
        };
        Ok(Problem { rhs, seed, shape, options })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_forms() {
        let c: SeedConfig = serde_json::from_str(r#"{"l":"full"}"#).unwrap();
        assert_eq!(c.l, Some(Level::FULL));
        let c: SeedConfig = serde_json::from_str(r#"{"l":2}"#).unwrap();
        assert_eq!(c.l, Some(Level::Index(2)));
        assert!(serde_json::from_str::<SeedConfig>(r#"{"l":"half"}"#).is_err());
        assert_eq!(Level::FULL.resolve(2, 3), 2);
    }

    #[test]
    fn rejects_bad_ranges() {
        let mut cfg = presets::load("fzero-linear").unwrap();
        cfg.k = 3;
        assert_eq!(cfg.problem().unwrap_err().exit_code(), 2);
        let mut cfg = presets::load("fzero-linear").unwrap();
        cfg.grid.m = 10;
        assert_eq!(cfg.problem().unwrap_err().exit_code(), 2);
        let mut cfg = presets::load("fzero-linear").unwrap();
        cfg.solver.tol_lin = 0.0;
        assert_eq!(cfg.problem().unwrap_err().exit_code(), 2);
        assert!(ProblemConfig::from_json(r#"{"n":3}"#).is_err());
    }

    #[test]
    fn rhs_preset_reference() {
        let mut cfg = presets::load("fconst-match").unwrap();
        cfg.rhs = RhsConfig::Preset { preset: "fzero-linear".into() };
        let spec = cfg.rhs_spec().unwrap();
        assert_eq!(spec.terms.len(), 2);
        cfg.rhs = RhsConfig::Preset { preset: "fpos-mixed".into() };
        assert!(cfg.rhs_spec().is_err());
    }
}
