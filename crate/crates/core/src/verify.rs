//! Seeded property sweeps over the symmetric-function and cone algebra.
//!
//! Each suite draws spectra from a ChaCha8 stream so a `(suite, samples,
//! seed)` triple always reproduces the same report.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cone::{garding_slack, in_gamma_k, in_gamma_tilde, in_garding_cone_sampled};
use crate::error::{Error, Result};
use crate::seeds::p2_example;
use crate::symfun::{elem_sym_deleted, maclaurin_mean, shift_expand, sigma_km1_row, sigma_of, sigma_prefix, Spectrum};

/// Half-width of the neighborhoods of `{sigma = 0}` hypersurfaces excluded
/// from the cone-equivalence sweep.
pub const EXCLUSION_TOL: f64 = 1e-9;

/// `(n, k)` pairs of the cone-equivalence sweep.
pub const EQUIVALENCE_CASES: [(usize, usize); 4] = [(3, 2), (4, 2), (4, 3), (5, 3)];

/// `(n, k)` pairs of the Garding-inequality sweep.
pub const GARDING_CASES: [(usize, usize); 2] = [(4, 2), (5, 3)];

/// Relative tolerance of the identity checks, measured against the size of
/// the terms involved.
pub const IDENTITY_TOL: f64 = 1e-12;

/// Allowed negative slack in the Garding inequality.
pub const GARDING_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    ConeEquivalence,
    Maclaurin,
    GardingInequality,
    Identities,
    P2Ellipticity,
}

impl Suite {
    pub const ALL: [Suite; 5] = [
        Suite::ConeEquivalence,
        Suite::Maclaurin,
        Suite::GardingInequality,
        Suite::Identities,
        Suite::P2Ellipticity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::ConeEquivalence => "cone-equivalence",
            Suite::Maclaurin => "maclaurin",
            Suite::GardingInequality => "garding-inequality",
            Suite::Identities => "identities",
            Suite::P2Ellipticity => "p2-ellipticity",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown suite {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub case: String,
    pub lambda: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<Vec<f64>>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: Suite,
    /// Samples per case.
    pub samples: usize,
    pub seed: u64,
    pub checked: usize,
    pub skipped: usize,
    pub failed: usize,
    /// Up to [`MAX_COUNTEREXAMPLES`] failing inputs.
    pub counterexamples: Vec<Counterexample>,
}

pub const MAX_COUNTEREXAMPLES: usize = 10;

impl SuiteReport {
    fn new(suite: Suite, samples: usize, seed: u64) -> Self {
        SuiteReport {
            suite,
            samples,
            seed,
            checked: 0,
            skipped: 0,
            failed: 0,
            counterexamples: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.failed == 0
    }

    fn record(&mut self, ok: bool, example: impl FnOnce() -> Counterexample) {
        self.checked += 1;
        if !ok {
            self.failed += 1;
            if self.counterexamples.len() < MAX_COUNTEREXAMPLES {
                self.counterexamples.push(example());
            }
        }
    }
}

fn uniform(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Spectrum {
    Spectrum::new((0..n).map(|_| rng.gen_range(lo..hi)).collect()).expect("n >= 2, finite")
}

pub fn run_suite(suite: Suite, samples: usize, seed: u64) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = SuiteReport::new(suite, samples, seed);
    match suite {
        Suite::ConeEquivalence => cone_equivalence(&mut rng, &mut report)?,
        Suite::Maclaurin => maclaurin(&mut rng, &mut report)?,
        Suite::GardingInequality => garding(&mut rng, &mut report)?,
        Suite::Identities => identities(&mut rng, &mut report)?,
        Suite::P2Ellipticity => p2_ellipticity(&mut rng, &mut report)?,
    }
    Ok(report)
}

/// Whether `lambda` lies within [`EXCLUSION_TOL`] of a hypersurface where one
/// of the three membership tests switches.
fn near_switching_surface(lam: &Spectrum, k: usize) -> Result<bool> {
    let sig = sigma_prefix(lam.as_slice(), k);
    if sig[1..].iter().any(|s| s.abs() <= EXCLUSION_TOL) {
        return Ok(true);
    }
    let n = lam.n();
    for l in 1..=k.min(n - 1) {
        for subset in itertools::Itertools::combinations(0..n, l) {
            if elem_sym_deleted(lam, k - l, &subset)?.abs() <= EXCLUSION_TOL {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

fn cone_equivalence(rng: &mut ChaCha8Rng, report: &mut SuiteReport) -> Result<()> {
    for (n, k) in EQUIVALENCE_CASES {
        for _ in 0..report.samples {
            let lam = uniform(rng, n, -3.0, 3.0);
            if near_switching_surface(&lam, k)? {
                report.skipped += 1;
                continue;
            }
            let a = in_gamma_k(&lam, k, 0.0)?;
            let b = in_garding_cone_sampled(&lam, k, 16)?;
            let c = in_gamma_tilde(&lam, k)?;
            report.record(a == b && b == c, || Counterexample {
                case: format!("n={n} k={k}"),
                lambda: lam.as_slice().to_vec(),
                mu: None,
                detail: format!("sigma test {a}, hyperbolic test {b}, deleted-variable test {c}"),
            });
        }
    }
    Ok(())
}

/// Largest `k` with `lambda in Gamma_k`, or 0.
fn cone_level(lam: &Spectrum) -> usize {
    let sig = sigma_prefix(lam.as_slice(), lam.n());
    sig[1..].iter().take_while(|&&s| s > 0.0).count()
}

fn maclaurin(rng: &mut ChaCha8Rng, report: &mut SuiteReport) -> Result<()> {
    for n in 3..=6 {
        let mut drawn = 0;
        while drawn < report.samples {
            let lam = uniform(rng, n, -1.0, 3.0);
            let k = cone_level(&lam);
            if k < 2 {
                report.skipped += 1;
                continue;
            }
            drawn += 1;
            let means: Vec<f64> = (1..=k).map(|l| maclaurin_mean(&lam, l)).collect::<Result<_>>()?;
            let ok = means.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12));
            report.record(ok, || Counterexample {
                case: format!("n={n} k={k}"),
                lambda: lam.as_slice().to_vec(),
                mu: None,
                detail: format!("means {means:?} not nonincreasing"),
            });
        }
    }
    Ok(())
}

fn draw_in_cone(rng: &mut ChaCha8Rng, n: usize, k: usize, skipped: &mut usize) -> Result<Spectrum> {
    loop {
        let lam = uniform(rng, n, -1.0, 3.0);
        if in_gamma_k(&lam, k, 0.0)? {
            return Ok(lam);
        }
        *skipped += 1;
    }
}

fn garding(rng: &mut ChaCha8Rng, report: &mut SuiteReport) -> Result<()> {
    for (n, k) in GARDING_CASES {
        for _ in 0..report.samples {
            let lam = draw_in_cone(rng, n, k, &mut report.skipped)?;
            let mu = draw_in_cone(rng, n, k, &mut report.skipped)?;
            let slack = garding_slack(&lam, &mu, k)?;
            report.record(slack >= -GARDING_TOL, || Counterexample {
                case: format!("n={n} k={k}"),
                lambda: lam.as_slice().to_vec(),
                mu: Some(mu.as_slice().to_vec()),
                detail: format!("slack {slack:e}"),
            });
            let equal = garding_slack(&lam, &lam, k)?;
            report.record(equal.abs() <= GARDING_TOL, || Counterexample {
                case: format!("n={n} k={k} mu=lambda"),
                lambda: lam.as_slice().to_vec(),
                mu: None,
                detail: format!("slack {equal:e} at equality"),
            });
        }
    }
    Ok(())
}

/// Outcome of the four identity checks at one `(lambda, k)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityErrors {
    /// `sigma_k = sigma_{k;i} + lambda_i sigma_{k-1;i}`, worst `i`.
    pub recursion: f64,
    /// `sum_i sigma_{k-1;i} = (n - k + 1) sigma_{k-1}`.
    pub row_sum: f64,
    /// Shift expansion against direct evaluation of `sigma_k(lambda + eps e)`.
    pub shift: f64,
    /// `sum_i sigma_{k-1;i} lambda_i = k sigma_k`.
    pub euler: f64,
}

impl IdentityErrors {
    pub fn worst(&self) -> f64 {
        self.recursion.max(self.row_sum).max(self.shift).max(self.euler)
    }
}

/// Errors of the identities relative to the magnitude of their terms:
/// `|lhs - rhs| / sigma_j(|lambda|)` with the `j` of the identity, so
/// cancellation near `sigma = 0` is not mistaken for an algebraic failure.
pub fn identity_errors(lam: &Spectrum, k: usize, eps: f64) -> Result<IdentityErrors> {
    let n = lam.n();
    let v = lam.as_slice();
    let abs: Vec<f64> = v.iter().map(|x| x.abs()).collect();
    let scale = |j: usize, extra: f64| sigma_of(&abs, j).max(f64::MIN_POSITIVE) * extra;
    let rel = |a: f64, b: f64, s: f64| (a - b).abs() / s;

    let sk = sigma_of(v, k);
    let row = sigma_km1_row(lam, k)?;
    let mut recursion: f64 = 0.0;
    for i in 0..n {
        let without = if k < n { elem_sym_deleted(lam, k, &[i])? } else { 0.0 };
        recursion = recursion.max(rel(sk, without + v[i] * row[i], scale(k, 1.0)));
    }
    let row_sum = rel(row.iter().sum(), (n - k + 1) as f64 * sigma_of(v, k - 1), scale(k - 1, (n - k + 1) as f64));
    let shifted: Vec<f64> = v.iter().map(|x| x + eps).collect();
    let shifted_abs: Vec<f64> = v.iter().map(|x| x.abs() + eps.abs()).collect();
    let shift = rel(shift_expand(lam, k, eps)?, sigma_of(&shifted, k), sigma_of(&shifted_abs, k).max(f64::MIN_POSITIVE));
    let euler_lhs: f64 = row.iter().zip(v).map(|(r, x)| r * x).sum();
    let euler = rel(euler_lhs, k as f64 * sk, scale(k, k as f64));
    Ok(IdentityErrors { recursion, row_sum, shift, euler })
}

fn identities(rng: &mut ChaCha8Rng, report: &mut SuiteReport) -> Result<()> {
    for _ in 0..report.samples {
        let n = rng.gen_range(2..=8);
        let k = rng.gen_range(1..=n);
        let lam = uniform(rng, n, -3.0, 3.0);
        let eps = rng.gen_range(-2.0..2.0);
        let err = identity_errors(&lam, k, eps)?;
        report.record(err.worst() <= IDENTITY_TOL, || Counterexample {
            case: format!("n={n} k={k} eps={eps}"),
            lambda: lam.as_slice().to_vec(),
            mu: None,
            detail: format!("{err:?}"),
        });
    }
    Ok(())
}

/// A `P2` point near the canonical example: every entry gets a random
/// increment in `[0, 1/4)`, then the two entries carrying `M` and `-1/M` are
/// scaled by the root of `s -> sigma_k` nearest 1. Returns `None` when the
/// result is not on `P2`.
pub fn perturbed_p2_point(rng: &mut ChaCha8Rng, k: usize, n: usize) -> Result<Option<Spectrum>> {
    let base = p2_example(k, n)?;
    let mut v: Vec<f64> = base.as_slice().iter().map(|x| x + rng.gen_range(0.0..0.25)).collect();
    let (a, b) = (k - 1, k);
    // sigma_k is quadratic in s when entries a and b are both multiplied by s.
    let at = |s: f64, v: &[f64]| {
        let mut w = v.to_vec();
        w[a] *= s;
        w[b] *= s;
        sigma_of(&w, k)
    };
    let (p0, p1, pm) = (at(0.0, &v), at(1.0, &v), at(-1.0, &v));
    let c2 = 0.5 * (p1 + pm) - p0;
    let c1 = 0.5 * (p1 - pm);
    let c0 = p0;
    let roots: Vec<f64> = if c2.abs() < 1e-300 {
        if c1 == 0.0 {
            vec![]
        } else {
            vec![-c0 / c1]
        }
    } else {
        let disc = c1 * c1 - 4.0 * c2 * c0;
        if disc < 0.0 {
            vec![]
        } else {
            let q = -0.5 * (c1 + c1.signum() * disc.sqrt());
            let mut r = vec![q / c2];
            if q != 0.0 {
                r.push(c0 / q);
            }
            r
        }
    };
    let Some(mut s) = roots
        .into_iter()
        .filter(|r| r.is_finite() && *r > 0.0)
        .min_by(|x, y| (x - 1.0).abs().total_cmp(&(y - 1.0).abs()))
    else {
        return Ok(None);
    };
    for _ in 0..3 {
        let d = 2.0 * c2 * s + c1;
        if d != 0.0 {
            s -= (c2 * s * s + c1 * s + c0) / d;
        }
    }
    v[a] *= s;
    v[b] *= s;
    let lam = Spectrum::new(v)?;
    let sig = sigma_prefix(lam.as_slice(), k + 1);
    let on_p2 = sig[1..k].iter().all(|&x| x > 0.0) && sig[k + 1] < 0.0;
    Ok(on_p2.then_some(lam))
}

fn p2_ellipticity(rng: &mut ChaCha8Rng, report: &mut SuiteReport) -> Result<()> {
    let cases: Vec<(usize, usize)> = (3..=6).flat_map(|n| (2..n).map(move |k| (k, n))).collect();
    let mut produced = 0;
    let mut attempts = 0;
    while produced < report.samples {
        attempts += 1;
        if attempts > 100 * report.samples.max(1) {
            return Err(Error::Construction("perturbed P2 points are too rare".into()));
        }
        let (k, n) = cases[rng.gen_range(0..cases.len())];
        let Some(lam) = perturbed_p2_point(rng, k, n)? else {
            report.skipped += 1;
            continue;
        };
        produced += 1;
        let sk = sigma_of(lam.as_slice(), k);
        let row = sigma_km1_row(&lam, k)?;
        let min_row = row.iter().copied().fold(f64::INFINITY, f64::min);
        let abs: Vec<f64> = lam.as_slice().iter().map(|x| x.abs()).collect();
        let on_surface = sk.abs() <= 1e-12 * sigma_of(&abs, k);
        report.record(min_row > 0.0 && on_surface, || Counterexample {
            case: format!("n={n} k={k}"),
            lambda: lam.as_slice().to_vec(),
            mu: None,
            detail: format!("sigma_k {sk:e}, min row {min_row:e}"),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suites_pass_on_small_samples() {
        for suite in Suite::ALL {
            let report = run_suite(suite, 200, 7).unwrap();
            assert!(report.passed(), "{suite}: {:?}", report.counterexamples);
            assert!(report.checked >= 200, "{suite}: {}", report.checked);
        }
    }

    #[test]
    fn deterministic() {
        let a = run_suite(Suite::ConeEquivalence, 100, 3).unwrap();
        let b = run_suite(Suite::ConeEquivalence, 100, 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn suite_names_round_trip() {
        for suite in Suite::ALL {
            assert_eq!(suite.name().parse::<Suite>().unwrap(), suite);
            assert_eq!(serde_json::to_string(&suite).unwrap(), format!("\"{}\"", suite.name()));
        }
        assert!("nope".parse::<Suite>().is_err());
    }
}
