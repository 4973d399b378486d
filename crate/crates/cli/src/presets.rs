//! Problem configurations shipped with the binary.

use crate::config::ProblemConfig;
use crate::error::{CliError, CliResult};

pub const PRESETS: [(&str, &str); 6] = [
    ("fzero-linear", include_str!("../../../presets/fzero-linear.json")),
    ("fzero-nonlinear", include_str!("../../../presets/fzero-nonlinear.json")),
    ("fconst-neg", include_str!("../../../presets/fconst-neg.json")),
    ("fneg-mixed", include_str!("../../../presets/fneg-mixed.json")),
    ("fconst-match", include_str!("../../../presets/fconst-match.json")),
    ("fpos-mixed", include_str!("../../../presets/fpos-mixed.json")),
];

pub fn names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(name, _)| *name)
}

pub fn load(name: &str) -> CliResult<ProblemConfig> {
    let (_, text) = PRESETS.iter().find(|(n, _)| *n == name).ok_or_else(|| {
        CliError::Usage(format!(
            "unknown preset {name:?}; available: {}",
            names().collect::<Vec<_>>().join(", ")
        ))
    })?;
    ProblemConfig::from_json(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_is_valid() {
        for name in names() {
            let cfg = load(name).unwrap();
            assert_eq!(cfg.name.as_deref(), Some(name));
            cfg.problem().unwrap_or_else(|e| panic!("{name}: {e}"));
        }
    }
}
