use std::fs;
use std::process::Command;

use khessian_cli::config::{GridConfig, Level, OutputConfig, ProblemConfig, RhsConfig, SeedConfig, SolverConfig};
use khessian_cli::{presets, run};
use khessian_core::pde::Monomial;
use proptest::prelude::*;
use serde_json::Value;

fn khessian(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_khessian")).args(args).output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

#[test]
fn classify_examples() {
    let (code, stdout, _) = khessian(&["cone", "classify", "--lambda", "1,1.618033988749895,-0.6180339887498949", "--k", "2"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(v["kind"], "BoundaryP2");

    let out = run(["khessian", "cone", "classify", "--lambda", "1,1,1", "--k", "2"]);
    assert_eq!(out.code, 0);
    assert!(out.stdout.contains("\"Interior\""));

    assert_eq!(run(["khessian", "cone", "classify", "--lambda", "-1,-2,0.5", "--k", "2"]).code, 1);
    assert_eq!(run(["khessian", "cone", "classify", "--lambda", "1,1", "--k", "2"]).code, 2);
    assert_eq!(run(["khessian", "cone", "classify", "--lambda", "1,,2", "--k", "2"]).code, 2);
    assert_eq!(run(["khessian", "cone", "classify", "--k", "2"]).code, 2);
}

#[test]
fn seed_examples() {
    let (code, stdout, _) = khessian(&["seed", "--k", "2", "--n", "3", "--c", "0"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&stdout).unwrap();
    let tau: Vec<f64> = serde_json::from_value(v["seed"]["tau"].clone()).unwrap();
    let m = (1.0 + 5f64.sqrt()) / 2.0;
    assert_eq!(tau[0], 1.0);
    assert!((tau[1] - m).abs() < 1e-15 && (tau[2] + 1.0 / m).abs() < 1e-15);
    assert_eq!(v["certificate"]["convexity_class"], 1);
    assert_eq!(v["certificate"]["not_class"], 3);

    let out = run(["khessian", "seed", "--k", "2", "--n", "3", "--c", "3", "--l", "full"]);
    assert_eq!(out.code, 0);
    let v: Value = serde_json::from_str(&out.stdout).unwrap();
    for t in v["seed"]["tau"].as_array().unwrap() {
        assert!((t.as_f64().unwrap() - 1.0).abs() < 1e-14);
    }

    let out = run(["khessian", "seed", "--k", "2", "--n", "3", "--c", "-2"]);
    assert_eq!(out.code, 0);
    let v: Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(v["certificate"]["not_class"], 2);

    assert_eq!(run(["khessian", "seed", "--k", "2", "--n", "2", "--c", "0"]).code, 3);
    assert_eq!(run(["khessian", "seed", "--k", "2", "--n", "3", "--c", "1", "--l", "many"]).code, 2);
}

#[test]
fn seed_output_is_deterministic() {
    let a = run(["khessian", "seed", "--k", "3", "--n", "5", "--c", "2", "--l", "1"]);
    let b = run(["khessian", "seed", "--k", "3", "--n", "5", "--c", "2", "--l", "1"]);
    assert_eq!(a.code, 0);
    assert_eq!(a, b);
}

#[test]
fn verify_suites() {
    let (code, stdout, stderr) = khessian(&["verify", "--suite", "cone-equivalence", "--samples", "500", "--seed", "7"]);
    assert_eq!(code, 0, "{stderr}");
    let v: Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(v[0]["failed"], 0);
    assert_eq!(run(["khessian", "verify", "--samples", "100"]).code, 0);
    assert_eq!(run(["khessian", "verify", "--suite", "nope"]).code, 2);
}

#[test]
fn solve_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("match");
    let out = run(["khessian", "solve", "--preset", "fconst-match", "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    for name in ["u.csv", "u.json", "w.csv", "w.json", "report.json", "convergence.csv", "certificate.csv"] {
        assert!(out_dir.join(name).exists(), "{name} missing");
    }
    let report: Value = serde_json::from_str(&fs::read_to_string(out_dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["status"], "converged");
    assert_eq!(report["config"]["name"], "fconst-match");
    let flags = report["certificate"]["flags"].as_array().unwrap();
    assert!(flags.iter().all(|f| f == true));
    let u = fs::read_to_string(out_dir.join("u.csv")).unwrap();
    assert!(u.starts_with("x1,x2,x3,value\n"));
    assert_eq!(u.lines().count(), 1 + 17usize.pow(3));
}

#[test]
fn solve_config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = presets::load("fzero-linear").unwrap();
    cfg.k = 3;
    let path = dir.path().join("bad.json");
    fs::write(&path, cfg.to_json()).unwrap();
    let out_dir = dir.path().join("out");
    let (code, _, stderr) = khessian(&["solve", "--config", path.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert_eq!(code, 2, "{stderr}");
    assert!(!out_dir.exists());

    fs::write(&path, "{ not json").unwrap();
    assert_eq!(run(["khessian", "solve", "--config", path.to_str().unwrap()]).code, 2);
    assert_eq!(run(["khessian", "solve", "--preset", "missing"]).code, 2);
    assert_eq!(run(["khessian", "solve"]).code, 2);
}

#[test]
fn solver_failure_exits_4_with_report() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = presets::load("fzero-linear").unwrap();
    cfg.solver.max_iter = 0;
    cfg.output.directory = dir.path().join("fail").display().to_string();
    let path = dir.path().join("cfg.json");
    fs::write(&path, cfg.to_json()).unwrap();
    let out = run(["khessian", "solve", "--config", path.to_str().unwrap()]);
    assert_eq!(out.code, 4, "{}", out.stderr);
    let report: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("fail/report.json")).unwrap()).unwrap();
    assert_eq!(report["status"], "max_iter");
    assert!(report["iterations"]["records"].as_array().is_some());
}

fn monomial() -> impl Strategy<Value = Monomial> {
    (-4.0f64..4.0, prop::collection::vec(0u32..=2, 3), 0u32..=1, prop::collection::vec(0u32..=1, 3)).prop_map(
        |(coef, y, u, p)| Monomial { coef, y, u, p },
    )
}

fn config() -> impl Strategy<Value = ProblemConfig> {
    let rhs = prop_oneof![
        prop::collection::vec(monomial(), 1..4).prop_map(|terms| RhsConfig::Terms { terms }),
        (-5.0f64..5.0).prop_map(|constant| RhsConfig::Constant { constant }),
        Just(RhsConfig::Preset { preset: "fzero-linear".into() }),
    ];
    let level = prop_oneof![Just(None), Just(Some(Level::FULL)), (1usize..3).prop_map(|l| Some(Level::Index(l)))];
    (
        prop::option::of("[a-z-]{1,12}"),
        0.01f64..0.99,
        rhs,
        level,
        (4usize..16).prop_map(|h| 2 * h + 1),
        (1e-14f64..1e-6, 1e-12f64..1e-6, 0usize..20),
        ("[a-z/]{1,10}", any::<bool>()),
        any::<u64>(),
    )
        .prop_map(|(name, alpha, rhs, l, m, (tol_lin, tol_newton, max_iter), (directory, emit_plots_csv), rng_seed)| {
            ProblemConfig {
                name,
                n: 3,
                k: 2,
                alpha,
                rhs,
                seed: SeedConfig { l },
                grid: GridConfig { m },
                solver: SolverConfig { tol_lin, tol_newton, max_iter },
                output: OutputConfig { directory, emit_plots_csv },
                rng_seed,
            }
        })
}

proptest! {
    #[test]
    fn config_round_trips(cfg in config()) {
        let text = cfg.to_json();
        let back = ProblemConfig::from_json(&text).unwrap();
        prop_assert_eq!(&back, &cfg);
        prop_assert_eq!(back.to_json(), text);
    }
}
