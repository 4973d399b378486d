//! One function per subcommand.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use khessian_core::cone::classify_boundary;
use khessian_core::iterate::{self, EpsTuning, IterationReport, SolutionMeta};
use khessian_core::pde::write_grid;
use khessian_core::seeds::{certify_seed, seed_for_negative, seed_for_positive, seed_for_zero, SeedCertificate};
use khessian_core::verify::{run_suite, Suite, SuiteReport};
use khessian_core::{ConeKind, ConvexityCertificate, RunStatus, SeedQuadratic, Spectrum};

use crate::config::{Level, ProblemConfig};
use crate::error::{CliError, CliResult};
use crate::presets;
use crate::{ClassifyArgs, Outcome, SeedArgs, SolveArgs, VerifyArgs};

fn json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("output serializes") + "\n"
}

pub fn parse_lambda(text: &str) -> CliResult<Spectrum> {
    let entries = text
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("malformed lambda entry {:?}", s.trim())))
        })
        .collect::<CliResult<Vec<f64>>>()?;
    Spectrum::new(entries).map_err(|e| CliError::Usage(format!("invalid lambda: {e}")))
}

pub fn cone_classify(args: &ClassifyArgs) -> CliResult<Outcome> {
    let lam = parse_lambda(&args.lambda)?;
    let verdict = classify_boundary(&lam, args.k, args.tol).map_err(|e| CliError::Usage(e.to_string()))?;
    let code = if verdict.kind == ConeKind::Outside { 1 } else { 0 };
    let note = if verdict.ambiguous { " (ambiguous)" } else { "" };
    Ok(Outcome {
        stdout: json(&verdict),
        stderr: format!("{:?} of Gamma_{}({}){note}\n", verdict.kind, args.k, lam.n()),
        code,
    })
}

#[derive(Serialize)]
struct SeedOutput<'a> {
    seed: &'a SeedQuadratic,
    certificate: SeedCertificate,
}

fn parse_level(text: &str) -> CliResult<Level> {
    if text == "full" {
        return Ok(Level::FULL);
    }
    text.parse()
        .map(Level::Index)
        .map_err(|_| CliError::Usage(format!("--l expects an integer or `full`, got {text:?}")))
}

pub fn seed(args: &SeedArgs) -> CliResult<Outcome> {
    let level = args.l.as_deref().map(parse_level).transpose()?;
    let (k, n, c) = (args.k, args.n, args.c);
    let seed = if c == 0.0 {
        seed_for_zero(k, n, args.alpha, 0.0)
    } else if c < 0.0 {
        seed_for_negative(k, n, c)
    } else {
        let l = level.unwrap_or(Level::FULL).resolve(k, n.max(k));
        seed_for_positive(k, n, c, l)
    }
    .and_then(|s| s.with_alpha(args.alpha))
    .map_err(CliError::Seed)?;
    let certificate = certify_seed(&seed);
    let stderr = format!(
        "tau = {:?}, convexity class {}, ellipticity margin {:.3e}\n",
        seed.tau.as_slice(),
        certificate.convexity_class,
        certificate.ellipticity_margin
    );
    Ok(Outcome {
        stdout: json(&SeedOutput { seed: &seed, certificate }),
        stderr,
        code: 0,
    })
}

/// Contents of `report.json`.
#[derive(Serialize)]
struct SolveReport<'a> {
    config: &'a ProblemConfig,
    status: Option<RunStatus>,
    seed: Option<&'a SeedQuadratic>,
    seed_certificate: Option<SeedCertificate>,
    tuning: Option<&'a EpsTuning>,
    iterations: Option<&'a IterationReport>,
    solution: Option<&'a SolutionMeta>,
    certificate: Option<&'a ConvexityCertificate>,
    error: Option<String>,
}

impl<'a> SolveReport<'a> {
    fn failed(config: &'a ProblemConfig, seed: Option<&'a SeedQuadratic>, error: String) -> Self {
        SolveReport {
            config,
            status: None,
            seed,
            seed_certificate: seed.map(certify_seed),
            tuning: None,
            iterations: None,
            solution: None,
            certificate: None,
            error: Some(error),
        }
    }
}

fn load_config(args: &SolveArgs) -> CliResult<ProblemConfig> {
    match (&args.config, &args.preset) {
        (Some(path), _) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
            ProblemConfig::from_json(&text)
        }
        (None, Some(name)) => presets::load(name),
        (None, None) => Err(CliError::Usage("either --config or --preset is required".into())),
    }
}

fn write_report(dir: &Path, report: &SolveReport) -> CliResult<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("report.json"), json(report))?;
    Ok(())
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(String::new, |v| format!("{v:e}"))
}

fn convergence_csv(report: &IterationReport) -> String {
    let mut out = String::from(
        "attempt,eps,m,g_inf,g_calpha,w_norm,rho_norm,min_margin,min_margin_excess,lin_residual,lin_iterations,floor,quadratic_ratio\n",
    );
    for r in &report.records {
        let _ = writeln!(
            out,
            "{},{:e},{},{:e},{:e},{:e},{},{},{},{},{},{:e},{}",
            r.attempt,
            r.eps,
            r.m,
            r.g_inf,
            r.g_calpha,
            r.w_norm,
            opt(r.rho_norm),
            opt(r.min_margin),
            opt(r.min_margin_excess),
            opt(r.lin_residual),
            r.lin_iterations.map_or_else(String::new, |i| i.to_string()),
            r.floor,
            opt(r.quadratic_ratio),
        );
    }
    out
}

fn certificate_csv(cert: &ConvexityCertificate) -> String {
    let mut out = String::from("j,convex,min_s,max_s,expected\n");
    for j in 0..cert.flags.len() {
        let expected = cert.expected[j].map_or_else(String::new, |e| e.to_string());
        let _ = writeln!(out, "{},{},{:e},{:e},{expected}", j + 1, cert.flags[j], cert.min_s[j], cert.max_s[j]);
    }
    out
}

#[derive(Serialize)]
struct SolveSummary<'a> {
    status: RunStatus,
    iterations: usize,
    final_residual: Option<f64>,
    eps: f64,
    eps_prime: f64,
    convex_flags: &'a [bool],
    claims_hold: bool,
    output: String,
}

pub fn solve(args: &SolveArgs) -> CliResult<Outcome> {
    let config = load_config(args)?;
    let dir: PathBuf = args.out.clone().unwrap_or_else(|| PathBuf::from(&config.output.directory));
    let problem = match config.problem() {
        Ok(p) => p,
        Err(e @ CliError::Seed(_)) => {
            write_report(&dir, &SolveReport::failed(&config, None, e.to_string()))?;
            return Err(CliError::Solve(e.to_string()));
        }
        Err(e) => return Err(e),
    };
    let pipeline = match iterate::solve(&problem.seed, &problem.rhs, problem.shape, &problem.options, true) {
        Ok(p) => p,
        Err(e) => {
            write_report(&dir, &SolveReport::failed(&config, Some(&problem.seed), e.to_string()))?;
            return Err(CliError::Solve(e.to_string()));
        }
    };
    let sol = &pipeline.solution;
    let status = pipeline.report.status;
    let io = |e: khessian_core::Error| CliError::Solve(e.to_string());
    write_grid(&dir, "u", &sol.u, sol.coordinate_scale, Some(&pipeline.seed)).map_err(io)?;
    write_grid(&dir, "w", &sol.w, 1.0, Some(&pipeline.seed)).map_err(io)?;
    let report = SolveReport {
        config: &config,
        status: Some(status),
        seed: Some(&pipeline.seed),
        seed_certificate: Some(certify_seed(&pipeline.seed)),
        tuning: pipeline.tuning.as_ref(),
        iterations: Some(&pipeline.report),
        solution: Some(&sol.meta),
        certificate: Some(&pipeline.certificate),
        error: pipeline.report.failure.clone(),
    };
    write_report(&dir, &report)?;
    if config.output.emit_plots_csv {
        fs::write(dir.join("convergence.csv"), convergence_csv(&pipeline.report))?;
        fs::write(dir.join("certificate.csv"), certificate_csv(&pipeline.certificate))?;
    }
    let summary = SolveSummary {
        status,
        iterations: pipeline.report.iterations(),
        final_residual: pipeline.report.final_residual(),
        eps: sol.eps,
        eps_prime: sol.eps_prime,
        convex_flags: &pipeline.certificate.flags,
        claims_hold: pipeline.certificate.claims_hold,
        output: dir.display().to_string(),
    };
    let stderr = format!(
        "{}: {status:?} after {} iterations, eps = {}, residual {}, convex flags {:?}\n",
        config.name.as_deref().unwrap_or("problem"),
        summary.iterations,
        sol.eps,
        opt(summary.final_residual),
        pipeline.certificate.flags,
    );
    Ok(Outcome {
        stdout: json(&summary),
        stderr,
        code: if status == RunStatus::Converged { 0 } else { 4 },
    })
}

pub fn verify(args: &VerifyArgs) -> CliResult<Outcome> {
    let suites: Vec<Suite> = if args.suite == "all" {
        Suite::ALL.to_vec()
    } else {
        vec![args.suite.parse().map_err(|_| {
            let names: Vec<_> = Suite::ALL.iter().map(|s| s.name()).collect();
            CliError::Usage(format!("unknown suite {:?}; available: all, {}", args.suite, names.join(", ")))
        })?]
    };
    let mut reports: Vec<SuiteReport> = Vec::new();
    let mut stderr = String::new();
    for suite in suites {
        let report = run_suite(suite, args.samples, args.seed).map_err(|e| CliError::Usage(e.to_string()))?;
        let verdict = if report.passed() { "pass" } else { "FAIL" };
        let _ = writeln!(
            stderr,
            "{suite}: {verdict} ({} checked, {} skipped, {} failed)",
            report.checked, report.skipped, report.failed
        );
        for c in &report.counterexamples {
            let _ = writeln!(stderr, "  {}: lambda = {:?} {}", c.case, c.lambda, c.detail);
        }
        reports.push(report);
    }
    let code = if reports.iter().all(SuiteReport::passed) { 0 } else { 1 };
    Ok(Outcome { stdout: json(&reports), stderr, code })
}
