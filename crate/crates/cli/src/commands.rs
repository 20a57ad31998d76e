use serde::Serialize;
use std::path::PathBuf;
use std::time::Instant;

use theta_extremal::bubble::{
    leading_coefficients, limit_identity_check, rayleigh_sweep, rayleigh_target, sweep_csv, BubbleProfile, SweepRow,
    DEFAULT_BUMP_RADIUS, DEFAULT_DELTA,
};
use theta_extremal::certificate::{circle_certificate, gram_certificate_m2, CERTIFICATE_TOL};
use theta_extremal::measure::{is_feasible, theta_energy, DiscreteMeasure};
use theta_extremal::sobolev::{
    classical_p2_constant, improved_constant, sharp_biharmonic, sharp_sobolev, SobolevParams,
};
use theta_extremal::solver::{
    bruteforce_theta_m1, closed_form_theta, minimal_support, minimize_theta, OptimizerReport, SolverConfig,
};
use theta_extremal::sphere::Dimension;

use crate::config::{RealList, Resolver};
use crate::report::{envelope, fmt17, to_json, write_atomic};
use crate::*;

/// Identity checks pass below this.
const IDENTITY_TOL: f64 = 1e-10;

pub fn run(cli: Cli) -> Result<(), CliError> {
    let mut cfg = Resolver::load(cli.config.as_deref())?;
    match cli.command {
        Command::Theta { cmd: ThetaCmd::Solve(a) } => theta_solve(a, &mut cfg),
        Command::Theta { cmd: ThetaCmd::Bruteforce(a) } => theta_bruteforce(a, &mut cfg),
        Command::Theta { cmd: ThetaCmd::ClosedForm(a) } => theta_closed_form(a, &mut cfg),
        Command::Certify(a) => certify(a, &mut cfg),
        Command::Const { cmd: ConstCmd::Sobolev(a) } => const_sobolev(a, &mut cfg),
        Command::Const { cmd: ConstCmd::Biharmonic(a) } => const_biharmonic(a, &mut cfg),
        Command::Const { cmd: ConstCmd::Improved(a) } => const_improved(a, &mut cfg),
        Command::Bubble { cmd: BubbleCmd::Sweep(a) } => bubble_sweep(a, &mut cfg),
        Command::Bubble { cmd: BubbleCmd::IdentityCheck(a) } => identity_check(a, &mut cfg),
        Command::Config { cmd: ConfigCmd::PrintSchema } => {
            cfg.finish()?;
            print!("{}", to_json(&schema())?);
            Ok(())
        }
    }
}

fn dimension(n: usize) -> Result<Dimension, CliError> {
    Dimension::new(n).map_err(CliError::from)
}

fn check_theta(theta: f64) -> Result<(), CliError> {
    if theta > 0.0 && theta < 1.0 {
        Ok(())
    } else {
        Err(CliError::Config(format!("theta must lie in (0, 1), got {theta}")))
    }
}

#[derive(Debug, Serialize)]
struct SolveEcho {
    n: usize,
    m: u32,
    theta: f64,
    /// None when the support size was swept.
    support: Option<usize>,
    solver: SolverConfig,
    out: PathBuf,
}

#[derive(Debug, Serialize)]
struct SupportTrial {
    support_size: usize,
    energy: f64,
    residual_norm: f64,
    converged: bool,
    merged_support: usize,
}

#[derive(Debug, Serialize)]
struct SolveResult {
    report: OptimizerReport,
    support_sweep: Vec<SupportTrial>,
}

fn theta_solve(a: SolveArgs, cfg: &mut Resolver) -> Result<(), CliError> {
    let start = Instant::now();
    let d = SolverConfig::default();
    let n: usize = cfg.require("n", a.n)?;
    let m: u32 = cfg.require("m", a.m)?;
    let theta: f64 = cfg.require("theta", a.theta)?;
    let support: Option<usize> = cfg.opt("support", a.support)?;
    let solver = SolverConfig {
        support_size: support.unwrap_or(d.support_size),
        restarts: cfg.or("restarts", a.restarts, d.restarts)?,
        max_outer_iters: cfg.or("max_outer_iters", a.max_outer_iters, d.max_outer_iters)?,
        max_inner_iters: cfg.or("max_inner_iters", a.max_inner_iters, d.max_inner_iters)?,
        penalty_init: cfg.or("penalty_init", a.penalty_init, d.penalty_init)?,
        penalty_growth: cfg.or("penalty_growth", a.penalty_growth, d.penalty_growth)?,
        step_size: cfg.or("step_size", a.step_size, d.step_size)?,
        grad_tol: cfg.or("grad_tol", a.grad_tol, d.grad_tol)?,
        residual_tol: cfg.or("residual_tol", a.residual_tol, d.residual_tol)?,
        merge_tol: cfg.or("merge_tol", a.merge_tol, d.merge_tol)?,
        seed: cfg.or("seed", a.seed, d.seed)?,
    };
    let out: PathBuf = cfg.or("out", a.out, PathBuf::from("theta_report.json"))?;
    cfg.finish()?;
    let dim = dimension(n)?;
    check_theta(theta)?;
    if m == 0 {
        return Err(CliError::Config("m must be at least 1".into()));
    }
    solver.validate()?;

    let sizes: Vec<usize> = match support {
        Some(s) => vec![s],
        None => (minimal_support(dim, m)..=2 * (n + 2).max(minimal_support(dim, m))).collect(),
    };
    let mut trials = Vec::new();
    let mut best: Option<OptimizerReport> = None;
    for size in sizes {
        let run_cfg = SolverConfig { support_size: size, ..solver.clone() };
        let r = minimize_theta(dim, m, theta, &run_cfg)?;
        trials.push(SupportTrial {
            support_size: size,
            energy: r.energy,
            residual_norm: r.residual_norm,
            converged: r.converged,
            merged_support: r.best_measure.len(),
        });
        let replace = match &best {
            None => true,
            Some(b) => match (r.converged, b.converged) {
                (true, false) => true,
                (false, true) => false,
                (true, true) => {
                    r.energy < b.energy - 1e-12
                        || ((r.energy - b.energy).abs() <= 1e-12 && r.best_measure.len() < b.best_measure.len())
                }
                (false, false) => r.residual_norm < b.residual_norm,
            },
        };
        if replace {
            best = Some(r);
        }
    }
    let report = best.expect("at least one support size");
    let summary = format!(
        "theta({},{},{}) ≤ {} (closed form {}, gap {}, residual {:.3e})",
        m,
        theta,
        n,
        fmt17(report.energy),
        report.closed_form.map(fmt17).unwrap_or_else(|| "unknown".into()),
        report.gap.map(|g| format!("{g:.3e}")).unwrap_or_else(|| "unknown".into()),
        report.residual_norm
    );
    let converged = report.converged;
    let residual = report.residual_norm;
    let echo = SolveEcho { n, m, theta, support, solver: solver.clone(), out: out.clone() };
    let env = envelope("theta solve", Some(solver.seed), echo, SolveResult { report, support_sweep: trials }, start);
    write_atomic(&out, &to_json(&env)?)?;
    println!("{summary}");
    if converged {
        Ok(())
    } else {
        Err(CliError::Numerical(format!(
            "not converged: constraint residual {residual:.3e} above residual_tol {:.1e}; the energy is not a valid bound",
            solver.residual_tol
        )))
    }
}

fn theta_bruteforce(a: BruteforceArgs, cfg: &mut Resolver) -> Result<(), CliError> {
    let theta: f64 = cfg.require("theta", a.theta)?;
    let max_support: usize = cfg.or("max_support", a.max_support, 3)?;
    let grid_steps: usize = cfg.or("grid_steps", a.grid_steps, 100)?;
    cfg.finish()?;
    check_theta(theta)?;
    let v = bruteforce_theta_m1(theta, max_support, grid_steps)?;
    if !v.is_finite() {
        return Err(CliError::Numerical("no feasible weight vector on this grid".into()));
    }
    println!("bruteforce theta(1,{theta},n) = {} (support <= {max_support}, {grid_steps} steps)", fmt17(v));
    println!("closed form 2^(1-theta) = {}", fmt17(2f64.powf(1.0 - theta)));
    Ok(())
}

fn theta_closed_form(a: ClosedFormArgs, cfg: &mut Resolver) -> Result<(), CliError> {
    let n: usize = cfg.require("n", a.n)?;
    let m: u32 = cfg.require("m", a.m)?;
    let theta: f64 = cfg.require("theta", a.theta)?;
    cfg.finish()?;
    check_theta(theta)?;
    match closed_form_theta(m, theta, dimension(n)?)? {
        Some(v) => println!("theta({m},{theta},{n}) = {}", fmt17(v)),
        None => println!("theta({m},{theta},{n}) = unknown"),
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct CertifyEcho {
    measure: PathBuf,
    m: u32,
    theta: f64,
    tol: f64,
}

#[derive(Debug, Serialize)]
struct CertifyResult {
    kind: &'static str,
    certified: bool,
    deviation: f64,
    parseval_sums: Vec<f64>,
    lower_bound: Option<f64>,
    energy: f64,
    reason: Option<String>,
}

fn certify(a: CertifyArgs, cfg: &mut Resolver) -> Result<(), CliError> {
    let start = Instant::now();
    let path: PathBuf = cfg.require("measure", a.measure)?;
    let m: u32 = cfg.require("m", a.m)?;
    let theta: f64 = cfg.or("theta", a.theta, 0.5)?;
    let tol: f64 = cfg.or("tol", a.tol, CERTIFICATE_TOL)?;
    let out: Option<PathBuf> = cfg.opt("out", a.out)?;
    cfg.finish()?;
    check_theta(theta)?;
    let text = std::fs::read_to_string(&path)
        .map_err(|e| CliError::Config(format!("cannot read measure {}: {e}", path.display())))?;
    let measure = DiscreteMeasure::from_json(&text)
        .map_err(|e| CliError::Config(format!("malformed measure file {}: {e}", path.display())))?;
    let n = measure.dimension().get();
    let energy = theta_energy(&measure, theta)?;
    let result = if n == 1 {
        let c = circle_certificate(&measure, m, tol)?;
        CertifyResult {
            kind: "circle",
            certified: c.certified,
            deviation: c.max_unitarity_deviation,
            parseval_sums: c.parseval_sums,
            lower_bound: c.certified.then(|| (m as f64 + 1.0).powf(1.0 - theta)),
            energy,
            reason: (!c.certified).then(|| format!("unitarity deviation above {tol:e}")),
        }
    } else if m == 2 {
        let c = gram_certificate_m2(&measure, theta, tol)?;
        CertifyResult {
            kind: "gram-frame",
            certified: c.certified,
            deviation: c.max_orthonormality_deviation,
            parseval_sums: c.parseval_sums,
            lower_bound: c.certified.then_some(c.nominal_bound),
            energy,
            reason: c.reason,
        }
    } else if m == 1 {
        let f = is_feasible(&measure, 1, tol)?;
        CertifyResult {
            kind: "centroid",
            certified: f.feasible,
            deviation: f.residual_norm,
            parseval_sums: Vec::new(),
            lower_bound: f.feasible.then(|| 2f64.powf(1.0 - theta)),
            energy,
            reason: (!f.feasible).then(|| format!("centroid residual above {tol:e}")),
        }
    } else {
        return Err(CliError::Config(format!("no certificate for degree {m} on S^{n}; supported: m = 1, 2, or n = 1")));
    };
    println!("certificate: {} ({})", if result.certified { "certified" } else { "refused" }, result.kind);
    println!("deviation: {:.3e}", result.deviation);
    if !result.parseval_sums.is_empty() {
        let sums: Vec<String> = result.parseval_sums.iter().map(|v| format!("{v:.12}")).collect();
        println!("parseval sums: [{}]", sums.join(", "));
    }
    match result.lower_bound {
        Some(b) => println!("lower bound: sum nu_i^theta >= {} (energy {})", fmt17(b), fmt17(energy)),
        None => println!("lower bound: none (energy {})", fmt17(energy)),
    }
    let certified = result.certified;
    let reason = result.reason.clone();
    if let Some(out) = out {
        let echo = CertifyEcho { measure: path, m, theta, tol };
        write_atomic(&out, &to_json(&envelope("certify", None, echo, result, start))?)?;
    }
    if certified {
        Ok(())
    } else {
        Err(CliError::Numerical(format!("certificate refused: {}", reason.unwrap_or_default())))
    }
}

fn sobolev_params(cfg: &mut Resolver, n: Option<usize>, p: Option<f64>) -> Result<SobolevParams, CliError> {
    let n: usize = cfg.require("n", n)?;
    let p: f64 = cfg.require("p", p)?;
    Ok(SobolevParams::new(n, p)?)
}

fn const_sobolev(a: SobolevArgs, cfg: &mut Resolver) -> Result<(), CliError> {
    let params = sobolev_params(cfg, a.n, a.p)?;
    cfg.finish()?;
    let s = sharp_sobolev(&params);
    println!("S_{{{},{}}} = {}", params.n, params.p, fmt17(s));
    if params.p == 2.0 {
        let c = classical_p2_constant(params.n)?;
        println!("p=2 cross-check: |S^2 - 4/(n(n-2))|S^n|^(-2/n)| = {:.3e}", (s * s - c * c).abs());
    }
    Ok(())
}

fn const_biharmonic(a: BiharmonicArgs, cfg: &mut Resolver) -> Result<(), CliError> {
    let n: usize = cfg.require("n", a.n)?;
    cfg.finish()?;
    println!("S_{{{n},2,2}} = {}", fmt17(sharp_biharmonic(dimension(n)?)?));
    Ok(())
}

fn const_improved(a: ImprovedArgs, cfg: &mut Resolver) -> Result<(), CliError> {
    let params = sobolev_params(cfg, a.n, a.p)?;
    let m: u32 = cfg.require("m", a.m)?;
    cfg.finish()?;
    let v = improved_constant(&params, m)?;
    println!("improved constant (n={}, p={}, m={m}) = {}", params.n, params.p, fmt17(v));
    println!("theta = (n-p)/n = {}", fmt17(params.theta));
    Ok(())
}

#[derive(Debug, Serialize)]
struct SweepEcho {
    n: usize,
    p: f64,
    eps: Vec<f64>,
    delta: f64,
    tau: f64,
    bump_radius: f64,
    centers: &'static str,
}

#[derive(Debug, Serialize)]
struct SweepResult {
    target: f64,
    limit_ratio: f64,
    rows: Vec<SweepRow>,
}

fn bubble_sweep(a: SweepArgs, cfg: &mut Resolver) -> Result<(), CliError> {
    let start = Instant::now();
    let params = sobolev_params(cfg, a.n, a.p)?;
    let eps: RealList = cfg.require("eps", a.eps.map(RealList::Text))?;
    let eps = eps.into_vec()?;
    let delta: f64 = cfg.or("delta", a.delta, DEFAULT_DELTA)?;
    let out: Option<PathBuf> = cfg.opt("out", a.out)?;
    let report: Option<PathBuf> = cfg.opt("report", a.report)?;
    cfg.finish()?;
    if !(2..=3).contains(&params.n) {
        return Err(CliError::Config(format!(
            "sweeps run for n = 2 or 3 only (got {}); use `bubble identity-check` in higher dimensions",
            params.n
        )));
    }
    if eps.is_empty() || eps.iter().any(|&e| !(e > 0.0 && e < delta)) {
        return Err(CliError::Config(format!("every eps must lie in (0, delta = {delta})")));
    }
    if eps.windows(2).any(|w| w[1] >= w[0]) {
        return Err(CliError::Config("eps list must be strictly descending".into()));
    }
    // fail on geometry before spending time on quadrature
    BubbleProfile::simplex(params, eps[0], delta)?;
    let rows = rayleigh_sweep(&params, &eps, delta)?;
    let csv = sweep_csv(&rows);
    match &out {
        Some(path) => write_atomic(path, &csv)?,
        None => print!("{csv}"),
    }
    if let Some(path) = report {
        let echo = SweepEcho {
            n: params.n,
            p: params.p,
            eps,
            delta,
            tau: BubbleProfile::default_tau(&params),
            bump_radius: DEFAULT_BUMP_RADIUS,
            centers: "regular simplex",
        };
        let result = SweepResult {
            target: rayleigh_target(&params),
            limit_ratio: leading_coefficients(&params)?.limit_ratio,
            rows,
        };
        write_atomic(&path, &to_json(&envelope("bubble sweep", None, echo, result, start))?)?;
    }
    Ok(())
}

fn identity_check(a: IdentityArgs, cfg: &mut Resolver) -> Result<(), CliError> {
    let params = sobolev_params(cfg, a.n, a.p)?;
    cfg.finish()?;
    let c = leading_coefficients(&params)?;
    let disc = limit_identity_check(&params)?;
    println!("limit ratio c_num^(p/p*)/c_grad = {}", fmt17(c.limit_ratio));
    println!("(n+2)^(-p/n) S^p             = {}", fmt17(rayleigh_target(&params)));
    println!("discrepancy = {disc:.3e}");
    if disc < IDENTITY_TOL {
        Ok(())
    } else {
        Err(CliError::Numerical(format!("identity check failed: discrepancy {disc:.3e} >= {IDENTITY_TOL:e}")))
    }
}

#[derive(Debug, Serialize)]
struct Key {
    key: &'static str,
    kind: &'static str,
    default: Option<&'static str>,
    help: &'static str,
}

#[derive(Debug, Serialize)]
struct CommandSchema {
    command: &'static str,
    keys: Vec<Key>,
}

fn key(key: &'static str, kind: &'static str, default: Option<&'static str>, help: &'static str) -> Key {
    Key { key, kind, default, help }
}

fn schema() -> Vec<CommandSchema> {
    let n = || key("n", "integer", None, "sphere dimension (S^n in R^{n+1})");
    let p = || key("p", "real", None, "Sobolev exponent, 1 < p < n");
    vec![
        CommandSchema {
            command: "theta solve",
            keys: vec![
                n(),
                key("m", "integer", None, "moment degree"),
                key("theta", "real", None, "exponent in (0, 1)"),
                key("support", "integer", None, "atoms per restart; swept from the minimal support to 2(n+2) if absent"),
                key("restarts", "integer", Some("20"), "independent random starts"),
                key("seed", "integer", Some("0"), "base seed; restart r uses stream r"),
                key("max_outer_iters", "integer", Some("12"), "penalty increases"),
                key("max_inner_iters", "integer", Some("3000"), "projected-gradient steps per penalty level"),
                key("penalty_init", "real", Some("10"), "initial penalty weight"),
                key("penalty_growth", "real", Some("10"), "penalty multiplier per outer iteration"),
                key("step_size", "real", Some("0.01"), "initial step length"),
                key("grad_tol", "real", Some("1e-10"), "inner-loop stationarity tolerance"),
                key("residual_tol", "real", Some("1e-8"), "constraint residual required for convergence"),
                key("merge_tol", "real", Some("1e-6"), "geodesic distance below which atoms merge"),
                key("out", "path", Some("theta_report.json"), "report file"),
            ],
        },
        CommandSchema {
            command: "theta bruteforce",
            keys: vec![
                key("theta", "real", None, "exponent in (0, 1)"),
                key("max_support", "integer", Some("3"), "largest support, at most 5"),
                key("grid_steps", "integer", Some("100"), "weight grid resolution, at most 200"),
            ],
        },
        CommandSchema {
            command: "theta closed-form",
            keys: vec![n(), key("m", "integer", None, "moment degree"), key("theta", "real", None, "exponent in (0, 1)")],
        },
        CommandSchema {
            command: "certify",
            keys: vec![
                key("measure", "path", None, "measure JSON file"),
                key("m", "integer", None, "moment degree"),
                key("theta", "real", Some("0.5"), "exponent for the energy bound"),
                key("tol", "real", Some("1e-8"), "accepted frame deviation"),
                key("out", "path", None, "report file"),
            ],
        },
        CommandSchema { command: "const sobolev", keys: vec![n(), p()] },
        CommandSchema { command: "const biharmonic", keys: vec![key("n", "integer", None, "dimension, at least 5")] },
        CommandSchema { command: "const improved", keys: vec![n(), p(), key("m", "integer", None, "moment degree 1, 2 or 3")] },
        CommandSchema {
            command: "bubble sweep",
            keys: vec![
                key("n", "integer", None, "dimension, 2 or 3"),
                p(),
                key("eps", "real list", None, "strictly descending, e.g. \"1e-2,1e-3\" or [1e-2, 1e-3]"),
                key("delta", "real", Some("0.3"), "cap radius; caps have radius 2·delta"),
                key("out", "path", None, "CSV file; stdout if absent"),
                key("report", "path", None, "JSON report with metadata and diagnostics"),
            ],
        },
        CommandSchema { command: "bubble identity-check", keys: vec![n(), p()] },
    ]
}
