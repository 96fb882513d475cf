use std::f64::consts::{FRAC_2_PI, PI};
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use nlgs_core::continuation::{self, half_laplacian_soliton, local_soliton, ContinuationParams};
use nlgs_core::functionals::{check_gn_window, constant_sweep, constant_sweep_csv, profile_h};
use nlgs_core::grid::{GridSpec, Profile};
use nlgs_core::groundstate::{gaussian, petviashvili, SolveParams};
use nlgs_core::linearization::{
    build_linearized, eigensolve_with_references, nondegeneracy_check, CheckStatus,
    NondegeneracyReport, SpectralReport,
};
use nlgs_core::spectral::{lp_norm, spectral_derivative, FourierMultiplier};
use nlgs_core::verify::{run_verification, VerifyConfig};

use crate::config::ConfigFile;
use crate::{Cli, CliError, ConstantsArgs, ContinueArgs, GridArgs, SolveArgs, SpectrumArgs, VerifyArgs};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Op {
    Frac,
    Ilw,
}

impl FromStr for Op {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "frac" => Ok(Op::Frac),
            "ilw" => Ok(Op::Ilw),
            _ => Err(format!("unknown operator {s:?}; expected frac or ilw")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileSource {
    Sech,
    Soliton,
    Lorentzian,
    Solve,
}

impl FromStr for ProfileSource {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "sech" => Ok(ProfileSource::Sech),
            "soliton" => Ok(ProfileSource::Soliton),
            "lorentzian" => Ok(ProfileSource::Lorentzian),
            "solve" => Ok(ProfileSource::Solve),
            _ => Err(format!("unknown profile {s:?}; expected sech, soliton, lorentzian or solve")),
        }
    }
}

pub struct Context<'a> {
    pub file: &'a ConfigFile,
    pub out_dir: PathBuf,
    pub timestamp: bool,
}

impl<'a> Context<'a> {
    pub fn new(cli: &Cli, file: &'a ConfigFile) -> Result<Self, CliError> {
        let out_dir = file.get(cli.out_dir.clone(), "out-dir", PathBuf::from("."))?;
        let timestamp = !file.flag(cli.no_timestamp, "no-timestamp")?;
        Ok(Self {
            file,
            out_dir,
            timestamp,
        })
    }

    fn grid(&self, args: &GridArgs, default: GridSpec) -> Result<GridSpec, CliError> {
        let l = self.file.get(args.half_width, "half-width", default.half_width())?;
        let n = self.file.get(args.points, "points", default.len())?;
        Ok(GridSpec::new(l, n)?)
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }

    fn write(&self, path: &Path, contents: &str) -> Result<(), CliError> {
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)?;
        }
        fs::write(path, contents)?;
        Ok(())
    }

    fn stamp(&self) -> Option<String> {
        self.timestamp.then(|| {
            let secs = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
            format!("unix:{secs}")
        })
    }
}

#[derive(Serialize)]
struct Envelope<'a, C: Serialize, R: Serialize> {
    schema: u32,
    tool_version: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    timestamp: Option<String>,
    command: &'a str,
    config: C,
    result: R,
}

fn envelope_json<C: Serialize, R: Serialize>(ctx: &Context, command: &str, config: C, result: R) -> Result<String, CliError> {
    let env = Envelope {
        schema: 1,
        tool_version: env!("CARGO_PKG_VERSION"),
        timestamp: ctx.stamp(),
        command,
        config,
        result,
    };
    Ok(serde_json::to_string_pretty(&env)? + "\n")
}

fn default_mu(op: Op) -> f64 {
    match op {
        Op::Ilw => FRAC_2_PI,
        Op::Frac => 1.0,
    }
}

fn multiplier(op: Op, s: f64) -> Result<FourierMultiplier, CliError> {
    Ok(match op {
        Op::Ilw => FourierMultiplier::ilw(),
        Op::Frac => FourierMultiplier::fractional_laplacian(s)?,
    })
}

/// Closed-form ground states for parameter choices that have one.
fn oracle(op: Op, s: f64, alpha: f64, mu: f64, grid: GridSpec) -> Option<(&'static str, Profile)> {
    match op {
        Op::Ilw if alpha == 1.0 && (mu - FRAC_2_PI).abs() < 1e-12 => {
            Some(("sech(t)", Profile::from_fn(grid, profile_h).ok()?))
        }
        Op::Frac if s == 1.0 && mu == 1.0 => Some(("closed-form s = 1 soliton", local_soliton(grid, alpha).ok()?)),
        Op::Frac if s == 0.5 && alpha == 1.0 && mu == 1.0 => Some(("2/(1+t^2)", half_laplacian_soliton(grid))),
        _ => None,
    }
}

#[derive(Serialize)]
struct SolveConfig {
    op: Op,
    s: f64,
    alpha: f64,
    mu: f64,
    grid: GridSpec,
    params: SolveParams,
}

#[derive(Serialize)]
struct SolveSummary {
    converged: bool,
    residual_sup: f64,
    iterations: usize,
    stabilizer: f64,
    peak: f64,
    l2_norm: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle_sup_distance: Option<f64>,
    profile_file: String,
}

pub fn solve(ctx: &Context, a: &SolveArgs) -> Result<bool, CliError> {
    let f = ctx.file;
    let op = f.get(a.op, "op", Op::Frac)?;
    let s = f.get(a.s, "s", 1.0)?;
    let alpha = f.get(a.alpha, "alpha", 1.0)?;
    let mu = f.get(a.mu, "mu", default_mu(op))?;
    let defaults = SolveParams::default();
    let params = SolveParams {
        max_iters: f.get(a.max_iters, "max-iters", defaults.max_iters)?,
        residual_tol: f.get(a.tol, "tol", defaults.residual_tol)?,
        ..defaults
    };
    let grid = ctx.grid(&a.grid, GridSpec::standard())?;
    f.finish()?;
    match op {
        Op::Frac => check_gn_window(s, alpha)?,
        Op::Ilw if !(alpha > 0.0) => return Err(CliError::Invalid(format!("alpha = {alpha} must be positive"))),
        Op::Ilw => {}
    }
    if !(mu > 0.0) {
        return Err(CliError::Invalid(format!("mu = {mu} must be positive")));
    }
    let m = multiplier(op, s)?;
    let out = petviashvili(&m, mu, alpha, &gaussian(grid, 1.0, 0.0, 1.0), &params)?;
    let oracle = oracle(op, s, alpha, mu, grid);
    let oracle_distance = match &oracle {
        Some((_, q)) => Some(out.profile.sup_distance(q)?),
        None => None,
    };
    let profile_path = ctx.path("profile.csv");
    ctx.write(&profile_path, &out.profile.to_csv(true))?;
    let summary = SolveSummary {
        converged: out.converged,
        residual_sup: out.residual_sup,
        iterations: out.iterations,
        stabilizer: out.stabilizer,
        peak: out.profile.max_abs(),
        l2_norm: lp_norm(&out.profile, 2.0)?,
        oracle: oracle.map(|(name, _)| name.to_string()),
        oracle_sup_distance: oracle_distance,
        profile_file: "profile.csv".into(),
    };
    let config = SolveConfig {
        op,
        s,
        alpha,
        mu,
        grid,
        params,
    };
    ctx.write(&ctx.path("solve.json"), &envelope_json(ctx, "solve", config, &summary)?)?;
    println!(
        "{} after {} iterations, residual {:.3e}",
        if out.converged { "converged" } else { "NOT converged" },
        out.iterations,
        out.residual_sup
    );
    if let (Some(name), Some(d)) = (&summary.oracle, oracle_distance) {
        println!("sup distance to {name}: {d:.3e}");
    }
    Ok(out.converged)
}

pub fn verify(ctx: &Context, a: &VerifyArgs) -> Result<bool, CliError> {
    let f = ctx.file;
    let defaults = VerifyConfig::default();
    let config = VerifyConfig {
        grid: ctx.grid(&a.grid, defaults.grid)?,
        seed: f.get(a.seed, "seed", defaults.seed)?,
        taus: f.list(a.tau.clone(), "tau", defaults.taus.clone())?,
        lmax: f.get(a.lmax, "lmax", defaults.lmax)?,
        continuation_steps: f.get(a.steps, "steps", defaults.continuation_steps)?,
        only: f.list(a.only.clone(), "only", vec![])?,
        skip: f.list(a.skip.clone(), "skip", vec![])?,
        ..defaults
    };
    let report_path = f.get(a.report.clone(), "report", ctx.path("verify.json"))?;
    f.finish()?;
    let mut report = run_verification(&config)?;
    report.timestamp = ctx.stamp();
    ctx.write(&report_path, &(report.to_json()? + "\n"))?;
    for c in &report.checks {
        println!("{} {}  [{:.3e} vs {:.3e}]", if c.pass { "PASS" } else { "FAIL" }, c.name, c.lhs, c.rhs);
    }
    let failed = report.failures().count();
    println!("{} checks, {} failed; report: {}", report.checks.len(), failed, report_path.display());
    Ok(report.pass)
}

#[derive(Serialize)]
struct ContinueConfig {
    alpha: f64,
    s_to: f64,
    steps: usize,
    params: ContinuationParams,
    certify: bool,
}

#[derive(Serialize)]
struct ContinueSummary {
    complete: bool,
    diagnostic: Option<String>,
    points: usize,
    endpoint_s: f64,
    max_residual: f64,
    min_even_gap: f64,
    continuity_ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    endpoint_distance_to_closed_form: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    certificates: Vec<NondegeneracyReport>,
    branch_file: String,
    manifest_file: String,
}

/// Tolerance on the endpoint against `2/(1+t²)`.
const ENDPOINT_TOL: f64 = 1e-3;

pub fn continue_branch(ctx: &Context, a: &ContinueArgs) -> Result<bool, CliError> {
    let f = ctx.file;
    let alpha = f.get(a.alpha, "alpha", 1.0)?;
    let s_to = f.get(a.s_to, "s-to", 0.5)?;
    let steps = f.get(a.steps, "steps", 50)?;
    let defaults = ContinuationParams::default();
    let params = ContinuationParams {
        max_halvings: f.get(a.max_halvings, "max-halvings", defaults.max_halvings)?,
        secant_predictor: !f.flag(a.no_secant, "no-secant")?,
        ..defaults
    };
    let certify = f.flag(a.certify, "certify")?;
    f.finish()?;
    let branch = continuation::continue_branch(alpha, s_to, steps, &params)?;
    let end = branch.endpoint().expect("branch holds its start point");
    let distance = if alpha == 1.0 && s_to == 0.5 && branch.complete {
        Some(end.profile.sup_distance(&half_laplacian_soliton(*end.profile.grid()))?)
    } else {
        None
    };
    let certificates = if certify { continuation::certify_branch(&branch)? } else { Vec::new() };

    ctx.write(&ctx.path("branch.csv"), &branch.to_csv())?;
    let manifest = branch.manifest();
    ctx.write(&ctx.path("branch_manifest.json"), &(serde_json::to_string_pretty(&manifest)? + "\n"))?;
    for (p, entry) in branch.points.iter().zip(&manifest.points) {
        ctx.write(&ctx.path("profiles").join(&entry.file), &p.profile.to_csv(true))?;
    }
    let summary = ContinueSummary {
        complete: branch.complete,
        diagnostic: branch.diagnostic.clone(),
        points: branch.points.len(),
        endpoint_s: end.s,
        max_residual: branch.points.iter().map(|p| p.residual_sup).fold(0.0, f64::max),
        min_even_gap: branch.points.iter().map(|p| p.even_gap).fold(f64::INFINITY, f64::min),
        continuity_ok: branch.continuity_ok(),
        endpoint_distance_to_closed_form: distance,
        certificates,
        branch_file: "branch.csv".into(),
        manifest_file: "branch_manifest.json".into(),
    };
    let config = ContinueConfig {
        alpha,
        s_to,
        steps,
        params,
        certify,
    };
    ctx.write(&ctx.path("continue.json"), &envelope_json(ctx, "continue", config, &summary)?)?;

    println!(
        "{} points, s = {} .. {}, max residual {:.3e}, min even gap {:.3e}",
        summary.points, branch.points[0].s, end.s, summary.max_residual, summary.min_even_gap
    );
    if let Some(d) = distance {
        println!("endpoint sup distance to 2/(1+t^2): {d:.3e}");
    }
    if let Some(msg) = &branch.diagnostic {
        println!("stopped early: {msg}");
    }
    let certified = summary.certificates.iter().all(|c| c.status == CheckStatus::Pass);
    Ok(branch.complete && certified && distance.map_or(true, |d| d <= ENDPOINT_TOL))
}

#[derive(Serialize)]
struct SpectrumConfig {
    op: Op,
    profile: ProfileSource,
    s: f64,
    alpha: f64,
    mu: f64,
    grid: GridSpec,
    zero_tol: Option<f64>,
}

#[derive(Serialize)]
struct SpectrumResult {
    spectrum: SpectralReport,
    nondegeneracy: NondegeneracyReport,
    eigenvalues_file: String,
}

pub fn spectrum(ctx: &Context, a: &SpectrumArgs) -> Result<bool, CliError> {
    let f = ctx.file;
    let op = f.get(a.op, "op", Op::Ilw)?;
    let default_profile = match op {
        Op::Ilw => ProfileSource::Sech,
        Op::Frac => ProfileSource::Soliton,
    };
    let profile = f.get(a.profile, "profile", default_profile)?;
    let s = f.get(a.s, "s", if profile == ProfileSource::Lorentzian { 0.5 } else { 1.0 })?;
    let alpha = f.get(a.alpha, "alpha", 1.0)?;
    let mu = f.get(a.mu, "mu", default_mu(op))?;
    let zero_tol = f.opt(a.zero_tol, "zero-tol")?;
    let default_grid = match profile {
        ProfileSource::Lorentzian => GridSpec::new(200.0, 2048)?,
        _ => GridSpec::spectral(),
    };
    let grid = ctx.grid(&a.grid, default_grid)?;
    f.finish()?;

    let m = multiplier(op, s)?;
    let q = match (profile, op) {
        (ProfileSource::Sech, Op::Ilw) if alpha == 1.0 => Profile::from_fn(grid, profile_h)?,
        (ProfileSource::Soliton, Op::Frac) if s == 1.0 => local_soliton(grid, alpha)?,
        (ProfileSource::Lorentzian, Op::Frac) if s == 0.5 && alpha == 1.0 => half_laplacian_soliton(grid),
        (ProfileSource::Solve, _) => {
            if op == Op::Frac {
                check_gn_window(s, alpha)?;
            }
            let out = petviashvili(&m, mu, alpha, &gaussian(grid, 1.0, 0.0, 1.0), &SolveParams::default())?;
            if !out.converged {
                return Err(CliError::Numerical(format!(
                    "ground state did not converge (residual {:.3e})",
                    out.residual_sup
                )));
            }
            out.profile
        }
        _ => {
            return Err(CliError::Invalid(format!(
                "profile {profile:?} has no closed form for op {op:?}, s = {s}, alpha = {alpha}; use --profile solve"
            )))
        }
    };
    let d = build_linearized(&m, mu, alpha + 1.0, &q, alpha)?;
    let reference = spectral_derivative(&q).into_values();
    let spectrum = eigensolve_with_references(&d, zero_tol, &[reference])?;
    let nondegeneracy = nondegeneracy_check(&d, &q, zero_tol)?;
    ctx.write(&ctx.path("eigenvalues.csv"), &spectrum.eigenvalues_csv())?;
    let config = SpectrumConfig {
        op,
        profile,
        s,
        alpha,
        mu,
        grid,
        zero_tol,
    };
    println!(
        "{} eigenvalues, {} zero mode(s), Morse index {}, kernel check: {:?}",
        spectrum.eigenvalues.len(),
        spectrum.zero_modes.len(),
        spectrum.morse_index,
        nondegeneracy.status
    );
    let result = SpectrumResult {
        spectrum,
        nondegeneracy,
        eigenvalues_file: "eigenvalues.csv".into(),
    };
    ctx.write(&ctx.path("spectrum.json"), &envelope_json(ctx, "spectrum", config, &result)?)?;
    Ok(true)
}

#[derive(Serialize)]
struct ConstantsConfig {
    theta_min: f64,
    theta_max: f64,
    steps: usize,
    /// `None`: a grid fitted to each `θ`.
    grid: Option<GridSpec>,
}

pub fn constants(ctx: &Context, a: &ConstantsArgs) -> Result<bool, CliError> {
    let f = ctx.file;
    let theta_min = f.get(a.theta_min, "theta-min", 0.1)?;
    let theta_max = f.get(a.theta_max, "theta-max", 3.0)?;
    let steps = f.get(a.steps, "steps", 30)?;
    let grid = match (a.grid.half_width, a.grid.points) {
        (None, None) if f.opt::<f64>(None, "half-width")?.is_none() && f.opt::<usize>(None, "points")?.is_none() => None,
        _ => Some(ctx.grid(&a.grid, GridSpec::standard())?),
    };
    f.finish()?;
    if !(theta_min > 0.0 && theta_min < theta_max && theta_max < PI) {
        return Err(CliError::Invalid(format!(
            "need 0 < theta-min < theta-max < pi, got {theta_min}, {theta_max}"
        )));
    }
    if steps < 2 {
        return Err(CliError::Invalid("steps must be at least 2".into()));
    }
    let thetas: Vec<f64> = (0..steps)
        .map(|i| theta_min + (theta_max - theta_min) * i as f64 / (steps - 1) as f64)
        .collect();
    let rows = constant_sweep(&thetas, grid)?;
    let path = ctx.path("constants.csv");
    ctx.write(&path, &constant_sweep_csv(&rows))?;
    let worst = rows
        .iter()
        .map(|r| (r.quadrature_constant - r.closed_constant).abs() / r.closed_constant.abs())
        .fold(0.0, f64::max);
    println!("{} rows, max relative closed/quadrature gap {worst:.3e}; wrote {}", rows.len(), path.display());
    let config = ConstantsConfig {
        theta_min,
        theta_max,
        steps,
        grid,
    };
    ctx.write(&ctx.path("constants.json"), &envelope_json(ctx, "constants", config, &rows)?)?;
    Ok(rows.iter().all(|r| r.closed_constant.is_finite() && r.quadrature_constant.is_finite()))
}
