//! Branch `s ↦ Q_s` of even ground states of `(−Δ)^s Q + Q − Q^{α+1} = 0`,
//! started from the closed-form soliton at `s = 1`.

use faer::linalg::solvers::Solve;
use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::check_gn_window;
use crate::grid::{GridSpec, Profile};
use crate::groundstate::{pointwise_power, residual};
use crate::linearization::{
    build_linearized, even_block, nondegeneracy_check, sym_eigenvalues, NondegeneracyReport,
};
use crate::spectral::{apply_multiplier, fft_real, lp_norm, trig_interpolate, FourierMultiplier};

/// Residual tolerance for the closed-form soliton.
pub const LOCAL_SOLITON_TOL: f64 = 1e-9;

/// `((α+2)/2)^{1/α} sech^{2/α}(αt/2)`.
pub fn local_soliton(grid: GridSpec, alpha: f64) -> Result<Profile> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
    }
    let amp = ((alpha + 2.0) / 2.0).powf(1.0 / alpha);
    let q = Profile::from_fn(grid, |t| amp * (1.0 / (0.5 * alpha * t).cosh()).powf(2.0 / alpha))?
        .symmetrized();
    let r = residual(&FourierMultiplier::fractional_laplacian(1.0)?, 1.0, alpha, &q)?;
    if r > LOCAL_SOLITON_TOL {
        return Err(Error::InvalidGrid(format!(
            "closed-form soliton has residual {r:e} on L={}, N={}; grid too coarse",
            grid.half_width(),
            grid.len()
        )));
    }
    Ok(q)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NewtonParams {
    pub tol: f64,
    pub max_iters: usize,
    /// Smallest admissible `|λ|` of the even-restricted Jacobian.
    pub gap_floor: f64,
}

impl Default for NewtonParams {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iters: 25,
            gap_floor: 1e-8,
        }
    }
}

#[derive(Debug, Clone)]
pub struct NewtonOutcome {
    pub profile: Profile,
    pub residual_sup: f64,
    pub iterations: usize,
    /// Smallest `|λ|` of `L₊` on even vectors at the returned profile.
    pub even_gap: f64,
}

fn linearized(s: f64, alpha: f64, q: &Profile) -> Result<crate::linearization::DenseOperator> {
    build_linearized(
        &FourierMultiplier::fractional_laplacian(s)?,
        1.0,
        alpha + 1.0,
        q,
        alpha,
    )
}

fn even_gap_at(s: f64, alpha: f64, q: &Profile) -> Result<f64> {
    let block = even_block(&linearized(s, alpha, q)?);
    Ok(sym_eigenvalues(&block)?
        .iter()
        .fold(f64::INFINITY, |m, v| m.min(v.abs())))
}

/// `F(Q) = (−Δ)^s Q + Q − Q^{α+1}` pointwise.
fn nonlinear_map(m: &FourierMultiplier, alpha: f64, q: &Profile) -> Result<Vec<f64>> {
    let aq = apply_multiplier(m, q)?;
    Ok(aq
        .values()
        .iter()
        .zip(q.values())
        .map(|(a, v)| a + v - pointwise_power(*v, alpha))
        .collect())
}

/// Even coordinates `(u_0, u_{N/2}, (u_j + u_{N−j})/√2)`.
fn project_even(u: &[f64]) -> Vec<f64> {
    let n = u.len();
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(n / 2 + 1);
    out.push(u[0]);
    out.push(u[n / 2]);
    out.extend((1..n / 2).map(|j| r * (u[j] + u[n - j])));
    out
}

fn lift_even(c: &[f64], n: usize) -> Vec<f64> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = vec![0.0; n];
    out[0] = c[0];
    out[n / 2] = c[1];
    for j in 1..n / 2 {
        out[j] = r * c[j + 1];
        out[n - j] = r * c[j + 1];
    }
    out
}

/// Newton iteration for `F(Q) = 0` on the even subspace.
///
/// The even gap is measured at the returned profile; a gap at or below
/// `gap_floor` is reported as a singular Jacobian.
pub fn newton_correct(s: f64, alpha: f64, init: &Profile, params: &NewtonParams) -> Result<NewtonOutcome> {
    let m = FourierMultiplier::fractional_laplacian(s)?;
    if init.is_zero() {
        return Err(Error::ZeroInput);
    }
    let mut q = init.symmetrized();
    let n = q.len();
    let mut f = nonlinear_map(&m, alpha, &q)?;
    let mut r = f.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let mut iterations = 0;
    while r > params.tol {
        if iterations == params.max_iters {
            return Err(Error::NewtonDiverged {
                iterations,
                residual: r,
            });
        }
        let jacobian = even_block(&linearized(s, alpha, &q)?);
        let rhs = project_even(&f);
        let b = Mat::from_fn(rhs.len(), 1, |i, _| rhs[i]);
        let step = jacobian.partial_piv_lu().solve(&b);
        let coeffs: Vec<f64> = (0..rhs.len()).map(|i| step[(i, 0)]).collect();
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::SingularJacobian {
                gap: 0.0,
                floor: params.gap_floor,
            });
        }
        let delta = lift_even(&coeffs, n);
        let values: Vec<f64> = q.values().iter().zip(&delta).map(|(v, d)| v - d).collect();
        q = Profile::new(*q.grid(), values)?.symmetrized();
        f = nonlinear_map(&m, alpha, &q)?;
        r = f.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        iterations += 1;
        if !r.is_finite() {
            return Err(Error::NewtonDiverged {
                iterations,
                residual: r,
            });
        }
    }
    let even_gap = even_gap_at(s, alpha, &q)?;
    if even_gap <= params.gap_floor {
        return Err(Error::SingularJacobian {
            gap: even_gap,
            floor: params.gap_floor,
        });
    }
    Ok(NewtonOutcome {
        profile: q,
        residual_sup: r,
        iterations,
        even_gap,
    })
}

/// Trigonometric interpolation of `q` inside its box, zero outside.
pub fn resample(q: &Profile, target: GridSpec) -> Profile {
    let source = q.grid();
    if *source == target {
        return q.clone();
    }
    let coeffs = fft_real(q.values());
    let l = source.half_width();
    let values = target
        .nodes()
        .iter()
        .map(|&t| if t.abs() < l { trig_interpolate(q, &coeffs, t) } else { 0.0 })
        .collect();
    Profile::new(target, values).expect("interpolated samples are finite")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContinuationParams {
    pub newton: NewtonParams,
    /// Halvings of `Δs` allowed per step before the branch stops.
    pub max_halvings: u32,
    pub small_box: GridSpec,
    pub large_box: GridSpec,
    /// Points with `s` below this use the large box.
    pub box_switch: f64,
    pub secant_predictor: bool,
}

impl Default for ContinuationParams {
    fn default() -> Self {
        Self {
            newton: NewtonParams::default(),
            max_halvings: 4,
            small_box: GridSpec::spectral(),
            large_box: GridSpec::new(200.0, 2048).expect("valid grid"),
            box_switch: 0.8,
            secant_predictor: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BranchPoint {
    pub s: f64,
    pub profile: Profile,
    pub residual_sup: f64,
    pub even_gap: f64,
    pub newton_iterations: usize,
}

impl BranchPoint {
    pub fn peak_value(&self) -> f64 {
        self.profile.values()[self.profile.grid().origin_index()]
    }

    pub fn l2_norm(&self) -> f64 {
        lp_norm(&self.profile, 2.0).unwrap_or(f64::NAN)
    }
}

#[derive(Debug, Clone)]
pub struct Branch {
    pub alpha: f64,
    pub s_to: f64,
    pub steps: usize,
    pub points: Vec<BranchPoint>,
    /// Whether the branch reached `s_to`.
    pub complete: bool,
    pub diagnostic: Option<String>,
    /// `‖Q_i − Q_{i−1}‖∞` between consecutive recorded points.
    pub step_changes: Vec<f64>,
}

impl Branch {
    pub fn endpoint(&self) -> Option<&BranchPoint> {
        self.points.last()
    }

    /// `C = max ‖Q_i − Q_{i−1}‖∞ / Δs`.
    pub fn continuity_constant(&self) -> f64 {
        self.points
            .windows(2)
            .zip(&self.step_changes)
            .map(|(w, d)| d / (w[0].s - w[1].s).abs())
            .fold(0.0, f64::max)
    }

    /// No step change exceeds ten times the median.
    pub fn continuity_ok(&self) -> bool {
        if self.step_changes.is_empty() {
            return true;
        }
        let mut sorted = self.step_changes.clone();
        sorted.sort_by(f64::total_cmp);
        let median = sorted[sorted.len() / 2];
        self.step_changes.iter().all(|&d| d <= 10.0 * median)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("s,residual,even_gap,peak_value,l2_norm\n");
        for p in &self.points {
            out.push_str(&format!(
                "{:.6},{:.6e},{:.6e},{:.17e},{:.17e}\n",
                p.s,
                p.residual_sup,
                p.even_gap,
                p.peak_value(),
                p.l2_norm()
            ));
        }
        out
    }

    /// Manifest listing each point with the profile file name `profile_{i:04}.csv`.
    pub fn manifest(&self) -> BranchManifest {
        BranchManifest {
            alpha: self.alpha,
            s_to: self.s_to,
            steps: self.steps,
            complete: self.complete,
            diagnostic: self.diagnostic.clone(),
            continuity_constant: self.continuity_constant(),
            continuity_ok: self.continuity_ok(),
            points: self
                .points
                .iter()
                .enumerate()
                .map(|(i, p)| ManifestEntry {
                    s: p.s,
                    grid: *p.profile.grid(),
                    residual: p.residual_sup,
                    even_gap: p.even_gap,
                    newton_iterations: p.newton_iterations,
                    file: format!("profile_{i:04}.csv"),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub s: f64,
    pub grid: GridSpec,
    pub residual: f64,
    pub even_gap: f64,
    pub newton_iterations: usize,
    pub file: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchManifest {
    pub alpha: f64,
    pub s_to: f64,
    pub steps: usize,
    pub complete: bool,
    pub diagnostic: Option<String>,
    pub continuity_constant: f64,
    pub continuity_ok: bool,
    pub points: Vec<ManifestEntry>,
}

/// Path state: last accepted `(s, Q)` and the one before, for the secant.
struct State {
    s: f64,
    q: Profile,
    prev: Option<(f64, Profile)>,
}

impl State {
    fn move_to(&mut self, grid: GridSpec) {
        if *self.q.grid() != grid {
            self.q = resample(&self.q, grid);
            if let Some((s, p)) = self.prev.take() {
                self.prev = Some((s, resample(&p, grid)));
            }
        }
    }

    fn predict(&self, s_next: f64, secant: bool) -> Profile {
        match (&self.prev, secant) {
            (Some((s_prev, q_prev)), true) => {
                let ratio = (s_next - self.s) / (self.s - s_prev);
                self.q
                    .axpy(ratio, &self.q.axpy(-1.0, q_prev).expect("same grid"))
                    .expect("same grid")
            }
            _ => self.q.clone(),
        }
    }
}

/// Uniform `s`-grid from 1 to `s_to` in `steps` steps, Newton-corrected at each point.
///
/// A corrector failure halves the step up to `max_halvings` times; after that the
/// branch returns what it has with `complete = false`.
pub fn continue_branch(alpha: f64, s_to: f64, steps: usize, params: &ContinuationParams) -> Result<Branch> {
    if steps == 0 {
        return Err(Error::InvalidParameter("steps must be at least 1".into()));
    }
    if !(s_to > 0.0 && s_to <= 1.0) {
        return Err(Error::InvalidParameter(format!("s_to = {s_to} outside (0, 1]")));
    }
    let targets: Vec<f64> = (1..=steps)
        .map(|i| 1.0 - (1.0 - s_to) * i as f64 / steps as f64)
        .collect();
    for &s in std::iter::once(&1.0).chain(&targets) {
        check_gn_window(s, alpha)?;
    }
    let grid_for = |s: f64| {
        if s < params.box_switch {
            params.large_box
        } else {
            params.small_box
        }
    };
    let q0 = local_soliton(grid_for(1.0), alpha)?;
    let first = newton_correct(1.0, alpha, &q0, &params.newton)?;
    let mut branch = Branch {
        alpha,
        s_to,
        steps,
        points: vec![BranchPoint {
            s: 1.0,
            profile: first.profile.clone(),
            residual_sup: first.residual_sup,
            even_gap: first.even_gap,
            newton_iterations: first.iterations,
        }],
        complete: true,
        diagnostic: None,
        step_changes: Vec::new(),
    };
    if s_to == 1.0 {
        return Ok(branch);
    }
    let mut state = State {
        s: 1.0,
        q: first.profile,
        prev: None,
    };
    let nominal = (1.0 - s_to) / steps as f64;
    'targets: for &target in &targets {
        let mut ds = nominal;
        let mut halvings = 0;
        let mut last: Option<NewtonOutcome> = None;
        while state.s - target > 1e-12 {
            let s_next = (state.s - ds).max(target);
            state.move_to(grid_for(s_next));
            let guess = state.predict(s_next, params.secant_predictor);
            match newton_correct(s_next, alpha, &guess, &params.newton) {
                Ok(outcome) => {
                    let old = std::mem::replace(&mut state.q, outcome.profile.clone());
                    state.prev = Some((state.s, old));
                    state.s = s_next;
                    last = Some(outcome);
                }
                Err(e) => {
                    halvings += 1;
                    if halvings > params.max_halvings {
                        branch.complete = false;
                        branch.diagnostic = Some(format!(
                            "corrector failed at s = {s_next:.6} after {} halvings: {e}",
                            params.max_halvings
                        ));
                        break 'targets;
                    }
                    ds *= 0.5;
                }
            }
        }
        let outcome = last.expect("target reached through at least one accepted step");
        let previous = resample(&branch.points.last().expect("start point").profile, *outcome.profile.grid());
        branch
            .step_changes
            .push(previous.sup_distance(&outcome.profile)?);
        branch.points.push(BranchPoint {
            s: target,
            profile: outcome.profile,
            residual_sup: outcome.residual_sup,
            even_gap: outcome.even_gap,
            newton_iterations: outcome.iterations,
        });
    }
    Ok(branch)
}

/// Full-grid kernel certificate of `L₊` at every point of the branch.
pub fn certify_branch(branch: &Branch) -> Result<Vec<NondegeneracyReport>> {
    branch
        .points
        .iter()
        .map(|p| nondegeneracy_check(&linearized(p.s, branch.alpha, &p.profile)?, &p.profile, None))
        .collect()
}

/// `2/(1 + t²)`, the `s = 1/2`, `α = 1` ground state.
pub fn half_laplacian_soliton(grid: GridSpec) -> Profile {
    Profile::from_fn(grid, |t| 2.0 / (1.0 + t * t)).expect("finite samples")
}
