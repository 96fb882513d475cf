//! Variational quotients, their sharp constants and the closed-form optimizers.

use std::f64::consts::{FRAC_2_PI, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridSpec, Profile};
use crate::groundstate::residual;
use crate::quadrature::adaptive;
use crate::spectral::{lp_norm, quadratic_form, FourierMultiplier};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuotientKind {
    GagliardoNirenberg,
    Ilw,
    KatosobRadial,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuotientSpec {
    pub kind: QuotientKind,
    pub s: f64,
    pub alpha: f64,
    pub theta: f64,
}

impl QuotientSpec {
    pub fn validate(&self) -> Result<()> {
        match self.kind {
            QuotientKind::GagliardoNirenberg => check_gn_window(self.s, self.alpha),
            QuotientKind::Ilw => Ok(()),
            QuotientKind::KatosobRadial => check_theta(self.theta),
        }
    }
}

/// Upper end of the subcritical window in 1D: `4s/(1−2s)` for `s < 1/2`, unbounded otherwise.
pub fn critical_alpha(s: f64) -> f64 {
    if s < 0.5 {
        4.0 * s / (1.0 - 2.0 * s)
    } else {
        f64::INFINITY
    }
}

/// `0 < s ≤ 1`, `0 < α < 4s/(1−2s)` when `s < 1/2`.
pub fn check_gn_window(s: f64, alpha: f64) -> Result<()> {
    if !(s > 0.0 && s <= 1.0) {
        return Err(Error::WindowViolation(format!("s = {s} outside (0, 1]")));
    }
    if !(alpha > 0.0) {
        return Err(Error::WindowViolation(format!("alpha = {alpha} must be positive")));
    }
    let crit = critical_alpha(s);
    if alpha >= crit {
        return Err(Error::WindowViolation(format!(
            "alpha = {alpha} is not below the critical value 4s/(1-2s) = {crit} at s = {s}"
        )));
    }
    Ok(())
}

fn check_theta(theta: f64) -> Result<()> {
    if theta > 0.0 && theta < PI {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("theta = {theta} outside (0, π)")))
    }
}

/// `‖(−Δ)^{s/2}u‖₂^θ ‖u‖₂^{1−θ} / ‖u‖_{α+2}`, `θ = α/(2s(α+2))`.
pub fn gn_quotient(s: f64, alpha: f64, u: &Profile) -> Result<f64> {
    check_gn_window(s, alpha)?;
    if u.is_zero() {
        return Err(Error::ZeroInput);
    }
    let theta = alpha / (2.0 * s * (alpha + 2.0));
    let grad = quadratic_form(&FourierMultiplier::fractional_laplacian(s)?, u)?.sqrt();
    let l2 = lp_norm(u, 2.0)?;
    let lp = lp_norm(u, alpha + 2.0)?;
    Ok(grad.powf(theta) * l2.powf(1.0 - theta) / lp)
}

/// `[(φ,Tφ) + (2/π)‖φ‖₂²] / ‖φ‖₃²`.
pub fn ilw_quotient(phi: &Profile) -> Result<f64> {
    shifted_ilw_quotient(FRAC_2_PI, phi)
}

fn shifted_ilw_quotient(mu: f64, phi: &Profile) -> Result<f64> {
    if phi.is_zero() {
        return Err(Error::ZeroInput);
    }
    let form = quadratic_form(&FourierMultiplier::ilw().shifted(mu), phi)?;
    Ok(form / lp_norm(phi, 3.0)?.powi(2))
}

/// `1 − θ cot θ`, with a series below `θ = 10⁻³`.
pub fn one_minus_theta_cot(theta: f64) -> f64 {
    if theta.abs() < 1e-3 {
        let t2 = theta * theta;
        t2 / 3.0 + t2 * t2 / 45.0 + 2.0 * t2 * t2 * t2 / 945.0
    } else {
        1.0 - theta / theta.tan()
    }
}

/// Shift `(2/π)(1 − θ cot θ)` of the Kato–Sobolev family.
pub fn katosob_shift(theta: f64) -> f64 {
    FRAC_2_PI * one_minus_theta_cot(theta)
}

/// `[(φ,Tφ) + (2/π)(1 − θcotθ)‖φ‖₂²] / ‖φ‖₃²` for `θ ∈ (0, π)`.
pub fn katosob_radial_quotient(theta: f64, phi: &Profile) -> Result<f64> {
    check_theta(theta)?;
    shifted_ilw_quotient(katosob_shift(theta), phi)
}

/// `θ(2 + cos 2θ) − (3/2) sin 2θ`, which vanishes like `(4/15)θ⁵`.
fn katosob_bracket(theta: f64) -> f64 {
    if theta < 0.5 {
        // coefficient of θ^{2n+1} is (−1)ⁿ 4ⁿ (2n − 2)/(2n+1)!, zero for n = 0, 1
        let t2 = theta * theta;
        let mut power = theta * t2 * t2;
        let mut four_n = 16.0;
        let mut factorial = 120.0;
        let mut sum = 0.0;
        for n in 2..30 {
            let term = four_n * (2.0 * n as f64 - 2.0) / factorial * power;
            sum += if n % 2 == 0 { term } else { -term };
            if term.abs() < 1e-18 * sum.abs() {
                break;
            }
            power *= t2;
            four_n *= 4.0;
            factorial *= (2 * n + 2) as f64 * (2 * n + 3) as f64;
        }
        sum
    } else {
        theta * (2.0 + (2.0 * theta).cos()) - 1.5 * (2.0 * theta).sin()
    }
}

/// `(2θ/(π sin θ))^{2/3} (θ(2 + cos 2θ) − (3/2) sin 2θ)^{1/3}`.
pub fn sharp_constant_katosob(theta: f64) -> Result<f64> {
    check_theta(theta)?;
    Ok((2.0 * theta / (PI * theta.sin())).powf(2.0 / 3.0) * katosob_bracket(theta).cbrt())
}

/// `(π/2)^{1/3}`.
pub fn sharp_constant_ilw() -> f64 {
    (PI / 2.0).cbrt()
}

/// `2^{1/3} π^{2/3}`.
pub fn sharp_constant_sobolev_3d() -> f64 {
    2f64.cbrt() * PI.powf(2.0 / 3.0)
}

pub fn profile_h(t: f64) -> f64 {
    1.0 / t.cosh()
}

/// `(2θ/π) sin θ / (cosh(2θt/π) + cos θ)`.
pub fn profile_h_theta(theta: f64, t: f64) -> f64 {
    let a = 2.0 * theta / PI;
    let x = (a * t).abs();
    if x > 700.0 {
        // cosh overflows; the profile is 2a sinθ e^{-x} to working precision
        return 2.0 * a * theta.sin() * (-x).exp();
    }
    a * theta.sin() / (x.cosh() + theta.cos())
}

/// `(1 + r²)⁻¹`.
#[allow(non_snake_case)]
pub fn profile_H(r: f64) -> f64 {
    1.0 / (1.0 + r * r)
}

/// `r⁻¹ (r^{2θ/π} + r^{−2θ/π} + 2 cos θ)⁻¹`.
#[allow(non_snake_case)]
pub fn profile_H_theta(theta: f64, r: f64) -> f64 {
    let a = 2.0 * theta / PI;
    1.0 / (r * (r.powf(a) + r.powf(-a) + 2.0 * theta.cos()))
}

/// `sup |T h_θ + (2/π)(1 − θcotθ) h_θ − h_θ²|` on `grid`.
pub fn euler_lagrange_residual_h_theta(theta: f64, grid: GridSpec) -> Result<f64> {
    check_theta(theta)?;
    let h = Profile::from_fn(grid, |t| profile_h_theta(theta, t))?;
    residual(&FourierMultiplier::ilw(), katosob_shift(theta), 1.0, &h)
}

pub fn i_theta_closed(theta: f64) -> Result<f64> {
    sharp_constant_katosob(theta)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaQuadrature {
    pub value: f64,
    /// Bound on the neglected tail `∫_{t_max}^∞`.
    pub tail_bound: f64,
}

/// Largest tolerated tail bound for the `I_θ` quadrature.
pub const I_THETA_TAIL_TOL: f64 = 1e-10;

/// `(2θ sinθ/π) (2 ∫₀^∞ dt / (cosh(2θt/π) + cosθ)³)^{1/3}`, truncated at `t = 40π/(2θ)`.
pub fn i_theta_quadrature(theta: f64) -> Result<ThetaQuadrature> {
    check_theta(theta)?;
    let c = theta.cos();
    let u_max = 40.0;
    let jacobian = PI / (2.0 * theta);
    // Sharp peak at u = 0 when θ → π; split there so the rule sees it.
    let width = (1.0 + c).sqrt().max(1e-3);
    let integrand = |u: f64| (u.cosh() + c).powi(-3);
    let mut inner = 0.0;
    let mut lo = 0.0;
    for hi in [width, 10.0 * width, u_max] {
        if hi > lo {
            inner += adaptive(lo, hi, 0.0, 1e-13, integrand)?.value;
            lo = hi;
        }
    }
    // cosh u + cosθ ≥ e^u / 4 for u ≥ 2, so the tail is at most (64/3) e^{−3 u_max}.
    let tail_bound = jacobian * 64.0 / 3.0 * (-3.0 * u_max).exp();
    if tail_bound > I_THETA_TAIL_TOL {
        return Err(Error::Quadrature(format!("I_theta tail bound {tail_bound:e} too large")));
    }
    let integral = jacobian * inner;
    Ok(ThetaQuadrature {
        value: 2.0 * theta * theta.sin() / PI * (2.0 * integral).cbrt(),
        tail_bound,
    })
}

/// Seeded random Gaussians `a·exp(−((t − c)/w)²)`.
pub fn random_test_profiles(grid: GridSpec, count: usize, seed: u64) -> Vec<Profile> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let amplitude = rng.gen_range(0.2..3.0);
            let center = rng.gen_range(-3.0..3.0);
            let width = rng.gen_range(0.3..3.0);
            crate::groundstate::gaussian(grid, amplitude, center, width)
        })
        .collect()
}

/// Grid resolving `h_θ`: decay `e^{−40}` at the box edge and about
/// eight nodes across the peak, whose width shrinks like `π − θ`.
pub fn katosob_grid(theta: f64) -> Result<GridSpec> {
    check_theta(theta)?;
    let a = 2.0 * theta / PI;
    let half_width = (40.0 / a).max(20.0);
    let spacing = (0.06f64).min((PI - theta) / (8.0 * a));
    let points = ((2.0 * half_width / spacing).ceil() as usize).next_power_of_two().max(1024);
    GridSpec::new(half_width, points)
}

/// One row of the `θ` sweep of the Kato–Sobolev constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantRow {
    pub theta: f64,
    pub closed_constant: f64,
    pub quadrature_constant: f64,
    pub el_residual: f64,
    pub grid: GridSpec,
}

/// `grid = None` picks [`katosob_grid`] per `θ`.
pub fn constant_sweep(thetas: &[f64], grid: Option<GridSpec>) -> Result<Vec<ConstantRow>> {
    thetas
        .par_iter()
        .map(|&theta| {
            let grid = match grid {
                Some(g) => g,
                None => katosob_grid(theta)?,
            };
            Ok(ConstantRow {
                theta,
                closed_constant: i_theta_closed(theta)?,
                quadrature_constant: i_theta_quadrature(theta)?.value,
                el_residual: euler_lagrange_residual_h_theta(theta, grid)?,
                grid,
            })
        })
        .collect()
}

pub fn constant_sweep_csv(rows: &[ConstantRow]) -> String {
    let mut out = String::from("theta,closed_constant,quadrature_constant,el_residual,half_width,points\n");
    for r in rows {
        out.push_str(&format!(
            "{:.17e},{:.17e},{:.17e},{:.6e},{},{}\n",
            r.theta,
            r.closed_constant,
            r.quadrature_constant,
            r.el_residual,
            r.grid.half_width(),
            r.grid.len()
        ));
    }
    out
}
