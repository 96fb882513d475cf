//! Radial correspondence `ψ(x) = |x|^{−1} φ(ln|x|)` between profiles on the line
//! and radial functions in three dimensions.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::{profile_h, sharp_constant_sobolev_3d};
use crate::grid::{GridSpec, Profile};
use crate::groundstate::residual;
use crate::quadrature::adaptive;
use crate::report::IdentityCheck;
use crate::spectral::{
    fft_in_place, fft_real, ilw_full_symbol, lp_norm, quadratic_form, spectral_derivative, FourierMultiplier,
    trig_interpolate, SmoothInterpolant,
};

/// Upsampling factor behind the radial accessor.
const UPSAMPLE: usize = 16;

/// Radial function `ψ(r) = r^{−w} φ(ln r)` built from a profile `φ`.
#[derive(Debug, Clone)]
pub struct RadialProfile3D {
    partner: Profile,
    weight: f64,
    coeffs: Vec<Complex64>,
    interp: SmoothInterpolant,
}

impl RadialProfile3D {
    pub fn partner(&self) -> &Profile {
        &self.partner
    }

    /// Exponent `w` of the radial weight `r^{−w}`.
    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn convention(&self) -> String {
        format!("psi(r) = r^(-{}) phi(ln r)", self.weight)
    }

    /// `φ(t)` from the trigonometric interpolant, exact at grid nodes.
    fn phi(&self, t: f64) -> f64 {
        let grid = self.partner.grid();
        let s = (t + grid.half_width()) / grid.spacing();
        let j = s.round();
        if (s - j).abs() < 1e-12 && j >= 0.0 && (j as usize) < grid.len() {
            return self.partner.values()[j as usize];
        }
        trig_interpolate(&self.partner, &self.coeffs, t)
    }

    pub fn psi(&self, r: f64) -> f64 {
        self.phi(r.ln()) * r.powf(-self.weight)
    }

    /// `ψ′(r) = r^{−w−1}(φ′(ln r) − w φ(ln r))`.
    pub fn psi_derivative(&self, r: f64) -> f64 {
        let t = r.ln();
        r.powf(-self.weight - 1.0) * (self.interp.derivative(t) - self.weight * self.phi(t))
    }

    /// `(r_j, ψ(r_j))` at `r_j = e^{t_j}`.
    pub fn node_samples(&self) -> Vec<(f64, f64)> {
        let grid = self.partner.grid();
        self.partner
            .values()
            .iter()
            .enumerate()
            .map(|(j, &v)| {
                let r = grid.node(j).exp();
                (r, v * r.powf(-self.weight))
            })
            .collect()
    }
}

/// `ψ(r) = φ(ln r)/r`.
pub fn lift(phi: &Profile) -> RadialProfile3D {
    lift_weighted(phi, 1.0)
}

/// `ψ(r) = r^{−w} φ(ln r)`.
pub fn lift_weighted(phi: &Profile, weight: f64) -> RadialProfile3D {
    RadialProfile3D {
        partner: phi.clone(),
        weight,
        coeffs: fft_real(phi.values()),
        interp: SmoothInterpolant::new(phi, UPSAMPLE),
    }
}

/// `4π (φ, τcoth(πτ/2) φ)`.
pub fn form_via_symbol(phi: &Profile) -> Result<f64> {
    Ok(4.0 * PI * quadratic_form(&FourierMultiplier::ilw_full(), phi)?)
}

/// Integrand `|φ(t) − φ(u)|² / sinh²(t − u)` off the diagonal.
pub fn sinh_integrand(phi_t: f64, phi_u: f64, t: f64, u: f64) -> f64 {
    let d = phi_t - phi_u;
    if d == 0.0 {
        return 0.0;
    }
    let s = (t - u).sinh();
    d * d / (s * s)
}

/// Largest admissible share of the diagonal in [`form_via_sinh`].
pub const DIAGONAL_FRACTION_MAX: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SinhForm {
    pub value: f64,
    pub diagonal_fraction: f64,
}

/// `2 ∬ |φ(t) − φ(u)|²/sinh²(t − u) + 8‖φ‖₂²` by the tensor trapezoid rule,
/// with the diagonal `t = u` given its limit `|φ′(t)|²`.
pub fn form_via_sinh(phi: &Profile) -> Result<SinhForm> {
    let grid = phi.grid();
    let n = grid.len();
    let h = grid.spacing();
    let v = phi.values();
    let inv_sinh2: Vec<f64> = (0..n)
        .map(|d| {
            if d == 0 {
                0.0
            } else {
                let s = (d as f64 * h).sinh();
                1.0 / (s * s)
            }
        })
        .collect();
    let rows: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut acc = 0.0;
            for j in 0..n {
                if j != i {
                    let d = v[i] - v[j];
                    acc += d * d * inv_sinh2[i.abs_diff(j)];
                }
            }
            acc
        })
        .collect();
    let off_diagonal: f64 = rows.iter().sum();
    let dphi = spectral_derivative(phi);
    let diagonal: f64 = dphi.values().iter().map(|d| d * d).sum();
    let double = 2.0 * h * h * (off_diagonal + diagonal);
    let value = double + 8.0 * phi.inner(phi)?;
    let diagonal_fraction = if value > 0.0 {
        2.0 * h * h * diagonal / value
    } else {
        0.0
    };
    if diagonal_fraction > DIAGONAL_FRACTION_MAX {
        return Err(Error::DiagonalHandling(diagonal_fraction));
    }
    Ok(SinhForm {
        value,
        diagonal_fraction,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HankelForm {
    pub value: f64,
    /// Coefficient `a` of the subtracted tail `a r/(1 + r²)`.
    pub tail_coefficient: f64,
    /// Change of the value under halving of the radial cutoff.
    pub truncation_estimate: f64,
}

/// Relative truncation estimate above which [`form_via_hankel`] fails.
pub const HANKEL_TRUNCATION_TOL: f64 = 1e-6;

const HANKEL_LOG2_POINTS: u32 = 20;
const HANKEL_LOG2_STEP: i32 = -9;

/// `∫|k| |ψ̂(k)|² d³k = 8 ∫₀^∞ k S(k)² dk` with `S(k) = ∫₀^∞ r ψ(r) sin(kr) dr`.
///
/// `rψ(r) = φ(ln r)` is sampled on `r_n = n Δr`, its `a r/(1+r²)` tail is removed
/// and transformed analytically, the rest goes through a sine transform, and the
/// `k` integral uses Simpson's rule.
pub fn form_via_hankel(phi: &Profile) -> Result<HankelForm> {
    let grid = phi.grid();
    let dr = 2f64.powi(HANKEL_LOG2_STEP);
    let m = 1usize << HANKEL_LOG2_POINTS;
    let r_max = m as f64 * dr;
    if grid.half_width() < r_max.ln() + 1.0 {
        return Err(Error::InvalidParameter(format!(
            "half width {} too small for the radial range (need > {:.2})",
            grid.half_width(),
            r_max.ln() + 1.0
        )));
    }
    if phi.is_zero() {
        return Ok(HankelForm {
            value: 0.0,
            tail_coefficient: 0.0,
            truncation_estimate: 0.0,
        });
    }
    let interp = SmoothInterpolant::new(phi, UPSAMPLE);
    let t_a = (0.5 * grid.half_width()).min(20.0);
    let a = interp.eval(t_a) * t_a.exp();
    let f: Vec<f64> = (0..=m)
        .into_par_iter()
        .map(|n| {
            if n == 0 {
                0.0
            } else {
                let r = n as f64 * dr;
                interp.eval(r.ln()) - a * r / (1.0 + r * r)
            }
        })
        .collect();
    // A slowly decaying remainder of f beyond the cutoff costs O(R⁻²), which
    // Richardson extrapolation over R, R/2, R/4 removes; a remainder that is
    // still large at R/4 spoils the extrapolation. Keep whichever of the plain
    // and extrapolated values is more self-consistent.
    let v: Vec<f64> = [m, m / 2, m / 4].iter().map(|&mm| hankel_integral(&f, mm, dr, a)).collect();
    let plain = (v[0], (v[0] - v[1]).abs());
    let fine = (4.0 * v[0] - v[1]) / 3.0;
    let extrapolated = (fine, (fine - (4.0 * v[1] - v[2]) / 3.0).abs());
    let (fine, truncation_estimate) = if extrapolated.1 < plain.1 { extrapolated } else { plain };
    if truncation_estimate > HANKEL_TRUNCATION_TOL * fine.abs() {
        return Err(Error::Quadrature(format!(
            "radial truncation estimate {truncation_estimate:e} exceeds {HANKEL_TRUNCATION_TOL:e} of {fine}"
        )));
    }
    Ok(HankelForm {
        value: fine,
        tail_coefficient: a,
        truncation_estimate,
    })
}

/// `8 ∫ k S(k)² dk` from samples `f[0..=m]` on `[0, m Δr]`.
fn hankel_integral(f: &[f64], m: usize, dr: f64, a: f64) -> f64 {
    // odd extension: the FFT of length 2m gives −2i Σ f_n sin(π j n/m)
    let mut ext = vec![Complex64::new(0.0, 0.0); 2 * m];
    for n in 1..m {
        ext[n] = Complex64::new(f[n], 0.0);
        ext[2 * m - n] = Complex64::new(-f[n], 0.0);
    }
    fft_in_place(&mut ext);
    let r_max = m as f64 * dr;
    let dk = PI / r_max;
    let mut acc = 0.0;
    for (j, c) in ext.iter().take(m + 1).enumerate() {
        let k = j as f64 * dk;
        let s = -0.5 * c.im * dr + a * 0.5 * PI * (-k).exp();
        let w = if j == 0 || j == m {
            1.0
        } else if j % 2 == 1 {
            4.0
        } else {
            2.0
        };
        acc += w * k * s * s;
    }
    8.0 * acc * dk / 3.0
}

/// `(∫_ℝ sin²(τt/2)/sinh²t dt, (πτ/2)coth(πτ/2) − 1)`.
pub fn gr_identity_check(tau: f64) -> Result<(f64, f64)> {
    if !tau.is_finite() {
        return Err(Error::InvalidParameter(format!("tau = {tau}")));
    }
    let closed = 0.5 * PI * ilw_full_symbol(tau) - 1.0;
    if tau == 0.0 {
        return Ok((0.0, closed));
    }
    let integrand = |t: f64| {
        if t == 0.0 {
            0.25 * tau * tau
        } else {
            let s = (0.5 * tau * t).sin();
            let d = t.sinh();
            s * s / (d * d)
        }
    };
    // beyond t = 40 the integrand is below 4e^{−80}
    let period = 2.0 * PI / tau.abs();
    let pieces = ((40.0 / period).ceil() as usize).clamp(1, 4000);
    let width = 40.0 / pieces as f64;
    let mut half = 0.0;
    for i in 0..pieces {
        let lo = i as f64 * width;
        half += adaptive(lo, lo + width, 1e-16, 1e-13, integrand)?.value;
    }
    Ok((2.0 * half, closed))
}

/// `(2π ∫_{−1}^{1} dt/(r² − 2rst + s²)², 4π/(r² − s²)²)`.
pub fn angular_reduction_check(r: f64, s: f64) -> Result<(f64, f64)> {
    if !(r > 0.0 && s > 0.0) {
        return Err(Error::InvalidParameter(format!("radii must be positive, got {r}, {s}")));
    }
    if (r - s).abs() < 1e-6 {
        return Err(Error::InvalidParameter(format!("near-singular pair r = {r}, s = {s}")));
    }
    let closed = 4.0 * PI / (r * r - s * s).powi(2);
    // with u = 1 − t the denominator is (r − s)² + 2rs·u, free of cancellation
    let d2 = (r - s).powi(2);
    let f = |u: f64| (d2 + 2.0 * r * s * u).powi(-2);
    let width = (d2 / (r * s)).min(2.0);
    let mut total = 0.0;
    let mut lo = 0.0;
    for hi in [width, 10.0 * width, 100.0 * width, 2.0] {
        let hi = hi.min(2.0);
        if hi > lo {
            total += adaptive(lo, hi, 0.0, 1e-13, f)?.value;
            lo = hi;
        }
    }
    Ok((2.0 * PI * total, closed))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightMaps {
    /// `‖ψ‖₃³` as a radial integral.
    pub cube_norm: f64,
    /// `(ψ, |x|⁻¹ψ)` as a radial integral.
    pub weighted_l2: f64,
    pub checks: Vec<IdentityCheck>,
}

impl WeightMaps {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// `‖ψ‖₃³ = 4π‖φ‖₃³` and `(ψ, |x|⁻¹ψ) = 4π‖φ‖₂²`, radial side by `r = e^t`.
pub fn weight_maps(phi: &Profile) -> Result<WeightMaps> {
    let psi = lift(phi);
    let h = phi.grid().spacing();
    let (mut cube, mut weighted) = (0.0, 0.0);
    for (r, v) in psi.node_samples() {
        cube += v.abs().powi(3) * r.powi(3);
        weighted += v * v * r * r;
    }
    cube *= 4.0 * PI * h;
    weighted *= 4.0 * PI * h;
    let phi_cube = 4.0 * PI * lp_norm(phi, 3.0)?.powi(3);
    let phi_l2 = 4.0 * PI * phi.inner(phi)?;
    let checks = vec![
        IdentityCheck::new("cube norm of lift", cube, phi_cube, 1e-12),
        IdentityCheck::new("inverse-radius weighted norm of lift", weighted, phi_l2, 1e-12),
    ];
    Ok(WeightMaps {
        cube_norm: cube,
        weighted_l2: weighted,
        checks,
    })
}

/// `(∫|∇ψ|², 4π(‖φ′‖₂² + ‖φ‖₂²/4))` for `ψ = |x|^{−1/2} φ(ln|x|)`.
pub fn h1_analogue_check(phi: &Profile) -> Result<(f64, f64)> {
    let grid = phi.grid();
    let scale = phi.max_abs();
    if scale == 0.0 {
        return Ok((0.0, 0.0));
    }
    let support: Vec<usize> = (0..grid.len())
        .filter(|&j| phi.values()[j].abs() > 1e-14 * scale)
        .collect();
    let (first, last) = (support[0], *support.last().expect("nonzero profile"));
    let margin = 10;
    if first < margin || last + margin >= grid.len() {
        return Err(Error::SupportViolation(format!(
            "samples {first}..={last} of {} within {margin} nodes of the boundary",
            grid.len()
        )));
    }
    let psi = lift_weighted(phi, 0.5);
    let t_lo = grid.node(first - 1);
    let t_hi = grid.node(last + 1);
    let integrand = |r: f64| {
        let d = psi.psi_derivative(r);
        r * r * d * d
    };
    let pieces = ((t_hi - t_lo) / 0.25).ceil().max(1.0) as usize;
    let step = (t_hi - t_lo) / pieces as f64;
    let mut lhs = 0.0;
    for i in 0..pieces {
        let a = (t_lo + i as f64 * step).exp();
        let b = (t_lo + (i + 1) as f64 * step).exp();
        lhs += adaptive(a, b, 0.0, 1e-12, integrand)?.value;
    }
    lhs *= 4.0 * PI;
    let dphi = spectral_derivative(phi);
    let rhs = 4.0 * PI * (dphi.inner(&dphi)? + 0.25 * phi.inner(phi)?);
    Ok((lhs, rhs))
}

/// `sup |(T + 2/π)h − h²|`: the line form of `√(−Δ)R = R²` at `R = 2H`.
pub fn equation_transport_residual(grid: GridSpec) -> Result<f64> {
    let h = Profile::from_fn(grid, profile_h)?;
    residual(&FourierMultiplier::ilw_full(), 0.0, 1.0, &h)
}

/// Ten smooth decaying profiles used for route agreement.
pub fn smooth_suite(grid: GridSpec) -> Result<Vec<(&'static str, Profile)>> {
    let sech = |t: f64| 1.0 / t.cosh();
    let list: Vec<(&'static str, Box<dyn Fn(f64) -> f64>)> = vec![
        ("sech", Box::new(sech)),
        ("sech shifted right", Box::new(move |t| 0.7 * sech(t - 0.8))),
        ("sech shifted left", Box::new(move |t| 1.5 * sech(t + 0.5))),
        ("sech squared", Box::new(move |t| sech(t).powi(2))),
        ("gaussian", Box::new(|t: f64| (-t * t).exp())),
        ("wide gaussian", Box::new(|t: f64| 0.5 * (-(t - 1.0).powi(2) / 2.0).exp())),
        ("gaussian variance 3/2", Box::new(|t: f64| (-t * t / 3.0).exp())),
        ("skewed sech", Box::new(move |t| sech(t) * (1.0 + 0.5 * t.tanh()))),
        ("sech squared plus gaussian", Box::new(move |t| sech(t).powi(2) + 0.3 * (-t * t).exp())),
        ("odd gaussian", Box::new(|t: f64| t * (-t * t).exp())),
    ];
    list.into_iter()
        .map(|(name, f)| Ok((name, Profile::from_fn(grid, f)?)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BridgeReport {
    pub grid: GridSpec,
    pub checks: Vec<IdentityCheck>,
}

impl BridgeReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// All bridge identities at the sech profile plus the scalar identities.
pub fn bridge_report(grid: GridSpec) -> Result<BridgeReport> {
    let h = Profile::from_fn(grid, profile_h)?;
    let mut checks = Vec::new();
    for tau in [1.0, 2.0] {
        let (q, c) = gr_identity_check(tau)?;
        checks.push(IdentityCheck::new(format!("sinh-kernel integral at tau={tau}"), q, c, 1e-8));
    }
    let (q, c) = angular_reduction_check(2.0, 1.0)?;
    checks.push(IdentityCheck::new("angular reduction at r=2, s=1", q, c, 1e-10));

    let symbol = form_via_symbol(&h)?;
    let sinh = form_via_sinh(&h)?.value;
    let hankel = form_via_hankel(&h)?.value;
    let two_pi2 = 2.0 * PI * PI;
    checks.push(IdentityCheck::new("half-Laplacian form of lift(h), symbol route", symbol, two_pi2, 1e-6));
    checks.push(IdentityCheck::new("sinh route vs symbol route", sinh, symbol, 1e-5));
    checks.push(IdentityCheck::new("sine-transform route vs symbol route", hankel, symbol, 1e-5));

    let maps = weight_maps(&h)?;
    checks.extend(maps.checks.iter().cloned());
    checks.push(IdentityCheck::new("cube norm of 2H", maps.cube_norm, two_pi2, 1e-10));
    checks.push(IdentityCheck::new("weighted norm of 2H", maps.weighted_l2, 8.0 * PI, 1e-10));

    let sobolev = hankel / maps.cube_norm.powf(2.0 / 3.0);
    checks.push(IdentityCheck::new(
        "sharp 3D Sobolev quotient at 2H",
        sobolev,
        sharp_constant_sobolev_3d(),
        1e-5,
    ));
    checks.push(IdentityCheck::absolute(
        "equation transport (T + 2/pi)h - h^2",
        equation_transport_residual(grid)?,
        0.0,
        1e-8,
    ));
    checks.push(IdentityCheck::at_least(
        "form exceeds 8 times the squared norm",
        symbol,
        8.0 * h.inner(&h)?,
        0.0,
    ));
    Ok(BridgeReport { grid, checks })
}
