//! Positive even ground states of `A Q − Q^{α+1} = −μ Q` by Petviashvili iteration.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridSpec, Profile};
use crate::spectral::{apply_multiplier, dealiased_power, invert_shifted, quadratic_form, FourierMultiplier};

/// Convergence also requires the stabilizing factor to satisfy `|M − 1| ≤ STABILIZER_TOL`.
pub const STABILIZER_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveParams {
    pub max_iters: usize,
    pub residual_tol: f64,
    /// Exponent on the stabilizing factor; `None` means `(α+1)/α`.
    pub petviashvili_gamma: Option<f64>,
    /// Even-symmetrize every this many iterations; `0` disables symmetrization.
    pub symmetrize_every: usize,
}

impl Default for SolveParams {
    fn default() -> Self {
        Self {
            max_iters: 2000,
            residual_tol: 1e-10,
            petviashvili_gamma: None,
            symmetrize_every: 1,
        }
    }
}

impl SolveParams {
    fn gamma(&self, alpha: f64) -> Result<f64> {
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter("max_iters must be at least 1".into()));
        }
        if !(self.residual_tol > 0.0) {
            return Err(Error::InvalidParameter("residual_tol must be positive".into()));
        }
        let gamma = self.petviashvili_gamma.unwrap_or((alpha + 1.0) / alpha);
        if !(gamma > 1.0) {
            return Err(Error::InvalidParameter(format!(
                "petviashvili exponent must exceed 1, got {gamma}"
            )));
        }
        Ok(gamma)
    }
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub profile: Profile,
    pub residual_sup: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Stabilizing factor `M_n` at the final iteration.
    pub stabilizer: f64,
}

fn integer_exponent(alpha: f64) -> Option<u32> {
    (alpha.fract() == 0.0 && alpha >= 1.0 && alpha <= 32.0).then_some(alpha as u32)
}

/// `Q^{α+1}` as used inside the iteration: dealiased for integer `α`,
/// otherwise pointwise with negative samples clamped to zero.
pub fn nonlinearity(q: &Profile, alpha: f64) -> Profile {
    match integer_exponent(alpha) {
        Some(a) => dealiased_power(q, a + 1),
        None => q
            .map(|v| v.max(0.0).powf(alpha + 1.0))
            .expect("power of finite samples is finite"),
    }
}

pub(crate) fn pointwise_power(v: f64, alpha: f64) -> f64 {
    match integer_exponent(alpha) {
        Some(a) => v.powi(a as i32 + 1),
        None => v.max(0.0).powf(alpha + 1.0),
    }
}

/// `sup |A Q − Q^{α+1} + μ Q|` with the power taken pointwise.
pub fn residual(m: &FourierMultiplier, mu: f64, alpha: f64, q: &Profile) -> Result<f64> {
    let aq = apply_multiplier(m, q)?;
    Ok(aq
        .values()
        .iter()
        .zip(q.values())
        .map(|(a, v)| (a - pointwise_power(*v, alpha) + mu * v).abs())
        .fold(0.0, f64::max))
}

/// Runs `Q ← M^γ (A+μ)⁻¹ Q^{α+1}`, `M = ⟨Q,(A+μ)Q⟩ / ⟨Q,Q^{α+1}⟩`.
///
/// On non-convergence the iterate with the smallest residual is returned with
/// `converged = false`.
pub fn petviashvili(
    m: &FourierMultiplier,
    mu: f64,
    alpha: f64,
    init: &Profile,
    params: &SolveParams,
) -> Result<SolveResult> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
    }
    let gamma = params.gamma(alpha)?;
    if init.is_zero() {
        return Err(Error::ZeroInput);
    }
    let grid = init.grid();
    let lowest = m.min_on(grid) + mu;
    if !(lowest > 0.0) {
        return Err(Error::NonPositiveShiftedSymbol {
            tau: f64::NAN,
            value: lowest,
        });
    }
    let shifted = m.shifted(mu);
    let symmetrize = params.symmetrize_every > 0;
    let mut q = if symmetrize { init.symmetrized() } else { init.clone() };

    let mut best = (q.clone(), f64::INFINITY, 0usize, f64::NAN);
    for n in 1..=params.max_iters {
        let nq = nonlinearity(&q, alpha);
        let denom = q.inner(&nq)?;
        if !(denom > 0.0) {
            return Err(Error::Collapse(denom, n));
        }
        let stabilizer = quadratic_form(&shifted, &q)? / denom;
        let mut next = invert_shifted(m, mu, &nq)?.scaled(stabilizer.powf(gamma));
        if symmetrize && n % params.symmetrize_every == 0 {
            next = next.symmetrized();
        }
        q = next;
        let r = residual(m, mu, alpha, &q)?;
        if !r.is_finite() {
            break;
        }
        if r < best.1 {
            best = (q.clone(), r, n, stabilizer);
        }
        if r <= params.residual_tol && (stabilizer - 1.0).abs() <= STABILIZER_TOL {
            return Ok(SolveResult {
                profile: q,
                residual_sup: r,
                iterations: n,
                converged: true,
                stabilizer,
            });
        }
    }
    Ok(SolveResult {
        profile: best.0,
        residual_sup: best.1,
        iterations: best.2,
        converged: false,
        stabilizer: best.3,
    })
}

/// `amplitude · exp(−((t − center)/width)²)`.
pub fn gaussian(grid: GridSpec, amplitude: f64, center: f64, width: f64) -> Profile {
    Profile::from_fn(grid, |t| {
        let z = (t - center) / width;
        amplitude * (-z * z).exp()
    })
    .expect("gaussian samples are finite")
}

/// Center of mass `Σ t Q / Σ Q` of a nonnegative bump.
pub fn center_of_mass(q: &Profile) -> f64 {
    let grid = q.grid();
    let (num, den) = q
        .values()
        .iter()
        .enumerate()
        .fold((0.0, 0.0), |(n, d), (j, v)| (n + grid.node(j) * v, d + v));
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::translate;
    use std::f64::consts::FRAC_2_PI;

    fn sech(t: f64) -> f64 {
        1.0 / t.cosh()
    }

    #[test]
    fn residual_examples() {
        let g = GridSpec::standard();
        let m = FourierMultiplier::ilw();
        assert_eq!(residual(&m, FRAC_2_PI, 1.0, &Profile::zeros(g)).unwrap(), 0.0);
        let h = Profile::from_fn(g, sech).unwrap();
        assert!(residual(&m, FRAC_2_PI, 1.0, &h).unwrap() <= 1e-8);
        assert!(residual(&m, FRAC_2_PI, 1.0, &h.scaled(1.1)).unwrap() >= 1e-2);
    }

    #[test]
    fn ilw_ground_state_is_sech() {
        let g = GridSpec::standard();
        let init = gaussian(g, 1.0, 0.0, 1.0);
        let out = petviashvili(&FourierMultiplier::ilw(), FRAC_2_PI, 1.0, &init, &SolveParams::default()).unwrap();
        assert!(out.converged);
        let h = Profile::from_fn(g, sech).unwrap();
        assert!(out.profile.sup_distance(&h).unwrap() <= 1e-6);
        assert!((out.stabilizer - 1.0).abs() <= 1e-8);
        let q = &out.profile;
        let min = q.values().iter().cloned().fold(f64::MAX, f64::min);
        assert!(min > -1e-9 * q.max_abs());
        assert!(q.even_defect() <= 1e-10);
    }

    #[test]
    fn local_soliton_recovered_at_s_one() {
        let g = GridSpec::standard();
        let init = gaussian(g, 1.0, 0.0, 1.0);
        let m = FourierMultiplier::fractional_laplacian(1.0).unwrap();
        let params = SolveParams {
            residual_tol: 1e-9,
            ..SolveParams::default()
        };
        let out = petviashvili(&m, 1.0, 1.0, &init, &params).unwrap();
        assert!(out.converged);
        assert!(out.residual_sup <= 1e-8);
        let exact = Profile::from_fn(g, |t| 1.5 * sech(t / 2.0).powi(2)).unwrap();
        assert!(out.profile.sup_distance(&exact).unwrap() < 1e-8);
    }

    #[test]
    fn half_laplacian_ground_state_is_lorentzian() {
        let g = GridSpec::large_box();
        let init = gaussian(g, 1.0, 0.0, 1.0);
        let m = FourierMultiplier::fractional_laplacian(0.5).unwrap();
        let out = petviashvili(&m, 1.0, 1.0, &init, &SolveParams::default()).unwrap();
        assert!(out.converged, "residual {}", out.residual_sup);
        let exact = Profile::from_fn(g, |t| 2.0 / (1.0 + t * t)).unwrap();
        assert!(out.profile.sup_distance(&exact).unwrap() <= 1e-3);
    }

    #[test]
    fn non_integer_alpha_converges() {
        let g = GridSpec::standard();
        let init = gaussian(g, 1.0, 0.0, 1.0);
        let m = FourierMultiplier::fractional_laplacian(0.9).unwrap();
        let out = petviashvili(&m, 1.0, 1.5, &init, &SolveParams::default()).unwrap();
        assert!(out.converged);
        assert!(out.profile.values().iter().all(|&v| v > -1e-9 * out.profile.max_abs()));
    }

    #[test]
    fn translated_start_converges_to_translate() {
        let g = GridSpec::standard();
        let m = FourierMultiplier::ilw();
        let centered = petviashvili(&m, FRAC_2_PI, 1.0, &gaussian(g, 1.0, 0.0, 1.0), &SolveParams::default())
            .unwrap();
        let params = SolveParams {
            symmetrize_every: 0,
            ..SolveParams::default()
        };
        let shifted = petviashvili(&m, FRAC_2_PI, 1.0, &gaussian(g, 1.0, 3.0, 1.0), &params).unwrap();
        assert!(shifted.converged);
        let c = center_of_mass(&shifted.profile);
        assert!((c - 3.0).abs() < 1e-6);
        let recentered = translate(&shifted.profile, -c);
        assert!(recentered.sup_distance(&centered.profile).unwrap() <= 1e-6);
    }

    #[test]
    fn rejects_bad_inputs() {
        let g = GridSpec::new(10.0, 64).unwrap();
        let m = FourierMultiplier::ilw();
        let init = gaussian(g, 1.0, 0.0, 1.0);
        let p = SolveParams::default();
        assert!(matches!(petviashvili(&m, 1.0, 1.0, &Profile::zeros(g), &p), Err(Error::ZeroInput)));
        assert!(petviashvili(&m, 0.0, 1.0, &init, &p).is_err());
        assert!(petviashvili(&m, 1.0, -1.0, &init, &p).is_err());
        let bad = SolveParams {
            petviashvili_gamma: Some(1.0),
            ..p
        };
        assert!(petviashvili(&m, 1.0, 1.0, &init, &bad).is_err());
    }

    #[test]
    fn negative_start_collapses() {
        let g = GridSpec::new(10.0, 64).unwrap();
        let init = gaussian(g, -1.0, 0.0, 1.0);
        // ⟨Q, Q²⟩ < 0 for a negative bump
        let r = petviashvili(&FourierMultiplier::ilw(), 1.0, 1.0, &init, &SolveParams::default());
        assert!(matches!(r, Err(Error::Collapse(_, 1))));
    }

    #[test]
    fn reports_non_convergence_with_best_iterate() {
        let g = GridSpec::standard();
        let params = SolveParams {
            max_iters: 3,
            ..SolveParams::default()
        };
        let out = petviashvili(&FourierMultiplier::ilw(), FRAC_2_PI, 1.0, &gaussian(g, 1.0, 0.0, 1.0), &params)
            .unwrap();
        assert!(!out.converged);
        assert!(out.residual_sup.is_finite() && out.residual_sup > params.residual_tol);
    }
}
