//! Stereographic projection onto the three-sphere, the zonal eigenvalues of the
//! kernel `(2π²)⁻¹|ω − η|⁻²`, and their radial shadow on the line.

use std::f64::consts::{FRAC_2_PI, PI};

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::bridge::lift;
use crate::error::{Error, Result};
use crate::functionals::profile_h;
use crate::grid::{GridSpec, Profile};
use crate::linearization::{parity_spectra, DenseOperator};
use crate::quadrature::{adaptive, GaussLegendre};
use crate::report::IdentityCheck;
use crate::spectral::{shifted_inverse_kernel, FourierMultiplier};

/// Point of the unit sphere in `ℝ⁴`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpherePoint([f64; 4]);

impl SpherePoint {
    pub fn new(omega: [f64; 4]) -> Result<Self> {
        let norm = omega.iter().map(|w| w * w).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!("|omega| = {norm}, expected 1")));
        }
        Ok(Self(omega))
    }

    pub fn coords(&self) -> [f64; 4] {
        self.0
    }

    pub fn chord_squared(&self, other: &SpherePoint) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a - b) * (a - b)).sum()
    }
}

fn norm2(x: [f64; 3]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

/// `(2x, 1 − |x|²)/(1 + |x|²)`.
pub fn stereographic(x: [f64; 3]) -> SpherePoint {
    let r2 = norm2(x);
    let d = 1.0 + r2;
    SpherePoint([2.0 * x[0] / d, 2.0 * x[1] / d, 2.0 * x[2] / d, (1.0 - r2) / d])
}

/// `(2/(1 + |x|²))³`.
pub fn jacobian(x: [f64; 3]) -> f64 {
    (2.0 / (1.0 + norm2(x))).powi(3)
}

/// `∫_{ℝ³} J`, split at `|x| = 1` and folded by `r → 1/r`.
pub fn jacobian_volume() -> Result<f64> {
    let inner = adaptive(0.0, 1.0, 0.0, 1e-14, |r| r * r * (2.0 / (1.0 + r * r)).powi(3))?;
    let outer = adaptive(0.0, 1.0, 0.0, 1e-14, |u| 8.0 * u * u / (1.0 + u * u).powi(3))?;
    Ok(4.0 * PI * (inner.value + outer.value))
}

/// `(|S(x) − S(y)|², J(x)^{1/3} |x − y|² J(y)^{1/3})`.
pub fn conformal_identity_check(x: [f64; 3], y: [f64; 3]) -> Result<(f64, f64)> {
    if x == y {
        return Err(Error::InvalidParameter("points coincide".into()));
    }
    let lhs = stereographic(x).chord_squared(&stereographic(y));
    let d = [x[0] - y[0], x[1] - y[1], x[2] - y[2]];
    let rhs = jacobian(x).cbrt() * norm2(d) * jacobian(y).cbrt();
    Ok((lhs, rhs))
}

/// `U_l(c)` by `U_{l+1} = 2c U_l − U_{l−1}`.
pub fn chebyshev_u(l: usize, c: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, 2.0 * c);
    if l == 0 {
        return prev;
    }
    for _ in 1..l {
        let next = 2.0 * c * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

const FUNK_HECKE_POINTS: usize = 2000;

/// `(2/π)(l+1)⁻¹ ∫₀^π cos²(γ/2) U_l(cos γ) dγ`.
pub fn funk_hecke_eigenvalue(l: usize) -> Result<f64> {
    funk_hecke_with_rule(l, &GaussLegendre::new(FUNK_HECKE_POINTS))
}

fn funk_hecke_with_rule(l: usize, rule: &GaussLegendre) -> Result<f64> {
    let integral = rule.integrate(0.0, PI, |g| {
        let c = (0.5 * g).cos();
        c * c * chebyshev_u(l, g.cos())
    });
    let value = FRAC_2_PI * integral / (l + 1) as f64;
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Quadrature(format!("non-finite zonal eigenvalue at l = {l}")))
    }
}

/// `(l + 1)²`.
pub fn harmonic_dim(l: usize) -> usize {
    (l + 1) * (l + 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FunkHeckeRow {
    pub l: usize,
    pub funk_hecke_value: f64,
    pub target: f64,
    pub abs_error: f64,
}

pub fn funk_hecke_table(l_max: usize) -> Result<Vec<FunkHeckeRow>> {
    let rule = GaussLegendre::new(FUNK_HECKE_POINTS);
    (0..=l_max)
        .map(|l| {
            let value = funk_hecke_with_rule(l, &rule)?;
            let target = 1.0 / (l + 1) as f64;
            Ok(FunkHeckeRow {
                l,
                funk_hecke_value: value,
                target,
                abs_error: (value - target).abs(),
            })
        })
        .collect()
}

/// `Σ_{l ≤ l_max} (l+1)² μ_l²`.
pub fn hilbert_schmidt_partial(l_max: usize) -> Result<f64> {
    Ok(funk_hecke_table(l_max)?
        .iter()
        .map(|r| harmonic_dim(r.l) as f64 * r.funk_hecke_value.powi(2))
        .sum())
}

/// Largest number of radial eigenvalues the grid resolves.
pub const BS_MAX_MODES: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BsEigenvalue {
    pub l: usize,
    pub eigenvalue: f64,
    pub target: f64,
    /// `+1` for an even eigenvector, `−1` for odd.
    pub parity: i8,
}

/// `h^{1/2} (T + 2/π)⁻¹ h^{1/2}` as a dense matrix, symmetrized.
pub fn bs_operator(grid: GridSpec) -> Result<DenseOperator> {
    let n = grid.len();
    let kernel = shifted_inverse_kernel(&FourierMultiplier::ilw(), FRAC_2_PI, &grid)?;
    let root: Vec<f64> = Profile::from_fn(grid, profile_h)?
        .values()
        .iter()
        .map(|v| v.sqrt())
        .collect();
    let raw = Mat::from_fn(n, n, |i, k| root[i] * kernel[(i + n - k) % n] * root[k]);
    let matrix = Mat::from_fn(n, n, |i, k| 0.5 * (raw[(i, k)] + raw[(k, i)]));
    DenseOperator::new(matrix, grid, "h^1/2 (T + 2/pi)^-1 h^1/2")
}

/// The `n_top` largest eigenvalues of [`bs_operator`], with eigenvector parity.
pub fn bs_radial_eigenvalues(grid: GridSpec, n_top: usize) -> Result<Vec<BsEigenvalue>> {
    if n_top > BS_MAX_MODES {
        return Err(Error::InvalidParameter(format!(
            "at most {BS_MAX_MODES} radial eigenvalues are resolved, asked for {n_top}"
        )));
    }
    let (even, odd) = parity_spectra(&bs_operator(grid)?)?;
    let mut tagged: Vec<(f64, i8)> = even
        .into_iter()
        .map(|v| (v, 1))
        .chain(odd.into_iter().map(|v| (v, -1)))
        .collect();
    tagged.sort_by(|a, b| b.0.total_cmp(&a.0));
    Ok(tagged
        .into_iter()
        .take(n_top)
        .enumerate()
        .map(|(l, (eigenvalue, parity))| BsEigenvalue {
            l,
            eigenvalue,
            target: 1.0 / (l + 1) as f64,
            parity,
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelTransport {
    /// `max |(R + rR′) − Q′(ln r)/r| / max |Q′(ln r)/r|` over the sweep.
    pub max_rel_error: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub samples: usize,
}

/// `R + rR′ = Q′(ln r)/r` for `R = lift(sech)`, on a log-spaced sweep of `[r_min, r_max]`.
pub fn kernel_transport_check(grid: GridSpec, r_min: f64, r_max: f64, samples: usize) -> Result<KernelTransport> {
    if !(r_min > 0.0 && r_max > r_min && samples >= 2) {
        return Err(Error::InvalidParameter(format!(
            "bad sweep [{r_min}, {r_max}] with {samples} samples"
        )));
    }
    let big_r = lift(&Profile::from_fn(grid, profile_h)?);
    let q_prime = |t: f64| -t.tanh() / t.cosh();
    let (mut worst, mut scale) = (0.0f64, 0.0f64);
    for i in 0..samples {
        let r = (r_min.ln() + (r_max / r_min).ln() * i as f64 / (samples - 1) as f64).exp();
        let lhs = big_r.psi(r) + r * big_r.psi_derivative(r);
        let rhs = q_prime(r.ln()) / r;
        worst = worst.max((lhs - rhs).abs());
        scale = scale.max(rhs.abs());
    }
    Ok(KernelTransport {
        max_rel_error: worst / scale,
        r_min,
        r_max,
        samples,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphereReport {
    pub funk_hecke: Vec<FunkHeckeRow>,
    pub bs_eigenvalues: Vec<BsEigenvalue>,
    pub kernel_transport: KernelTransport,
    pub checks: Vec<IdentityCheck>,
}

impl SphereReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

pub fn sphere_report(grid: GridSpec, l_max: usize, n_top: usize) -> Result<SphereReport> {
    let funk_hecke = funk_hecke_table(l_max)?;
    let bs_eigenvalues = bs_radial_eigenvalues(grid, n_top)?;
    let kernel_transport = kernel_transport_check(grid, 0.05, 20.0, 400)?;
    let mut checks = vec![
        IdentityCheck::new("volume of the three-sphere", jacobian_volume()?, 2.0 * PI * PI, 1e-12),
        {
            let (l, r) = conformal_identity_check([0.0; 3], [1.0, 0.0, 0.0])?;
            IdentityCheck::new("conformal chord identity at 0 and e1", l, r, 1e-14)
        },
        IdentityCheck::absolute(
            "kernel transport R + rR' = Q'(ln r)/r",
            kernel_transport.max_rel_error,
            0.0,
            1e-10,
        ),
    ];
    for row in &funk_hecke {
        checks.push(IdentityCheck::new(
            format!("zonal eigenvalue l={}", row.l),
            row.funk_hecke_value,
            row.target,
            1e-12,
        ));
    }
    for e in bs_eigenvalues.iter().take(6) {
        checks.push(IdentityCheck::absolute(
            format!("radial Birman-Schwinger eigenvalue l={}", e.l),
            e.eigenvalue,
            e.target,
            1e-3,
        ));
        checks.push(IdentityCheck::new(
            format!("radial Birman-Schwinger parity l={}", e.l),
            e.parity as f64,
            if e.l % 2 == 0 { 1.0 } else { -1.0 },
            0.0,
        ));
    }
    Ok(SphereReport {
        funk_hecke,
        bs_eigenvalues,
        kernel_transport,
        checks,
    })
}
