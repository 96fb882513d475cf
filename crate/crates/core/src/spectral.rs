//! Fourier-multiplier operators on a periodic grid.
//!
//! Transforms use the unitary-in-the-limit convention
//! `û(τ) = (2π)^{-1/2} ∫ e^{-iτt} u(t) dt`, so that
//! `Σ_k |û_k|² Δτ ≈ ∫ |û|² dτ = ‖u‖₂²` holds without extra factors.

use std::f64::consts::{FRAC_2_PI, PI};
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::grid::{GridSpec, Profile};

fn planner() -> &'static Mutex<FftPlanner<f64>> {
    static PLANNER: OnceLock<Mutex<FftPlanner<f64>>> = OnceLock::new();
    PLANNER.get_or_init(|| Mutex::new(FftPlanner::new()))
}

fn forward_plan(n: usize) -> Arc<dyn Fft<f64>> {
    planner().lock().expect("fft planner poisoned").plan_fft_forward(n)
}

fn inverse_plan(n: usize) -> Arc<dyn Fft<f64>> {
    planner().lock().expect("fft planner poisoned").plan_fft_inverse(n)
}

/// Unnormalized forward DFT of real samples.
pub fn fft_real(values: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    forward_plan(buf.len()).process(&mut buf);
    buf
}

/// Inverse DFT including the `1/N` factor; returns the real part.
pub fn ifft_real(mut coeffs: Vec<Complex64>) -> Vec<f64> {
    let n = coeffs.len();
    inverse_plan(n).process(&mut coeffs);
    let scale = 1.0 / n as f64;
    coeffs.into_iter().map(|c| c.re * scale).collect()
}

/// In-place forward DFT of a complex buffer.
pub fn fft_in_place(buf: &mut [Complex64]) {
    forward_plan(buf.len()).process(buf);
}

/// `τ coth(πτ/2) − 2/π`, the ILW dispersion symbol. Even, nonnegative, zero only at `τ = 0`.
pub fn ilw_symbol(tau: f64) -> f64 {
    let x = 0.5 * PI * tau.abs();
    if x < 1e-4 {
        // τ coth(πτ/2) = (2/π) x coth x = (2/π)(1 + x²/3 − x⁴/45 + …)
        let x2 = x * x;
        FRAC_2_PI * x2 * (1.0 / 3.0 - x2 / 45.0)
    } else {
        tau.abs() * coth_positive(x) - FRAC_2_PI
    }
}

/// `τ coth(πτ/2)`, continuous at 0 with value `2/π`.
pub fn ilw_full_symbol(tau: f64) -> f64 {
    let x = 0.5 * PI * tau.abs();
    if x < 1e-4 {
        let x2 = x * x;
        FRAC_2_PI * (1.0 + x2 * (1.0 / 3.0 - x2 / 45.0))
    } else {
        tau.abs() * coth_positive(x)
    }
}

/// `coth x` for `x > 0` as `1 + 2/(e^{2x} − 1)`.
fn coth_positive(x: f64) -> f64 {
    1.0 + 2.0 / (2.0 * x).exp_m1()
}

/// `|τ|^{2s}` for `0 < s ≤ 1`.
pub fn frac_lap_symbol(s: f64, tau: f64) -> Result<f64> {
    check_fractional_exponent(s)?;
    Ok(tau.abs().powf(2.0 * s))
}

fn check_fractional_exponent(s: f64) -> Result<()> {
    if s > 0.0 && s <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "fractional exponent s must lie in (0, 1], got {s}"
        )))
    }
}

#[derive(Clone)]
enum SymbolKind {
    Constant(f64),
    FractionalLaplacian(f64),
    Ilw,
    IlwFull,
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

/// An even real symbol `m(τ)` plus a constant shift, acting diagonally in Fourier space.
#[derive(Clone)]
pub struct FourierMultiplier {
    kind: SymbolKind,
    shift: f64,
    label: String,
}

impl fmt::Debug for FourierMultiplier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FourierMultiplier")
            .field("label", &self.label)
            .field("shift", &self.shift)
            .finish()
    }
}

impl FourierMultiplier {
    pub fn identity() -> Self {
        Self::constant(1.0)
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn constant(c: f64) -> Self {
        Self {
            kind: SymbolKind::Constant(c),
            shift: 0.0,
            label: format!("const({c})"),
        }
    }

    pub fn fractional_laplacian(s: f64) -> Result<Self> {
        check_fractional_exponent(s)?;
        Ok(Self {
            kind: SymbolKind::FractionalLaplacian(s),
            shift: 0.0,
            label: format!("(-Δ)^{s}"),
        })
    }

    /// The ILW operator `T`.
    pub fn ilw() -> Self {
        Self {
            kind: SymbolKind::Ilw,
            shift: 0.0,
            label: "T".to_string(),
        }
    }

    /// `T + 2/π`, symbol `τ coth(πτ/2)`.
    pub fn ilw_full() -> Self {
        Self {
            kind: SymbolKind::IlwFull,
            shift: 0.0,
            label: "τcoth(πτ/2)".to_string(),
        }
    }

    /// Arbitrary symbol. The caller is responsible for evenness.
    pub fn custom(label: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            kind: SymbolKind::Custom(Arc::new(f)),
            shift: 0.0,
            label: label.into(),
        }
    }

    /// `m + μ`.
    pub fn shifted(&self, mu: f64) -> Self {
        let mut out = self.clone();
        out.shift += mu;
        out.label = format!("{} + {mu}", self.label);
        out
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    /// The exponent `s` when this is `(−Δ)^s` (possibly shifted).
    pub fn fractional_exponent(&self) -> Option<f64> {
        match self.kind {
            SymbolKind::FractionalLaplacian(s) => Some(s),
            _ => None,
        }
    }

    pub fn is_ilw(&self) -> bool {
        matches!(self.kind, SymbolKind::Ilw)
    }

    pub fn eval(&self, tau: f64) -> f64 {
        let base = match &self.kind {
            SymbolKind::Constant(c) => *c,
            SymbolKind::FractionalLaplacian(s) => tau.abs().powf(2.0 * s),
            SymbolKind::Ilw => ilw_symbol(tau),
            SymbolKind::IlwFull => ilw_full_symbol(tau),
            SymbolKind::Custom(f) => f(tau),
        };
        base + self.shift
    }

    /// Symbol values in FFT bin order; Nyquist uses `+τ_{N/2}`.
    pub fn sample(&self, grid: &GridSpec) -> Vec<f64> {
        grid.frequencies().into_iter().map(|t| self.eval(t)).collect()
    }

    /// Largest `|m(τ_k) − m(−τ_k)|` over the sampled frequencies.
    pub fn evenness_defect(&self, grid: &GridSpec) -> f64 {
        grid.frequencies()
            .into_iter()
            .map(|t| (self.eval(t) - self.eval(-t)).abs())
            .fold(0.0, f64::max)
    }

    pub fn min_on(&self, grid: &GridSpec) -> f64 {
        self.sample(grid).into_iter().fold(f64::INFINITY, f64::min)
    }
}

/// `F⁻¹ diag(m) F u`. The parity tag of `u` is preserved.
pub fn apply_multiplier(m: &FourierMultiplier, u: &Profile) -> Result<Profile> {
    let symbol = m.sample(u.grid());
    let mut coeffs = fft_real(u.values());
    for (c, s) in coeffs.iter_mut().zip(&symbol) {
        *c *= *s;
    }
    Ok(Profile::new(*u.grid(), ifft_real(coeffs))?.with_parity_unchecked(u.parity()))
}

/// `Σ_k m(τ_k) |û_k|² Δτ`, the discrete `(u, A u)`.
pub fn quadratic_form(m: &FourierMultiplier, u: &Profile) -> Result<f64> {
    let grid = u.grid();
    let symbol = m.sample(grid);
    let coeffs = fft_real(u.values());
    let sum: f64 = coeffs
        .iter()
        .zip(&symbol)
        .map(|(c, s)| s * c.norm_sqr())
        .sum();
    Ok(sum * grid.spacing() / grid.len() as f64)
}

/// Solves `(A + μ) u = f` exactly in the discrete Fourier basis.
pub fn invert_shifted(m: &FourierMultiplier, mu: f64, f: &Profile) -> Result<Profile> {
    let grid = f.grid();
    let shifted = shifted_symbol(m, mu, grid)?;
    let mut coeffs = fft_real(f.values());
    for (c, s) in coeffs.iter_mut().zip(&shifted) {
        *c /= *s;
    }
    Ok(Profile::new(*grid, ifft_real(coeffs))?.with_parity_unchecked(f.parity()))
}

fn shifted_symbol(m: &FourierMultiplier, mu: f64, grid: &GridSpec) -> Result<Vec<f64>> {
    let taus = grid.frequencies();
    let mut out = Vec::with_capacity(taus.len());
    for tau in taus {
        let value = m.eval(tau) + mu;
        if !(value > 0.0) {
            return Err(Error::NonPositiveShiftedSymbol { tau, value });
        }
        out.push(value);
    }
    Ok(out)
}

/// `(h Σ |u_j|^p)^{1/p}`.
pub fn lp_norm(u: &Profile, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::InvalidParameter(format!("Lp exponent must be >= 1, got {p}")));
    }
    let sum: f64 = u.values().iter().map(|v| v.abs().powf(p)).sum();
    Ok((u.grid().spacing() * sum).powf(1.0 / p))
}

pub fn sup_norm(u: &Profile) -> f64 {
    u.max_abs()
}

/// First column of the circulant matrix `F⁻¹ diag(m) F`.
pub fn circulant_column(m: &FourierMultiplier, grid: &GridSpec) -> Vec<f64> {
    let coeffs = m.sample(grid).into_iter().map(|s| Complex64::new(s, 0.0)).collect();
    ifft_real(coeffs)
}

/// First column of the circulant matrix of `(A + μ)⁻¹`.
pub fn shifted_inverse_kernel(m: &FourierMultiplier, mu: f64, grid: &GridSpec) -> Result<Vec<f64>> {
    let coeffs = shifted_symbol(m, mu, grid)?
        .into_iter()
        .map(|s| Complex64::new(1.0 / s, 0.0))
        .collect();
    Ok(ifft_real(coeffs))
}

/// `u′` by multiplying with `iτ_k`; the Nyquist bin is dropped.
pub fn spectral_derivative(u: &Profile) -> Profile {
    let grid = u.grid();
    let nyquist = grid.len() / 2;
    let mut coeffs = fft_real(u.values());
    for (k, c) in coeffs.iter_mut().enumerate() {
        *c *= if k == nyquist {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(0.0, grid.frequency(k))
        };
    }
    let values = ifft_real(coeffs);
    Profile::new(*grid, values).expect("derivative of finite samples is finite")
}

/// `u(t − shift)` through the phase factor `e^{−iτ shift}`; Nyquist keeps only its cosine part.
pub fn translate(u: &Profile, shift: f64) -> Profile {
    let grid = u.grid();
    let nyquist = grid.len() / 2;
    let mut coeffs = fft_real(u.values());
    for (k, c) in coeffs.iter_mut().enumerate() {
        let phase = grid.frequency(k) * shift;
        *c *= if k == nyquist {
            Complex64::new(phase.cos(), 0.0)
        } else {
            Complex64::from_polar(1.0, -phase)
        };
    }
    Profile::new(*grid, ifft_real(coeffs)).expect("translate of finite samples is finite")
}

/// Spreads the N-bin spectrum of `values` into `m ≥ N` bins, splitting the Nyquist bin.
fn zero_pad(coeffs: &[Complex64], m: usize) -> Vec<Complex64> {
    let n = coeffs.len();
    let half = n / 2;
    let scale = m as f64 / n as f64;
    let mut out = vec![Complex64::new(0.0, 0.0); m];
    for k in 0..half {
        out[k] = coeffs[k] * scale;
    }
    for k in half + 1..n {
        out[m - (n - k)] = coeffs[k] * scale;
    }
    if m > n {
        out[half] = coeffs[half] * (0.5 * scale);
        out[m - half] = coeffs[half] * (0.5 * scale);
    } else {
        out[half] = coeffs[half] * scale;
    }
    out
}

/// Keeps the N lowest bins of an m-bin spectrum, folding both ±N/2 bins into Nyquist.
fn truncate(coeffs: &[Complex64], n: usize) -> Vec<Complex64> {
    let m = coeffs.len();
    let half = n / 2;
    let scale = n as f64 / m as f64;
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for k in 0..half {
        out[k] = coeffs[k] * scale;
    }
    for k in half + 1..n {
        out[k] = coeffs[m - (n - k)] * scale;
    }
    out[half] = if m > n {
        (coeffs[half] + coeffs[m - half]) * scale
    } else {
        coeffs[half] * scale
    };
    out
}

/// Trigonometric interpolant of `values` resampled on `factor × N` points.
pub fn upsample(values: &[f64], factor: usize) -> Vec<f64> {
    let m = values.len() * factor.max(1);
    ifft_real(zero_pad(&fft_real(values), m))
}

/// `u^n` with the product evaluated on a grid fine enough (`(n+1)N/2` points) that
/// no product mode aliases back onto the resolved band, then projected back.
pub fn dealiased_power(u: &Profile, n: u32) -> Profile {
    if n <= 1 {
        return if n == 1 { u.clone() } else { u.map(|_| 1.0).expect("finite") };
    }
    let len = u.len();
    let mut padded = ((n as usize + 1) * len).div_ceil(2);
    padded += padded % 2;
    let fine = ifft_real(zero_pad(&fft_real(u.values()), padded));
    let powered: Vec<f64> = fine.into_iter().map(|v| v.powi(n as i32)).collect();
    let projected = ifft_real(truncate(&fft_real(&powered), len));
    Profile::new(*u.grid(), projected)
        .expect("power of finite samples is finite")
        .with_parity_unchecked(u.parity())
}

/// Evaluates the trigonometric interpolant of `u` at an arbitrary point. O(N) per call.
pub fn trig_interpolate(u: &Profile, coeffs: &[Complex64], t: f64) -> f64 {
    let grid = u.grid();
    let n = grid.len();
    let nyquist = n / 2;
    let x = t + grid.half_width();
    let mut acc = 0.0;
    for (k, c) in coeffs.iter().enumerate() {
        let tau = grid.frequency(k);
        if k == nyquist {
            // split Nyquist: real cosine part only
            acc += c.re * (tau * x).cos();
        } else {
            let (s, co) = (tau * x).sin_cos();
            acc += c.re * co - c.im * s;
        }
    }
    acc / n as f64
}

/// Local Lagrange interpolation on a spectrally upsampled copy of a profile.
#[derive(Debug, Clone)]
pub struct SmoothInterpolant {
    fine: Vec<f64>,
    start: f64,
    step: f64,
}

/// Points used by each local Lagrange stencil.
const STENCIL: usize = 8;

impl SmoothInterpolant {
    pub fn new(u: &Profile, factor: usize) -> Self {
        let grid = u.grid();
        Self {
            fine: upsample(u.values(), factor),
            start: -grid.half_width(),
            step: grid.spacing() / factor.max(1) as f64,
        }
    }

    fn stencil(&self, t: f64) -> (f64, i64) {
        let s = (t - self.start) / self.step;
        let i0 = s.floor() as i64 - (STENCIL as i64 / 2 - 1);
        (s, i0)
    }

    fn sample(&self, i: i64) -> f64 {
        let n = self.fine.len() as i64;
        self.fine[i.rem_euclid(n) as usize]
    }

    pub fn eval(&self, t: f64) -> f64 {
        let (s, i0) = self.stencil(t);
        let mut acc = 0.0;
        for a in 0..STENCIL {
            let mut w = 1.0;
            for b in 0..STENCIL {
                if a != b {
                    w *= (s - (i0 + b as i64) as f64) / (a as f64 - b as f64);
                }
            }
            acc += w * self.sample(i0 + a as i64);
        }
        acc
    }

    pub fn derivative(&self, t: f64) -> f64 {
        let (s, i0) = self.stencil(t);
        let mut acc = 0.0;
        for a in 0..STENCIL {
            let mut dw = 0.0;
            for c in 0..STENCIL {
                if c == a {
                    continue;
                }
                let mut term = 1.0 / (a as f64 - c as f64);
                for b in 0..STENCIL {
                    if b != a && b != c {
                        term *= (s - (i0 + b as i64) as f64) / (a as f64 - b as f64);
                    }
                }
                dw += term;
            }
            acc += dw * self.sample(i0 + a as i64);
        }
        acc / self.step
    }
}
