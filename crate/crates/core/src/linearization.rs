//! Dense linearized operators `A + μ − c Q^p` and kernel certificates.

use faer::{Mat, Side};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridSpec, Profile};
use crate::spectral::{circulant_column, spectral_derivative, FourierMultiplier};

/// Symmetric matrix acting on grid vectors.
#[derive(Debug, Clone)]
pub struct DenseOperator {
    matrix: Mat<f64>,
    grid: GridSpec,
    label: String,
}

/// Relative symmetry defect tolerated by [`DenseOperator`].
pub const SYMMETRY_TOL: f64 = 1e-10;
/// Relative defect under `t → −t` below which the parity split is used.
const REFLECTION_TOL: f64 = 1e-12;

impl DenseOperator {
    pub fn new(matrix: Mat<f64>, grid: GridSpec, label: impl Into<String>) -> Result<Self> {
        let n = grid.len();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::InvalidParameter(format!(
                "matrix is {}x{}, grid has {n} points",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let op = Self {
            matrix,
            grid,
            label: label.into(),
        };
        let defect = op.symmetry_defect();
        if defect > SYMMETRY_TOL * op.max_abs().max(f64::MIN_POSITIVE) {
            return Err(Error::InvalidParameter(format!("matrix not symmetric, defect {defect:e}")));
        }
        Ok(op)
    }

    pub fn matrix(&self) -> &Mat<f64> {
        &self.matrix
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.grid.len()
    }

    pub fn max_abs(&self) -> f64 {
        let n = self.dim();
        let mut m: f64 = 0.0;
        for j in 0..n {
            for i in 0..n {
                m = m.max(self.matrix[(i, j)].abs());
            }
        }
        m
    }

    pub fn symmetry_defect(&self) -> f64 {
        let n = self.dim();
        let mut d: f64 = 0.0;
        for j in 0..n {
            for i in 0..j {
                d = d.max((self.matrix[(i, j)] - self.matrix[(j, i)]).abs());
            }
        }
        d
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.matrix[(i, i)]).sum()
    }

    /// `max |M_{ik} − M_{σi,σk}|` for the grid reflection `σ`.
    pub fn reflection_defect(&self) -> f64 {
        let n = self.dim();
        let mut d: f64 = 0.0;
        for k in 0..n {
            let mk = self.grid.mirror_index(k);
            for i in 0..n {
                let mi = self.grid.mirror_index(i);
                d = d.max((self.matrix[(i, k)] - self.matrix[(mi, mk)]).abs());
            }
        }
        d
    }

    pub fn is_reflection_symmetric(&self) -> bool {
        self.reflection_defect() <= REFLECTION_TOL * self.max_abs().max(f64::MIN_POSITIVE)
    }

    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        let n = self.dim();
        if v.len() != n {
            return Err(Error::InvalidParameter(format!("vector length {} != {n}", v.len())));
        }
        let mut out = vec![0.0; n];
        for (k, &vk) in v.iter().enumerate() {
            let col = self.matrix.col(k);
            for (i, o) in out.iter_mut().enumerate() {
                *o += col[i] * vk;
            }
        }
        Ok(out)
    }

    /// `Eᵀ M E` for the orthonormal even or odd basis `E`.
    fn restrict(&self, basis: &ParityBasis) -> Mat<f64> {
        let dim = basis.vectors.len();
        Mat::from_fn(dim, dim, |a, b| {
            let mut s = 0.0;
            for &(i, wi) in &basis.vectors[a] {
                for &(k, wk) in &basis.vectors[b] {
                    s += wi * wk * self.matrix[(i, k)];
                }
            }
            s
        })
    }
}

/// `F⁻¹ diag(m(τ_k)) F + μ I − diag(c Q^p)`, symmetrized.
pub fn build_linearized(
    m: &FourierMultiplier,
    mu: f64,
    c: f64,
    q: &Profile,
    p: f64,
) -> Result<DenseOperator> {
    let grid = *q.grid();
    let n = grid.len();
    let integer_p = p.fract() == 0.0;
    if !integer_p && q.values().iter().any(|&v| v < 0.0) {
        return Err(Error::InvalidParameter(format!(
            "non-integer power {p} needs a nonnegative profile"
        )));
    }
    let column = circulant_column(m, &grid);
    let potential: Vec<f64> = q
        .values()
        .iter()
        .map(|&v| c * if integer_p { v.powi(p as i32) } else { v.powf(p) })
        .collect();
    let raw = Mat::from_fn(n, n, |i, k| {
        let mut v = column[(i + n - k) % n];
        if i == k {
            v += mu - potential[i];
        }
        v
    });
    let matrix = Mat::from_fn(n, n, |i, k| 0.5 * (raw[(i, k)] + raw[(k, i)]));
    let label = format!("{} + {mu} - {c} Q^{p}", m.label());
    DenseOperator::new(matrix, grid, label)
}

/// `Eᵀ M E` for the even basis `e_0`, `e_{N/2}`, `(e_j + e_{N−j})/√2`, `0 < j < N/2`.
pub(crate) fn even_block(d: &DenseOperator) -> Mat<f64> {
    d.restrict(&ParityBasis::new(d.dim(), true))
}

struct ParityBasis {
    vectors: Vec<Vec<(usize, f64)>>,
}

impl ParityBasis {
    /// Even: `e_0`, `e_{N/2}`, `(e_j + e_{N−j})/√2`; odd: `(e_j − e_{N−j})/√2`.
    fn new(n: usize, even: bool) -> Self {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let sign = if even { 1.0 } else { -1.0 };
        let mut vectors = Vec::with_capacity(n / 2 + 1);
        if even {
            vectors.push(vec![(0, 1.0)]);
            vectors.push(vec![(n / 2, 1.0)]);
        }
        for j in 1..n / 2 {
            vectors.push(vec![(j, r), (n - j, sign * r)]);
        }
        Self { vectors }
    }

    fn lift(&self, coeffs: &[f64], n: usize) -> Vec<f64> {
        let mut out = vec![0.0; n];
        for (c, vec) in coeffs.iter().zip(&self.vectors) {
            for &(i, w) in vec {
                out[i] += c * w;
            }
        }
        out
    }
}

fn sym_eigen(m: &Mat<f64>) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let eig = m.self_adjoint_eigen(Side::Lower).map_err(|_| Error::EigenFailure)?;
    let s = eig.S().column_vector();
    let u = eig.U();
    let n = m.nrows();
    let mut pairs: Vec<(f64, Vec<f64>)> = (0..n)
        .map(|k| (s[k], (0..n).map(|i| u[(i, k)]).collect()))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(pairs.into_iter().unzip())
}

pub(crate) fn sym_eigenvalues(m: &Mat<f64>) -> Result<Vec<f64>> {
    let mut v = m.self_adjoint_eigenvalues(Side::Lower).map_err(|_| Error::EigenFailure)?;
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// `1e−6` times the spectral radius.
pub fn default_zero_tol(eigenvalues: &[f64]) -> f64 {
    1e-6 * eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub label: String,
    pub eigenvalues: Vec<f64>,
    pub zero_modes: Vec<usize>,
    pub morse_index: usize,
    /// `overlaps[i][r]`: normalized overlap of the `i`-th zero mode with reference `r`.
    pub overlaps: Vec<Vec<f64>>,
    pub zero_tol: f64,
    pub trace: f64,
}

impl SpectralReport {
    fn from_eigenvalues(label: &str, eigenvalues: Vec<f64>, zero_tol: Option<f64>, trace: f64) -> Self {
        let zero_tol = zero_tol.unwrap_or_else(|| default_zero_tol(&eigenvalues));
        let zero_modes = (0..eigenvalues.len())
            .filter(|&i| eigenvalues[i].abs() <= zero_tol)
            .collect();
        let morse_index = eigenvalues.iter().filter(|&&v| v < -zero_tol).count();
        Self {
            label: label.to_string(),
            eigenvalues,
            zero_modes,
            morse_index,
            overlaps: Vec::new(),
            zero_tol,
            trace,
        }
    }

    /// `|Σλ − tr M| / max(|tr M|, 1)`.
    pub fn trace_defect(&self) -> f64 {
        let sum: f64 = self.eigenvalues.iter().sum();
        (sum - self.trace).abs() / self.trace.abs().max(1.0)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn eigenvalues_csv(&self) -> String {
        let mut out = String::from("index,eigenvalue\n");
        for (i, v) in self.eigenvalues.iter().enumerate() {
            out.push_str(&format!("{i},{v:.17e}\n"));
        }
        out
    }
}

/// Full spectrum; `zero_tol = None` uses [`default_zero_tol`].
pub fn eigensolve(d: &DenseOperator, zero_tol: Option<f64>) -> Result<SpectralReport> {
    let values = sym_eigenvalues(d.matrix())?;
    Ok(SpectralReport::from_eigenvalues(d.label(), values, zero_tol, d.trace()))
}

/// As [`eigensolve`], also filling `overlaps` against `references`.
pub fn eigensolve_with_references(
    d: &DenseOperator,
    zero_tol: Option<f64>,
    references: &[Vec<f64>],
) -> Result<SpectralReport> {
    let (values, vectors) = sym_eigen(d.matrix())?;
    let mut report = SpectralReport::from_eigenvalues(d.label(), values, zero_tol, d.trace());
    report.overlaps = report
        .zero_modes
        .iter()
        .map(|&i| references.iter().map(|r| normalized_overlap(&vectors[i], r)).collect())
        .collect();
    Ok(report)
}

fn normalized_overlap(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        (dot / (na * nb)).clamp(-1.0, 1.0)
    }
}

/// Eigenvalues of the even and odd restrictions, ascending.
pub fn parity_spectra(d: &DenseOperator) -> Result<(Vec<f64>, Vec<f64>)> {
    if !d.is_reflection_symmetric() {
        return Err(Error::ParityViolation {
            tag: "operator",
            defect: d.reflection_defect(),
        });
    }
    let n = d.dim();
    let even = sym_eigenvalues(&d.restrict(&ParityBasis::new(n, true)))?;
    let odd = sym_eigenvalues(&d.restrict(&ParityBasis::new(n, false)))?;
    Ok((even, odd))
}

/// Smallest `|λ|` of the operator restricted to even grid vectors.
pub fn even_gap(d: &DenseOperator) -> Result<f64> {
    let n = d.dim();
    if !d.is_reflection_symmetric() {
        return Err(Error::ParityViolation {
            tag: "operator",
            defect: d.reflection_defect(),
        });
    }
    let even = sym_eigenvalues(&d.restrict(&ParityBasis::new(n, true)))?;
    Ok(even.iter().fold(f64::INFINITY, |m, v| m.min(v.abs())))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail,
    Inconclusive,
}

/// Minimum overlap of the zero mode with `Q′`.
pub const OVERLAP_MIN: f64 = 0.999;
/// Required ratio between the second-smallest `|λ|` and `zero_tol`.
pub const GAP_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NondegeneracyReport {
    pub label: String,
    pub status: CheckStatus,
    pub zero_count: usize,
    pub smallest_abs_eigenvalue: f64,
    /// Second-smallest `|λ|`.
    pub gap: f64,
    pub overlap: f64,
    pub zero_tol: f64,
    pub morse_index: usize,
    pub parity_split: bool,
    pub detail: String,
}

/// Certifies `ker = span{Q′}`: one eigenvalue within `zero_tol`, its eigenvector
/// aligned with `Q′` to [`OVERLAP_MIN`], and the next `|λ|` above `GAP_FACTOR·zero_tol`.
pub fn nondegeneracy_check(
    d: &DenseOperator,
    q: &Profile,
    zero_tol: Option<f64>,
) -> Result<NondegeneracyReport> {
    d.grid().ensure_same(q.grid())?;
    let n = d.dim();
    let q_prime = spectral_derivative(q).into_values();

    // (eigenvalue, eigenvector) pairs, split by parity when possible
    let parity_split = d.is_reflection_symmetric();
    let mut pairs: Vec<(f64, Vec<f64>)> = Vec::with_capacity(n);
    if parity_split {
        for even in [true, false] {
            let basis = ParityBasis::new(n, even);
            let (vals, vecs) = sym_eigen(&d.restrict(&basis))?;
            pairs.extend(vals.into_iter().zip(vecs.into_iter().map(|v| basis.lift(&v, n))));
        }
    } else {
        let (vals, vecs) = sym_eigen(d.matrix())?;
        pairs.extend(vals.into_iter().zip(vecs));
    }
    let eigenvalues: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let zero_tol = zero_tol.unwrap_or_else(|| default_zero_tol(&eigenvalues));
    let zero_count = eigenvalues.iter().filter(|v| v.abs() <= zero_tol).count();
    let morse_index = eigenvalues.iter().filter(|&&v| v < -zero_tol).count();

    let mut order: Vec<usize> = (0..pairs.len()).collect();
    order.sort_by(|&a, &b| pairs[a].0.abs().total_cmp(&pairs[b].0.abs()));
    let smallest = pairs[order[0]].0.abs();
    let gap = order.get(1).map_or(f64::INFINITY, |&i| pairs[i].0.abs());
    let overlap = normalized_overlap(&pairs[order[0]].1, &q_prime).abs();

    let (status, detail) = if zero_count == 0 {
        (CheckStatus::Fail, format!("no eigenvalue within {zero_tol:e}"))
    } else if gap <= GAP_FACTOR * zero_tol {
        (
            CheckStatus::Inconclusive,
            format!("second |eigenvalue| {gap:e} within {GAP_FACTOR}x zero_tol"),
        )
    } else if overlap < OVERLAP_MIN {
        (CheckStatus::Fail, format!("zero mode overlap with Q' is {overlap}"))
    } else {
        (CheckStatus::Pass, "kernel spanned by Q'".to_string())
    };
    Ok(NondegeneracyReport {
        label: d.label().to_string(),
        status,
        zero_count,
        smallest_abs_eigenvalue: smallest,
        gap,
        overlap,
        zero_tol,
        morse_index,
        parity_split,
        detail,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::ilw_symbol;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_2_PI, PI};

    fn sech(t: f64) -> f64 {
        1.0 / t.cosh()
    }

    fn ilw_lplus(grid: GridSpec) -> (DenseOperator, Profile) {
        let q = Profile::from_fn(grid, sech).unwrap();
        (build_linearized(&FourierMultiplier::ilw(), FRAC_2_PI, 2.0, &q, 1.0).unwrap(), q)
    }

    fn kdv_lplus(grid: GridSpec) -> (DenseOperator, Profile) {
        let q = Profile::from_fn(grid, |t| 1.5 * sech(t / 2.0).powi(2)).unwrap();
        let m = FourierMultiplier::fractional_laplacian(1.0).unwrap();
        (build_linearized(&m, 1.0, 2.0, &q, 1.0).unwrap(), q)
    }

    #[test]
    fn free_operator_spectrum_is_the_symbol() {
        let grid = GridSpec::new(10.0, 128).unwrap();
        let q = Profile::from_fn(grid, sech).unwrap();
        let m = FourierMultiplier::ilw();
        let d = build_linearized(&m, 0.3, 0.0, &q, 1.0).unwrap();
        let report = eigensolve(&d, None).unwrap();
        let mut symbol: Vec<f64> = m.sample(&grid).iter().map(|v| v + 0.3).collect();
        symbol.sort_by(f64::total_cmp);
        for (a, b) in report.eigenvalues.iter().zip(&symbol) {
            assert!((a - b).abs() <= 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn zero_matrix_is_all_kernel() {
        let grid = GridSpec::new(5.0, 32).unwrap();
        let q = Profile::from_fn(grid, sech).unwrap();
        let d = build_linearized(&FourierMultiplier::zero(), 0.0, 0.0, &q, 1.0).unwrap();
        let report = eigensolve(&d, Some(1e-12)).unwrap();
        assert!(report.eigenvalues.iter().all(|v| v.abs() <= 1e-14));
        assert_eq!(report.zero_modes.len(), 32);
        let nd = nondegeneracy_check(&d, &q, Some(1e-12)).unwrap();
        assert_eq!(nd.status, CheckStatus::Inconclusive);
    }

    #[test]
    fn positive_free_ilw_operator() {
        let grid = GridSpec::new(10.0, 128).unwrap();
        let q = Profile::from_fn(grid, sech).unwrap();
        let d = build_linearized(&FourierMultiplier::ilw(), FRAC_2_PI, 0.0, &q, 1.0).unwrap();
        let report = eigensolve(&d, None).unwrap();
        assert!((report.eigenvalues[0] - FRAC_2_PI).abs() < 1e-12);
        assert_eq!(report.morse_index, 0);
        assert!(report.zero_modes.is_empty());
        assert_eq!(nondegeneracy_check(&d, &q, None).unwrap().status, CheckStatus::Fail);
        assert!(ilw_symbol(0.0).abs() < 1e-15);
    }

    #[test]
    fn derivative_of_ground_state_is_annihilated() {
        let grid = GridSpec::spectral();
        let (d, _) = ilw_lplus(grid);
        let hp: Vec<f64> = grid.nodes().iter().map(|&t| -sech(t) * t.tanh()).collect();
        let mh = d.apply(&hp).unwrap();
        let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!(norm(&mh) <= 1e-6 * norm(&hp));

        let (d, _) = kdv_lplus(grid);
        let qp: Vec<f64> = grid
            .nodes()
            .iter()
            .map(|&t| -1.5 * sech(t / 2.0).powi(2) * (t / 2.0).tanh())
            .collect();
        assert!(norm(&d.apply(&qp).unwrap()) <= 1e-6 * norm(&qp));
    }

    #[test]
    fn ilw_linearization_has_one_dimensional_kernel() {
        let (d, q) = ilw_lplus(GridSpec::spectral());
        let report = eigensolve_with_references(&d, None, &[spectral_derivative(&q).into_values()]).unwrap();
        assert_eq!(report.zero_modes.len(), 1);
        assert!(report.overlaps[0][0].abs() >= 0.999);
        assert!(report.trace_defect() <= 1e-8);
        let nd = nondegeneracy_check(&d, &q, None).unwrap();
        assert_eq!(nd.status, CheckStatus::Pass, "{nd:?}");
        assert!(nd.parity_split);
        assert_eq!(nd.morse_index, report.morse_index);
        let eg = even_gap(&d).unwrap();
        assert!(eg >= 100.0 * nd.zero_tol, "even gap {eg}");
    }

    #[test]
    fn local_soliton_is_nondegenerate() {
        let (d, q) = kdv_lplus(GridSpec::spectral());
        let nd = nondegeneracy_check(&d, &q, None).unwrap();
        assert_eq!(nd.status, CheckStatus::Pass, "{nd:?}");
    }

    #[test]
    fn lorentzian_is_nondegenerate_on_large_box() {
        let grid = GridSpec::new(200.0, 2048).unwrap();
        let q = Profile::from_fn(grid, |t| 2.0 / (1.0 + t * t)).unwrap();
        let m = FourierMultiplier::fractional_laplacian(0.5).unwrap();
        let d = build_linearized(&m, 1.0, 2.0, &q, 1.0).unwrap();
        let nd = nondegeneracy_check(&d, &q, None).unwrap();
        assert_eq!(nd.status, CheckStatus::Pass, "{nd:?}");
    }

    #[test]
    fn parity_spectra_recombine_to_full_spectrum() {
        let grid = GridSpec::new(8.0, 64).unwrap();
        let (d, _) = ilw_lplus(grid);
        let (even, odd) = parity_spectra(&d).unwrap();
        assert_eq!(even.len(), 33);
        assert_eq!(odd.len(), 31);
        let mut joined: Vec<f64> = even.into_iter().chain(odd).collect();
        joined.sort_by(f64::total_cmp);
        let full = eigensolve(&d, None).unwrap().eigenvalues;
        for (a, b) in joined.iter().zip(&full) {
            assert!((a - b).abs() < 1e-11);
        }
    }

    #[test]
    fn asymmetric_potential_disables_split() {
        let grid = GridSpec::new(8.0, 64).unwrap();
        let q = Profile::from_fn(grid, |t| sech(t - 1.0)).unwrap();
        let d = build_linearized(&FourierMultiplier::ilw(), FRAC_2_PI, 2.0, &q, 1.0).unwrap();
        assert!(!d.is_reflection_symmetric());
        assert!(even_gap(&d).is_err());
        assert!(!nondegeneracy_check(&d, &q, None).unwrap().parity_split);
    }

    #[test]
    fn rejects_bad_inputs() {
        let grid = GridSpec::new(8.0, 64).unwrap();
        let q = Profile::from_fn(grid, |t| t.sin()).unwrap();
        assert!(build_linearized(&FourierMultiplier::ilw(), 1.0, 2.0, &q, 0.5).is_err());
        let other = Profile::from_fn(GridSpec::new(8.0, 32).unwrap(), sech).unwrap();
        let (d, _) = ilw_lplus(grid);
        assert!(nondegeneracy_check(&d, &other, None).is_err());
        let bad = Mat::from_fn(64, 64, |i, k| if i < k { 1.0 } else { 0.0 });
        assert!(DenseOperator::new(bad, grid, "x").is_err());
        assert!(d.apply(&[1.0; 3]).is_err());
    }

    #[test]
    fn report_serialization() {
        let grid = GridSpec::new(8.0, 16).unwrap();
        let (d, _) = ilw_lplus(grid);
        let r = eigensolve(&d, None).unwrap();
        let json = r.to_json().unwrap();
        let back: SpectralReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
        let csv = r.eigenvalues_csv();
        assert!(csv.starts_with("index,eigenvalue\n0,"));
        assert_eq!(csv.lines().count(), 17);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn eigenvalues_sum_to_trace(
            amp in 0.1f64..3.0,
            center in -2.0f64..2.0,
            width in 0.3f64..2.0,
            mu in 0.0f64..2.0,
            s in 0.2f64..1.0,
        ) {
            let grid = GridSpec::new(2.0 * PI, 48).unwrap();
            let q = crate::groundstate::gaussian(grid, amp, center, width);
            let m = FourierMultiplier::fractional_laplacian(s).unwrap();
            let d = build_linearized(&m, mu, 2.0, &q, 1.0).unwrap();
            let r = eigensolve(&d, None).unwrap();
            prop_assert_eq!(r.eigenvalues.len(), 48);
            prop_assert!(r.trace_defect() <= 1e-8);
        }
    }
}
