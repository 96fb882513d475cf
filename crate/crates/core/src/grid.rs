//! Uniform periodic grids on `[-L, L)` and real profiles sampled on them.

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance used when validating a parity tag.
pub const PARITY_TOL: f64 = 1e-12;

/// Uniform grid `t_j = -L + j h`, `h = 2L/N`, with `N` even.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    #[serde(rename = "L")]
    half_width: f64,
    #[serde(rename = "N")]
    num_points: usize,
}

impl GridSpec {
    pub fn new(half_width: f64, num_points: usize) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "half width must be positive, got {half_width}"
            )));
        }
        if num_points < 2 || num_points % 2 != 0 {
            return Err(Error::InvalidGrid(format!(
                "number of points must be even and at least 2, got {num_points}"
            )));
        }
        Ok(Self {
            half_width,
            num_points,
        })
    }

    /// `L = 20π`, `N = 2048`: the exponentially decaying profiles.
    pub fn standard() -> Self {
        Self {
            half_width: 20.0 * PI,
            num_points: 2048,
        }
    }

    /// `L = 20π`, `N = 1024`: dense spectral computations.
    pub fn spectral() -> Self {
        Self {
            half_width: 20.0 * PI,
            num_points: 1024,
        }
    }

    /// `L = 200`, `N = 8192`: algebraically decaying profiles.
    pub fn large_box() -> Self {
        Self {
            half_width: 200.0,
            num_points: 8192,
        }
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn len(&self) -> usize {
        self.num_points
    }

    pub fn is_empty(&self) -> bool {
        self.num_points == 0
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.num_points as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        -self.half_width + j as f64 * self.spacing()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.num_points).map(|j| self.node(j)).collect()
    }

    /// Index of the node `t = 0`.
    pub fn origin_index(&self) -> usize {
        self.num_points / 2
    }

    /// Index of `-t_j` under periodic wrap-around.
    pub fn mirror_index(&self, j: usize) -> usize {
        (self.num_points - j) % self.num_points
    }

    /// Signed wavenumber of FFT bin `k`, in `-N/2..N/2`.
    pub fn wavenumber(&self, k: usize) -> i64 {
        let n = self.num_points as i64;
        let k = k as i64;
        if k < n / 2 {
            k
        } else {
            k - n
        }
    }

    /// Angular frequency `τ_k = πk/L` of FFT bin `k`.
    pub fn frequency(&self, k: usize) -> f64 {
        PI * self.wavenumber(k) as f64 / self.half_width
    }

    /// Frequencies in FFT bin order. The Nyquist bin is reported at `+τ_{N/2}`.
    pub fn frequencies(&self) -> Vec<f64> {
        let nyquist = self.num_points / 2;
        (0..self.num_points)
            .map(|k| {
                if k == nyquist {
                    PI * nyquist as f64 / self.half_width
                } else {
                    self.frequency(k)
                }
            })
            .collect()
    }

    /// Spacing `π/L` of the frequency lattice.
    pub fn frequency_step(&self) -> f64 {
        PI / self.half_width
    }

    pub fn max_frequency(&self) -> f64 {
        PI * (self.num_points / 2) as f64 / self.half_width
    }

    pub fn ensure_same(&self, other: &GridSpec) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch {
                expected_l: self.half_width,
                expected_n: self.num_points,
                got_l: other.half_width,
                got_n: other.num_points,
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
    #[default]
    None,
}

impl Parity {
    fn sign(self) -> Option<f64> {
        match self {
            Parity::Even => Some(1.0),
            Parity::Odd => Some(-1.0),
            Parity::None => None,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
            Parity::None => "none",
        }
    }
}

/// Real samples of a function on a [`GridSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    grid: GridSpec,
    values: Vec<f64>,
    parity: Parity,
}

impl Profile {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        if let Some(j) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(j));
        }
        Ok(Self {
            grid,
            values,
            parity: Parity::None,
        })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.len()],
            parity: Parity::None,
        }
    }

    /// Samples `f` at every node.
    pub fn from_fn(grid: GridSpec, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid, grid.nodes().into_iter().map(f).collect())
    }

    /// Attaches a parity tag after checking it holds within [`PARITY_TOL`].
    pub fn with_parity(mut self, parity: Parity) -> Result<Self> {
        if let Some(sign) = parity.sign() {
            let defect = self.parity_defect_for(sign);
            if defect > PARITY_TOL {
                return Err(Error::ParityViolation {
                    tag: parity.name(),
                    defect,
                });
            }
        }
        self.parity = parity;
        Ok(self)
    }

    pub(crate) fn with_parity_unchecked(mut self, parity: Parity) -> Self {
        self.parity = parity;
        self
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    /// `max_j |u_j - u_{-j}| / max |u|`; zero for the zero profile.
    pub fn even_defect(&self) -> f64 {
        self.parity_defect_for(1.0)
    }

    pub fn odd_defect(&self) -> f64 {
        self.parity_defect_for(-1.0)
    }

    fn parity_defect_for(&self, sign: f64) -> f64 {
        let scale = self.max_abs();
        if scale == 0.0 {
            return 0.0;
        }
        let worst = (0..self.len())
            .map(|j| (self.values[j] - sign * self.values[self.grid.mirror_index(j)]).abs())
            .fold(0.0_f64, f64::max);
        worst / scale
    }

    /// Replaces `u(t)` by `(u(t) + u(-t))/2`.
    pub fn symmetrized(&self) -> Profile {
        let values = (0..self.len())
            .map(|j| 0.5 * (self.values[j] + self.values[self.grid.mirror_index(j)]))
            .collect();
        Profile {
            grid: self.grid,
            values,
            parity: Parity::Even,
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Profile> {
        Profile::new(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn scaled(&self, factor: f64) -> Profile {
        Profile {
            grid: self.grid,
            values: self.values.iter().map(|v| factor * v).collect(),
            parity: self.parity,
        }
    }

    /// `self + factor * other`.
    pub fn axpy(&self, factor: f64, other: &Profile) -> Result<Profile> {
        self.grid.ensure_same(&other.grid)?;
        let parity = if self.parity == other.parity {
            self.parity
        } else {
            Parity::None
        };
        Ok(Profile {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + factor * b)
                .collect(),
            parity,
        })
    }

    /// `h Σ u_j v_j`.
    pub fn inner(&self, other: &Profile) -> Result<f64> {
        self.grid.ensure_same(&other.grid)?;
        let sum: f64 = self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum();
        Ok(self.grid.spacing() * sum)
    }

    /// `max_j |u_j - v_j|`.
    pub fn sup_distance(&self, other: &Profile) -> Result<f64> {
        self.grid.ensure_same(&other.grid)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    /// Two-column `t,value` text. The optional header line is `# t,value`.
    pub fn to_csv(&self, header: bool) -> String {
        let mut out = String::with_capacity(self.len() * 48);
        if header {
            out.push_str("# t,value\n");
        }
        for (j, v) in self.values.iter().enumerate() {
            let _ = writeln!(out, "{:.17e},{:.17e}", self.grid.node(j), v);
        }
        out
    }

    /// Parses [`Profile::to_csv`] output; comment lines starting with `#` are skipped.
    pub fn from_csv(grid: GridSpec, text: &str) -> Result<Profile> {
        let mut values = Vec::with_capacity(grid.len());
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut cols = line.split(',');
            let (Some(t), Some(v), None) = (cols.next(), cols.next(), cols.next()) else {
                return Err(Error::Parse(format!("line {}: expected two columns", lineno + 1)));
            };
            let t: f64 = t
                .trim()
                .parse()
                .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
            let expected = grid.node(values.len());
            if (t - expected).abs() > 1e-9 * grid.half_width() {
                return Err(Error::Parse(format!(
                    "line {}: node {t} does not match grid node {expected}",
                    lineno + 1
                )));
            }
            values.push(v);
        }
        Profile::new(grid, values)
    }

    pub fn to_record(&self) -> ProfileRecord {
        ProfileRecord {
            grid: self.grid,
            values: self.values.clone(),
        }
    }

    pub fn from_record(record: ProfileRecord) -> Result<Profile> {
        let grid = GridSpec::new(record.grid.half_width, record.grid.num_points)?;
        Profile::new(grid, record.values)
    }
}

/// JSON form `{grid: {L, N}, values: [...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileRecord {
    pub grid: GridSpec,
    pub values: Vec<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_odd_or_empty_grids() {
        assert!(GridSpec::new(1.0, 7).is_err());
        assert!(GridSpec::new(1.0, 0).is_err());
        assert!(GridSpec::new(-1.0, 8).is_err());
        assert!(GridSpec::new(f64::NAN, 8).is_err());
    }

    #[test]
    fn origin_is_a_node_and_nodes_mirror() {
        let g = GridSpec::new(3.0, 16).unwrap();
        assert_eq!(g.node(g.origin_index()), 0.0);
        for j in 1..g.len() {
            let m = g.mirror_index(j);
            assert!((g.node(j) + g.node(m)).abs() < 1e-14);
        }
        // t_0 = -L is its own mirror under periodic wrap-around.
        assert_eq!(g.mirror_index(0), 0);
    }

    #[test]
    fn frequencies_closed_under_negation_except_nyquist() {
        let g = GridSpec::new(5.0, 32).unwrap();
        let taus: Vec<f64> = (0..g.len()).map(|k| g.frequency(k)).collect();
        let mut unmatched = 0;
        for &t in &taus {
            if !taus.iter().any(|&u| (u + t).abs() < 1e-12) {
                unmatched += 1;
            }
        }
        assert_eq!(unmatched, 1);
        assert!((g.frequency(16) + g.max_frequency()).abs() < 1e-12);
    }

    #[test]
    fn parity_tag_is_checked() {
        let g = GridSpec::new(8.0, 64).unwrap();
        let even = Profile::from_fn(g, |t| (-t * t).exp()).unwrap();
        assert!(even.clone().with_parity(Parity::Even).is_ok());
        assert!(even.clone().with_parity(Parity::Odd).is_err());
        let odd = Profile::from_fn(g, |t| t * (-t * t).exp()).unwrap();
        assert!(odd.with_parity(Parity::Odd).is_ok());
        let shifted = Profile::from_fn(g, |t| (-(t - 0.3) * (t - 0.3)).exp()).unwrap();
        assert!(shifted.with_parity(Parity::Even).is_err());
    }

    #[test]
    fn rejects_non_finite_samples() {
        let g = GridSpec::new(1.0, 4).unwrap();
        assert!(matches!(
            Profile::new(g, vec![0.0, f64::INFINITY, 0.0, 0.0]),
            Err(Error::NonFinite(1))
        ));
    }

    #[test]
    fn csv_and_json_round_trip() {
        let g = GridSpec::new(2.0, 8).unwrap();
        let p = Profile::from_fn(g, |t| 1.0 / t.cosh()).unwrap();
        for header in [false, true] {
            let text = p.to_csv(header);
            assert_eq!(text.starts_with("# t,value"), header);
            assert_eq!(Profile::from_csv(g, &text).unwrap(), p);
        }
        let json = serde_json::to_string(&p.to_record()).unwrap();
        assert!(json.contains("\"L\":2.0") && json.contains("\"N\":8"));
        let back: ProfileRecord = serde_json::from_str(&json).unwrap();
        assert_eq!(Profile::from_record(back).unwrap(), p);
    }

    #[test]
    fn csv_rejects_foreign_grid() {
        let g = GridSpec::new(2.0, 8).unwrap();
        let other = GridSpec::new(3.0, 8).unwrap();
        let text = Profile::zeros(g).to_csv(false);
        assert!(Profile::from_csv(other, &text).is_err());
    }
}
