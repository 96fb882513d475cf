//! The full identity suite, grouped, as one sorted report.

use std::f64::consts::{FRAC_2_PI, PI};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bridge::{
    angular_reduction_check, equation_transport_residual, form_via_hankel, form_via_sinh,
    form_via_symbol, gr_identity_check, lift, smooth_suite, weight_maps,
};
use crate::continuation::{continue_branch, half_laplacian_soliton, local_soliton, ContinuationParams};
use crate::error::{Error, Result};
use crate::functionals::{
    euler_lagrange_residual_h_theta, i_theta_closed, i_theta_quadrature, ilw_quotient,
    katosob_radial_quotient, profile_h, profile_h_theta, random_test_profiles,
    sharp_constant_ilw, sharp_constant_katosob, sharp_constant_sobolev_3d,
};
use crate::grid::{GridSpec, Profile};
use crate::groundstate::{gaussian, petviashvili, SolveParams};
use crate::linearization::{build_linearized, nondegeneracy_check};
use crate::report::IdentityCheck;
use crate::spectral::FourierMultiplier;
use crate::sphere::{
    bs_radial_eigenvalues, conformal_identity_check, funk_hecke_eigenvalue, jacobian,
    jacobian_volume, kernel_transport_check, stereographic, BS_MAX_MODES,
};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckGroup {
    IlwGroundState,
    IlwConstant,
    Sobolev,
    ThreeWay,
    GrIdentity,
    AngularReduction,
    FunkHecke,
    BirmanSchwinger,
    Nondegeneracy,
    KatoSobolev,
    Continuation,
    Conformal,
    KernelTransport,
    WeightMaps,
}

impl CheckGroup {
    pub const ALL: [CheckGroup; 14] = [
        CheckGroup::IlwGroundState,
        CheckGroup::IlwConstant,
        CheckGroup::Sobolev,
        CheckGroup::ThreeWay,
        CheckGroup::GrIdentity,
        CheckGroup::AngularReduction,
        CheckGroup::FunkHecke,
        CheckGroup::BirmanSchwinger,
        CheckGroup::Nondegeneracy,
        CheckGroup::KatoSobolev,
        CheckGroup::Continuation,
        CheckGroup::Conformal,
        CheckGroup::KernelTransport,
        CheckGroup::WeightMaps,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckGroup::IlwGroundState => "ilw-ground-state",
            CheckGroup::IlwConstant => "ilw-constant",
            CheckGroup::Sobolev => "sobolev",
            CheckGroup::ThreeWay => "three-way",
            CheckGroup::GrIdentity => "gr-identity",
            CheckGroup::AngularReduction => "angular-reduction",
            CheckGroup::FunkHecke => "funk-hecke",
            CheckGroup::BirmanSchwinger => "birman-schwinger",
            CheckGroup::Nondegeneracy => "nondegeneracy",
            CheckGroup::KatoSobolev => "kato-sobolev",
            CheckGroup::Continuation => "continuation",
            CheckGroup::Conformal => "conformal",
            CheckGroup::KernelTransport => "kernel-transport",
            CheckGroup::WeightMaps => "weight-maps",
        }
    }

    pub fn anchor(self) -> &'static str {
        match self {
            CheckGroup::IlwGroundState => "ILW ground state is sech",
            CheckGroup::IlwConstant => "sharp ILW inequality and its extremizer",
            CheckGroup::Sobolev => "sharp 3D Sobolev inequality through the radial bridge",
            CheckGroup::ThreeWay => "half-Laplacian form of a radial lift: symbol, sinh kernel, sine transform",
            CheckGroup::GrIdentity => "Fourier transform of the 1/sinh^2 kernel",
            CheckGroup::AngularReduction => "angular reduction of the 3D Coulomb-squared kernel",
            CheckGroup::FunkHecke => "zonal eigenvalues of the chordal kernel on the three-sphere",
            CheckGroup::BirmanSchwinger => "radial Birman-Schwinger spectrum at the sech potential",
            CheckGroup::Nondegeneracy => "kernel of the linearized operator is spanned by Q'",
            CheckGroup::KatoSobolev => "Kato-Sobolev family of sharp inequalities",
            CheckGroup::Continuation => "branch of nondegenerate ground states from s = 1 to s = 1/2",
            CheckGroup::Conformal => "stereographic projection is conformal",
            CheckGroup::KernelTransport => "radial kernel identity carried back to the line",
            CheckGroup::WeightMaps => "norm transfer under the radial bridge",
        }
    }
}

impl fmt::Display for CheckGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CheckGroup {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CheckGroup::ALL
            .into_iter()
            .find(|g| g.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = CheckGroup::ALL.iter().map(|g| g.name()).collect();
                Error::InvalidParameter(format!("unknown check group {s:?}; expected one of {}", names.join(", ")))
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    /// Grid for profile-level checks.
    pub grid: GridSpec,
    /// Grid for dense eigenproblems.
    pub dense_grid: GridSpec,
    /// Box for the algebraically decaying profile `2/(1+t²)`.
    pub large_box: GridSpec,
    pub seed: u64,
    pub taus: Vec<f64>,
    pub lmax: usize,
    pub thetas: Vec<f64>,
    pub random_profiles: usize,
    pub angular_pairs: usize,
    pub conformal_samples: usize,
    pub bs_modes: usize,
    pub continuation_alpha: f64,
    pub continuation_s_to: f64,
    pub continuation_steps: usize,
    /// Groups to run; empty means all.
    pub only: Vec<CheckGroup>,
    pub skip: Vec<CheckGroup>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            grid: GridSpec::standard(),
            dense_grid: GridSpec::spectral(),
            large_box: GridSpec::new(200.0, 2048).expect("valid grid"),
            seed: 20240,
            taus: vec![0.5, 1.0, 2.0, 5.0],
            lmax: 10,
            thetas: vec![PI / 6.0, PI / 4.0, PI / 3.0, PI / 2.0],
            random_profiles: 50,
            angular_pairs: 20,
            conformal_samples: 1000,
            bs_modes: 6,
            continuation_alpha: 1.0,
            continuation_s_to: 0.5,
            continuation_steps: 50,
            only: Vec::new(),
            skip: Vec::new(),
        }
    }
}

impl VerifyConfig {
    pub fn groups(&self) -> Vec<CheckGroup> {
        CheckGroup::ALL
            .into_iter()
            .filter(|g| self.only.is_empty() || self.only.contains(g))
            .filter(|g| !self.skip.contains(g))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.bs_modes == 0 || self.bs_modes > BS_MAX_MODES {
            return Err(Error::InvalidParameter(format!(
                "bs_modes must lie in 1..={BS_MAX_MODES}, got {}",
                self.bs_modes
            )));
        }
        if self.taus.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err(Error::InvalidParameter("tau values must be finite and nonnegative".into()));
        }
        if self.thetas.iter().any(|t| !(*t > 0.0 && *t < PI)) {
            return Err(Error::InvalidParameter("theta values must lie in (0, pi)".into()));
        }
        if self.continuation_steps == 0 {
            return Err(Error::InvalidParameter("continuation_steps must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub schema: u32,
    pub tool_version: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub timestamp: Option<String>,
    pub config: VerifyConfig,
    pub checks: Vec<IdentityCheck>,
    pub pass: bool,
}

impl VerificationReport {
    pub fn failures(&self) -> impl Iterator<Item = &IdentityCheck> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Runs the selected groups in parallel; checks come back sorted by name.
pub fn run_verification(config: &VerifyConfig) -> Result<VerificationReport> {
    config.validate()?;
    let groups = config.groups();
    let per_group: Vec<Vec<IdentityCheck>> = groups
        .par_iter()
        .map(|&g| {
            let checks = run_group(g, config)?;
            Ok(checks.into_iter().map(|c| c.anchored(g.anchor())).collect())
        })
        .collect::<Result<_>>()?;
    let mut checks: Vec<IdentityCheck> = per_group.into_iter().flatten().collect();
    checks.sort_by(|a, b| a.name.cmp(&b.name));
    let pass = checks.iter().all(|c| c.pass);
    Ok(VerificationReport {
        schema: SCHEMA_VERSION,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        timestamp: None,
        config: config.clone(),
        checks,
        pass,
    })
}

pub fn run_group(group: CheckGroup, config: &VerifyConfig) -> Result<Vec<IdentityCheck>> {
    let prefix = group.name();
    let name = |rest: &str| format!("{prefix}/{rest}");
    let grid = config.grid;
    match group {
        CheckGroup::IlwGroundState => {
            let out = petviashvili(
                &FourierMultiplier::ilw(),
                FRAC_2_PI,
                1.0,
                &gaussian(grid, 1.0, 0.0, 1.0),
                &SolveParams::default(),
            )?;
            let sech = Profile::from_fn(grid, profile_h)?;
            Ok(vec![
                IdentityCheck::at_least(name("converged"), out.converged as u8 as f64, 1.0, 0.0),
                IdentityCheck::at_most(name("distance to sech"), out.profile.sup_distance(&sech)?, 1e-6, 0.0),
                IdentityCheck::at_most(name("residual"), out.residual_sup, 1e-10, 0.0),
            ])
        }
        CheckGroup::IlwConstant => {
            let h = Profile::from_fn(grid, profile_h)?;
            let c = sharp_constant_ilw();
            let min = random_test_profiles(grid, config.random_profiles, config.seed)
                .iter()
                .map(ilw_quotient)
                .collect::<Result<Vec<f64>>>()?
                .into_iter()
                .fold(f64::INFINITY, f64::min);
            Ok(vec![
                IdentityCheck::absolute(name("quotient at sech"), ilw_quotient(&h)?, c, 1e-6),
                IdentityCheck::at_least(name("minimum over random profiles"), min, c, 1e-6),
            ])
        }
        CheckGroup::Sobolev => {
            let h = Profile::from_fn(grid, profile_h)?;
            let form = form_via_hankel(&h)?.value;
            let cube = weight_maps(&h)?.cube_norm;
            Ok(vec![
                IdentityCheck::new(name("form of lift(h) equals 2 pi^2"), form_via_symbol(&h)?, 2.0 * PI * PI, 1e-6),
                IdentityCheck::new(
                    name("quotient at lift(h)"),
                    form / cube.powf(2.0 / 3.0),
                    sharp_constant_sobolev_3d(),
                    1e-5,
                ),
            ])
        }
        CheckGroup::ThreeWay => {
            let suite = smooth_suite(grid)?;
            let rows: Vec<Vec<IdentityCheck>> = suite
                .par_iter()
                .map(|(label, phi)| {
                    let symbol = form_via_symbol(phi)?;
                    Ok(vec![
                        IdentityCheck::new(name(&format!("{label}/sinh vs symbol")), form_via_sinh(phi)?.value, symbol, 1e-5),
                        IdentityCheck::new(
                            name(&format!("{label}/sine transform vs symbol")),
                            form_via_hankel(phi)?.value,
                            symbol,
                            1e-5,
                        ),
                    ])
                })
                .collect::<Result<_>>()?;
            Ok(rows.into_iter().flatten().collect())
        }
        CheckGroup::GrIdentity => config
            .taus
            .iter()
            .map(|&tau| {
                let (q, c) = gr_identity_check(tau)?;
                Ok(IdentityCheck::absolute(name(&format!("tau={tau}")), q, c, 1e-8))
            })
            .collect(),
        CheckGroup::AngularReduction => {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            let mut pairs = Vec::with_capacity(config.angular_pairs);
            while pairs.len() < config.angular_pairs {
                let r: f64 = rng.gen_range(0.1..5.0);
                let s: f64 = rng.gen_range(0.1..5.0);
                if (r - s).abs() >= 0.05 {
                    pairs.push((r, s));
                }
            }
            pairs
                .iter()
                .enumerate()
                .map(|(i, &(r, s))| {
                    let (q, c) = angular_reduction_check(r, s)?;
                    Ok(IdentityCheck::new(name(&format!("pair {i:02}")), q, c, 1e-10))
                })
                .collect()
        }
        CheckGroup::FunkHecke => (0..=config.lmax)
            .map(|l| {
                Ok(IdentityCheck::absolute(
                    name(&format!("l={l:02}")),
                    funk_hecke_eigenvalue(l)?,
                    1.0 / (l + 1) as f64,
                    1e-12,
                ))
            })
            .collect(),
        CheckGroup::BirmanSchwinger => {
            let eig = bs_radial_eigenvalues(config.dense_grid, config.bs_modes)?;
            let mut checks = Vec::new();
            for e in eig {
                let l = e.l;
                checks.push(IdentityCheck::absolute(name(&format!("l={l:02}/eigenvalue")), e.eigenvalue, e.target, 1e-3));
                let expected = if l % 2 == 0 { 1.0 } else { -1.0 };
                checks.push(IdentityCheck::absolute(name(&format!("l={l:02}/parity")), e.parity as f64, expected, 0.0));
            }
            Ok(checks)
        }
        CheckGroup::Nondegeneracy => {
            let dense = config.dense_grid;
            let sech = Profile::from_fn(dense, profile_h)?;
            let kdv = local_soliton(dense, 1.0)?;
            let lorentz = half_laplacian_soliton(config.large_box);
            let cases = [
                ("a ILW", FourierMultiplier::ilw(), FRAC_2_PI, sech),
                ("b s=1", FourierMultiplier::fractional_laplacian(1.0)?, 1.0, kdv),
                ("c s=1/2", FourierMultiplier::fractional_laplacian(0.5)?, 1.0, lorentz),
            ];
            let rows: Vec<Vec<IdentityCheck>> = cases
                .par_iter()
                .map(|(label, m, mu, q)| {
                    let d = build_linearized(m, *mu, 2.0, q, 1.0)?;
                    let nd = nondegeneracy_check(&d, q, None)?;
                    Ok(vec![
                        IdentityCheck::absolute(name(&format!("{label}/zero modes")), nd.zero_count as f64, 1.0, 0.0),
                        IdentityCheck::at_least(name(&format!("{label}/overlap with Q'")), nd.overlap, 0.999, 0.0),
                        IdentityCheck::at_least(name(&format!("{label}/gap factor")), nd.gap / nd.zero_tol, 10.0, 0.0),
                    ])
                })
                .collect::<Result<_>>()?;
            Ok(rows.into_iter().flatten().collect())
        }
        CheckGroup::KatoSobolev => {
            let rows: Vec<Vec<IdentityCheck>> = config
                .thetas
                .par_iter()
                .map(|&theta| {
                    let tag = format!("theta={theta:.6}");
                    let h_theta = Profile::from_fn(grid, |t| profile_h_theta(theta, t))?;
                    let closed = i_theta_closed(theta)?;
                    let quad = i_theta_quadrature(theta)?.value;
                    Ok(vec![
                        IdentityCheck::at_most(
                            name(&format!("{tag}/euler-lagrange residual")),
                            euler_lagrange_residual_h_theta(theta, grid)?,
                            1e-7,
                            0.0,
                        ),
                        IdentityCheck::absolute(
                            name(&format!("{tag}/quotient at h_theta")),
                            katosob_radial_quotient(theta, &h_theta)?,
                            sharp_constant_katosob(theta)?,
                            1e-6,
                        ),
                        IdentityCheck::new(name(&format!("{tag}/I_theta closed vs quadrature")), quad, closed, 1e-9),
                    ])
                })
                .collect::<Result<_>>()?;
            Ok(rows.into_iter().flatten().collect())
        }
        CheckGroup::Continuation => {
            let params = ContinuationParams {
                large_box: config.large_box,
                ..ContinuationParams::default()
            };
            let (alpha, s_to, steps) = (config.continuation_alpha, config.continuation_s_to, config.continuation_steps);
            let (coarse, fine) = rayon::join(
                || continue_branch(alpha, s_to, steps, &params),
                || continue_branch(alpha, s_to, 2 * steps, &params),
            );
            let (coarse, fine) = (coarse?, fine?);
            let mut checks = vec![
                IdentityCheck::absolute(name("branch complete"), coarse.complete as u8 as f64, 1.0, 0.0),
                IdentityCheck::at_most(
                    name("max residual"),
                    coarse.points.iter().map(|p| p.residual_sup).fold(0.0, f64::max),
                    1e-8,
                    0.0,
                ),
                IdentityCheck::at_least(
                    name("min even gap"),
                    coarse.points.iter().map(|p| p.even_gap).fold(f64::INFINITY, f64::min),
                    params.newton.gap_floor,
                    0.0,
                ),
            ];
            match (coarse.endpoint(), fine.endpoint()) {
                (Some(a), Some(b)) if coarse.complete && fine.complete => {
                    if alpha == 1.0 && s_to == 0.5 {
                        let target = half_laplacian_soliton(*a.profile.grid());
                        checks.push(IdentityCheck::at_most(
                            name("endpoint vs 2/(1+t^2)"),
                            a.profile.sup_distance(&target)?,
                            1e-3,
                            0.0,
                        ));
                    }
                    checks.push(IdentityCheck::at_most(
                        name("endpoint shift under step doubling"),
                        a.profile.sup_distance(&b.profile)?,
                        1e-4,
                        0.0,
                    ));
                }
                _ => checks.push(IdentityCheck::at_most(name("endpoint shift under step doubling"), f64::NAN, 1e-4, 0.0)),
            }
            Ok(checks)
        }
        CheckGroup::Conformal => {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            let mut sample = || {
                let scale = 10f64.powf(rng.gen_range(-2.0..2.0));
                [0; 3].map(|_: i32| scale * rng.gen_range(-1.0..1.0))
            };
            let (mut chord, mut norm, mut inverse, mut jac) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
            for _ in 0..config.conformal_samples {
                let (x, y) = (sample(), sample());
                let (l, r) = conformal_identity_check(x, y)?;
                chord = chord.max((l - r).abs() / r);
                let w = stereographic(x).coords();
                norm = norm.max((w.iter().map(|c| c * c).sum::<f64>() - 1.0).abs());
                // both forms of the inverse, each used where it avoids cancellation
                let w_sq: f64 = w[..3].iter().map(|c| c * c).sum();
                let factor = if w[3] >= 0.0 { 1.0 / (1.0 + w[3]) } else { (1.0 - w[3]) / w_sq };
                let x_norm = x.iter().map(|c| c * c).sum::<f64>().sqrt();
                let back_err = w[..3].iter().zip(&x).map(|(b, c)| (factor * b - c).powi(2)).sum::<f64>().sqrt();
                inverse = inverse.max(back_err / x_norm);
                // |ω₁₂₃| / |x| = 2/(1+|x|²)
                jac = jac.max((jacobian(x) / (w_sq.sqrt() / x_norm).powi(3) - 1.0).abs());
            }
            Ok(vec![
                IdentityCheck::at_most(name("chord identity, max relative gap"), chord, 1e-12, 0.0),
                IdentityCheck::at_most(name("image on unit sphere, max gap"), norm, 1e-12, 0.0),
                IdentityCheck::at_most(name("inverse projection, max relative gap"), inverse, 1e-12, 0.0),
                IdentityCheck::at_most(name("jacobian vs cubed conformal factor, max relative gap"), jac, 1e-12, 0.0),
                IdentityCheck::new(name("pulled-back sphere volume"), jacobian_volume()?, 2.0 * PI * PI, 1e-12),
            ])
        }
        CheckGroup::KernelTransport => {
            let k = kernel_transport_check(grid, 0.05, 20.0, 400)?;
            Ok(vec![IdentityCheck::at_most(name("max relative error"), k.max_rel_error, 1e-10, 0.0)])
        }
        CheckGroup::WeightMaps => {
            let h = Profile::from_fn(grid, profile_h)?;
            let maps = weight_maps(&h)?;
            let mut checks: Vec<IdentityCheck> = maps
                .checks
                .iter()
                .map(|c| IdentityCheck { name: name(&c.name), ..c.clone() })
                .collect();
            let psi = lift(&h);
            checks.push(IdentityCheck::new(name("lift(h) at r = 1"), psi.psi(1.0), 1.0, 1e-12));
            checks.push(IdentityCheck::absolute(
                name("equation transport (T + 2/pi)h - h^2"),
                equation_transport_residual(grid)?,
                0.0,
                1e-8,
            ));
            Ok(checks)
        }
    }
}
