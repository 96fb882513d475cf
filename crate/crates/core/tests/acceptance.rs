//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::f64::consts::{FRAC_2_PI, PI};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nlgs_core::bridge::{
    angular_reduction_check, form_via_hankel, form_via_sinh, form_via_symbol, gr_identity_check, lift,
    smooth_suite,
};
use nlgs_core::continuation::{continue_branch, half_laplacian_soliton, local_soliton, ContinuationParams};
use nlgs_core::functionals::{
    euler_lagrange_residual_h_theta, i_theta_closed, i_theta_quadrature, ilw_quotient,
    katosob_radial_quotient, profile_h, profile_h_theta, random_test_profiles, sharp_constant_katosob,
};
use nlgs_core::grid::{GridSpec, Profile};
use nlgs_core::groundstate::{gaussian, petviashvili, SolveParams};
use nlgs_core::linearization::{build_linearized, nondegeneracy_check, CheckStatus};
use nlgs_core::spectral::{lp_norm, FourierMultiplier};
use nlgs_core::sphere::{
    bs_radial_eigenvalues, conformal_identity_check, funk_hecke_eigenvalue, jacobian, jacobian_volume,
    kernel_transport_check, stereographic,
};

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: String) -> Outcome {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn sech(t: f64) -> f64 {
    1.0 / t.cosh()
}

fn c1_ilw_ground_state() -> Outcome {
    let grid = GridSpec::standard();
    let start = Instant::now();
    let out = petviashvili(
        &FourierMultiplier::ilw(),
        FRAC_2_PI,
        1.0,
        &gaussian(grid, 1.0, 0.0, 1.0),
        &SolveParams::default(),
    )
    .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed().as_secs_f64();
    let target = Profile::from_fn(grid, sech).unwrap();
    let dist = out.profile.sup_distance(&target).unwrap();
    ensure(
        out.converged && dist <= 1e-6 && out.residual_sup <= 1e-10 && elapsed <= 10.0,
        format!("distance {dist:.2e}, residual {:.2e}, {elapsed:.2}s", out.residual_sup),
    )
}

fn c2_sharp_ilw_constant() -> Outcome {
    let grid = GridSpec::standard();
    let c = (PI / 2.0).cbrt();
    let at_h = ilw_quotient(&Profile::from_fn(grid, sech).unwrap()).map_err(|e| e.to_string())?;
    let mut min = f64::INFINITY;
    for u in random_test_profiles(grid, 50, 7) {
        min = min.min(ilw_quotient(&u).map_err(|e| e.to_string())?);
    }
    ensure(
        (at_h - c).abs() <= 1e-6 && min >= c - 1e-6,
        format!("quotient(h) - C = {:.2e}, min over 50 profiles - C = {:.3e}", at_h - c, min - c),
    )
}

fn c3_sobolev_transport() -> Outcome {
    let h = Profile::from_fn(GridSpec::standard(), sech).unwrap();
    let form = form_via_hankel(&h).map_err(|e| e.to_string())?.value;
    // ‖lift(h)‖₃³ = 4π‖h‖₃³ by the substitution r = e^t
    let cube = 4.0 * PI * lp_norm(&h, 3.0).unwrap().powi(3);
    let ratio = form / cube.powf(2.0 / 3.0);
    let target = 2f64.cbrt() * PI.powf(2.0 / 3.0);
    let rel = (ratio - target).abs() / target;
    ensure(rel <= 1e-5, format!("ratio {ratio:.9}, relative gap {rel:.2e}"))
}

fn c4_three_way() -> Outcome {
    let mut worst: f64 = 0.0;
    for (name, phi) in smooth_suite(GridSpec::standard()).unwrap() {
        let a = form_via_symbol(&phi).map_err(|e| format!("{name}: {e}"))?;
        let b = form_via_sinh(&phi).map_err(|e| format!("{name}: {e}"))?.value;
        let c = form_via_hankel(&phi).map_err(|e| format!("{name}: {e}"))?.value;
        for (x, y) in [(a, b), (a, c), (b, c)] {
            worst = worst.max((x - y).abs() / x.abs());
        }
    }
    ensure(worst <= 1e-5, format!("10 profiles, worst pairwise relative gap {worst:.2e}"))
}

fn c5_gr_identity() -> Outcome {
    let mut worst: f64 = 0.0;
    for tau in [0.5, 1.0, 2.0, 5.0] {
        let (q, _) = gr_identity_check(tau).map_err(|e| e.to_string())?;
        let x = PI * tau / 2.0;
        worst = worst.max((q - (x / x.tanh() - 1.0)).abs());
    }
    ensure(worst <= 1e-8, format!("worst absolute gap {worst:.2e}"))
}

fn c6_angular_reduction() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    let mut n = 0;
    while n < 20 {
        let (r, s): (f64, f64) = (rng.gen_range(0.1..4.0), rng.gen_range(0.1..4.0));
        if (r - s).abs() < 0.05 {
            continue;
        }
        let (q, _) = angular_reduction_check(r, s).map_err(|e| e.to_string())?;
        let closed = 4.0 * PI / (r * r - s * s).powi(2);
        worst = worst.max((q - closed).abs() / closed);
        n += 1;
    }
    ensure(worst <= 1e-10, format!("20 pairs, worst relative gap {worst:.2e}"))
}

fn c7_funk_hecke() -> Outcome {
    let mut worst: f64 = 0.0;
    for l in 0..=10 {
        let v = funk_hecke_eigenvalue(l).map_err(|e| e.to_string())?;
        worst = worst.max((v - 1.0 / (l + 1) as f64).abs());
    }
    ensure(worst <= 1e-12, format!("l = 0..10, worst gap {worst:.2e}"))
}

fn c8_birman_schwinger() -> Outcome {
    let eig = bs_radial_eigenvalues(GridSpec::spectral(), 6).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    let mut parities_ok = eig.len() == 6;
    for (l, e) in eig.iter().enumerate() {
        worst = worst.max((e.eigenvalue - 1.0 / (l + 1) as f64).abs());
        parities_ok &= e.parity == if l % 2 == 0 { 1 } else { -1 };
    }
    ensure(
        worst <= 1e-3 && parities_ok,
        format!("top 6 worst gap {worst:.2e}, parities (-1)^l: {parities_ok}"),
    )
}

fn c9_nondegeneracy() -> Outcome {
    let dense = GridSpec::spectral();
    let large = GridSpec::new(200.0, 2048).unwrap();
    let cases = [
        (
            "ILW",
            FourierMultiplier::ilw(),
            FRAC_2_PI,
            Profile::from_fn(dense, sech).unwrap(),
        ),
        (
            "s=1",
            FourierMultiplier::fractional_laplacian(1.0).unwrap(),
            1.0,
            local_soliton(dense, 1.0).map_err(|e| e.to_string())?,
        ),
        (
            "s=1/2",
            FourierMultiplier::fractional_laplacian(0.5).unwrap(),
            1.0,
            Profile::from_fn(large, |t| 2.0 / (1.0 + t * t)).unwrap(),
        ),
    ];
    let mut parts = Vec::new();
    let mut ok = true;
    for (label, m, mu, q) in cases {
        let d = build_linearized(&m, mu, 2.0, &q, 1.0).map_err(|e| e.to_string())?;
        let nd = nondegeneracy_check(&d, &q, None).map_err(|e| e.to_string())?;
        let factor = nd.gap / nd.zero_tol;
        ok &= nd.status == CheckStatus::Pass && nd.zero_count == 1 && nd.overlap >= 0.999 && factor >= 10.0;
        parts.push(format!("{label}: {} zero, overlap {:.6}, gap x{factor:.1e}", nd.zero_count, nd.overlap));
    }
    ensure(ok, parts.join("; "))
}

fn c10_kato_sobolev() -> Outcome {
    let grid = GridSpec::standard();
    let mut worst = [0.0f64; 3];
    for theta in [PI / 6.0, PI / 4.0, PI / 3.0, PI / 2.0] {
        let e = |e: nlgs_core::error::Error| e.to_string();
        let el = euler_lagrange_residual_h_theta(theta, grid).map_err(e)?;
        let h = Profile::from_fn(grid, |t| profile_h_theta(theta, t)).unwrap();
        let q = katosob_radial_quotient(theta, &h).map_err(e)?;
        let c = sharp_constant_katosob(theta).map_err(e)?;
        let closed = i_theta_closed(theta).map_err(e)?;
        let quad = i_theta_quadrature(theta).map_err(e)?.value;
        worst[0] = worst[0].max(el);
        worst[1] = worst[1].max((q - c).abs());
        worst[2] = worst[2].max((closed - quad).abs() / closed);
    }
    ensure(
        worst[0] <= 1e-7 && worst[1] <= 1e-6 && worst[2] <= 1e-9,
        format!(
            "residual {:.2e}, quotient gap {:.2e}, I_theta relative gap {:.2e}",
            worst[0], worst[1], worst[2]
        ),
    )
}

fn c11_continuation() -> Outcome {
    let params = ContinuationParams::default();
    let (coarse, fine) = std::thread::scope(|s| {
        let a = s.spawn(|| continue_branch(1.0, 0.5, 50, &params));
        let b = s.spawn(|| continue_branch(1.0, 0.5, 100, &params));
        (a.join().unwrap(), b.join().unwrap())
    });
    let (coarse, fine) = (coarse.map_err(|e| e.to_string())?, fine.map_err(|e| e.to_string())?);
    if !(coarse.complete && fine.complete) {
        return Err(format!("branch stopped: {:?} / {:?}", coarse.diagnostic, fine.diagnostic));
    }
    let end = coarse.endpoint().unwrap();
    let dist = end.profile.sup_distance(&half_laplacian_soliton(*end.profile.grid())).unwrap();
    let max_res = coarse.points.iter().map(|p| p.residual_sup).fold(0.0, f64::max);
    let min_gap = coarse.points.iter().map(|p| p.even_gap).fold(f64::INFINITY, f64::min);
    let shift = end.profile.sup_distance(&fine.endpoint().unwrap().profile).unwrap();
    ensure(
        dist <= 1e-3 && max_res <= 1e-8 && min_gap > 0.0 && shift <= 1e-4,
        format!("endpoint {dist:.2e}, max residual {max_res:.2e}, min even gap {min_gap:.2e}, doubling shift {shift:.2e}"),
    )
}

fn c12_conformal() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut sample = || {
        let scale = 10f64.powf(rng.gen_range(-2.0..2.0));
        [0; 3].map(|_: i32| scale * rng.gen_range(-1.0..1.0))
    };
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let (x, y) = (sample(), sample());
        let w = stereographic(x).coords();
        let norm_sq: f64 = x.iter().map(|c| c * c).sum();
        let expected = [
            2.0 * x[0] / (1.0 + norm_sq),
            2.0 * x[1] / (1.0 + norm_sq),
            2.0 * x[2] / (1.0 + norm_sq),
            (1.0 - norm_sq) / (1.0 + norm_sq),
        ];
        for (a, b) in w.iter().zip(&expected) {
            worst = worst.max((a - b).abs());
        }
        let j = (2.0 / (1.0 + norm_sq)).powi(3);
        worst = worst.max((jacobian(x) - j).abs() / j);
        let (l, r) = conformal_identity_check(x, y).map_err(|e| e.to_string())?;
        worst = worst.max((l - r).abs() / r);
    }
    let vol = jacobian_volume().map_err(|e| e.to_string())?;
    worst = worst.max((vol - 2.0 * PI * PI).abs() / (2.0 * PI * PI));
    let kt = kernel_transport_check(GridSpec::standard(), 0.05, 20.0, 400).map_err(|e| e.to_string())?;
    // the lift is exact at a node: ψ(1) = h(0)
    let psi_one = lift(&Profile::from_fn(GridSpec::standard(), profile_h).unwrap()).psi(1.0);
    ensure(
        worst <= 1e-12 && kt.max_rel_error <= 1e-10 && (psi_one - 1.0).abs() <= 1e-14,
        format!("sweep worst {worst:.2e}, kernel transport {:.2e}", kt.max_rel_error),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("ILW ground state", c1_ilw_ground_state),
        ("sharp ILW constant", c2_sharp_ilw_constant),
        ("Sobolev transport", c3_sobolev_transport),
        ("three-way form agreement", c4_three_way),
        ("sinh-kernel Fourier identity", c5_gr_identity),
        ("angular reduction", c6_angular_reduction),
        ("Funk-Hecke eigenvalues", c7_funk_hecke),
        ("radial Birman-Schwinger", c8_birman_schwinger),
        ("non-degeneracy", c9_nondegeneracy),
        ("Kato-Sobolev family", c10_kato_sobolev),
        ("continuation", c11_continuation),
        ("conformal and kernel transport", c12_conformal),
    ];
    let start = Instant::now();
    let results: Vec<(Outcome, f64)> = std::thread::scope(|s| {
        let handles: Vec<_> = criteria
            .iter()
            .map(|(_, f)| {
                s.spawn(move || {
                    let t = Instant::now();
                    let r = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
                    (r, t.elapsed().as_secs_f64())
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let mut failed = 0;
    for (i, ((name, _), (r, secs))) in criteria.iter().zip(&results).enumerate() {
        let (tag, msg) = match r {
            Ok(m) => ("PASS", m),
            Err(m) => {
                failed += 1;
                ("FAIL", m)
            }
        };
        println!("criterion {:>2} {tag} {name}: {msg} ({secs:.1}s)", i + 1);
    }
    println!(
        "acceptance: {} of 12 criteria pass in {:.1}s",
        12 - failed,
        start.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
