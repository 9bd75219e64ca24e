use boostfield::kernels::{Geometry, GridSpec};
use boostfield::modes::{ModeSet, SpatialLattice};
use boostfield::periodize::*;
use boostfield::quad::QuadratureSpec;
use boostfield::rp::{gram_reflection, Reflection, Side, SpectralSpec};
use boostfield::testfn::{Half, Profile, TestFunction, TestFunctionFamily};
use boostfield::BoostSpec;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn spec(beta: f64, v: f64) -> CompactSpec {
    CompactSpec::new(beta, None, BoostSpec::along_axis(1.0, 2, v).unwrap()).unwrap()
}

#[test]
fn three_routes_agree_per_mode() {
    for beta in [1.0, 2.0, 5.0] {
        for v in [0.0, 0.6, -0.6, 0.9] {
            let s = spec(beta, v);
            let xis: Vec<f64> = (0..=41).map(|i| beta * (-0.99 + 1.98 * i as f64 / 41.0)).collect();
            let ks: Vec<Vec<f64>> = (-16..=16).map(|i| vec![0.5 * i as f64]).collect();
            let lat = MatsubaraLattice::new(beta, 10_000).unwrap();
            let r = compare_routes(&s, &xis, &ks, 64, &lat, 1e-8).unwrap();
            assert!(r.min_separation >= beta / 100.0 - 1e-12);
            assert!(r.pass, "{r:?}");
            assert!(r.closed_vs_winding <= r.max_tail_bound + 1e-15);
        }
    }
}

#[test]
fn short_circle_winding_error_stays_under_reported_tail() {
    let s = spec(0.5, 0.9);
    let lat = MatsubaraLattice::new(0.5, 10_000).unwrap();
    let ks: Vec<Vec<f64>> = (-8..=8).map(|i| vec![0.5 * i as f64]).collect();
    let r = compare_routes(&s, &[-0.2, 0.1, 0.49], &ks, 64, &lat, 1e-8).unwrap();
    assert!(r.closed_vs_matsubara < 1e-8);
    assert!(r.closed_vs_winding > 1e-8 && r.closed_vs_winding <= r.max_tail_bound);
}

#[test]
fn rho_never_exceeds_bound_on_lattice() {
    for v in [0.0, 0.3, 0.6, 0.9] {
        let s = spec(2.0, v);
        let modes = ModeSet::lattice(&SpatialLattice::cubic(1, 8.0, 40).unwrap());
        let r = rho_report(&modes, &s).unwrap();
        assert!(r.pass, "{r:?}");
    }
}

fn torus_grid(beta: f64, l: f64, xis: &[f64], xs: &[f64], cutoff: f64) -> GridSpec {
    GridSpec {
        geometry: Geometry::FullTorus { beta, lengths: vec![l] },
        time_points: xis.to_vec(),
        space_points: xs.iter().map(|&x| vec![x]).collect(),
        quadrature: QuadratureSpec { cutoff, panel_width: 1.0, order: 16, tolerance: 1e-12 },
        regularized: false,
    }
}

#[test]
fn torus_branches_are_conjugate() {
    let b = BoostSpec::along_axis(1.0, 2, 0.6).unwrap();
    let g = torus_grid(2.0, 6.0, &[-0.7, -0.2, 0.4, 0.9], &[-1.0, 0.0, 0.5, 2.0], 350.0);
    let p = torus_kernel(&g, &b, Side::Plus).unwrap();
    let m = torus_kernel(&g, &b, Side::Minus).unwrap();
    for (a, c) in p.values.iter().zip(&m.values) {
        assert!((a - c.conj()).norm() <= 1e-15 * a.norm().max(1.0));
    }
}

#[test]
fn torus_converges_to_cylinder() {
    let b = BoostSpec::along_axis(1.0, 2, 0.6).unwrap();
    let beta = 2.0;
    let xis = [-0.5, 0.5];
    let xs = [-1.0, 0.0, 1.5];
    let q = QuadratureSpec { cutoff: 150.0, panel_width: 0.5, order: 20, tolerance: 1e-12 };
    let cyl = cylinder_kernel(
        &GridSpec {
            geometry: Geometry::TimeCircle { beta },
            time_points: xis.to_vec(),
            space_points: xs.iter().map(|&x| vec![x]).collect(),
            quadrature: q,
            regularized: false,
        },
        &b,
        CylinderRoute::Closed,
    )
    .unwrap();
    let mut devs = Vec::new();
    for l in [4.0, 8.0, 16.0, 32.0] {
        let t = torus_kernel(&torus_grid(beta, l, &xis, &xs, 150.0), &b, Side::Minus).unwrap();
        let d = t.values.iter().zip(&cyl.values).map(|(a, c)| (a - c).norm()).fold(0.0, f64::max);
        devs.push(d);
    }
    eprintln!("torus deviations {devs:?}");
    assert!(devs.windows(2).all(|w| w[1] < w[0]), "{devs:?}");
}

#[test]
fn small_torus_is_one_oscillator() {
    let b = BoostSpec::along_axis(1.0, 2, 0.3).unwrap();
    let beta = 2.0;
    let l = 0.05;
    let xi = 0.6;
    let g = torus_grid(beta, l, &[xi], &[0.01], 4000.0);
    let t = torus_kernel(&g, &b, Side::Minus).unwrap();
    // k = 0 alone: thermal oscillator at frequency m, volume factor 1/ℓ
    let osc = ((-xi).exp() + (-(beta - xi)).exp()) / (2.0 * (1.0 - (-beta).exp())) / l;
    let rel = (t.values[0] - osc).norm() / osc;
    assert!(rel < 1e-10, "{rel}");
}

#[test]
fn cylinder_routes_agree_when_mode_summed() {
    let b = BoostSpec::along_axis(1.0, 2, -0.6).unwrap();
    let grid = GridSpec {
        geometry: Geometry::TimeCircle { beta: 2.0 },
        time_points: vec![-0.6, 0.3, 1.1],
        space_points: vec![vec![-0.5], vec![0.0], vec![0.8]],
        quadrature: QuadratureSpec::adapted(0.3, 0.6, 1e-10),
        regularized: false,
    };
    let c = cylinder_kernel(&grid, &b, CylinderRoute::Closed).unwrap();
    let w = cylinder_kernel(&grid, &b, CylinderRoute::Winding { n_max: 64 }).unwrap();
    let m = cylinder_kernel(&grid, &b, CylinderRoute::Matsubara { max_index: 2000, accelerated: true }).unwrap();
    for i in 0..c.values.len() {
        assert!((c.values[i] - w.values[i]).norm() < 1e-12);
        assert!((c.values[i] - m.values[i]).norm() < 1e-8);
    }
    // coincident points are rejected without a declared regularization
    let mut bad = grid.clone();
    bad.time_points = vec![0.0];
    assert!(cylinder_kernel(&bad, &b, CylinderRoute::Closed).is_err());
}

#[test]
fn compact_symbol_bounds_on_matsubara_samples() {
    let s = spec(2.0, 0.6);
    let lat = MatsubaraLattice::new(2.0, 1000).unwrap();
    let mut samples = Vec::new();
    for n in (-1000i64..=1000).step_by(7) {
        for k in [-40.0, -6.0, -1.0, 0.0, 0.5, 3.0, 25.0, 300.0] {
            samples.push(s.boost.momentum(lat.energy(n), vec![k]).unwrap());
        }
    }
    let r = verify_compact_bounds(&samples, &s).unwrap();
    assert!(r.violations.is_empty(), "{:?}", &r.violations[..r.violations.len().min(3)]);
    assert!(r.sup_relative_gap < 0.02 && r.pass, "{:?}", r.sup_sequence);
    assert!((r.sinh_eta - 0.75).abs() < 1e-15);
    // off-lattice energies are refused
    let off = vec![s.boost.momentum(1.0, vec![0.0]).unwrap()];
    assert!(verify_compact_bounds(&off, &s).is_err());
}

#[test]
fn compact_gram_is_positive_and_matches_factorized_form() {
    let s = spec(2.0, 0.6);
    let spectral = SpectralSpec::default();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let fam = TestFunctionFamily::random_gaussians_in_window(20, 4, (0.0, 1.0), 1, &mut rng, Some(3)).unwrap();
    let g = gram_reflection_compact(&fam, &s, &spectral, 1e-10).unwrap();
    assert!(g.passed(), "min {} norm {}", g.min_eig, g.norm);
    let c = compact_classical_gram(&fam, &s, &spectral).unwrap();
    let q = compact_quantized_gram(&fam, &s, &spectral).unwrap();
    let scale = c.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let dev = (&c - &q).iter().map(|z| z.norm()).fold(0.0, f64::max) / scale;
    assert!(dev < 1e-9, "{dev}");
    // a family past beta/2 is refused
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let wide = TestFunctionFamily::random_gaussians_in_window(4, 0, (0.0, 1.5), 1, &mut rng, None).unwrap();
    assert!(gram_reflection_compact(&wide, &s, &spectral, 1e-10).is_err());
}

#[test]
fn large_beta_gram_tends_to_flat_gram() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let fam = TestFunctionFamily::random_gaussians(8, 2, Half::PositiveTime, 1, &mut rng, Some(5)).unwrap();
    let b = BoostSpec::along_axis(1.0, 2, 0.6).unwrap();
    let spectral = SpectralSpec::default();
    let flat = gram_reflection(&fam, Reflection::Theta, &b, &spectral, 1e-10).unwrap();
    let flat = nalgebra::DMatrix::from_fn(8, 8, |i, j| flat.matrix[i][j]);
    let scale = flat.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut devs = Vec::new();
    for beta in [20.0, 28.0, 40.0] {
        let s = CompactSpec::new(beta, None, b.clone()).unwrap();
        let c = compact_quantized_gram(&fam, &s, &spectral).unwrap();
        devs.push((&c - &flat).iter().map(|z| z.norm()).fold(0.0, f64::max) / scale);
    }
    assert!(devs.windows(2).all(|w| w[1] < w[0]) && devs[2] < 1e-9, "{devs:?}");
}

#[test]
fn sharp_time_singleton_matches_reflected_kernel() {
    let s = spec(2.0, 0.6);
    let at = 0.4;
    let alpha = Profile::gaussian(0.0, 0.5);
    let f = TestFunction::sharp(at, vec![alpha]);
    let fam = TestFunctionFamily::new(vec![f], Half::PositiveTime, None).unwrap();
    let spectral = SpectralSpec { energy_cutoff: Some(1.0), momentum_cutoff: Some(14.0), ..SpectralSpec::default() };
    let g = compact_quantized_gram(&fam, &s, &spectral).unwrap()[(0, 0)];
    // ⟨α, (θD^c)(s, s) α⟩ from the reflected two-branch kernel, mode by mode
    let q = QuadratureSpec { cutoff: 14.0, panel_width: 1.0, order: 16, tolerance: 1e-12 };
    let modes = ModeSet::continuum(1, &q).unwrap();
    let mut oracle = 0.0;
    for m in 0..modes.len() {
        let k = modes.momentum(m);
        let r = ModeRates::new(k, &s.boost);
        let rp = rho_factor(k, &s, Side::Plus).unwrap();
        let rm = rho_factor(k, &s, Side::Minus).unwrap();
        let kern = ((1.0 + rp) * (-2.0 * at * r.mu_plus).exp() + rm * (2.0 * at * r.mu_minus).exp()) / (2.0 * r.mu);
        oracle += modes.weight(m) * kern * alpha.fourier(k[0]).norm_sqr();
    }
    assert!(g.re >= 0.0 && g.im.abs() < 1e-15);
    assert!((g.re - oracle).abs() < 1e-13 * oracle, "{} vs {}", g.re, oracle);
}
