use std::sync::Arc;

use boostfield::gaussian::*;
use boostfield::modes::ModeSet;
use boostfield::periodize::{compact_classical_gram, CompactSpec};
use boostfield::quad::QuadratureSpec;
use boostfield::rp::{Side, SpectralSpec};
use boostfield::testfn::{Half, Profile, TestFunction, TestFunctionFamily};
use boostfield::thermal::{thermal_quantize, ModularData};
use boostfield::BoostSpec;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn real_family(rng: &mut ChaCha8Rng, n: usize) -> TestFunctionFamily {
    let members = (0..n)
        .map(|_| {
            TestFunction::product(
                Profile::gaussian(rng.random_range(5.5..6.5), rng.random_range(0.3..0.6)),
                vec![Profile::gaussian(rng.random_range(-1.0..1.0), rng.random_range(0.4..0.8))],
            )
        })
        .collect();
    TestFunctionFamily::new(members, Half::PositiveTime, None).unwrap()
}

fn flat_table(seed: u64, n: usize, v: f64) -> CovarianceTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fam = TestFunctionFamily::random_gaussians(n, 1, Half::PositiveTime, 1, &mut rng, Some(seed)).unwrap();
    CovarianceTable::flat(&fam, &BoostSpec::along_axis(1.0, 2, v).unwrap(), &SpectralSpec::default()).unwrap()
}

#[test]
fn diagonal_moments_follow_the_recursion_law() {
    let t = flat_table(1, 4, 0.6);
    for i in 0..t.len() {
        let s2 = t.get(i, i);
        for mode in [PairingMode::PairingSum, PairingMode::Recursion] {
            let s4 = wick_moment(&MomentRequest::power(i, 4, mode), &t).unwrap();
            let s6 = wick_moment(&MomentRequest::power(i, 6, mode), &t).unwrap();
            assert!((s4 - 3.0 * s2 * s2).norm() <= 1e-12 * (3.0 * s2 * s2).norm());
            assert!((s6 - 15.0 * s2 * s2 * s2).norm() <= 1e-12 * (15.0 * s2 * s2 * s2).norm());
        }
    }
}

#[test]
fn pairing_sum_matches_polarized_recursion_up_to_eight_fields() {
    let t = flat_table(2, 5, -0.6);
    let max = t.matrix().iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for n in [2usize, 4, 6, 8] {
        for _ in 0..20 {
            let f: Vec<usize> = (0..n).map(|_| rng.random_range(0..t.len())).collect();
            let a = wick_moment(&MomentRequest::new(f.clone(), PairingMode::PairingSum), &t).unwrap();
            let b = wick_moment(&MomentRequest::new(f.clone(), PairingMode::Recursion), &t).unwrap();
            let scale = double_factorial(n as i64 - 1) * max.powi(n as i32 / 2);
            assert!((a - b).norm() <= 1e-12 * scale, "{f:?}: {a} {b}");
        }
    }
}

#[test]
fn six_point_mixed_has_fifteen_pairings() {
    let ones = CovarianceTable::from_matrix(nalgebra::DMatrix::from_element(6, 6, Complex64::new(1.0, 0.0))).unwrap();
    let r = wick_moment(&MomentRequest::new((0..6).collect(), PairingMode::PairingSum), &ones).unwrap();
    assert_eq!(r, Complex64::new(15.0, 0.0));
}

#[test]
fn moments_are_permutation_symmetric() {
    let t = flat_table(3, 4, 0.3);
    let base = wick_moment(&MomentRequest::new(vec![0, 1, 2, 3, 1, 0], PairingMode::PairingSum), &t).unwrap();
    for perm in [vec![3, 1, 0, 2, 1, 0], vec![1, 1, 0, 0, 3, 2], vec![0, 0, 1, 1, 2, 3]] {
        let p = wick_moment(&MomentRequest::new(perm, PairingMode::PairingSum), &t).unwrap();
        assert!((p - base).norm() <= 1e-15 * base.norm().max(1.0) * 8.0);
    }
}

#[test]
fn opposite_velocities_give_conjugate_moments_on_real_functions() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let fam = real_family(&mut rng, 3);
    let spectral = SpectralSpec::default();
    let p = CovarianceTable::flat(&fam, &BoostSpec::along_axis(1.0, 2, 0.6).unwrap(), &spectral).unwrap();
    let m = CovarianceTable::flat(&fam, &BoostSpec::along_axis(1.0, 2, -0.6).unwrap(), &spectral).unwrap();
    let req = MomentRequest::new(vec![0, 1, 2, 2], PairingMode::PairingSum);
    let a = wick_moment(&req, &p).unwrap();
    let b = wick_moment(&req, &m).unwrap();
    assert!(a.im.abs() > 1e-6);
    assert!((a - b.conj()).norm() < 1e-13 * a.norm());
}

#[test]
fn double_factorial_law_two_ways() {
    for v in [0.0, 0.6] {
        let b = BoostSpec::along_axis(1.0, 2, v).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let fam = TestFunctionFamily::random_gaussians(6, 2, Half::PositiveTime, 1, &mut rng, Some(5)).unwrap();
        let fine = SpectralSpec { panel_width: 0.5, order: 20, ..SpectralSpec::default() };
        for n in 0..=4 {
            for r in quantized_norm_check(&fam, n, &b, &fine, 1e-10).unwrap() {
                assert!(r.pass, "{r:?}");
            }
        }
    }
}

#[test]
fn thermal_double_factorial_law_uses_the_doubled_norm() {
    let spec = CompactSpec::new(2.0, None, BoostSpec::along_axis(1.0, 2, 0.6).unwrap()).unwrap();
    let spectral = SpectralSpec { momentum_cutoff: Some(12.0), ..SpectralSpec::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let fam = TestFunctionFamily::random_gaussians_in_window(4, 1, (0.0, 1.0), 1, &mut rng, Some(6)).unwrap();
    let classical = compact_classical_gram(&fam, &spec, &spectral).unwrap();
    let q = QuadratureSpec { cutoff: 12.0, panel_width: 1.0, order: 16, tolerance: 1e-12 };
    let d = ModularData::new(Arc::new(ModeSet::continuum(1, &q).unwrap()), &spec, Side::Plus).unwrap();
    for (i, f) in fam.members().iter().enumerate() {
        let hat = thermal_quantize(f, &d).unwrap();
        let norm = hat.norm_sqr(1.0).unwrap();
        let cov = CovarianceTable::from_matrix(nalgebra::DMatrix::from_element(1, 1, classical[(i, i)])).unwrap();
        for n in 1..=4 {
            let moment = wick_moment(&MomentRequest::power(0, 2 * n, PairingMode::PairingSum), &cov).unwrap();
            let formula = quantized_norm(norm, n);
            assert!((moment - formula).norm() <= 1e-8 * formula, "{n}: {moment} {formula}");
        }
    }
}

#[test]
fn field_vector_bound_on_random_functions() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for v in [0.0, 0.6, -0.9] {
        let b = BoostSpec::along_axis(1.0, 2, v).unwrap();
        let grid = spacetime_grid(&b, 8, 0.75).unwrap();
        for _ in 0..100 {
            let c: Vec<Complex64> = grid
                .iter()
                .map(|p| {
                    let env = (-0.05 * (p.energy.powi(2) + p.kvec[0].powi(2))).exp();
                    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * env
                })
                .collect();
            let r = field_vector_bound(&c, &grid, &b).unwrap();
            assert!(r.pass, "{r:?}");
            if v == 0.0 {
                assert!((r.ratio - 1.0).abs() < 1e-14);
            }
        }
    }
    assert!((BoostSpec::along_axis(1.0, 2, 0.6).unwrap().cosh_eta().powi(5) - 1.25f64.powi(5)).abs() < 1e-14);
}

#[test]
fn field_vector_ratio_grows_with_speed_at_low_energy() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let b0 = BoostSpec::along_axis(1.0, 2, 0.0).unwrap();
    let grid = spacetime_grid(&b0, 10, 0.5).unwrap();
    // |E| ≤ m keeps each mode's ratio increasing in |v|
    let c: Vec<Complex64> = grid
        .iter()
        .map(|p| if p.energy.abs() <= 1.0 { Complex64::new(rng.random_range(0.1..1.0), 0.0) } else { Complex64::new(0.0, 0.0) })
        .collect();
    let mut last = 0.0;
    for v in [0.0, 0.2, 0.4, 0.6, 0.8, 0.95] {
        let b = BoostSpec::along_axis(1.0, 2, v).unwrap();
        let moved: Vec<_> = grid.iter().map(|p| b.momentum(p.energy, p.kvec.clone()).unwrap()).collect();
        let r = field_vector_bound(&c, &moved, &b).unwrap();
        assert!(r.pass && r.ratio >= last, "{v}: {}", r.ratio);
        last = r.ratio;
    }
}
