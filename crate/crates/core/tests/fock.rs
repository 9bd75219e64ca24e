use std::f64::consts::PI;

use boostfield::fock::*;
use boostfield::rp::SpectralSpec;
use boostfield::testfn::{Profile, TestFunction};
use boostfield::{BoostSpec, Error};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn quartic(k: usize, n: usize, vectors: bool) -> FockOperatorSet {
    let t = FockTruncation::new(2.0 * PI, k, n, 1.0).unwrap().with_cap(30_000);
    build_operators(&t, &PolySpec::quartic(0.1).unwrap(), vectors).unwrap()
}

#[test]
fn quartic_spectrum_condition_at_default_truncation() {
    let ops = quartic(3, 6, false);
    assert_eq!(ops.checks.dimension, 1716);
    assert_eq!(ops.checks.cross_sector_entries, 0);
    assert!(ops.checks.hermiticity_error < 1e-14);
    assert!(ops.ground_energy < 0.0);
    let r = spectrum_condition(&ops, &[0.0, 0.3, -0.3, 0.6, -0.6], 1e-8).unwrap();
    assert!(r.pass, "{r:?}");
    for s in &r.velocities {
        assert_eq!(s.min_sector_momentum, 0.0);
        assert!(s.min_eigenvalue.abs() < 1e-12);
        assert!(s.gap > 0.0);
    }
}

#[test]
fn sectors_related_by_parity_have_equal_spectra() {
    let ops = quartic(2, 4, false);
    for s in &ops.sectors {
        let m = ops.sectors.iter().find(|o| o.label == -s.label).unwrap();
        for (a, b) in s.eigenvalues.iter().zip(&m.eigenvalues) {
            assert!((a - b).abs() < 1e-11);
        }
    }
}

#[test]
fn refinement_moves_ground_energy_down() {
    // H is shifted so its minimum is exactly 0; the unshifted minimum
    // decreases as the truncation grows
    let coarse = quartic(3, 6, false);
    let fine = quartic(4, 8, false);
    assert_eq!(fine.checks.dimension, 24310);
    assert!(fine.ground_energy <= coarse.ground_energy);
    let r = spectrum_condition(&fine, &[0.0, 0.6, -0.6], 1e-8).unwrap();
    assert!(r.pass, "{r:?}");
}

#[test]
fn fine_truncation_needs_a_raised_cap() {
    let t = FockTruncation::new(2.0 * PI, 4, 8, 1.0).unwrap();
    assert!(matches!(build_operators(&t, &PolySpec::zero(), false), Err(Error::DimensionCap { .. })));
}

#[test]
fn quadratic_perturbation_is_a_mass_shift() {
    let c = 0.2;
    let t = FockTruncation::new(5.0, 2, 8, 1.0).unwrap();
    let ops = build_operators(&t, &PolySpec::new(vec![0.0, 0.0, c]).unwrap(), false).unwrap();
    let e0: f64 = (0..t.mode_count())
        .map(|j| {
            let mu = t.energy(j);
            let w = (mu * mu + 2.0 * c).sqrt();
            0.5 * (w - mu) - c / (2.0 * mu)
        })
        .sum();
    assert!((ops.ground_energy - e0).abs() < 1e-5, "{} {}", ops.ground_energy, e0);
    // one-particle levels in the zero sector: ω₀ above the ground state
    let w0 = (1.0 + 2.0 * c as f64).sqrt();
    let zero = ops.sectors.iter().find(|s| s.label == 0).unwrap();
    let odd_level = zero.eigenvalues.iter().map(|e| e - ops.ground_energy).find(|&x| (x - w0).abs() < 1e-3);
    assert!(odd_level.is_some());
    // more particles, closer
    let small = FockTruncation::new(5.0, 2, 4, 1.0).unwrap();
    let coarse = build_operators(&small, &PolySpec::new(vec![0.0, 0.0, c]).unwrap(), false).unwrap();
    assert!((coarse.ground_energy - e0).abs() > (ops.ground_energy - e0).abs());
}

#[test]
fn free_partition_function_matches_product_within_budget() {
    let t = FockTruncation::new(2.0 * PI, 2, 6, 1.0).unwrap();
    let ops = build_operators(&t, &PolySpec::zero(), true).unwrap();
    for beta in [1.0, 2.0, 5.0] {
        for v in [0.0, 0.6, -0.6] {
            let r = product_formula_check(&ops, beta, v).unwrap();
            assert!(r.pass, "{r:?}");
        }
    }
    assert!(product_formula_check(&quartic(1, 2, true), 1.0, 0.0).is_err());
}

#[test]
fn gibbs_state_is_kms_and_invariant() {
    let ops = quartic(1, 4, true);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for v in [0.0, 0.6] {
        let r = kms_gibbs_check(&ops, 1.5, v, 3, &[0.0, 0.7, -1.3], &mut rng, 1e-10).unwrap();
        assert!(r.pass, "{r:?}");
    }
}

#[test]
fn heat_kernel_is_a_contraction_fixing_the_vacuum() {
    let ops = quartic(1, 4, true);
    let k = heat_kernel(&ops, 0.8, 0.0).unwrap();
    let n = k.clone().svd(false, false).singular_values.max();
    assert!((n - 1.0).abs() < 1e-12);
}

#[test]
fn analyticity_ratios_stay_below_bound() {
    let ops = quartic(2, 4, false);
    for (t, gamma) in [(0.5, 0.3), (1.0, 0.5), (2.0, 0.2)] {
        let eps = 0.5 * (1.0 - gamma);
        let r = analyticity_check(&ops, t, gamma, eps, 8).unwrap();
        assert!(r.pass, "{r:?}");
    }
    assert!(analyticity_check(&ops, 1.0, 0.5, 0.6, 4).is_err());
}

#[test]
fn triple_norm_bound_on_random_triples() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let r = triple_bound_check(1000, &mut rng).unwrap();
    assert!(r.pass, "{r:?}");
    assert!(r.worst_ratio > 0.1);
}

#[test]
fn free_feynman_kac_pairing() {
    let t = FockTruncation::new(2.0 * PI, 12, 2, 1.0).unwrap();
    let f = TestFunction::product(Profile::gaussian(6.0, 0.4), vec![Profile::gaussian(0.5, 0.6)]);
    let g = TestFunction::product(Profile::gaussian(6.5, 0.5), vec![Profile::gaussian(-0.3, 0.7)]);
    let spectral = SpectralSpec { panel_width: 0.5, order: 20, ..SpectralSpec::default() };
    for v in [0.0, 0.6] {
        let b = BoostSpec::along_axis(1.0, 2, v).unwrap();
        for time in [0.0, 0.5, 1.0] {
            let r = fk_gaussian_check(time, &f, &g, &t, &PolySpec::zero(), &b, &spectral, 1e-8).unwrap();
            assert!(r.pass, "{r:?}");
        }
    }
    let b = BoostSpec::along_axis(1.0, 2, 0.0).unwrap();
    assert!(fk_gaussian_check(0.0, &f, &g, &t, &PolySpec::quartic(0.1).unwrap(), &b, &spectral, 1e-8).is_err());
}

#[test]
fn spectrum_rows_cover_the_basis() {
    let ops = quartic(1, 3, false);
    let rows = spectrum_rows(&ops, 0.3);
    assert_eq!(rows.len(), ops.basis.len());
    assert!(rows.iter().all(|r| r.2 >= -1e-8));
}
