use std::sync::Arc;

use boostfield::fock::{build_operators, spectrum_condition, FockTruncation, PolySpec};
use boostfield::gaussian::{wick_moment, CovarianceTable, MomentRequest, PairingMode};
use boostfield::io::{read_kernel_binary, write_kernel_binary, KernelGrid};
use boostfield::kernels::{kernel_closed_form_2d, Geometry};
use boostfield::modes::{ModeSet, SpatialFunction, SpatialLattice};
use boostfield::periodize::{rho_bound, rho_factor, CompactSpec};
use boostfield::rp::{sharp_time_mode_gram, Side};
use boostfield::symbols::{propagator, verify_symbol_bounds};
use boostfield::thermal::ModularData;
use boostfield::BoostSpec;
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn speed() -> impl Strategy<Value = f64> {
    -0.95f64..0.95
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn symbol_conjugates_under_velocity_reversal(e in -30.0f64..30.0, k in -30.0f64..30.0, q in 0.0f64..100.0, v in speed()) {
        let a = propagator(e, k, q, 1.0, v);
        let b = propagator(e, k, q, 1.0, -v);
        prop_assert!((a - b.conj()).norm() <= 1e-15 * a.norm());
    }

    #[test]
    fn symbol_bounds_hold_at_random_momenta(e in -50.0f64..50.0, k in -50.0f64..50.0, v in speed(), m in 0.1f64..3.0) {
        let b = BoostSpec::along_axis(m, 2, v).unwrap();
        let r = verify_symbol_bounds(&[b.momentum(e, vec![k]).unwrap()], &b).unwrap();
        prop_assert!(r.violations.is_empty(), "{:?}", r.violations);
    }

    #[test]
    fn flat_kernel_conjugates_under_velocity_reversal(t in 0.05f64..3.0, x in -3.0f64..3.0, v in speed()) {
        let p = kernel_closed_form_2d(t, x, &BoostSpec::along_axis(1.0, 2, v).unwrap()).unwrap();
        let m = kernel_closed_form_2d(t, x, &BoostSpec::along_axis(1.0, 2, -v).unwrap()).unwrap();
        prop_assert!((p - m.conj()).norm() <= 1e-13 * p.norm());
    }

    #[test]
    fn occupation_factor_never_exceeds_gap_bound(k in -40.0f64..40.0, beta in 0.1f64..10.0, v in speed()) {
        let spec = CompactSpec::new(beta, None, BoostSpec::along_axis(1.0, 2, v).unwrap()).unwrap();
        let bound = rho_bound(&spec);
        for side in [Side::Plus, Side::Minus] {
            prop_assert!(rho_factor(&[k], &spec, side).unwrap() <= bound * (1.0 + 1e-14));
        }
    }

    #[test]
    fn sharp_time_gram_is_positive(times in prop::collection::vec(0.0f64..3.0, 1..8), k in -5.0f64..5.0, v in speed()) {
        let mu = (k * k + 1.0f64).sqrt();
        let g = sharp_time_mode_gram(&times, mu, mu + v * k);
        let ev = g.symmetric_eigenvalues();
        let scale = ev.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        prop_assert!(ev.iter().all(|&x| x >= -1e-13 * scale));
    }

    #[test]
    fn pairing_sum_equals_recursion(seed in any::<u64>(), n in 1usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        use rand::Rng;
        let a = DMatrix::from_fn(4, 4, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let t = CovarianceTable::from_matrix(&a + a.transpose()).unwrap();
        let fields: Vec<usize> = (0..2 * n).map(|_| rng.random_range(0..4)).collect();
        let p = wick_moment(&MomentRequest::new(fields.clone(), PairingMode::PairingSum), &t).unwrap();
        let r = wick_moment(&MomentRequest::new(fields.clone(), PairingMode::Recursion), &t).unwrap();
        let scale = boostfield::gaussian::double_factorial(2 * n as i64 - 1) * 4f64.powi(n as i32);
        prop_assert!((p - r).norm() <= 1e-12 * scale);
        let mut odd = fields;
        odd.pop();
        prop_assert_eq!(wick_moment(&MomentRequest::new(odd, PairingMode::PairingSum), &t).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn modular_conjugation_is_an_antiunitary_involution(seed in any::<u64>(), v in speed(), beta in 0.2f64..5.0) {
        let modes = Arc::new(ModeSet::lattice(&SpatialLattice::cubic(1, 5.0, 4).unwrap()));
        let spec = CompactSpec::new(beta, None, BoostSpec::along_axis(1.0, 2, v).unwrap()).unwrap();
        let d = ModularData::new(modes.clone(), &spec, Side::Plus).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = d.kappa(&SpatialFunction::random(modes.clone(), &mut rng, 2.0)).unwrap();
        let b = d.kappa_prime(&SpatialFunction::random(modes.clone(), &mut rng, 2.0)).unwrap();
        prop_assert_eq!(d.j(&d.j(&a)), a.clone());
        let lhs = d.j(&a).inner(&d.j(&b), 1.0).unwrap();
        let rhs = b.inner(&a, 1.0).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-13 * rhs.norm().max(1.0));
    }

    #[test]
    fn thermal_translations_compose(seed in any::<u64>(), s1 in -0.5f64..0.5, s2 in -0.5f64..0.5, t in -3.0f64..3.0) {
        let modes = Arc::new(ModeSet::lattice(&SpatialLattice::cubic(1, 4.0, 3).unwrap()));
        let spec = CompactSpec::new(1.2, None, BoostSpec::along_axis(1.0, 2, 0.4).unwrap()).unwrap();
        let d = ModularData::new(modes.clone(), &spec, Side::Minus).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = d.kappa(&SpatialFunction::random(modes, &mut rng, 2.0)).unwrap();
        let a = Complex64::new(s1, t);
        let b = Complex64::new(s2, -t);
        let two = d.translate(&d.translate(&u, a).unwrap(), b).unwrap();
        let one = d.translate(&u, a + b).unwrap();
        prop_assert!(two.max_difference(&one) <= 1e-12);
    }

    #[test]
    fn kernel_grid_binary_round_trip(nt in 1usize..5, nx in 1usize..5, beta in 0.5f64..4.0, seed in any::<u64>()) {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = KernelGrid {
            geometry: Geometry::TimeCircle { beta },
            time_points: (0..nt).map(|i| i as f64 * 0.1).collect(),
            space_points: (0..nx).map(|i| vec![i as f64 - 0.5]).collect(),
            values: (0..nt * nx).map(|_| Complex64::new(rng.random(), rng.random())).collect(),
        };
        let mut buf = Vec::new();
        write_kernel_binary(&g, &mut buf).unwrap();
        prop_assert_eq!(read_kernel_binary(&buf[..]).unwrap(), g);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn truncated_hamiltonian_is_block_symmetric_and_bounded_below(
        k in 0usize..3, n in 1usize..5, c2 in 0.0f64..0.5, c4 in 0.0f64..0.5, ell in 2.0f64..10.0, v in -0.6f64..0.6
    ) {
        let t = FockTruncation::new(ell, k, n, 1.0).unwrap();
        let ops = build_operators(&t, &PolySpec::new(vec![0.3, 0.0, c2, 0.0, c4]).unwrap(), false).unwrap();
        prop_assert_eq!(ops.checks.cross_sector_entries, 0);
        prop_assert!(ops.checks.hermiticity_error <= 1e-13);
        prop_assert_eq!(ops.basis.len(), t.dimension());
        let r = spectrum_condition(&ops, &[v], 1e-8).unwrap();
        prop_assert!(r.pass, "{:?}", r);
    }

    #[test]
    fn odd_or_negative_polynomials_are_rejected(c in prop::collection::vec(-1.0f64..1.0, 1..6)) {
        let p = PolySpec { coefficients: c.clone() };
        let deg = c.iter().rposition(|&x| x != 0.0);
        let bad = matches!(deg, Some(d) if d % 2 == 1 || (d > 0 && c[d] < 0.0));
        prop_assert_eq!(p.validate().is_err(), bad);
    }
}
