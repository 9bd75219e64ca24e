use std::time::Instant;

use boostfield::rp::{gram_reflection, verify_isometry, Reflection, SpectralSpec};
use boostfield::testfn::{Half, TestFunctionFamily};
use boostfield::BoostSpec;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn random_families_are_positive_and_isometric() {
    let spec = SpectralSpec::default();
    for (half, refl) in [(Half::PositiveTime, Reflection::Theta), (Half::PositiveX1, Reflection::PiN), (Half::NegativeTime, Reflection::Theta)] {
        for v in [0.0, 0.6, -0.6] {
            let b = BoostSpec::along_axis(1.0, 2, v).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(7);
            let fam = TestFunctionFamily::random_gaussians(20, 4, half, 1, &mut rng, Some(7)).unwrap();
            let t0 = Instant::now();
            let g = gram_reflection(&fam, refl, &b, &spec, 1e-10).unwrap();
            let t1 = Instant::now();
            let iso = verify_isometry(&fam, refl, &b, &spec, 1e-6).unwrap();
            let t2 = Instant::now();
            eprintln!("{half:?} v={v}: min {:e} norm {:e} cond {:?} herm {:e} | iso {:e} {:e} entry {:e} ratio {} | {:?} {:?}",
                g.min_eig, g.norm, g.l2_condition, g.hermiticity_error, iso.plus_deviation, iso.minus_deviation, iso.entrywise_deviation, iso.contraction_ratio, t1-t0, t2-t1);
            assert!(g.passed());
            assert!(iso.pass);
        }
    }
}
