use std::time::Instant;

use boostfield::kernels::{kernel_closed_form_2d, kernel_continuum, kernel_fft, FftSpec, GridSpec};
use boostfield::quad::QuadratureSpec;
use boostfield::BoostSpec;

#[test]
fn quadrature_and_fft_agree_on_64_grid() {
    for v in [0.0, 0.3, -0.6] {
        let b = BoostSpec::along_axis(1.0, 2, v).unwrap();
        let q = QuadratureSpec::adapted(0.05, v, 1e-8);
        let grid = GridSpec::square(64, 0.1, q);
        let t0 = Instant::now();
        let a = kernel_continuum(&grid, &b).unwrap();
        let t1 = Instant::now();
        let f = kernel_fft(&grid, &b, &FftSpec::default()).unwrap();
        let t2 = Instant::now();
        let dev = a.max_relative_deviation(&f).unwrap();
        let mut closed = 0.0f64;
        for (i, &t) in grid.time_points.iter().enumerate() {
            for (j, x) in grid.space_points.iter().enumerate() {
                let c = kernel_closed_form_2d(t, x[0], &b).unwrap();
                closed = closed.max((a.value(i, j) - c).norm() / c.norm());
            }
        }
        eprintln!("v={v}: quad {:?} fft {:?} rel {dev:e} closed {closed:e}", t1 - t0, t2 - t1);
        assert!(dev <= 1e-6);
    }
}
