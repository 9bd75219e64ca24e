//! One function per suite. Each returns named checks with a pass flag and
//! the numbers behind it; dumps go under `<out>/<suite>/`.

use std::f64::consts::PI;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use boostfield::fock::{self, FockTruncation, PolySpec};
use boostfield::gaussian::{self, CovarianceTable, MomentRequest, PairingMode};
use boostfield::io;
use boostfield::kernels::{kernel_continuum, kernel_fft, verify_kernel_symmetries, FftSpec, GridSpec};
use boostfield::kernels::Geometry;
use boostfield::modes::{ModeSet, SpatialFunction, SpatialLattice};
use boostfield::periodize::{self, CompactSpec, CylinderRoute, MatsubaraLattice};
use boostfield::quad::QuadratureSpec;
use boostfield::rp::{gram_reflection, verify_isometry, Reflection, Side, SpectralSpec};
use boostfield::symbols::verify_symbol_bounds;
use boostfield::testfn::{Half, Profile, TestFunction, TestFunctionFamily};
use boostfield::thermal::{self, ModularData};
use boostfield::BoostSpec;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{RunConfig, Suite};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    /// What the check establishes, in a few words.
    pub role: String,
    pub pass: bool,
    pub detail: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub schema: u32,
    pub suite: Suite,
    pub seed: u64,
    pub pass: bool,
    pub checks: Vec<Check>,
}

/// Wall-clock seconds per check; kept out of the reports so they stay reproducible.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Timings {
    pub total: f64,
    pub checks: Vec<(String, f64)>,
}

#[derive(Debug)]
pub enum SuiteError {
    Io(std::io::Error),
}

impl From<std::io::Error> for SuiteError {
    fn from(e: std::io::Error) -> Self {
        SuiteError::Io(e)
    }
}

type Outcome = boostfield::Result<(bool, Value)>;

struct Recorder {
    checks: Vec<Check>,
    timings: Timings,
}

impl Recorder {
    fn new() -> Self {
        Recorder { checks: Vec::new(), timings: Timings::default() }
    }

    fn check(&mut self, name: impl Into<String>, role: &str, f: impl FnOnce() -> Outcome) {
        let name = name.into();
        let t0 = Instant::now();
        let (pass, detail) = match f() {
            Ok(r) => r,
            Err(e) => (false, json!({ "error": e.to_string() })),
        };
        self.timings.checks.push((name.clone(), t0.elapsed().as_secs_f64()));
        self.checks.push(Check { name, role: role.into(), pass, detail });
    }
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("reports serialize")
}

fn tag(v: f64) -> String {
    format!("v{v}")
}

fn boost(cfg: &RunConfig, dim: usize, v: f64) -> boostfield::Result<BoostSpec> {
    BoostSpec::along_axis(cfg.mass, dim, v)
}

/// Runs one suite; dumps are written below `out`.
pub fn run_suite(suite: Suite, cfg: &RunConfig, out: &Path) -> Result<(SuiteReport, Timings), SuiteError> {
    let t0 = Instant::now();
    let mut rec = Recorder::new();
    match suite {
        Suite::Symbols => symbols(cfg, &mut rec),
        Suite::Kernels => kernels(cfg, &mut rec, &out.join("kernels"))?,
        Suite::Rp => rp(cfg, &mut rec),
        Suite::Periodize => periodize(cfg, &mut rec, &out.join("periodize"))?,
        Suite::Thermal => thermal(cfg, &mut rec),
        Suite::Gaussian => gaussian(cfg, &mut rec),
        Suite::Fock => fock(cfg, &mut rec, &out.join("fock"))?,
    }
    rec.timings.total = t0.elapsed().as_secs_f64();
    let pass = rec.checks.iter().all(|c| c.pass);
    Ok((SuiteReport { schema: crate::config::SCHEMA, suite, seed: cfg.seed, pass, checks: rec.checks }, rec.timings))
}

fn symbols(cfg: &RunConfig, rec: &mut Recorder) {
    let s = &cfg.symbols;
    for &d in &s.dims {
        for &v in &s.velocities {
            rec.check(format!("bounds d{d} {}", tag(v)), "one-particle symbol inequalities", || {
                let b = boost(cfg, d, v)?;
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ (d as u64) << 32);
                let samples = (0..s.samples)
                    .map(|_| {
                        let e = rng.random_range(-s.range..s.range);
                        let k: Vec<f64> = (1..d).map(|_| rng.random_range(-s.range..s.range)).collect();
                        b.momentum(e, k)
                    })
                    .collect::<boostfield::Result<Vec<_>>>()?;
                let r = verify_symbol_bounds(&samples, &b)?;
                let mut detail = to_value(&r);
                detail["violation_count"] = json!(r.violations.len());
                Ok((r.pass, detail))
            });
        }
    }
}

fn write_kernel(dir: &Path, stem: &str, k: &boostfield::kernels::SampledKernel) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    io::write_kernel_csv(k, BufWriter::new(File::create(dir.join(format!("{stem}.csv")))?))?;
    io::write_kernel_binary(&io::KernelGrid::from(k), BufWriter::new(File::create(dir.join(format!("{stem}.bin")))?))
}

fn kernels(cfg: &RunConfig, rec: &mut Recorder, dir: &Path) -> std::io::Result<()> {
    let k = &cfg.kernels;
    let mut dumps = Vec::new();
    for &v in &k.velocities {
        rec.check(format!("duality {}", tag(v)), "quadrature kernel equals transformed symbol", || {
            let b = boost(cfg, 2, v)?;
            let q = QuadratureSpec::adapted(0.5 * k.spacing, v, 1e-8);
            let grid = GridSpec::square(k.grid_points, k.spacing, q);
            let a = kernel_continuum(&grid, &b)?;
            let f = kernel_fft(&grid, &b, &FftSpec::default())?;
            let dev = a.max_relative_deviation(&f)?;
            let sym = verify_kernel_symmetries(&a)?;
            let pass = dev <= k.tolerance && sym.pass;
            dumps.push((tag(v), a));
            Ok((pass, json!({ "relative_deviation": dev, "tolerance": k.tolerance, "symmetries": sym })))
        });
    }
    for (stem, a) in &dumps {
        write_kernel(dir, &format!("continuum_{stem}"), a)?;
    }
    Ok(())
}

fn rp(cfg: &RunConfig, rec: &mut Recorder) {
    let r = &cfg.rp;
    let spec = SpectralSpec::default();
    for s in 0..r.seeds as u64 {
        let seed = cfg.seed.wrapping_mul(1000).wrapping_add(s);
        for (half, refl, label) in [(Half::PositiveTime, Reflection::Theta, "temporal"), (Half::PositiveX1, Reflection::PiN, "spatial")] {
            for &v in &r.velocities {
                rec.check(format!("{label} seed{seed} {}", tag(v)), "reflected Gram is positive and quantization is isometric", || {
                    let b = boost(cfg, 2, v)?;
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    let fam = TestFunctionFamily::random_gaussians(r.members, 4, half, 1, &mut rng, Some(seed))?;
                    let g = gram_reflection(&fam, refl, &b, &spec, r.min_eig_tolerance)?;
                    let iso = verify_isometry(&fam, refl, &b, &spec, r.isometry_tolerance)?;
                    Ok((
                        g.passed() && iso.pass,
                        json!({
                            "min_eig": g.min_eig,
                            "norm": g.norm,
                            "min_eig_tolerance": r.min_eig_tolerance,
                            "hermiticity_error": g.hermiticity_error,
                            "l2_condition": g.l2_condition,
                            "isometry": iso,
                        }),
                    ))
                });
            }
        }
    }
}

fn periodize(cfg: &RunConfig, rec: &mut Recorder, dir: &Path) -> std::io::Result<()> {
    let p = &cfg.periodize;
    for &beta in &p.betas {
        for &v in &p.velocities {
            rec.check(format!("routes beta{beta} {}", tag(v)), "closed, winding and frequency sums agree", || {
                let s = CompactSpec::new(beta, None, boost(cfg, 2, v)?)?;
                let xis: Vec<f64> = (0..=41).map(|i| beta * (-0.99 + 1.98 * i as f64 / 41.0)).collect();
                let ks: Vec<Vec<f64>> = (-16..=16).map(|i| vec![0.5 * i as f64]).collect();
                let lat = MatsubaraLattice::new(beta, p.matsubara_max)?;
                let r = periodize::compare_routes(&s, &xis, &ks, p.winding_max, &lat, p.tolerance)?;
                Ok((r.pass && r.min_separation >= beta / 100.0 - 1e-12, to_value(&r)))
            });
            rec.check(format!("occupation beta{beta} {}", tag(v)), "occupation factors stay below the gap bound", || {
                let s = CompactSpec::new(beta, None, boost(cfg, 2, v)?)?;
                let modes = ModeSet::lattice(&SpatialLattice::cubic(1, 8.0, 40)?);
                let r = periodize::rho_report(&modes, &s)?;
                Ok((r.pass, to_value(&r)))
            });
        }
    }
    let beta = p.torus_beta;
    let xis = [-0.5, 0.5];
    let xs = [-1.0, 0.0, 1.5];
    let q = QuadratureSpec { cutoff: 150.0, panel_width: 0.5, order: 20, tolerance: 1e-12 };
    let mut dumps = Vec::new();
    rec.check("torus to cylinder", "spatial periodization converges as the circle grows", || {
        let b = boost(cfg, 2, p.torus_velocity)?;
        let cyl = periodize::cylinder_kernel(
            &GridSpec {
                geometry: Geometry::TimeCircle { beta },
                time_points: xis.to_vec(),
                space_points: xs.iter().map(|&x| vec![x]).collect(),
                quadrature: q,
                regularized: false,
            },
            &b,
            CylinderRoute::Closed,
        )?;
        let mut devs = Vec::new();
        for &l in &p.torus_lengths {
            let grid = GridSpec {
                geometry: Geometry::FullTorus { beta, lengths: vec![l] },
                time_points: xis.to_vec(),
                space_points: xs.iter().map(|&x| vec![x]).collect(),
                quadrature: QuadratureSpec { cutoff: 150.0, panel_width: 1.0, order: 16, tolerance: 1e-12 },
                regularized: false,
            };
            let t = periodize::torus_kernel(&grid, &b, Side::Minus)?;
            devs.push(t.values.iter().zip(&cyl.values).map(|(a, c)| (a - c).norm()).fold(0.0, f64::max));
            dumps.push((format!("torus_l{l}"), t));
        }
        dumps.push(("cylinder".into(), cyl));
        let decreasing = devs.windows(2).all(|w| w[1] < w[0]);
        Ok((decreasing, json!({ "lengths": p.torus_lengths, "deviations": devs, "strictly_decreasing": decreasing })))
    });
    for (stem, k) in &dumps {
        write_kernel(dir, stem, k)?;
    }
    Ok(())
}

fn thermal(cfg: &RunConfig, rec: &mut Recorder) {
    let t = &cfg.thermal;
    let lattice = || -> boostfield::Result<Arc<ModeSet>> {
        Ok(Arc::new(ModeSet::lattice(&SpatialLattice::cubic(1, t.circumference, t.mode_cutoff)?)))
    };
    let data = |v: f64, side: Side| -> boostfield::Result<ModularData> {
        let spec = CompactSpec::new(t.beta, None, boost(cfg, 2, v)?)?;
        ModularData::new(lattice()?, &spec, side)
    };
    let times: Vec<f64> = (0..=40).map(|i| -5.0 + 0.25 * i as f64).collect();
    for &v in &t.velocities {
        for side in [Side::Plus, Side::Minus] {
            let label = format!("{} {side:?}", tag(v)).to_lowercase();
            rec.check(format!("one-particle kms {label}"), "one-particle thermal correlations satisfy KMS", || {
                let d = data(v, side)?;
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                let mut worst = 0.0f64;
                let mut pass = true;
                for _ in 0..5 {
                    let a = SpatialFunction::random(d.modes.clone(), &mut rng, 3.0).real_part();
                    let b = SpatialFunction::random(d.modes.clone(), &mut rng, 3.0).real_part();
                    let r = thermal::one_particle_kms_check(&a, &b, &times, &d, t.kms_tolerance)?;
                    worst = worst.max(r.max_residual / r.scale);
                    pass &= r.pass;
                }
                Ok((pass, json!({ "relative_residual": worst, "tolerance": t.kms_tolerance })))
            });
            rec.check(format!("modular {label}"), "modular conjugation and polar decomposition", || {
                let d = data(v, side)?;
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                let mut span: Vec<SpatialFunction> = (0..d.modes.len())
                    .map(|m| SpatialFunction::mode(d.modes.clone(), m, Complex64::new(0.0, 1.0)))
                    .collect();
                span.extend((0..5).map(|_| SpatialFunction::random(d.modes.clone(), &mut rng, 3.0)));
                let r = thermal::modular_check(&d, &span, t.modular_tolerance)?;
                Ok((r.pass, to_value(&r)))
            });
            rec.check(format!("liouvillian gap {label}"), "thermal generator is gapped by the boosted mass", || {
                let d = data(v, side)?;
                let spec = d.liouvillian_spectrum();
                let gap = spec.iter().map(|x| x.abs()).fold(f64::INFINITY, f64::min);
                let bound = cfg.mass * (1.0 - v * v).sqrt();
                Ok((gap >= bound * (1.0 - 1e-15), json!({ "gap": gap, "bound": bound })))
            });
            rec.check(format!("two-point {label}"), "two-point function KMS boundary and commutator", || {
                let d = data(v, side)?;
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(1));
                let a = SpatialFunction::random(d.modes.clone(), &mut rng, 3.0).real_part();
                let b = SpatialFunction::random(d.modes.clone(), &mut rng, 3.0).real_part();
                let r = thermal::two_point_checks(&a, &b, &times, &d, t.kms_tolerance, t.commutator_tolerance)?;
                Ok((r.pass, to_value(&r)))
            });
        }
        rec.check(format!("two-slice density {}", tag(v)), "two sharp-time slices generate the doubled space", || {
            let d = data(v, Side::Plus)?;
            let r = thermal::sharp_time_density_check(0.25 * t.beta / 2.0, 0.75 * t.beta / 2.0, &d)?;
            Ok((r.pass && r.smallest_singular_value > 0.0, to_value(&r)))
        });
    }
}

fn gaussian(cfg: &RunConfig, rec: &mut Recorder) {
    let g = &cfg.gaussian;
    let spectral = SpectralSpec::default();
    for &v in &g.velocities {
        let table = || -> boostfield::Result<CovarianceTable> {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let fam = TestFunctionFamily::random_gaussians(g.members, 1, Half::PositiveTime, 1, &mut rng, Some(cfg.seed))?;
            CovarianceTable::flat(&fam, &boost(cfg, 2, v)?, &spectral)
        };
        rec.check(format!("diagonal moments {}", tag(v)), "fourth and sixth moments from the covariance", || {
            let t = table()?;
            let mut worst = 0.0f64;
            for i in 0..t.len() {
                let s2 = t.get(i, i);
                for mode in [PairingMode::PairingSum, PairingMode::Recursion] {
                    let s4 = gaussian::wick_moment(&MomentRequest::power(i, 4, mode), &t)?;
                    let s6 = gaussian::wick_moment(&MomentRequest::power(i, 6, mode), &t)?;
                    worst = worst.max((s4 - 3.0 * s2 * s2).norm() / (3.0 * s2 * s2).norm());
                    worst = worst.max((s6 - 15.0 * s2 * s2 * s2).norm() / (15.0 * s2 * s2 * s2).norm());
                }
            }
            Ok((worst <= g.moment_tolerance, json!({ "relative_deviation": worst, "tolerance": g.moment_tolerance })))
        });
        rec.check(format!("pairing vs recursion {}", tag(v)), "pairing sum equals the polarized recursion", || {
            let t = table()?;
            let max = t.matrix().iter().map(|z| z.norm()).fold(0.0, f64::max);
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(2));
            let mut worst = 0.0f64;
            for n in (2..=g.max_fields).step_by(2) {
                for _ in 0..20 {
                    let f: Vec<usize> = (0..n).map(|_| rng.random_range(0..t.len())).collect();
                    let a = gaussian::wick_moment(&MomentRequest::new(f.clone(), PairingMode::PairingSum), &t)?;
                    let b = gaussian::wick_moment(&MomentRequest::new(f, PairingMode::Recursion), &t)?;
                    let scale = gaussian::double_factorial(n as i64 - 1) * max.powi(n as i32 / 2);
                    worst = worst.max((a - b).norm() / scale);
                }
            }
            Ok((worst <= g.moment_tolerance, json!({ "scaled_deviation": worst, "max_fields": g.max_fields, "tolerance": g.moment_tolerance })))
        });
        rec.check(format!("norm law {}", tag(v)), "even moments equal (2n-1)!! powers of the quantized norm", || {
            let b = boost(cfg, 2, v)?;
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(5));
            let fam = TestFunctionFamily::random_gaussians(6, 2, Half::PositiveTime, 1, &mut rng, Some(cfg.seed))?;
            let fine = SpectralSpec { panel_width: 0.5, order: 20, ..SpectralSpec::default() };
            let mut worst = 0.0f64;
            let mut pass = true;
            for n in 0..=g.max_fields / 2 {
                for r in gaussian::quantized_norm_check(&fam, n, &b, &fine, g.norm_law_tolerance)? {
                    worst = worst.max(r.normwise_deviation);
                    pass &= r.pass;
                }
            }
            Ok((pass, json!({ "normwise_deviation": worst, "tolerance": g.norm_law_tolerance })))
        });
        rec.check(format!("field vector bound {}", tag(v)), "field-vector norm ratio stays below cosh^5", || {
            let b = boost(cfg, 2, v)?;
            let grid = gaussian::spacetime_grid(&b, 8, 0.75)?;
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(7));
            let mut worst = 0.0f64;
            let mut bound = 0.0;
            let mut pass = true;
            for _ in 0..g.field_functions {
                let c: Vec<Complex64> = grid
                    .iter()
                    .map(|p| {
                        let env = (-0.05 * (p.energy.powi(2) + p.kvec[0].powi(2))).exp();
                        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * env
                    })
                    .collect();
                let r = gaussian::field_vector_bound(&c, &grid, &b)?;
                worst = worst.max(r.ratio);
                bound = r.bound;
                pass &= r.pass;
            }
            Ok((pass, json!({ "functions": g.field_functions, "max_ratio": worst, "bound": bound })))
        });
    }
}

fn fock(cfg: &RunConfig, rec: &mut Recorder, dir: &Path) -> std::io::Result<()> {
    let f = &cfg.fock;
    let trunc = |k: usize, n: usize| -> boostfield::Result<FockTruncation> {
        Ok(FockTruncation::new(f.circumference, k, n, cfg.mass)?.with_cap(f.dimension_cap))
    };
    let poly = || PolySpec::quartic(f.coupling);
    let mut rows = None;
    let mut coarse_ground = None;
    rec.check("spectrum condition", "boosted Hamiltonian is non-negative at truncation", || {
        let ops = fock::build_operators(&trunc(f.mode_cutoff, f.max_particles)?, &poly()?, false)?;
        let r = fock::spectrum_condition(&ops, &f.velocities, f.spectrum_tolerance)?;
        rows = Some(fock::spectrum_rows(&ops, 0.0));
        coarse_ground = Some(ops.ground_energy);
        let ok = r.pass && ops.checks.cross_sector_entries == 0;
        Ok((ok, json!({ "spectrum": r, "operators": ops.checks })))
    });
    rec.check("refinement", "truncated minimum moves toward the limit", || {
        let ops = fock::build_operators(&trunc(f.refined_mode_cutoff, f.refined_max_particles)?, &poly()?, false)?;
        let r = fock::spectrum_condition(&ops, &f.velocities, f.spectrum_tolerance)?;
        let coarse = coarse_ground.ok_or_else(|| boostfield::Error::InvalidParameter("coarse spectrum missing".into()))?;
        let trend = ops.ground_energy <= coarse;
        Ok((r.pass && trend, json!({ "coarse_ground_energy": coarse, "refined_ground_energy": ops.ground_energy, "spectrum": r })))
    });
    rec.check("free partition function", "truncated free trace matches the mode product", || {
        let ops = fock::build_operators(&trunc(2, 6)?, &PolySpec::zero(), true)?;
        let mut reports = Vec::new();
        for &v in &[0.0, 0.6, -0.6] {
            reports.push(fock::product_formula_check(&ops, f.gibbs_beta, v)?);
        }
        Ok((reports.iter().all(|r| r.pass), to_value(&reports)))
    });
    rec.check("gibbs kms", "Gibbs functional is KMS and invariant", || {
        let ops = fock::build_operators(&trunc(f.gibbs_mode_cutoff, f.gibbs_max_particles)?, &poly()?, true)?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut reports = Vec::new();
        for &v in &[0.0, 0.6] {
            reports.push(fock::kms_gibbs_check(&ops, f.gibbs_beta, v, f.kms_pairs, &[0.0, 0.7, -1.3], &mut rng, f.kms_tolerance)?);
        }
        Ok((reports.iter().all(|r| r.pass), to_value(&reports)))
    });
    rec.check("triple bound", "norm inequality on commuting triples", || {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let r = fock::triple_bound_check(f.triples, &mut rng)?;
        Ok((r.pass, to_value(&r)))
    });
    rec.check("analyticity", "momentum series terms decay geometrically", || {
        let ops = fock::build_operators(&trunc(2, 4)?, &poly()?, false)?;
        let gamma = f.analyticity_gamma;
        let eps = 0.5 * (1.0 - gamma);
        let reports = f
            .analyticity_times
            .iter()
            .map(|&t| fock::analyticity_check(&ops, t, gamma, eps, f.analyticity_terms))
            .collect::<boostfield::Result<Vec<_>>>()?;
        Ok((reports.iter().all(|r| r.pass), to_value(&reports)))
    });
    rec.check("free feynman-kac", "free path-space pairing equals the heat-kernel matrix element", || {
        let t = FockTruncation::new(2.0 * PI, 12, 2, cfg.mass)?;
        let fa = TestFunction::product(Profile::gaussian(6.0, 0.4), vec![Profile::gaussian(0.5, 0.6)]);
        let fb = TestFunction::product(Profile::gaussian(6.5, 0.5), vec![Profile::gaussian(-0.3, 0.7)]);
        let spectral = SpectralSpec { panel_width: 0.5, order: 20, ..SpectralSpec::default() };
        let mut reports = Vec::new();
        for &v in &[0.0, 0.6] {
            let b = boost(cfg, 2, v)?;
            for &time in &f.fk_times {
                reports.push(fock::fk_gaussian_check(time, &fa, &fb, &t, &PolySpec::zero(), &b, &spectral, f.fk_tolerance)?);
            }
        }
        Ok((reports.iter().all(|r| r.pass), to_value(&reports)))
    });
    if let Some(rows) = rows {
        fs::create_dir_all(dir)?;
        io::write_spectrum_csv(&rows, BufWriter::new(File::create(dir.join("spectrum.csv"))?))?;
    }
    Ok(())
}
