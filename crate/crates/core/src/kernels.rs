//! Configuration-space covariance kernels.
//!
//! With `D̃(E,k) = 1/((E+iδ)²+μ²)` the kernel is
//! `D(t,x) = (2π)^{-d} ∫ D̃(E,k) e^{i(Et + k·x)} dE dk`. The energy integral is
//! done in closed form, `e^{-|t|μ + tδ}/(2μ)`, and only the spatial momenta
//! are integrated numerically. [`kernel_fft`] is an independent route through
//! a two-dimensional FFT of the full symbol.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{ensure, ensure_finite, Error, Result};
use crate::modes::ModeSet;
use crate::quad::QuadratureSpec;
use crate::special::bessel_k0;
use crate::symbols::{dot, spatial_bundle, BoostSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Geometry {
    Flat,
    TimeCircle { beta: f64 },
    SpaceTorus { lengths: Vec<f64> },
    FullTorus { beta: f64, lengths: Vec<f64> },
}

impl Geometry {
    pub fn tag(&self) -> &'static str {
        match self {
            Geometry::Flat => "flat",
            Geometry::TimeCircle { .. } => "time_circle",
            Geometry::SpaceTorus { .. } => "space_torus",
            Geometry::FullTorus { .. } => "full_torus",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub geometry: Geometry,
    pub time_points: Vec<f64>,
    pub space_points: Vec<Vec<f64>>,
    pub quadrature: QuadratureSpec,
    /// Treat the momentum cutoff as a declared regularization: coincident
    /// points are allowed and the tail check is skipped.
    #[serde(default)]
    pub regularized: bool,
}

impl GridSpec {
    pub fn flat(time_points: Vec<f64>, space_points: Vec<Vec<f64>>, quadrature: QuadratureSpec) -> Self {
        GridSpec {
            geometry: Geometry::Flat,
            time_points,
            space_points,
            quadrature,
            regularized: false,
        }
    }

    /// Product grid `t_i = x_i = (i - (n-1)/2)·h`, `i < n`, in d = 2.
    pub fn square(n: usize, spacing: f64, quadrature: QuadratureSpec) -> Self {
        let pts: Vec<f64> = (0..n).map(|i| (i as f64 - (n as f64 - 1.0) / 2.0) * spacing).collect();
        Self::flat(pts.clone(), pts.into_iter().map(|x| vec![x]).collect(), quadrature)
    }

    pub fn validate(&self) -> Result<()> {
        ensure(!self.time_points.is_empty() && !self.space_points.is_empty(), || {
            "grid needs time and space points".into()
        })?;
        ensure_finite("time points", &self.time_points)?;
        ensure(self.time_points.windows(2).all(|w| w[0] < w[1]), || {
            "time points must be strictly increasing".into()
        })?;
        let dim = self.space_points[0].len();
        ensure(self.space_points.iter().all(|x| x.len() == dim), || {
            "space points have mixed dimensions".into()
        })?;
        for x in &self.space_points {
            ensure_finite("space points", x)?;
        }
        ensure(
            self.space_points
                .windows(2)
                .all(|w| w[0].partial_cmp(&w[1]) == Some(std::cmp::Ordering::Less)),
            || "space points must be strictly increasing (lexicographic)".into(),
        )?;
        let q = &self.quadrature;
        ensure(q.cutoff > 0.0 && q.panel_width > 0.0 && q.order > 0 && q.tolerance > 0.0, || {
            "quadrature needs positive cutoff, panel width, order and tolerance".into()
        })?;
        if let Geometry::TimeCircle { beta } | Geometry::FullTorus { beta, .. } = self.geometry {
            ensure(beta > 0.0, || "beta must be positive".into())?;
            ensure(self.time_points.iter().all(|t| t.abs() < beta), || {
                "time points must lie in (-beta, beta)".into()
            })?;
        }
        Ok(())
    }

    pub fn spatial_dim(&self) -> usize {
        self.space_points[0].len()
    }
}

impl QuadratureSpec {
    /// Cutoff large enough that the tail `e^{-t_min(μ(K) - |v|K)}` stays
    /// below `tolerance·1e-3`.
    pub fn adapted(t_min: f64, speed: f64, tolerance: f64) -> Self {
        let rate = t_min * (1.0 - speed.abs());
        let cutoff = (1e3 / tolerance).ln() / rate;
        QuadratureSpec { cutoff, panel_width: 1.0, order: 16, tolerance }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    D,
    ThetaD,
    DTheta,
    PiD,
    DPi,
}

/// Kernel values on a product grid; `values[i * nx + j]` belongs to
/// `(time_points[i], space_points[j])`. For the reflected kinds the time
/// coordinate is `t + t'` (θ kinds) and the first space coordinate is
/// `x₁ + x₁'` (π kinds).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampledKernel {
    pub grid: GridSpec,
    pub values: Vec<Complex64>,
    pub boost: BoostSpec,
    pub kind: KernelKind,
}

impl SampledKernel {
    pub fn nt(&self) -> usize {
        self.grid.time_points.len()
    }

    pub fn nx(&self) -> usize {
        self.grid.space_points.len()
    }

    pub fn value(&self, i: usize, j: usize) -> Complex64 {
        self.values[i * self.nx() + j]
    }

    /// Largest pointwise relative deviation from `other` on the same grid.
    pub fn max_relative_deviation(&self, other: &SampledKernel) -> Result<f64> {
        if self.values.len() != other.values.len() {
            return Err(Error::GridMismatch("kernels sampled on different grids".into()));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm() / b.norm())
            .fold(0.0, f64::max))
    }
}

pub(crate) fn check_boost(grid: &GridSpec, b: &BoostSpec) -> Result<()> {
    if grid.spatial_dim() != b.dim() - 1 {
        return Err(Error::GridMismatch(format!(
            "grid has {} spatial axes, boost has {}",
            grid.spatial_dim(),
            b.dim() - 1
        )));
    }
    Ok(())
}

/// `Σ_n a(i,n) e^{i k_n·x_j}` as a matrix product.
pub(crate) fn mode_sum(
    modes: &ModeSet,
    nt: usize,
    time_factor: impl Fn(usize, usize) -> Complex64,
    xs: &[Vec<f64>],
) -> Vec<Complex64> {
    let n = modes.len();
    let a = DMatrix::from_fn(nt, n, |i, m| time_factor(i, m) * modes.weight(m));
    let p = DMatrix::from_fn(n, xs.len(), |m, j| Complex64::from_polar(1.0, dot(modes.momentum(m), &xs[j])));
    let prod = a * p;
    let mut out = Vec::with_capacity(nt * xs.len());
    for i in 0..nt {
        for j in 0..xs.len() {
            out.push(prod[(i, j)]);
        }
    }
    out
}

/// Flat kernel `D(t, x)` at every grid point, time factor exact per mode.
pub fn kernel_continuum(grid: &GridSpec, b: &BoostSpec) -> Result<SampledKernel> {
    grid.validate()?;
    ensure(grid.geometry == Geometry::Flat, || "kernel_continuum needs a flat grid".into())?;
    check_boost(grid, b)?;
    let q = &grid.quadrature;
    let coincident = grid.time_points.contains(&0.0) && grid.space_points.iter().any(|x| x.iter().all(|&c| c == 0.0));
    if coincident && !grid.regularized {
        return Err(Error::Coincident);
    }
    if !grid.regularized {
        let t_min = grid.time_points.iter().fold(f64::INFINITY, |m, t| m.min(t.abs()));
        let k = q.cutoff;
        let tail = (-t_min * ((k * k + b.mass() * b.mass()).sqrt() - b.speed() * k)).exp();
        if tail > q.tolerance {
            return Err(Error::CutoffTooSmall { tail, tol: q.tolerance });
        }
    }
    let modes = ModeSet::continuum(b.dim() - 1, q)?;
    let mu = modes.energies(b.mass());
    let delta: Vec<f64> = (0..modes.len()).map(|m| dot(modes.momentum(m), b.velocity())).collect();
    let ts = &grid.time_points;
    let values = mode_sum(
        &modes,
        ts.len(),
        |i, m| {
            let t = ts[i];
            Complex64::new((-t.abs() * mu[m] + t * delta[m]).exp() / (2.0 * mu[m]), 0.0)
        },
        &grid.space_points,
    );
    Ok(SampledKernel {
        grid: grid.clone(),
        values,
        boost: b.clone(),
        kind: KernelKind::D,
    })
}

/// Reflected kernels. θ kinds take `t + t' ≥ 0` as the time coordinate and
/// `x - x'` as space; π kinds take `t - t'` and `(x₁ + x₁' ≥ 0, x⊥ - x⊥')`.
/// The π kinds need the boost along the first axis.
pub fn reflected_kernels(grid: &GridSpec, b: &BoostSpec, kind: KernelKind) -> Result<SampledKernel> {
    grid.validate()?;
    ensure(grid.geometry == Geometry::Flat, || "reflected kernels need a flat grid".into())?;
    check_boost(grid, b)?;
    match kind {
        KernelKind::D => kernel_continuum(grid, b),
        KernelKind::ThetaD | KernelKind::DTheta => {
            if let Some(s) = grid.time_points.iter().find(|&&s| s < 0.0) {
                return Err(Error::Support(format!("t + t' = {s} lies outside the positive half")));
            }
            let sign = if kind == KernelKind::ThetaD { -1.0 } else { 1.0 };
            let mut g = grid.clone();
            g.time_points = grid.time_points.iter().map(|s| sign * s).collect();
            if sign < 0.0 {
                g.time_points.reverse();
            }
            let mut k = kernel_continuum(&g, b)?;
            if sign < 0.0 {
                // restore ascending order of t + t'
                let nx = k.nx();
                let rows: Vec<Vec<Complex64>> = k.values.chunks(nx).rev().map(|r| r.to_vec()).collect();
                k.values = rows.concat();
            }
            k.grid = grid.clone();
            k.kind = kind;
            Ok(k)
        }
        KernelKind::PiD | KernelKind::DPi => spatial_reflected(grid, b, kind),
    }
}

fn spatial_reflected(grid: &GridSpec, b: &BoostSpec, kind: KernelKind) -> Result<SampledKernel> {
    let v = b.velocity();
    ensure(v[1..].iter().all(|&c| c == 0.0), || {
        "spatial reflection kernels need the boost along the first axis".into()
    })?;
    let v1 = v[0];
    if let Some(x) = grid.space_points.iter().find(|x| x[0] < 0.0) {
        return Err(Error::Support(format!("x1 + x1' = {} lies outside the positive half", x[0])));
    }
    let q = &grid.quadrature;
    let coincident = grid.time_points.contains(&0.0) && grid.space_points.iter().any(|x| x.iter().all(|&c| c == 0.0));
    if coincident && !grid.regularized {
        return Err(Error::Coincident);
    }
    let m = b.mass();
    if !grid.regularized {
        let s_min = grid.space_points.iter().fold(f64::INFINITY, |a, x| a.min(x[0]));
        let k = q.cutoff;
        let worst = spatial_bundle(k, 0.0, m, v1).nu_plus.min(spatial_bundle(-k, 0.0, m, v1).nu_plus)
            .min(spatial_bundle(k, 0.0, m, v1).nu_minus)
            .min(spatial_bundle(-k, 0.0, m, v1).nu_minus);
        let tail = (-s_min * worst).exp();
        if tail > q.tolerance {
            return Err(Error::CutoffTooSmall { tail, tol: q.tolerance });
        }
    }
    // nodes are (E, k⊥)
    let modes = ModeSet::continuum(b.dim() - 1, q)?;
    let bundles: Vec<_> = (0..modes.len())
        .map(|n| {
            let p = modes.momentum(n);
            spatial_bundle(p[0], dot(&p[1..], &p[1..]), m, v1)
        })
        .collect();
    // phases over (Δt, Δx⊥); the decaying factor depends on x1 + x1'
    let nt = grid.time_points.len();
    let nx = grid.space_points.len();
    let mut values = Vec::with_capacity(nt * nx);
    let mut rows = vec![Complex64::new(0.0, 0.0); nt * nx];
    for (j, x) in grid.space_points.iter().enumerate() {
        let sigma = x[0];
        for (i, &t) in grid.time_points.iter().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for (n, s) in bundles.iter().enumerate() {
                let p = modes.momentum(n);
                let rate = if kind == KernelKind::PiD { s.nu_plus } else { s.nu_minus };
                let phase = p[0] * t + dot(&p[1..], &x[1..]);
                acc += Complex64::from_polar(modes.weight(n) * (-sigma * rate).exp() / (2.0 * s.nu), phase);
            }
            rows[i * nx + j] = acc;
        }
    }
    values.extend(rows);
    Ok(SampledKernel {
        grid: grid.clone(),
        values,
        boost: b.clone(),
        kind,
    })
}

/// Closed form in d = 2: `D(t,x) = K₀(m r)/(2π)` with
/// `r² = (1-v²)t² - 2ivtx + x²` (principal root).
pub fn kernel_closed_form_2d(t: f64, x: f64, b: &BoostSpec) -> Result<Complex64> {
    ensure(b.dim() == 2, || "closed form is for d = 2".into())?;
    if t == 0.0 && x == 0.0 {
        return Err(Error::Coincident);
    }
    let v = b.velocity()[0];
    let r2 = Complex64::new((1.0 - v * v) * t * t + x * x, -2.0 * v * t * x);
    Ok(bessel_k0(b.mass() * r2.sqrt()) / (2.0 * PI))
}

/// Box and resolution of the FFT route.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FftSpec {
    /// Points per axis (box side `n·spacing`).
    pub n: usize,
    pub spacing: f64,
    /// Pauli–Villars regulator masses.
    pub regulators: [f64; 4],
}

impl Default for FftSpec {
    fn default() -> Self {
        FftSpec { n: 2048, spacing: 0.05, regulators: [2.0, 3.0, 4.0, 5.0] }
    }
}

/// Independent d = 2 route: inverse FFT of the regulated symbol
/// `D̃_m + Σ c_i D̃_{M_i}` (decaying like `|p|⁻¹⁰`) on a periodic box, minus
/// the regulator kernels in closed form. Grid points must lie on the FFT
/// lattice.
pub fn kernel_fft(grid: &GridSpec, b: &BoostSpec, spec: &FftSpec) -> Result<SampledKernel> {
    grid.validate()?;
    ensure(b.dim() == 2 && grid.spatial_dim() == 1, || "FFT route is implemented for d = 2".into())?;
    let n = spec.n;
    let h = spec.spacing;
    ensure(n >= 8 && n % 2 == 0 && h > 0.0, || "FFT needs an even size and positive spacing".into())?;
    let lattice_index = |y: f64| -> Result<usize> {
        let r = y / h;
        let i = r.round();
        if (r - i).abs() > 1e-9 || i.abs() >= (n / 2) as f64 {
            return Err(Error::GridMismatch(format!("point {y} is not on the FFT lattice")));
        }
        Ok(((i as i64).rem_euclid(n as i64)) as usize)
    };
    let ti: Vec<usize> = grid.time_points.iter().map(|&t| lattice_index(t)).collect::<Result<_>>()?;
    let xi: Vec<usize> = grid.space_points.iter().map(|x| lattice_index(x[0])).collect::<Result<_>>()?;

    let m = b.mass();
    let v = b.velocity()[0];
    let masses = spec.regulators;
    let m2 = m * m;
    let num: f64 = masses.iter().map(|mm| mm * mm - m2).product();
    let len = n as f64 * h;
    let dp = 2.0 * PI / len;
    let freq = |j: usize| -> f64 {
        if j < n / 2 {
            j as f64 * dp
        } else {
            (j as f64 - n as f64) * dp
        }
    };
    // row-major [E index][k index]
    let mut data = vec![Complex64::new(0.0, 0.0); n * n];
    for a in 0..n {
        let e = freq(a);
        for c in 0..n {
            let k = freq(c);
            let z = Complex64::new(e, v * k);
            let qv = z * z + k * k;
            let mut den = qv + m2;
            for mm in masses {
                den *= qv + mm * mm;
            }
            data[a * n + c] = num / den;
        }
    }
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_inverse(n);
    for row in data.chunks_mut(n) {
        fft.process(row);
    }
    // columns
    let mut col = vec![Complex64::new(0.0, 0.0); n];
    for c in 0..n {
        for a in 0..n {
            col[a] = data[a * n + c];
        }
        fft.process(&mut col);
        for a in 0..n {
            data[a * n + c] = col[a];
        }
    }
    let scale = 1.0 / (len * len);
    // partial-fraction weights of the regulators
    let coef: Vec<f64> = masses
        .iter()
        .enumerate()
        .map(|(i, mi)| {
            let mi2 = mi * mi;
            let mut c = num / (m2 - mi2);
            for (j, mj) in masses.iter().enumerate() {
                if j != i {
                    c /= mj * mj - mi2;
                }
            }
            c
        })
        .collect();
    let mut values = Vec::with_capacity(ti.len() * xi.len());
    for (ii, &a) in ti.iter().enumerate() {
        for (jj, &c) in xi.iter().enumerate() {
            let t = grid.time_points[ii];
            let x = grid.space_points[jj][0];
            let mut val = data[a * n + c] * scale;
            let r2 = Complex64::new((1.0 - v * v) * t * t + x * x, -2.0 * v * t * x);
            if r2.norm() == 0.0 {
                return Err(Error::Coincident);
            }
            let r = r2.sqrt();
            for (mi, ci) in masses.iter().zip(&coef) {
                val -= ci * bessel_k0(mi * r) / (2.0 * PI);
            }
            values.push(val);
        }
    }
    Ok(SampledKernel {
        grid: grid.clone(),
        values,
        boost: b.clone(),
        kind: KernelKind::D,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymmetryReport {
    pub scale: f64,
    pub even_deviation: f64,
    pub time_reflection_deviation: f64,
    pub space_reflection_deviation: f64,
    pub composite_deviation: f64,
    /// Largest `|Im D|`; only meaningful at v = 0.
    pub max_imag: f64,
    pub tolerance: f64,
    pub pass: bool,
}

fn find_time(ts: &[f64], t: f64) -> Option<usize> {
    ts.iter().position(|&s| (s - t).abs() <= 1e-12 * (1.0 + t.abs()))
}

fn find_point(xs: &[Vec<f64>], y: &[f64]) -> Option<usize> {
    xs.iter().position(|x| x.iter().zip(y).all(|(a, b)| (a - b).abs() <= 1e-12 * (1.0 + b.abs())))
}

/// Checks `D(-z) = D(z)`, `D(θz) = conj D(z)`, `D(π z) = conj D(z)` and
/// `D(θπ z) = D(z)` on a reflection-closed grid. Deviations are relative to
/// the largest `|D|`.
pub fn verify_kernel_symmetries(kern: &SampledKernel) -> Result<SymmetryReport> {
    ensure(kern.kind == KernelKind::D, || "symmetry check applies to the plain kernel".into())?;
    let g = &kern.grid;
    let n = kern.boost.direction().to_vec();
    let reflect = |x: &[f64]| -> Vec<f64> {
        let c = dot(x, &n);
        x.iter().zip(&n).map(|(xi, ni)| xi - 2.0 * c * ni).collect()
    };
    let scale = kern.values.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut dev = [0.0f64; 4];
    let mut max_imag = 0.0f64;
    for (i, &t) in g.time_points.iter().enumerate() {
        let it = find_time(&g.time_points, -t)
            .ok_or_else(|| Error::GridMismatch(format!("time {t} has no mirror on the grid")))?;
        for (j, x) in g.space_points.iter().enumerate() {
            let neg: Vec<f64> = x.iter().map(|c| -c).collect();
            let jn = find_point(&g.space_points, &neg)
                .ok_or_else(|| Error::GridMismatch("space grid is not closed under x -> -x".into()))?;
            let jp = find_point(&g.space_points, &reflect(x))
                .ok_or_else(|| Error::GridMismatch("space grid is not closed under the boost reflection".into()))?;
            let d = kern.value(i, j);
            max_imag = max_imag.max(d.im.abs());
            dev[0] = dev[0].max((kern.value(it, jn) - d).norm());
            dev[1] = dev[1].max((kern.value(it, j) - d.conj()).norm());
            dev[2] = dev[2].max((kern.value(i, jp) - d.conj()).norm());
            dev[3] = dev[3].max((kern.value(it, jp) - d).norm());
        }
    }
    let rel = |x: f64| if scale > 0.0 { x / scale } else { x };
    let tolerance = g.quadrature.tolerance;
    let dev = dev.map(rel);
    Ok(SymmetryReport {
        scale,
        even_deviation: dev[0],
        time_reflection_deviation: dev[1],
        space_reflection_deviation: dev[2],
        composite_deviation: dev[3],
        max_imag,
        tolerance,
        pass: dev.iter().all(|&d| d <= tolerance),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b2(v: f64) -> BoostSpec {
        BoostSpec::along_axis(1.0, 2, v).unwrap()
    }

    #[test]
    fn unit_time_matches_bessel() {
        // K0(1)/(2π)
        let q = QuadratureSpec::adapted(1.0, 0.0, 1e-12);
        let g = GridSpec::flat(vec![1.0], vec![vec![0.0]], q);
        let k = kernel_continuum(&g, &b2(0.0)).unwrap();
        let expect = 0.421_024_438_240_708_3 / (2.0 * PI);
        assert!((k.values[0].re - expect).abs() < 1e-12);
        assert!(k.values[0].im.abs() < 1e-15);
    }

    #[test]
    fn boosted_matches_closed_form() {
        let b = b2(0.6);
        let q = QuadratureSpec::adapted(0.3, 0.6, 1e-10);
        let g = GridSpec::flat(vec![-0.7, 0.3, 1.1], vec![vec![-0.4], vec![0.0], vec![0.9]], q);
        let k = kernel_continuum(&g, &b).unwrap();
        for (i, &t) in g.time_points.iter().enumerate() {
            for (j, x) in g.space_points.iter().enumerate() {
                let c = kernel_closed_form_2d(t, x[0], &b).unwrap();
                assert!((k.value(i, j) - c).norm() < 1e-9 * c.norm(), "{t},{x:?}");
            }
        }
    }

    #[test]
    fn cutoff_too_small_is_flagged() {
        let q = QuadratureSpec { cutoff: 5.0, ..QuadratureSpec::default() };
        let g = GridSpec::flat(vec![0.1], vec![vec![0.5]], q);
        assert!(matches!(kernel_continuum(&g, &b2(0.3)), Err(Error::CutoffTooSmall { .. })));
    }

    #[test]
    fn coincident_needs_declared_cutoff() {
        let q = QuadratureSpec { cutoff: 50.0, ..QuadratureSpec::default() };
        let mut g = GridSpec::flat(vec![0.0], vec![vec![0.0]], q);
        assert_eq!(kernel_continuum(&g, &b2(0.0)).unwrap_err(), Error::Coincident);
        g.regularized = true;
        let k = kernel_continuum(&g, &b2(0.0)).unwrap();
        // (2π)^{-1} ∫_{-50}^{50} dk / (2√(k²+1)) = asinh(50)/(2π)
        assert!((k.values[0].re - 50f64.asinh() / (2.0 * PI)).abs() < 1e-12);
    }
}
