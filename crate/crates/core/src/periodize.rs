//! Time-periodized (cylinder) and fully compactified (torus) kernels.
//!
//! Per spatial mode the cylinder kernel has three independent evaluations:
//! the two-branch closed form, the truncated image sum of flat kernels, and
//! the truncated Matsubara sum. Mode-summed kernels reuse the flat-space
//! quadrature (continuum) or a momentum lattice (torus).

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ensure, ensure_finite, Error, Result};
use crate::kernels::{mode_sum, GridSpec, Geometry, KernelKind, SampledKernel};
use crate::linalg::{CMatrix, GramReport};
use crate::modes::{ModeSet, SpatialLattice};
use crate::quad::{QuadratureSpec, Rule};
use crate::rp::{bandwidth, pairing_on, spatial_cutoff, Side, SpectralSpec};
use crate::symbols::{dot, verify_symbol_bounds, BoostSpec, BoundReport, Momentum};
use crate::testfn::{Half, TestFunctionFamily};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompactSpec {
    pub beta: f64,
    /// Spatial circumferences; `None` keeps space non-compact.
    pub lengths: Option<Vec<f64>>,
    pub boost: BoostSpec,
}

impl CompactSpec {
    pub fn new(beta: f64, lengths: Option<Vec<f64>>, boost: BoostSpec) -> Result<Self> {
        let s = CompactSpec { beta, lengths, boost };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_finite("beta", &[self.beta])?;
        ensure(self.beta > 0.0, || format!("beta must be positive, got {}", self.beta))?;
        if let Some(l) = &self.lengths {
            ensure(l.len() + 1 == self.boost.dim(), || "one circumference per spatial axis".into())?;
            ensure(l.iter().all(|&x| x > 0.0 && x.is_finite()), || "circumferences must be positive".into())?;
        }
        Ok(())
    }
}

/// `E_n = 2πn/β` for `|n| ≤ max_index`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatsubaraLattice {
    pub beta: f64,
    pub max_index: usize,
}

impl MatsubaraLattice {
    pub fn new(beta: f64, max_index: usize) -> Result<Self> {
        ensure(beta > 0.0 && beta.is_finite(), || format!("beta must be positive, got {beta}"))?;
        Ok(MatsubaraLattice { beta, max_index })
    }

    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.beta
    }

    pub fn energy(&self, n: i64) -> f64 {
        n as f64 * self.spacing()
    }

    pub fn values(&self) -> Vec<f64> {
        let n = self.max_index as i64;
        (-n..=n).map(|i| self.energy(i)).collect()
    }

    pub fn len(&self) -> usize {
        2 * self.max_index + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Nodes `E_n` with weights `2π/β`, so that `Σ w g(E)/(2π) = (1/β)Σ g(E)`.
    pub fn rule(&self) -> Rule {
        let nodes = self.values();
        let weights = vec![self.spacing(); nodes.len()];
        Rule { nodes, weights }
    }

    /// Whether `energy` sits on the lattice up to rounding.
    pub fn contains(&self, energy: f64) -> bool {
        let n = energy / self.spacing();
        (n - n.round()).abs() <= 1e-9 * n.abs().max(1.0)
    }
}

/// `μ`, `δ = k·v` and `μ± = μ ± δ` of one spatial mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeRates {
    pub mu: f64,
    pub delta: f64,
    pub mu_plus: f64,
    pub mu_minus: f64,
}

impl ModeRates {
    pub fn new(k: &[f64], b: &BoostSpec) -> Self {
        let mu = (dot(k, k) + b.mass() * b.mass()).sqrt();
        let delta = dot(k, b.velocity());
        ModeRates { mu, delta, mu_plus: mu + delta, mu_minus: mu - delta }
    }

    pub fn rate(&self, side: Side) -> f64 {
        match side {
            Side::Plus => self.mu_plus,
            Side::Minus => self.mu_minus,
        }
    }
}

/// `e^{-x}/(1 - e^{-x})`; zero once `e^{-x}` underflows.
pub fn bose(x: f64) -> f64 {
    1.0 / x.exp_m1()
}

/// `1/(1 - e^{-x})`.
fn one_plus_bose(x: f64) -> f64 {
    -1.0 / (-x).exp_m1()
}

/// `ρ±(k) = e^{-βμ±}/(1 - e^{-βμ±})`.
pub fn rho_factor(k: &[f64], spec: &CompactSpec, side: Side) -> Result<f64> {
    ensure(k.len() + 1 == spec.boost.dim(), || "momentum dimension mismatch".into())?;
    ensure_finite("momentum", k)?;
    Ok(bose(spec.beta * ModeRates::new(k, &spec.boost).rate(side)))
}

/// `(e^{βm√(1-v²)} - 1)^{-1}`, the uniform bound on `ρ±`.
pub fn rho_bound(spec: &CompactSpec) -> f64 {
    bose(spec.beta * spec.boost.gap())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RhoReport {
    pub max_plus: f64,
    pub max_minus: f64,
    pub bound: f64,
    pub pass: bool,
}

/// Largest `ρ±` over a mode set against [`rho_bound`].
pub fn rho_report(modes: &ModeSet, spec: &CompactSpec) -> Result<RhoReport> {
    modes.check_boost(&spec.boost)?;
    let mut max_plus = 0.0f64;
    let mut max_minus = 0.0f64;
    for m in 0..modes.len() {
        let r = ModeRates::new(modes.momentum(m), &spec.boost);
        max_plus = max_plus.max(bose(spec.beta * r.mu_plus));
        max_minus = max_minus.max(bose(spec.beta * r.mu_minus));
    }
    let bound = rho_bound(spec);
    let tol = 1e-14 * bound;
    Ok(RhoReport { max_plus, max_minus, bound, pass: max_plus <= bound + tol && max_minus <= bound + tol })
}

/// Flat per-mode factor `e^{-μ|t| + δt}/(2μ)`.
fn flat_mode(t: f64, r: &ModeRates) -> f64 {
    (-r.mu * t.abs() + r.delta * t).exp() / (2.0 * r.mu)
}

/// Closed two-branch form of the cylinder kernel for one mode, at
/// `ξ = t - t'`. Periodic in `ξ` with period `β`.
pub fn cylinder_mode_closed(xi: f64, k: &[f64], spec: &CompactSpec) -> f64 {
    closed_rates(xi, &ModeRates::new(k, &spec.boost), spec.beta)
}

fn closed_rates(xi: f64, r: &ModeRates, beta: f64) -> f64 {
    let s = xi.rem_euclid(beta);
    let forward = (-s * r.mu_minus).exp() * one_plus_bose(beta * r.mu_minus);
    let backward = (-(beta - s) * r.mu_plus).exp() * one_plus_bose(beta * r.mu_plus);
    (forward + backward) / (2.0 * r.mu)
}

/// The `v = 0` cylinder factor `cosh(μ(β/2 - |ξ|))/(2μ sinh(βμ/2))`.
pub fn static_mode_closed(xi: f64, mu: f64, beta: f64) -> f64 {
    let s = xi.rem_euclid(beta);
    ((-s * mu).exp() + (-(beta - s) * mu).exp()) * one_plus_bose(beta * mu) / (2.0 * mu)
}

/// Image sum `Σ_{|n| ≤ n_max} D(ξ + nβ)` for one mode, with `ξ` first
/// folded into `(-β, β)`. Also returns the tail bound
/// `2ρ̄ e^{-(n_max-1)βm√(1-v²)}/(2μ)`, `ρ̄` from [`rho_bound`].
pub fn cylinder_mode_winding(xi: f64, k: &[f64], spec: &CompactSpec, n_max: usize) -> (f64, f64) {
    let r = ModeRates::new(k, &spec.boost);
    let beta = spec.beta;
    let x = xi % beta;
    let n = n_max as i64;
    // small images first
    let mut sum = 0.0;
    for j in (1..=n).rev() {
        sum += flat_mode(x + j as f64 * beta, &r) + flat_mode(x - j as f64 * beta, &r);
    }
    sum += flat_mode(x, &r);
    let tail = 2.0 * rho_bound(spec) * (-(n_max as f64 - 1.0) * beta * spec.boost.gap()).exp() / (2.0 * r.mu);
    (sum, tail)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Acceleration {
    None,
    /// Sum only `S(E) - S₀(E)` and add the `v = 0` part in closed form.
    StaticSubtraction,
}

/// `(1/β) Σ_{|n| ≤ N} e^{iE_nξ}/((E_n + iδ)² + μ²)` for one mode.
pub fn cylinder_mode_matsubara(
    xi: f64,
    k: &[f64],
    spec: &CompactSpec,
    lattice: &MatsubaraLattice,
    accel: Acceleration,
) -> Result<Complex64> {
    ensure(lattice.beta == spec.beta, || "lattice and spec disagree on beta".into())?;
    let r = ModeRates::new(k, &spec.boost);
    Ok(matsubara_rates(xi, &r, lattice, accel))
}

fn matsubara_rates(xi: f64, r: &ModeRates, lattice: &MatsubaraLattice, accel: Acceleration) -> Complex64 {
    let mu2 = r.mu * r.mu;
    let term = |e: f64| {
        let z = Complex64::new(e, r.delta);
        let full = (z * z + mu2).inv();
        let s = match accel {
            Acceleration::None => full,
            Acceleration::StaticSubtraction => full - 1.0 / (e * e + mu2),
        };
        Complex64::from_polar(1.0, e * xi) * s
    };
    let mut sum = Complex64::new(0.0, 0.0);
    for n in (1..=lattice.max_index as i64).rev() {
        let e = lattice.energy(n);
        sum += term(e) + term(-e);
    }
    sum += term(0.0);
    sum /= lattice.beta;
    if accel == Acceleration::StaticSubtraction {
        sum += static_mode_closed(xi, r.mu, lattice.beta);
    }
    sum
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RouteAgreement {
    pub beta: f64,
    pub velocity: Vec<f64>,
    pub n_max: usize,
    pub matsubara_index: usize,
    pub min_separation: f64,
    pub closed_vs_winding: f64,
    pub closed_vs_matsubara: f64,
    pub winding_vs_matsubara: f64,
    pub max_tail_bound: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Three-way comparison of the per-mode routes at every `(ξ, k)`.
pub fn compare_routes(
    spec: &CompactSpec,
    xis: &[f64],
    momenta: &[Vec<f64>],
    n_max: usize,
    lattice: &MatsubaraLattice,
    tolerance: f64,
) -> Result<RouteAgreement> {
    ensure(!xis.is_empty() && !momenta.is_empty(), || "empty comparison set".into())?;
    let mut cw = 0.0f64;
    let mut cm = 0.0f64;
    let mut wm = 0.0f64;
    let mut tail = 0.0f64;
    let mut sep = f64::INFINITY;
    for &xi in xis {
        let s = xi.rem_euclid(spec.beta);
        sep = sep.min(s.min(spec.beta - s));
        for k in momenta {
            ensure(k.len() + 1 == spec.boost.dim(), || "momentum dimension mismatch".into())?;
            let c = cylinder_mode_closed(xi, k, spec);
            let (w, t) = cylinder_mode_winding(xi, k, spec, n_max);
            let m = cylinder_mode_matsubara(xi, k, spec, lattice, Acceleration::StaticSubtraction)?;
            cw = cw.max((c - w).abs());
            cm = cm.max((m - c).norm());
            wm = wm.max((m - w).norm());
            tail = tail.max(t);
        }
    }
    Ok(RouteAgreement {
        beta: spec.beta,
        velocity: spec.boost.velocity().to_vec(),
        n_max,
        matsubara_index: lattice.max_index,
        min_separation: sep,
        closed_vs_winding: cw,
        closed_vs_matsubara: cm,
        winding_vs_matsubara: wm,
        max_tail_bound: tail,
        tolerance,
        pass: cw <= tolerance && cm <= tolerance && wm <= tolerance,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "route", rename_all = "snake_case")]
pub enum CylinderRoute {
    Closed,
    Winding { n_max: usize },
    Matsubara { max_index: usize, accelerated: bool },
}

/// Distance of `ξ` to the nearest multiple of `β`.
fn circle_distance(xi: f64, beta: f64) -> f64 {
    let s = xi.rem_euclid(beta);
    s.min(beta - s)
}

fn check_compact_grid(grid: &GridSpec, b: &BoostSpec, beta: Option<f64>, k_tail: f64) -> Result<()> {
    let at_origin = |x: &Vec<f64>| x.iter().all(|&c| c == 0.0);
    let dist = |t: f64| match beta {
        Some(beta) => circle_distance(t, beta),
        None => t.abs(),
    };
    let coincident = grid.time_points.iter().any(|&t| dist(t) == 0.0) && grid.space_points.iter().any(at_origin);
    if coincident && !grid.regularized {
        return Err(Error::Coincident);
    }
    if !grid.regularized {
        let d = grid.time_points.iter().fold(f64::INFINITY, |m, &t| m.min(dist(t)));
        let tail = (-d * ((k_tail * k_tail + b.mass() * b.mass()).sqrt() - b.speed() * k_tail)).exp();
        if tail > grid.quadrature.tolerance {
            return Err(Error::CutoffTooSmall { tail, tol: grid.quadrature.tolerance });
        }
    }
    Ok(())
}

/// Cylinder kernel `D^c(ξ, x)` on a `TimeCircle` grid, mode-summed over the
/// continuum quadrature.
pub fn cylinder_kernel(grid: &GridSpec, b: &BoostSpec, route: CylinderRoute) -> Result<SampledKernel> {
    grid.validate()?;
    crate::kernels::check_boost(grid, b)?;
    let beta = match grid.geometry {
        Geometry::TimeCircle { beta } => beta,
        _ => return Err(Error::GridMismatch("cylinder kernel needs a time-circle grid".into())),
    };
    check_compact_grid(grid, b, Some(beta), grid.quadrature.cutoff)?;
    let modes = ModeSet::continuum(b.dim() - 1, &grid.quadrature)?;
    let rates: Vec<ModeRates> = (0..modes.len()).map(|m| ModeRates::new(modes.momentum(m), b)).collect();
    let spec = CompactSpec::new(beta, None, b.clone())?;
    let ts = &grid.time_points;
    let lattice = match route {
        CylinderRoute::Matsubara { max_index, .. } => Some(MatsubaraLattice::new(beta, max_index)?),
        _ => None,
    };
    let factor = |i: usize, m: usize| -> Complex64 {
        let r = &rates[m];
        match route {
            CylinderRoute::Closed => closed_rates(ts[i], r, beta).into(),
            CylinderRoute::Winding { n_max } => cylinder_mode_winding(ts[i], modes.momentum(m), &spec, n_max).0.into(),
            CylinderRoute::Matsubara { accelerated, .. } => {
                let a = if accelerated { Acceleration::StaticSubtraction } else { Acceleration::None };
                matsubara_rates(ts[i], r, lattice.as_ref().expect("lattice"), a)
            }
        }
    };
    let values = mode_sum(&modes, ts.len(), factor, &grid.space_points);
    Ok(SampledKernel { grid: grid.clone(), values, boost: b.clone(), kind: KernelKind::D })
}

/// Lattice cutoffs `⌈Kℓ_j/2π⌉` for a momentum cutoff `K`.
pub fn lattice_for_cutoff(lengths: &[f64], cutoff: f64) -> Result<SpatialLattice> {
    let cutoffs = lengths.iter().map(|&l| (cutoff * l / (2.0 * PI)).ceil() as usize).collect();
    SpatialLattice::new(lengths.to_vec(), cutoffs)
}

/// Per-mode thermal factor of the torus kernel `D^c_{side}` at `ξ = t - t'`
/// in `(-β, β)`, as printed: for `ξ > 0` the decaying branch carries
/// `μ∓` and the wrapped branch `μ±`, mirrored for `ξ < 0`. At `ξ = 0` the
/// two branches agree and are counted once.
pub fn torus_mode_factor(xi: f64, r: &ModeRates, beta: Option<f64>, side: Side) -> f64 {
    let (same, other) = match side {
        Side::Plus => (r.mu_plus, r.mu_minus),
        Side::Minus => (r.mu_minus, r.mu_plus),
    };
    let (decay, wrap) = if xi >= 0.0 { (other, same) } else { (same, other) };
    let u = xi.abs();
    let v = match beta {
        Some(beta) => {
            (-u * decay).exp() * one_plus_bose(beta * decay) + (-(beta - u) * wrap).exp() * one_plus_bose(beta * wrap)
        }
        None => (-u * decay).exp(),
    };
    v / (2.0 * r.mu)
}

/// Torus kernel `(1/Λ) Σ_k F_±(ξ, k) e^{-ik·x}` on a `FullTorus` grid (or a
/// `SpaceTorus` grid, where time stays flat). The lattice cutoff per axis
/// comes from `grid.quadrature.cutoff`.
pub fn torus_kernel(grid: &GridSpec, b: &BoostSpec, side: Side) -> Result<SampledKernel> {
    grid.validate()?;
    crate::kernels::check_boost(grid, b)?;
    let (beta, lengths) = match &grid.geometry {
        Geometry::FullTorus { beta, lengths } => (Some(*beta), lengths),
        Geometry::SpaceTorus { lengths } => (None, lengths),
        _ => return Err(Error::GridMismatch("torus kernel needs a torus grid".into())),
    };
    ensure(lengths.len() == grid.spatial_dim(), || "one circumference per spatial axis".into())?;
    let lattice = lattice_for_cutoff(lengths, grid.quadrature.cutoff)?;
    let k_tail = lattice
        .lengths()
        .iter()
        .zip(lattice.cutoffs())
        .map(|(&l, &n)| 2.0 * PI * (n as f64 + 1.0) / l)
        .fold(f64::INFINITY, f64::min);
    check_compact_grid(grid, b, beta, k_tail)?;
    let modes = ModeSet::lattice(&lattice);
    let rates: Vec<ModeRates> = (0..modes.len()).map(|m| ModeRates::new(modes.momentum(m), b)).collect();
    let ts = &grid.time_points;
    // e^{-ik·x} summed as e^{ik·x} over the negated mode
    let factor = |i: usize, m: usize| Complex64::from(torus_mode_factor(ts[i], &rates[modes.negated(m)], beta, side));
    let values = mode_sum(&modes, ts.len(), factor, &grid.space_points);
    Ok(SampledKernel { grid: grid.clone(), values, boost: b.clone(), kind: KernelKind::D })
}

/// Symbol bounds on a Matsubara sample set. Energies must lie on `2πℤ/β`
/// (and momenta on the spatial lattice when `spec.lengths` is set). The
/// supremum sequence runs along lattice energies near `-10, -100, -1000`
/// with matched `k∥ = -E cosh η` and must come within 2% of `sinh η`.
pub fn verify_compact_bounds(samples: &[Momentum], spec: &CompactSpec) -> Result<BoundReport> {
    spec.validate()?;
    let lat = MatsubaraLattice::new(spec.beta, 0)?;
    for s in samples {
        ensure(lat.contains(s.energy), || format!("energy {} is off the Matsubara lattice", s.energy))?;
        if let Some(l) = &spec.lengths {
            for (k, len) in s.kvec.iter().zip(l) {
                let n = k * len / (2.0 * PI);
                ensure((n - n.round()).abs() <= 1e-9 * n.abs().max(1.0), || format!("momentum {k} is off the lattice"))?;
            }
        }
    }
    let mut report = verify_symbol_bounds(samples, &spec.boost)?;
    let b = &spec.boost;
    let ch = b.cosh_eta();
    let sh = b.sinh_eta();
    let strict = b.rapidity() > 0.0;
    let dir = b.direction().to_vec();
    report.sup_sequence = [10.0, 100.0, 1000.0]
        .iter()
        .map(|&target| {
            let e = -lat.energy((target / lat.spacing()).round().max(1.0) as i64);
            let mut kvec: Vec<f64> = dir.iter().map(|d| -e * ch * d).collect();
            if let Some(l) = &spec.lengths {
                for (k, len) in kvec.iter_mut().zip(l) {
                    let step = 2.0 * PI / len;
                    *k = (*k / step).round() * step;
                }
            }
            let kpar = dot(&kvec, &dir);
            let kperp_sq = (dot(&kvec, &kvec) - kpar * kpar).max(0.0);
            let s = crate::symbols::bundle(e, kpar, kperp_sq, b.mass(), b.speed());
            (e, (s.l_tilde / s.k_tilde).abs())
        })
        .collect();
    let last = report.sup_sequence.last().map(|p| p.1).unwrap_or(0.0);
    let below = report.sup_sequence.iter().all(|p| crate::symbols::holds(p.1, sh, strict));
    report.sup_relative_gap = if sh > 0.0 { (sh - last) / sh } else { 0.0 };
    report.pass = report.violations.is_empty() && below && report.sup_relative_gap < 0.02;
    Ok(report)
}

/// Ratio of the sharp-time `H_{-1}` norm on the circle to the `H_{-1/2}`
/// norm, for one mode: `(1/β)Σ_E 1/(E²+μ²)` against `1/(2μ)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmbeddingReport {
    pub beta: f64,
    pub mu: f64,
    pub lattice_sum: f64,
    pub integral: f64,
    pub ratio: f64,
    /// `coth(βμ/2)`, the exact value of the untruncated ratio.
    pub exact_ratio: f64,
}

pub fn sharp_time_embedding(beta: f64, mu: f64, max_index: usize) -> Result<EmbeddingReport> {
    ensure(mu > 0.0, || "mode energy must be positive".into())?;
    let lat = MatsubaraLattice::new(beta, max_index)?;
    let mut sum = 0.0;
    for n in (1..=max_index as i64).rev() {
        let e = lat.energy(n);
        sum += 2.0 / (e * e + mu * mu);
    }
    sum += 1.0 / (mu * mu);
    sum /= beta;
    let integral = 1.0 / (2.0 * mu);
    Ok(EmbeddingReport {
        beta,
        mu,
        lattice_sum: sum,
        integral,
        ratio: sum / integral,
        exact_ratio: 1.0 / (0.5 * beta * mu).tanh(),
    })
}

fn compact_tables(fam: &TestFunctionFamily, spec: &CompactSpec, spectral: &SpectralSpec) -> Result<(Rule, ModeSet)> {
    spec.validate()?;
    ensure(fam.half() == Half::PositiveTime, || "compact Gram needs a positive-time family".into())?;
    ensure(fam.spatial_dim() + 1 == spec.boost.dim(), || "family and boost differ in dimension".into())?;
    let (lo, hi) = fam
        .members()
        .iter()
        .map(|f| f.axis_support(0))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), (l, h)| (a.min(l), b.max(h)));
    if lo < 0.0 || hi >= 0.5 * spec.beta {
        return Err(Error::Support(format!("time support [{lo}, {hi}] leaves (0, beta/2)")));
    }
    let e_cut = match spectral.energy_cutoff {
        Some(c) => c,
        None => bandwidth(fam, 0)?,
    };
    let k_cut = match spectral.momentum_cutoff {
        Some(c) => c,
        None => spatial_cutoff(fam)?,
    };
    let lattice = MatsubaraLattice::new(spec.beta, (e_cut * spec.beta / (2.0 * PI)).ceil() as usize)?;
    let modes = match &spec.lengths {
        Some(l) => ModeSet::lattice(&lattice_for_cutoff(l, k_cut)?),
        None => {
            let q = QuadratureSpec {
                cutoff: k_cut,
                panel_width: spectral.panel_width,
                order: spectral.order,
                tolerance: 1e-12,
            };
            ModeSet::continuum(fam.spatial_dim(), &q)?
        }
    };
    Ok((lattice.rule(), modes))
}

/// `⟨f_i, θD^c f_j⟩` from the Matsubara representation of `D^c`.
pub fn compact_classical_gram(fam: &TestFunctionFamily, spec: &CompactSpec, spectral: &SpectralSpec) -> Result<CMatrix> {
    let (energy, modes) = compact_tables(fam, spec, spectral)?;
    Ok(pairing_on(fam, KernelKind::ThetaD, &spec.boost, &energy, &modes, false)?.pairing)
}

/// Same Gram from the reflected kernel in factorized form,
/// `Σ_k (1/2μ)[(1+ρ₊) conj(A_i)A_j + ρ₋ conj(B_i)B_j]` with
/// `A = ∫e^{-tμ₊}f dt` and `B = ∫e^{tμ₋}f dt`.
pub fn compact_quantized_gram(fam: &TestFunctionFamily, spec: &CompactSpec, spectral: &SpectralSpec) -> Result<CMatrix> {
    let (_, modes) = compact_tables(fam, spec, spectral)?;
    let n = fam.len();
    let mut g = CMatrix::zeros(n, n);
    for m in 0..modes.len() {
        let k = modes.momentum(m);
        let r = ModeRates::new(k, &spec.boost);
        let project = |rate: f64| -> Vec<Complex64> {
            fam.members()
                .iter()
                .map(|f| {
                    f.terms
                        .iter()
                        .map(|t| t.amp * t.time.laplace(Complex64::new(rate, 0.0)) * t.spatial_fourier(k))
                        .sum()
                })
                .collect()
        };
        let a = project(r.mu_plus);
        let bvec = project(-r.mu_minus);
        let wa = modes.weight(m) * one_plus_bose(spec.beta * r.mu_plus) / (2.0 * r.mu);
        let wb = modes.weight(m) * bose(spec.beta * r.mu_minus) / (2.0 * r.mu);
        for i in 0..n {
            for j in 0..n {
                g[(i, j)] += a[i].conj() * a[j] * wa + bvec[i].conj() * bvec[j] * wb;
            }
        }
    }
    Ok(g)
}

/// Reflection-positivity Gram on the cylinder, members supported in
/// `(0, β/2)`.
pub fn gram_reflection_compact(
    fam: &TestFunctionFamily,
    spec: &CompactSpec,
    spectral: &SpectralSpec,
    tolerance: f64,
) -> Result<GramReport> {
    let m = compact_classical_gram(fam, spec, spectral)?;
    Ok(GramReport::new(&m, tolerance, "theta_compact", spec.boost.velocity().to_vec(), fam.seed()))
}
