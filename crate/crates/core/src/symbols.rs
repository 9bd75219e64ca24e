//! Momentum-space symbols of the boosted free field.
//!
//! Conventions: symbols are the bare rational functions
//! `1/((E + iδ)² + μ²)` with `μ = sqrt(|k|² + m²)` and `δ = k·v`. No factors
//! of 2π appear here; they live in the Fourier transforms of `kernels`.
//! Rapidity is `η = artanh|v|`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{ensure, ensure_finite, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoostSpec {
    mass: f64,
    velocity: Vec<f64>,
    direction: Vec<f64>,
    rapidity: f64,
    dim: usize,
}

impl BoostSpec {
    /// Spacetime dimension is `velocity.len() + 1`.
    pub fn new(mass: f64, velocity: Vec<f64>) -> Result<Self> {
        ensure_finite("mass", &[mass])?;
        ensure_finite("velocity", &velocity)?;
        ensure(mass > 0.0, || format!("mass must be positive, got {mass}"))?;
        ensure(!velocity.is_empty(), || "dimension must be at least 2".into())?;
        let speed = velocity.iter().map(|x| x * x).sum::<f64>().sqrt();
        if speed >= 1.0 {
            return Err(Error::Superluminal(speed));
        }
        let direction = if speed > 0.0 {
            velocity.iter().map(|x| x / speed).collect()
        } else {
            let mut e = vec![0.0; velocity.len()];
            e[0] = 1.0;
            e
        };
        let dim = velocity.len() + 1;
        Ok(BoostSpec {
            mass,
            velocity,
            direction,
            rapidity: speed.atanh(),
            dim,
        })
    }

    /// Boost along the first spatial axis; `v` may be negative.
    pub fn along_axis(mass: f64, dim: usize, v: f64) -> Result<Self> {
        ensure(dim >= 2, || format!("dimension must be at least 2, got {dim}"))?;
        let mut vel = vec![0.0; dim - 1];
        vel[0] = v;
        Self::new(mass, vel)
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn velocity(&self) -> &[f64] {
        &self.velocity
    }

    pub fn direction(&self) -> &[f64] {
        &self.direction
    }

    pub fn rapidity(&self) -> f64 {
        self.rapidity
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn speed(&self) -> f64 {
        self.rapidity.tanh()
    }

    pub fn cosh_eta(&self) -> f64 {
        let v = self.speed();
        1.0 / (1.0 - v * v).sqrt()
    }

    pub fn sinh_eta(&self) -> f64 {
        self.speed() * self.cosh_eta()
    }

    /// `m·sqrt(1 - v²)`, the lower bound of both `μ±`.
    pub fn gap(&self) -> f64 {
        let v = self.speed();
        self.mass * (1.0 - v * v).sqrt()
    }

    /// Same mass and dimension, velocity reversed.
    pub fn reversed(&self) -> Self {
        Self::new(self.mass, self.velocity.iter().map(|x| -x).collect()).expect("valid boost")
    }

    pub fn with_velocity(&self, velocity: Vec<f64>) -> Result<Self> {
        Self::new(self.mass, velocity)
    }

    /// Orthonormal basis of the complement of `direction` (d−2 vectors).
    pub fn transverse_basis(&self) -> Vec<Vec<f64>> {
        let n = self.direction.len();
        let mut basis: Vec<Vec<f64>> = vec![self.direction.clone()];
        for j in 0..n {
            if basis.len() == n {
                break;
            }
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            for b in &basis {
                let p: f64 = dot(&e, b);
                for (ei, bi) in e.iter_mut().zip(b) {
                    *ei -= p * bi;
                }
            }
            let norm = dot(&e, &e).sqrt();
            if norm > 1e-8 {
                e.iter_mut().for_each(|x| *x /= norm);
                basis.push(e);
            }
        }
        basis.remove(0);
        basis
    }

    /// Build a momentum with its transverse split relative to this boost.
    pub fn momentum(&self, energy: f64, kvec: Vec<f64>) -> Result<Momentum> {
        ensure_finite("momentum", &[energy])?;
        ensure_finite("momentum", &kvec)?;
        ensure(kvec.len() + 1 == self.dim, || {
            format!("momentum has {} spatial components, expected {}", kvec.len(), self.dim - 1)
        })?;
        let kpar = dot(&kvec, &self.direction);
        let kperp = self.transverse_basis().iter().map(|e| dot(&kvec, e)).collect();
        Ok(Momentum {
            energy,
            kvec,
            kperp,
            kpar,
        })
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Momentum {
    pub energy: f64,
    pub kvec: Vec<f64>,
    pub kperp: Vec<f64>,
    /// Component along the boost direction.
    pub kpar: f64,
}

impl Momentum {
    pub fn kperp_sq(&self) -> f64 {
        dot(&self.kperp, &self.kperp)
    }

    /// Residual of |kperp|² + kpar² = |k|².
    pub fn split_residual(&self) -> f64 {
        (self.kperp_sq() + self.kpar * self.kpar - dot(&self.kvec, &self.kvec)).abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SymbolBundle {
    pub mu: f64,
    pub delta: f64,
    pub mu_plus: f64,
    pub mu_minus: f64,
    pub d_tilde: Complex64,
    pub k_tilde: f64,
    pub l_tilde: f64,
    pub sigma_tilde: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpatialSymbolBundle {
    pub nu: f64,
    pub nu_plus: f64,
    pub nu_minus: f64,
    pub k_plus: f64,
    pub k_minus: f64,
}

/// `μ(k)` from the parallel component and the transverse square.
#[inline]
pub fn mu(kpar: f64, kperp_sq: f64, mass: f64) -> f64 {
    (kpar * kpar + kperp_sq + mass * mass).sqrt()
}

/// Symbol evaluation without validation. `speed` is the signed projection
/// of v on the boost direction, so `δ = speed·kpar`.
pub fn bundle(energy: f64, kpar: f64, kperp_sq: f64, mass: f64, speed: f64) -> SymbolBundle {
    let mu = mu(kpar, kperp_sq, mass);
    let delta = speed * kpar;
    let e2 = energy * energy;
    let den = (e2 + (mu - delta).powi(2)) * (e2 + (mu + delta).powi(2));
    let k_tilde = (e2 + mu * mu - delta * delta) / den;
    let l_tilde = -2.0 * energy * delta / den;
    let d_tilde = Complex64::new(k_tilde, l_tilde);
    SymbolBundle {
        mu,
        delta,
        mu_plus: mu + delta,
        mu_minus: mu - delta,
        d_tilde,
        k_tilde,
        l_tilde,
        sigma_tilde: d_tilde.sqrt(),
    }
}

/// Direct evaluation of `1/((E + iδ)² + μ²)`.
#[inline]
pub fn propagator(energy: f64, kpar: f64, kperp_sq: f64, mass: f64, speed: f64) -> Complex64 {
    let mu2 = kpar * kpar + kperp_sq + mass * mass;
    let z = Complex64::new(energy, speed * kpar);
    (z * z + mu2).inv()
}

fn checked(k: &Momentum, b: &BoostSpec) -> Result<SymbolBundle> {
    ensure_finite("momentum", &[k.energy])?;
    ensure_finite("momentum", &k.kvec)?;
    ensure(k.kvec.len() + 1 == b.dim(), || "momentum dimension mismatch".into())?;
    let kpar = dot(&k.kvec, b.direction());
    let ksq = dot(&k.kvec, &k.kvec);
    let kperp_sq = (ksq - kpar * kpar).max(0.0);
    Ok(bundle(k.energy, kpar, kperp_sq, b.mass(), b.speed()))
}

/// One-particle energies `μ`, `δ`, `μ± = μ ± δ` (the full bundle is filled).
pub fn one_particle_symbols(k: &Momentum, b: &BoostSpec) -> Result<SymbolBundle> {
    checked(k, b)
}

pub fn propagator_symbol(k: &Momentum, b: &BoostSpec) -> Result<Complex64> {
    let s = checked(k, b)?;
    let z = Complex64::new(k.energy, s.delta);
    Ok((z * z + s.mu * s.mu).inv())
}

/// Hermitian and skew parts `(K̃, L̃)` with `D̃ = K̃ + iL̃`.
pub fn split_symbols(k: &Momentum, b: &BoostSpec) -> Result<(f64, f64)> {
    let s = checked(k, b)?;
    Ok((s.k_tilde, s.l_tilde))
}

/// Principal square root of the propagator symbol (positive real part).
pub fn sigma_symbol(k: &Momentum, b: &BoostSpec) -> Result<Complex64> {
    Ok(checked(k, b)?.sigma_tilde)
}

pub fn spatial_symbols(energy: f64, kperp: &[f64], b: &BoostSpec) -> Result<SpatialSymbolBundle> {
    ensure_finite("energy", &[energy])?;
    ensure_finite("kperp", kperp)?;
    ensure(kperp.len() + 2 == b.dim(), || "transverse momentum dimension mismatch".into())?;
    Ok(spatial_bundle(energy, dot(kperp, kperp), b.mass(), b.speed()))
}

pub fn spatial_bundle(energy: f64, kperp_sq: f64, mass: f64, speed: f64) -> SpatialSymbolBundle {
    let c2 = 1.0 / (1.0 - speed * speed);
    let nu = (energy * energy + (kperp_sq + mass * mass) / c2).sqrt();
    let et = energy * speed;
    SpatialSymbolBundle {
        nu,
        nu_plus: c2 * (nu + et),
        nu_minus: c2 * (nu - et),
        k_plus: (nu - et) * c2,
        k_minus: (-nu - et) * c2,
    }
}

impl SpatialSymbolBundle {
    /// Largest coefficient mismatch between `(k₁ − ik₊)(k₁ − ik₋)/cosh²η`
    /// and `(E + iδ)² + μ²` as polynomials in `k₁`.
    pub fn factorization_residual(&self, energy: f64, kperp_sq: f64, b: &BoostSpec) -> f64 {
        let v = b.speed();
        let c2 = b.cosh_eta().powi(2);
        let m = b.mass();
        let lhs = [
            Complex64::new(-self.k_plus * self.k_minus / c2, 0.0),
            Complex64::new(0.0, -(self.k_plus + self.k_minus) / c2),
            Complex64::new(1.0 / c2, 0.0),
        ];
        let rhs = [
            Complex64::new(energy * energy + kperp_sq + m * m, 0.0),
            Complex64::new(0.0, 2.0 * energy * v),
            Complex64::new(1.0 - v * v, 0.0),
        ];
        lhs.iter()
            .zip(&rhs)
            .map(|(a, b)| (a - b).norm() / (1.0 + b.norm()))
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundViolation {
    pub family: String,
    pub sample: usize,
    pub energy: f64,
    pub kvec: Vec<f64>,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub samples: usize,
    pub checks: usize,
    pub velocity: Vec<f64>,
    pub max_lk_ratio: f64,
    pub sinh_eta: f64,
    /// |L̃/K̃| along k∥ = |k| = −E·cosh η for E = −10, −100, −1000.
    pub sup_sequence: Vec<(f64, f64)>,
    pub sup_relative_gap: f64,
    pub violations: Vec<BoundViolation>,
    pub pass: bool,
}

const MARGIN: f64 = 1e-13;

/// `lhs < rhs` (strict) or `lhs ≤ rhs`, with a relative floating margin.
pub(crate) fn holds(lhs: f64, rhs: f64, strict: bool) -> bool {
    let scale = MARGIN * (lhs.abs() + rhs.abs());
    if strict {
        rhs - lhs >= scale
    } else {
        rhs - lhs >= -scale
    }
}

/// Ratio |L̃/K̃| on the extremal ray, in closed form `2E² sinh η / (2E² + m²)`.
pub fn extremal_ratio(energy: f64, b: &BoostSpec) -> f64 {
    let kpar = -energy * b.cosh_eta();
    let s = bundle(energy, kpar, 0.0, b.mass(), b.speed());
    (s.l_tilde / s.k_tilde).abs()
}

pub fn verify_symbol_bounds(samples: &[Momentum], b: &BoostSpec) -> Result<BoundReport> {
    ensure(!samples.is_empty(), || "empty sample set".into())?;
    let ch = b.cosh_eta();
    let sh = b.sinh_eta();
    let strict = b.rapidity() > 0.0;
    let mut violations = Vec::new();
    let mut checks = 0usize;
    let mut max_lk: f64 = 0.0;
    for (i, k) in samples.iter().enumerate() {
        let s = checked(k, b)?;
        let c = 1.0 / (k.energy * k.energy + s.mu * s.mu);
        let dabs = s.d_tilde.norm();
        let lk = (s.l_tilde / s.k_tilde).abs();
        max_lk = max_lk.max(lk);
        let tests: [(&str, f64, f64, bool); 9] = [
            ("a:K<=|D|", s.k_tilde, dabs, false),
            ("a:|D|<=coshK", dabs, ch * s.k_tilde, false),
            ("b:C/2cosh2<K", 0.5 * c / (ch * ch), s.k_tilde, true),
            ("b:K<cosh4C", s.k_tilde, ch.powi(4) * c, strict),
            ("c:|L/K|<sinh", lk, sh, strict),
            ("d:C/2cosh2<|D|", 0.5 * c / (ch * ch), dabs, true),
            ("d:|D|<cosh5C", dabs, ch.powi(5) * c, strict),
            ("K>0", 0.0, s.k_tilde, true),
            ("ReSigma>0", 0.0, s.sigma_tilde.re, true),
        ];
        for (name, lhs, rhs, st) in tests {
            checks += 1;
            if !holds(lhs, rhs, st) {
                violations.push(BoundViolation {
                    family: name.to_string(),
                    sample: i,
                    energy: k.energy,
                    kvec: k.kvec.clone(),
                    lhs,
                    rhs,
                });
            }
        }
    }
    let sup_sequence: Vec<(f64, f64)> = [-10.0, -100.0, -1000.0]
        .iter()
        .map(|&e| (e, extremal_ratio(e, b)))
        .collect();
    let last = sup_sequence.last().map(|p| p.1).unwrap_or(0.0);
    let increasing = sup_sequence.windows(2).all(|w| w[1].1 >= w[0].1);
    let below = sup_sequence.iter().all(|p| holds(p.1, sh, strict));
    let sup_relative_gap = if sh > 0.0 { (sh - last) / sh } else { 0.0 };
    let pass = violations.is_empty() && increasing && below && sup_relative_gap < 0.01;
    Ok(BoundReport {
        samples: samples.len(),
        checks,
        velocity: b.velocity().to_vec(),
        max_lk_ratio: max_lk,
        sinh_eta: sh,
        sup_sequence,
        sup_relative_gap,
        violations,
        pass,
    })
}
