//! Spatial momentum sets and functions stored by their Fourier coefficients.
//!
//! Fourier convention: `f̂(k) = ∫ f(x) e^{-ik·x} dx`. On a periodic box of
//! volume Λ, `f(x) = Λ⁻¹ Σ_k f̂(k) e^{ik·x}`; in the continuum the sum becomes
//! `(2π)^{-(d-1)} ∫ dk`. A [`ModeSet`] stores the momenta together with these
//! integration weights, so every inner product is `Σ w conj(a) b`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{ensure, ensure_finite, Error, Result};
use crate::quad::QuadratureSpec;
use crate::symbols::{dot, BoostSpec};

/// Momenta `2πn/ℓ` with `|n_j| ≤ cutoff_j` on a periodic box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpatialLattice {
    lengths: Vec<f64>,
    cutoffs: Vec<usize>,
}

impl SpatialLattice {
    pub fn new(lengths: Vec<f64>, cutoffs: Vec<usize>) -> Result<Self> {
        ensure_finite("lengths", &lengths)?;
        ensure(!lengths.is_empty(), || "lattice needs at least one axis".into())?;
        ensure(lengths.len() == cutoffs.len(), || {
            format!("{} lengths but {} cutoffs", lengths.len(), cutoffs.len())
        })?;
        ensure(lengths.iter().all(|&l| l > 0.0), || "lengths must be positive".into())?;
        Ok(SpatialLattice { lengths, cutoffs })
    }

    /// Same cutoff on every axis of a cubic box.
    pub fn cubic(dim: usize, length: f64, cutoff: usize) -> Result<Self> {
        Self::new(vec![length; dim], vec![cutoff; dim])
    }

    pub fn dim(&self) -> usize {
        self.lengths.len()
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn cutoffs(&self) -> &[usize] {
        &self.cutoffs
    }

    pub fn volume(&self) -> f64 {
        self.lengths.iter().product()
    }

    pub fn len(&self) -> usize {
        self.cutoffs.iter().map(|n| 2 * n + 1).product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Integer labels of mode `i`, lexicographic with the last axis fastest.
    pub fn label(&self, mut i: usize) -> Vec<i64> {
        let mut out = vec![0i64; self.dim()];
        for ax in (0..self.dim()).rev() {
            let w = 2 * self.cutoffs[ax] + 1;
            out[ax] = (i % w) as i64 - self.cutoffs[ax] as i64;
            i /= w;
        }
        out
    }

    pub fn index_of(&self, label: &[i64]) -> Option<usize> {
        if label.len() != self.dim() {
            return None;
        }
        let mut i = 0usize;
        for (ax, &n) in label.iter().enumerate() {
            let c = self.cutoffs[ax] as i64;
            if n.abs() > c {
                return None;
            }
            i = i * (2 * self.cutoffs[ax] + 1) + (n + c) as usize;
        }
        Some(i)
    }

    pub fn momentum(&self, i: usize) -> Vec<f64> {
        self.label(i)
            .iter()
            .zip(&self.lengths)
            .map(|(&n, &l)| 2.0 * PI * n as f64 / l)
            .collect()
    }

    /// Index of the mode with opposite momentum.
    pub fn negated(&self, i: usize) -> usize {
        self.len() - 1 - i
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModeKind {
    Continuum(QuadratureSpec),
    Lattice(SpatialLattice),
}

/// Momentum nodes with integration weights. Node `i` and node `len-1-i`
/// carry opposite momenta for both kinds.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSet {
    dim: usize,
    momenta: Vec<f64>,
    weights: Vec<f64>,
    kind: ModeKind,
    // nodes per axis of a continuum rule
    axis_len: usize,
}

impl ModeSet {
    /// Tensor Gauss–Legendre rule on `[-K, K]^dim`, weights include `(2π)^{-dim}`.
    pub fn continuum(dim: usize, q: &QuadratureSpec) -> Result<Self> {
        ensure(dim >= 1, || "spatial dimension must be at least 1".into())?;
        ensure(q.cutoff > 0.0 && q.panel_width > 0.0 && q.order > 0, || {
            "quadrature needs positive cutoff, panel width and order".into()
        })?;
        let rule = q.rule();
        let n = rule.len();
        let total = n.pow(dim as u32);
        let norm = (2.0 * PI).powi(-(dim as i32));
        let mut momenta = Vec::with_capacity(total * dim);
        let mut weights = Vec::with_capacity(total);
        for i in 0..total {
            let mut rem = i;
            let mut w = norm;
            let mut k = vec![0.0; dim];
            for ax in (0..dim).rev() {
                let j = rem % n;
                rem /= n;
                k[ax] = rule.nodes[j];
                w *= rule.weights[j];
            }
            momenta.extend(k);
            weights.push(w);
        }
        Ok(ModeSet {
            dim,
            momenta,
            weights,
            kind: ModeKind::Continuum(*q),
            axis_len: n,
        })
    }

    pub fn lattice(l: &SpatialLattice) -> Self {
        let w = 1.0 / l.volume();
        let mut momenta = Vec::with_capacity(l.len() * l.dim());
        for i in 0..l.len() {
            momenta.extend(l.momentum(i));
        }
        ModeSet {
            dim: l.dim(),
            momenta,
            weights: vec![w; l.len()],
            kind: ModeKind::Lattice(l.clone()),
            axis_len: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn momentum(&self, i: usize) -> &[f64] {
        &self.momenta[i * self.dim..(i + 1) * self.dim]
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn kind(&self) -> &ModeKind {
        &self.kind
    }

    pub fn as_lattice(&self) -> Option<&SpatialLattice> {
        match &self.kind {
            ModeKind::Lattice(l) => Some(l),
            ModeKind::Continuum(_) => None,
        }
    }

    pub fn negated(&self, i: usize) -> usize {
        self.len() - 1 - i
    }

    /// Index of the node with the first momentum component flipped.
    pub fn first_axis_reflected(&self, i: usize) -> usize {
        match &self.kind {
            ModeKind::Lattice(l) => {
                let mut lab = l.label(i);
                lab[0] = -lab[0];
                l.index_of(&lab).expect("symmetric lattice")
            }
            ModeKind::Continuum(_) => {
                let n = self.axis_len;
                let per = n.pow(self.dim as u32 - 1);
                let (a, rest) = (i / per, i % per);
                (n - 1 - a) * per + rest
            }
        }
    }

    /// `μ(k)` per node.
    pub fn energies(&self, mass: f64) -> Vec<f64> {
        (0..self.len())
            .map(|i| (dot(self.momentum(i), self.momentum(i)) + mass * mass).sqrt())
            .collect()
    }

    /// `(μ₊, μ₋)` per node for a boost whose velocity has this set's dimension.
    pub fn boosted_energies(&self, b: &BoostSpec) -> Result<(Vec<f64>, Vec<f64>)> {
        self.check_boost(b)?;
        let mu = self.energies(b.mass());
        let mut plus = Vec::with_capacity(self.len());
        let mut minus = Vec::with_capacity(self.len());
        for (i, m) in mu.iter().enumerate() {
            let d = dot(self.momentum(i), b.velocity());
            plus.push(m + d);
            minus.push(m - d);
        }
        Ok((plus, minus))
    }

    pub(crate) fn check_boost(&self, b: &BoostSpec) -> Result<()> {
        if b.velocity().len() != self.dim {
            return Err(Error::GridMismatch(format!(
                "boost has {} spatial components, modes have {}",
                b.velocity().len(),
                self.dim
            )));
        }
        Ok(())
    }
}

/// A complex function on space, held as Fourier coefficients on a mode set.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialFunction {
    modes: Arc<ModeSet>,
    coeffs: Vec<Complex64>,
}

impl SpatialFunction {
    pub fn new(modes: Arc<ModeSet>, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != modes.len() {
            return Err(Error::GridMismatch(format!(
                "{} coefficients for {} modes",
                coeffs.len(),
                modes.len()
            )));
        }
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::NonFinite("coefficients".into()));
        }
        Ok(SpatialFunction { modes, coeffs })
    }

    pub fn zero(modes: Arc<ModeSet>) -> Self {
        let n = modes.len();
        SpatialFunction {
            modes,
            coeffs: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    pub fn from_fn(modes: Arc<ModeSet>, f: impl Fn(&[f64]) -> Complex64) -> Self {
        let coeffs = (0..modes.len()).map(|i| f(modes.momentum(i))).collect();
        SpatialFunction { modes, coeffs }
    }

    /// Single lattice mode with coefficient `amp`.
    pub fn mode(modes: Arc<ModeSet>, index: usize, amp: Complex64) -> Self {
        let mut out = Self::zero(modes);
        out.coeffs[index] = amp;
        out
    }

    /// Coefficients from samples on the uniform grid `x_j = j·ℓ/(2N+1)`
    /// (last axis fastest). Exact for trigonometric polynomials of the
    /// lattice's degree.
    pub fn from_samples(modes: Arc<ModeSet>, samples: &[Complex64]) -> Result<Self> {
        let lat = modes
            .as_lattice()
            .ok_or_else(|| Error::GridMismatch("sampling needs a lattice mode set".into()))?
            .clone();
        let pts = grid_points(&lat);
        if samples.len() != pts.len() {
            return Err(Error::GridMismatch(format!(
                "{} samples for a grid of {}",
                samples.len(),
                pts.len()
            )));
        }
        let cell = lat.volume() / pts.len() as f64;
        let coeffs = (0..modes.len())
            .map(|i| {
                let k = modes.momentum(i);
                pts.iter()
                    .zip(samples)
                    .map(|(x, s)| s * Complex64::from_polar(cell, -dot(k, x)))
                    .sum()
            })
            .collect();
        Self::new(modes, coeffs)
    }

    /// Random coefficients with Gaussian envelope `exp(-|k|²/(2 width²))`.
    pub fn random<R: Rng>(modes: Arc<ModeSet>, rng: &mut R, width: f64) -> Self {
        let coeffs = (0..modes.len())
            .map(|i| {
                let k = modes.momentum(i);
                let env = (-dot(k, k) / (2.0 * width * width)).exp();
                Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * env
            })
            .collect();
        SpatialFunction { modes, coeffs }
    }

    pub fn modes(&self) -> &Arc<ModeSet> {
        &self.modes
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Value at a point, `Σ w f̂(k) e^{ik·x}`.
    pub fn sample(&self, x: &[f64]) -> Complex64 {
        (0..self.modes.len())
            .map(|i| {
                self.coeffs[i] * Complex64::from_polar(self.modes.weight(i), dot(self.modes.momentum(i), x))
            })
            .sum()
    }

    /// Pointwise complex conjugate of the function: `(Cf)^(k) = conj f̂(-k)`.
    pub fn conjugated(&self) -> Self {
        let n = self.coeffs.len();
        let coeffs = (0..n).map(|i| self.coeffs[n - 1 - i].conj()).collect();
        SpatialFunction {
            modes: self.modes.clone(),
            coeffs,
        }
    }

    /// True when the function is real-valued in position space.
    pub fn is_real(&self, tol: f64) -> bool {
        let c = self.conjugated();
        let scale = self.coeffs.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
        c.coeffs
            .iter()
            .zip(&self.coeffs)
            .all(|(a, b)| (a - b).norm() <= tol * scale)
    }

    /// Real part in position space, `(f + Cf)/2`.
    pub fn real_part(&self) -> Self {
        self.combine(&self.conjugated(), Complex64::new(0.5, 0.0), Complex64::new(0.5, 0.0))
            .expect("same modes")
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        SpatialFunction {
            modes: self.modes.clone(),
            coeffs: self.coeffs.iter().map(|z| z * c).collect(),
        }
    }

    /// `a·self + b·other`.
    pub fn combine(&self, other: &Self, a: Complex64, b: Complex64) -> Result<Self> {
        self.check_same(other)?;
        Ok(SpatialFunction {
            modes: self.modes.clone(),
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(x, y)| a * x + b * y)
                .collect(),
        })
    }

    /// Multiply coefficient `i` by `g(i)`.
    pub fn map_modes(&self, g: impl Fn(usize) -> Complex64) -> Self {
        SpatialFunction {
            modes: self.modes.clone(),
            coeffs: self.coeffs.iter().enumerate().map(|(i, z)| z * g(i)).collect(),
        }
    }

    pub(crate) fn check_same(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.modes, &other.modes) || self.modes == other.modes {
            Ok(())
        } else {
            Err(Error::GridMismatch("functions live on different mode sets".into()))
        }
    }
}

/// Grid points `x = (j·ℓ/(2N+1))_axis`, last axis fastest.
pub fn grid_points(l: &SpatialLattice) -> Vec<Vec<f64>> {
    let shape: Vec<usize> = l.cutoffs().iter().map(|n| 2 * n + 1).collect();
    let total: usize = shape.iter().product();
    (0..total)
        .map(|mut i| {
            let mut x = vec![0.0; l.dim()];
            for ax in (0..l.dim()).rev() {
                let j = i % shape[ax];
                i /= shape[ax];
                x[ax] = j as f64 * l.lengths()[ax] / shape[ax] as f64;
            }
            x
        })
        .collect()
}

/// Plain `L²` inner product, antilinear in the first slot.
pub fn l2_inner(a: &SpatialFunction, b: &SpatialFunction) -> Result<Complex64> {
    weighted_inner(a, b, |_| 1.0)
}

/// `⟨a/√(2μ), b/√(2μ)⟩` in `L²`.
pub fn sobolev_half_inner(a: &SpatialFunction, b: &SpatialFunction, mass: f64) -> Result<Complex64> {
    ensure(mass > 0.0, || format!("mass must be positive, got {mass}"))?;
    let mu = a.modes.energies(mass);
    weighted_inner(a, b, |i| 1.0 / (2.0 * mu[i]))
}

/// `Σ w_i g(i) conj(a_i) b_i`.
pub fn weighted_inner(
    a: &SpatialFunction,
    b: &SpatialFunction,
    g: impl Fn(usize) -> f64,
) -> Result<Complex64> {
    a.check_same(b)?;
    Ok((0..a.coeffs.len())
        .map(|i| a.modes.weight(i) * g(i) * a.coeffs[i].conj() * b.coeffs[i])
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_negation_pairs_momenta() {
        let l = SpatialLattice::new(vec![4.0, 6.0], vec![2, 3]).unwrap();
        for i in 0..l.len() {
            let k = l.momentum(i);
            let kn = l.momentum(l.negated(i));
            assert!(k.iter().zip(&kn).all(|(a, b)| a == &-b));
            assert_eq!(l.index_of(&l.label(i)), Some(i));
        }
    }

    #[test]
    fn continuum_nodes_are_symmetric() {
        let q = QuadratureSpec { cutoff: 5.0, panel_width: 1.0, order: 8, tolerance: 1e-6 };
        let m = ModeSet::continuum(2, &q).unwrap();
        for i in 0..m.len() {
            let a = m.momentum(i);
            let b = m.momentum(m.negated(i));
            assert!((a[0] + b[0]).abs() < 1e-14 && (a[1] + b[1]).abs() < 1e-14);
        }
        let total: f64 = m.weights().iter().sum();
        assert!((total - 100.0 / (4.0 * PI * PI)).abs() < 1e-12);
    }

    #[test]
    fn samples_round_trip() {
        let l = SpatialLattice::new(vec![3.0], vec![4]).unwrap();
        let modes = Arc::new(ModeSet::lattice(&l));
        let f = SpatialFunction::from_fn(modes.clone(), |k| Complex64::new(k[0].cos(), 0.3 * k[0]));
        let samples: Vec<Complex64> = grid_points(&l).iter().map(|x| f.sample(x)).collect();
        let g = SpatialFunction::from_samples(modes, &samples).unwrap();
        for (a, b) in f.coeffs().iter().zip(g.coeffs()) {
            assert!((a - b).norm() < 1e-12);
        }
    }
}
