//! Truncated Fock space for a real scalar field on a spatial circle.
//!
//! Modes `k_n = 2πn/ℓ`, `|n| ≤ K`; basis vectors are occupation numbers
//! with at most `N` particles. The interaction `∫₀^ℓ :𝒫(φ(x)): dx` is
//! expanded into normal-ordered monomials that conserve momentum, applied
//! to basis vectors with the untruncated ladder algebra and then
//! projected. Everything is block diagonal in the total momentum.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::kernels::KernelKind;
use crate::linalg::CMatrix;
use crate::modes::{weighted_inner, ModeSet, SpatialLattice};
use crate::quad::panels_by_width;
use crate::rp::{bandwidth, os_quantize, pairing_on, Side, SpectralSpec};
use crate::symbols::BoostSpec;
use crate::testfn::{Half, TestFunction, TestFunctionFamily};

pub const DEFAULT_DIMENSION_CAP: usize = 20_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FockTruncation {
    pub circumference: f64,
    pub mode_cutoff: usize,
    pub max_particles: usize,
    pub mass: f64,
    #[serde(default = "default_cap")]
    pub dimension_cap: usize,
}

fn default_cap() -> usize {
    DEFAULT_DIMENSION_CAP
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

impl FockTruncation {
    pub fn new(circumference: f64, mode_cutoff: usize, max_particles: usize, mass: f64) -> Result<Self> {
        let t = FockTruncation { circumference, mode_cutoff, max_particles, mass, dimension_cap: DEFAULT_DIMENSION_CAP };
        t.validate()?;
        Ok(t)
    }

    pub fn with_cap(mut self, cap: usize) -> Self {
        self.dimension_cap = cap;
        self
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.circumference > 0.0 && self.circumference.is_finite(), || {
            format!("circumference must be positive, got {}", self.circumference)
        })?;
        ensure(self.mass > 0.0 && self.mass.is_finite(), || format!("mass must be positive, got {}", self.mass))?;
        ensure(self.max_particles <= 255, || "at most 255 particles".into())?;
        Ok(())
    }

    pub fn mode_count(&self) -> usize {
        2 * self.mode_cutoff + 1
    }

    /// `Σ_{p ≤ N} C(M - 1 + p, p) = C(M + N, N)` with `M` modes.
    pub fn dimension(&self) -> usize {
        binomial(self.mode_count() + self.max_particles, self.max_particles).round() as usize
    }

    /// Integer label `n` of mode `j`.
    pub fn label(&self, j: usize) -> i64 {
        j as i64 - self.mode_cutoff as i64
    }

    pub fn momentum(&self, j: usize) -> f64 {
        2.0 * PI * self.label(j) as f64 / self.circumference
    }

    pub fn energy(&self, j: usize) -> f64 {
        self.momentum(j).hypot(self.mass)
    }

    /// The same modes as a spatial lattice.
    pub fn mode_set(&self) -> Result<Arc<ModeSet>> {
        Ok(Arc::new(ModeSet::lattice(&SpatialLattice::cubic(1, self.circumference, self.mode_cutoff)?)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FockBasis {
    pub states: Vec<Vec<u8>>,
    index: HashMap<Vec<u8>, usize>,
    /// Total momentum label `Σ n_j occ_j` per state.
    pub labels: Vec<i64>,
}

impl FockBasis {
    pub fn new(t: &FockTruncation) -> Result<Self> {
        t.validate()?;
        let dim = t.dimension();
        if dim > t.dimension_cap {
            return Err(Error::DimensionCap { dim, cap: t.dimension_cap });
        }
        let m = t.mode_count();
        let mut states = Vec::with_capacity(dim);
        let mut cur = vec![0u8; m];
        fn go(j: usize, left: usize, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
            if j == cur.len() {
                out.push(cur.clone());
                return;
            }
            for n in 0..=left {
                cur[j] = n as u8;
                go(j + 1, left - n, cur, out);
            }
            cur[j] = 0;
        }
        go(0, t.max_particles, &mut cur, &mut states);
        let index = states.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        let labels = states
            .iter()
            .map(|s| s.iter().enumerate().map(|(j, &n)| t.label(j) * n as i64).sum())
            .collect();
        Ok(FockBasis { states, index, labels })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn index_of(&self, occ: &[u8]) -> Option<usize> {
        self.index.get(occ).copied()
    }

    /// Index of the state with every mode `k ↦ -k`.
    pub fn mirrored(&self, i: usize) -> usize {
        let mut s = self.states[i].clone();
        s.reverse();
        self.index[&s]
    }
}

/// `𝒫(φ) = Σ_j c_j φ^j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolySpec {
    pub coefficients: Vec<f64>,
}

impl PolySpec {
    pub fn new(coefficients: Vec<f64>) -> Result<Self> {
        let p = PolySpec { coefficients };
        p.validate()?;
        Ok(p)
    }

    pub fn zero() -> Self {
        PolySpec { coefficients: vec![] }
    }

    /// `λ φ⁴`.
    pub fn quartic(lambda: f64) -> Result<Self> {
        Self::new(vec![0.0, 0.0, 0.0, 0.0, lambda])
    }

    pub fn degree(&self) -> Option<usize> {
        self.coefficients.iter().rposition(|&c| c != 0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.degree().is_none()
    }

    pub fn validate(&self) -> Result<()> {
        if self.coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("polynomial coefficients".into()));
        }
        match self.degree() {
            None | Some(0) => Ok(()),
            Some(d) if d % 2 == 1 => Err(Error::UnboundedPolynomial(format!("odd degree {d}"))),
            Some(d) if self.coefficients[d] < 0.0 => {
                Err(Error::UnboundedPolynomial(format!("negative leading coefficient at degree {d}")))
            }
            Some(_) => Ok(()),
        }
    }
}

/// One total-momentum block.
#[derive(Debug, Clone)]
pub struct Sector {
    pub label: i64,
    pub momentum: f64,
    pub states: Vec<usize>,
    pub h_free: Vec<f64>,
    pub h_int: DMatrix<f64>,
    /// Eigenvalues of `h_free + h_int` (before the ground-energy shift), ascending.
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Option<DMatrix<f64>>,
}

impl Sector {
    pub fn hamiltonian(&self) -> DMatrix<f64> {
        let mut h = self.h_int.clone();
        for (i, e) in self.h_free.iter().enumerate() {
            h[(i, i)] += e;
        }
        h
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OperatorChecks {
    pub dimension: usize,
    pub sectors: usize,
    pub largest_sector: usize,
    pub hermiticity_error: f64,
    /// Interaction matrix elements that would change the total momentum.
    pub cross_sector_entries: usize,
    pub vacuum_interaction: f64,
}

#[derive(Debug, Clone)]
pub struct FockOperatorSet {
    pub truncation: FockTruncation,
    pub poly: PolySpec,
    pub basis: FockBasis,
    pub sectors: Vec<Sector>,
    /// Lowest eigenvalue of `h_free + h_int`; `H = h_free + h_int - E`.
    pub ground_energy: f64,
    pub checks: OperatorChecks,
}

struct Multiset {
    occ: Vec<(usize, u8)>,
    /// `r!/Π m_j! · Π (2μ_j)^{-m_j/2}`.
    weight: f64,
}

fn multisets(t: &FockTruncation, max_size: usize) -> HashMap<(usize, i64), Vec<Multiset>> {
    let m = t.mode_count();
    let mut out: HashMap<(usize, i64), Vec<Multiset>> = HashMap::new();
    fn go(
        j: usize,
        left: usize,
        cur: &mut Vec<(usize, u8)>,
        t: &FockTruncation,
        m: usize,
        size: usize,
        out: &mut HashMap<(usize, i64), Vec<Multiset>>,
    ) {
        if j == m {
            if left == 0 {
                let label = cur.iter().map(|&(j, c)| t.label(j) * c as i64).sum();
                let mut w = factorial(size);
                for &(j, c) in cur.iter() {
                    w /= factorial(c as usize);
                    w *= (2.0 * t.energy(j)).powf(-0.5 * c as f64);
                }
                out.entry((size, label)).or_default().push(Multiset { occ: cur.clone(), weight: w });
            }
            return;
        }
        for c in 0..=left {
            if c > 0 {
                cur.push((j, c as u8));
            }
            go(j + 1, left - c, cur, t, m, size, out);
            if c > 0 {
                cur.pop();
            }
        }
    }
    for size in 0..=max_size {
        go(0, size, &mut Vec::new(), t, m, size, &mut out);
    }
    out
}

/// `(removed counts per mode, momentum label, ladder amplitude · weight)`.
type Removal = (Vec<(usize, u8)>, i64, f64);

/// Sub-multisets of `occ` of a given size.
fn annihilations(occ: &[u8], size: usize, t: &FockTruncation) -> Vec<Removal> {
    let mut out = Vec::new();
    fn go(
        j: usize,
        left: usize,
        occ: &[u8],
        cur: &mut Vec<(usize, u8)>,
        t: &FockTruncation,
        size: usize,
        out: &mut Vec<Removal>,
    ) {
        if left == 0 {
            let label = cur.iter().map(|&(j, c)| t.label(j) * c as i64).sum();
            let mut w = factorial(size);
            for &(j, c) in cur.iter() {
                let n = occ[j] as usize;
                // a^c |n⟩ = sqrt(n!/(n-c)!) |n-c⟩
                w *= (factorial(n) / factorial(n - c as usize)).sqrt();
                w /= factorial(c as usize);
                w *= (2.0 * t.energy(j)).powf(-0.5 * c as f64);
            }
            out.push((cur.clone(), label, w));
            return;
        }
        if j == occ.len() {
            return;
        }
        for c in 0..=left.min(occ[j] as usize) {
            if c > 0 {
                cur.push((j, c as u8));
            }
            go(j + 1, left - c, occ, cur, t, size, out);
            if c > 0 {
                cur.pop();
            }
        }
    }
    go(0, size, occ, &mut Vec::new(), t, size, &mut out);
    out
}

/// Builds `h_free`, the momentum and `∫ :𝒫(φ): dx` per sector and
/// diagonalizes every sector. Eigenvectors are kept when `vectors` is set.
pub fn build_operators(t: &FockTruncation, poly: &PolySpec, vectors: bool) -> Result<FockOperatorSet> {
    poly.validate()?;
    let basis = FockBasis::new(t)?;
    let dim = basis.len();
    let mut by_label: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for (i, &l) in basis.labels.iter().enumerate() {
        by_label.entry(l).or_default().push(i);
    }
    let mut local = vec![0usize; dim];
    for states in by_label.values() {
        for (a, &s) in states.iter().enumerate() {
            local[s] = a;
        }
    }
    let mut blocks: BTreeMap<i64, DMatrix<f64>> =
        by_label.iter().map(|(&l, s)| (l, DMatrix::zeros(s.len(), s.len()))).collect();
    let degree = poly.degree().unwrap_or(0);
    let creators = multisets(t, degree);
    let ell = t.circumference;
    let mut cross = 0usize;
    for (s, occ) in basis.states.iter().enumerate() {
        for (p, &cp) in poly.coefficients.iter().enumerate() {
            if cp == 0.0 {
                continue;
            }
            let pre = cp * ell.powf(1.0 - 0.5 * p as f64);
            for n_ann in 0..=p {
                let n_cre = p - n_ann;
                let coef = pre * binomial(p, n_cre);
                for (removed, q, w_ann) in annihilations(occ, n_ann, t) {
                    let Some(list) = creators.get(&(n_cre, q)) else { continue };
                    let mut mid = occ.clone();
                    for &(j, c) in &removed {
                        mid[j] -= c;
                    }
                    let mid_total: usize = mid.iter().map(|&n| n as usize).sum();
                    if mid_total + n_cre > t.max_particles {
                        continue;
                    }
                    for cre in list {
                        let mut out = mid.clone();
                        let mut amp = coef * w_ann * cre.weight;
                        for &(j, c) in &cre.occ {
                            let n = out[j] as usize;
                            // (a*)^c |n⟩ = sqrt((n+c)!/n!) |n+c⟩
                            amp *= (factorial(n + c as usize) / factorial(n)).sqrt();
                            out[j] += c;
                        }
                        let r = basis.index_of(&out).expect("state within the particle cap");
                        if basis.labels[r] != basis.labels[s] {
                            cross += 1;
                            continue;
                        }
                        blocks.get_mut(&basis.labels[s]).unwrap()[(local[r], local[s])] += amp;
                    }
                }
            }
        }
    }
    let free: Vec<f64> = basis
        .states
        .iter()
        .map(|occ| occ.iter().enumerate().map(|(j, &n)| n as f64 * t.energy(j)).sum())
        .collect();
    let vac = basis.index_of(&vec![0u8; t.mode_count()]).unwrap();
    let vacuum_interaction = blocks[&0][(local[vac], local[vac])];
    let mut herm = 0.0f64;
    let mut sectors = Vec::with_capacity(by_label.len());
    for (label, states) in by_label {
        let h_int = blocks.remove(&label).unwrap();
        herm = herm.max((&h_int - h_int.transpose()).abs().max());
        let h_free: Vec<f64> = states.iter().map(|&s| free[s]).collect();
        sectors.push(Sector {
            label,
            momentum: 2.0 * PI * label as f64 / ell,
            states,
            h_free,
            h_int,
            eigenvalues: vec![],
            eigenvectors: None,
        });
    }
    // sectors are independent; each one is diagonalized on its own worker
    sectors.par_iter_mut().for_each(|sec| diagonalize(sec, vectors));
    let ground_energy = sectors.iter().map(|s| s.eigenvalues[0]).fold(f64::INFINITY, f64::min);
    let checks = OperatorChecks {
        dimension: dim,
        sectors: sectors.len(),
        largest_sector: sectors.iter().map(|s| s.states.len()).max().unwrap_or(0),
        hermiticity_error: herm,
        cross_sector_entries: cross,
        vacuum_interaction,
    };
    Ok(FockOperatorSet { truncation: t.clone(), poly: poly.clone(), basis, sectors, ground_energy, checks })
}

fn diagonalize(sec: &mut Sector, vectors: bool) {
    let h = sec.hamiltonian();
    let h = (&h + h.transpose()) * 0.5;
    if vectors {
        let e = SymmetricEigen::new(h);
        let n = e.eigenvalues.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| e.eigenvalues[a].total_cmp(&e.eigenvalues[b]));
        sec.eigenvalues = order.iter().map(|&i| e.eigenvalues[i]).collect();
        sec.eigenvectors = Some(DMatrix::from_fn(n, n, |r, c| e.eigenvectors[(r, order[c])]));
    } else {
        sec.eigenvalues = crate::linalg::symmetric_eigenvalues(&h);
    }
}

impl FockOperatorSet {
    /// Eigenvalues of `H = h_free + h_int - E` in every sector.
    pub fn shifted_spectrum(&self) -> impl Iterator<Item = (&Sector, f64)> {
        self.sectors.iter().flat_map(move |s| s.eigenvalues.iter().map(move |&e| (s, e - self.ground_energy)))
    }

    /// Eigenvalues of `H + vP` and eigenvectors in the full basis, sorted.
    pub fn full_eigensystem(&self, v: f64) -> Result<(Vec<f64>, DMatrix<f64>)> {
        let dim = self.basis.len();
        let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(dim);
        for (si, s) in self.sectors.iter().enumerate() {
            ensure(s.eigenvectors.is_some(), || "operators were built without eigenvectors".into())?;
            for (c, &e) in s.eigenvalues.iter().enumerate() {
                pairs.push((e - self.ground_energy + v * s.momentum, si, c));
            }
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut vecs = DMatrix::zeros(dim, dim);
        for (col, &(_, si, c)) in pairs.iter().enumerate() {
            let s = &self.sectors[si];
            let ev = s.eigenvectors.as_ref().unwrap();
            for (a, &state) in s.states.iter().enumerate() {
                vecs[(state, col)] = ev[(a, c)];
            }
        }
        Ok((pairs.iter().map(|p| p.0).collect(), vecs))
    }

    /// Full `H + vP` as a dense matrix.
    pub fn hamiltonian_matrix(&self, v: f64) -> DMatrix<f64> {
        let dim = self.basis.len();
        let mut h = DMatrix::zeros(dim, dim);
        for s in &self.sectors {
            let hs = s.hamiltonian();
            for (a, &i) in s.states.iter().enumerate() {
                for (b, &j) in s.states.iter().enumerate() {
                    h[(i, j)] = hs[(a, b)];
                }
                h[(i, i)] += v * s.momentum - self.ground_energy;
            }
        }
        h
    }

    pub fn momentum_diagonal(&self) -> Vec<f64> {
        let ell = self.truncation.circumference;
        self.basis.labels.iter().map(|&l| 2.0 * PI * l as f64 / ell).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VelocitySpectrum {
    pub velocity: f64,
    pub min_eigenvalue: f64,
    pub min_sector_momentum: f64,
    /// Smallest eigenvalue above the ground state (distinct by 1e-9).
    pub gap: f64,
    /// `|P Ω|` for the minimizing vector.
    pub p_omega_residual: f64,
    pub momentum_bound_epsilon: f64,
    /// `max (ε|p| - |h_v|)` over joint eigenpairs.
    pub momentum_bound_violation: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumReport {
    pub mode_cutoff: usize,
    pub max_particles: usize,
    pub dimension: usize,
    pub ground_energy: f64,
    pub tolerance: f64,
    pub velocities: Vec<VelocitySpectrum>,
    pub pass: bool,
}

/// `H + vP` per sector; `ε` for the `ε²P² ≤ H_v²` check is `(1 - |v|)/2`.
pub fn spectrum_condition(ops: &FockOperatorSet, v_list: &[f64], tolerance: f64) -> Result<SpectrumReport> {
    let mut out = Vec::with_capacity(v_list.len());
    for &v in v_list {
        ensure(v.abs() < 1.0, || format!("|v| = {} must be below 1", v.abs()))?;
        let eps = 0.5 * (1.0 - v.abs());
        let mut min = f64::INFINITY;
        let mut arg = 0.0;
        let mut all: Vec<f64> = Vec::with_capacity(ops.basis.len());
        let mut ph = f64::NEG_INFINITY;
        for (s, h) in ops.shifted_spectrum() {
            let hv = h + v * s.momentum;
            all.push(hv);
            if hv < min {
                min = hv;
                arg = s.momentum;
            }
            ph = ph.max(eps * s.momentum.abs() - hv.abs());
        }
        all.sort_by(f64::total_cmp);
        let gap = all.iter().copied().find(|&x| x > min + 1e-9).map_or(f64::INFINITY, |x| x - min);
        out.push(VelocitySpectrum {
            velocity: v,
            min_eigenvalue: min,
            min_sector_momentum: arg,
            gap,
            p_omega_residual: arg.abs(),
            momentum_bound_epsilon: eps,
            momentum_bound_violation: ph,
            pass: min >= -tolerance && arg == 0.0 && ph <= tolerance,
        });
    }
    let pass = out.iter().all(|r| r.pass);
    Ok(SpectrumReport {
        mode_cutoff: ops.truncation.mode_cutoff,
        max_particles: ops.truncation.max_particles,
        dimension: ops.basis.len(),
        ground_energy: ops.ground_energy,
        tolerance,
        velocities: out,
        pass,
    })
}

/// Rows `(sector momentum label, index, eigenvalue of H + vP)`.
pub fn spectrum_rows(ops: &FockOperatorSet, v: f64) -> Vec<(i64, usize, f64)> {
    ops.sectors
        .iter()
        .flat_map(|s| {
            s.eigenvalues.iter().enumerate().map(move |(i, &e)| (s.label, i, e - ops.ground_energy + v * s.momentum))
        })
        .collect()
}

fn check_beta(beta: f64) -> Result<()> {
    ensure(beta > 0.0 && beta.is_finite(), || format!("beta must be positive, got {beta}"))
}

/// `Σ_i e^{-βλ_i}` over the spectrum of `H + vP`.
pub fn partition_function(ops: &FockOperatorSet, beta: f64, v: f64) -> Result<f64> {
    check_beta(beta)?;
    Ok(ops.shifted_spectrum().map(|(s, h)| (-beta * (h + v * s.momentum)).exp()).sum())
}

/// `e^{-tH_v}` from the eigendecomposition.
pub fn heat_kernel(ops: &FockOperatorSet, t: f64, v: f64) -> Result<DMatrix<f64>> {
    check_beta(t)?;
    let (vals, vecs) = ops.full_eigensystem(v)?;
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(vals.len(), vals.iter().map(|&x| (-t * x).exp())));
    Ok(&vecs * d * vecs.transpose())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProductFormulaReport {
    pub beta: f64,
    pub velocity: f64,
    pub truncated: f64,
    pub product: f64,
    pub relative_error: f64,
    /// `Σ_{p > N} C(M-1+p, p) e^{-pβ·min μ₊}`, an upper bound on the relative error.
    pub budget: f64,
    pub pass: bool,
}

/// Free field only: `Z_N` against `∏ (1 - e^{-βμ₊(k)})^{-1}`.
pub fn product_formula_check(ops: &FockOperatorSet, beta: f64, v: f64) -> Result<ProductFormulaReport> {
    ensure(ops.poly.is_zero(), || "product formula needs the free field".into())?;
    let t = &ops.truncation;
    let z = partition_function(ops, beta, v)?;
    let rates: Vec<f64> = (0..t.mode_count()).map(|j| t.energy(j) + v * t.momentum(j)).collect();
    let product: f64 = rates.iter().map(|&r| -1.0 / (-beta * r).exp_m1()).product();
    let gmin = rates.iter().copied().fold(f64::INFINITY, f64::min);
    let m = t.mode_count();
    let mut budget = 0.0;
    let mut p = t.max_particles + 1;
    loop {
        let term = binomial(m - 1 + p, p) * (-(p as f64) * beta * gmin).exp();
        budget += term;
        if term < 1e-18 * budget || p > t.max_particles + 10_000 {
            break;
        }
        p += 1;
    }
    let rel = (product - z) / product;
    Ok(ProductFormulaReport { beta, velocity: v, truncated: z, product, relative_error: rel, budget, pass: rel >= -1e-14 && rel <= budget })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KmsGibbsReport {
    pub beta: f64,
    pub velocity: f64,
    pub pairs: usize,
    /// `max |F_{A,B}(t+iβ) - ω(τ_t(B) A)|` over pairs and times, relative to `‖A‖‖B‖`.
    pub kms_residual: f64,
    /// `max |ω(τ_t(A)) - ω(A)|`, relative to `‖A‖`.
    pub invariance_residual: f64,
    /// `|ω(1) - 1|`.
    pub normalization: f64,
    /// `|Tr e^{-βH_v} - Σ e^{-βλ}| / Z`.
    pub trace_residual: f64,
    pub pass: bool,
}

fn random_observable<R: Rng>(dim: usize, rng: &mut R) -> CMatrix {
    let m = CMatrix::from_fn(dim, dim, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    (&m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

fn to_complex(m: &DMatrix<f64>) -> CMatrix {
    m.map(|x| Complex64::new(x, 0.0))
}

/// Gibbs functional `A ↦ Tr(A e^{-βH_v})/Z` on random Hermitian observables.
/// The continued side uses `e^{izH}` built from the spectrum at complex
/// `z`; the other side only real-time evolution and the heat kernel.
pub fn kms_gibbs_check<R: Rng>(
    ops: &FockOperatorSet,
    beta: f64,
    v: f64,
    pairs: usize,
    times: &[f64],
    rng: &mut R,
    tolerance: f64,
) -> Result<KmsGibbsReport> {
    check_beta(beta)?;
    let (vals, vecs) = ops.full_eigensystem(v)?;
    let dim = vals.len();
    let vc = to_complex(&vecs);
    let vct = vc.adjoint();
    let diag = |f: &dyn Fn(f64) -> Complex64| -> CMatrix {
        let d = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(dim, vals.iter().map(|&x| f(x))));
        &vc * d * &vct
    };
    let rho = diag(&|x| Complex64::new((-beta * x).exp(), 0.0));
    let z: f64 = vals.iter().map(|&x| (-beta * x).exp()).sum();
    let trace_residual = (rho.trace().re - z).abs() / z;
    let omega = |a: &CMatrix| (&rho * a).trace() / z;
    let normalization = (omega(&CMatrix::identity(dim, dim)) - 1.0).norm();
    let mut kms = 0.0f64;
    let mut inv = 0.0f64;
    for _ in 0..pairs {
        let a = random_observable(dim, rng);
        let b = random_observable(dim, rng);
        let na = crate::linalg::spectral_norm(&a);
        let nb = crate::linalg::spectral_norm(&b);
        for &t in times {
            let zc = Complex64::new(t, beta);
            let fwd = diag(&|x| (Complex64::i() * zc * x).exp());
            let back = diag(&|x| (-Complex64::i() * zc * x).exp());
            let lhs = omega(&(&a * (&fwd * &b * &back)));
            let u = diag(&|x| Complex64::from_polar(1.0, t * x));
            let ud = u.adjoint();
            let bt = &u * &b * &ud;
            let rhs = omega(&(&bt * &a));
            kms = kms.max((lhs - rhs).norm() / (na * nb));
            let at = &u * &a * &ud;
            inv = inv.max((omega(&at) - omega(&a)).norm() / na);
        }
    }
    Ok(KmsGibbsReport {
        beta,
        velocity: v,
        pairs,
        kms_residual: kms,
        invariance_residual: inv,
        normalization,
        trace_residual,
        pass: kms <= tolerance && inv <= 1e-12 && normalization <= 1e-12 && trace_residual <= 1e-12,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalyticityReport {
    pub t: f64,
    pub gamma: f64,
    pub eps: f64,
    /// `‖(tΓP)^n e^{-tH}‖/n!` for `n = 0..=n_max`.
    pub terms: Vec<f64>,
    /// `‖e^{-t(εH_free + H_int - E)}‖`.
    pub reference_norm: f64,
    /// `(terms[n]/reference_norm)^{1/n}`, to be at most `Γ/(1-ε)`.
    pub root_ratios: Vec<f64>,
    /// `terms[n+1]/terms[n]`, informational.
    pub successive_ratios: Vec<f64>,
    pub bound: f64,
    pub pass: bool,
}

pub fn analyticity_check(ops: &FockOperatorSet, t: f64, gamma: f64, eps: f64, n_max: usize) -> Result<AnalyticityReport> {
    ensure(t > 0.0 && t.is_finite(), || format!("t must be positive, got {t}"))?;
    ensure(gamma > 0.0 && gamma < 1.0, || format!("need 0 < Gamma < 1, got {gamma}"))?;
    ensure(eps > 0.0 && eps < 1.0 - gamma, || format!("need 0 < eps < 1 - Gamma, got {eps}"))?;
    ensure(n_max >= 2, || "n_max must be at least 2".into())?;
    let mut reference_min = f64::INFINITY;
    for s in &ops.sectors {
        let mut h = s.h_int.clone();
        for (i, e) in s.h_free.iter().enumerate() {
            h[(i, i)] += eps * e;
        }
        let h = (&h + h.transpose()) * 0.5;
        reference_min = reference_min.min(crate::linalg::symmetric_eigenvalues(&h)[0] - ops.ground_energy);
    }
    let reference_norm = (-t * reference_min).exp();
    let terms: Vec<f64> = (0..=n_max)
        .map(|n| {
            ops.sectors
                .iter()
                .map(|s| {
                    let low = s.eigenvalues[0] - ops.ground_energy;
                    let p = (t * gamma * s.momentum.abs()).powi(n as i32);
                    p * (-t * low).exp() / factorial(n)
                })
                .fold(0.0, f64::max)
        })
        .collect();
    let root_ratios: Vec<f64> = (1..=n_max).map(|n| (terms[n] / reference_norm).powf(1.0 / n as f64)).collect();
    let successive_ratios = terms.windows(2).map(|w| if w[0] > 0.0 { w[1] / w[0] } else { 0.0 }).collect();
    let bound = gamma / (1.0 - eps);
    let pass = root_ratios.iter().all(|&r| r <= bound * (1.0 + 1e-12)) && terms[0] <= reference_norm * (1.0 + 1e-12);
    Ok(AnalyticityReport { t, gamma, eps, terms, reference_norm, root_ratios, successive_ratios, bound, pass })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TripleReport {
    pub trials: usize,
    /// `max ‖Ce^{A+B}‖ / (‖e^A‖ ‖Ce^B‖)`.
    pub worst_ratio: f64,
    /// `max ‖[C, A]‖ + ‖[C, B]‖` over the constructed triples.
    pub commutator: f64,
    pub pass: bool,
}

fn sym_exp(m: &DMatrix<f64>) -> DMatrix<f64> {
    let e = SymmetricEigen::new((m + m.transpose()) * 0.5);
    let d = DMatrix::from_diagonal(&e.eigenvalues.map(f64::exp));
    &e.eigenvectors * d * e.eigenvectors.transpose()
}

fn op_norm(m: &DMatrix<f64>) -> f64 {
    m.clone().svd(false, false).singular_values.max()
}

/// `‖Ce^{A+B}‖ ≤ ‖e^A‖ ‖Ce^B‖` on random triples: `C` constant on blocks,
/// `A` random symmetric within the blocks, `B` diagonal.
pub fn triple_bound_check<R: Rng>(trials: usize, rng: &mut R) -> Result<TripleReport> {
    let mut worst = 0.0f64;
    let mut comm = 0.0f64;
    for _ in 0..trials {
        let blocks: Vec<usize> = (0..rng.random_range(1..4)).map(|_| rng.random_range(1..4)).collect();
        let dim: usize = blocks.iter().sum();
        let mut a = DMatrix::<f64>::zeros(dim, dim);
        let mut c = DMatrix::<f64>::zeros(dim, dim);
        let mut start = 0;
        for &len in &blocks {
            let cv = rng.random_range(-3.0..3.0);
            for i in start..start + len {
                c[(i, i)] = cv;
                for j in start..=i {
                    let x = rng.random_range(-2.0..2.0);
                    a[(i, j)] = x;
                    a[(j, i)] = x;
                }
            }
            start += len;
        }
        let b = DMatrix::from_diagonal(&nalgebra::DVector::from_fn(dim, |_, _| rng.random_range(-3.0..1.0)));
        // B must commute with C too, which a diagonal B does
        let lhs = op_norm(&(&c * sym_exp(&(&a + &b))));
        let rhs = op_norm(&sym_exp(&a)) * op_norm(&(&c * sym_exp(&b)));
        if rhs > 0.0 {
            worst = worst.max(lhs / rhs);
        }
        comm = comm.max(op_norm(&(&c * &a - &a * &c)) + op_norm(&(&c * &b - &b * &c)));
    }
    Ok(TripleReport { trials, worst_ratio: worst, commutator: comm, pass: worst <= 1.0 + 1e-12 && comm == 0.0 })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeynmanKacReport {
    pub time: f64,
    /// `⟨f̂, e^{-Tμ₊} ĝ⟩` on the circle's modes.
    pub quantum: Complex64,
    /// `⟨f, θ D T(T) g⟩` from the momentum-space symbol.
    pub classical: Complex64,
    pub relative_deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Free-field Feynman–Kac pairing on the circle: `f`, `g` positive-time,
/// `T(T)` the time translation by `T`.
#[allow(clippy::too_many_arguments)]
pub fn fk_gaussian_check(
    time: f64,
    f: &TestFunction,
    g: &TestFunction,
    trunc: &FockTruncation,
    poly: &PolySpec,
    b: &BoostSpec,
    spectral: &SpectralSpec,
    tolerance: f64,
) -> Result<FeynmanKacReport> {
    if !poly.is_zero() {
        return Err(Error::InvalidParameter("Feynman-Kac check covers the free field only".into()));
    }
    ensure(time >= 0.0 && time.is_finite(), || format!("T must be non-negative, got {time}"))?;
    ensure(b.dim() == 2, || "the circle is one-dimensional".into())?;
    ensure((b.mass() - trunc.mass).abs() <= 1e-15 * trunc.mass, || "boost and truncation masses differ".into())?;
    let modes = trunc.mode_set()?;
    let fh = os_quantize(f, Side::Plus, b, &modes)?;
    let gh = os_quantize(g, Side::Plus, b, &modes)?;
    let (plus, _) = modes.boosted_energies(b)?;
    let mu = modes.energies(b.mass());
    let gt = gh.map_modes(|m| Complex64::new((-time * plus[m]).exp(), 0.0));
    let quantum = weighted_inner(&fh, &gt, |m| 1.0 / (2.0 * mu[m]))?;
    let shifted = g.shifted_in_time(time);
    let fam = TestFunctionFamily::new(vec![f.clone(), shifted], Half::PositiveTime, None)?;
    let e_cut = spectral.energy_cutoff.map_or_else(|| bandwidth(&fam, 0), Ok)?;
    let energy = panels_by_width(-e_cut, e_cut, spectral.panel_width, spectral.order);
    let classical = pairing_on(&fam, KernelKind::ThetaD, b, &energy, &modes, false)?.pairing[(0, 1)];
    let scale = quantum.norm().max(classical.norm()).max(f64::MIN_POSITIVE);
    let dev = (quantum - classical).norm() / scale;
    Ok(FeynmanKacReport { time, quantum, classical, relative_deviation: dev, tolerance, pass: dev <= tolerance })
}
