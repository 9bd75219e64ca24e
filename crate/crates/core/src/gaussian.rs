//! Wick calculus for the complex Gaussian moment functional.
//!
//! Moments only see the covariance, held here as the symmetric bilinear
//! table `D(f_i, f_j)` over a list of distinct test functions.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::linalg::CMatrix;
use crate::modes::ModeSet;
use crate::quad::{panels_by_width, QuadratureSpec};
use crate::rp::{bandwidth, check_boost, classical_pairing, os_modes, os_quantize, sobolev_half_inner, spatial_cutoff, Side, SpectralSpec};
use crate::kernels::KernelKind;
use crate::symbols::{BoostSpec, Momentum};
use crate::testfn::TestFunctionFamily;

/// Default cap on the number of fields in a pairing enumeration.
pub const DEFAULT_MAX_FIELDS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairingMode {
    /// `S_n(g) = (n-1) S_2(g) S_{n-2}(g)` on sign combinations `g = Σ ε_i f_i`,
    /// then polarization.
    Recursion,
    /// Sum over perfect pairings.
    PairingSum,
}

/// Bilinear covariance on a fixed list of test functions.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceTable {
    values: CMatrix,
}

impl CovarianceTable {
    pub fn from_matrix(values: CMatrix) -> Result<Self> {
        ensure(values.is_square(), || "covariance table must be square".into())?;
        let scale = values.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let n = values.nrows();
        for i in 0..n {
            for j in 0..i {
                if (values[(i, j)] - values[(j, i)]).norm() > 1e-13 * scale {
                    return Err(Error::InvalidParameter(format!("covariance not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(CovarianceTable { values })
    }

    /// `∫ f_i D_v f_j` from the symbol: `(2π)^{-d} ∫ F_i(-p) D̃(p) F_j(p) dp`.
    pub fn flat(fam: &TestFunctionFamily, b: &BoostSpec, spec: &SpectralSpec) -> Result<Self> {
        check_boost(fam, b)?;
        let e_cut = spec.energy_cutoff.map_or_else(|| bandwidth(fam, 0), Ok)?;
        let k_cut = spec.momentum_cutoff.map_or_else(|| spatial_cutoff(fam), Ok)?;
        let energy = panels_by_width(-e_cut, e_cut, spec.panel_width, spec.order);
        let q = QuadratureSpec { cutoff: k_cut, panel_width: spec.panel_width, order: spec.order, tolerance: 1e-12 };
        let modes = ModeSet::continuum(fam.spatial_dim(), &q)?;
        let n = fam.len();
        let mut out = CMatrix::zeros(n, n);
        let ne = energy.len();
        for e in 0..ne {
            let en = energy.nodes[e];
            let er = ne - 1 - e;
            let we = energy.weights[e] / (2.0 * PI);
            for m in 0..modes.len() {
                let k = modes.momentum(m);
                let mr = modes.negated(m);
                let d = b.momentum(en, k.to_vec())?;
                let sym = crate::symbols::propagator_symbol(&d, b)?;
                let w = we * modes.weight(m) * sym;
                let fwd: Vec<Complex64> = fam.members().iter().map(|f| f.fourier(en, k)).collect();
                let back: Vec<Complex64> =
                    fam.members().iter().map(|f| f.fourier(energy.nodes[er], modes.momentum(mr))).collect();
                for i in 0..n {
                    let wi = w * back[i];
                    for j in 0..n {
                        out[(i, j)] += wi * fwd[j];
                    }
                }
            }
        }
        // symmetrize quadrature noise
        let sym = CMatrix::from_fn(n, n, |i, j| 0.5 * (out[(i, j)] + out[(j, i)]));
        Ok(CovarianceTable { values: sym })
    }

    pub fn len(&self) -> usize {
        self.values.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.values[(i, j)]
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.values
    }
}

/// Indices into a [`CovarianceTable`], repeats allowed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentRequest {
    pub functions: Vec<usize>,
    pub mode: PairingMode,
    pub max_fields: usize,
}

impl MomentRequest {
    pub fn new(functions: Vec<usize>, mode: PairingMode) -> Self {
        MomentRequest { functions, mode, max_fields: DEFAULT_MAX_FIELDS }
    }

    /// `n` copies of function `i`.
    pub fn power(i: usize, n: usize, mode: PairingMode) -> Self {
        Self::new(vec![i; n], mode)
    }
}

pub fn double_factorial(n: i64) -> f64 {
    if n <= 0 {
        1.0
    } else {
        (1..=n).rev().step_by(2).map(|k| k as f64).product()
    }
}

pub fn wick_moment(req: &MomentRequest, cov: &CovarianceTable) -> Result<Complex64> {
    let n = req.functions.len();
    if let Some(&bad) = req.functions.iter().find(|&&i| i >= cov.len()) {
        return Err(Error::GridMismatch(format!("function {bad} not in a covariance table of {}", cov.len())));
    }
    if n > req.max_fields {
        return Err(Error::DimensionCap { dim: n, cap: req.max_fields });
    }
    if n % 2 == 1 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    Ok(match req.mode {
        PairingMode::PairingSum => pairing_sum(&req.functions, cov),
        PairingMode::Recursion => polarized_recursion(&req.functions, cov),
    })
}

fn pairing_sum(f: &[usize], cov: &CovarianceTable) -> Complex64 {
    fn go(rest: &mut Vec<usize>, cov: &CovarianceTable) -> Complex64 {
        if rest.is_empty() {
            return Complex64::new(1.0, 0.0);
        }
        let first = rest.remove(0);
        let mut total = Complex64::new(0.0, 0.0);
        for j in 0..rest.len() {
            let partner = rest.remove(j);
            total += cov.get(first, partner) * go(rest, cov);
            rest.insert(j, partner);
        }
        rest.insert(0, first);
        total
    }
    go(&mut f.to_vec(), cov)
}

/// `S_n(g) = (n-1)!! S_2(g)^{n/2}` through the recursion.
fn diagonal_moment(s2: Complex64, n: usize) -> Complex64 {
    let mut s = Complex64::new(1.0, 0.0);
    let mut k = 2;
    while k <= n {
        s *= (k - 1) as f64 * s2;
        k += 2;
    }
    s
}

fn polarized_recursion(f: &[usize], cov: &CovarianceTable) -> Complex64 {
    let n = f.len();
    if n == 0 {
        return Complex64::new(1.0, 0.0);
    }
    // ε₁ = +1 fixed; the other half of the sign vectors gives the same terms
    let mut total = Complex64::new(0.0, 0.0);
    for mask in 0u32..(1 << (n - 1)) {
        let eps: Vec<f64> = (0..n).map(|i| if i > 0 && mask >> (i - 1) & 1 == 1 { -1.0 } else { 1.0 }).collect();
        let mut s2 = Complex64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                s2 += eps[i] * eps[j] * cov.get(f[i], f[j]);
            }
        }
        let sign: f64 = eps.iter().product();
        total += sign * diagonal_moment(s2, n);
    }
    let factorial: f64 = (1..=n).map(|k| k as f64).product();
    total / (factorial * 2f64.powi(n as i32 - 1))
}

/// `(2n-1)!! ⟨h, h⟩^n` for a given one-particle norm `⟨h, h⟩`.
pub fn quantized_norm(norm_sqr: f64, n: usize) -> f64 {
    double_factorial(2 * n as i64 - 1) * norm_sqr.powi(n as i32)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuantizedNormReport {
    pub n: usize,
    pub one_particle_norm: f64,
    pub formula: f64,
    /// `2n`-point moment of the reflected classical covariance, pairing sum.
    pub moment: f64,
    pub relative_deviation: f64,
    /// Deviation over `(2n-1)!! ⟨f, |D̃| f⟩^n`, the size the classical
    /// route resolves; decides `pass`.
    pub normwise_deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// `‖Φ(f̂)^n Ω‖²` two ways for each member of a positive-time family: the
/// `(2n-1)!!` law on the quantized vector, and the `2n`-point moment whose
/// pairings are the classical reflected form `⟨f, ΘD f⟩`.
pub fn quantized_norm_check(
    fam: &TestFunctionFamily,
    n: usize,
    b: &BoostSpec,
    spec: &SpectralSpec,
    tolerance: f64,
) -> Result<Vec<QuantizedNormReport>> {
    ensure(2 * n <= DEFAULT_MAX_FIELDS, || format!("n = {n} exceeds the pairing cap"))?;
    let cp = classical_pairing(fam, KernelKind::ThetaD, b, spec, false)?;
    let classical = cp.pairing;
    let modes = os_modes(fam, spec)?;
    let mut out = Vec::with_capacity(fam.len());
    for (i, f) in fam.members().iter().enumerate() {
        let h = os_quantize(f, Side::Plus, b, &modes)?;
        let norm = sobolev_half_inner(&h, &h, b.mass())?.re;
        let formula = quantized_norm(norm, n);
        let cov = CovarianceTable::from_matrix(DMatrix::from_element(1, 1, classical[(i, i)]))?;
        let moment = wick_moment(&MomentRequest::power(0, 2 * n, PairingMode::PairingSum), &cov)?;
        let gap = (moment.re - formula).abs().max(moment.im.abs());
        let dev = gap / formula.abs().max(f64::MIN_POSITIVE);
        let normwise = gap / quantized_norm(cp.abs_norms[i], n).max(f64::MIN_POSITIVE);
        out.push(QuantizedNormReport {
            n,
            one_particle_norm: norm,
            formula,
            moment: moment.re,
            relative_deviation: dev,
            normwise_deviation: normwise,
            tolerance,
            pass: normwise <= tolerance,
        });
    }
    Ok(out)
}

/// Symmetric grid `(E, k)` with `2n+1` points per axis.
pub fn spacetime_grid(b: &BoostSpec, n: usize, spacing: f64) -> Result<Vec<Momentum>> {
    ensure(spacing > 0.0 && spacing.is_finite(), || format!("bad spacing {spacing}"))?;
    let dim = b.dim();
    let side = 2 * n + 1;
    let total = side.pow(dim as u32);
    (0..total)
        .map(|mut i| {
            let mut p = vec![0.0; dim];
            for x in p.iter_mut().rev() {
                *x = ((i % side) as f64 - n as f64) * spacing;
                i /= side;
            }
            b.momentum(p[0], p[1..].to_vec())
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldVectorReport {
    /// `‖|D_v|^{1/2} f‖² / ‖C^{1/2} f‖²`.
    pub ratio: f64,
    /// `cosh⁵ η`.
    pub bound: f64,
    pub pass: bool,
}

/// Ratio of `Σ |f̂|² |D̃|` to `Σ |f̂|² C̃` on Fourier samples, with
/// `C̃ = 1/(E² + |k|² + m²)`. Equal weights cancel.
pub fn field_vector_bound(coeffs: &[Complex64], momenta: &[Momentum], b: &BoostSpec) -> Result<FieldVectorReport> {
    ensure(coeffs.len() == momenta.len(), || "one coefficient per momentum".into())?;
    let m2 = b.mass() * b.mass();
    let mut num = 0.0;
    let mut den = 0.0;
    for (c, p) in coeffs.iter().zip(momenta) {
        ensure(p.kvec.len() + 1 == b.dim(), || "momentum dimension mismatch".into())?;
        let w = c.norm_sqr();
        num += w * crate::symbols::propagator_symbol(p, b)?.norm();
        den += w / (p.energy * p.energy + p.kvec.iter().map(|x| x * x).sum::<f64>() + m2);
    }
    ensure(den > 0.0, || "zero function".into())?;
    let ratio = num / den;
    let bound = b.cosh_eta().powi(5);
    // at v = 0 both sides are the same sum up to rounding
    Ok(FieldVectorReport { ratio, bound, pass: ratio <= bound * (1.0 + 8.0 * f64::EPSILON) })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(vals: &[[f64; 3]; 3]) -> CovarianceTable {
        CovarianceTable::from_matrix(CMatrix::from_fn(3, 3, |i, j| Complex64::new(vals[i][j], 0.1 * (i + j) as f64)))
            .unwrap()
    }

    #[test]
    fn odd_moments_vanish_and_empty_is_one() {
        let t = table(&[[1.0, 0.2, 0.3], [0.2, 2.0, 0.5], [0.3, 0.5, 1.5]]);
        for mode in [PairingMode::PairingSum, PairingMode::Recursion] {
            assert_eq!(wick_moment(&MomentRequest::new(vec![1], mode), &t).unwrap(), Complex64::new(0.0, 0.0));
            assert_eq!(wick_moment(&MomentRequest::new(vec![], mode), &t).unwrap(), Complex64::new(1.0, 0.0));
        }
    }

    #[test]
    fn four_point_by_hand() {
        let t = table(&[[1.0, 0.2, 0.3], [0.2, 2.0, 0.5], [0.3, 0.5, 1.5]]);
        let d = |i, j| t.get(i, j);
        let hand = d(0, 1) * d(2, 2) + d(0, 2) * d(1, 2) + d(0, 2) * d(1, 2);
        let got = wick_moment(&MomentRequest::new(vec![0, 1, 2, 2], PairingMode::PairingSum), &t).unwrap();
        assert!((got - hand).norm() < 1e-15);
    }

    #[test]
    fn cap_and_range_are_enforced() {
        let t = table(&[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
        let r = wick_moment(&MomentRequest::power(0, 10, PairingMode::PairingSum), &t);
        assert!(matches!(r, Err(Error::DimensionCap { dim: 10, cap: 8 })));
        assert!(wick_moment(&MomentRequest::new(vec![0, 3], PairingMode::PairingSum), &t).is_err());
        let asym = CMatrix::from_fn(2, 2, |i, j| Complex64::new((i * 2 + j) as f64, 0.0));
        assert!(CovarianceTable::from_matrix(asym).is_err());
    }

    #[test]
    fn double_factorials() {
        assert_eq!(double_factorial(-1), 1.0);
        assert_eq!(double_factorial(7), 105.0);
        assert_eq!(quantized_norm(2.0, 0), 1.0);
        assert_eq!(quantized_norm(2.0, 2), 12.0);
    }
}
