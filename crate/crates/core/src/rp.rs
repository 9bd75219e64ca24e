//! Reflection positivity and the flat-space quantization maps.
//!
//! Two independent routes are kept apart on purpose:
//! * the classical pairing `⟨f, ΘD g⟩` is computed in full momentum space
//!   from the symbol `D̃(E,k)` and the Fourier transforms of the test
//!   functions (no residues taken);
//! * the quantization maps `f ↦ f̂^±` use the exact per-mode factors
//!   `e^{-tμ±}` (or `e^{-x₁ν±}` for the spatial reflection) and return
//!   vectors whose inner product is `Σ w conj(a) b/(2μ)` (resp. `2ν`).

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::kernels::KernelKind;
use crate::linalg::{CMatrix, GramReport};
use crate::modes::{ModeSet, SpatialFunction};
use crate::quad::{panels_by_width, QuadratureSpec, Rule};
use crate::symbols::{dot, spatial_bundle, BoostSpec};
use crate::testfn::{Half, TestFunction, TestFunctionFamily};

pub use crate::modes::sobolev_half_inner;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reflection {
    Theta,
    PiN,
}

/// Resolution of the momentum-space integrals. Cutoffs default to the
/// family's bandwidth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralSpec {
    pub panel_width: f64,
    pub order: usize,
    pub energy_cutoff: Option<f64>,
    pub momentum_cutoff: Option<f64>,
}

impl Default for SpectralSpec {
    fn default() -> Self {
        SpectralSpec { panel_width: 1.0, order: 16, energy_cutoff: None, momentum_cutoff: None }
    }
}

/// `1/((E + i k·v)² + |k|² + m²)`.
fn symbol(e: f64, k: &[f64], b: &BoostSpec) -> Complex64 {
    let z = Complex64::new(e, dot(k, b.velocity()));
    (z * z + dot(k, k) + b.mass() * b.mass()).inv()
}

pub(crate) fn bandwidth(fam: &TestFunctionFamily, axis: usize) -> Result<f64> {
    fam.members()
        .iter()
        .map(|f| f.axis_bandwidth(axis))
        .try_fold(0.0f64, |acc, b| b.map(|b| acc.max(b)))
        .ok_or_else(|| Error::InvalidParameter("momentum-space route needs smooth profiles".into()))
}

pub(crate) fn spatial_cutoff(fam: &TestFunctionFamily) -> Result<f64> {
    (1..=fam.spatial_dim()).try_fold(0.0f64, |acc, ax| Ok(acc.max(bandwidth(fam, ax)?)))
}

pub(crate) fn check_boost(fam: &TestFunctionFamily, b: &BoostSpec) -> Result<()> {
    if fam.spatial_dim() + 1 != b.dim() {
        return Err(Error::GridMismatch(format!(
            "family lives in d = {}, boost in d = {}",
            fam.spatial_dim() + 1,
            b.dim()
        )));
    }
    Ok(())
}

fn boost_along_first_axis(b: &BoostSpec) -> Result<f64> {
    ensure(b.velocity()[1..].iter().all(|&c| c == 0.0), || {
        "spatial reflection needs the boost along the first axis".into()
    })?;
    Ok(b.velocity()[0])
}

/// Momentum-space pairings of a family with itself.
#[derive(Debug, Clone)]
pub struct ClassicalPairing {
    /// `⟨f_i, K f_j⟩` for the requested reflected kernel `K`.
    pub pairing: CMatrix,
    /// Plain `L²` Gram `⟨f_i, f_j⟩` (zero unless requested).
    pub l2: CMatrix,
    /// `⟨f_i, |D̃| f_i⟩`, the norm the quantization maps contract into.
    pub abs_norms: Vec<f64>,
}

struct Tables {
    energy: Rule,
    modes: ModeSet,
}

impl Tables {
    fn new(fam: &TestFunctionFamily, spec: &SpectralSpec) -> Result<Self> {
        let e_cut = match spec.energy_cutoff {
            Some(c) => c,
            None => bandwidth(fam, 0)?,
        };
        let k_cut = match spec.momentum_cutoff {
            Some(c) => c,
            None => spatial_cutoff(fam)?,
        };
        let energy = panels_by_width(-e_cut, e_cut, spec.panel_width, spec.order);
        let q = QuadratureSpec { cutoff: k_cut, panel_width: spec.panel_width, order: spec.order, tolerance: 1e-12 };
        Ok(Tables { energy, modes: ModeSet::continuum(fam.spatial_dim(), &q)? })
    }
}

/// `(2π)^{-d} ∫ conj F̃_i(p) D̃(·) F̃_j(·) dp` for the reflected kernel `kind`,
/// together with the `L²` Gram and the `|D̃|` norms.
pub fn classical_pairing(
    fam: &TestFunctionFamily,
    kind: KernelKind,
    b: &BoostSpec,
    spec: &SpectralSpec,
    with_l2: bool,
) -> Result<ClassicalPairing> {
    check_boost(fam, b)?;
    let tab = Tables::new(fam, spec)?;
    pairing_on(fam, kind, b, &tab.energy, &tab.modes, with_l2)
}

/// Same pairing with the energy rule and the spatial modes supplied; the
/// energy rule must be symmetric about 0. Weights on the energy rule are
/// divided by `2π`.
pub(crate) fn pairing_on(
    fam: &TestFunctionFamily,
    kind: KernelKind,
    b: &BoostSpec,
    energy: &Rule,
    modes: &ModeSet,
    with_l2: bool,
) -> Result<ClassicalPairing> {
    let n = fam.len();
    let ne = energy.len();
    let nk = modes.len();
    // per-term transforms
    let members = fam.members();
    let time_tab: Vec<Vec<Vec<Complex64>>> = members
        .iter()
        .map(|f| f.terms.iter().map(|t| energy.nodes.iter().map(|&e| t.amp * t.time.fourier(e)).collect()).collect())
        .collect();
    let space_tab: Vec<Vec<Vec<Complex64>>> = members
        .iter()
        .map(|f| {
            f.terms
                .iter()
                .map(|t| (0..nk).map(|m| t.spatial_fourier(modes.momentum(m))).collect())
                .collect()
        })
        .collect();
    let transform = |i: usize, e: usize, m: usize| -> Complex64 {
        time_tab[i].iter().zip(&space_tab[i]).map(|(a, h)| a[e] * h[m]).sum()
    };
    // real blocks over (E, k) nodes; X is members × nodes, Y and L are nodes × members
    let block = (8192 / nk.max(1)).clamp(1, ne);
    let rows = block * nk;
    let mut xr = DMatrix::<f64>::zeros(n, rows);
    let mut xi = DMatrix::<f64>::zeros(n, rows);
    let mut yr = DMatrix::<f64>::zeros(rows, n);
    let mut yi = DMatrix::<f64>::zeros(rows, n);
    let mut lr = DMatrix::<f64>::zeros(rows, n);
    let mut li = DMatrix::<f64>::zeros(rows, n);
    let mut pr = DMatrix::<f64>::zeros(n, n);
    let mut pi = DMatrix::<f64>::zeros(n, n);
    let mut gr = DMatrix::<f64>::zeros(n, n);
    let mut gi = DMatrix::<f64>::zeros(n, n);
    let mut abs_norms = vec![0.0; n];
    let mut start = 0;
    while start < ne {
        let stop = (start + block).min(ne);
        if stop - start < block {
            for m in [&mut xr, &mut xi, &mut yr, &mut yi, &mut lr, &mut li] {
                m.fill(0.0);
            }
        }
        for e in start..stop {
            let en = energy.nodes[e];
            let er = ne - 1 - e;
            let we = energy.weights[e] / (2.0 * PI);
            for m in 0..nk {
                let row = (e - start) * nk + m;
                let k = modes.momentum(m);
                let mr = modes.first_axis_reflected(m);
                let plain = symbol(en, k, b);
                let (ey, my, dsym) = match kind {
                    KernelKind::D => (e, m, plain),
                    KernelKind::ThetaD => (er, m, plain.conj()),
                    KernelKind::DTheta => (er, m, plain),
                    KernelKind::PiD => (e, mr, symbol(en, modes.momentum(mr), b)),
                    KernelKind::DPi => (e, mr, plain),
                };
                let wk = modes.weight(m) * we;
                let dabs = plain.norm();
                for i in 0..n {
                    let x = transform(i, e, m);
                    xr[(i, row)] = x.re;
                    xi[(i, row)] = x.im;
                    lr[(row, i)] = wk * x.re;
                    li[(row, i)] = wk * x.im;
                    let y = transform(i, ey, my) * (wk * dsym);
                    yr[(row, i)] = y.re;
                    yi[(row, i)] = y.im;
                    abs_norms[i] += wk * dabs * x.norm_sqr();
                }
            }
        }
        // conj(X) Y = (Xr Yr + Xi Yi) + i(Xr Yi - Xi Yr)
        pr.gemm(1.0, &xr, &yr, 1.0);
        pr.gemm(1.0, &xi, &yi, 1.0);
        pi.gemm(1.0, &xr, &yi, 1.0);
        pi.gemm(-1.0, &xi, &yr, 1.0);
        if with_l2 {
            gr.gemm(1.0, &xr, &lr, 1.0);
            gr.gemm(1.0, &xi, &li, 1.0);
            gi.gemm(1.0, &xr, &li, 1.0);
            gi.gemm(-1.0, &xi, &lr, 1.0);
        }
        start = stop;
    }
    let pairing = CMatrix::from_fn(n, n, |i, j| Complex64::new(pr[(i, j)], pi[(i, j)]));
    let l2 = CMatrix::from_fn(n, n, |i, j| Complex64::new(gr[(i, j)], gi[(i, j)]));
    Ok(ClassicalPairing { pairing, l2, abs_norms })
}

/// Temporal quantization map `f̂^±(k) = ∫ e^{-tμ±(k)} f(t, k) dt` per mode.
pub fn os_quantize(f: &TestFunction, side: Side, b: &BoostSpec, modes: &Arc<ModeSet>) -> Result<SpatialFunction> {
    modes.check_boost(b)?;
    ensure(f.spatial_dim() == modes.dim(), || "test function and modes differ in dimension".into())?;
    let (lo, _) = f.axis_support(0);
    if lo < 0.0 {
        return Err(Error::Support(format!("test function reaches t = {lo} < 0")));
    }
    let (plus, minus) = modes.boosted_energies(b)?;
    let rate = if side == Side::Plus { plus } else { minus };
    let coeffs = (0..modes.len())
        .map(|m| {
            let k = modes.momentum(m);
            f.terms
                .iter()
                .map(|t| t.amp * t.time.laplace(Complex64::new(rate[m], 0.0)) * t.spatial_fourier(k))
                .sum()
        })
        .collect();
    SpatialFunction::new(modes.clone(), coeffs)
}

/// Spatial quantization map across `x₁ = 0`: nodes of `modes` are
/// `(E, k⊥)` and `f̂^±(E,k⊥) = ∫ e^{-x₁ν±} f(E, x₁, k⊥) dx₁`.
pub fn os_quantize_spatial(
    f: &TestFunction,
    side: Side,
    b: &BoostSpec,
    modes: &Arc<ModeSet>,
) -> Result<SpatialFunction> {
    let v1 = boost_along_first_axis(b)?;
    ensure(modes.dim() + 1 == b.dim() && f.spatial_dim() == modes.dim(), || {
        "spatial quantization needs (E, k_perp) nodes".into()
    })?;
    let (lo, _) = f.axis_support(1);
    if lo < 0.0 {
        return Err(Error::Support(format!("test function reaches x1 = {lo} < 0")));
    }
    let coeffs = (0..modes.len())
        .map(|m| {
            let p = modes.momentum(m);
            let s = spatial_bundle(p[0], dot(&p[1..], &p[1..]), b.mass(), v1);
            let rate = if side == Side::Plus { s.nu_plus } else { s.nu_minus };
            f.terms
                .iter()
                .map(|t| {
                    let perp: Complex64 = t.space[1..].iter().zip(&p[1..]).map(|(q, &k)| q.fourier(k)).product();
                    t.amp * t.time.fourier(p[0]) * t.space[0].laplace(Complex64::new(rate, 0.0)) * perp
                })
                .sum()
        })
        .collect();
    SpatialFunction::new(modes.clone(), coeffs)
}

/// `Σ w conj(a) b /(2ν(E,k⊥))` on `(E, k⊥)` nodes.
pub fn spatial_half_inner(a: &SpatialFunction, c: &SpatialFunction, b: &BoostSpec) -> Result<Complex64> {
    let v1 = boost_along_first_axis(b)?;
    let modes = a.modes().clone();
    crate::modes::weighted_inner(a, c, |m| {
        let p = modes.momentum(m);
        1.0 / (2.0 * spatial_bundle(p[0], dot(&p[1..], &p[1..]), b.mass(), v1).nu)
    })
}

/// Mode set for the quantized side of `fam`.
pub fn os_modes(fam: &TestFunctionFamily, spec: &SpectralSpec) -> Result<Arc<ModeSet>> {
    let cut = match fam.half() {
        Half::PositiveTime | Half::NegativeTime => match spec.momentum_cutoff {
            Some(c) => c,
            None => spatial_cutoff(fam)?,
        },
        Half::PositiveX1 => {
            let e = match spec.energy_cutoff {
                Some(c) => c,
                None => bandwidth(fam, 0)?,
            };
            let mut c = e;
            for ax in 2..=fam.spatial_dim() {
                c = c.max(bandwidth(fam, ax)?);
            }
            c
        }
    };
    let q = QuadratureSpec { cutoff: cut, panel_width: spec.panel_width, order: spec.order, tolerance: 1e-12 };
    Ok(Arc::new(ModeSet::continuum(fam.spatial_dim(), &q)?))
}

/// Gram matrix of the quantized vectors, `⟨f̂_i^s, f̂_j^s⟩`. For a
/// negative-time family the members are first reflected to positive time.
pub fn quantized_gram(fam: &TestFunctionFamily, side: Side, b: &BoostSpec, spec: &SpectralSpec) -> Result<CMatrix> {
    check_boost(fam, b)?;
    let modes = os_modes(fam, spec)?;
    let vecs: Vec<SpatialFunction> = fam
        .members()
        .iter()
        .map(|f| match fam.half() {
            Half::PositiveTime => os_quantize(f, side, b, &modes),
            Half::NegativeTime => os_quantize(&f.reflected_in_time(), side, b, &modes),
            Half::PositiveX1 => os_quantize_spatial(f, side, b, &modes),
        })
        .collect::<Result<_>>()?;
    let n = vecs.len();
    let mut g = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            g[(i, j)] = match fam.half() {
                Half::PositiveX1 => spatial_half_inner(&vecs[i], &vecs[j], b)?,
                _ => sobolev_half_inner(&vecs[i], &vecs[j], b.mass())?,
            };
        }
    }
    Ok(g)
}

fn reflected_kind(fam: &TestFunctionFamily, reflection: Reflection, swapped: bool) -> Result<KernelKind> {
    match (fam.half(), reflection) {
        (Half::PositiveTime | Half::NegativeTime, Reflection::Theta) => {
            Ok(if swapped { KernelKind::DTheta } else { KernelKind::ThetaD })
        }
        (Half::PositiveX1, Reflection::PiN) => Ok(if swapped { KernelKind::DPi } else { KernelKind::PiD }),
        _ => Err(Error::Support(format!(
            "reflection {reflection:?} does not match a family on {:?}",
            fam.half()
        ))),
    }
}

/// Gram of `⟨f_i, (reflection ∘ D_v) f_j⟩` from the momentum-space route.
pub fn gram_reflection(
    fam: &TestFunctionFamily,
    reflection: Reflection,
    b: &BoostSpec,
    spec: &SpectralSpec,
    tolerance: f64,
) -> Result<GramReport> {
    let kind = reflected_kind(fam, reflection, false)?;
    let c = classical_pairing(fam, kind, b, spec, true)?;
    let name = match reflection {
        Reflection::Theta => "theta",
        Reflection::PiN => "pi_n",
    };
    Ok(GramReport::new(&c.pairing, tolerance, name, b.velocity().to_vec(), fam.seed()).with_l2_gram(&c.l2))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IsometryReport {
    pub velocity: Vec<f64>,
    /// `max |Δ_ij| / max |M_ij|` for the `+` (ΘD) pairing.
    pub plus_deviation: f64,
    /// Same for the `−` (DΘ) pairing.
    pub minus_deviation: f64,
    pub max_abs_deviation: f64,
    /// `max |Δ_ij| / sqrt(M_ii M_jj)` over both pairings. Informational:
    /// members whose reflected self-pairing is exponentially small make this
    /// large even when the absolute agreement is at rounding level.
    pub entrywise_deviation: f64,
    /// Largest `‖f̂‖² / ⟨f, |D̃| f⟩`; at most 1 when the maps contract.
    pub contraction_ratio: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// (normwise relative, absolute, entrywise relative) deviations.
fn deviations(a: &CMatrix, b: &CMatrix) -> (f64, f64, f64) {
    let n = a.nrows();
    let mut entry = 0.0f64;
    let mut abs = 0.0f64;
    let mut scale = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let d = (a[(i, j)] - b[(i, j)]).norm();
            abs = abs.max(d);
            scale = scale.max(a[(i, j)].norm());
            entry = entry.max(d / (a[(i, i)].re.abs() * a[(j, j)].re.abs()).sqrt());
        }
    }
    (abs / scale, abs, entry)
}

/// Compares the classical reflected pairings with the quantized inner
/// products, for both signs.
pub fn verify_isometry(
    fam: &TestFunctionFamily,
    reflection: Reflection,
    b: &BoostSpec,
    spec: &SpectralSpec,
    tolerance: f64,
) -> Result<IsometryReport> {
    let mut dev = [0.0; 2];
    let mut abs = 0.0f64;
    let mut entry = 0.0f64;
    let mut ratio = 0.0f64;
    for (slot, swapped) in [false, true].into_iter().enumerate() {
        let kind = reflected_kind(fam, reflection, swapped)?;
        let c = classical_pairing(fam, kind, b, spec, false)?;
        // negative-time members were reflected, which exchanges the signs
        let side = match (swapped, fam.half() == Half::NegativeTime) {
            (false, false) | (true, true) => Side::Plus,
            _ => Side::Minus,
        };
        let q = quantized_gram(fam, side, b, spec)?;
        let (r, a, e) = deviations(&c.pairing, &q);
        dev[slot] = r;
        abs = abs.max(a);
        entry = entry.max(e);
        for i in 0..fam.len() {
            ratio = ratio.max(q[(i, i)].re / c.abs_norms[i]);
        }
    }
    Ok(IsometryReport {
        velocity: b.velocity().to_vec(),
        plus_deviation: dev[0],
        minus_deviation: dev[1],
        max_abs_deviation: abs,
        entrywise_deviation: entry,
        contraction_ratio: ratio,
        tolerance,
        pass: dev[0] <= tolerance && dev[1] <= tolerance && ratio <= 1.0 + tolerance,
    })
}

/// Per-mode Gram of sharp-time slices `⟨δ_{s_i}⊗α, ΘD δ_{s_j}⊗α⟩` for a
/// single spatial mode: `e^{-(s_i+s_j)μ₊}/(2μ)`.
pub fn sharp_time_mode_gram(times: &[f64], mu: f64, mu_plus: f64) -> DMatrix<f64> {
    DMatrix::from_fn(times.len(), times.len(), |i, j| (-(times[i] + times[j]) * mu_plus).exp() / (2.0 * mu))
}
