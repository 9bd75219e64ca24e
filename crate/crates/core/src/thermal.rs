//! One-particle thermal structure on the doubled space `H ⊕ conj(H)`,
//! `H` the `-½` Sobolev space of spatial functions.
//!
//! The conjugate slot is stored as the function `w` whose conjugate-space
//! element is `w̄`. Scalars act there conjugated (`λ·w̄ = (λ̄w)‾`) and the
//! inner product is reversed, `⟨w̄, w̄'⟩ = ⟨w', w⟩`. With this bookkeeping
//!
//! * `κα = ((1+ρ)^{1/2} α, ρ^{1/2} Cα)` is linear,
//! * `κ'α = (ρ^{1/2} Cα, (1+ρ)^{1/2} α)` is anti-linear,
//! * `e^{-sℓ}` multiplies the first slot by `e^{-sμ}` and `w` by `e^{s̄μ}`,
//! * `j(a, w) = (-w, -a)`,
//!
//! where `C` is pointwise conjugation and `ρ, μ` are `ρ±, μ±` for the
//! chosen sign. `‖κα‖² = ⟨α, (1 + ρ₊ + ρ₋)α⟩` then matches the reflected
//! cylinder kernel at coincident times.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{ensure, Error, Result};
use crate::modes::{sobolev_half_inner, ModeSet, SpatialFunction};
use crate::periodize::{bose, CompactSpec, ModeRates};
use crate::rp::Side;
use crate::testfn::TestFunction;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DoubledVector {
    pub analytic: SpatialFunction,
    /// Stored `w`; the slot holds `w̄`.
    pub conjugate: SpatialFunction,
}

impl DoubledVector {
    pub fn new(analytic: SpatialFunction, conjugate: SpatialFunction) -> Result<Self> {
        analytic.check_same(&conjugate)?;
        Ok(DoubledVector { analytic, conjugate })
    }

    pub fn zero(modes: Arc<ModeSet>) -> Self {
        DoubledVector { analytic: SpatialFunction::zero(modes.clone()), conjugate: SpatialFunction::zero(modes) }
    }

    pub fn modes(&self) -> &Arc<ModeSet> {
        self.analytic.modes()
    }

    /// `⟨a, a'⟩ + ⟨w', w⟩` in the `-½` space.
    pub fn inner(&self, other: &Self, mass: f64) -> Result<Complex64> {
        Ok(sobolev_half_inner(&self.analytic, &other.analytic, mass)?
            + sobolev_half_inner(&other.conjugate, &self.conjugate, mass)?)
    }

    pub fn norm_sqr(&self, mass: f64) -> Result<f64> {
        Ok(self.inner(self, mass)?.re)
    }

    pub fn scaled(&self, z: Complex64) -> Self {
        DoubledVector { analytic: self.analytic.scaled(z), conjugate: self.conjugate.scaled(z.conj()) }
    }

    pub fn plus(&self, other: &Self) -> Result<Self> {
        let one = c(1.0);
        Ok(DoubledVector {
            analytic: self.analytic.combine(&other.analytic, one, one)?,
            conjugate: self.conjugate.combine(&other.conjugate, one, one)?,
        })
    }

    /// Coordinates in which the doubled space is an ordinary `ℂ^{2n}`:
    /// `(a_k, conj w_k)`.
    pub fn linear_coordinates(&self) -> Vec<Complex64> {
        self.analytic
            .coeffs()
            .iter()
            .copied()
            .chain(self.conjugate.coeffs().iter().map(|z| z.conj()))
            .collect()
    }

    /// Largest coefficient difference over both slots.
    pub fn max_difference(&self, other: &Self) -> f64 {
        let d = |x: &SpatialFunction, y: &SpatialFunction| {
            x.coeffs().iter().zip(y.coeffs()).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max)
        };
        d(&self.analytic, &other.analytic).max(d(&self.conjugate, &other.conjugate))
    }
}

/// Per-mode `μ`, `ρ` and the slot weights for one sign on a mode set.
#[derive(Debug, Clone)]
pub struct ModularData {
    pub modes: Arc<ModeSet>,
    pub spec: CompactSpec,
    pub side: Side,
    /// Liouvillian generator on the first slot, `μ±(k)`.
    pub generator: Vec<f64>,
    pub rho: Vec<f64>,
}

impl ModularData {
    pub fn new(modes: Arc<ModeSet>, spec: &CompactSpec, side: Side) -> Result<Self> {
        spec.validate()?;
        modes.check_boost(&spec.boost)?;
        let generator: Vec<f64> = (0..modes.len())
            .map(|m| ModeRates::new(modes.momentum(m), &spec.boost).rate(side))
            .collect();
        let rho = generator.iter().map(|&g| bose(spec.beta * g)).collect();
        Ok(ModularData { modes, spec: spec.clone(), side, generator, rho })
    }

    pub fn mass(&self) -> f64 {
        self.spec.boost.mass()
    }

    fn check(&self, f: &SpatialFunction) -> Result<()> {
        ensure(**f.modes() == *self.modes, || "function lives on a different mode set".into())
    }

    pub fn kappa(&self, alpha: &SpatialFunction) -> Result<DoubledVector> {
        self.check(alpha)?;
        let rho = &self.rho;
        Ok(DoubledVector {
            analytic: alpha.map_modes(|m| c((1.0 + rho[m]).sqrt())),
            conjugate: alpha.conjugated().map_modes(|m| c(rho[m].sqrt())),
        })
    }

    pub fn kappa_prime(&self, alpha: &SpatialFunction) -> Result<DoubledVector> {
        self.check(alpha)?;
        let rho = &self.rho;
        Ok(DoubledVector {
            analytic: alpha.conjugated().map_modes(|m| c(rho[m].sqrt())),
            conjugate: alpha.map_modes(|m| c((1.0 + rho[m]).sqrt())),
        })
    }

    /// `(κα, κ'α)`.
    pub fn doubling_maps(&self, alpha: &SpatialFunction) -> Result<(DoubledVector, DoubledVector)> {
        Ok((self.kappa(alpha)?, self.kappa_prime(alpha)?))
    }

    /// `e^{-sℓ}`; `Re s` must lie in `[-β, β]`.
    pub fn translate(&self, u: &DoubledVector, s: Complex64) -> Result<DoubledVector> {
        ensure(s.re.is_finite() && s.im.is_finite(), || "non-finite translation".into())?;
        if s.re.abs() > self.spec.beta {
            return Err(Error::Strip(format!("Re s = {} outside [-beta, beta]", s.re)));
        }
        let g = &self.generator;
        Ok(DoubledVector {
            analytic: u.analytic.map_modes(|m| (-s * g[m]).exp()),
            conjugate: u.conjugate.map_modes(|m| (s.conj() * g[m]).exp()),
        })
    }

    /// Modular conjugation `j(a, w̄) = (-w, -ā)`.
    pub fn j(&self, u: &DoubledVector) -> DoubledVector {
        let neg = c(-1.0);
        DoubledVector { analytic: u.conjugate.scaled(neg), conjugate: u.analytic.scaled(neg) }
    }

    /// Tomita map from the real-subspace decomposition: for
    /// `u = κα + iκα'` with real `α, α'`, `s(u) = -κα + iκα'`.
    pub fn tomita_direct(&self, beta_fn: &SpatialFunction) -> Result<DoubledVector> {
        let re = beta_fn.real_part();
        let im = beta_fn.combine(&beta_fn.conjugated(), Complex64::new(0.0, -0.5), Complex64::new(0.0, 0.5))?;
        let a = self.kappa(&re)?.scaled(c(-1.0));
        let b = self.kappa(&im)?.scaled(Complex64::i());
        a.plus(&b)
    }

    /// Tomita map as `j ∘ e^{-βℓ/2}`.
    pub fn tomita_polar(&self, u: &DoubledVector) -> Result<DoubledVector> {
        Ok(self.j(&self.translate(u, c(0.5 * self.spec.beta))?))
    }

    /// Spectrum of `ℓ` per mode: `μ(k)` on the first slot, `-μ(k)` on the second.
    pub fn liouvillian_spectrum(&self) -> Vec<f64> {
        self.generator.iter().copied().chain(self.generator.iter().map(|g| -g)).collect()
    }
}

/// `f̂ = ∫₀^{β/2} e^{-tℓ} κ(f_t) dt` on the modes of `data`.
pub fn thermal_quantize(f: &TestFunction, data: &ModularData) -> Result<DoubledVector> {
    let (lo, hi) = f.axis_support(0);
    if lo < 0.0 || hi > 0.5 * data.spec.beta {
        return Err(Error::Support(format!("time support [{lo}, {hi}] leaves [0, beta/2]")));
    }
    let modes = &data.modes;
    ensure(f.spatial_dim() == modes.dim(), || "test function and modes differ in dimension".into())?;
    let n = modes.len();
    let laplace = |m: usize, rate: f64| -> Complex64 {
        let k = modes.momentum(m);
        f.terms.iter().map(|t| t.amp * t.time.laplace(c(rate)) * t.spatial_fourier(k)).sum()
    };
    let g = &data.generator;
    let a: Vec<Complex64> = (0..n).map(|m| laplace(m, g[m]) * (1.0 + data.rho[m]).sqrt()).collect();
    // w_k = ρ^{1/2}(k) ∫ e^{tμ(k)} conj f̂_t(-k) dt
    let w: Vec<Complex64> =
        (0..n).map(|m| laplace(modes.negated(m), -g[m]).conj() * data.rho[m].sqrt()).collect();
    DoubledVector::new(SpatialFunction::new(modes.clone(), a)?, SpatialFunction::new(modes.clone(), w)?)
}

/// `⟨α, K(s, s') α'⟩` with `K = θD^c` for `+` and `D^cθ` for `-`, from the
/// reflected two-branch kernel:
/// `(1/2μ)[(1+ρ_±)e^{-(s+s')μ_±} + ρ_∓ e^{(s+s')μ_∓}]` per mode.
pub fn sharp_time_inner(
    s: f64,
    alpha: &SpatialFunction,
    s2: f64,
    alpha2: &SpatialFunction,
    spec: &CompactSpec,
    side: Side,
) -> Result<Complex64> {
    let half = 0.5 * spec.beta;
    ensure((0.0..=half).contains(&s) && (0.0..=half).contains(&s2), || {
        format!("sharp times {s}, {s2} outside [0, beta/2]")
    })?;
    let modes = alpha.modes().clone();
    let beta = spec.beta;
    let sum = s + s2;
    crate::modes::weighted_inner(alpha, alpha2, |m| {
        let r = ModeRates::new(modes.momentum(m), &spec.boost);
        let (same, other) = match side {
            Side::Plus => (r.mu_plus, r.mu_minus),
            Side::Minus => (r.mu_minus, r.mu_plus),
        };
        ((1.0 + bose(beta * same)) * (-sum * same).exp() + bose(beta * other) * (sum * other).exp()) / (2.0 * r.mu)
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KmsReport {
    pub side: Side,
    pub samples: usize,
    pub max_residual: f64,
    pub scale: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// `⟨κα, e^{(is-β)ℓ} κα'⟩` against `⟨e^{isℓ} κα', κα⟩` for real `α, α'`,
/// evaluated mode by mode from `ρ` and `μ` (not through [`ModularData::translate`]).
pub fn one_particle_kms_check(
    alpha: &SpatialFunction,
    alpha2: &SpatialFunction,
    s_samples: &[f64],
    data: &ModularData,
    tolerance: f64,
) -> Result<KmsReport> {
    data.check(alpha)?;
    data.check(alpha2)?;
    ensure(alpha.is_real(1e-12) && alpha2.is_real(1e-12), || "KMS check needs real functions".into())?;
    let modes = &data.modes;
    let beta = data.spec.beta;
    let mu = modes.energies(data.mass());
    let a = alpha.coeffs();
    let b = alpha2.coeffs();
    let n = modes.len();
    let mut max_res = 0.0f64;
    let mut scale = 0.0f64;
    for &s in s_samples {
        let mut lhs = Complex64::new(0.0, 0.0);
        let mut rhs = Complex64::new(0.0, 0.0);
        for m in 0..n {
            let w = modes.weight(m) / (2.0 * mu[m]);
            let g = data.generator[m];
            let rho = data.rho[m];
            let mr = modes.negated(m);
            let phase = Complex64::from_polar(1.0, s * g);
            // first slot pairs α_k with α'_k; second slot pairs α'_{-k} with conj α_{-k}
            let first = a[m].conj() * b[m];
            let second = b[mr] * a[mr].conj();
            lhs += w * ((1.0 + rho) * (-beta * g).exp() * phase * first + rho * (beta * g).exp() * phase.conj() * second);
            let fwd = (1.0 + rho) * phase * first + rho * phase.conj() * second;
            rhs += w * fwd.conj();
        }
        max_res = max_res.max((lhs - rhs).norm());
        scale = scale.max(lhs.norm()).max(rhs.norm());
    }
    Ok(KmsReport {
        side: data.side,
        samples: s_samples.len(),
        max_residual: max_res,
        scale,
        tolerance,
        pass: max_res <= tolerance * scale.max(f64::MIN_POSITIVE),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModularReport {
    pub side: Side,
    pub spanning_set: usize,
    /// `j∘κ = -κ'`, compared bit for bit.
    pub j_kappa_exact: bool,
    pub j_squared_exact: bool,
    /// `max |⟨ju, jv⟩ - ⟨v, u⟩|`.
    pub antiunitarity_residual: f64,
    /// `max |s_direct - j e^{-βℓ/2}|` over the spanning set, relative.
    pub polar_residual: f64,
    /// `e^{-βℓ/2}κα = κ'α` for real `α`.
    pub half_period_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

pub fn modular_check(data: &ModularData, spanning_set: &[SpatialFunction], tolerance: f64) -> Result<ModularReport> {
    ensure(!spanning_set.is_empty(), || "empty spanning set".into())?;
    let mass = data.mass();
    let mut jk = true;
    let mut jj = true;
    let mut anti = 0.0f64;
    let mut polar = 0.0f64;
    let mut half = 0.0f64;
    for (i, alpha) in spanning_set.iter().enumerate() {
        let (k, kp) = data.doubling_maps(alpha)?;
        jk &= data.j(&k) == kp.scaled(c(-1.0));
        jj &= data.j(&data.j(&k)) == k;
        let other = &spanning_set[(i + 1) % spanning_set.len()];
        let v = data.kappa_prime(other)?.plus(&data.kappa(other)?.scaled(Complex64::new(0.3, -1.1)))?;
        let lhs = data.j(&k).inner(&data.j(&v), mass)?;
        let rhs = v.inner(&k, mass)?;
        anti = anti.max((lhs - rhs).norm() / (1.0 + rhs.norm()));
        let direct = data.tomita_direct(alpha)?;
        let via = data.tomita_polar(&k)?;
        let scale = direct.norm_sqr(mass)?.sqrt().max(f64::MIN_POSITIVE);
        let diff = direct.plus(&via.scaled(c(-1.0)))?;
        polar = polar.max(diff.norm_sqr(mass)?.sqrt() / scale);
        let re = alpha.real_part();
        let h = data.translate(&data.kappa(&re)?, c(0.5 * data.spec.beta))?;
        let kp_re = data.kappa_prime(&re)?;
        let d = h.plus(&kp_re.scaled(c(-1.0)))?;
        half = half.max(d.norm_sqr(mass)?.sqrt() / kp_re.norm_sqr(mass)?.sqrt().max(f64::MIN_POSITIVE));
    }
    Ok(ModularReport {
        side: data.side,
        spanning_set: spanning_set.len(),
        j_kappa_exact: jk,
        j_squared_exact: jj,
        antiunitarity_residual: anti,
        polar_residual: polar,
        half_period_residual: half,
        tolerance,
        pass: jk && jj && anti <= tolerance && polar <= tolerance && half <= tolerance,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityReport {
    pub s1: f64,
    pub s2: f64,
    pub modes: usize,
    /// Smallest singular value of `(α₁, α₂) ↦ e^{-s₁ℓ}κα₁ + e^{-s₂ℓ}κα₂`.
    pub smallest_singular_value: f64,
    pub largest_singular_value: f64,
    /// `e^{-2(s₂-s₁)m}`, the norm of the contraction separating the slices.
    pub contraction: f64,
    /// Rank of the single-slice map `α ↦ e^{-s₁ℓ}κα` (numerical, 1e-12 relative).
    pub single_slice_rank: usize,
    pub dimension: usize,
    pub pass: bool,
}

fn slice_columns(data: &ModularData, s: f64) -> Result<DMatrix<Complex64>> {
    let n = data.modes.len();
    let mut cols = DMatrix::<Complex64>::zeros(2 * n, n);
    for m in 0..n {
        let e = SpatialFunction::mode(data.modes.clone(), m, c(1.0));
        let u = data.translate(&data.kappa(&e)?, c(s))?;
        for (r, z) in u.linear_coordinates().into_iter().enumerate() {
            cols[(r, m)] = z;
        }
    }
    Ok(cols)
}

/// Two sharp-time slices span the doubled space on a finite lattice; one
/// slice does not. Singular values use the `-½` weights on both sides,
/// which cancel mode by mode.
pub fn sharp_time_density_check(s1: f64, s2: f64, data: &ModularData) -> Result<DensityReport> {
    let half = 0.5 * data.spec.beta;
    ensure(0.0 <= s1 && s1 < s2 && s2 <= half, || format!("need 0 <= s1 < s2 <= beta/2, got {s1}, {s2}"))?;
    let n = data.modes.len();
    let one = slice_columns(data, s1)?;
    let two = slice_columns(data, s2)?;
    let mut map = DMatrix::<Complex64>::zeros(2 * n, 2 * n);
    map.view_mut((0, 0), (2 * n, n)).copy_from(&one);
    map.view_mut((0, n), (2 * n, n)).copy_from(&two);
    let sv = map.svd(false, false).singular_values;
    let lo = sv.min();
    let hi = sv.max();
    let single = one.svd(false, false).singular_values;
    let smax = single.max();
    let rank = single.iter().filter(|&&x| x > 1e-12 * smax).count();
    let contraction = (-2.0 * (s2 - s1) * data.spec.boost.mass()).exp();
    Ok(DensityReport {
        s1,
        s2,
        modes: n,
        smallest_singular_value: lo,
        largest_singular_value: hi,
        contraction,
        single_slice_rank: rank,
        dimension: 2 * n,
        pass: lo > 1e-14 * hi && contraction < 1.0 && rank < 2 * n,
    })
}

/// `G(t) = ⟨κα, e^{itℓ} κα'⟩`, through [`ModularData::translate`].
pub fn thermal_two_point(alpha: &SpatialFunction, alpha2: &SpatialFunction, t: f64, data: &ModularData) -> Result<Complex64> {
    continued_two_point(alpha, alpha2, Complex64::new(t, 0.0), data)
}

/// `F(z) = ⟨κα, e^{izℓ} κα'⟩` for `0 ≤ Im z ≤ β`.
pub fn continued_two_point(
    alpha: &SpatialFunction,
    alpha2: &SpatialFunction,
    z: Complex64,
    data: &ModularData,
) -> Result<Complex64> {
    if z.im < 0.0 || z.im > data.spec.beta {
        return Err(Error::Strip(format!("Im z = {} outside [0, beta]", z.im)));
    }
    let k = data.kappa(alpha)?;
    let k2 = data.kappa(alpha2)?;
    // e^{izℓ} = e^{-sℓ} with s = -iz
    let moved = data.translate(&k2, -Complex64::i() * z)?;
    k.inner(&moved, data.mass())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TwoPointReport {
    pub side: Side,
    pub times: usize,
    /// `max |F(t + iβ) - ⟨e^{itℓ}κα', κα⟩|`, relative to the largest value.
    pub kms_boundary_residual: f64,
    /// `max |Im G_β(t) - Im ⟨α, e^{itμ}α'⟩|`: the commutator does not feel
    /// the temperature.
    pub commutator_residual: f64,
    pub scale: f64,
    pub pass: bool,
}

pub fn two_point_checks(
    alpha: &SpatialFunction,
    alpha2: &SpatialFunction,
    times: &[f64],
    data: &ModularData,
    kms_tol: f64,
    commutator_tol: f64,
) -> Result<TwoPointReport> {
    ensure(alpha.is_real(1e-12) && alpha2.is_real(1e-12), || "two-point checks need real functions".into())?;
    let mass = data.mass();
    let k = data.kappa(alpha)?;
    let k2 = data.kappa(alpha2)?;
    let mut kms = 0.0f64;
    let mut comm = 0.0f64;
    let mut scale = 0.0f64;
    for &t in times {
        let boundary = continued_two_point(alpha, alpha2, Complex64::new(t, data.spec.beta), data)?;
        let swapped = data.translate(&k2, Complex64::new(0.0, -t))?.inner(&k, mass)?;
        kms = kms.max((boundary - swapped).norm());
        let g = thermal_two_point(alpha, alpha2, t, data)?;
        let g0 = sobolev_half_inner(alpha, &alpha2.map_modes(|m| Complex64::from_polar(1.0, t * data.generator[m])), mass)?;
        comm = comm.max((g.im - g0.im).abs());
        scale = scale.max(boundary.norm()).max(g.norm());
    }
    let s = scale.max(f64::MIN_POSITIVE);
    Ok(TwoPointReport {
        side: data.side,
        times: times.len(),
        kms_boundary_residual: kms / s,
        commutator_residual: comm / s,
        scale,
        pass: kms <= kms_tol * s && comm <= commutator_tol * s,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modes::SpatialLattice;
    use crate::symbols::BoostSpec;
    use rand::SeedableRng;

    fn data(v: f64, beta: f64, side: Side) -> ModularData {
        let modes = Arc::new(ModeSet::lattice(&SpatialLattice::cubic(1, 6.0, 5).unwrap()));
        let spec = CompactSpec::new(beta, None, BoostSpec::along_axis(1.0, 2, v).unwrap()).unwrap();
        ModularData::new(modes, &spec, side).unwrap()
    }

    #[test]
    fn single_mode_j_kappa_components() {
        let d = data(0.6, 2.0, Side::Plus);
        let m = 3;
        let e = SpatialFunction::mode(d.modes.clone(), m, c(1.0));
        let k = d.kappa(&e).unwrap();
        let mr = d.modes.negated(m);
        // the conjugate slot carries the weight of its own mode
        assert_eq!(k.analytic.coeffs()[m], c((1.0 + d.rho[m]).sqrt()));
        assert_eq!(k.conjugate.coeffs()[mr], c(d.rho[mr].sqrt()));
        assert_ne!(d.rho[m], d.rho[mr]);
        let jk = d.j(&k);
        assert_eq!(jk.analytic.coeffs()[mr], c(-d.rho[mr].sqrt()));
        assert_eq!(jk.conjugate.coeffs()[m], c(-(1.0 + d.rho[m]).sqrt()));
    }

    #[test]
    fn kappa_prime_is_antilinear() {
        let d = data(0.3, 1.5, Side::Minus);
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        let a = SpatialFunction::random(d.modes.clone(), &mut rng, 2.0);
        let i = Complex64::i();
        let lhs = d.kappa_prime(&a.scaled(i)).unwrap();
        let rhs = d.kappa_prime(&a).unwrap().scaled(-i);
        assert!(lhs.max_difference(&rhs) < 1e-15);
        let lin = d.kappa(&a.scaled(i)).unwrap();
        assert!(lin.max_difference(&d.kappa(&a).unwrap().scaled(i)) < 1e-15);
    }

    #[test]
    fn zero_temperature_limit() {
        let d = data(0.6, 400.0, Side::Plus);
        let e = SpatialFunction::mode(d.modes.clone(), 5, c(1.0));
        let k = d.kappa(&e).unwrap();
        assert!(k.max_difference(&DoubledVector::new(e, SpatialFunction::zero(d.modes.clone())).unwrap()) < 1e-80);
    }

    #[test]
    fn translation_group_law() {
        let d = data(0.6, 2.0, Side::Plus);
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        let a = SpatialFunction::random(d.modes.clone(), &mut rng, 2.0);
        let u = d.kappa(&a).unwrap();
        assert_eq!(d.translate(&u, c(0.0)).unwrap(), u);
        let s1 = Complex64::new(0.3, 1.2);
        let s2 = Complex64::new(-0.1, -0.4);
        let two = d.translate(&d.translate(&u, s1).unwrap(), s2).unwrap();
        let one = d.translate(&u, s1 + s2).unwrap();
        assert!(two.max_difference(&one) < 1e-14);
        assert!(matches!(d.translate(&u, c(2.5)), Err(Error::Strip(_))));
    }

    #[test]
    fn equal_time_weight_is_half_period_coth() {
        let d = data(0.0, 2.0, Side::Plus);
        for m in [0, 3, 5] {
            let e = SpatialFunction::mode(d.modes.clone(), m, c(1.0));
            let re = e.real_part();
            let g = thermal_two_point(&re, &re, 0.0, &d).unwrap();
            let mu = d.generator[m];
            let direct = sobolev_half_inner(&re, &re, 1.0).unwrap().re * (0.5 * 2.0 * mu).tanh().recip();
            assert!((g.re - direct).abs() < 1e-14 * direct);
        }
    }
}
