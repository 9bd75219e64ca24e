//! Separable test functions on spacetime and the transforms the
//! quantization maps need.
//!
//! A [`TestFunction`] is a finite sum of products of one-dimensional
//! profiles; axis 0 is time, axes 1.. are the spatial coordinates.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::quad::{legendre, Rule};

/// Gaussian profiles are cut at `center ± GAUSS_SUPPORT·width`; the neglected
/// mass is below `exp(-36)` relative.
pub const GAUSS_SUPPORT: f64 = 8.5;

const PANEL_ORDER: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Profile {
    /// `exp(-(x-c)²/(2w²)) · exp(i·freq·x)`.
    Gaussian { center: f64, width: f64, freq: f64 },
    /// `exp(1 - 1/(1-u²))` with `u = (x-c)/h`, times `exp(i·freq·x)`.
    Bump { center: f64, half_width: f64, freq: f64 },
    Indicator { lo: f64, hi: f64 },
    /// Point mass at `at`.
    Sharp { at: f64 },
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `(1 - exp(-z L))/z`, stable near `z = 0`.
fn one_minus_exp_over(z: Complex64, len: f64) -> Complex64 {
    let x = z * len;
    if x.norm() < 1e-4 {
        // series 1 - x/2 + x²/6 - x³/24
        len * (1.0 - x / 2.0 + x * x / 6.0 - x * x * x / 24.0)
    } else {
        (1.0 - (-x).exp()) / z
    }
}

impl Profile {
    pub fn gaussian(center: f64, width: f64) -> Self {
        Profile::Gaussian { center, width, freq: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Profile::Gaussian { center, width, freq } => {
                center.is_finite() && freq.is_finite() && width > 0.0 && width.is_finite()
            }
            Profile::Bump { center, half_width, freq } => {
                center.is_finite() && freq.is_finite() && half_width > 0.0 && half_width.is_finite()
            }
            Profile::Indicator { lo, hi } => lo.is_finite() && hi.is_finite() && lo < hi,
            Profile::Sharp { at } => at.is_finite(),
        };
        ensure(ok, || format!("invalid profile {self:?}"))
    }

    /// Closed interval containing the support.
    pub fn support(&self) -> (f64, f64) {
        match *self {
            Profile::Gaussian { center, width, .. } => {
                (center - GAUSS_SUPPORT * width, center + GAUSS_SUPPORT * width)
            }
            Profile::Bump { center, half_width, .. } => (center - half_width, center + half_width),
            Profile::Indicator { lo, hi } => (lo, hi),
            Profile::Sharp { at } => (at, at),
        }
    }

    pub fn is_sharp(&self) -> bool {
        matches!(self, Profile::Sharp { .. })
    }

    /// Mirror image under `x ↦ -x`.
    pub fn reflected(&self) -> Self {
        match *self {
            Profile::Gaussian { center, width, freq } => Profile::Gaussian { center: -center, width, freq: -freq },
            Profile::Bump { center, half_width, freq } => Profile::Bump { center: -center, half_width, freq: -freq },
            Profile::Indicator { lo, hi } => Profile::Indicator { lo: -hi, hi: -lo },
            Profile::Sharp { at } => Profile::Sharp { at: -at },
        }
    }

    /// `x ↦ p(x - by)`, returned as a profile and the phase the modulation picks up.
    pub fn shifted(&self, by: f64) -> (Self, Complex64) {
        match *self {
            Profile::Gaussian { center, width, freq } => {
                (Profile::Gaussian { center: center + by, width, freq }, Complex64::from_polar(1.0, -freq * by))
            }
            Profile::Bump { center, half_width, freq } => {
                (Profile::Bump { center: center + by, half_width, freq }, Complex64::from_polar(1.0, -freq * by))
            }
            Profile::Indicator { lo, hi } => (Profile::Indicator { lo: lo + by, hi: hi + by }, c(1.0, 0.0)),
            Profile::Sharp { at } => (Profile::Sharp { at: at + by }, c(1.0, 0.0)),
        }
    }

    /// Pointwise value (zero for a point mass).
    pub fn value(&self, x: f64) -> Complex64 {
        match *self {
            Profile::Gaussian { center, width, freq } => {
                let (lo, hi) = self.support();
                if x < lo || x > hi {
                    return c(0.0, 0.0);
                }
                let u = (x - center) / width;
                Complex64::from_polar((-0.5 * u * u).exp(), freq * x)
            }
            Profile::Bump { center, half_width, freq } => {
                let u = (x - center) / half_width;
                if u.abs() >= 1.0 {
                    return c(0.0, 0.0);
                }
                Complex64::from_polar((1.0 - 1.0 / (1.0 - u * u)).exp(), freq * x)
            }
            Profile::Indicator { lo, hi } => {
                if x >= lo && x <= hi {
                    c(1.0, 0.0)
                } else {
                    c(0.0, 0.0)
                }
            }
            Profile::Sharp { .. } => c(0.0, 0.0),
        }
    }

    /// Frequency beyond which the Fourier transform is negligible: relative
    /// `1.5e-8` for a Gaussian, so products of two are below `1e-15`.
    /// `None` for non-smooth profiles.
    pub fn bandwidth(&self) -> Option<f64> {
        match *self {
            Profile::Gaussian { width, freq, .. } => Some(freq.abs() + 6.0 / width),
            Profile::Bump { half_width, freq, .. } => Some(freq.abs() + 400.0 / half_width),
            Profile::Indicator { .. } | Profile::Sharp { .. } => None,
        }
    }

    /// `∫ exp(-iωx) p(x) dx`. Gaussians use the closed form of the untruncated
    /// profile.
    pub fn fourier(&self, omega: f64) -> Complex64 {
        match *self {
            Profile::Gaussian { center, width, freq } => {
                let d = omega - freq;
                let amp = width * (2.0 * std::f64::consts::PI).sqrt() * (-0.5 * width * width * d * d).exp();
                Complex64::from_polar(amp, -d * center)
            }
            Profile::Indicator { lo, hi } => {
                c(0.0, -omega * lo).exp() * one_minus_exp_over(c(0.0, omega), hi - lo)
            }
            Profile::Sharp { at } => Complex64::from_polar(1.0, -omega * at),
            Profile::Bump { .. } => self.numeric(c(0.0, omega)),
        }
    }

    /// `∫ exp(-λx) p(x) dx` over the (truncated) support.
    pub fn laplace(&self, lambda: Complex64) -> Complex64 {
        match *self {
            Profile::Indicator { lo, hi } => (-lambda * lo).exp() * one_minus_exp_over(lambda, hi - lo),
            Profile::Sharp { at } => (-lambda * at).exp(),
            Profile::Gaussian { center, width, freq } if freq == 0.0 && lambda.im == 0.0 => {
                truncated_gaussian_laplace(center, width, lambda.re).map_or_else(|| self.numeric(lambda), |v| c(v, 0.0))
            }
            _ => self.numeric(lambda),
        }
    }

    /// `∫ exp(-λx) p(x) dx` by composite Gauss–Legendre on the support, with
    /// panels fine enough for both the profile and the exponential.
    fn numeric(&self, lambda: Complex64) -> Complex64 {
        let (lo, hi) = self.support();
        let (scale, freq) = match *self {
            Profile::Gaussian { width, freq, .. } => (width / 2.0, freq),
            Profile::Bump { half_width, freq, .. } => (half_width / 8.0, freq),
            _ => unreachable!(),
        };
        let rate = lambda.norm() + freq.abs();
        let h = if rate > 0.0 { scale.min(4.0 / rate) } else { scale };
        let panels = ((hi - lo) / h).ceil().max(1.0) as usize;
        let base = base_rule();
        let step = (hi - lo) / panels as f64;
        let mut acc = c(0.0, 0.0);
        for p in 0..panels {
            let a = lo + step * p as f64;
            for (x, w) in base.nodes.iter().zip(&base.weights) {
                let t = a + 0.5 * step * (x + 1.0);
                acc += 0.5 * step * w * self.value(t) * (-lambda * t).exp();
            }
        }
        acc
    }
}

/// `∫_{c-Rw}^{c+Rw} exp(-λx - (x-c)²/(2w²)) dx` by completing the square;
/// `None` when the shifted centre is so far outside that erfc underflows.
fn truncated_gaussian_laplace(center: f64, width: f64, lambda: f64) -> Option<f64> {
    let shifted = center - lambda * width * width;
    let s = std::f64::consts::SQRT_2 * width;
    let a = (center - GAUSS_SUPPORT * width - shifted) / s;
    let b = (center + GAUSS_SUPPORT * width - shifted) / s;
    if a > 25.0 || b < -25.0 {
        return None;
    }
    // erf(b) - erf(a) without cancellation
    let diff = if a > 0.0 {
        libm::erfc(a) - libm::erfc(b)
    } else if b < 0.0 {
        libm::erfc(-b) - libm::erfc(-a)
    } else {
        libm::erf(b) - libm::erf(a)
    };
    let pre = (-lambda * center + 0.5 * lambda * lambda * width * width).exp();
    Some(pre * width * (std::f64::consts::PI / 2.0).sqrt() * diff)
}

fn base_rule() -> &'static Rule {
    static RULE: std::sync::OnceLock<Rule> = std::sync::OnceLock::new();
    RULE.get_or_init(|| legendre(PANEL_ORDER))
}

/// One separable product `amp · time(t) · Π space_j(x_j)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub amp: Complex64,
    pub time: Profile,
    pub space: Vec<Profile>,
}

impl Term {
    pub fn spatial_fourier(&self, k: &[f64]) -> Complex64 {
        self.space.iter().zip(k).map(|(p, &kj)| p.fourier(kj)).product()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    pub terms: Vec<Term>,
}

impl TestFunction {
    pub fn product(time: Profile, space: Vec<Profile>) -> Self {
        TestFunction {
            terms: vec![Term { amp: c(1.0, 0.0), time, space }],
        }
    }

    /// Sharp-time slice `δ_s ⊗ h`.
    pub fn sharp(at: f64, space: Vec<Profile>) -> Self {
        Self::product(Profile::Sharp { at }, space)
    }

    pub fn validate(&self, spatial_dim: usize) -> Result<()> {
        ensure(!self.terms.is_empty(), || "test function has no terms".into())?;
        for t in &self.terms {
            ensure(t.space.len() == spatial_dim, || {
                format!("term has {} spatial profiles, expected {spatial_dim}", t.space.len())
            })?;
            ensure(t.amp.re.is_finite() && t.amp.im.is_finite(), || "non-finite amplitude".into())?;
            t.time.validate()?;
            for p in &t.space {
                p.validate()?;
            }
        }
        Ok(())
    }

    pub fn spatial_dim(&self) -> usize {
        self.terms.first().map_or(0, |t| t.space.len())
    }

    /// Hull of the supports along `axis` (0 = time).
    pub fn axis_support(&self, axis: usize) -> (f64, f64) {
        self.terms.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), t| {
            let (a, b) = if axis == 0 { t.time.support() } else { t.space[axis - 1].support() };
            (lo.min(a), hi.max(b))
        })
    }

    pub fn has_sharp_time(&self) -> bool {
        self.terms.iter().any(|t| t.time.is_sharp())
    }

    /// Largest bandwidth along `axis`, if every profile there is smooth.
    pub fn axis_bandwidth(&self, axis: usize) -> Option<f64> {
        self.terms.iter().try_fold(0.0f64, |acc, t| {
            let p = if axis == 0 { &t.time } else { &t.space[axis - 1] };
            p.bandwidth().map(|b| acc.max(b))
        })
    }

    /// Full spacetime Fourier transform `∫ exp(-i(Et + k·x)) f`.
    pub fn fourier(&self, energy: f64, k: &[f64]) -> Complex64 {
        self.terms
            .iter()
            .map(|t| t.amp * t.time.fourier(energy) * t.spatial_fourier(k))
            .sum()
    }

    pub fn reflected_in_time(&self) -> Self {
        TestFunction {
            terms: self
                .terms
                .iter()
                .map(|t| Term { amp: t.amp, time: t.time.reflected(), space: t.space.clone() })
                .collect(),
        }
    }

    /// `(t, x) ↦ f(t - by, x)`.
    pub fn shifted_in_time(&self, by: f64) -> Self {
        TestFunction {
            terms: self
                .terms
                .iter()
                .map(|t| {
                    let (time, phase) = t.time.shifted(by);
                    Term { amp: t.amp * phase, time, space: t.space.clone() }
                })
                .collect(),
        }
    }

    pub fn reflected_in_x1(&self) -> Self {
        TestFunction {
            terms: self
                .terms
                .iter()
                .map(|t| {
                    let mut space = t.space.clone();
                    space[0] = space[0].reflected();
                    Term { amp: t.amp, time: t.time, space }
                })
                .collect(),
        }
    }

    pub fn plus(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        TestFunction { terms }
    }

    pub fn scaled(&self, a: Complex64) -> Self {
        TestFunction {
            terms: self
                .terms
                .iter()
                .map(|t| Term { amp: t.amp * a, time: t.time, space: t.space.clone() })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Half {
    PositiveTime,
    NegativeTime,
    PositiveX1,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestFunctionFamily {
    members: Vec<TestFunction>,
    half: Half,
    seed: Option<u64>,
}

impl TestFunctionFamily {
    /// Checks that every member sits strictly inside `half` (a point mass on
    /// the boundary hyperplane is allowed).
    pub fn new(members: Vec<TestFunction>, half: Half, seed: Option<u64>) -> Result<Self> {
        ensure(!members.is_empty(), || "family is empty".into())?;
        let dim = members[0].spatial_dim();
        for (i, f) in members.iter().enumerate() {
            f.validate(dim)?;
            for t in &f.terms {
                let (p, axis_name) = match half {
                    Half::PositiveTime => (t.time, "t"),
                    Half::NegativeTime => (t.time.reflected(), "-t"),
                    Half::PositiveX1 => (t.space[0], "x1"),
                };
                let (lo, _) = p.support();
                let inside = if p.is_sharp() { lo >= 0.0 } else { lo > 0.0 };
                if !inside {
                    return Err(Error::Support(format!(
                        "member {i} reaches {axis_name} = {lo} outside the half-space"
                    )));
                }
            }
        }
        Ok(TestFunctionFamily { members, half, seed })
    }

    /// `n` Gaussian bumps with random centres and widths inside `half`, the
    /// last `slabs` of which are broad plane-wave-modulated slabs.
    pub fn random_gaussians<R: Rng>(
        n: usize,
        slabs: usize,
        half: Half,
        spatial_dim: usize,
        rng: &mut R,
        seed: Option<u64>,
    ) -> Result<Self> {
        ensure(slabs <= n, || "more slabs than members".into())?;
        let mut members = Vec::with_capacity(n);
        for i in 0..n {
            // slab j carries the plane wave exp(0.9·j·i·y) on a broad envelope
            let slab = (i + slabs >= n).then(|| 0.9 * (i + slabs + 1 - n) as f64);
            let w: f64 = rng.random_range(0.2..0.45);
            let inward = Profile::gaussian(GAUSS_SUPPORT * w + rng.random_range(0.02..1.2), w);
            // the other axes: free Gaussians, or the broad slab envelope on the first of them
            let mut free: Vec<Profile> = (0..spatial_dim)
                .map(|_| Profile::gaussian(rng.random_range(-1.0..1.0), rng.random_range(0.4..0.8)))
                .collect();
            let (time, space) = match half {
                Half::PositiveTime | Half::NegativeTime => {
                    if let Some(q) = slab {
                        free[0] = Profile::Gaussian { center: rng.random_range(-0.5..0.5), width: 2.0, freq: q };
                    }
                    let t = if half == Half::NegativeTime { inward.reflected() } else { inward };
                    (t, free)
                }
                Half::PositiveX1 => {
                    let t = match slab {
                        Some(q) => Profile::Gaussian { center: rng.random_range(-0.5..0.5), width: 2.0, freq: q },
                        None => Profile::gaussian(rng.random_range(-1.0..1.0), rng.random_range(0.3..0.6)),
                    };
                    free[0] = inward;
                    (t, free)
                }
            };
            let amp = Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU));
            members.push(TestFunction { terms: vec![Term { amp, time, space }] });
        }
        Self::new(members, half, seed)
    }

    /// Positive-time family with every time profile inside `(lo, hi)`; the
    /// spatial profiles follow [`Self::random_gaussians`].
    pub fn random_gaussians_in_window<R: Rng>(
        n: usize,
        slabs: usize,
        window: (f64, f64),
        spatial_dim: usize,
        rng: &mut R,
        seed: Option<u64>,
    ) -> Result<Self> {
        let (lo, hi) = window;
        ensure(lo >= 0.0 && hi > lo, || format!("bad time window ({lo}, {hi})"))?;
        ensure(slabs <= n, || "more slabs than members".into())?;
        let reach = 0.5 * (hi - lo) / GAUSS_SUPPORT;
        let mut members = Vec::with_capacity(n);
        for i in 0..n {
            let slab = (i + slabs >= n).then(|| 0.9 * (i + slabs + 1 - n) as f64);
            let w = reach * rng.random_range(0.3..0.95);
            let room = (hi - lo) - 2.0 * GAUSS_SUPPORT * w;
            let time = Profile::gaussian(lo + GAUSS_SUPPORT * w + room * rng.random_range(0.05..0.95), w);
            let mut space: Vec<Profile> = (0..spatial_dim)
                .map(|_| Profile::gaussian(rng.random_range(-1.0..1.0), rng.random_range(0.4..0.8)))
                .collect();
            if let Some(q) = slab {
                space[0] = Profile::Gaussian { center: rng.random_range(-0.5..0.5), width: 2.0, freq: q };
            }
            let amp = Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU));
            members.push(TestFunction { terms: vec![Term { amp, time, space }] });
        }
        Self::new(members, Half::PositiveTime, seed)
    }

    pub fn members(&self) -> &[TestFunction] {
        &self.members
    }

    pub fn half(&self) -> Half {
        self.half
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn spatial_dim(&self) -> usize {
        self.members[0].spatial_dim()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_fourier_matches_numeric() {
        let p = Profile::Gaussian { center: 3.0, width: 0.4, freq: 1.5 };
        for w in [-4.0, 0.0, 0.7, 6.0] {
            let exact = p.fourier(w);
            let num = p.numeric(Complex64::new(0.0, w));
            assert!((exact - num).norm() < 1e-14, "{w}: {exact} vs {num}");
        }
    }

    #[test]
    fn gaussian_laplace_closed_form_matches_quadrature() {
        let p = Profile::Gaussian { center: 3.0, width: 0.35, freq: 0.0 };
        for lam in [-3.0, 0.0, 0.8, 7.5, 30.0, 60.0] {
            let fast = p.laplace(Complex64::new(lam, 0.0));
            let slow = p.numeric(Complex64::new(lam, 0.0));
            assert!((fast - slow).norm() <= 1e-13 * slow.norm(), "{lam}: {fast} vs {slow}");
        }
    }

    #[test]
    fn indicator_laplace_closed_form() {
        let p = Profile::Indicator { lo: 0.0, hi: 2.0 };
        let mu = 1.7;
        let v = p.laplace(Complex64::new(mu, 0.0));
        assert!((v.re - (1.0 - (-2.0 * mu).exp()) / mu).abs() < 1e-15);
        let small = p.laplace(Complex64::new(1e-9, 0.0));
        assert!((small.re - 2.0).abs() < 1e-8);
    }

    #[test]
    fn bump_fourier_at_zero_is_area() {
        // area of exp(1 - 1/(1-u²)) on [-1,1] is 0.443993816168...·e
        let p = Profile::Bump { center: 0.0, half_width: 1.0, freq: 0.0 };
        let a = p.fourier(0.0);
        assert!((a.re - 0.443_993_816_168_079_4 * std::f64::consts::E).abs() < 1e-12);
    }

    #[test]
    fn family_rejects_wrong_half() {
        let f = TestFunction::product(Profile::gaussian(0.5, 0.3), vec![Profile::gaussian(0.0, 1.0)]);
        assert!(matches!(
            TestFunctionFamily::new(vec![f], Half::PositiveTime, None),
            Err(Error::Support(_))
        ));
    }
}
