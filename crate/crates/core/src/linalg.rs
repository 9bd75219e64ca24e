//! Dense Hermitian helpers and the Gram-matrix report.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;

pub type CMatrix = DMatrix<Complex64>;

/// Eigenvalues (ascending) and eigenvectors of the Hermitian part of `m`.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let h = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = CMatrix::from_fn(m.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    (vals, vecs)
}

pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let h = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let mut v: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Eigenvalues of a real symmetric matrix, ascending.
pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut v: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

pub fn spectral_norm(m: &CMatrix) -> f64 {
    m.clone().svd(false, false).singular_values.max()
}

/// Largest entry of `|M - M†|`.
pub fn hermiticity_error(m: &CMatrix) -> f64 {
    (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn passed(self) -> bool {
        self == Verdict::Pass
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GramReport {
    pub family_seed: Option<u64>,
    pub reflection: String,
    pub velocity: Vec<f64>,
    pub matrix: Vec<Vec<Complex64>>,
    pub eigenvalues: Vec<f64>,
    pub min_eig: f64,
    /// Spectral norm of the matrix.
    pub norm: f64,
    /// Relative tolerance: pass iff `min_eig ≥ -tolerance·norm`.
    pub tolerance: f64,
    pub hermiticity_error: f64,
    /// Condition number of the plain `L²` Gram of the family, when computed.
    pub l2_condition: Option<f64>,
    /// Set when `l2_condition` exceeds `1e12` (near-dependent members).
    pub degenerate: bool,
    pub verdict: Verdict,
}

impl GramReport {
    pub fn new(m: &CMatrix, tolerance: f64, reflection: &str, velocity: Vec<f64>, family_seed: Option<u64>) -> Self {
        let eigenvalues = hermitian_eigenvalues(m);
        let norm = spectral_norm(m);
        let min_eig = eigenvalues.first().copied().unwrap_or(0.0);
        let herm = hermiticity_error(m);
        let ok = min_eig >= -tolerance * norm && herm <= 1e-12 * norm.max(f64::MIN_POSITIVE);
        GramReport {
            family_seed,
            reflection: reflection.to_string(),
            velocity,
            matrix: (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect(),
            eigenvalues,
            min_eig,
            norm,
            tolerance,
            hermiticity_error: herm,
            l2_condition: None,
            degenerate: false,
            verdict: Verdict::from_bool(ok),
        }
    }

    pub fn with_l2_gram(mut self, l2: &CMatrix) -> Self {
        let ev = hermitian_eigenvalues(l2);
        let lo = ev.first().copied().unwrap_or(0.0);
        let hi = ev.last().copied().unwrap_or(0.0);
        let cond = if lo > 0.0 { hi / lo } else { f64::INFINITY };
        self.l2_condition = Some(cond);
        self.degenerate = cond > 1e12;
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict.passed()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigen_of_known_hermitian() {
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[Complex64::new(2.0, 0.0), Complex64::new(0.0, 1.0), Complex64::new(0.0, -1.0), Complex64::new(2.0, 0.0)],
        );
        let (vals, vecs) = hermitian_eigen(&m);
        assert!((vals[0] - 1.0).abs() < 1e-14 && (vals[1] - 3.0).abs() < 1e-14);
        let r = &m * &vecs - &vecs * CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(2, vals.iter().map(|&x| Complex64::new(x, 0.0))));
        assert!(r.norm() < 1e-13);
    }

    #[test]
    fn report_flags_negative_direction() {
        let m = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![Complex64::new(1.0, 0.0), Complex64::new(-0.1, 0.0)]));
        let r = GramReport::new(&m, 1e-10, "theta", vec![0.0], None);
        assert_eq!(r.verdict, Verdict::Fail);
        assert!((r.min_eig + 0.1).abs() < 1e-15);
    }
}
