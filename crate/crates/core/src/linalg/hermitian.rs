use std::ops::Deref;

use num_complex::Complex64 as C64;

use super::eig::{hermitian_eig, EigenDecomposition};
use super::matrix::CMatrix;
use crate::error::{Error, Result};
use crate::tolerance::Tolerance;

/// A square complex matrix that is Hermitian within tolerance.
///
/// Construction checks `‖A − A†‖_max ≤ η` and then stores the symmetrized
/// matrix `(A + A†)/2`, so every value of this type is exactly Hermitian.
#[derive(Clone, Debug, PartialEq)]
pub struct Hermitian(CMatrix);

impl Hermitian {
    pub fn new(m: CMatrix) -> Result<Self> {
        Self::with_tolerance(m, &Tolerance::default())
    }

    pub fn with_tolerance(m: CMatrix, tol: &Tolerance) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::Shape(format!("{}x{} matrix is not square", m.rows(), m.cols())));
        }
        let defect = m.hermiticity_defect();
        let tolerance = tol.hermiticity(m.max_abs());
        if defect > tolerance {
            return Err(Error::NotHermitian { defect, tolerance });
        }
        Ok(Self::symmetrized(m))
    }

    /// Symmetrizes without checking. Use only for matrices that are Hermitian
    /// by construction.
    pub(crate) fn symmetrized(m: CMatrix) -> Self {
        let d = m.rows();
        let s = CMatrix::from_fn(d, d, |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5);
        Self(s)
    }

    pub fn zeros(dim: usize) -> Self {
        Self(CMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        Self(CMatrix::identity(dim))
    }

    pub fn diag(values: &[f64]) -> Self {
        Self(CMatrix::diag(values))
    }

    /// Rank-one projector-like operator `|v><v|` (not normalized).
    pub fn projector(v: &[C64]) -> Self {
        Self::symmetrized(CMatrix::outer(v, v))
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn trace_re(&self) -> f64 {
        self.0.trace().re
    }

    pub fn add(&self, other: &Self) -> Self {
        Self(&self.0 + &other.0)
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self(&self.0 - &other.0)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(self.0.scale_re(s))
    }

    /// `self + s·other`
    pub fn add_scaled(&self, s: f64, other: &Self) -> Self {
        Self(&self.0 + &other.0.scale_re(s))
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self(self.0.kron(&other.0))
    }

    /// `X · self · X†`
    pub fn conjugate_by(&self, x: &CMatrix) -> Self {
        Self::symmetrized(x.matmul(&self.0).matmul(&x.adjoint()))
    }

    /// Real Hilbert–Schmidt inner product.
    pub fn hs_inner(&self, other: &Self) -> f64 {
        self.0.hs_inner(&other.0).re
    }

    pub fn eig(&self) -> EigenDecomposition {
        hermitian_eig(self)
    }

    /// Applies a real function to the spectrum.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> Self {
        let e = self.eig();
        let d = self.dim();
        let mut out = CMatrix::zeros(d, d);
        for (lambda, v) in e.eigenvalues.iter().zip(&e.eigenvectors) {
            let w = f(*lambda);
            if w == 0.0 {
                continue;
            }
            for i in 0..d {
                for j in 0..d {
                    out[(i, j)] += v[i] * v[j].conj() * w;
                }
            }
        }
        Self::symmetrized(out)
    }

    /// Square root of a positive semidefinite operator; negative rounding
    /// noise in the spectrum is clipped to zero.
    pub fn sqrt_psd(&self) -> Self {
        self.map_spectrum(|x| x.max(0.0).sqrt())
    }

    /// Largest eigenvalue modulus.
    pub fn spectral_norm(&self) -> f64 {
        self.eig().eigenvalues.iter().map(|x| x.abs()).fold(0.0, f64::max)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        *self.eig().eigenvalues.last().unwrap_or(&0.0)
    }
}

impl Deref for Hermitian {
    type Target = CMatrix;
    fn deref(&self) -> &CMatrix {
        &self.0
    }
}

impl AsRef<CMatrix> for Hermitian {
    fn as_ref(&self) -> &CMatrix {
        &self.0
    }
}

/// Positivity report for a Hermitian operator under the support cutoff.
#[derive(Clone, Debug)]
pub struct Positivity {
    pub min_eigenvalue: f64,
    pub cutoff: f64,
    pub rank: usize,
}

impl Positivity {
    pub fn is_psd(&self) -> bool {
        self.min_eigenvalue >= -self.cutoff
    }
}

pub fn positivity(a: &Hermitian, tol: &Tolerance) -> Positivity {
    let e = a.eig();
    let scale = e.eigenvalues.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let cutoff = tol.support_cutoff(a.dim(), scale);
    Positivity {
        min_eigenvalue: *e.eigenvalues.last().unwrap_or(&0.0),
        cutoff,
        rank: e.eigenvalues.iter().filter(|&&x| x > cutoff).count(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_hermitian() {
        let m = CMatrix::from_fn(2, 2, |i, j| C64::new((i * 2 + j) as f64, 0.0));
        assert!(matches!(Hermitian::new(m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn symmetrizes_small_defects() {
        let mut m = CMatrix::identity(2);
        m[(0, 1)] = C64::new(1e-12, 0.0);
        let h = Hermitian::new(m).unwrap();
        assert_eq!(h.hermiticity_defect(), 0.0);
        assert!((h[(1, 0)].re - 5e-13).abs() < 1e-25);
    }

    #[test]
    fn sqrt_squares_back() {
        let h = Hermitian::diag(&[4.0, 1.0, 0.25]);
        let s = h.sqrt_psd();
        assert!(s.matmul(&s).max_abs_diff(&h) < 1e-14);
    }
}
