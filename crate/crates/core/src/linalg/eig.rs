//! Cyclic Jacobi eigensolver for Hermitian matrices.

use num_complex::Complex64 as C64;

use super::hermitian::Hermitian;
use super::matrix::CMatrix;
use crate::error::Result;
use crate::tolerance::Tolerance;

const MAX_SWEEPS: usize = 100;

/// Spectral decomposition `A = Σ λ_k v_k v_k†` with eigenvalues sorted
/// descending and orthonormal eigenvectors.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<Vec<C64>>,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `Σ λ_k v_k v_k†`
    pub fn reconstruct(&self) -> CMatrix {
        let d = self.dim();
        let mut out = CMatrix::zeros(d, d);
        for (lambda, v) in self.eigenvalues.iter().zip(&self.eigenvectors) {
            for i in 0..d {
                for j in 0..d {
                    out[(i, j)] += v[i] * v[j].conj() * *lambda;
                }
            }
        }
        out
    }

    /// Eigenvectors whose eigenvalue exceeds `cutoff`.
    pub fn support(&self, cutoff: f64) -> Vec<&[C64]> {
        self.eigenvalues
            .iter()
            .zip(&self.eigenvectors)
            .filter(|(l, _)| **l > cutoff)
            .map(|(_, v)| v.as_slice())
            .collect()
    }
}

/// Checks Hermiticity first, then decomposes.
pub fn hermitian_eig_checked(a: &CMatrix, tol: &Tolerance) -> Result<EigenDecomposition> {
    let h = Hermitian::with_tolerance(a.clone(), tol)?;
    Ok(hermitian_eig(&h))
}

pub fn hermitian_eig(a: &Hermitian) -> EigenDecomposition {
    let n = a.dim();
    let mut m = a.matrix().clone();
    let mut v = CMatrix::identity(n);
    let scale = m.frobenius_norm();

    if n > 1 && scale > 0.0 {
        for _ in 0..MAX_SWEEPS {
            let off: f64 = (0..n)
                .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| m[(i, j)].norm_sqr())
                .sum::<f64>()
                .sqrt();
            if off <= 1e-16 * scale {
                break;
            }
            for p in 0..n - 1 {
                for q in p + 1..n {
                    rotate(&mut m, &mut v, p, q);
                }
            }
        }
    }

    let mut pairs: Vec<(f64, Vec<C64>)> = (0..n).map(|k| (m[(k, k)].re, v.col(k))).collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    let (eigenvalues, eigenvectors) = pairs.into_iter().unzip();
    EigenDecomposition { eigenvalues, eigenvectors }
}

/// Annihilates `m[p][q]` with the unitary
/// `W = diag(1, e^{-iφ}) · [[c, s], [-s, c]]` acting on columns `p, q`.
fn rotate(m: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize) {
    let n = m.rows();
    let b = m[(p, q)];
    let abs_b = b.norm();
    if abs_b == 0.0 {
        return;
    }
    let app = m[(p, p)].re;
    let aqq = m[(q, q)].re;
    if abs_b <= 1e-300 || abs_b < f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
        m[(p, q)] = C64::new(0.0, 0.0);
        m[(q, p)] = C64::new(0.0, 0.0);
        return;
    }
    let phase = b / abs_b;
    let tau = (aqq - app) / (2.0 * abs_b);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    let ph = phase.conj();
    let w00 = C64::new(c, 0.0);
    let w01 = C64::new(s, 0.0);
    let w10 = ph * -s;
    let w11 = ph * c;

    // columns: M ← M W
    for k in 0..n {
        let mp = m[(k, p)];
        let mq = m[(k, q)];
        m[(k, p)] = mp * w00 + mq * w10;
        m[(k, q)] = mp * w01 + mq * w11;
    }
    // rows: M ← W† M
    for k in 0..n {
        let mp = m[(p, k)];
        let mq = m[(q, k)];
        m[(p, k)] = w00.conj() * mp + w10.conj() * mq;
        m[(q, k)] = w01.conj() * mp + w11.conj() * mq;
    }
    m[(p, q)] = C64::new(0.0, 0.0);
    m[(q, p)] = C64::new(0.0, 0.0);
    m[(p, p)] = C64::new(m[(p, p)].re, 0.0);
    m[(q, q)] = C64::new(m[(q, q)].re, 0.0);

    for k in 0..n {
        let vp = v[(k, p)];
        let vq = v[(k, q)];
        v[(k, p)] = vp * w00 + vq * w10;
        v[(k, q)] = vp * w01 + vq * w11;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn bell_t2() -> Hermitian {
        // ½(I − |φ⟩⟨φ|), |φ⟩ = (|00⟩ + |11⟩)/√2
        let phi = [
            C64::new(FRAC_1_SQRT_2, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(FRAC_1_SQRT_2, 0.0),
        ];
        Hermitian::identity(4).sub(&Hermitian::projector(&phi)).scale(0.5)
    }

    #[test]
    fn diagonal_is_sorted() {
        let e = hermitian_eig(&Hermitian::diag(&[3.0, 1.0, 2.0]));
        assert_eq!(e.eigenvalues, vec![3.0, 2.0, 1.0]);
        assert!((e.eigenvectors[1][2].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pauli_x() {
        let x = Hermitian::new(CMatrix::from_fn(2, 2, |i, j| {
            C64::new(if i != j { 1.0 } else { 0.0 }, 0.0)
        }))
        .unwrap();
        let e = hermitian_eig(&x);
        assert!((e.eigenvalues[0] - 1.0).abs() < 1e-15);
        assert!((e.eigenvalues[1] + 1.0).abs() < 1e-15);
        let v = &e.eigenvectors[0];
        assert!((v[0] / v[1] - C64::new(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn bell_complement_has_triple_half() {
        let t2 = bell_t2();
        let e = hermitian_eig(&t2);
        for k in 0..3 {
            assert!((e.eigenvalues[k] - 0.5).abs() < 1e-14);
        }
        assert!(e.eigenvalues[3].abs() < 1e-14);
        assert!(e.reconstruct().max_abs_diff(&t2) < 1e-14);
    }

    #[test]
    fn checked_rejects_non_hermitian() {
        let mut m = CMatrix::identity(2);
        m[(0, 1)] = C64::new(1.0, 0.0);
        assert!(hermitian_eig_checked(&m, &Tolerance::default()).is_err());
    }

    #[test]
    fn complex_entries_reconstruct() {
        let m = CMatrix::from_fn(5, 5, |i, j| {
            let (a, b) = (i as f64, j as f64);
            if i == j {
                C64::new(a - 2.0, 0.0)
            } else {
                C64::new((a * b + 1.0).sin(), (a - b) * 0.3)
            }
        });
        let h = Hermitian::new(Hermitian::symmetrized(m).into_matrix()).unwrap();
        let e = hermitian_eig(&h);
        assert!(e.reconstruct().max_abs_diff(&h) < 1e-12);
        for a in 0..5 {
            for b in 0..5 {
                let ip: C64 =
                    e.eigenvectors[a].iter().zip(&e.eigenvectors[b]).map(|(x, y)| x.conj() * y).sum();
                let expect = if a == b { 1.0 } else { 0.0 };
                assert!((ip - C64::new(expect, 0.0)).norm() < 1e-12);
            }
        }
    }
}
