//! Random test objects. Every generator takes the RNG explicitly.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::{CMatrix, Hermitian};
use crate::C64;

pub use rand_chacha::ChaCha8Rng;

/// Seeded generator used throughout the test suites.
pub fn rng(seed: u64) -> ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| complex_normal(rng))
}

/// Modified Gram–Schmidt on the columns; returns a matrix with orthonormal
/// columns spanning the same space.
fn orthonormal_columns(a: &CMatrix) -> CMatrix {
    let (m, n) = (a.rows(), a.cols());
    let mut cols: Vec<Vec<C64>> = (0..n).map(|j| a.col(j)).collect();
    for j in 0..n {
        for k in 0..j {
            let (done, rest) = cols.split_at_mut(j);
            let proj: C64 = done[k].iter().zip(&rest[0]).map(|(q, x)| q.conj() * x).sum();
            for (x, q) in rest[0].iter_mut().zip(&done[k]) {
                *x -= proj * q;
            }
        }
        let nrm = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        cols[j].iter_mut().for_each(|z| *z /= nrm);
    }
    CMatrix::from_fn(m, n, |i, j| cols[j][i])
}

/// Haar-random unitary.
pub fn random_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    orthonormal_columns(&ginibre(d, d, rng))
}

/// Random isometry `C^cols → C^rows` (`rows ≥ cols`).
pub fn random_isometry<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    assert!(rows >= cols, "an isometry needs rows ≥ cols");
    orthonormal_columns(&ginibre(rows, cols, rng))
}

pub fn random_unit_vector<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<C64> {
    random_isometry(d, 1, rng).col(0)
}

/// Random state of the given rank, `G G† / Tr(G G†)`.
pub fn random_density<R: Rng + ?Sized>(d: usize, rank: usize, rng: &mut R) -> Hermitian {
    let g = ginibre(d, rank, rng);
    let rho = Hermitian::symmetrized(g.matmul(&g.adjoint()));
    let tr = rho.trace_re();
    rho.scale(1.0 / tr)
}

/// Rows `block·h .. (block+1)·h` of `v`.
fn row_block(v: &CMatrix, block: usize, h: usize) -> CMatrix {
    CMatrix::from_fn(h, v.cols(), |i, j| v[(block * h + i, j)])
}

/// `count` Kraus operators `d1 × d0` cut from a random isometry.
pub fn random_kraus<R: Rng + ?Sized>(d0: usize, d1: usize, count: usize, rng: &mut R) -> Vec<CMatrix> {
    let v = random_isometry(d1 * count, d0, rng);
    (0..count).map(|m| row_block(&v, m, d1)).collect()
}

/// Kraus lists for an instrument; `counts[i]` operators for outcome `i`.
pub fn random_instrument_kraus<R: Rng + ?Sized>(d0: usize, d1: usize, counts: &[usize], rng: &mut R) -> Vec<Vec<CMatrix>> {
    let all = random_kraus(d0, d1, counts.iter().sum(), rng);
    let mut it = all.into_iter();
    counts.iter().map(|&c| it.by_ref().take(c).collect()).collect()
}

/// POVM with `outcomes` effects of rank at most `rank`.
pub fn random_povm<R: Rng + ?Sized>(d: usize, outcomes: usize, rank: usize, rng: &mut R) -> Vec<Hermitian> {
    let v = random_isometry(rank * outcomes, d, rng);
    (0..outcomes)
        .map(|i| {
            let b = row_block(&v, i, rank);
            Hermitian::symmetrized(b.adjoint().matmul(&b))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unitary_is_unitary() {
        let mut r = rng(1);
        let u = random_unitary(4, &mut r);
        assert!(u.adjoint().matmul(&u).max_abs_diff(&CMatrix::identity(4)) < 1e-12);
    }

    #[test]
    fn kraus_complete() {
        let mut r = rng(2);
        let k = random_kraus(3, 2, 4, &mut r);
        let s = k.iter().fold(CMatrix::zeros(3, 3), |acc, m| &acc + &m.adjoint().matmul(m));
        assert!(s.max_abs_diff(&CMatrix::identity(3)) < 1e-12);
    }

    #[test]
    fn povm_sums_to_identity() {
        let mut r = rng(3);
        let p = random_povm(2, 3, 1, &mut r);
        let s = p.iter().fold(Hermitian::zeros(2), |a, e| a.add(e));
        assert!(s.max_abs_diff(&Hermitian::identity(2)) < 1e-12);
    }

    #[test]
    fn density_has_unit_trace() {
        let mut r = rng(4);
        let rho = random_density(3, 2, &mut r);
        assert!((rho.trace_re() - 1.0).abs() < 1e-12);
        assert!(rho.min_eigenvalue() > -1e-12);
    }
}
