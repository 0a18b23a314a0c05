//! Numerical rank of real vector families via one-sided Jacobi SVD.

use crate::error::{Error, Result};
use crate::tolerance::Tolerance;

const MAX_SWEEPS: usize = 80;

/// Thin SVD of the matrix whose columns are the input vectors.
#[derive(Clone, Debug)]
pub struct ColumnSvd {
    /// Singular values, sorted descending.
    pub singular_values: Vec<f64>,
    /// Right singular vectors (one per singular value, length = vector count).
    pub right_vectors: Vec<Vec<f64>>,
    /// Length of each input vector.
    pub vector_len: usize,
}

/// One-sided (Hestenes) Jacobi SVD. Rotations act on column pairs until all
/// columns are mutually orthogonal; column norms are then the singular values.
pub fn column_svd(vectors: &[Vec<f64>]) -> Result<ColumnSvd> {
    let k = vectors.len();
    let n = vectors.first().map_or(0, Vec::len);
    if vectors.iter().any(|v| v.len() != n) {
        return Err(Error::Shape("vectors have different lengths".into()));
    }
    let mut cols: Vec<Vec<f64>> = vectors.to_vec();
    // v[j] is column j of the accumulated rotation
    let mut v: Vec<Vec<f64>> = (0..k)
        .map(|j| {
            let mut e = vec![0.0; k];
            e[j] = 1.0;
            e
        })
        .collect();

    let mut norms: Vec<f64> = cols.iter().map(|c| dot(c, c)).collect();
    // columns this small are already null directions to working precision
    let negligible = 1e-30 * norms.iter().sum::<f64>();
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..k {
            for q in p + 1..k {
                let alpha = norms[p];
                let beta = norms[q];
                if alpha <= negligible || beta <= negligible {
                    continue;
                }
                let gamma = dot(&cols[p], &cols[q]);
                if gamma.abs() <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (left, right) = cols.split_at_mut(q);
                rotate_pair(&mut left[p], &mut right[0], c, s);
                let (left, right) = v.split_at_mut(q);
                rotate_pair(&mut left[p], &mut right[0], c, s);
                norms[p] = dot(&cols[p], &cols[p]);
                norms[q] = dot(&cols[q], &cols[q]);
            }
        }
        if !rotated {
            break;
        }
    }

    let mut order: Vec<usize> = (0..k).collect();
    let sigma: Vec<f64> = norms.iter().map(|x| x.sqrt()).collect();
    order.sort_by(|&a, &b| sigma[b].total_cmp(&sigma[a]));
    Ok(ColumnSvd {
        singular_values: order.iter().map(|&j| sigma[j]).collect(),
        right_vectors: order.iter().map(|&j| v[j].clone()).collect(),
        vector_len: n,
    })
}

fn rotate_pair(a: &mut [f64], b: &mut [f64], c: f64, s: f64) {
    for (x, y) in a.iter_mut().zip(b.iter_mut()) {
        let (xa, yb) = (*x, *y);
        *x = c * xa - s * yb;
        *y = s * xa + c * yb;
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Outcome of a rank decision.
#[derive(Clone, Debug)]
pub struct RankReport {
    pub rank: usize,
    /// Unit coefficient vector `c` with `‖Σ c_j x_j‖ ≤ threshold`, present
    /// exactly when `rank` is below the vector count.
    pub nullvector: Option<Vec<f64>>,
    pub threshold: f64,
    pub singular_values: Vec<f64>,
}

impl RankReport {
    /// Smallest singular value that counted toward the rank.
    pub fn margin(&self) -> Option<f64> {
        self.rank.checked_sub(1).map(|k| self.singular_values[k])
    }
}

/// Rank with threshold `τ = max(m, n) · σ_max · rel`. When the family is
/// dependent the nullvector is the right singular vector of the smallest
/// singular value.
pub fn numerical_rank(vectors: &[Vec<f64>], tol: &Tolerance) -> Result<RankReport> {
    if vectors.is_empty() {
        return Ok(RankReport { rank: 0, nullvector: None, threshold: 0.0, singular_values: vec![] });
    }
    let svd = column_svd(vectors)?;
    let sigma_max = svd.singular_values[0];
    let threshold = tol.rank_threshold(svd.vector_len, vectors.len(), sigma_max);
    let rank = svd.singular_values.iter().filter(|&&s| s > threshold).count();
    let nullvector = (rank < vectors.len()).then(|| svd.right_vectors.last().unwrap().clone());
    Ok(RankReport { rank, nullvector, threshold, singular_values: svd.singular_values })
}

/// Orthonormal basis (coefficient vectors) of the numerical null space.
pub fn null_space(vectors: &[Vec<f64>], tol: &Tolerance) -> Result<Vec<Vec<f64>>> {
    if vectors.is_empty() {
        return Ok(vec![]);
    }
    let svd = column_svd(vectors)?;
    let threshold = tol.rank_threshold(svd.vector_len, vectors.len(), svd.singular_values[0]);
    Ok(svd
        .singular_values
        .iter()
        .zip(svd.right_vectors)
        .filter(|(s, _)| **s <= threshold)
        .map(|(_, v)| v)
        .collect())
}

/// `Σ c_j x_j`
pub fn combine(vectors: &[Vec<f64>], coeffs: &[f64]) -> Vec<f64> {
    let n = vectors.first().map_or(0, Vec::len);
    let mut out = vec![0.0; n];
    for (x, &c) in vectors.iter().zip(coeffs) {
        for (o, v) in out.iter_mut().zip(x) {
            *o += c * v;
        }
    }
    out
}

pub fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_family() {
        let r = numerical_rank(&[], &Tolerance::default()).unwrap();
        assert_eq!(r.rank, 0);
        assert!(r.nullvector.is_none());
    }

    #[test]
    fn dependent_triple() {
        let a = vec![1.0, 0.0, 0.0];
        let b = vec![0.0, 1.0, 0.0];
        let c = vec![1.0, 1.0, 0.0];
        let r = numerical_rank(&[a.clone(), b.clone(), c.clone()], &Tolerance::default()).unwrap();
        assert_eq!(r.rank, 2);
        let nv = r.nullvector.unwrap();
        let res = combine(&[a, b, c], &nv);
        assert!(norm(&res) <= r.threshold);
        assert!((norm(&nv) - 1.0).abs() < 1e-12);
        let expect = 1.0 / 3f64.sqrt();
        let sign = nv[0].signum();
        assert!((nv[0] * sign - expect).abs() < 1e-12);
        assert!((nv[1] * sign - expect).abs() < 1e-12);
        assert!((nv[2] * sign + expect).abs() < 1e-12);
    }

    #[test]
    fn more_vectors_than_dimensions() {
        let vs: Vec<Vec<f64>> = (0..5).map(|j| vec![(j as f64).cos(), (j as f64 * 0.7).sin()]).collect();
        let r = numerical_rank(&vs, &Tolerance::default()).unwrap();
        assert_eq!(r.rank, 2);
        let res = combine(&vs, r.nullvector.as_ref().unwrap());
        assert!(norm(&res) <= r.threshold);
        assert_eq!(null_space(&vs, &Tolerance::default()).unwrap().len(), 3);
    }

    #[test]
    fn unequal_lengths_rejected() {
        assert!(numerical_rank(&[vec![1.0], vec![1.0, 2.0]], &Tolerance::default()).is_err());
    }
}
