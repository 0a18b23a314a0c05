//! Tensor products and partial traces over multipartite operators.
//!
//! Factor lists are given in Kronecker order: `dims[0]` is the leftmost
//! factor, so a basis index is `i_0·(d_1⋯d_{k-1}) + … + i_{k-1}`.

use num_complex::Complex64 as C64;

use super::hermitian::Hermitian;
use super::matrix::CMatrix;
use crate::error::{Error, Result};

pub fn kron(a: &Hermitian, b: &Hermitian) -> Hermitian {
    a.kron(b)
}

/// Kronecker product of a list of operators; the empty list gives `[1]`.
pub fn kron_all<'a>(factors: impl IntoIterator<Item = &'a Hermitian>) -> Hermitian {
    factors.into_iter().fold(Hermitian::identity(1), |acc, f| acc.kron(f))
}

/// Traces out the factors listed in `traced` (positions into `dims`).
pub fn partial_trace_matrix(a: &CMatrix, dims: &[usize], traced: &[usize]) -> Result<CMatrix> {
    let total: usize = dims.iter().product();
    if !a.is_square() || a.rows() != total {
        return Err(Error::Shape(format!(
            "operator of size {}x{} does not match factor dimensions {:?}",
            a.rows(),
            a.cols(),
            dims
        )));
    }
    if let Some(&bad) = traced.iter().find(|&&k| k >= dims.len()) {
        return Err(Error::Shape(format!("factor index {bad} out of range for {} factors", dims.len())));
    }
    let is_traced: Vec<bool> = (0..dims.len()).map(|k| traced.contains(&k)).collect();

    // Strides of each factor in the full index.
    let mut strides = vec![1usize; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * dims[k + 1];
    }
    let kept: Vec<usize> = (0..dims.len()).filter(|&k| !is_traced[k]).collect();
    let gone: Vec<usize> = (0..dims.len()).filter(|&k| is_traced[k]).collect();
    let out_dim: usize = kept.iter().map(|&k| dims[k]).product();
    let sum_dim: usize = gone.iter().map(|&k| dims[k]).product();

    let offsets = |factors: &[usize], count: usize| -> Vec<usize> {
        (0..count)
            .map(|mut flat| {
                let mut off = 0;
                for &k in factors.iter().rev() {
                    off += (flat % dims[k]) * strides[k];
                    flat /= dims[k];
                }
                off
            })
            .collect()
    };
    let kept_off = offsets(&kept, out_dim);
    let gone_off = offsets(&gone, sum_dim);

    let mut out = CMatrix::zeros(out_dim, out_dim);
    for (i, &oi) in kept_off.iter().enumerate() {
        for (j, &oj) in kept_off.iter().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for &t in &gone_off {
                acc += a[(oi + t, oj + t)];
            }
            out[(i, j)] = acc;
        }
    }
    Ok(out)
}

pub fn partial_trace(a: &Hermitian, dims: &[usize], traced: &[usize]) -> Result<Hermitian> {
    Ok(Hermitian::symmetrized(partial_trace_matrix(a.matrix(), dims, traced)?))
}
