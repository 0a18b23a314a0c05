//! Dense complex linear-algebra kernel: Hermitian eigendecomposition,
//! SVD-based rank decisions, tensor products, partial traces and Hermitian
//! operator bases.

mod basis;
mod eig;
mod hermitian;
mod matrix;
mod rank;
mod tensor;

pub use basis::{
    combine_operators, full_hermitian_basis, span_basis, support_basis, support_projector,
    support_vectors, traceless_hermitian_basis, unvectorize_hermitian, vectorize_hermitian,
};
pub use eig::{hermitian_eig, hermitian_eig_checked, EigenDecomposition};
pub use hermitian::{positivity, Hermitian, Positivity};
pub use matrix::CMatrix;
pub(crate) use rank::dot;
pub use rank::{column_svd, combine, norm, null_space, numerical_rank, ColumnSvd, RankReport};
pub use tensor::{kron, kron_all, partial_trace, partial_trace_matrix};

/// Vectorizes a family of Hermitian operators for a rank test.
pub fn vectorize_all<'a>(ops: impl IntoIterator<Item = &'a Hermitian>) -> Vec<Vec<f64>> {
    ops.into_iter().map(vectorize_hermitian).collect()
}
