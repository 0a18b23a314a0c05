//! Extremality of quantum combs, generalized instruments, testers, channels,
//! instruments and POVMs.
//!
//! Every object is a finite family of positive operators with a
//! normalization constraint. Extremality is decided by a numerical rank test
//! on a family of Hermitian operators, and non-extremal objects come with an
//! explicit two-sided perturbation that splits them into a convex mixture.
//!
//! Operators on multipartite spaces are stored with the highest-labelled
//! factor leftmost in the Kronecker product: a comb on `H_0, …, H_{2N−1}`
//! lives on `H_{2N−1} ⊗ ⋯ ⊗ H_0`, a channel Choi operator on `H_1 ⊗ H_0`,
//! and a 1-tester on `H_2 ⊗ H_1`.

pub mod channels;
pub mod combs;
pub mod error;
pub mod fixtures;
pub mod gqi;
pub mod linalg;
pub mod random;
pub mod testers;
pub mod tolerance;

pub use channels::{Channel, Instrument};
pub use combs::{CombSignature, DeterministicComb};
pub use error::{Error, Result};
pub use gqi::{ExtremalityCertificate, Gqi, Perturbation, Verdict};
pub use linalg::{CMatrix, Hermitian};
pub use testers::{Povm, Tester};
pub use tolerance::Tolerance;

pub use num_complex::Complex64 as C64;
