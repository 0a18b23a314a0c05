//! Benchmark fixtures for the kernel and extremality routines.

use exqip::combs::CombSignature;
use exqip::gqi::Gqi;
use exqip::linalg::Hermitian;
use exqip::random::{random_kraus, rng};

/// Choi operator of a random qubit channel with `count` Kraus operators.
pub fn random_qubit_channel(seed: u64, count: usize) -> Gqi {
    let k = random_kraus(2, 2, count, &mut rng(seed));
    let choi = exqip::channels::kraus_to_choi(&k).expect("non-empty Kraus list");
    Gqi::new(CombSignature::channel(2, 2).expect("valid"), vec![choi]).expect("shapes match")
}

/// Random Hermitian matrix of dimension `d`.
pub fn random_hermitian(seed: u64, d: usize) -> Hermitian {
    let g = exqip::random::ginibre(d, d, &mut rng(seed));
    Hermitian::new((&g + &g.adjoint()).scale_re(0.5)).expect("Hermitian by construction")
}
