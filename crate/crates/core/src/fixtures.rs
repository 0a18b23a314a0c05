//! Random and structured test objects built on the generators in
//! [`crate::random`]: channels, instruments, Lüders instruments and the
//! families of two-outcome qubit testers.

use rand::Rng;

use crate::channels::{Channel, Instrument};
use crate::error::Result;
use crate::linalg::{CMatrix, Hermitian};
use crate::random::{random_density, random_instrument_kraus, random_isometry, random_kraus, random_povm, random_unit_vector, random_unitary};
use crate::testers::{
    qubit_tester_rank_one, qubit_tester_rank_two, rank_one_split_effects, schmidt_vector, split_outcome,
    tester_from_pure_normalization, xi_transform, Povm, Tester,
};
use crate::tolerance::Tolerance;
use crate::C64;

pub fn random_channel<R: Rng + ?Sized>(d0: usize, d1: usize, count: usize, rng: &mut R) -> Result<Channel> {
    Channel::from_kraus(&random_kraus(d0, d1, count, rng), &Tolerance::default())
}

pub fn random_instrument<R: Rng + ?Sized>(d0: usize, d1: usize, counts: &[usize], rng: &mut R) -> Result<Instrument> {
    Instrument::from_kraus(&random_instrument_kraus(d0, d1, counts, rng), &Tolerance::default())
}

/// Lüders instrument of a random orthogonal decomposition of `C^d` into
/// `parts` projectors (each of rank at least one).
pub fn random_luders<R: Rng + ?Sized>(d: usize, parts: usize, rng: &mut R) -> Result<Instrument> {
    let u = random_unitary(d, rng);
    // every part gets one column, the rest are assigned at random
    let mut owner: Vec<usize> = (0..d).map(|j| if j < parts { j } else { rng.random_range(0..parts) }).collect();
    for j in (1..d).rev() {
        owner.swap(j, rng.random_range(0..=j));
    }
    let kraus: Vec<Vec<CMatrix>> = (0..parts)
        .map(|p| {
            let mut proj = CMatrix::zeros(d, d);
            for (j, _) in owner.iter().enumerate().filter(|(_, &o)| o == p) {
                let v = u.col(j);
                proj = &proj + &CMatrix::outer(&v, &v);
            }
            vec![proj]
        })
        .collect();
    Instrument::from_kraus(&kraus, &Tolerance::default())
}

/// `exp(iεH)` for Hermitian `H`.
pub fn unitary_exp(h: &Hermitian, eps: f64) -> CMatrix {
    let e = h.eig();
    let d = h.dim();
    let mut out = CMatrix::zeros(d, d);
    for (l, v) in e.eigenvalues.iter().zip(&e.eigenvectors) {
        let phase = C64::from_polar(1.0, eps * l);
        out = &out + &CMatrix::outer(v, v).scale(phase);
    }
    out
}

/// Random Hermitian with unit spectral norm.
pub fn random_direction<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Hermitian {
    let g = crate::random::ginibre(d, d, rng);
    let h = Hermitian::symmetrized((&g + &g.adjoint()).scale_re(0.5));
    let n = h.spectral_norm();
    h.scale(1.0 / n)
}

fn local_unitary<R: Rng + ?Sized>(rng: &mut R) -> CMatrix {
    random_unitary(2, rng).kron(&random_unitary(2, rng))
}

fn perp(v: &[C64]) -> Vec<C64> {
    vec![-v[1].conj(), v[0].conj()]
}

fn kron_vec(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect()
}

/// Families of two-outcome qubit testers with known structure.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum QubitTesterFamily {
    /// Ranks (1, 3) with `|φ₁⟩` of the given Schmidt angle, locally rotated.
    RankOne { theta: f64 },
    /// Ranks (2, 2) with a random two-dimensional `Supp T_1`.
    RankTwoGeneric,
    /// `P_1 = I ⊗ |v⟩⟨v|`, conjugated by `exp(iεH)`.
    IdentityTimesPure { eps: f64 },
    /// `P_1 = |f⟩⟨f| ⊗ |e⟩⟨e| + |h⟩⟨h| ⊗ |e⊥⟩⟨e⊥|`, conjugated by `exp(iεH)`.
    ProductPair { eps: f64 },
    /// `E_i ⊗ |φ⟩⟨φ|` for a random two-outcome POVM (projective if asked).
    PureNormalization { projective: bool },
}

fn conjugated_pair<R: Rng + ?Sized>(a: Vec<C64>, b: Vec<C64>, eps: f64, rng: &mut R) -> Result<Tester> {
    if eps == 0.0 {
        return qubit_tester_rank_two(&a, &b);
    }
    let w = unitary_exp(&random_direction(4, rng), eps);
    qubit_tester_rank_two(&w.apply(&a), &w.apply(&b))
}

pub fn qubit_tester<R: Rng + ?Sized>(family: QubitTesterFamily, rng: &mut R) -> Result<Tester> {
    match family {
        QubitTesterFamily::RankOne { theta } => qubit_tester_rank_one(&local_unitary(rng).apply(&schmidt_vector(theta))),
        QubitTesterFamily::RankTwoGeneric => {
            let v = random_isometry(4, 2, rng);
            qubit_tester_rank_two(&v.col(0), &v.col(1))
        }
        QubitTesterFamily::IdentityTimesPure { eps } => {
            let v = random_unit_vector(2, rng);
            let (e0, e1) = ([C64::new(1.0, 0.0), C64::new(0.0, 0.0)], [C64::new(0.0, 0.0), C64::new(1.0, 0.0)]);
            conjugated_pair(kron_vec(&e0, &v), kron_vec(&e1, &v), eps, rng)
        }
        QubitTesterFamily::ProductPair { eps } => {
            let e = random_unit_vector(2, rng);
            let f = random_unit_vector(2, rng);
            let h = random_unit_vector(2, rng);
            conjugated_pair(kron_vec(&f, &e), kron_vec(&h, &perp(&e)), eps, rng)
        }
        QubitTesterFamily::PureNormalization { projective } => {
            let effects = if projective {
                let v = random_unit_vector(2, rng);
                let p = Hermitian::projector(&v);
                vec![p.clone(), Hermitian::identity(2).sub(&p)]
            } else {
                random_povm(2, 2, 2, rng)
            };
            let phi = random_unit_vector(2, rng);
            tester_from_pure_normalization(&phi, &Povm::unchecked(effects)?)
        }
    }
}

/// Full-rank state `0.9 ρ + 0.1 I/d` with `ρ` random.
pub fn random_full_rank_state<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Hermitian {
    random_density(d, d, rng).scale(0.9).add(&Hermitian::identity(d).scale(0.1 / d as f64))
}

/// Moves a uniform-normalization tester to a random full-rank normalization.
pub fn random_xi<R: Rng + ?Sized>(t: &Tester, rng: &mut R) -> Result<Tester> {
    let rho = random_full_rank_state(t.d1(), rng);
    let u = random_unitary(t.d1(), rng);
    xi_transform(t, &rho, &u, &Tolerance::default())
}

/// The family sampled for the `i`-th two-outcome tester of a batch: a mix
/// of the (1,3), (2,2) and pure-normalization structures, including exact
/// and near-product Schmidt angles.
pub fn qubit_family_for<R: Rng + ?Sized>(i: usize, rng: &mut R) -> QubitTesterFamily {
    use QubitTesterFamily::*;
    match i % 10 {
        0 => RankOne { theta: 0.0 },
        1 => RankOne { theta: 1e-6 * (1.0 + rng.random::<f64>()) },
        2 | 3 => RankOne { theta: rng.random_range(1e-3..std::f64::consts::FRAC_PI_4) },
        4 => RankTwoGeneric,
        5 => IdentityTimesPure { eps: if rng.random_bool(0.5) { 0.0 } else { rng.random_range(1e-4..1e-1) } },
        6 | 7 => ProductPair { eps: if rng.random_bool(0.5) { 0.0 } else { rng.random_range(1e-4..1e-1) } },
        8 => PureNormalization { projective: true },
        _ => PureNormalization { projective: false },
    }
}

/// Uniform-normalization qubit tester intended to be extremal: a Bell-like
/// (1, 3) tester, optionally with `T_2` split into rank-one parts.
pub fn extremal_qubit_tester<R: Rng + ?Sized>(rng: &mut R) -> Result<Tester> {
    let theta = rng.random_range(0.1..std::f64::consts::FRAC_PI_4);
    let t = qubit_tester(QubitTesterFamily::RankOne { theta }, rng)?;
    if rng.random_bool(0.5) {
        let tol = Tolerance::default();
        let effects = rank_one_split_effects(&t, 1, &tol)?;
        return split_outcome(&t, 1, &effects, &tol);
    }
    Ok(t)
}

/// Uniform-normalization qubit tester intended to be non-extremal: a product
/// (1, 3) tester or the midpoint of two distinct extremal testers.
pub fn non_extremal_qubit_tester<R: Rng + ?Sized>(rng: &mut R) -> Result<Tester> {
    if rng.random_bool(0.5) {
        return qubit_tester(QubitTesterFamily::RankOne { theta: 0.0 }, rng);
    }
    let theta = rng.random_range(0.1..std::f64::consts::FRAC_PI_4);
    let a = qubit_tester(QubitTesterFamily::RankOne { theta }, rng)?;
    let b = qubit_tester(QubitTesterFamily::RankOne { theta }, rng)?;
    Tester::from_gqi(a.to_gqi().mix(0.5, &b.to_gqi())?)
}

/// Uniform-normalization qubit tester `{E_i / 2}` from a random POVM on two
/// qubits with `outcomes` effects of rank at most `rank`.
pub fn random_rescaled_povm_tester<R: Rng + ?Sized>(outcomes: usize, rank: usize, rng: &mut R) -> Result<Tester> {
    let effects = random_povm(4, outcomes, rank, rng);
    Tester::new(2, 2, effects.iter().map(|e| e.scale(0.5)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::rng;
    use crate::testers::{is_extremal_tester, tester_normalization};

    #[test]
    fn families_are_valid_testers() {
        let tol = Tolerance::default();
        let mut r = rng(5);
        for i in 0..40 {
            let fam = qubit_family_for(i, &mut r);
            let t = qubit_tester(fam, &mut r).unwrap();
            assert!(tester_normalization(&t, &tol).accepted, "{fam:?}");
        }
    }

    #[test]
    fn intended_verdicts() {
        let tol = Tolerance::default();
        let mut r = rng(6);
        for _ in 0..10 {
            assert!(is_extremal_tester(&extremal_qubit_tester(&mut r).unwrap(), &tol).unwrap().is_extremal());
            assert!(!is_extremal_tester(&non_extremal_qubit_tester(&mut r).unwrap(), &tol).unwrap().is_extremal());
        }
    }

    #[test]
    fn luders_partition_is_complete() {
        let mut r = rng(7);
        let ins = random_luders(4, 3, &mut r).unwrap();
        assert_eq!(ins.len(), 3);
    }
}
