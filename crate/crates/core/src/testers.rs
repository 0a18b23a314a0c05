//! 1-testers on `H_2 ⊗ H_1` (normalized as `Σ T_i = I_2 ⊗ ρ`) and POVMs.
//!
//! A tester is the GQI with signature `(1, d_1, d_2, 1)`; a POVM on `C^d` is
//! the tester with signature `(1, 1, d, 1)`, whose normalization family is
//! empty.

use crate::combs::CombSignature;
use crate::error::{Error, Result};
use crate::gqi::{is_extremal, ExtremalityCertificate, Gqi};
use crate::linalg::{
    numerical_rank, partial_trace, positivity, support_projector, support_vectors, vectorize_hermitian,
    CMatrix, Hermitian,
};
use crate::tolerance::Tolerance;
use crate::C64;

#[derive(Clone, Debug)]
pub struct Tester {
    d2: usize,
    d1: usize,
    outcomes: Vec<Hermitian>,
}

impl Tester {
    /// Checks shapes only.
    pub fn new(d2: usize, d1: usize, outcomes: Vec<Hermitian>) -> Result<Self> {
        if d1 == 0 || d2 == 0 {
            return Err(Error::Signature("tester dimensions must be positive".into()));
        }
        if outcomes.is_empty() {
            return Err(Error::Invalid("a tester needs at least one outcome".into()));
        }
        if let Some(t) = outcomes.iter().find(|t| t.dim() != d1 * d2) {
            return Err(Error::Shape(format!("outcome of dimension {} on {d2}x{d1} tester", t.dim())));
        }
        Ok(Self { d2, d1, outcomes })
    }

    pub fn validated(d2: usize, d1: usize, outcomes: Vec<Hermitian>, tol: &Tolerance) -> Result<Self> {
        let t = Self::new(d2, d1, outcomes)?;
        t.to_gqi().ensure_valid(tol)?;
        Ok(t)
    }

    pub fn d1(&self) -> usize {
        self.d1
    }

    pub fn d2(&self) -> usize {
        self.d2
    }

    pub fn outcomes(&self) -> &[Hermitian] {
        &self.outcomes
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn signature(&self) -> CombSignature {
        CombSignature::one_tester(self.d1, self.d2).expect("positive dimensions")
    }

    pub fn to_gqi(&self) -> Gqi {
        Gqi::new(self.signature(), self.outcomes.clone()).expect("shapes checked on construction")
    }

    /// Inverse of [`Tester::to_gqi`]; the signature must be `(1, d1, d2, 1)`.
    pub fn from_gqi(g: Gqi) -> Result<Self> {
        let sig = g.signature().clone();
        if !sig.is_one_tester() {
            return Err(Error::Signature(format!("{:?} is not a 1-tester signature", sig.dims())));
        }
        Self::new(sig.dims()[2], sig.dims()[1], g.into_outcomes())
    }

    pub fn sum(&self) -> Hermitian {
        self.outcomes.iter().fold(Hermitian::zeros(self.d1 * self.d2), |acc, t| acc.add(t))
    }

    fn map(&self, f: impl Fn(&Hermitian) -> Hermitian) -> Self {
        Self { d2: self.d2, d1: self.d1, outcomes: self.outcomes.iter().map(f).collect() }
    }
}

#[derive(Clone, Debug)]
pub struct TesterNormalization {
    pub rho: Hermitian,
    /// `‖Σ T_i − I ⊗ ρ‖_max`
    pub residual: f64,
    pub accepted: bool,
}

/// `ρ = Tr_2(Σ T_i) / d_2`, with the residual of the product form.
pub fn tester_normalization(t: &Tester, tol: &Tolerance) -> TesterNormalization {
    let sum = t.sum();
    let rho = partial_trace(&sum, &[t.d2, t.d1], &[0]).expect("dimensions match").scale(1.0 / t.d2 as f64);
    let residual = sum.max_abs_diff(&Hermitian::identity(t.d2).kron(&rho));
    let pos = positivity(&rho, tol);
    let accepted = residual <= tol.comb && pos.is_psd() && (rho.trace_re() - 1.0).abs() <= tol.comb;
    TesterNormalization { rho, residual, accepted }
}

pub fn is_extremal_tester(t: &Tester, tol: &Tolerance) -> Result<ExtremalityCertificate> {
    is_extremal(&t.to_gqi(), tol)
}

#[derive(Clone, Debug)]
pub struct BoundsReport {
    pub outcome_ranks: Vec<usize>,
    pub normalization_rank: usize,
    /// `Σ r_i² + r² − 1 ≤ (r d_2)²`
    pub rank_bound: bool,
    /// Only defined when every `r_i = 1` and `r = d_1`:
    /// `M ≤ d_1²(d_2² − 1) + 1`.
    pub outcome_bound: Option<bool>,
}

impl BoundsReport {
    pub fn holds(&self) -> bool {
        self.rank_bound && self.outcome_bound.unwrap_or(true)
    }
}

/// `d_1²(d_2² − 1) + 1`
pub fn max_outcomes(d1: usize, d2: usize) -> usize {
    d1 * d1 * (d2 * d2 - 1) + 1
}

pub fn check_bounds(t: &Tester, tol: &Tolerance) -> BoundsReport {
    let ranks: Vec<usize> = t.outcomes.iter().map(|x| positivity(x, tol).rank).collect();
    let rho = tester_normalization(t, tol).rho;
    let r = positivity(&rho, tol).rank;
    bounds_from_ranks(&ranks, r, t.d1, t.d2)
}

pub fn bounds_from_ranks(ranks: &[usize], r: usize, d1: usize, d2: usize) -> BoundsReport {
    let lhs: usize = ranks.iter().map(|x| x * x).sum::<usize>() + (r * r).saturating_sub(1);
    let rank_bound = lhs <= (r * d2).pow(2);
    let outcome_bound = (ranks.iter().all(|&x| x == 1) && r == d1).then(|| ranks.len() <= max_outcomes(d1, d2));
    BoundsReport { outcome_ranks: ranks.to_vec(), normalization_rank: r, rank_bound, outcome_bound }
}

fn check_unitary(u: &CMatrix, d: usize, tol: &Tolerance) -> Result<()> {
    if u.rows() != d || u.cols() != d {
        return Err(Error::Shape(format!("unitary must be {d}x{d}")));
    }
    let defect = u.adjoint().matmul(u).max_abs_diff(&CMatrix::identity(d));
    if defect > tol.comb {
        return Err(Error::Invalid(format!("matrix is not unitary (defect {defect:.3e})")));
    }
    Ok(())
}

fn check_full_rank_state(rho: &Hermitian, d: usize, tol: &Tolerance) -> Result<()> {
    if rho.dim() != d {
        return Err(Error::Shape(format!("state must be {d}x{d}")));
    }
    let pos = positivity(rho, tol);
    if !pos.is_psd() {
        return Err(Error::NotPositive { min_eigenvalue: pos.min_eigenvalue });
    }
    if pos.rank < d {
        return Err(Error::Invalid(format!("state has rank {} < {d}; the transform is not invertible", pos.rank)));
    }
    Ok(())
}

/// `T' = d_1 (I ⊗ √ρ U) T (I ⊗ U† √ρ)`
pub fn xi_transform(t: &Tester, rho: &Hermitian, u: &CMatrix, tol: &Tolerance) -> Result<Tester> {
    check_full_rank_state(rho, t.d1, tol)?;
    check_unitary(u, t.d1, tol)?;
    let x = CMatrix::identity(t.d2).kron(&rho.sqrt_psd().matmul(u));
    let d1 = t.d1 as f64;
    Ok(t.map(|ti| ti.conjugate_by(&x).scale(d1)))
}

/// Inverse of [`xi_transform`]: `T = d_1⁻¹ (I ⊗ U† ρ^{−1/2}) T' (I ⊗ ρ^{−1/2} U)`.
pub fn xi_inverse(t: &Tester, rho: &Hermitian, u: &CMatrix, tol: &Tolerance) -> Result<Tester> {
    check_full_rank_state(rho, t.d1, tol)?;
    check_unitary(u, t.d1, tol)?;
    let inv_sqrt = rho.map_spectrum(|x| 1.0 / x.sqrt());
    let x = CMatrix::identity(t.d2).kron(&u.adjoint().matmul(inv_sqrt.matrix()));
    let d1 = t.d1 as f64;
    Ok(t.map(|ti| ti.conjugate_by(&x).scale(1.0 / d1)))
}

/// Effects summing to the identity.
#[derive(Clone, Debug)]
pub struct Povm {
    effects: Vec<Hermitian>,
}

impl Povm {
    pub fn new(effects: Vec<Hermitian>, tol: &Tolerance) -> Result<Self> {
        let p = Self::unchecked(effects)?;
        p.to_gqi().ensure_valid(tol)?;
        Ok(p)
    }

    /// Checks shapes only.
    pub fn unchecked(effects: Vec<Hermitian>) -> Result<Self> {
        let d = effects.first().map(Hermitian::dim).ok_or(Error::Invalid("a POVM needs at least one effect".into()))?;
        if effects.iter().any(|e| e.dim() != d) {
            return Err(Error::Shape("effects have different dimensions".into()));
        }
        Ok(Self { effects })
    }

    pub fn dim(&self) -> usize {
        self.effects[0].dim()
    }

    pub fn effects(&self) -> &[Hermitian] {
        &self.effects
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    /// The effects as a GQI on `(1, 1, d, 1)`.
    pub fn to_gqi(&self) -> Gqi {
        let sig = CombSignature::one_tester(1, self.dim()).expect("positive dimension");
        Gqi::new(sig, self.effects.clone()).expect("shapes checked on construction")
    }
}

/// Extremal iff the union of the effects' support bases is linearly independent.
pub fn povm_is_extremal(p: &Povm, tol: &Tolerance) -> Result<ExtremalityCertificate> {
    is_extremal(&p.to_gqi(), tol)
}

/// `T_i = E_i ⊗ |φ⟩⟨φ|`
pub fn tester_from_pure_normalization(phi: &[C64], p: &Povm) -> Result<Tester> {
    let n: f64 = phi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if (n - 1.0).abs() > 1e-10 {
        return Err(Error::Invalid(format!("state vector has norm {n}")));
    }
    let rho = Hermitian::projector(phi);
    Tester::new(p.dim(), phi.len(), p.effects.iter().map(|e| e.kron(&rho)).collect())
}

/// `{½|φ₁⟩⟨φ₁|, ½(I − |φ₁⟩⟨φ₁|)}` on two qubits.
pub fn qubit_tester_rank_one(phi1: &[C64]) -> Result<Tester> {
    if phi1.len() != 4 {
        return Err(Error::Shape("expected a two-qubit vector".into()));
    }
    let p = Hermitian::projector(phi1);
    let rest = Hermitian::identity(4).sub(&p);
    Tester::new(2, 2, vec![p.scale(0.5), rest.scale(0.5)])
}

/// `{½P₁, ½(I − P₁)}` with `P₁` the projector onto two orthonormal vectors.
pub fn qubit_tester_rank_two(a: &[C64], b: &[C64]) -> Result<Tester> {
    if a.len() != 4 || b.len() != 4 {
        return Err(Error::Shape("expected two-qubit vectors".into()));
    }
    let p = Hermitian::projector(a).add(&Hermitian::projector(b));
    let rest = Hermitian::identity(4).sub(&p);
    Tester::new(2, 2, vec![p.scale(0.5), rest.scale(0.5)])
}

/// `cos θ |00⟩ + sin θ |11⟩`
pub fn schmidt_vector(theta: f64) -> Vec<C64> {
    vec![C64::new(theta.cos(), 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(theta.sin(), 0.0)]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QubitCase {
    /// Rank-one `ρ`: `T_i = E_i ⊗ ρ`.
    PureNormalization,
    /// Outcome ranks `(1, 3)`.
    RankOneThree,
    /// Outcome ranks `(2, 2)`.
    RankTwoTwo,
    /// Overlapping supports or a vanishing outcome.
    Other,
}

/// Evidence for a non-extremal verdict.
#[derive(Clone, Debug)]
pub enum Witness {
    /// `|f⟩ ⊗ |e⟩` spans or lies in `Supp T_1`, and `|f⊥⟩ ⊗ |e⟩` lies in
    /// `Supp T_2` (outcomes in input order).
    ProductVector { f: Vec<C64>, e: Vec<C64> },
    /// `Supp T_1 = H_2 ⊗ |e⟩`.
    IdentityTimesPure { e: Vec<C64> },
}

#[derive(Clone, Debug)]
pub struct QubitClassification {
    pub case: QubitCase,
    pub extremal: bool,
    pub witness: Option<Witness>,
}

/// Singular values of `φ` reshaped to `2 × 2` (`φ[i2·2 + i1]`), with the
/// leading left/right singular vectors.
fn schmidt(phi: &[C64]) -> (f64, f64, Vec<C64>, Vec<C64>) {
    let m = CMatrix::from_fn(2, 2, |i, j| phi[2 * i + j]);
    let left = Hermitian::symmetrized(m.matmul(&m.adjoint())).eig();
    let s0 = left.eigenvalues[0].max(0.0).sqrt();
    // s0 s1 = |det M|; avoids the square root of a rounding-level eigenvalue
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    let s1 = if s0 > 0.0 { det.norm() / s0 } else { 0.0 };
    let f = left.eigenvectors[0].clone();
    // e ∝ Mᵀ f^*, written in H_1 components
    let mut e: Vec<C64> = (0..2).map(|j| (0..2).map(|i| f[i].conj() * m[(i, j)]).sum()).collect();
    let n = e.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if n > 0.0 {
        e.iter_mut().for_each(|z| *z /= n);
    }
    (s0, s1, f, e)
}

fn perp(v: &[C64]) -> Vec<C64> {
    vec![-v[1].conj(), v[0].conj()]
}

fn dominant_eigvec(a: &Hermitian) -> (f64, Vec<C64>) {
    let e = a.eig();
    (e.eigenvalues[0], e.eigenvectors[0].clone())
}

fn pauli() -> [Hermitian; 3] {
    let z = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    [
        Hermitian::symmetrized(CMatrix::from_vec(2, 2, vec![z, one, one, z]).unwrap()),
        Hermitian::symmetrized(CMatrix::from_vec(2, 2, vec![z, -i, i, z]).unwrap()),
        Hermitian::diag(&[1.0, -1.0]),
    ]
}

/// Closed-form classification of two-outcome qubit testers.
///
/// A full-rank normalization is first brought to `I ⊗ I/2` by the inverse
/// `ξ` transform with `U = I`. A rank-one normalization reduces to the
/// two-outcome POVM `{E_1, E_2}`, extremal iff its effects are projectors.
pub fn classify_two_outcome_qubit(t: &Tester, tol: &Tolerance) -> Result<QubitClassification> {
    if t.d1 != 2 || t.d2 != 2 || t.len() != 2 {
        return Err(Error::Invalid("expected a two-outcome tester on two qubits".into()));
    }
    let norm = tester_normalization(t, tol);
    if !norm.accepted {
        return Err(Error::Normalization { residual: norm.residual, tolerance: tol.comb });
    }
    let rho_rank = positivity(&norm.rho, tol).rank;
    let ranks_of = |t: &Tester| -> Vec<usize> { t.outcomes.iter().map(|x| positivity(x, tol).rank).collect() };

    if rho_rank == 1 {
        let r = ranks_of(t);
        return Ok(QubitClassification {
            case: QubitCase::PureNormalization,
            extremal: r[0] + r[1] <= 2,
            witness: None,
        });
    }

    let uniform = Hermitian::identity(2).scale(0.5);
    let t = if norm.rho.max_abs_diff(&uniform) > tol.comb {
        xi_inverse(t, &norm.rho, &CMatrix::identity(2), tol)?
    } else {
        t.clone()
    };
    let r = ranks_of(&t);
    match (r[0], r[1]) {
        (1, 3) | (3, 1) => {
            let k = if r[0] == 1 { 0 } else { 1 };
            let (_, phi) = dominant_eigvec(&t.outcomes[k]);
            let (_, s1, f, e) = schmidt(&phi);
            let extremal = s1 > 24.0 * tol.rel;
            let witness = (!extremal).then(|| {
                if k == 0 {
                    Witness::ProductVector { f, e }
                } else {
                    Witness::ProductVector { f: perp(&f), e }
                }
            });
            Ok(QubitClassification { case: QubitCase::RankOneThree, extremal, witness })
        }
        (2, 2) => {
            let p1 = support_projector(&t.outcomes[0], tol);
            // I ⊗ n·σ lies in L(Supp P1) ⊕ L(Supp P2) iff it commutes with P1
            let comms: Vec<Vec<f64>> = pauli()
                .iter()
                .map(|s| {
                    let a = Hermitian::identity(2).kron(s);
                    let c = &p1.matmul(a.matrix()) - &a.matmul(p1.matrix());
                    vectorize_hermitian(&Hermitian::symmetrized(c.scale(C64::new(0.0, 1.0))))
                })
                .collect();
            let report = numerical_rank(&comms, tol)?;
            let Some(n) = report.nullvector else {
                return Ok(QubitClassification { case: QubitCase::RankTwoTwo, extremal: true, witness: None });
            };
            let bloch = pauli().iter().zip(&n).fold(Hermitian::zeros(2), |acc, (s, c)| acc.add_scaled(*c, s));
            let (_, e) = dominant_eigvec(&bloch);
            Ok(QubitClassification { case: QubitCase::RankTwoTwo, extremal: false, witness: Some(product_witness(&p1, &e)) })
        }
        _ => Ok(QubitClassification { case: QubitCase::Other, extremal: false, witness: None }),
    }
}

/// Given `P1` commuting with `I ⊗ |e⟩⟨e|`, the witness of its
/// non-extremality.
fn product_witness(p1: &Hermitian, e: &[C64]) -> Witness {
    let slice = |e: &[C64]| {
        let x = CMatrix::identity(2).kron(&CMatrix::column(e));
        p1.conjugate_by(&x.adjoint())
    };
    for e in [e.to_vec(), perp(e)] {
        let a = slice(&e);
        let ev = a.eig();
        if ev.eigenvalues[1] > 0.5 {
            return Witness::IdentityTimesPure { e };
        }
        if ev.eigenvalues[0] > 0.5 {
            return Witness::ProductVector { f: ev.eigenvectors[0].clone(), e };
        }
    }
    unreachable!("P1 commutes with I ⊗ |e⟩⟨e| and has rank two")
}

/// Replaces `T_i` by `{√T_i F_k √T_i}_k`. The effects act on the full space
/// and must be supported on `Supp(T_i)`, summing to its projector.
pub fn split_outcome(t: &Tester, index: usize, effects: &[Hermitian], tol: &Tolerance) -> Result<Tester> {
    let ti = t.outcomes.get(index).ok_or_else(|| Error::Invalid(format!("outcome index {index} out of range")))?;
    let d = ti.dim();
    if effects.is_empty() || effects.iter().any(|f| f.dim() != d) {
        return Err(Error::Shape("splitting effects must be non-empty and act on the tester space".into()));
    }
    let proj = support_projector(ti, tol);
    let comp = Hermitian::identity(d).sub(&proj);
    let mut total = Hermitian::zeros(d);
    for f in effects {
        let pos = positivity(f, tol);
        if !pos.is_psd() {
            return Err(Error::NotPositive { min_eigenvalue: pos.min_eigenvalue });
        }
        let leak = comp.matmul(f.matrix()).max_abs();
        if leak > tol.comb {
            return Err(Error::Invalid(format!("splitting effect leaks {leak:.3e} outside the outcome support")));
        }
        total = total.add(f);
    }
    let residual = total.max_abs_diff(&proj);
    if residual > tol.comb {
        return Err(Error::Normalization { residual, tolerance: tol.comb });
    }
    let root = ti.sqrt_psd();
    let mut outcomes = Vec::with_capacity(t.len() + effects.len() - 1);
    outcomes.extend_from_slice(&t.outcomes[..index]);
    outcomes.extend(effects.iter().map(|f| f.conjugate_by(root.matrix())));
    outcomes.extend_from_slice(&t.outcomes[index + 1..]);
    Tester::new(t.d2, t.d1, outcomes)
}

/// Rank-one projectors onto an eigenbasis of `Supp(T_i)`.
pub fn rank_one_split_effects(t: &Tester, index: usize, tol: &Tolerance) -> Result<Vec<Hermitian>> {
    let ti = t.outcomes.get(index).ok_or_else(|| Error::Invalid(format!("outcome index {index} out of range")))?;
    Ok(support_vectors(ti, tol).iter().map(|v| Hermitian::projector(v)).collect())
}
