//! Channels and instruments from `L(H_0)` to `L(H_1)`.
//!
//! Choi operators live on `H_1 ⊗ H_0`. A Kraus operator `K` (`d1 × d0`)
//! corresponds to `|K⟩⟩ = (K ⊗ I)|I⟩⟩`, which is the row-major vector of `K`.

use crate::combs::CombSignature;
use crate::error::{Error, Result};
use crate::gqi::{is_extremal_with, Gqi, NormalizationBasis};
use crate::linalg::{numerical_rank, partial_trace, positivity, vectorize_hermitian, CMatrix, Hermitian};
use crate::testers::{povm_is_extremal, Povm};
use crate::tolerance::Tolerance;
use crate::C64;

/// `Σ_m |K_m⟩⟩⟨⟨K_m|`
pub fn kraus_to_choi(kraus: &[CMatrix]) -> Result<Hermitian> {
    let first = kraus.first().ok_or_else(|| Error::Invalid("empty Kraus list".into()))?;
    let (d1, d0) = (first.rows(), first.cols());
    if kraus.iter().any(|k| k.rows() != d1 || k.cols() != d0) {
        return Err(Error::Shape("Kraus operators have different shapes".into()));
    }
    Ok(kraus.iter().fold(Hermitian::zeros(d1 * d0), |acc, k| acc.add(&Hermitian::projector(k.as_slice()))))
}

/// Minimal Kraus operators `K_m = unvec(√λ_m v_m)` from the spectral
/// decomposition of the Choi operator.
pub fn choi_to_kraus(choi: &Hermitian, d0: usize, d1: usize, tol: &Tolerance) -> Result<Vec<CMatrix>> {
    if choi.dim() != d0 * d1 {
        return Err(Error::Shape(format!("Choi operator of dimension {} is not {d1}·{d0}", choi.dim())));
    }
    let pos = positivity(choi, tol);
    if !pos.is_psd() {
        return Err(Error::NotPositive { min_eigenvalue: pos.min_eigenvalue });
    }
    let e = choi.eig();
    Ok(e.eigenvalues
        .iter()
        .zip(&e.eigenvectors)
        .filter(|(l, _)| **l > pos.cutoff)
        .map(|(l, v)| {
            let s = l.sqrt();
            CMatrix::from_vec(d1, d0, v.iter().map(|z| z * s).collect()).expect("eigenvector length d1·d0")
        })
        .collect())
}

/// `Tr_1 |A⟩⟩⟨⟨B|` for `d1 × d0` matrices, which equals `Aᵀ B^*`.
pub fn partial_trace_outer(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    let outer = CMatrix::outer(a.as_slice(), b.as_slice());
    crate::linalg::partial_trace_matrix(&outer, &[a.rows(), a.cols()], &[0])
}

/// A completely positive trace-preserving map.
#[derive(Clone, Debug)]
pub struct Channel {
    d0: usize,
    d1: usize,
    choi: Hermitian,
}

impl Channel {
    pub fn new(choi: Hermitian, d0: usize, d1: usize, tol: &Tolerance) -> Result<Self> {
        let sig = CombSignature::channel(d0, d1)?;
        Gqi::validated(sig, vec![choi.clone()], tol)?;
        Ok(Self { d0, d1, choi })
    }

    pub fn from_kraus(kraus: &[CMatrix], tol: &Tolerance) -> Result<Self> {
        let choi = kraus_to_choi(kraus)?;
        Self::new(choi, kraus[0].cols(), kraus[0].rows(), tol)
    }

    pub fn d0(&self) -> usize {
        self.d0
    }

    pub fn d1(&self) -> usize {
        self.d1
    }

    pub fn choi(&self) -> &Hermitian {
        &self.choi
    }

    pub fn kraus(&self, tol: &Tolerance) -> Vec<CMatrix> {
        choi_to_kraus(&self.choi, self.d0, self.d1, tol).expect("validated on construction")
    }

    pub fn signature(&self) -> CombSignature {
        CombSignature::channel(self.d0, self.d1).expect("validated on construction")
    }

    pub fn to_gqi(&self) -> Gqi {
        Gqi::new(self.signature(), vec![self.choi.clone()]).expect("validated on construction")
    }
}

/// Rank decision over an operator family.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankVerdict {
    pub extremal: bool,
    pub rank: usize,
    pub family_size: usize,
}

/// Hermitian images spanning the same complex space as `{f(m, n)}`, given
/// that `f(n, m) = f(m, n)†`.
fn hermitian_family(r: usize, f: impl Fn(usize, usize) -> CMatrix) -> Vec<Hermitian> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(r * r);
    for m in 0..r {
        out.push(Hermitian::symmetrized(f(m, m)));
        for n in m + 1..r {
            let x = f(m, n);
            let xa = x.adjoint();
            out.push(Hermitian::symmetrized((&x + &xa).scale_re(s)));
            out.push(Hermitian::symmetrized((&x - &xa).scale(C64::new(0.0, s))));
        }
    }
    out
}

fn rank_verdict(family: &[Hermitian], tol: &Tolerance) -> Result<RankVerdict> {
    let vectors: Vec<Vec<f64>> = family.iter().map(vectorize_hermitian).collect();
    let report = numerical_rank(&vectors, tol)?;
    Ok(RankVerdict { extremal: report.rank == family.len(), rank: report.rank, family_size: family.len() })
}

/// Linear independence of `{K_mᵀ K_n^*}` over a minimal Kraus set, which
/// has the same rank as `{K_m† K_n}`.
pub fn choi_condition(c: &Channel, tol: &Tolerance) -> Result<RankVerdict> {
    let k = c.kraus(tol);
    let family = hermitian_family(k.len(), |m, n| k[m].transpose().matmul(&k[n].conj()));
    rank_verdict(&family, tol)
}

/// The general comb criterion on the channel's Choi operator with the
/// comb variable directions `{σ_a ⊗ I, σ_a ⊗ σ_b}`.
pub fn channel_extremal_theorem1(c: &Channel, tol: &Tolerance) -> Result<RankVerdict> {
    let cert = is_extremal_with(&c.to_gqi(), NormalizationBasis::CombVariable, tol)?;
    Ok(RankVerdict { extremal: cert.is_extremal(), rank: cert.rank, family_size: cert.family_size })
}

/// Choi operators `{N_i}` summing to a channel.
#[derive(Clone, Debug)]
pub struct Instrument {
    d0: usize,
    d1: usize,
    operators: Vec<Hermitian>,
}

impl Instrument {
    pub fn new(operators: Vec<Hermitian>, d0: usize, d1: usize, tol: &Tolerance) -> Result<Self> {
        let sig = CombSignature::channel(d0, d1)?;
        let g = Gqi::validated(sig, operators, tol)?;
        Ok(Self { d0, d1, operators: g.into_outcomes() })
    }

    /// One Kraus list per outcome.
    pub fn from_kraus(kraus: &[Vec<CMatrix>], tol: &Tolerance) -> Result<Self> {
        let first = kraus.first().and_then(|k| k.first()).ok_or_else(|| Error::Invalid("empty instrument".into()))?;
        let (d1, d0) = (first.rows(), first.cols());
        let ops = kraus.iter().map(|k| kraus_to_choi(k)).collect::<Result<Vec<_>>>()?;
        Self::new(ops, d0, d1, tol)
    }

    pub fn from_gqi(g: &Gqi, tol: &Tolerance) -> Result<Self> {
        let dims = g.signature().dims();
        if dims.len() != 2 {
            return Err(Error::Signature(format!("{dims:?} is not a channel signature")));
        }
        Self::new(g.outcomes().to_vec(), dims[0], dims[1], tol)
    }

    pub fn d0(&self) -> usize {
        self.d0
    }

    pub fn d1(&self) -> usize {
        self.d1
    }

    pub fn operators(&self) -> &[Hermitian] {
        &self.operators
    }

    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    /// Minimal Kraus operators of every outcome.
    pub fn kraus(&self, tol: &Tolerance) -> Vec<Vec<CMatrix>> {
        self.operators
            .iter()
            .map(|n| choi_to_kraus(n, self.d0, self.d1, tol).expect("validated on construction"))
            .collect()
    }

    pub fn to_gqi(&self) -> Gqi {
        Gqi::new(CombSignature::channel(self.d0, self.d1).expect("validated"), self.operators.clone())
            .expect("validated on construction")
    }

    /// `w·self + (1 − w)·other`
    pub fn mix(&self, w: f64, other: &Instrument, tol: &Tolerance) -> Result<Instrument> {
        let g = self.to_gqi().mix(w, &other.to_gqi())?;
        Self::new(g.into_outcomes(), self.d0, self.d1, tol)
    }
}

/// Linear independence of the pooled family `{K_m^{(i)†} K_n^{(i)}}`.
pub fn instrument_extremal(ins: &Instrument, tol: &Tolerance) -> Result<RankVerdict> {
    let mut family = Vec::new();
    for k in ins.kraus(tol) {
        family.extend(hermitian_family(k.len(), |m, n| k[m].adjoint().matmul(&k[n])));
    }
    rank_verdict(&family, tol)
}

/// The comb criterion applied to the instrument's Choi operators directly.
pub fn instrument_extremal_direct(ins: &Instrument, tol: &Tolerance) -> Result<RankVerdict> {
    let cert = is_extremal_with(&ins.to_gqi(), NormalizationBasis::CombVariable, tol)?;
    Ok(RankVerdict { extremal: cert.is_extremal(), rank: cert.rank, family_size: cert.family_size })
}

#[derive(Clone, Debug)]
pub struct InstrumentBound {
    pub ranks: Vec<usize>,
    /// `Σ r_i² ≤ d_0²`
    pub holds: bool,
}

pub fn instrument_rank_bound(ins: &Instrument, tol: &Tolerance) -> InstrumentBound {
    let ranks: Vec<usize> = ins.operators.iter().map(|n| positivity(n, tol).rank).collect();
    let holds = ranks.iter().map(|r| r * r).sum::<usize>() <= ins.d0 * ins.d0;
    InstrumentBound { ranks, holds }
}

/// `N_i(ρ) = √P_i ρ √P_i`
pub fn sqrt_instrument(p: &Povm, tol: &Tolerance) -> Result<Instrument> {
    let kraus: Vec<Vec<CMatrix>> = p.effects().iter().map(|e| vec![e.sqrt_psd().into_matrix()]).collect();
    Instrument::from_kraus(&kraus, tol)
}

/// Effects `P_i = (Tr_1 N_i)ᵀ`, so that `p_i = Tr[P_i ρ]`.
pub fn induced_povm(ins: &Instrument, tol: &Tolerance) -> Result<Povm> {
    let effects = ins
        .operators
        .iter()
        .map(|n| Ok(Hermitian::symmetrized(partial_trace(n, &[ins.d1, ins.d0], &[0])?.matrix().transpose())))
        .collect::<Result<Vec<_>>>()?;
    Povm::new(effects, tol)
}

/// Choi operator `Σ N_i`.
pub fn induced_channel(ins: &Instrument, tol: &Tolerance) -> Result<Channel> {
    Channel::new(ins.to_gqi().normalization(), ins.d0, ins.d1, tol)
}

/// Extremality of an instrument and of the channel and POVM it induces.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CombinationTriple {
    pub instrument: bool,
    pub channel: bool,
    pub povm: bool,
}

impl CombinationTriple {
    pub fn new(instrument: bool, channel: bool, povm: bool) -> Self {
        Self { instrument, channel, povm }
    }

    /// The table row with these signs, `1..=8`.
    pub fn row(&self) -> usize {
        1 + 4 * (!self.instrument as usize) + 2 * (!self.channel as usize) + (!self.povm as usize)
    }

    pub fn from_row(k: usize) -> Option<Self> {
        (1..=8).contains(&k).then(|| {
            let b = k - 1;
            Self::new(b & 4 == 0, b & 2 == 0, b & 1 == 0)
        })
    }
}

impl std::fmt::Display for CombinationTriple {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = |b: bool| if b { '+' } else { '-' };
        write!(f, "({},{},{})", s(self.instrument), s(self.channel), s(self.povm))
    }
}

pub fn classify_combination(ins: &Instrument, tol: &Tolerance) -> Result<CombinationTriple> {
    Ok(CombinationTriple {
        instrument: instrument_extremal(ins, tol)?.extremal,
        channel: choi_condition(&induced_channel(ins, tol)?, tol)?.extremal,
        povm: povm_is_extremal(&induced_povm(ins, tol)?, tol)?.is_extremal(),
    })
}

fn real(rows: usize, cols: usize, v: &[f64]) -> CMatrix {
    CMatrix::from_vec(rows, cols, v.iter().map(|&x| C64::new(x, 0.0)).collect()).expect("literal shape")
}

fn luders_kraus(basis: &CMatrix) -> Vec<Vec<CMatrix>> {
    (0..basis.cols())
        .map(|j| {
            let v = basis.col(j);
            vec![CMatrix::outer(&v, &v)]
        })
        .collect()
}

/// Instrument realizing row `k` of the extremality table. Row 5 has no known
/// instance.
pub fn combination_fixture(k: usize) -> Result<Instrument> {
    let tol = Tolerance::default();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let identity = CMatrix::identity(2);
    let hadamard = real(2, 2, &[h, h, h, -h]);
    let sigma_x = real(2, 2, &[0.0, 1.0, 1.0, 0.0]);
    let p0 = Hermitian::diag(&[1.0 / 3.0, 2.0 / 3.0]);
    let p1 = Hermitian::diag(&[2.0 / 3.0, 1.0 / 3.0]);
    match k {
        1 => Instrument::from_kraus(&[vec![identity]], &tol),
        2 => {
            let plus = real(2, 1, &[h, h]);
            let ket0 = real(2, 1, &[1.0, 0.0]);
            let ket1 = real(2, 1, &[0.0, 1.0]);
            let w = real(2, 2, &[0.0, 1.0, -1.0, 0.0]);
            let s0 = p0.sqrt_psd().into_matrix();
            let s1 = p1.sqrt_psd().into_matrix();
            let m0 = s0.kron(&plus);
            let m1 = &s1.kron(&ket0).scale_re(h) + &w.matmul(&s1).kron(&ket1).scale_re(h);
            Instrument::from_kraus(&[vec![m0], vec![m1]], &tol)
        }
        3 => Instrument::from_kraus(&luders_kraus(&identity), &tol),
        4 => sqrt_instrument(&Povm::new(vec![p0, p1], &tol)?, &tol),
        5 => Err(Error::OpenProblem),
        6 => {
            // amplitude damping with γ = ½: extremal, two Kraus operators
            let k0 = real(2, 2, &[1.0, 0.0, 0.0, h]);
            let k1 = real(2, 2, &[0.0, h, 0.0, 0.0]);
            let a = Instrument::from_kraus(&[vec![k0.clone()], vec![k1.clone()]], &tol)?;
            let b = Instrument::from_kraus(&[vec![k1], vec![k0]], &tol)?;
            a.mix(0.5, &b, &tol)
        }
        7 => {
            let plain = luders_kraus(&identity);
            let rotated: Vec<Vec<CMatrix>> =
                plain.iter().map(|k| k.iter().map(|m| sigma_x.matmul(m)).collect()).collect();
            let a = Instrument::from_kraus(&plain, &tol)?;
            let b = Instrument::from_kraus(&rotated, &tol)?;
            a.mix(0.5, &b, &tol)
        }
        8 => {
            let a = Instrument::from_kraus(&luders_kraus(&identity), &tol)?;
            let b = Instrument::from_kraus(&luders_kraus(&hadamard), &tol)?;
            a.mix(0.5, &b, &tol)
        }
        _ => Err(Error::Invalid(format!("no combination {k}; rows are 1 to 8"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn kraus_round_trips() {
        let tol = Tolerance::default();
        let id = kraus_to_choi(&[CMatrix::identity(2)]).unwrap();
        let k = choi_to_kraus(&id, 2, 2, &tol).unwrap();
        assert_eq!(k.len(), 1);
        let phase = k[0][(0, 0)] / k[0][(0, 0)].norm();
        assert!(k[0].scale(phase.conj()).max_abs_diff(&CMatrix::identity(2)) < 1e-12);

        let dep = Hermitian::identity(4).scale(0.5);
        let k = choi_to_kraus(&dep, 2, 2, &tol).unwrap();
        assert_eq!(k.len(), 4);
        assert!(kraus_to_choi(&k).unwrap().max_abs_diff(&dep) < 1e-10);

        let pair = [real(2, 2, &[1.0, 0.0, 0.0, 0.0]), real(2, 2, &[0.0, 1.0, 0.0, 0.0])];
        let choi = kraus_to_choi(&pair).unwrap();
        let k = choi_to_kraus(&choi, 2, 2, &tol).unwrap();
        assert_eq!(k.len(), 2);
        assert!(kraus_to_choi(&k).unwrap().max_abs_diff(&choi) < 1e-10);
        assert!(choi_to_kraus(&Hermitian::diag(&[1.0, -1.0, 0.0, 0.0]), 2, 2, &tol).is_err());
    }

    #[test]
    fn partial_trace_identity() {
        let a = CMatrix::from_fn(3, 2, |i, j| C64::new(i as f64 + 0.5, j as f64 - 0.25));
        let b = CMatrix::from_fn(3, 2, |i, j| C64::new((i * j) as f64, 1.0 - i as f64));
        let lhs = partial_trace_outer(&a, &b).unwrap();
        let rhs = a.transpose().matmul(&b.conj());
        assert!(lhs.max_abs_diff(&rhs) < 1e-12);
    }

    #[test]
    fn channel_criteria_examples() {
        let tol = Tolerance::default();
        let u = Channel::from_kraus(&[real(2, 2, &[0.0, 1.0, 1.0, 0.0])], &tol).unwrap();
        assert!(choi_condition(&u, &tol).unwrap().extremal);
        assert!(channel_extremal_theorem1(&u, &tol).unwrap().extremal);
        let dep = Channel::new(Hermitian::identity(4).scale(0.5), 2, 2, &tol).unwrap();
        assert!(!choi_condition(&dep, &tol).unwrap().extremal);
        assert!(!channel_extremal_theorem1(&dep, &tol).unwrap().extremal);
        let comb2 = induced_channel(&combination_fixture(2).unwrap(), &tol).unwrap();
        assert!(choi_condition(&comb2, &tol).unwrap().extremal);
        assert!(channel_extremal_theorem1(&comb2, &tol).unwrap().extremal);
    }

    #[test]
    fn sqrt_instruments() {
        let tol = Tolerance::default();
        let pair = Povm::new(vec![Hermitian::diag(&[0.5, 0.0]), Hermitian::diag(&[0.5, 1.0])], &tol).unwrap();
        let ins = sqrt_instrument(&pair, &tol).unwrap();
        assert!(instrument_extremal(&ins, &tol).unwrap().extremal);
        assert!(!povm_is_extremal(&induced_povm(&ins, &tol).unwrap(), &tol).unwrap().is_extremal());
        let halves = Povm::new(vec![Hermitian::identity(2).scale(0.5), Hermitian::identity(2).scale(0.5)], &tol).unwrap();
        assert!(!instrument_extremal(&sqrt_instrument(&halves, &tol).unwrap(), &tol).unwrap().extremal);
        let induced = induced_povm(&ins, &tol).unwrap();
        for (a, b) in induced.effects().iter().zip(pair.effects()) {
            assert!(a.max_abs_diff(b) < 1e-10);
        }
    }

    #[test]
    fn induced_povm_is_transposed_marginal() {
        let tol = Tolerance::default();
        // K = |0⟩⟨+i| has K†K = |+i⟩⟨+i|, whose (0,1) entry is -i/2
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let k0 = CMatrix::from_vec(2, 2, vec![c(h), C64::new(0.0, -h), c(0.0), c(0.0)]).unwrap();
        let k1 = CMatrix::from_vec(2, 2, vec![c(0.0), c(0.0), c(h), C64::new(0.0, h)]).unwrap();
        let ins = Instrument::from_kraus(&[vec![k0.clone()], vec![k1]], &tol).unwrap();
        let p = induced_povm(&ins, &tol).unwrap();
        assert!(p.effects()[0].matrix().max_abs_diff(&k0.adjoint().matmul(&k0)) < 1e-12);
    }

    #[test]
    fn rank_bound_examples() {
        let tol = Tolerance::default();
        let luders = combination_fixture(3).unwrap();
        assert!(instrument_rank_bound(&luders, &tol).holds);
        let halves = Povm::new(vec![Hermitian::identity(2).scale(0.5), Hermitian::identity(2).scale(0.5)], &tol).unwrap();
        // two rank-2 outcomes: 4 + 4 > 4
        let ins = Instrument::new(
            vec![Hermitian::identity(4).scale(0.25), Hermitian::identity(4).scale(0.25)],
            2,
            2,
            &tol,
        )
        .unwrap();
        let b = instrument_rank_bound(&ins, &tol);
        assert!(!b.holds);
        assert!(!instrument_extremal(&ins, &tol).unwrap().extremal);
        assert!(instrument_rank_bound(&sqrt_instrument(&halves, &tol).unwrap(), &tol).holds);
    }

    #[test]
    fn table_rows() {
        let tol = Tolerance::default();
        for k in [1, 2, 3, 4, 6, 7, 8] {
            let ins = combination_fixture(k).unwrap();
            let triple = classify_combination(&ins, &tol).unwrap();
            assert_eq!(triple.row(), k, "row {k}: got {triple}");
            assert_eq!(CombinationTriple::from_row(k), Some(triple));
        }
        assert!(matches!(combination_fixture(5), Err(Error::OpenProblem)));
        assert!(combination_fixture(9).is_err());
    }

    #[test]
    fn kraus_criterion_matches_direct_test_on_fixtures() {
        let tol = Tolerance::default();
        for k in [1, 2, 3, 4, 6, 7, 8] {
            let ins = combination_fixture(k).unwrap();
            assert_eq!(
                instrument_extremal(&ins, &tol).unwrap().extremal,
                instrument_extremal_direct(&ins, &tol).unwrap().extremal
            );
        }
    }
}
