//! Generalized quantum instruments: families `{T_i}` of positive operators
//! summing to a deterministic comb. Extremality is a rank test on the support
//! bases of the `T_i` joined with a basis of allowed perturbations of the
//! normalization; a rank deficiency yields an explicit two-sided perturbation.

use crate::combs::{comb_variable_basis, is_deterministic_comb, CombCheck, CombSignature};
use crate::error::{Error, Result};
use crate::linalg::{
    combine_operators, norm, null_space, numerical_rank, positivity, span_basis,
    support_vectors, traceless_hermitian_basis, vectorize_all, vectorize_hermitian, CMatrix, Hermitian,
};
use crate::tolerance::Tolerance;
use crate::C64;

const BISECTION_STEPS: usize = 60;

/// `{T_1, …, T_M}` on `H_{2N−1} ⊗ ⋯ ⊗ H_0`.
#[derive(Clone, Debug)]
pub struct Gqi {
    signature: CombSignature,
    outcomes: Vec<Hermitian>,
}

impl Gqi {
    /// Checks shapes only; see [`is_valid_gqi`] for the physical constraints.
    pub fn new(signature: CombSignature, outcomes: Vec<Hermitian>) -> Result<Self> {
        if outcomes.is_empty() {
            return Err(Error::Invalid("a GQI needs at least one outcome".into()));
        }
        let d = signature.total_dim();
        if let Some(bad) = outcomes.iter().find(|t| t.dim() != d) {
            return Err(Error::Shape(format!(
                "outcome of dimension {} on signature {:?} (expected {d})",
                bad.dim(),
                signature.dims()
            )));
        }
        Ok(Self { signature, outcomes })
    }

    /// Shape check plus [`is_valid_gqi`].
    pub fn validated(signature: CombSignature, outcomes: Vec<Hermitian>, tol: &Tolerance) -> Result<Self> {
        let g = Self::new(signature, outcomes)?;
        g.ensure_valid(tol)?;
        Ok(g)
    }

    pub fn signature(&self) -> &CombSignature {
        &self.signature
    }

    pub fn outcomes(&self) -> &[Hermitian] {
        &self.outcomes
    }

    pub fn into_outcomes(self) -> Vec<Hermitian> {
        self.outcomes
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.signature.total_dim()
    }

    /// `R = Σ T_i`
    pub fn normalization(&self) -> Hermitian {
        let mut r = Hermitian::zeros(self.dim());
        for t in &self.outcomes {
            r = r.add(t);
        }
        r
    }

    /// `w·self + (1 − w)·other`, outcome by outcome.
    pub fn mix(&self, w: f64, other: &Gqi) -> Result<Gqi> {
        if self.signature != other.signature || self.len() != other.len() {
            return Err(Error::Invalid("mixing GQIs with different signatures or outcome counts".into()));
        }
        let outcomes = self
            .outcomes
            .iter()
            .zip(&other.outcomes)
            .map(|(a, b)| a.scale(w).add_scaled(1.0 - w, b))
            .collect();
        Ok(Gqi { signature: self.signature.clone(), outcomes })
    }

    /// Largest entrywise difference over outcomes.
    pub fn max_abs_diff(&self, other: &Gqi) -> f64 {
        self.outcomes.iter().zip(&other.outcomes).map(|(a, b)| a.max_abs_diff(b)).fold(0.0, f64::max)
    }

    /// `(Σ_i ‖T_i − T'_i‖²_HS)^{1/2}`
    pub fn hs_distance(&self, other: &Gqi) -> f64 {
        self.outcomes
            .iter()
            .zip(&other.outcomes)
            .map(|(a, b)| a.sub(b).frobenius_norm().powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub(crate) fn ensure_valid(&self, tol: &Tolerance) -> Result<()> {
        let check = is_valid_gqi(self, tol)?;
        if let Some(i) = check.outcome_psd.iter().position(|ok| !ok) {
            return Err(Error::NotPositive { min_eigenvalue: check.outcome_min_eigenvalues[i] });
        }
        if !check.comb.accepted {
            if !check.comb.psd {
                return Err(Error::NotPositive { min_eigenvalue: check.comb.min_eigenvalue });
            }
            return Err(Error::Normalization { residual: check.comb.max_residual(), tolerance: tol.comb });
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct GqiCheck {
    pub accepted: bool,
    pub outcome_min_eigenvalues: Vec<f64>,
    pub outcome_psd: Vec<bool>,
    /// Cascade check of `Σ T_i`.
    pub comb: CombCheck,
}

pub fn is_valid_gqi(g: &Gqi, tol: &Tolerance) -> Result<GqiCheck> {
    let pos: Vec<_> = g.outcomes.iter().map(|t| positivity(t, tol)).collect();
    let r = g.normalization();
    let comb = is_deterministic_comb(&r, &g.signature, tol)?;
    // 0 ≤ T_i ≤ R, so an outcome that vanishes is judged on the scale of R
    let floor = tol.support_cutoff(g.dim(), r.spectral_norm());
    let outcome_psd: Vec<bool> = pos.iter().map(|p| p.min_eigenvalue >= -p.cutoff.max(floor)).collect();
    Ok(GqiCheck {
        accepted: comb.accepted && outcome_psd.iter().all(|&x| x),
        outcome_min_eigenvalues: pos.iter().map(|p| p.min_eigenvalue).collect(),
        outcome_psd,
        comb,
    })
}

/// Which basis spans the allowed perturbations `Δ` of the normalization.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum NormalizationBasis {
    /// 1-testers use [`SupportIntersection`](Self::SupportIntersection),
    /// everything else [`CombVariable`](Self::CombVariable).
    #[default]
    Auto,
    /// The variable directions of the comb family.
    CombVariable,
    /// Variable directions restricted to operators supported on `Supp(R)`.
    SupportIntersection,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Extremal,
    NotExtremal,
}

impl Verdict {
    pub fn is_extremal(self) -> bool {
        self == Verdict::Extremal
    }

    pub fn from_bool(extremal: bool) -> Self {
        if extremal {
            Verdict::Extremal
        } else {
            Verdict::NotExtremal
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Extremal => "extremal",
            Verdict::NotExtremal => "not extremal",
        })
    }
}

/// Two-sided perturbation `{T_i ± ε D_i}` with `Σ D_i = Δ`.
#[derive(Clone, Debug)]
pub struct Perturbation {
    pub d: Vec<Hermitian>,
    pub delta: Hermitian,
    /// Largest `ε` keeping every `T_i ± ε D_i` positive.
    pub epsilon_star: f64,
}

#[derive(Clone, Debug)]
pub struct ExtremalityCertificate {
    pub verdict: Verdict,
    pub family_size: usize,
    pub rank: usize,
    pub threshold: f64,
    /// Smallest retained singular value.
    pub margin: Option<f64>,
    pub outcome_ranks: Vec<usize>,
    pub support_family_size: usize,
    pub normalization_family_size: usize,
    pub perturbation: Option<Perturbation>,
}

impl ExtremalityCertificate {
    pub fn is_extremal(&self) -> bool {
        self.verdict.is_extremal()
    }
}

fn isometry(vectors: &[Vec<C64>], dim: usize) -> CMatrix {
    CMatrix::from_fn(dim, vectors.len(), |i, j| vectors[j][i])
}

/// `{I_2 ⊗ σ_l}/√d_2` with `σ_l` traceless on `Supp(ρ)`, for the 1-tester
/// normalization `I_2 ⊗ ρ`.
fn tester_intersection_basis(sig: &CombSignature, r: &Hermitian, tol: &Tolerance) -> Result<Vec<Hermitian>> {
    let (d1, d2) = (sig.dims()[1], sig.dims()[2]);
    let rho = crate::linalg::partial_trace(r, &[d2, d1], &[0])?.scale(1.0 / d2 as f64);
    let p = isometry(&support_vectors(&rho, tol), d1);
    let left = Hermitian::identity(d2).scale(1.0 / (d2 as f64).sqrt());
    Ok(traceless_hermitian_basis(p.cols())
        .iter()
        .map(|tau| left.kron(&tau.conjugate_by(&p)))
        .collect())
}

/// Orthonormal basis of `span(𝔻_(N)) ∩ {Hermitian operators on Supp(R)}`.
pub fn support_intersection_basis(sig: &CombSignature, r: &Hermitian, tol: &Tolerance) -> Result<Vec<Hermitian>> {
    if sig.is_one_tester() {
        return tester_intersection_basis(sig, r, tol);
    }
    let dim = sig.total_dim();
    let variable = comb_variable_basis(sig);
    let supp = support_vectors(r, tol);
    if supp.len() == dim {
        return Ok(variable);
    }
    let refs: Vec<&[C64]> = supp.iter().map(Vec::as_slice).collect();
    let s = vectorize_all(&span_basis(&refs));
    // component of each G_k outside the support-operator subspace
    let outside: Vec<Vec<f64>> = vectorize_all(&variable)
        .into_iter()
        .map(|mut g| {
            for b in &s {
                let c = crate::linalg::dot(b, &g);
                for (x, y) in g.iter_mut().zip(b) {
                    *x -= c * y;
                }
            }
            g
        })
        .collect();
    let kernel = null_space(&outside, tol)?;
    Ok(kernel.iter().map(|a| combine_operators(&variable, a, dim)).collect())
}

fn normalization_basis(g: &Gqi, which: NormalizationBasis, tol: &Tolerance) -> Result<Vec<Hermitian>> {
    let which = match which {
        NormalizationBasis::Auto if g.signature.is_one_tester() => NormalizationBasis::SupportIntersection,
        NormalizationBasis::Auto => NormalizationBasis::CombVariable,
        other => other,
    };
    match which {
        NormalizationBasis::SupportIntersection => support_intersection_basis(&g.signature, &g.normalization(), tol),
        _ => Ok(comb_variable_basis(&g.signature)),
    }
}

pub fn is_extremal(g: &Gqi, tol: &Tolerance) -> Result<ExtremalityCertificate> {
    is_extremal_with(g, NormalizationBasis::Auto, tol)
}

pub fn is_extremal_with(g: &Gqi, which: NormalizationBasis, tol: &Tolerance) -> Result<ExtremalityCertificate> {
    g.ensure_valid(tol)?;
    let dim = g.dim();
    let supports: Vec<Vec<Vec<C64>>> = g.outcomes.iter().map(|t| support_vectors(t, tol)).collect();
    let mut family = Vec::new();
    let mut owner = Vec::new();
    for (i, s) in supports.iter().enumerate() {
        let refs: Vec<&[C64]> = s.iter().map(Vec::as_slice).collect();
        for q in span_basis(&refs) {
            family.push(q);
            owner.push(i);
        }
    }
    let support_family_size = family.len();
    let normal = normalization_basis(g, which, tol)?;
    let normalization_family_size = normal.len();
    family.extend(normal);

    let report = numerical_rank(&vectorize_all(&family), tol)?;
    let outcome_ranks: Vec<usize> = supports.iter().map(Vec::len).collect();
    let mut cert = ExtremalityCertificate {
        verdict: Verdict::from_bool(report.rank == family.len()),
        family_size: family.len(),
        rank: report.rank,
        threshold: report.threshold,
        margin: report.margin(),
        outcome_ranks,
        support_family_size,
        normalization_family_size,
        perturbation: None,
    };
    if let Some(c) = report.nullvector {
        let mut d: Vec<Hermitian> = vec![Hermitian::zeros(dim); g.len()];
        for (k, q) in family[..support_family_size].iter().enumerate() {
            d[owner[k]] = d[owner[k]].add_scaled(c[k], q);
        }
        let delta = combine_operators(&family[support_family_size..], &c[support_family_size..], dim).scale(-1.0);
        let epsilon_star = maximal_epsilon(g, &supports, &d);
        cert.perturbation = Some(Perturbation { d, delta, epsilon_star });
    }
    Ok(cert)
}

/// `P† A P`
fn compress(a: &Hermitian, p: &CMatrix) -> Hermitian {
    a.conjugate_by(&p.adjoint())
}

fn feasible(ts: &[Hermitian], ds: &[Hermitian], eps: f64) -> bool {
    ts.iter().zip(ds).all(|(t, d)| {
        t.add_scaled(eps, d).min_eigenvalue() >= 0.0 && t.add_scaled(-eps, d).min_eigenvalue() >= 0.0
    })
}

/// Largest `ε` with every `T_i ± ε D_i ≥ 0`, by bisection on the operators
/// compressed to `Supp(T_i)`.
fn maximal_epsilon(g: &Gqi, supports: &[Vec<Vec<C64>>], d: &[Hermitian]) -> f64 {
    let dim = g.dim();
    let mut ts = Vec::new();
    let mut ds = Vec::new();
    let mut upper = f64::INFINITY;
    for ((t, s), di) in g.outcomes.iter().zip(supports).zip(d) {
        if s.is_empty() {
            continue;
        }
        let p = isometry(s, dim);
        let tc = compress(t, &p);
        let dc = compress(di, &p);
        let e = dc.eig();
        let (lambda, v) = e
            .eigenvalues
            .iter()
            .zip(&e.eigenvectors)
            .max_by(|a, b| a.0.abs().total_cmp(&b.0.abs()))
            .expect("non-empty support");
        if lambda.abs() > 0.0 {
            let tv = tc.apply(v);
            let vtv: f64 = v.iter().zip(&tv).map(|(a, b)| (a.conj() * b).re).sum();
            upper = upper.min(vtv / lambda.abs());
        }
        ts.push(tc);
        ds.push(dc);
    }
    if !upper.is_finite() {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0, upper);
    if feasible(&ts, &ds, hi) {
        return hi;
    }
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if feasible(&ts, &ds, mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// The two GQIs `{T_i ± ε* D_i}` whose midpoint is the input.
#[derive(Clone, Debug)]
pub struct Decomposition {
    pub plus: Gqi,
    pub minus: Gqi,
    pub certificate: ExtremalityCertificate,
}

pub fn decompose_step(g: &Gqi, tol: &Tolerance) -> Result<Decomposition> {
    let certificate = is_extremal(g, tol)?;
    let pert = certificate.perturbation.as_ref().ok_or(Error::Extremal)?;
    let eps = pert.epsilon_star;
    if eps <= 0.0 {
        return Err(Error::Invalid("perturbation has vanishing step".into()));
    }
    let shift = |sign: f64| Gqi {
        signature: g.signature.clone(),
        outcomes: g.outcomes.iter().zip(&pert.d).map(|(t, d)| t.add_scaled(sign * eps, d)).collect(),
    };
    let (plus, minus) = (shift(1.0), shift(-1.0));
    Ok(Decomposition { plus, minus, certificate })
}

/// Counts behind an extremality verdict.
#[derive(Clone, Debug)]
pub struct ExtremalityProfile {
    pub outcome_ranks: Vec<usize>,
    pub support_family_size: usize,
    pub normalization_family_size: usize,
    /// `(Π d_k)²`: real dimension of the Hermitian operators on the full space.
    pub ambient_dim: usize,
    pub rank: usize,
    pub margin: Option<f64>,
    pub verdict: Verdict,
}

pub fn extremality_profile(g: &Gqi, which: NormalizationBasis, tol: &Tolerance) -> Result<ExtremalityProfile> {
    let c = is_extremal_with(g, which, tol)?;
    Ok(ExtremalityProfile {
        outcome_ranks: c.outcome_ranks,
        support_family_size: c.support_family_size,
        normalization_family_size: c.normalization_family_size,
        ambient_dim: g.dim() * g.dim(),
        rank: c.rank,
        margin: c.margin,
        verdict: c.verdict,
    })
}

/// Residuals of a perturbation against its GQI: `‖Σ D_i − Δ‖_max`, the
/// largest off-support block of any `D_i`, and the component of `Δ` outside
/// `span(𝔻_(N))`.
#[derive(Clone, Debug)]
pub struct PerturbationResiduals {
    pub sum: f64,
    pub off_support: f64,
    pub outside_variable_span: f64,
}

pub fn perturbation_residuals(g: &Gqi, p: &Perturbation, tol: &Tolerance) -> PerturbationResiduals {
    let dim = g.dim();
    let mut total = Hermitian::zeros(dim);
    let mut off_support: f64 = 0.0;
    for (t, d) in g.outcomes.iter().zip(&p.d) {
        total = total.add(d);
        let sv = support_vectors(t, tol);
        let pm = isometry(&sv, dim);
        let proj = pm.matmul(&pm.adjoint());
        let comp = &CMatrix::identity(dim) - &proj;
        let outside_right = comp.matmul(d.matrix()).matmul(&proj);
        let outside_both = comp.matmul(d.matrix()).matmul(&comp);
        off_support = off_support.max(outside_right.max_abs()).max(outside_both.max_abs());
    }
    let mut residual = vectorize_hermitian(&p.delta);
    for gk in comb_variable_basis(g.signature()) {
        let v = vectorize_hermitian(&gk);
        let c = crate::linalg::dot(&v, &residual);
        for (x, y) in residual.iter_mut().zip(&v) {
            *x -= c * y;
        }
    }
    PerturbationResiduals {
        sum: total.max_abs_diff(&p.delta),
        off_support,
        outside_variable_span: norm(&residual),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn choi_of_unitary(u: &CMatrix) -> Hermitian {
        // |U⟩⟩ is the row-major vec of U
        Hermitian::projector(u.as_slice())
    }

    fn channel_sig() -> CombSignature {
        CombSignature::channel(2, 2).unwrap()
    }

    fn sigma_x() -> CMatrix {
        CMatrix::from_fn(2, 2, |i, j| C64::new((i != j) as u8 as f64, 0.0))
    }

    fn single(t: Hermitian) -> Gqi {
        Gqi::new(channel_sig(), vec![t]).unwrap()
    }

    #[test]
    fn validity_examples() {
        let tol = Tolerance::default();
        assert!(is_valid_gqi(&single(choi_of_unitary(&CMatrix::identity(2))), &tol).unwrap().accepted);
        assert!(!is_valid_gqi(&single(Hermitian::identity(4)), &tol).unwrap().accepted);
        let p0 = Hermitian::projector(&[C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)]);
        let p1 = Hermitian::projector(&[C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0)]);
        let luders = Gqi::new(channel_sig(), vec![p0, p1]).unwrap();
        assert!(is_valid_gqi(&luders, &tol).unwrap().accepted);
        assert!(is_extremal(&luders, &tol).unwrap().is_extremal());
    }

    #[test]
    fn unitary_channel_profile() {
        let tol = Tolerance::default();
        let g = single(choi_of_unitary(&CMatrix::identity(2)));
        let p = extremality_profile(&g, NormalizationBasis::CombVariable, &tol).unwrap();
        assert_eq!(p.outcome_ranks, vec![1]);
        assert_eq!(p.support_family_size, 1);
        assert_eq!(p.normalization_family_size, 12);
        assert_eq!(p.rank, 13);
        assert_eq!(p.ambient_dim, 16);
        assert!(p.verdict.is_extremal());
    }

    #[test]
    fn depolarizing_decomposes() {
        let tol = Tolerance::default();
        let g = single(Hermitian::identity(4).scale(0.5));
        let cert = is_extremal(&g, &tol).unwrap();
        assert!(!cert.is_extremal());
        let pert = cert.perturbation.as_ref().unwrap();
        assert!(pert.epsilon_star > 0.0);
        let res = perturbation_residuals(&g, pert, &tol);
        assert!(res.sum <= 1e-9 && res.off_support <= 1e-12 && res.outside_variable_span <= 1e-9, "{res:?}");

        let dec = decompose_step(&g, &tol).unwrap();
        assert!(is_valid_gqi(&dec.plus, &tol).unwrap().accepted);
        assert!(is_valid_gqi(&dec.minus, &tol).unwrap().accepted);
        assert!(dec.plus.mix(0.5, &dec.minus).unwrap().max_abs_diff(&g) <= 1e-9);
        assert!(dec.plus.hs_distance(&dec.minus) > 1e-6);
    }

    #[test]
    fn mixture_of_unitaries_decomposes() {
        let tol = Tolerance::default();
        let a = single(choi_of_unitary(&CMatrix::identity(2)));
        let b = single(choi_of_unitary(&sigma_x()));
        let m = a.mix(0.5, &b).unwrap();
        let dec = decompose_step(&m, &tol).unwrap();
        assert!(dec.plus.mix(0.5, &dec.minus).unwrap().max_abs_diff(&m) <= 1e-9);
        assert!(is_valid_gqi(&dec.plus, &tol).unwrap().accepted);
    }

    #[test]
    fn extremal_refuses_decomposition() {
        let tol = Tolerance::default();
        let g = single(choi_of_unitary(&sigma_x()));
        assert!(matches!(decompose_step(&g, &tol), Err(Error::Extremal)));
    }

    #[test]
    fn central_comb_not_extremal() {
        let tol = Tolerance::default();
        let sig = CombSignature::new(vec![2, 2, 2, 2]).unwrap();
        let r = crate::combs::DeterministicComb::central(sig.clone());
        let g = Gqi::new(sig, vec![r.into_operator()]).unwrap();
        assert!(!is_extremal(&g, &tol).unwrap().is_extremal());
    }

    #[test]
    fn bases_agree_on_channels() {
        let tol = Tolerance::default();
        let amp = {
            let k0 = CMatrix::from_vec(2, 2, vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.5f64.sqrt(), 0.0)]).unwrap();
            let k1 = CMatrix::from_vec(2, 2, vec![C64::new(0.0, 0.0), C64::new(0.5f64.sqrt(), 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)]).unwrap();
            Hermitian::projector(k0.as_slice()).add(&Hermitian::projector(k1.as_slice()))
        };
        for t in [amp, choi_of_unitary(&sigma_x()), Hermitian::identity(4).scale(0.5)] {
            let g = single(t);
            let a = is_extremal_with(&g, NormalizationBasis::CombVariable, &tol).unwrap();
            let b = is_extremal_with(&g, NormalizationBasis::SupportIntersection, &tol).unwrap();
            assert_eq!(a.verdict, b.verdict);
        }
    }

    #[test]
    fn invalid_input_rejected() {
        let tol = Tolerance::default();
        assert!(is_extremal(&single(Hermitian::identity(4)), &tol).is_err());
        assert!(Gqi::new(channel_sig(), vec![]).is_err());
        assert!(Gqi::new(channel_sig(), vec![Hermitian::identity(3)]).is_err());
    }
}
