//! Deterministic quantum N-combs: the normalization cascade, the
//! parametrization of the comb family and its variable directions, and
//! random comb generation.
//!
//! Space `H_k` for `k = 0..2N` carries dimension `d_k`; even labels are
//! inputs, odd labels outputs. Operators live on `H_{2N−1} ⊗ ⋯ ⊗ H_0`.
//! A deterministic comb satisfies, with `R^{(N)} = R`,
//!
//! ```text
//! Tr_{2n−1} R^{(n)} = I_{2n−2} ⊗ R^{(n−1)},   n = N, …, 2
//! Tr_1 R^{(1)}      = I_0
//! ```

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{
    full_hermitian_basis, partial_trace, positivity, traceless_hermitian_basis, Hermitian,
};
use crate::tolerance::Tolerance;

/// Dimensions `d_0, …, d_{2N−1}` of the spaces a comb acts on.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CombSignature {
    dims: Vec<usize>,
}

impl CombSignature {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.len() < 2 || !dims.len().is_multiple_of(2) {
            return Err(Error::Signature(format!(
                "expected an even number (at least 2) of dimensions, got {}",
                dims.len()
            )));
        }
        if dims.contains(&0) {
            return Err(Error::Signature("dimensions must be at least 1".into()));
        }
        Ok(Self { dims })
    }

    /// Channel signature: input `d0`, output `d1`.
    pub fn channel(d0: usize, d1: usize) -> Result<Self> {
        Self::new(vec![d0, d1])
    }

    /// 1-tester on `H_2 ⊗ H_1`: dimensions `(1, d1, d2, 1)`.
    pub fn one_tester(d1: usize, d2: usize) -> Result<Self> {
        Self::new(vec![1, d1, d2, 1])
    }

    /// The zero-tooth signature carried by `R^{(0)} = [1]`.
    pub fn trivial() -> Self {
        Self { dims: vec![] }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Number of teeth `N`.
    pub fn teeth(&self) -> usize {
        self.dims.len() / 2
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    /// Dimensions in Kronecker order `[d_{2N−1}, …, d_0]`.
    pub fn kron_dims(&self) -> Vec<usize> {
        self.dims.iter().rev().copied().collect()
    }

    /// `d_1 · d_3 ⋯ d_{2N−1}`
    pub fn odd_product(&self) -> usize {
        self.dims.iter().skip(1).step_by(2).product()
    }

    /// Signature of `R^{(n)}`: the first `2n` spaces.
    pub fn truncated(&self, n: usize) -> Self {
        Self { dims: self.dims[..2 * n].to_vec() }
    }

    /// True for `(1, d1, d2, 1)`.
    pub fn is_one_tester(&self) -> bool {
        self.dims.len() == 4 && self.dims[0] == 1 && self.dims[3] == 1
    }

    fn prod(&self, range: std::ops::Range<usize>) -> usize {
        self.dims[range].iter().product()
    }
}

/// Per-level residuals of the normalization cascade.
#[derive(Clone, Debug)]
pub struct CombCheck {
    pub accepted: bool,
    /// `level_residuals[n − 1]` is `‖Tr_{2n−1}R^{(n)} − I_{2n−2} ⊗ R^{(n−1)}‖_max`.
    pub level_residuals: Vec<f64>,
    pub min_eigenvalue: f64,
    pub psd: bool,
}

impl CombCheck {
    pub fn max_residual(&self) -> f64 {
        self.level_residuals.iter().copied().fold(0.0, f64::max)
    }
}

fn check_dim(r: &Hermitian, sig: &CombSignature) -> Result<()> {
    if r.dim() != sig.total_dim() {
        return Err(Error::Shape(format!(
            "operator dimension {} does not match signature {:?} (product {})",
            r.dim(),
            sig.dims(),
            sig.total_dim()
        )));
    }
    Ok(())
}

/// One cascade level: returns `(Tr_{2n−1}R^{(n)}, R^{(n−1)})` with
/// `R^{(n−1)} = Tr_{2n−1,2n−2}R^{(n)} / d_{2n−2}`.
fn descend(r_n: &Hermitian, sig: &CombSignature, n: usize) -> Result<(Hermitian, Hermitian)> {
    let dims = sig.truncated(n).kron_dims();
    let top = partial_trace(r_n, &dims, &[0])?;
    let lower = partial_trace(r_n, &dims, &[0, 1])?.scale(1.0 / sig.dims()[2 * n - 2] as f64);
    Ok((top, lower))
}

/// Cascade residuals of an arbitrary Hermitian operator (no positivity check).
pub fn cascade_residuals(r: &Hermitian, sig: &CombSignature) -> Result<Vec<f64>> {
    check_dim(r, sig)?;
    let n_teeth = sig.teeth();
    let mut residuals = vec![0.0; n_teeth];
    let mut cur = r.clone();
    for n in (1..=n_teeth).rev() {
        let (top, lower) = descend(&cur, sig, n)?;
        let d_in = sig.dims()[2 * n - 2];
        let expected = if n == 1 {
            Hermitian::identity(d_in)
        } else {
            Hermitian::identity(d_in).kron(&lower)
        };
        residuals[n - 1] = top.max_abs_diff(&expected);
        cur = lower;
    }
    Ok(residuals)
}

pub fn is_deterministic_comb(r: &Hermitian, sig: &CombSignature, tol: &Tolerance) -> Result<CombCheck> {
    let level_residuals = cascade_residuals(r, sig)?;
    let pos = positivity(r, tol);
    let psd = pos.is_psd();
    let accepted = psd && level_residuals.iter().all(|&x| x <= tol.comb);
    Ok(CombCheck { accepted, level_residuals, min_eigenvalue: pos.min_eigenvalue, psd })
}

/// A validated deterministic comb.
#[derive(Clone, Debug)]
pub struct DeterministicComb {
    signature: CombSignature,
    operator: Hermitian,
}

impl DeterministicComb {
    pub fn new(operator: Hermitian, signature: CombSignature, tol: &Tolerance) -> Result<Self> {
        let check = is_deterministic_comb(&operator, &signature, tol)?;
        if !check.psd {
            return Err(Error::NotPositive { min_eigenvalue: check.min_eigenvalue });
        }
        if !check.accepted {
            return Err(Error::Normalization { residual: check.max_residual(), tolerance: tol.comb });
        }
        Ok(Self { signature, operator })
    }

    /// `I / (d_1 d_3 ⋯ d_{2N−1})`
    pub fn central(signature: CombSignature) -> Self {
        let op = Hermitian::identity(signature.total_dim()).scale(1.0 / signature.odd_product() as f64);
        Self { signature, operator: op }
    }

    pub fn signature(&self) -> &CombSignature {
        &self.signature
    }

    pub fn operator(&self) -> &Hermitian {
        &self.operator
    }

    pub fn into_operator(self) -> Hermitian {
        self.operator
    }

    /// `R^{(n−1)}` on the first `2(n−1)` spaces, for `1 ≤ n ≤ N`. Level 1
    /// yields the trivial comb `[1]`.
    pub fn reduced(&self, n: usize) -> Result<Self> {
        let teeth = self.signature.teeth();
        if n == 0 || n > teeth {
            return Err(Error::Invalid(format!("reduction level {n} outside 1..={teeth}")));
        }
        let mut cur = self.operator.clone();
        for level in (n..=teeth).rev() {
            cur = descend(&cur, &self.signature, level)?.1;
        }
        let signature =
            if n == 1 { CombSignature::trivial() } else { self.signature.truncated(n - 1) };
        Ok(Self { signature, operator: cur })
    }
}

/// `R^{(n−1)}` of a validated comb.
pub fn reduced_comb(r: &DeterministicComb, n: usize) -> Result<DeterministicComb> {
    r.reduced(n)
}

/// HS-orthonormal basis of the variable part of the comb family:
/// for each level `n = N, …, 1`, the operators
/// `I_{2N−1..2n}/√· ⊗ E_i^{(2n−1)} ⊗ F_j^{(2n−2..0)}` with `E` traceless on
/// `H_{2n−1}` and `F` any Hermitian basis element on the lower spaces.
pub fn comb_variable_basis(sig: &CombSignature) -> Vec<Hermitian> {
    let mut out = Vec::with_capacity(variable_basis_len(sig));
    for n in (1..=sig.teeth()).rev() {
        let upper = sig.prod(2 * n..sig.dims().len());
        let lower = sig.prod(0..2 * n - 1);
        let prefix = Hermitian::identity(upper).scale(1.0 / (upper as f64).sqrt());
        let lower_basis = full_hermitian_basis(lower);
        for e in traceless_hermitian_basis(sig.dims()[2 * n - 1]) {
            let pe = prefix.kron(&e);
            for f in &lower_basis {
                out.push(pe.kron(f));
            }
        }
    }
    out
}

/// `Σ_n (d_{2n−1}² − 1) · Π_{k<2n−1} d_k²`
pub fn variable_basis_len(sig: &CombSignature) -> usize {
    (1..=sig.teeth())
        .map(|n| (sig.dims()[2 * n - 1].pow(2) - 1) * sig.prod(0..2 * n - 1).pow(2))
        .sum()
}

/// HS-orthonormal basis of the traceless directions excluded from the comb
/// family: `I_{2N−1..2n−1} ⊗ E_j^{(2n−2)} ⊗ F^{(2n−3..0)}` for each level.
/// These are the coefficients the normalization forces to zero.
pub fn forbidden_directions(sig: &CombSignature) -> Vec<Hermitian> {
    let mut out = Vec::new();
    for n in (1..=sig.teeth()).rev() {
        let upper = sig.prod(2 * n - 1..sig.dims().len());
        let lower = sig.prod(0..2 * n - 2);
        let prefix = Hermitian::identity(upper).scale(1.0 / (upper as f64).sqrt());
        let lower_basis = full_hermitian_basis(lower);
        for e in traceless_hermitian_basis(sig.dims()[2 * n - 2]) {
            let pe = prefix.kron(&e);
            for f in &lower_basis {
                out.push(pe.kron(f));
            }
        }
    }
    out
}

/// Random comb `I/(Π d_odd) + s · Σ c_j G_j` with Gaussian `c_j` on the
/// variable basis. The scale `s` is the largest keeping
/// `λ_min(R) ≥ (1 − spread) · λ_min(central point)`, so `spread = 1` lands on
/// the boundary of the positive cone and `spread = 0` is the central comb.
pub fn random_deterministic_comb(sig: &CombSignature, seed: u64, spread: f64) -> Result<DeterministicComb> {
    let basis = comb_variable_basis(sig);
    random_comb_from_basis(sig, &basis, &mut ChaCha8Rng::seed_from_u64(seed), spread)
}

/// As [`random_deterministic_comb`] with a caller-supplied RNG and a
/// precomputed [`comb_variable_basis`].
pub fn random_comb_from_basis<R: rand::Rng + ?Sized>(
    sig: &CombSignature,
    basis: &[Hermitian],
    rng: &mut R,
    spread: f64,
) -> Result<DeterministicComb> {
    if !(0.0..=1.0).contains(&spread) {
        return Err(Error::Invalid(format!("spread {spread} outside [0, 1]")));
    }
    let central = DeterministicComb::central(sig.clone());
    if spread == 0.0 || basis.is_empty() {
        return Ok(central);
    }
    let coeffs: Vec<f64> = basis.iter().map(|_| StandardNormal.sample(rng)).collect();
    let variable = crate::linalg::combine_operators(basis, &coeffs, sig.total_dim());
    let lambda_c = 1.0 / sig.odd_product() as f64;
    let lambda_v = variable.min_eigenvalue();
    if lambda_v >= 0.0 {
        return Ok(central);
    }
    let s = spread * lambda_c / -lambda_v;
    let operator = central.operator.add_scaled(s, &variable);
    Ok(DeterministicComb { signature: sig.clone(), operator })
}
