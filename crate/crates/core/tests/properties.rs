use exqip::channels::{
    choi_condition, instrument_extremal, kraus_to_choi, sqrt_instrument, Channel, Instrument,
};
use exqip::combs::{
    cascade_residuals, comb_variable_basis, is_deterministic_comb, random_deterministic_comb, variable_basis_len,
    CombSignature,
};
use exqip::fixtures::{
    extremal_qubit_tester, non_extremal_qubit_tester, random_channel, random_instrument, random_luders,
    random_rescaled_povm_tester,
};
use exqip::gqi::{is_extremal, is_valid_gqi, perturbation_residuals, Gqi};
use exqip::linalg::{
    full_hermitian_basis, kron_all, numerical_rank, partial_trace, support_basis, support_projector,
    vectorize_hermitian, CMatrix, Hermitian,
};
use exqip::random::{ginibre, random_povm, random_unit_vector, random_unitary, rng, ChaCha8Rng};
use exqip::testers::{is_extremal_tester, povm_is_extremal, tester_from_pure_normalization, Povm};
use exqip::{Tolerance, C64};
use proptest::prelude::*;
use rand::Rng;

fn tol() -> Tolerance {
    Tolerance::default()
}

fn random_hermitian(d: usize, r: &mut ChaCha8Rng) -> Hermitian {
    let g = ginibre(d, d, r);
    Hermitian::new((&g + &g.adjoint()).scale_re(0.5)).unwrap()
}

fn random_psd(d: usize, rank: usize, r: &mut ChaCha8Rng) -> Hermitian {
    let g = ginibre(d, rank, r);
    Hermitian::new(g.matmul(&g.adjoint())).unwrap()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn transpose(vectors: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = vectors.first().map_or(0, Vec::len);
    (0..n).map(|i| vectors.iter().map(|v| v[i]).collect()).collect()
}

fn signature_strategy() -> impl Strategy<Value = Vec<usize>> {
    prop_oneof![
        Just(vec![2, 2]),
        Just(vec![2, 3]),
        Just(vec![3, 2]),
        Just(vec![1, 2, 2, 1]),
        Just(vec![2, 2, 2, 2]),
        Just(vec![2, 1, 1, 2]),
    ]
}

/// Homogeneous cascade map: its kernel is the linear span of the comb set.
fn cascade_map(x: &Hermitian, sig: &CombSignature) -> Vec<f64> {
    let dims = sig.dims();
    let mut out = Vec::new();
    let mut cur = x.clone();
    for n in (1..=sig.teeth()).rev() {
        // factors 2n-1 .. 0, leftmost first
        let kd: Vec<usize> = dims[..2 * n].iter().rev().copied().collect();
        let traced = partial_trace(&cur, &kd, &[0]).unwrap();
        let lower = partial_trace(&traced, &kd[1..], &[0]).unwrap().scale(1.0 / kd[1] as f64);
        let rhs = if n == 1 {
            Hermitian::identity(kd[1]).scale(traced.trace_re() / kd[1] as f64)
        } else {
            Hermitian::identity(kd[1]).kron(&lower)
        };
        out.extend(vectorize_hermitian(&traced.sub(&rhs)));
        cur = lower;
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn partial_trace_composes(seed in any::<u64>(), a in 1usize..=3, b in 1usize..=3, c in 1usize..=3) {
        let mut r = rng(seed);
        let x = random_hermitian(a * b * c, &mut r);
        let dims = [a, b, c];
        let stepwise = partial_trace(&partial_trace(&x, &dims, &[1]).unwrap(), &[a, c], &[1]).unwrap();
        let joint = partial_trace(&x, &dims, &[1, 2]).unwrap();
        prop_assert!(stepwise.max_abs_diff(&joint) <= 1e-12);
    }

    #[test]
    fn eig_reconstructs(seed in any::<u64>(), d in 1usize..=16) {
        let mut r = rng(seed);
        let x = random_hermitian(d, &mut r);
        prop_assert!(x.eig().reconstruct().max_abs_diff(x.matrix()) <= 1e-10);
    }

    #[test]
    fn rank_of_orthonormal_family(seed in any::<u64>(), d in 2usize..=4, k in 1usize..=8) {
        let k = k.min(d * d);
        let mut r = rng(seed);
        let u = random_unitary(d, &mut r);
        let family: Vec<Vec<f64>> = full_hermitian_basis(d)
            .iter()
            .take(k)
            .map(|e| vectorize_hermitian(&e.conjugate_by(&u)))
            .collect();
        prop_assert_eq!(numerical_rank(&family, &tol()).unwrap().rank, k);
        let coeffs: Vec<f64> = (0..k).map(|_| r.random_range(-1.0..1.0)).collect();
        let mut aug = family.clone();
        aug.push((0..d * d).map(|i| family.iter().zip(&coeffs).map(|(v, c)| v[i] * c).sum()).collect());
        let rep = numerical_rank(&aug, &tol()).unwrap();
        prop_assert_eq!(rep.rank, k);
        let nv = rep.nullvector.unwrap();
        let residual: f64 = (0..d * d)
            .map(|i| aug.iter().zip(&nv).map(|(v, c)| v[i] * c).sum::<f64>().powi(2))
            .sum::<f64>()
            .sqrt();
        prop_assert!(residual <= rep.threshold);
    }

    #[test]
    fn vectorization_is_isometric(seed in any::<u64>(), d in 1usize..=6) {
        let mut r = rng(seed);
        let a = random_hermitian(d, &mut r);
        let b = random_hermitian(d, &mut r);
        let lhs = dot(&vectorize_hermitian(&a), &vectorize_hermitian(&b));
        prop_assert!((lhs - a.hs_inner(&b)).abs() <= 1e-12 * (1.0 + lhs.abs()));
    }

    #[test]
    fn support_basis_lives_on_support(seed in any::<u64>(), d in 1usize..=5, rank in 1usize..=5) {
        let rank = rank.min(d);
        let mut r = rng(seed);
        let t = random_psd(d, rank, &mut r);
        let basis = support_basis(&t, &tol()).unwrap();
        prop_assert_eq!(basis.len(), rank * rank);
        let q = Hermitian::identity(d).sub(&support_projector(&t, &tol()));
        for e in &basis {
            prop_assert!(e.conjugate_by(q.matrix()).max_abs() <= 1e-12);
        }
    }

    #[test]
    fn variable_basis_is_traceless_orthonormal(dims in signature_strategy()) {
        let sig = CombSignature::new(dims).unwrap();
        let basis = comb_variable_basis(&sig);
        prop_assert_eq!(basis.len(), variable_basis_len(&sig));
        for (i, a) in basis.iter().enumerate() {
            prop_assert!(a.trace_re().abs() <= 1e-12);
            for (j, b) in basis.iter().enumerate().skip(i) {
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((a.hs_inner(b) - want).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn variable_directions_keep_normalization(dims in signature_strategy(), pick in any::<prop::sample::Index>(), eps in -10.0f64..10.0) {
        let sig = CombSignature::new(dims).unwrap();
        let basis = comb_variable_basis(&sig);
        prop_assume!(!basis.is_empty());
        let g = &basis[pick.index(basis.len())];
        let central = Hermitian::identity(sig.total_dim()).scale(1.0 / sig.odd_product() as f64);
        let residuals = cascade_residuals(&central.add_scaled(eps, g), &sig).unwrap();
        prop_assert!(residuals.iter().all(|&x| x <= 1e-12), "{residuals:?}");
    }

    #[test]
    fn random_combs_are_valid(dims in signature_strategy(), seed in any::<u64>(), spread in 0.0f64..=1.0) {
        let sig = CombSignature::new(dims).unwrap();
        let c = random_deterministic_comb(&sig, seed, spread).unwrap();
        let check = is_deterministic_comb(c.operator(), &sig, &tol().with_comb(1e-9)).unwrap();
        prop_assert!(check.accepted);
        prop_assert!(check.min_eigenvalue >= -1e-10);
    }

    #[test]
    fn certificate_soundness(seed in any::<u64>(), kind in 0usize..3) {
        let mut r = rng(seed);
        let g = match kind {
            0 => random_channel(2, 2, 3, &mut r).unwrap().to_gqi(),
            1 => random_instrument(2, 2, &[2, 2], &mut r).unwrap().to_gqi(),
            _ => non_extremal_qubit_tester(&mut r).unwrap().to_gqi(),
        };
        let cert = is_extremal(&g, &tol()).unwrap();
        prop_assert!(!cert.is_extremal());
        let p = cert.perturbation.as_ref().unwrap();
        let res = perturbation_residuals(&g, p, &tol());
        prop_assert!(res.sum <= cert.threshold, "{res:?} vs {}", cert.threshold);
        prop_assert!(res.off_support <= cert.threshold, "{res:?}");
        prop_assert!(res.outside_variable_span <= cert.threshold, "{res:?}");
    }

    #[test]
    fn convex_combinations_stay_valid(seed in any::<u64>(), w in 0.0f64..=1.0, kind in 0usize..3) {
        let mut r = rng(seed);
        let (a, b): (Gqi, Gqi) = match kind {
            0 => (random_instrument(2, 3, &[1, 2], &mut r).unwrap().to_gqi(), random_instrument(2, 3, &[2, 1], &mut r).unwrap().to_gqi()),
            1 => (extremal_qubit_tester(&mut r).unwrap().to_gqi(), non_extremal_qubit_tester(&mut r).unwrap().to_gqi()),
            _ => {
                let sig = CombSignature::new(vec![2, 2, 2, 2]).unwrap();
                let x = random_deterministic_comb(&sig, r.random(), 1.0).unwrap().into_operator();
                let y = random_deterministic_comb(&sig, r.random(), 1.0).unwrap().into_operator();
                (Gqi::new(sig.clone(), vec![x]).unwrap(), Gqi::new(sig, vec![y]).unwrap())
            }
        };
        prop_assume!(a.len() == b.len());
        prop_assert!(is_valid_gqi(&a.mix(w, &b).unwrap(), &tol()).unwrap().accepted);
    }

    #[test]
    fn midpoints_of_extremal_points_are_detected(seed in any::<u64>(), d in 2usize..=3) {
        let mut r = rng(seed);
        let u = random_channel(d, d, 1, &mut r).unwrap().to_gqi();
        let v = random_channel(d, d, 1, &mut r).unwrap().to_gqi();
        prop_assert!(is_extremal(&u, &tol()).unwrap().is_extremal());
        prop_assert!(!is_extremal(&u.mix(0.5, &v).unwrap(), &tol()).unwrap().is_extremal());
        let a = random_luders(d, d, &mut r).unwrap().to_gqi();
        let b = random_luders(d, d, &mut r).unwrap().to_gqi();
        prop_assert!(!is_extremal(&a.mix(0.5, &b).unwrap(), &tol()).unwrap().is_extremal());
    }

    #[test]
    fn verdict_ignores_kraus_basis(seed in any::<u64>(), count in 1usize..=4) {
        let mut r = rng(seed);
        let c = random_channel(2, 2, count, &mut r).unwrap();
        let k = c.kraus(&tol());
        // any unitary mixing of a Kraus set spans the same family
        let v = random_unitary(k.len(), &mut r);
        let mixed: Vec<CMatrix> = (0..k.len())
            .map(|m| k.iter().enumerate().fold(CMatrix::zeros(2, 2), |acc, (n, kn)| &acc + &kn.scale(v[(m, n)])))
            .collect();
        prop_assert!(kraus_to_choi(&mixed).unwrap().max_abs_diff(c.choi()) <= 1e-12);
        let mut family = Vec::new();
        for a in &mixed {
            for b in &mixed {
                let x = a.adjoint().matmul(b);
                let xa = x.adjoint();
                family.push(vectorize_hermitian(&Hermitian::new((&x + &xa).scale_re(0.5)).unwrap()));
                family.push(vectorize_hermitian(&Hermitian::new((&x - &xa).scale(C64::new(0.0, 0.5))).unwrap()));
            }
        }
        // real span of Hermitian and anti-Hermitian parts has dimension = complex rank of {K_m† K_n}
        let rank = numerical_rank(&transpose(&family), &tol()).unwrap().rank;
        let verdict = choi_condition(&c, &tol()).unwrap();
        prop_assert_eq!(rank == mixed.len() * mixed.len(), verdict.extremal);
    }

    #[test]
    fn extremal_tester_gives_extremal_povm(seed in any::<u64>(), m in 2usize..=8, kind in 0usize..2) {
        let mut r = rng(seed);
        let t = if kind == 0 {
            extremal_qubit_tester(&mut r).unwrap()
        } else {
            random_rescaled_povm_tester(m, 4usize.div_ceil(m), &mut r).unwrap()
        };
        if is_extremal_tester(&t, &tol()).unwrap().is_extremal() {
            let povm = Povm::new(t.outcomes().iter().map(|x| x.scale(t.d1() as f64)).collect(), &tol()).unwrap();
            prop_assert!(povm_is_extremal(&povm, &tol()).unwrap().is_extremal());
        }
    }

    #[test]
    fn pure_normalization_matches_povm(seed in any::<u64>(), d in 2usize..=3, m in 2usize..=5, rank in 1usize..=3) {
        let mut r = rng(seed);
        let rank = rank.max(d.div_ceil(m));
        let povm = Povm::new(random_povm(d, m, rank, &mut r), &tol()).unwrap();
        let phi = random_unit_vector(2, &mut r);
        let t = tester_from_pure_normalization(&phi, &povm).unwrap();
        prop_assert_eq!(
            is_extremal_tester(&t, &tol()).unwrap().is_extremal(),
            povm_is_extremal(&povm, &tol()).unwrap().is_extremal()
        );
    }

    #[test]
    fn sqrt_instrument_reduces_to_effect_independence(seed in any::<u64>(), d in 2usize..=3, m in 2usize..=6, rank in 1usize..=3) {
        let mut r = rng(seed);
        let rank = rank.max(d.div_ceil(m));
        let povm = Povm::new(random_povm(d, m, rank, &mut r), &tol()).unwrap();
        let ins = sqrt_instrument(&povm, &tol()).unwrap();
        let effects: Vec<Vec<f64>> = povm.effects().iter().map(vectorize_hermitian).collect();
        let independent = numerical_rank(&effects, &tol()).unwrap().rank == m;
        prop_assert_eq!(instrument_extremal(&ins, &tol()).unwrap().extremal, independent);
    }

    #[test]
    fn orthogonal_projectors_are_independent(seed in any::<u64>(), d in 2usize..=4, parts in 1usize..=4) {
        let parts = parts.min(d);
        let mut r = rng(seed);
        let ins: Instrument = random_luders(d, parts, &mut r).unwrap();
        let projectors: Vec<Vec<f64>> = ins
            .kraus(&tol())
            .iter()
            .map(|k| vectorize_hermitian(&Hermitian::new(k[0].adjoint().matmul(&k[0])).unwrap()))
            .collect();
        prop_assert_eq!(numerical_rank(&projectors, &tol()).unwrap().rank, parts);
    }
}

#[test]
fn affine_dimension_matches_variable_count() {
    for dims in [vec![2, 2], vec![2, 3], vec![3, 2], vec![1, 2, 2, 1], vec![2, 2, 2, 2], vec![1, 2, 1, 2]] {
        let sig = CombSignature::new(dims.clone()).unwrap();
        let d = sig.total_dim();
        let images: Vec<Vec<f64>> = full_hermitian_basis(d).iter().map(|x| cascade_map(x, &sig)).collect();
        let rank = numerical_rank(&transpose(&images), &tol()).unwrap().rank;
        assert_eq!(d * d - rank, 1 + comb_variable_basis(&sig).len(), "{dims:?}");
    }
}

#[test]
fn channel_choi_via_kron_identity() {
    // Σ_k F_k ⊗ F_k^* = |I⟩⟩⟨⟨I| for any orthonormal operator basis
    let id = Channel::from_kraus(&[CMatrix::identity(2)], &tol()).unwrap();
    let paulis = full_hermitian_basis(2);
    let sum = paulis
        .iter()
        .fold(Hermitian::zeros(4), |acc, p| acc.add(&kron_all([p, &Hermitian::new(p.matrix().conj()).unwrap()])));
    assert!(sum.max_abs_diff(id.choi()) <= 1e-12);
}
