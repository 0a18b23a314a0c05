//! Hermitian operator bases and the real vectorization used for rank tests.

use num_complex::Complex64 as C64;

use super::hermitian::{positivity, Hermitian};
use super::matrix::CMatrix;
use crate::error::{Error, Result};
use crate::tolerance::Tolerance;

/// Real vector of length `d²`: diagonal entries, then `√2·Re` of the strict
/// upper triangle (row-major), then `√2·Im` of the same entries. Euclidean
/// inner products equal Hilbert–Schmidt inner products.
pub fn vectorize_hermitian(a: &Hermitian) -> Vec<f64> {
    let d = a.dim();
    let mut out = Vec::with_capacity(d * d);
    out.extend((0..d).map(|i| a[(i, i)].re));
    let upper = || (0..d).flat_map(move |i| (i + 1..d).map(move |j| (i, j)));
    out.extend(upper().map(|(i, j)| std::f64::consts::SQRT_2 * a[(i, j)].re));
    out.extend(upper().map(|(i, j)| std::f64::consts::SQRT_2 * a[(i, j)].im));
    out
}

/// Inverse of [`vectorize_hermitian`].
pub fn unvectorize_hermitian(v: &[f64], d: usize) -> Result<Hermitian> {
    if v.len() != d * d {
        return Err(Error::Shape(format!("vector of length {} is not d² for d = {d}", v.len())));
    }
    let mut m = CMatrix::zeros(d, d);
    for i in 0..d {
        m[(i, i)] = C64::new(v[i], 0.0);
    }
    let pairs = d * (d - 1) / 2;
    let mut k = 0;
    for i in 0..d {
        for j in i + 1..d {
            let z = C64::new(v[d + k], v[d + pairs + k]) / std::f64::consts::SQRT_2;
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
            k += 1;
        }
    }
    Ok(Hermitian::symmetrized(m))
}

/// `Σ c_j B_j`
pub fn combine_operators(basis: &[Hermitian], coeffs: &[f64], dim: usize) -> Hermitian {
    let mut out = CMatrix::zeros(dim, dim);
    for (b, &c) in basis.iter().zip(coeffs) {
        if c == 0.0 {
            continue;
        }
        out = &out + &b.matrix().scale_re(c);
    }
    Hermitian::symmetrized(out)
}

/// HS-orthonormal basis of the Hermitian operators spanned by the given
/// orthonormal vectors: `v_n v_n†`, `(v_n v_m† + v_m v_n†)/√2` and
/// `i(v_n v_m† − v_m v_n†)/√2` for `n < m`.
pub fn span_basis(vectors: &[&[C64]]) -> Vec<Hermitian> {
    let r = vectors.len();
    let mut out = Vec::with_capacity(r * r);
    for n in 0..r {
        out.push(Hermitian::projector(vectors[n]));
        for m in n + 1..r {
            let nm = CMatrix::outer(vectors[n], vectors[m]);
            let mn = nm.adjoint();
            out.push(Hermitian::symmetrized((&nm + &mn).scale_re(std::f64::consts::FRAC_1_SQRT_2)));
            out.push(Hermitian::symmetrized(
                (&nm - &mn).scale(C64::new(0.0, std::f64::consts::FRAC_1_SQRT_2)),
            ));
        }
    }
    out
}

/// Basis of the Hermitian operators supported on `Supp(t)`.
pub fn support_basis(t: &Hermitian, tol: &Tolerance) -> Result<Vec<Hermitian>> {
    let pos = positivity(t, tol);
    if !pos.is_psd() {
        return Err(Error::NotPositive { min_eigenvalue: pos.min_eigenvalue });
    }
    let e = t.eig();
    Ok(span_basis(&e.support(pos.cutoff)))
}

/// Orthonormal eigenvectors spanning `Supp(t)`.
pub fn support_vectors(t: &Hermitian, tol: &Tolerance) -> Vec<Vec<C64>> {
    let pos = positivity(t, tol);
    let e = t.eig();
    e.support(pos.cutoff).into_iter().map(<[C64]>::to_vec).collect()
}

/// Projector onto `Supp(t)`.
pub fn support_projector(t: &Hermitian, tol: &Tolerance) -> Hermitian {
    let d = t.dim();
    let mut p = CMatrix::zeros(d, d);
    for v in support_vectors(t, tol) {
        p = &p + &CMatrix::outer(&v, &v);
    }
    Hermitian::symmetrized(p)
}

/// Generalized Gell-Mann basis of the `d² − 1` traceless Hermitian operators,
/// HS-normalized. Ordering: symmetric family, antisymmetric family, then the
/// diagonal family; index-lexicographic within each.
pub fn traceless_hermitian_basis(d: usize) -> Vec<Hermitian> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(d * d - 1);
    for j in 0..d {
        for k in j + 1..d {
            let mut m = CMatrix::zeros(d, d);
            m[(j, k)] = C64::new(s, 0.0);
            m[(k, j)] = C64::new(s, 0.0);
            out.push(Hermitian::symmetrized(m));
        }
    }
    for j in 0..d {
        for k in j + 1..d {
            let mut m = CMatrix::zeros(d, d);
            m[(j, k)] = C64::new(0.0, -s);
            m[(k, j)] = C64::new(0.0, s);
            out.push(Hermitian::symmetrized(m));
        }
    }
    for l in 1..d {
        let norm = ((l * (l + 1)) as f64).sqrt();
        let mut diag = vec![0.0; d];
        for x in diag.iter_mut().take(l) {
            *x = 1.0 / norm;
        }
        diag[l] = -(l as f64) / norm;
        out.push(Hermitian::diag(&diag));
    }
    out
}

/// `{I/√d} ∪ traceless_hermitian_basis(d)`: an HS-orthonormal basis of all
/// `d × d` Hermitian operators.
pub fn full_hermitian_basis(d: usize) -> Vec<Hermitian> {
    let mut out = vec![Hermitian::identity(d).scale(1.0 / (d as f64).sqrt())];
    out.extend(traceless_hermitian_basis(d));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pauli() -> [Hermitian; 3] {
        let x = Hermitian::new(CMatrix::from_fn(2, 2, |i, j| C64::new((i != j) as u8 as f64, 0.0))).unwrap();
        let y = Hermitian::new(CMatrix::from_fn(2, 2, |i, j| match (i, j) {
            (0, 1) => C64::new(0.0, -1.0),
            (1, 0) => C64::new(0.0, 1.0),
            _ => C64::new(0.0, 0.0),
        }))
        .unwrap();
        let z = Hermitian::diag(&[1.0, -1.0]);
        [x, y, z]
    }

    #[test]
    fn vectorization_examples() {
        assert!(vectorize_hermitian(&Hermitian::zeros(3)).iter().all(|&x| x == 0.0));
        let v = vectorize_hermitian(&Hermitian::identity(2));
        assert!((v.iter().map(|x| x * x).sum::<f64>() - 2.0).abs() < 1e-15);
        let [x, y, _] = pauli();
        let ip: f64 = vectorize_hermitian(&x).iter().zip(vectorize_hermitian(&y)).map(|(a, b)| a * b).sum();
        assert_eq!(ip, 0.0);
    }

    #[test]
    fn unvectorize_inverts() {
        let [x, y, z] = pauli();
        let a = x.add(&y.scale(0.3)).add(&z.scale(-1.2));
        let back = unvectorize_hermitian(&vectorize_hermitian(&a), 2).unwrap();
        assert!(back.max_abs_diff(&a) < 1e-15);
    }

    #[test]
    fn gell_mann_small_dims() {
        assert!(traceless_hermitian_basis(1).is_empty());
        let b2 = traceless_hermitian_basis(2);
        assert_eq!(b2.len(), 3);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        for (b, p) in b2.iter().zip(pauli().iter()) {
            assert!(b.max_abs_diff(&p.scale(s)) < 1e-15);
        }
    }

    #[test]
    fn gell_mann_three_is_orthonormal() {
        let b = traceless_hermitian_basis(3);
        assert_eq!(b.len(), 8);
        for (i, bi) in b.iter().enumerate() {
            assert!(bi.trace_re().abs() < 1e-15);
            for (j, bj) in b.iter().enumerate() {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((bi.hs_inner(bj) - expect).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn support_basis_counts() {
        let tol = Tolerance::default();
        let phi = [C64::new(0.6, 0.0), C64::new(0.0, 0.8)];
        let p = Hermitian::projector(&phi);
        let b = support_basis(&p, &tol).unwrap();
        assert_eq!(b.len(), 1);
        assert!(b[0].max_abs_diff(&p) < 1e-14);
        assert_eq!(support_basis(&Hermitian::identity(2).scale(0.5), &tol).unwrap().len(), 4);
        assert!(support_basis(&Hermitian::zeros(3), &tol).unwrap().is_empty());
    }

    #[test]
    fn support_basis_rejects_negative() {
        let tol = Tolerance::default();
        assert!(matches!(
            support_basis(&Hermitian::diag(&[1.0, -0.5]), &tol),
            Err(Error::NotPositive { .. })
        ));
    }
}
