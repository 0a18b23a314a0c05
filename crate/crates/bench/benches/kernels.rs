use criterion::{criterion_group, criterion_main, Criterion};
use exqip::combs::{comb_variable_basis, random_deterministic_comb, CombSignature};
use exqip::gqi::is_extremal;
use exqip::tolerance::Tolerance;
use exqip_bench::{random_hermitian, random_qubit_channel};

fn eig(c: &mut Criterion) {
    let a = random_hermitian(1, 16);
    c.bench_function("hermitian_eig_16", |b| b.iter(|| a.eig()));
}

fn channel_extremality(c: &mut Criterion) {
    let tol = Tolerance::default();
    let g = random_qubit_channel(2, 2);
    c.bench_function("qubit_channel_extremal", |b| b.iter(|| is_extremal(&g, &tol).unwrap()));
}

fn combs(c: &mut Criterion) {
    let sig = CombSignature::new(vec![2, 2, 2, 2]).unwrap();
    c.bench_function("variable_basis_2222", |b| b.iter(|| comb_variable_basis(&sig)));
    c.bench_function("random_comb_2222", |b| b.iter(|| random_deterministic_comb(&sig, 3, 0.5).unwrap()));
}

criterion_group!(benches, eig, channel_extremality, combs);
criterion_main!(benches);
