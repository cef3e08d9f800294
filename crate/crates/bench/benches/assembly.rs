use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spectral_lift::clifford::build_clifford;
use spectral_lift::dirac_lift::check_compression_bound;
use spectral_lift::linalg::random;
use spectral_lift::models::quantum_torus::{build_quantum_torus, QuantumTorusSpec};
use spectral_lift_bench::crossed_product;

fn crossed_products(c: &mut Criterion) {
    let mut g = c.benchmark_group("crossed_product");
    for radius in [4, 8, 16] {
        g.bench_with_input(BenchmarkId::new("assemble", radius), &radius, |b, &r| b.iter(|| crossed_product(black_box(r))));
    }
    let t = crossed_product(8);
    g.bench_function("spectrum/8", |b| b.iter(|| t.spectrum().unwrap()));
    g.finish();
}

fn quantum_tori(c: &mut Criterion) {
    let cliff = build_clifford(2, true);
    let mut g = c.benchmark_group("quantum_torus");
    g.sample_size(10);
    for radius in [1, 2] {
        g.bench_with_input(BenchmarkId::new("assemble", radius), &radius, |b, &r| {
            b.iter(|| build_quantum_torus(QuantumTorusSpec::mixed(0.175, black_box(r)), &cliff).unwrap())
        });
    }
    g.finish();
}

fn compression(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let d = random::hermitian(&mut rng, 16);
    let p = random::projection(&mut rng, 16, 7);
    c.bench_function("compression_bound/16", |b| {
        b.iter(|| check_compression_bound(black_box(&d), black_box(&p)).unwrap())
    });
}

criterion_group!(benches, crossed_products, quantum_tori, compression);
criterion_main!(benches);
