use criterion::{black_box, criterion_group, criterion_main, Criterion};

use bellsim_bench::{sampled_joint, setting_circuit};
use bellsim_core::{
    bentkus_pvalue, build_confusion, chsh_max, default_noise_model, sample_counts, zg_score_rule,
    Implementation,
};

fn bench_functionals(c: &mut Criterion) {
    let joint = sampled_joint(4, 4096, 21);

    let mut group = c.benchmark_group("functional");
    group.bench_function("ordering functional d=16", |b| {
        b.iter(|| black_box(&joint).izg())
    });
    group.bench_function("pairwise chsh sweep n=4", |b| {
        b.iter(|| {
            let mut best = 0.0f64;
            for i in 1..=4 {
                for j in 1..=4 {
                    let marginal = black_box(&joint).pairwise_marginal(i, j).unwrap();
                    best = best.max(chsh_max(&marginal));
                }
            }
            best
        })
    });
    group.finish();
}

fn bench_mitigation(c: &mut Criterion) {
    let circuit = setting_circuit(4, Implementation::Unitary, 1, 1);
    let model = default_noise_model();
    let confusion = build_confusion(&circuit, &model).unwrap();
    let counts = sample_counts(&circuit, 8192, 5).unwrap();

    let mut group = c.benchmark_group("mitigation");
    group.bench_function("build confusion 8q", |b| {
        b.iter(|| build_confusion(black_box(&circuit), &model).unwrap())
    });
    group.bench_function("unfold counts 8q", |b| {
        b.iter(|| confusion.mitigate(black_box(&counts)).unwrap())
    });
    group.finish();
}

fn bench_pvalues(c: &mut Criterion) {
    let rule = zg_score_rule(16).unwrap();
    let mean = 2.4;

    let mut group = c.benchmark_group("pvalue");
    for m in [1_u64 << 12, 1 << 16, 1 << 20] {
        group.bench_function(format!("tail bound m=2^{}", m.trailing_zeros()), |b| {
            b.iter(|| bentkus_pvalue(black_box(mean * m as f64), m, &rule).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_functionals, bench_mitigation, bench_pvalues);
criterion_main!(benches);
