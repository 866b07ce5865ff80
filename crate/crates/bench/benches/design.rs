use criterion::{criterion_group, criterion_main, Criterion};
use prefseq_core::{compute_boundaries, crossing_probabilities, inflation_factor, InfoFractions, SpendingFamily};
use std::hint::black_box;

fn boundaries(c: &mut Criterion) {
    for looks in [3, 5] {
        let info = InfoFractions::equally_spaced(looks).unwrap();
        c.bench_function(&format!("boundaries_obf_L{looks}"), |b| {
            b.iter(|| compute_boundaries(SpendingFamily::Obf, black_box(0.05), &info).unwrap())
        });
    }
    let info = InfoFractions::equally_spaced(3).unwrap();
    let bounds = compute_boundaries(SpendingFamily::Pocock, 0.05, &info).unwrap();
    c.bench_function("crossing_probabilities_L3", |b| {
        b.iter(|| crossing_probabilities(&bounds, black_box(3.2)))
    });
}

fn inflation(c: &mut Criterion) {
    let info = InfoFractions::equally_spaced(3).unwrap();
    let mut group = c.benchmark_group("inflation_factor");
    group.sample_size(10);
    group.bench_function("pocock_L3", |b| {
        b.iter(|| inflation_factor(SpendingFamily::Pocock, 0.05, black_box(0.9), &info).unwrap())
    });
    group.finish();
}

criterion_group!(benches, boundaries, inflation);
criterion_main!(benches);
