use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use daleq_core::classfile::parse_class;
use daleq_core::equivalence::Checker;
use daleq_core::extractor::{extract_edb, ExtractionConfig};
use daleq_core::rules_library::{Normalizer, NormalizerOptions, SoundnessMode};
use daleq_testkit::fixtures::{corpus, decorate};
use rand::rngs::StdRng;
use rand::SeedableRng;

fn classes(n: usize) -> Vec<Vec<u8>> {
    corpus(&mut StdRng::seed_from_u64(1), n).iter().map(|s| s.build()).collect()
}

fn stages(c: &mut Criterion) {
    let bytes = classes(20);
    let config = ExtractionConfig::default();
    let models: Vec<_> = bytes.iter().map(|b| parse_class(b).unwrap()).collect();
    let edbs: Vec<_> = models.iter().map(|m| extract_edb(m, &config).unwrap()).collect();
    let normalizer = Normalizer::new(&NormalizerOptions::default()).unwrap();

    let mut g = c.benchmark_group("stages");
    g.bench_function("parse", |b| {
        b.iter(|| bytes.iter().map(|x| parse_class(black_box(x)).unwrap().methods.len()).sum::<usize>())
    });
    g.bench_function("extract", |b| {
        b.iter(|| models.iter().map(|m| extract_edb(black_box(m), &config).unwrap().len()).sum::<usize>())
    });
    g.sample_size(20);
    g.bench_function("normalize", |b| {
        b.iter(|| edbs.iter().map(|e| normalizer.normalize(black_box(e)).unwrap().len()).sum::<usize>())
    });
    g.finish();
}

fn check(c: &mut Criterion) {
    let mut rng = StdRng::seed_from_u64(2);
    let pairs: Vec<_> = corpus(&mut rng, 10).iter().map(|s| (s.build(), decorate(s, &mut rng).build())).collect();
    let mut g = c.benchmark_group("check");
    g.sample_size(10);
    g.bench_function("rule build", |b| {
        b.iter(|| Checker::new(SoundnessMode::WithSoundy, ExtractionConfig::default()).unwrap())
    });
    let checker = Checker::new(SoundnessMode::WithSoundy, ExtractionConfig::default()).unwrap();
    g.bench_function("class pair", |b| {
        b.iter_batched(
            || pairs.clone(),
            |ps| ps.iter().filter(|(x, y)| checker.check(x, y).is_equivalent()).count(),
            BatchSize::SmallInput,
        )
    });
    g.finish();
}

criterion_group!(benches, stages, check);
criterion_main!(benches);
