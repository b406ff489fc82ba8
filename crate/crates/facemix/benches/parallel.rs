//! Parallel batch APIs against explicit sequential loops.
//!
//! With default features the batch functions fan out over rayon; the
//! sequential baselines below call the per-item functions in a plain loop.
//! Building the bench with `--no-default-features` makes both paths
//! sequential, which is the apples-to-apples fallback comparison.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use facemix::landmarks::FacialComponent;
use facemix::manifest::LoadedSample;
use facemix::mixer::{compose_mixed_face, compose_plans, enumerate_plans, GenerateConfig};
use facemix::synthfaces::{render_face, render_synth_set, ExpressionClass, SchematicFaceSpec, SynthConfig};
use facemix::trainer::featurize;

fn synth_samples(n_per_class: usize, seed: u64) -> Vec<LoadedSample> {
    let config = SynthConfig {
        n_per_class,
        classes: 3,
        jitter: 0.2,
        size: 128,
        seed,
    };
    render_synth_set(&config)
        .unwrap()
        .into_iter()
        .map(|(image, landmarks, label)| LoadedSample {
            image,
            landmarks,
            label,
        })
        .collect()
}

fn bench_compose(c: &mut Criterion) {
    let samples = synth_samples(20, 7);
    let ids: Vec<String> = samples.iter().map(|s| s.image.id().to_string()).collect();
    let labels: Vec<usize> = samples.iter().map(|s| s.label).collect();
    let config = GenerateConfig::new(128, 99);
    let plans = enumerate_plans(&ids, &labels, &config).unwrap();

    let mut group = c.benchmark_group("compose_mixed_faces");
    group.bench_with_input(BenchmarkId::new("batch", plans.len()), &plans, |b, plans| {
        b.iter(|| compose_plans(&samples, plans, config.pad_frac).unwrap())
    });
    group.bench_with_input(
        BenchmarkId::new("sequential", plans.len()),
        &plans,
        |b, plans| {
            b.iter(|| {
                plans
                    .iter()
                    .map(|p| {
                        let sup = &samples[p.supplier_index];
                        let rec = &samples[p.receiver_index];
                        compose_mixed_face(
                            (&sup.image, &sup.landmarks),
                            (&rec.image, &rec.landmarks),
                            &p.plan,
                            config.pad_frac,
                        )
                        .unwrap()
                    })
                    .collect::<Vec<_>>()
            })
        },
    );
    group.finish();
}

fn bench_featurize(c: &mut Criterion) {
    let samples = synth_samples(40, 3);
    let mut group = c.benchmark_group("featurize");
    group.bench_function("batch", |b| {
        b.iter(|| facemix::par::map_indexed(&samples, |_, s| featurize(&s.image, (32, 32))))
    });
    group.bench_function("sequential", |b| {
        b.iter(|| {
            samples
                .iter()
                .map(|s| featurize(&s.image, (32, 32)))
                .collect::<Vec<_>>()
        })
    });
    group.finish();
}

fn bench_render(c: &mut Criterion) {
    let mut group = c.benchmark_group("render_faces");
    group.bench_function("batch", |b| {
        let config = SynthConfig {
            n_per_class: 30,
            classes: 3,
            jitter: 0.2,
            size: 128,
            seed: 1,
        };
        b.iter(|| render_synth_set(&config).unwrap())
    });
    group.bench_function("sequential", |b| {
        b.iter(|| {
            (0..90u64)
                .map(|i| {
                    let spec = SchematicFaceSpec::new(
                        ExpressionClass::ALL[(i % 3) as usize],
                        0.2,
                        128,
                        facemix::synthfaces::derive_seed(1, i),
                    )
                    .unwrap();
                    render_face(&spec)
                })
                .collect::<Vec<_>>()
        })
    });
    group.finish();
}

criterion_group!(benches, bench_compose, bench_featurize, bench_render);
criterion_main!(benches);
