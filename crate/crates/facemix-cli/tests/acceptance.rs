//! Acceptance suite: one test per release criterion, each printing a
//! `[PASS]` line with its runtime. Run with `--nocapture` to see them:
//!
//! ```text
//! cargo test -p facemix-cli --test acceptance -- --nocapture
//! ```

use std::collections::HashSet;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use facemix::baselines;
use facemix::landmarks::derive_region;
use facemix::loss::{
    cross_entropy, facemixup_loss, facemixup_rs_loss, rs_loss, LabelDistribution, MixWeights,
    ProbabilityVector,
};
use facemix::manifest::LoadedSample;
use facemix::mixer::{
    compose_mixed_face, count_possible_mixes, count_possible_mixes_paper_compat, enumerate_plans,
    GenerateConfig, MixPlan,
};
use facemix::synthfaces::{render_synth_set, SynthConfig};
use facemix::trainer::{
    assemble_batch, batch_loss_and_gradient, finite_difference_gradient, gradient_relative_error,
    train, LinearModel, Method, MixedTrainSample, TrainConfig, TrainData, TrainSample,
};
use facemix::{FaceImage, PixelRect};

fn pass(name: &str, started: Instant, detail: &str) {
    println!("[PASS] {name} ({:.2?}) {detail}", started.elapsed());
}

fn synth_loaded(n_per_class: usize, jitter: f64, size: u32, seed: u64) -> Vec<LoadedSample> {
    render_synth_set(&SynthConfig {
        n_per_class,
        classes: 3,
        jitter,
        size,
        seed,
    })
    .unwrap()
    .into_iter()
    .map(|(image, landmarks, label)| LoadedSample {
        image,
        landmarks,
        label,
    })
    .collect()
}

// ── Criterion 1: combinatorics oracle ──────────────────────────────────────

#[test]
fn criterion_combinatorics_oracle() {
    let started = Instant::now();

    // Independent oracle: enumerate ordered pairs x non-empty subsets.
    fn brute_force(n: u64) -> u128 {
        let mut count = 0u128;
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                for _mask in 1u32..64 {
                    count += 1;
                }
            }
        }
        count
    }
    for n in 0..=12 {
        assert_eq!(count_possible_mixes(n), brute_force(n), "n={n}");
    }

    assert_eq!(count_possible_mixes(1000), 62_937_000);
    assert_eq!(count_possible_mixes_paper_compat(1000), 61_938_000);
    assert!(count_possible_mixes(1000) > 61_000_000);
    assert!(count_possible_mixes_paper_compat(1000) > 61_000_000);

    assert!(started.elapsed() < Duration::from_secs(1), "exceeded 1s");
    pass(
        "combinatorics oracle",
        started,
        "n<=12 brute force exact; count(1000)=62937000, compat 61938000",
    );
}

// ── Criterion 2: pixel-partition property ──────────────────────────────────

#[test]
fn criterion_pixel_partition() {
    let started = Instant::now();
    let samples = synth_loaded(12, 0.3, 96, 41);
    let labels: Vec<usize> = samples.iter().map(|s| s.label).collect();
    let pad = 0.15;
    let mut rng = ChaCha8Rng::seed_from_u64(77);

    for trial in 0..500 {
        // Random cross-class pair and non-empty component subset.
        let (i, j) = loop {
            let i = rng.gen_range(0..samples.len());
            let j = rng.gen_range(0..samples.len());
            if labels[i] != labels[j] {
                break (i, j);
            }
        };
        let mask: u8 = rng.gen_range(1..64);
        let components: Vec<_> = facemix::FacialComponent::ALL
            .iter()
            .enumerate()
            .filter(|(b, _)| mask & (1 << b) != 0)
            .map(|(_, c)| *c)
            .collect();
        let plan = MixPlan::new(
            samples[i].image.id(),
            samples[j].image.id(),
            labels[i],
            labels[j],
            components,
            0,
        )
        .unwrap();

        let out = compose_mixed_face(
            (&samples[i].image, &samples[i].landmarks),
            (&samples[j].image, &samples[j].landmarks),
            &plan,
            pad,
        )
        .unwrap();

        // Reference reconstruction: paste each resampled supplier crop
        // into a copy of the receiver with index arithmetic local to this
        // test, then require bit-identity everywhere.
        let receiver = &samples[j].image;
        let mut expected: Vec<u8> = receiver.pixels().to_vec();
        let width = receiver.width();
        let mut selected: Vec<PixelRect> = Vec::new();
        for &component in &plan.components {
            let s_rect = derive_region(&samples[i].landmarks, component, pad, &samples[i].image)
                .unwrap()
                .rect;
            let r_rect = derive_region(&samples[j].landmarks, component, pad, receiver)
                .unwrap()
                .rect;
            let crop = samples[i].image.crop(s_rect).unwrap();
            let resized = crop
                .resize_bilinear(r_rect.width(), r_rect.height())
                .unwrap();
            for (sy, y) in (r_rect.y0..r_rect.y1).enumerate() {
                for (sx, x) in (r_rect.x0..r_rect.x1).enumerate() {
                    expected[(y * width + x) as usize] = resized.get(sx as u32, sy as u32, 0);
                }
            }
            selected.push(r_rect);
        }
        assert_eq!(out.pixels(), &expected[..], "trial {trial}: composed image diverges");
        for y in 0..receiver.height() {
            for x in 0..width {
                if !selected.iter().any(|r| r.contains(x, y)) {
                    assert_eq!(
                        out.get(x, y, 0),
                        receiver.get(x, y, 0),
                        "trial {trial}: receiver pixel ({x},{y}) changed"
                    );
                }
            }
        }
    }

    assert!(started.elapsed() < Duration::from_secs(30), "exceeded 30s");
    pass(
        "pixel-partition property",
        started,
        "500 random triples bit-exact inside and outside selected regions",
    );
}

// ── Criterion 3: loss identities ───────────────────────────────────────────

#[test]
fn criterion_loss_identities() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5150);
    let mut max_blend_gap = 0.0f64;
    let mut max_rs_gap = 0.0f64;

    for _ in 0..10_000 {
        let k = rng.gen_range(2..=6);
        let dist = |rng: &mut ChaCha8Rng| {
            let raw: Vec<f64> = (0..k).map(|_| rng.gen_range(0.01..1.0)).collect();
            let sum: f64 = raw.iter().sum();
            ProbabilityVector::new(raw.into_iter().map(|v| v / sum).collect()).unwrap()
        };
        let p_mixed = dist(&mut rng);
        let p_sup = dist(&mut rng);
        let p_rec = dist(&mut rng);
        let s_class = rng.gen_range(0..k);
        let r_class = (s_class + rng.gen_range(1..k)) % k;
        let y_s = LabelDistribution::one_hot(s_class, k).unwrap();
        let y_r = LabelDistribution::one_hot(r_class, k).unwrap();
        let gamma = rng.gen_range(1..=6u8);
        let w = rng.gen_range(6.001..50.0);
        let mw = MixWeights::new(gamma, w).unwrap();

        // Weights sum to exactly 1.
        assert_eq!(mw.supplier_weight() + mw.receiver_weight(), 1.0);

        // Label-linearity identity within 1e-10.
        let direct = facemixup_loss(&p_mixed, &y_s, &y_r, mw).unwrap();
        let blended = LabelDistribution::blend(mw.supplier_weight(), &y_s, &y_r).unwrap();
        let via_blend = cross_entropy(&p_mixed, &blended).unwrap();
        max_blend_gap = max_blend_gap.max((direct - via_blend).abs());
        assert!(
            (direct - via_blend).abs() < 1e-10,
            "blend identity violated: {direct} vs {via_blend}"
        );

        // The +RS loss is exactly the sum of its parts within 1e-12.
        let with_rs = facemixup_rs_loss(&p_mixed, &y_s, &y_r, mw, &p_sup, &p_rec).unwrap();
        let parts = direct + rs_loss(&p_sup, &y_s, &p_rec, &y_r).unwrap();
        max_rs_gap = max_rs_gap.max((with_rs - parts).abs());
        assert!(
            (with_rs - parts).abs() < 1e-12,
            "sum identity violated: {with_rs} vs {parts}"
        );
    }

    pass(
        "loss identities",
        started,
        &format!(
            "10^4 instances; max blend gap {max_blend_gap:.2e}, max sum gap {max_rs_gap:.2e}"
        ),
    );
}

// ── Criterion 4: gradient correctness ──────────────────────────────────────

#[test]
fn criterion_gradient_correctness() {
    let started = Instant::now();

    // Small feature grid keeps 20 full finite-difference sweeps per method
    // inside the runtime budget without weakening the check.
    let downsample = (8, 8);
    let d = 64;
    let k = 3;

    let faces = synth_loaded(4, 0.3, 48, 9);
    let train_set: Vec<TrainSample> = faces
        .iter()
        .map(|s| TrainSample {
            image: s.image.clone(),
            label: s.label,
        })
        .collect();
    // Compose a few mixed samples so the mixed-face methods have data.
    let ids: Vec<String> = faces.iter().map(|s| s.image.id().to_string()).collect();
    let labels: Vec<usize> = faces.iter().map(|s| s.label).collect();
    let plans = enumerate_plans(&ids, &labels, &GenerateConfig::new(8, 31)).unwrap();
    let mixed: Vec<MixedTrainSample> = plans
        .iter()
        .map(|p| {
            let sup = &faces[p.supplier_index];
            let rec = &faces[p.receiver_index];
            let image = compose_mixed_face(
                (&sup.image, &sup.landmarks),
                (&rec.image, &rec.landmarks),
                &p.plan,
                0.15,
            )
            .unwrap();
            MixedTrainSample {
                image,
                gamma: p.plan.gamma,
                label_supplier: p.plan.supplier_label,
                label_receiver: p.plan.receiver_label,
                supplier_index: p.supplier_index,
                receiver_index: p.receiver_index,
            }
        })
        .collect();
    let data = TrainData::new(train_set, mixed, k, downsample).unwrap();

    let mut worst = 0.0f64;
    for method in Method::ALL {
        let mut config = TrainConfig::for_method(method);
        config.downsample = downsample;
        let n = facemix::trainer::driving_set_len(method, &data);
        let indices: Vec<usize> = (0..n.min(6)).chain(n.saturating_sub(2)..n).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(1234);
        let items = assemble_batch(&config, &data, &indices, &mut rng).unwrap();

        for point in 0..20u64 {
            let model = LinearModel::random_init(
                k,
                d,
                0.6,
                &mut ChaCha8Rng::seed_from_u64(9000 + point),
            )
            .unwrap();
            let (_, analytic) = batch_loss_and_gradient(&model, &items, 1e-4).unwrap();
            let fd = finite_difference_gradient(&model, &items, 1e-4, 1e-5).unwrap();
            let err = gradient_relative_error(&analytic, &fd);
            worst = worst.max(err);
            assert!(
                err < 1e-4,
                "{method}: relative error {err} at parameter point {point}"
            );
        }
    }

    assert!(started.elapsed() < Duration::from_secs(60), "exceeded 1 min");
    pass(
        "gradient correctness",
        started,
        &format!("8 methods x 20 points; worst relative error {worst:.2e}"),
    );
}

// ── Criterion 5: determinism across runs and thread counts ─────────────────

fn run_cli(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_facemix"))
        .args(args)
        .output()
        .expect("binary runs")
}

/// Byte-level digest of every regular file under a directory, keyed by
/// relative path, excluding run.json (which echoes the thread count).
fn dir_digest(dir: &Path) -> Vec<(String, u64, Vec<u8>)> {
    let mut files: Vec<_> = walk(dir)
        .into_iter()
        .filter(|p| p.file_name().map(|n| n != "run.json").unwrap_or(true))
        .collect();
    files.sort();
    files
        .into_iter()
        .map(|p| {
            let bytes = std::fs::read(&p).unwrap();
            let rel = p.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
            (rel, bytes.len() as u64, bytes)
        })
        .collect()
}

fn walk(dir: &Path) -> Vec<std::path::PathBuf> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.is_dir() {
            out.extend(walk(&path));
        } else {
            out.push(path);
        }
    }
    out
}

#[test]
fn criterion_determinism_across_runs_and_threads() {
    let started = Instant::now();
    let root = tempfile::tempdir().unwrap();

    let mut digests = Vec::new();
    for (run, threads) in [(0, "1"), (1, "1"), (2, "4"), (3, "4")] {
        let base = root.path().join(format!("run{run}"));
        let train_dir = base.join("train");
        let mixed_dir = base.join("mixed");
        let model_dir = base.join("model");
        let t = |p: &Path| p.to_string_lossy().into_owned();

        let out = run_cli(&[
            "synth",
            "--n-per-class", "8",
            "--classes", "3",
            "--jitter", "0.3",
            "--size", "48",
            "--seed", "11",
            "--threads", threads,
            "--out", &t(&train_dir),
        ]);
        assert!(out.status.success(), "synth failed: {out:?}");

        let manifest = train_dir.join("manifest.jsonl");
        let out = run_cli(&[
            "generate",
            "--manifest", &t(&manifest),
            "--count", "60",
            "--seed", "13",
            "--threads", threads,
            "--out", &t(&mixed_dir),
        ]);
        assert!(out.status.success(), "generate failed: {out:?}");

        let out = run_cli(&[
            "train",
            "--train-manifest", &t(&manifest),
            "--test-manifest", &t(&manifest),
            "--mixed-meta", &t(&mixed_dir.join("mixed_meta.jsonl")),
            "--method", "facemixup_rs",
            "--epochs", "3",
            "--seed", "17",
            "--threads", threads,
            "--out", &t(&model_dir),
        ]);
        assert!(out.status.success(), "train failed: {out:?}");

        digests.push(dir_digest(&base));
    }

    let file_count = digests[0].len();
    assert!(file_count > 30, "expected a full artifact tree, got {file_count} files");
    for other in &digests[1..] {
        assert_eq!(&digests[0], other, "artifact bytes differ between runs");
    }

    pass(
        "determinism",
        started,
        &format!("synth+generate+train byte-identical over 2 runs x threads {{1,4}} ({file_count} files)"),
    );
}

// ── Criterion 6: directional toy experiment ────────────────────────────────

#[test]
fn criterion_directional_toy_experiment() {
    let started = Instant::now();

    // Frozen calibration: 3 classes, 600 train / 300 test, jitter 0.42 at
    // 64x64, 1800 mixed faces, lr 5e-3, 30 epochs, seeds 1..=5.
    let train_faces = synth_loaded(200, 0.42, 64, 7);
    let test_faces = synth_loaded(100, 0.42, 64, 8);
    let test_set: Vec<TrainSample> = test_faces
        .iter()
        .map(|s| TrainSample {
            image: s.image.clone(),
            label: s.label,
        })
        .collect();

    let ids: Vec<String> = train_faces.iter().map(|s| s.image.id().to_string()).collect();
    let labels: Vec<usize> = train_faces.iter().map(|s| s.label).collect();
    let plans = enumerate_plans(&ids, &labels, &GenerateConfig::new(1800, 3)).unwrap();
    let images = facemix::mixer::compose_plans(&train_faces, &plans, 0.15).unwrap();
    let mixed: Vec<MixedTrainSample> = plans
        .iter()
        .zip(images)
        .map(|(p, image)| MixedTrainSample {
            image,
            gamma: p.plan.gamma,
            label_supplier: p.plan.supplier_label,
            label_receiver: p.plan.receiver_label,
            supplier_index: p.supplier_index,
            receiver_index: p.receiver_index,
        })
        .collect();
    let train_set: Vec<TrainSample> = train_faces
        .iter()
        .map(|s| TrainSample {
            image: s.image.clone(),
            label: s.label,
        })
        .collect();
    let data = TrainData::new(train_set, mixed, 3, (32, 32)).unwrap();

    let mean_accuracy = |method: Method| -> f64 {
        let accs: Vec<f64> = (1..=5u64)
            .map(|seed| {
                let mut config = TrainConfig::for_method(method);
                config.lr = 5e-3;
                config.epochs = 30;
                config.seed = seed;
                let (_, report) = train(&config, &data, &test_set).unwrap();
                report.accuracy
            })
            .collect();
        accs.iter().sum::<f64>() / accs.len() as f64
    };

    let vanilla = mean_accuracy(Method::Vanilla);
    let facemixup = mean_accuracy(Method::Facemixup);
    let facemixup_rs = mean_accuracy(Method::FacemixupRs);

    println!(
        "toy experiment means over 5 seeds: vanilla={vanilla:.4} facemixup={facemixup:.4} facemixup_rs={facemixup_rs:.4}"
    );
    assert!(
        (0.75..=0.90).contains(&vanilla),
        "vanilla mean {vanilla} outside the calibrated 0.75..0.90 window"
    );
    assert!(
        facemixup_rs >= facemixup,
        "ordering violated: facemixup_rs {facemixup_rs} < facemixup {facemixup}"
    );
    assert!(
        facemixup >= vanilla - 0.01,
        "ordering violated: facemixup {facemixup} < vanilla - 0.01 ({vanilla})"
    );
    assert!(
        facemixup_rs - vanilla >= 0.02,
        "facemixup_rs {facemixup_rs} does not exceed vanilla {vanilla} by 2 points"
    );

    assert!(started.elapsed() < Duration::from_secs(600), "exceeded 10 min");
    pass(
        "directional toy experiment",
        started,
        &format!(
            "facemixup_rs {facemixup_rs:.4} >= facemixup {facemixup:.4} >= vanilla {vanilla:.4} - 0.01; gap {:.4} >= 0.02",
            facemixup_rs - vanilla
        ),
    );
}

// ── Criterion 7: baseline endpoint exactness ───────────────────────────────

#[test]
fn criterion_baseline_endpoint_exactness() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(808);

    let random_image = |rng: &mut ChaCha8Rng, id: &str, w: u32, h: u32| {
        let pixels = (0..w * h).map(|_| rng.gen()).collect();
        FaceImage::new(id, w, h, 1, pixels).unwrap()
    };
    let (w, h) = (37, 29);
    let a = random_image(&mut rng, "a", w, h);
    let b = random_image(&mut rng, "b", w, h);
    let ya = LabelDistribution::one_hot(0, 2).unwrap();
    let yb = LabelDistribution::one_hot(1, 2).unwrap();

    // Mixup endpoints are bit-exact.
    let at1 = baselines::mixup_images(&a, &ya, &b, &yb, 1.0).unwrap();
    assert!(at1.image.same_pixels(&a));
    assert_eq!(at1.label.values(), ya.values());
    let at0 = baselines::mixup_images(&a, &ya, &b, &yb, 0.0).unwrap();
    assert!(at0.image.same_pixels(&b));
    assert_eq!(at0.label.values(), yb.values());

    // CutMix endpoints are bit-exact.
    let empty = baselines::cutmix_images(&a, &ya, &b, &yb, PixelRect::new(5, 5, 5, 5)).unwrap();
    assert!(empty.image.same_pixels(&a));
    assert_eq!(empty.label.values(), ya.values());
    let full = baselines::cutmix_images(&a, &ya, &b, &yb, PixelRect::new(0, 0, w, h)).unwrap();
    assert!(full.image.same_pixels(&b));
    assert_eq!(full.label.values(), yb.values());

    // CutMix label weight equals the exact area fraction on 1000 random
    // rectangles; fractions are ratios of exactly representable integers.
    let mut seen_fracs = HashSet::new();
    for _ in 0..1000 {
        let rect = baselines::random_rect(w, h, &mut rng);
        let out = baselines::cutmix_images(&a, &ya, &b, &yb, rect).unwrap();
        let frac = rect.area() as f64 / f64::from(w * h);
        assert_eq!(out.label.values()[1], frac);
        assert_eq!(out.label.values()[0], 1.0 - frac);
        seen_fracs.insert(rect.area());
    }
    assert!(seen_fracs.len() > 100, "rectangle sampling looks degenerate");

    pass(
        "baseline endpoint exactness",
        started,
        "mixup/cutmix endpoints bit-exact; 1000 random rects match area fractions",
    );
}
