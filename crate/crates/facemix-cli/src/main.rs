//! `facemix` command line: synthetic data, mixed-face and baseline dataset
//! generation, combinatorics queries, training, evaluation, and a
//! multi-seed method comparison.
//!
//! Every command is deterministic given its flags and seed, and echoes its
//! fully resolved configuration to `run.json` in its output directory.
//! Exit codes: 0 success, 2 usage error, 1 runtime error.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use serde::Serialize;

use facemix::manifest::{self, read_manifest, JsonlWriter};
use facemix::mixer::{self, GammaDist, GenerateConfig};
use facemix::synthfaces::{generate_synth_dataset, SynthConfig};
use facemix::trainer::{
    self, evaluate, load_mixed_set, load_train_set, train, LinearModel, Method, TrainConfig,
    TrainData, TrainSample,
};
use facemix::FaceImage;

#[derive(Parser)]
#[command(
    name = "facemix",
    version,
    about = "Facial-component data augmentation and a linear training harness"
)]
struct Cli {
    /// RNG seed; FACEMIX_SEED is used when the flag is absent.
    #[arg(long, global = true, env = "FACEMIX_SEED")]
    seed: Option<u64>,

    /// Worker threads for generation and evaluation (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    /// off, error, warn, info, debug, or trace.
    #[arg(long, global = true, default_value = "warn")]
    log_level: String,

    #[command(subcommand)]
    command: Command,
}

fn parse_method(s: &str) -> std::result::Result<Method, String> {
    s.parse().map_err(|e| format!("{e}"))
}

/// Offline dataset generators. The composite training methods reuse these
/// outputs: facemixup_rs trains from a facemixup dataset, mixaugment from
/// mixup-style pairs drawn at train time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum GenerateMethod {
    Facemixup,
    Mixup,
    Cutmix,
    Cutout,
    RandomErasing,
}

impl GenerateMethod {
    fn name(self) -> &'static str {
        match self {
            GenerateMethod::Facemixup => "facemixup",
            GenerateMethod::Mixup => "mixup",
            GenerateMethod::Cutmix => "cutmix",
            GenerateMethod::Cutout => "cutout",
            GenerateMethod::RandomErasing => "random_erasing",
        }
    }
}

fn parse_generate_method(s: &str) -> std::result::Result<GenerateMethod, String> {
    match s {
        "facemixup" => Ok(GenerateMethod::Facemixup),
        "mixup" => Ok(GenerateMethod::Mixup),
        "cutmix" => Ok(GenerateMethod::Cutmix),
        "cutout" => Ok(GenerateMethod::Cutout),
        "random_erasing" => Ok(GenerateMethod::RandomErasing),
        other => Err(format!(
            "unknown generation method '{other}' (expected facemixup, mixup, cutmix, cutout, or random_erasing)"
        )),
    }
}

fn parse_downsample(s: &str) -> std::result::Result<(u32, u32), String> {
    let (w, h) = s
        .split_once('x')
        .ok_or_else(|| format!("expected WxH, got '{s}'"))?;
    Ok((
        w.parse().map_err(|e| format!("bad width: {e}"))?,
        h.parse().map_err(|e| format!("bad height: {e}"))?,
    ))
}

fn parse_gamma_weights(s: &str) -> std::result::Result<[f64; 6], String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse().map_err(|e| format!("bad weight: {e}")))
        .collect::<std::result::Result<_, String>>()?;
    let arr: [f64; 6] = parts
        .try_into()
        .map_err(|v: Vec<f64>| format!("expected 6 weights, got {}", v.len()))?;
    Ok(arr)
}

fn parse_range(s: &str) -> std::result::Result<(f64, f64), String> {
    let (lo, hi) = s
        .split_once(',')
        .ok_or_else(|| format!("expected LO,HI, got '{s}'"))?;
    Ok((
        lo.trim().parse().map_err(|e| format!("bad low bound: {e}"))?,
        hi.trim().parse().map_err(|e| format!("bad high bound: {e}"))?,
    ))
}

#[derive(Subcommand)]
enum Command {
    /// Generate a balanced synthetic schematic-face dataset.
    Synth {
        #[arg(long, default_value_t = 200)]
        n_per_class: usize,
        /// Number of expression classes (2 or 3).
        #[arg(long, default_value_t = 3)]
        classes: usize,
        /// Geometric noise scale in [0, 0.5].
        #[arg(long, default_value_t = 0.2)]
        jitter: f64,
        /// Square image side in pixels.
        #[arg(long, default_value_t = 128)]
        size: u32,
        #[arg(long)]
        out: PathBuf,
    },

    /// Generate an augmented dataset from a labeled manifest.
    Generate {
        #[arg(long)]
        manifest: PathBuf,
        /// Number of augmented images to produce.
        #[arg(long)]
        count: usize,
        #[arg(long, default_value = "facemixup", value_parser = parse_generate_method)]
        method: GenerateMethod,
        /// Component bounding-box padding (facemixup only).
        #[arg(long, default_value_t = 0.15)]
        pad_frac: f64,
        /// Six comma-separated gamma weights (facemixup only).
        #[arg(long, value_parser = parse_gamma_weights)]
        gamma_weights: Option<[f64; 6]>,
        /// Cutout square side in pixels (0 = quarter of the short side).
        #[arg(long, default_value_t = 0)]
        cutout_side: u32,
        #[arg(long)]
        out: PathBuf,
    },

    /// Print the exact number of possible mixed faces for a dataset size.
    Count {
        #[arg(long)]
        n: u64,
        /// Additionally print the figure based on the printed factor 62.
        #[arg(long)]
        paper_compat: bool,
        /// Optional directory for run.json.
        #[arg(long)]
        out: Option<PathBuf>,
    },

    /// Train a linear softmax classifier.
    Train {
        #[arg(long)]
        train_manifest: PathBuf,
        #[arg(long)]
        test_manifest: PathBuf,
        /// Mixed-dataset metadata JSONL (required by the mixed-face methods).
        #[arg(long)]
        mixed_meta: Option<PathBuf>,
        /// TrainConfig JSON file; CLI flags override individual fields.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_parser = parse_method)]
        method: Option<Method>,
        #[arg(long)]
        lr: Option<f64>,
        #[arg(long)]
        momentum: Option<f64>,
        #[arg(long)]
        weight_decay: Option<f64>,
        #[arg(long)]
        batch_size: Option<usize>,
        #[arg(long)]
        epochs: Option<usize>,
        /// Weighting factor W in the mixed-face loss.
        #[arg(long)]
        w: Option<f64>,
        /// Permit W in (gamma, 6] instead of requiring W > 6.
        #[arg(long)]
        allow_small_w: bool,
        /// Give the receiver label the gamma-proportional weight.
        #[arg(long)]
        swap_mix_weights: bool,
        /// Six comma-separated gamma weights.
        #[arg(long, value_parser = parse_gamma_weights)]
        gamma_weights: Option<[f64; 6]>,
        /// Beta(alpha, alpha) for mixup's lambda instead of Uniform(0,1).
        #[arg(long)]
        mixup_alpha: Option<f64>,
        /// Random-erasing area range, e.g. 0.02,0.33.
        #[arg(long, value_parser = parse_range)]
        erase_area: Option<(f64, f64)>,
        /// Random-erasing aspect range, e.g. 0.3,3.3.
        #[arg(long, value_parser = parse_range)]
        erase_aspect: Option<(f64, f64)>,
        /// Weight of the real supplier term in the +RS loss.
        #[arg(long)]
        rs_supplier_weight: Option<f64>,
        /// Weight of the real receiver term in the +RS loss.
        #[arg(long)]
        rs_receiver_weight: Option<f64>,
        /// Feature grid, e.g. 32x32.
        #[arg(long, value_parser = parse_downsample)]
        downsample: Option<(u32, u32)>,
        #[arg(long)]
        out: PathBuf,
    },

    /// Evaluate a saved model on a labeled manifest.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },

    /// Train every method over several seeds and summarize accuracies.
    Compare {
        #[arg(long)]
        train_manifest: PathBuf,
        #[arg(long)]
        test_manifest: PathBuf,
        #[arg(long)]
        mixed_meta: PathBuf,
        /// Number of seeds per method (seed, seed+1, ...).
        #[arg(long, default_value_t = 5)]
        seeds: usize,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() {
    let cli = Cli::parse();
    let level = cli
        .log_level
        .parse::<log::LevelFilter>()
        .unwrap_or(log::LevelFilter::Warn);
    env_logger::Builder::new().filter_level(level).init();
    facemix::par::configure_threads(cli.threads);
    if let Err(e) = run(cli) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn write_run_json(out_dir: &Path, config: &impl Serialize) -> Result<()> {
    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("creating {}", out_dir.display()))?;
    let path = out_dir.join("run.json");
    let text = serde_json::to_string_pretty(config)?;
    std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let seed = cli.seed.unwrap_or(0);
    let threads = cli.threads;
    match cli.command {
        Command::Synth {
            n_per_class,
            classes,
            jitter,
            size,
            out,
        } => {
            let config = SynthConfig {
                n_per_class,
                classes,
                jitter,
                size,
                seed,
            };
            write_run_json(
                &out,
                &serde_json::json!({
                    "command": "synth",
                    "seed": seed,
                    "threads": threads,
                    "n_per_class": n_per_class,
                    "classes": classes,
                    "jitter": jitter,
                    "size": size,
                    "out": out,
                }),
            )?;
            let entries = generate_synth_dataset(&config, &out)?;
            println!("{}", out.join("manifest.jsonl").display());
            log::info!("wrote {} images to {}", entries.len(), out.display());
            Ok(())
        }

        Command::Generate {
            manifest,
            count,
            method,
            pad_frac,
            gamma_weights,
            cutout_side,
            out,
        } => {
            write_run_json(
                &out,
                &serde_json::json!({
                    "command": "generate",
                    "seed": seed,
                    "threads": threads,
                    "manifest": manifest,
                    "count": count,
                    "method": method.name(),
                    "pad_frac": pad_frac,
                    "gamma_weights": gamma_weights,
                    "cutout_side": cutout_side,
                    "out": out,
                }),
            )?;
            match method {
                GenerateMethod::Facemixup => {
                    let entries = read_manifest(&manifest)?;
                    let mut config = GenerateConfig::new(count, seed);
                    config.pad_frac = pad_frac;
                    if let Some(weights) = gamma_weights {
                        config.gamma_dist = GammaDist::new(weights)?;
                    }
                    let space = mixer::count_possible_mixes(entries.len() as u64);
                    if (count as u128) > space {
                        log::warn!(
                            "requested {count} mixes but only {space} unique plans exist; \
                             duplicates will be flagged"
                        );
                    }
                    let records = mixer::generate_dataset(&manifest, &entries, &config, &out)?;
                    let repeats = records.iter().filter(|r| r.repeat).count();
                    if repeats > 0 {
                        eprintln!(
                            "warning: plan space exhausted, {repeats} of {} records repeat earlier mixes",
                            records.len()
                        );
                    }
                    println!("{}", out.join("mixed_meta.jsonl").display());
                    Ok(())
                }
                _ => generate_baseline(&manifest, count, method, cutout_side, seed, &out),
            }
        }

        Command::Count { n, paper_compat, out } => {
            if let Some(out) = out {
                write_run_json(
                    &out,
                    &serde_json::json!({
                        "command": "count",
                        "n": n,
                        "paper_compat": paper_compat,
                    }),
                )?;
            }
            println!("{}", mixer::count_possible_mixes(n));
            if paper_compat {
                println!("{}", mixer::count_possible_mixes_paper_compat(n));
            }
            Ok(())
        }

        Command::Train {
            train_manifest,
            test_manifest,
            mixed_meta,
            config,
            method,
            lr,
            momentum,
            weight_decay,
            batch_size,
            epochs,
            w,
            allow_small_w,
            swap_mix_weights,
            gamma_weights,
            mixup_alpha,
            erase_area,
            erase_aspect,
            rs_supplier_weight,
            rs_receiver_weight,
            downsample,
            out,
        } => {
            let mut tc = load_train_config(config.as_deref())?;
            if let Some(m) = method {
                tc.method = m;
            }
            if let Some(v) = lr {
                tc.lr = v;
            }
            if let Some(v) = momentum {
                tc.momentum = v;
            }
            if let Some(v) = weight_decay {
                tc.weight_decay = v;
            }
            if let Some(v) = batch_size {
                tc.batch_size = v;
            }
            if let Some(v) = epochs {
                tc.epochs = v;
            }
            if let Some(v) = w {
                tc.w = v;
            }
            if allow_small_w {
                tc.allow_small_w = true;
            }
            if swap_mix_weights {
                tc.swap_mix_weights = true;
            }
            if let Some(v) = gamma_weights {
                tc.gamma_weights = v;
            }
            if let Some(v) = mixup_alpha {
                tc.mixup_alpha = Some(v);
            }
            if let Some(v) = erase_area {
                tc.erase_area = v;
            }
            if let Some(v) = erase_aspect {
                tc.erase_aspect = v;
            }
            if let Some(v) = rs_supplier_weight {
                tc.rs_supplier_weight = v;
            }
            if let Some(v) = rs_receiver_weight {
                tc.rs_receiver_weight = v;
            }
            if let Some(v) = downsample {
                tc.downsample = v;
            }
            if let Some(s) = cli.seed {
                tc.seed = s;
            }
            write_run_json(
                &out,
                &serde_json::json!({
                    "command": "train",
                    "threads": threads,
                    "train_manifest": train_manifest,
                    "test_manifest": test_manifest,
                    "mixed_meta": mixed_meta,
                    "config": tc,
                    "out": out,
                }),
            )?;

            let (data, test) =
                load_datasets(&train_manifest, &test_manifest, mixed_meta.as_deref(), &tc)?;
            let (model, report) = train(&tc, &data, &test)?;
            model.save(out.join("model.bin"), tc.downsample)?;
            std::fs::write(
                out.join("report.json"),
                serde_json::to_string_pretty(&report)?,
            )?;
            trainer::write_curve_csv(out.join("curve.csv"), &report)?;
            println!(
                "method={} final_accuracy={:.4} best_accuracy={:.4}",
                tc.method, report.accuracy, report.best_accuracy
            );
            Ok(())
        }

        Command::Eval { model, manifest, out } => {
            write_run_json(
                &out,
                &serde_json::json!({
                    "command": "eval",
                    "threads": threads,
                    "model": model,
                    "manifest": manifest,
                    "out": out,
                }),
            )?;
            let (model, downsample) = LinearModel::load(&model)?;
            let test = load_train_set(&manifest)?;
            let report = evaluate(&model, &test, downsample)?;
            std::fs::write(
                out.join("report.json"),
                serde_json::to_string_pretty(&report)?,
            )?;
            println!("accuracy={:.4}", report.accuracy);
            Ok(())
        }

        Command::Compare {
            train_manifest,
            test_manifest,
            mixed_meta,
            seeds,
            config,
            epochs,
            out,
        } => {
            if seeds == 0 {
                bail!("--seeds must be at least 1");
            }
            let mut base = load_train_config(config.as_deref())?;
            if let Some(v) = epochs {
                base.epochs = v;
            }
            write_run_json(
                &out,
                &serde_json::json!({
                    "command": "compare",
                    "threads": threads,
                    "train_manifest": train_manifest,
                    "test_manifest": test_manifest,
                    "mixed_meta": mixed_meta,
                    "seeds": seeds,
                    "base_seed": seed,
                    "config": base,
                    "out": out,
                }),
            )?;
            compare(&train_manifest, &test_manifest, &mixed_meta, seeds, seed, &base, &out)
        }
    }
}

fn load_train_config(path: Option<&Path>) -> Result<TrainConfig> {
    match path {
        None => Ok(TrainConfig::default()),
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            let config: TrainConfig = serde_json::from_str(&text)
                .with_context(|| format!("parsing {}", path.display()))?;
            Ok(config)
        }
    }
}

fn load_datasets(
    train_manifest: &Path,
    test_manifest: &Path,
    mixed_meta: Option<&Path>,
    config: &TrainConfig,
) -> Result<(TrainData, Vec<TrainSample>)> {
    let train_set = load_train_set(train_manifest)?;
    let test_set = load_train_set(test_manifest)?;
    let k = manifest::class_count(
        train_set
            .iter()
            .chain(&test_set)
            .map(|s| s.label),
    );
    if k < 2 {
        bail!("datasets must contain at least two classes");
    }
    let mixed = match (config.method.needs_mixed(), mixed_meta) {
        (true, None) => bail!(
            "method '{}' needs --mixed-meta pointing at a generated mixed dataset",
            config.method
        ),
        (_, None) => Vec::new(),
        (_, Some(path)) => load_mixed_set(path, &train_set)?,
    };
    let data = TrainData::new(train_set, mixed, k, config.downsample)?;
    Ok((data, test_set))
}

// ── Method comparison ──────────────────────────────────────────────────────

#[derive(Serialize)]
struct MethodSummary {
    method: &'static str,
    mean_accuracy: f64,
    std_accuracy: f64,
    mean_best_accuracy: f64,
    accuracies: Vec<f64>,
}

/// Train all eight methods over `seeds` consecutive seeds and write a
/// per-method mean and standard deviation summary.
fn compare(
    train_manifest: &Path,
    test_manifest: &Path,
    mixed_meta: &Path,
    seeds: usize,
    base_seed: u64,
    base_config: &TrainConfig,
    out_dir: &Path,
) -> Result<()> {
    let probe = TrainConfig {
        method: Method::FacemixupRs,
        ..base_config.clone()
    };
    let (data, test) = load_datasets(train_manifest, test_manifest, Some(mixed_meta), &probe)?;

    let mut summaries = Vec::new();
    for method in Method::ALL {
        let mut finals = Vec::with_capacity(seeds);
        let mut bests = Vec::with_capacity(seeds);
        for s in 0..seeds {
            let config = TrainConfig {
                method,
                seed: base_seed + s as u64,
                ..base_config.clone()
            };
            let (_, report) = train(&config, &data, &test)?;
            finals.push(report.accuracy);
            bests.push(report.best_accuracy);
        }
        let mean = finals.iter().sum::<f64>() / finals.len() as f64;
        let var = finals.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / finals.len() as f64;
        let mean_best = bests.iter().sum::<f64>() / bests.len() as f64;
        summaries.push(MethodSummary {
            method: method.name(),
            mean_accuracy: mean,
            std_accuracy: var.sqrt(),
            mean_best_accuracy: mean_best,
            accuracies: finals,
        });
    }

    std::fs::write(
        out_dir.join("compare.json"),
        serde_json::to_string_pretty(&summaries)?,
    )?;
    let mut csv = String::from("method,mean_accuracy,std_accuracy,mean_best_accuracy\n");
    for s in &summaries {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            s.method, s.mean_accuracy, s.std_accuracy, s.mean_best_accuracy
        ));
    }
    std::fs::write(out_dir.join("compare.csv"), csv)?;

    println!("{:<20} {:>10} {:>8} {:>10}", "method", "mean", "std", "best");
    for s in &summaries {
        println!(
            "{:<20} {:>10.4} {:>8.4} {:>10.4}",
            s.method, s.mean_accuracy, s.std_accuracy, s.mean_best_accuracy
        );
    }
    Ok(())
}

// ── Baseline dataset generation ────────────────────────────────────────────

#[derive(Serialize)]
struct BaselineRecord {
    mixed_path: String,
    method: &'static str,
    a: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    b: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    area_frac: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rect: Option<[u32; 4]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    square_side: Option<u32>,
    label_dist: Vec<f64>,
    seed: u64,
}

/// Offline generation for the baseline methods: each record stores the
/// augmented image plus the (soft) label it should be trained with.
fn generate_baseline(
    manifest_path: &Path,
    count: usize,
    method: GenerateMethod,
    cutout_side: u32,
    seed: u64,
    out_dir: &Path,
) -> Result<()> {
    use facemix::baselines;
    use facemix::loss::LabelDistribution;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;

    let entries = read_manifest(manifest_path)?;
    if entries.is_empty() {
        bail!("manifest {} is empty", manifest_path.display());
    }
    let base = manifest_path.parent().unwrap_or_else(|| Path::new("."));
    let images: Vec<FaceImage> = entries
        .iter()
        .map(|e| Ok(FaceImage::load_png(manifest::resolve(base, &e.path))?))
        .collect::<Result<_>>()?;
    let k = manifest::class_count(entries.iter().map(|e| e.label));
    if k < 2 {
        bail!("manifest must contain at least two classes");
    }
    let one_hot = |label: usize| LabelDistribution::one_hot(label, k);

    std::fs::create_dir_all(out_dir)?;
    let mut meta = JsonlWriter::create(out_dir.join("mixed_meta.jsonl"))?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    for idx in 0..count {
        let i = rng.gen_range(0..images.len());
        let file = format!("{}_{idx:06}.png", method.name());
        let record = match method {
            GenerateMethod::Facemixup => unreachable!("handled by the caller"),
            GenerateMethod::Mixup => {
                let j = rng.gen_range(0..images.len());
                let lambda = rng.gen::<f64>();
                let sample = baselines::mixup_images(
                    &images[i],
                    &one_hot(entries[i].label)?,
                    &images[j],
                    &one_hot(entries[j].label)?,
                    lambda,
                )?;
                sample.image.save_png(out_dir.join(&file))?;
                BaselineRecord {
                    mixed_path: file,
                    method: method.name(),
                    a: images[i].id().to_string(),
                    b: Some(images[j].id().to_string()),
                    lambda: Some(lambda),
                    area_frac: None,
                    rect: None,
                    square_side: None,
                    label_dist: sample.label.values().to_vec(),
                    seed,
                }
            }
            GenerateMethod::Cutmix => {
                let j = rng.gen_range(0..images.len());
                let rect = baselines::random_rect(images[i].width(), images[i].height(), &mut rng);
                let sample = baselines::cutmix_images(
                    &images[i],
                    &one_hot(entries[i].label)?,
                    &images[j],
                    &one_hot(entries[j].label)?,
                    rect,
                )?;
                sample.image.save_png(out_dir.join(&file))?;
                let area_frac = rect.area() as f64
                    / (u64::from(images[i].width()) * u64::from(images[i].height())) as f64;
                BaselineRecord {
                    mixed_path: file,
                    method: method.name(),
                    a: images[i].id().to_string(),
                    b: Some(images[j].id().to_string()),
                    lambda: None,
                    area_frac: Some(area_frac),
                    rect: Some([rect.x0, rect.y0, rect.x1, rect.y1]),
                    square_side: None,
                    label_dist: sample.label.values().to_vec(),
                    seed,
                }
            }
            GenerateMethod::Cutout => {
                let side = if cutout_side == 0 {
                    (images[i].width().min(images[i].height()) / 4).max(1)
                } else {
                    cutout_side
                };
                let masked = baselines::cutout_random(&images[i], side, 0, &mut rng)?;
                masked.save_png(out_dir.join(&file))?;
                BaselineRecord {
                    mixed_path: file,
                    method: method.name(),
                    a: images[i].id().to_string(),
                    b: None,
                    lambda: None,
                    area_frac: None,
                    rect: None,
                    square_side: Some(side),
                    label_dist: one_hot(entries[i].label)?.values().to_vec(),
                    seed,
                }
            }
            GenerateMethod::RandomErasing => {
                let erased =
                    baselines::random_erase(&images[i], (0.02, 0.33), (0.3, 3.3), &mut rng)?;
                erased.save_png(out_dir.join(&file))?;
                BaselineRecord {
                    mixed_path: file,
                    method: method.name(),
                    a: images[i].id().to_string(),
                    b: None,
                    lambda: None,
                    area_frac: None,
                    rect: None,
                    square_side: None,
                    label_dist: one_hot(entries[i].label)?.values().to_vec(),
                    seed,
                }
            }
        };
        meta.write(&record)?;
    }
    println!("{}", out_dir.join("mixed_meta.jsonl").display());
    Ok(())
}
