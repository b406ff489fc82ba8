//! Desk-scale training harness: a linear softmax classifier with
//! hand-derived gradients, SGD with momentum and weight decay, per-method
//! batch assembly, and evaluation.
//!
//! Every training method reduces each batch element to a list of weighted
//! cross-entropy terms `weight * CE(softmax(W x + b), target)`; the
//! analytic gradient of one term with respect to the logits is
//! `weight * (p - target)`. The mixed-face methods draw their elements
//! from a pre-generated mixed dataset; the +RS variant adds the
//! corresponding real supplier and receiver images to each element's loss.
//!
//! Training is single-threaded and deterministic given (config, seed,
//! data). Featurization and evaluation fan out over samples but reduce in
//! index order, so results are independent of thread count.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::baselines;
use crate::error::{Error, Result};
use crate::image::FaceImage;
use crate::loss::{LabelDistribution, MixWeights, ProbabilityVector, LOG_CLAMP_EPS};
use crate::manifest::{read_jsonl, read_manifest, resolve, ManifestEntry};
use crate::mixer::MixedMetaRecord;
use crate::par;

/// Grayscale conversion weights (luma).
const LUMA: [f64; 3] = [0.299, 0.587, 0.114];

const MODEL_MAGIC: &[u8; 8] = b"FMIXMDL1";

// ── Feature extraction ─────────────────────────────────────────────────────

/// Grayscale, area-average downsample to `downsample`, scale to [0, 1],
/// flatten row-major.
pub fn featurize(img: &FaceImage, downsample: (u32, u32)) -> Vec<f64> {
    let (w, h) = (img.width() as usize, img.height() as usize);
    let mut luma = vec![0f64; w * h];
    match img.channels() {
        1 => {
            for (dst, &src) in luma.iter_mut().zip(img.pixels()) {
                *dst = f64::from(src);
            }
        }
        _ => {
            for (i, chunk) in img.pixels().chunks_exact(3).enumerate() {
                luma[i] = LUMA[0] * f64::from(chunk[0])
                    + LUMA[1] * f64::from(chunk[1])
                    + LUMA[2] * f64::from(chunk[2]);
            }
        }
    }

    let (dw, dh) = (downsample.0 as usize, downsample.1 as usize);
    let sx = w as f64 / dw as f64;
    let sy = h as f64 / dh as f64;
    let mut out = Vec::with_capacity(dw * dh);
    for dy in 0..dh {
        let y_start = dy as f64 * sy;
        let y_end = y_start + sy;
        let y0 = y_start.floor() as usize;
        let y1 = (y_end.ceil() as usize).min(h);
        for dx in 0..dw {
            let x_start = dx as f64 * sx;
            let x_end = x_start + sx;
            let x0 = x_start.floor() as usize;
            let x1 = (x_end.ceil() as usize).min(w);
            let mut acc = 0.0;
            for yy in y0..y1 {
                let wy = (yy as f64 + 1.0).min(y_end) - (yy as f64).max(y_start);
                if wy <= 0.0 {
                    continue;
                }
                for xx in x0..x1 {
                    let wx = (xx as f64 + 1.0).min(x_end) - (xx as f64).max(x_start);
                    if wx > 0.0 {
                        acc += wx * wy * luma[yy * w + xx];
                    }
                }
            }
            out.push(acc / (sx * sy) / 255.0);
        }
    }
    out
}

// ── Model ──────────────────────────────────────────────────────────────────

/// Softmax linear classifier: K x D weights plus K biases.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    k: usize,
    d: usize,
    weights: Vec<f64>,
    bias: Vec<f64>,
}

impl LinearModel {
    pub fn zeros(k: usize, d: usize) -> Result<Self> {
        if k < 2 || d == 0 {
            return Err(Error::InvalidConfig(format!(
                "model needs k >= 2 and d >= 1, got k={k}, d={d}"
            )));
        }
        Ok(Self {
            k,
            d,
            weights: vec![0.0; k * d],
            bias: vec![0.0; k],
        })
    }

    /// Uniform init in [-scale, scale], deterministic given the RNG state.
    pub fn random_init<R: Rng>(k: usize, d: usize, scale: f64, rng: &mut R) -> Result<Self> {
        let mut model = Self::zeros(k, d)?;
        for w in &mut model.weights {
            *w = rng.gen_range(-scale..=scale);
        }
        for b in &mut model.bias {
            *b = rng.gen_range(-scale..=scale);
        }
        Ok(model)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn weights_mut(&mut self) -> &mut [f64] {
        &mut self.weights
    }

    pub fn bias_mut(&mut self) -> &mut [f64] {
        &mut self.bias
    }

    pub fn logits(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.d {
            return Err(Error::LengthMismatch {
                a: x.len(),
                b: self.d,
            });
        }
        let mut z = self.bias.clone();
        for (row, zk) in z.iter_mut().enumerate() {
            let w = &self.weights[row * self.d..(row + 1) * self.d];
            let mut acc = 0.0;
            for (wi, xi) in w.iter().zip(x) {
                acc += wi * xi;
            }
            *zk += acc;
        }
        Ok(z)
    }

    /// `softmax(W x + b)`, stabilized by max-subtraction.
    pub fn forward(&self, x: &[f64]) -> Result<ProbabilityVector> {
        let z = self.logits(x)?;
        Ok(softmax(&z))
    }

    /// Write the documented flat binary: magic, JSON header, row-major
    /// f64 weights, then biases, all little-endian.
    pub fn save(&self, path: impl AsRef<Path>, downsample: (u32, u32)) -> Result<()> {
        let path = path.as_ref();
        let header = serde_json::to_vec(&serde_json::json!({
            "k": self.k,
            "d": self.d,
            "down_w": downsample.0,
            "down_h": downsample.1,
        }))?;
        let mut out = Vec::with_capacity(12 + header.len() + 8 * (self.weights.len() + self.k));
        out.extend_from_slice(MODEL_MAGIC);
        out.extend_from_slice(&(header.len() as u32).to_le_bytes());
        out.extend_from_slice(&header);
        for v in self.weights.iter().chain(&self.bias) {
            out.extend_from_slice(&v.to_le_bytes());
        }
        std::fs::write(path, out).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<(Self, (u32, u32))> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        let bad = |reason: &str| Error::ModelFormat {
            path: path.to_path_buf(),
            reason: reason.to_string(),
        };
        if bytes.len() < 12 || &bytes[..8] != MODEL_MAGIC {
            return Err(bad("missing magic"));
        }
        let header_len = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
        let body = 12 + header_len;
        if bytes.len() < body {
            return Err(bad("truncated header"));
        }
        #[derive(Deserialize)]
        struct Header {
            k: usize,
            d: usize,
            down_w: u32,
            down_h: u32,
        }
        let header: Header = serde_json::from_slice(&bytes[12..body])?;
        let expected = body + 8 * (header.k * header.d + header.k);
        if bytes.len() != expected {
            return Err(bad("payload size does not match header dimensions"));
        }
        let mut values = bytes[body..]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()));
        let weights: Vec<f64> = values.by_ref().take(header.k * header.d).collect();
        let bias: Vec<f64> = values.collect();
        let mut model = Self::zeros(header.k, header.d)?;
        model.weights = weights;
        model.bias = bias;
        Ok((model, (header.down_w, header.down_h)))
    }
}

fn softmax(z: &[f64]) -> ProbabilityVector {
    let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exp: Vec<f64> = z.iter().map(|&v| (v - m).exp()).collect();
    let sum: f64 = exp.iter().sum();
    ProbabilityVector::new(exp.into_iter().map(|e| e / sum).collect())
        .expect("softmax output is a valid distribution")
}

// ── Loss terms and gradients ───────────────────────────────────────────────

/// One weighted cross-entropy term against a soft target.
#[derive(Debug, Clone)]
pub struct LossTerm {
    pub features: Vec<f64>,
    pub target: LabelDistribution,
    pub weight: f64,
}

/// One batch element: the sum of its terms enters the batch mean.
#[derive(Debug, Clone)]
pub struct BatchItem {
    pub terms: Vec<LossTerm>,
}

/// Parameter gradient, same layout as the model.
#[derive(Debug, Clone)]
pub struct Gradient {
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

/// Mean per-item loss plus an L2 penalty `wd/2 * ||theta||^2`.
pub fn batch_loss(model: &LinearModel, items: &[BatchItem], weight_decay: f64) -> Result<f64> {
    if items.is_empty() {
        return Err(Error::EmptyDataset("batch has no items".into()));
    }
    let mut data = 0.0;
    for item in items {
        for term in &item.terms {
            let p = model.forward(&term.features)?;
            let ce = crate::loss::cross_entropy(&p, &term.target)?;
            data += term.weight * ce;
        }
    }
    data /= items.len() as f64;
    let reg: f64 = model.weights.iter().chain(&model.bias).map(|v| v * v).sum();
    Ok(data + 0.5 * weight_decay * reg)
}

/// Loss and its analytic gradient in one pass.
///
/// Per term, the gradient with respect to the logits is
/// `weight * (p - target)`; the weight-decay term contributes
/// `wd * theta`. Valid away from the log clamp (`p_k > eps`), which holds
/// everywhere the harness operates.
pub fn batch_loss_and_gradient(
    model: &LinearModel,
    items: &[BatchItem],
    weight_decay: f64,
) -> Result<(f64, Gradient)> {
    if items.is_empty() {
        return Err(Error::EmptyDataset("batch has no items".into()));
    }
    let (k, d) = (model.k, model.d);
    let inv_b = 1.0 / items.len() as f64;
    let mut loss = 0.0;
    let mut gw = vec![0.0; k * d];
    let mut gb = vec![0.0; k];
    for item in items {
        for term in &item.terms {
            if term.features.len() != d {
                return Err(Error::LengthMismatch {
                    a: term.features.len(),
                    b: d,
                });
            }
            let p = model.forward(&term.features)?;
            loss += term.weight * crate::loss::cross_entropy(&p, &term.target)?;
            for (row, (&pk, &tk)) in p.values().iter().zip(term.target.values()).enumerate() {
                let delta = term.weight * inv_b * (pk - tk);
                gb[row] += delta;
                let w_row = &mut gw[row * d..(row + 1) * d];
                for (g, &x) in w_row.iter_mut().zip(&term.features) {
                    *g += delta * x;
                }
            }
        }
    }
    loss *= inv_b;
    let mut reg = 0.0;
    for (g, &w) in gw.iter_mut().zip(&model.weights) {
        *g += weight_decay * w;
        reg += w * w;
    }
    for (g, &b) in gb.iter_mut().zip(&model.bias) {
        *g += weight_decay * b;
        reg += b * b;
    }
    loss += 0.5 * weight_decay * reg;
    Ok((loss, Gradient { weights: gw, bias: gb }))
}

// ── Methods and configuration ──────────────────────────────────────────────

/// The eight training methods under comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Vanilla,
    VanillaMixedfaces,
    Mixup,
    Cutmix,
    Mixaugment,
    RandomErasing,
    Facemixup,
    FacemixupRs,
}

impl Method {
    pub const ALL: [Method; 8] = [
        Method::Vanilla,
        Method::VanillaMixedfaces,
        Method::Mixup,
        Method::Cutmix,
        Method::Mixaugment,
        Method::RandomErasing,
        Method::Facemixup,
        Method::FacemixupRs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Vanilla => "vanilla",
            Method::VanillaMixedfaces => "vanilla_mixedfaces",
            Method::Mixup => "mixup",
            Method::Cutmix => "cutmix",
            Method::Mixaugment => "mixaugment",
            Method::RandomErasing => "random_erasing",
            Method::Facemixup => "facemixup",
            Method::FacemixupRs => "facemixup_rs",
        }
    }

    /// Whether the method draws from a pre-generated mixed dataset.
    pub fn needs_mixed(self) -> bool {
        matches!(
            self,
            Method::VanillaMixedfaces | Method::Facemixup | Method::FacemixupRs
        )
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown method '{s}'")))
    }
}

/// Flat training configuration; every field has a sensible default and is
/// overridable from the CLI.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub method: Method,
    pub lr: f64,
    pub momentum: f64,
    pub weight_decay: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    /// Weighting factor W in the mixed-face loss.
    pub w: f64,
    /// Permit W in (gamma, 6] per sample instead of requiring W > 6.
    pub allow_small_w: bool,
    /// Swap which side receives the gamma-proportional weight.
    pub swap_mix_weights: bool,
    pub gamma_weights: [f64; 6],
    pub downsample: (u32, u32),
    /// None: lambda ~ Uniform(0,1). Some(alpha): lambda ~ Beta(alpha, alpha).
    pub mixup_alpha: Option<f64>,
    pub erase_area: (f64, f64),
    pub erase_aspect: (f64, f64),
    pub rs_supplier_weight: f64,
    pub rs_receiver_weight: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            method: Method::Vanilla,
            lr: 1e-2,
            momentum: 0.9,
            weight_decay: 1e-4,
            batch_size: 64,
            epochs: 50,
            seed: 0,
            w: 7.9,
            allow_small_w: false,
            swap_mix_weights: false,
            gamma_weights: [1.0 / 6.0; 6],
            downsample: (32, 32),
            mixup_alpha: None,
            erase_area: (0.02, 0.33),
            erase_aspect: (0.3, 3.3),
            rs_supplier_weight: 1.0,
            rs_receiver_weight: 1.0,
        }
    }
}

impl TrainConfig {
    pub fn for_method(method: Method) -> Self {
        Self {
            method,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lr.is_finite() && self.lr > 0.0) {
            return Err(Error::InvalidConfig(format!("lr must be positive, got {}", self.lr)));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::InvalidConfig(format!(
                "momentum must lie in [0, 1), got {}",
                self.momentum
            )));
        }
        if !(self.weight_decay.is_finite() && self.weight_decay >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "weight_decay must be non-negative, got {}",
                self.weight_decay
            )));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidConfig("batch_size must be positive".into()));
        }
        if self.downsample.0 == 0 || self.downsample.1 == 0 {
            return Err(Error::InvalidConfig("downsample dimensions must be positive".into()));
        }
        if let Some(alpha) = self.mixup_alpha {
            if !(alpha.is_finite() && alpha > 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "mixup_alpha must be positive, got {alpha}"
                )));
            }
        }
        crate::mixer::GammaDist::new(self.gamma_weights).map(|_| ())
    }

    fn mix_weights(&self, gamma: u8) -> Result<MixWeights> {
        if self.allow_small_w {
            MixWeights::relaxed(gamma, self.w)
        } else {
            MixWeights::new(gamma, self.w)
        }
    }
}

// ── Datasets ───────────────────────────────────────────────────────────────

/// A real labeled image.
#[derive(Debug, Clone)]
pub struct TrainSample {
    pub image: FaceImage,
    pub label: usize,
}

/// A pre-generated mixed image with its mix metadata and links back to the
/// real training set.
#[derive(Debug, Clone)]
pub struct MixedTrainSample {
    pub image: FaceImage,
    pub gamma: u8,
    pub label_supplier: usize,
    pub label_receiver: usize,
    pub supplier_index: usize,
    pub receiver_index: usize,
}

/// Training inputs with cached features.
pub struct TrainData {
    k: usize,
    downsample: (u32, u32),
    train: Vec<TrainSample>,
    mixed: Vec<MixedTrainSample>,
    train_features: Vec<Vec<f64>>,
    mixed_features: Vec<Vec<f64>>,
}

impl TrainData {
    pub fn new(
        train: Vec<TrainSample>,
        mixed: Vec<MixedTrainSample>,
        k: usize,
        downsample: (u32, u32),
    ) -> Result<Self> {
        if train.is_empty() {
            return Err(Error::EmptyDataset("training set is empty".into()));
        }
        if k < 2 {
            return Err(Error::InvalidConfig(format!("k must be at least 2, got {k}")));
        }
        for s in &train {
            if s.label >= k {
                return Err(Error::InvalidConfig(format!(
                    "label {} out of range for {k} classes",
                    s.label
                )));
            }
        }
        for m in &mixed {
            if m.label_supplier >= k || m.label_receiver >= k {
                return Err(Error::InvalidConfig("mixed sample label out of range".into()));
            }
            if m.supplier_index >= train.len() || m.receiver_index >= train.len() {
                return Err(Error::InvalidConfig(
                    "mixed sample points outside the training set".into(),
                ));
            }
        }
        let train_features = par::map_indexed(&train, |_, s| featurize(&s.image, downsample));
        let mixed_features = par::map_indexed(&mixed, |_, m| featurize(&m.image, downsample));
        Ok(Self {
            k,
            downsample,
            train,
            mixed,
            train_features,
            mixed_features,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn train(&self) -> &[TrainSample] {
        &self.train
    }

    pub fn mixed(&self) -> &[MixedTrainSample] {
        &self.mixed
    }

    pub fn downsample(&self) -> (u32, u32) {
        self.downsample
    }
}

/// Load manifest entries as labeled images (landmarks are not needed for
/// training).
pub fn load_train_set(manifest_path: impl AsRef<Path>) -> Result<Vec<TrainSample>> {
    let manifest_path = manifest_path.as_ref();
    let entries: Vec<ManifestEntry> = read_manifest(manifest_path)?;
    let base = manifest_path.parent().unwrap_or_else(|| Path::new(".")).to_path_buf();
    par::try_map_indexed(&entries, |_, entry| {
        let image = FaceImage::load_png(resolve(&base, &entry.path))?;
        Ok(TrainSample {
            image,
            label: entry.label,
        })
    })
}

/// Load a mixed-dataset metadata file and join supplier/receiver ids back
/// to the real training set.
pub fn load_mixed_set(
    meta_path: impl AsRef<Path>,
    train: &[TrainSample],
) -> Result<Vec<MixedTrainSample>> {
    let meta_path = meta_path.as_ref();
    let records: Vec<MixedMetaRecord> = read_jsonl(meta_path)?;
    let base = meta_path.parent().unwrap_or_else(|| Path::new(".")).to_path_buf();
    let mut by_id = std::collections::HashMap::new();
    for (i, sample) in train.iter().enumerate() {
        if by_id.insert(sample.image.id().to_string(), i).is_some() {
            return Err(Error::InvalidConfig(format!(
                "duplicate training image id '{}'",
                sample.image.id()
            )));
        }
    }
    let lookup = |id: &str| -> Result<usize> {
        by_id.get(id).copied().ok_or_else(|| {
            Error::InvalidConfig(format!("mixed metadata references unknown image id '{id}'"))
        })
    };
    let indices: Vec<(usize, usize)> = records
        .iter()
        .map(|r| Ok((lookup(&r.supplier)?, lookup(&r.receiver)?)))
        .collect::<Result<_>>()?;
    par::try_map_indexed(&records, |i, record| {
        let image = FaceImage::load_png(resolve(&base, &record.mixed_path))?;
        Ok(MixedTrainSample {
            image,
            gamma: record.gamma,
            label_supplier: record.label_supplier,
            label_receiver: record.label_receiver,
            supplier_index: indices[i].0,
            receiver_index: indices[i].1,
        })
    })
}

// ── Batch assembly ─────────────────────────────────────────────────────────

/// Size of the set an epoch iterates over for `method`.
///
/// The mixed-face methods train on the real set and the mixed set
/// together (the mixed images join the original training set); they
/// differ from `vanilla_mixedfaces` only in the loss applied to the mixed
/// elements.
pub fn driving_set_len(method: Method, data: &TrainData) -> usize {
    match method {
        Method::Vanilla
        | Method::Mixup
        | Method::Cutmix
        | Method::Mixaugment
        | Method::RandomErasing => data.train.len(),
        Method::VanillaMixedfaces | Method::Facemixup | Method::FacemixupRs => {
            data.train.len() + data.mixed.len()
        }
    }
}

fn sample_lambda<R: Rng>(config: &TrainConfig, rng: &mut R) -> f64 {
    match config.mixup_alpha {
        None => rng.gen::<f64>(),
        Some(alpha) => {
            let beta = rand_distr::Beta::new(alpha, alpha)
                .expect("alpha validated as positive");
            rng.sample(beta)
        }
    }
}

/// Assemble loss terms for the given driving-set indices.
///
/// All randomness (partners, lambdas, rectangles) is drawn sequentially
/// from `rng`, keeping training deterministic.
pub fn assemble_batch<R: Rng>(
    config: &TrainConfig,
    data: &TrainData,
    indices: &[usize],
    rng: &mut R,
) -> Result<Vec<BatchItem>> {
    let k = data.k;
    let one_hot = |label: usize| LabelDistribution::one_hot(label, k);
    let mut items = Vec::with_capacity(indices.len());
    for &i in indices {
        let terms = match config.method {
            Method::Vanilla => vec![LossTerm {
                features: data.train_features[i].clone(),
                target: one_hot(data.train[i].label)?,
                weight: 1.0,
            }],
            Method::VanillaMixedfaces => {
                // Mixed images join the training set under the receiver's
                // hard label.
                if i < data.train.len() {
                    vec![LossTerm {
                        features: data.train_features[i].clone(),
                        target: one_hot(data.train[i].label)?,
                        weight: 1.0,
                    }]
                } else {
                    let m = i - data.train.len();
                    vec![LossTerm {
                        features: data.mixed_features[m].clone(),
                        target: one_hot(data.mixed[m].label_receiver)?,
                        weight: 1.0,
                    }]
                }
            }
            Method::Mixup | Method::Mixaugment => {
                let j = rng.gen_range(0..data.train.len());
                let lambda = sample_lambda(config, rng);
                let (a, b) = (&data.train[i], &data.train[j]);
                let mixed = baselines::mixup_images(
                    &a.image,
                    &one_hot(a.label)?,
                    &b.image,
                    &one_hot(b.label)?,
                    lambda,
                )?;
                let mut terms = vec![LossTerm {
                    features: featurize(&mixed.image, data.downsample),
                    target: mixed.label,
                    weight: 1.0,
                }];
                if config.method == Method::Mixaugment {
                    terms.push(LossTerm {
                        features: data.train_features[i].clone(),
                        target: one_hot(a.label)?,
                        weight: 1.0,
                    });
                    terms.push(LossTerm {
                        features: data.train_features[j].clone(),
                        target: one_hot(b.label)?,
                        weight: 1.0,
                    });
                }
                terms
            }
            Method::Cutmix => {
                let j = rng.gen_range(0..data.train.len());
                let (a, b) = (&data.train[i], &data.train[j]);
                let mixed = baselines::cutmix_images_random(
                    &a.image,
                    &one_hot(a.label)?,
                    &b.image,
                    &one_hot(b.label)?,
                    rng,
                )?;
                vec![LossTerm {
                    features: featurize(&mixed.image, data.downsample),
                    target: mixed.label,
                    weight: 1.0,
                }]
            }
            Method::RandomErasing => {
                let erased = baselines::random_erase(
                    &data.train[i].image,
                    config.erase_area,
                    config.erase_aspect,
                    rng,
                )?;
                vec![LossTerm {
                    features: featurize(&erased, data.downsample),
                    target: one_hot(data.train[i].label)?,
                    weight: 1.0,
                }]
            }
            Method::Facemixup | Method::FacemixupRs => {
                // Real training images keep their plain hard-label loss;
                // mixed images get the two-class weighted loss (plus the
                // real supplier/receiver pair under +RS).
                if i < data.train.len() {
                    vec![LossTerm {
                        features: data.train_features[i].clone(),
                        target: one_hot(data.train[i].label)?,
                        weight: 1.0,
                    }]
                } else {
                    let idx = i - data.train.len();
                    let m = &data.mixed[idx];
                    let mw = config.mix_weights(m.gamma)?;
                    let (mut sup_w, mut rec_w) = (mw.supplier_weight(), mw.receiver_weight());
                    if config.swap_mix_weights {
                        std::mem::swap(&mut sup_w, &mut rec_w);
                    }
                    let mut terms = vec![
                        LossTerm {
                            features: data.mixed_features[idx].clone(),
                            target: one_hot(m.label_supplier)?,
                            weight: sup_w,
                        },
                        LossTerm {
                            features: data.mixed_features[idx].clone(),
                            target: one_hot(m.label_receiver)?,
                            weight: rec_w,
                        },
                    ];
                    if config.method == Method::FacemixupRs {
                        terms.push(LossTerm {
                            features: data.train_features[m.supplier_index].clone(),
                            target: one_hot(m.label_supplier)?,
                            weight: config.rs_supplier_weight,
                        });
                        terms.push(LossTerm {
                            features: data.train_features[m.receiver_index].clone(),
                            target: one_hot(m.label_receiver)?,
                            weight: config.rs_receiver_weight,
                        });
                    }
                    terms
                }
            }
        };
        items.push(BatchItem { terms });
    }
    Ok(items)
}

// ── Training and evaluation ────────────────────────────────────────────────

/// Accuracy, per-class accuracy, confusion matrix, and learning curves.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalReport {
    pub accuracy: f64,
    pub per_class_accuracy: Vec<f64>,
    /// Rows are true classes, columns predicted classes.
    pub confusion: Vec<Vec<u64>>,
    /// Mean training loss per epoch (empty for standalone evaluation).
    pub loss_curve: Vec<f64>,
    /// Test accuracy per epoch (empty for standalone evaluation).
    pub accuracy_curve: Vec<f64>,
    /// Highest test accuracy along the curve (equals `accuracy` when no
    /// curve was recorded).
    pub best_accuracy: f64,
    pub best_epoch: Option<usize>,
}

fn predictions(model: &LinearModel, features: &[Vec<f64>]) -> Result<Vec<usize>> {
    par::try_map_indexed(features, |_, x| Ok(model.forward(x)?.argmax()))
}

fn report_from_predictions(k: usize, labels: &[usize], predicted: &[usize]) -> EvalReport {
    let mut confusion = vec![vec![0u64; k]; k];
    for (&t, &p) in labels.iter().zip(predicted) {
        confusion[t][p] += 1;
    }
    let total: u64 = confusion.iter().flatten().sum();
    let trace: u64 = (0..k).map(|i| confusion[i][i]).sum();
    let accuracy = trace as f64 / total as f64;
    let per_class_accuracy = confusion
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let row_total: u64 = row.iter().sum();
            if row_total == 0 {
                0.0
            } else {
                row[i] as f64 / row_total as f64
            }
        })
        .collect();
    EvalReport {
        accuracy,
        per_class_accuracy,
        confusion,
        loss_curve: Vec::new(),
        accuracy_curve: Vec::new(),
        best_accuracy: accuracy,
        best_epoch: None,
    }
}

/// Argmax-prediction evaluation; ties break toward the lowest class index.
pub fn evaluate(
    model: &LinearModel,
    test: &[TrainSample],
    downsample: (u32, u32),
) -> Result<EvalReport> {
    if test.is_empty() {
        return Err(Error::EmptyDataset("test set is empty".into()));
    }
    let features = par::map_indexed(test, |_, s| featurize(&s.image, downsample));
    let predicted = predictions(model, &features)?;
    let labels: Vec<usize> = test.iter().map(|s| s.label).collect();
    let k = model.k().max(labels.iter().max().map_or(0, |m| m + 1));
    Ok(report_from_predictions(k, &labels, &predicted))
}

/// Run SGD with momentum for `config.epochs` passes over the method's
/// driving set, recording a per-epoch learning curve against `test`.
pub fn train(
    config: &TrainConfig,
    data: &TrainData,
    test: &[TrainSample],
) -> Result<(LinearModel, EvalReport)> {
    config.validate()?;
    if test.is_empty() {
        return Err(Error::EmptyDataset("test set is empty".into()));
    }
    if config.method.needs_mixed() && data.mixed.is_empty() {
        return Err(Error::InvalidConfig(format!(
            "method '{}' requires a mixed dataset",
            config.method
        )));
    }
    let d = data.downsample.0 as usize * data.downsample.1 as usize;
    let k = data.k;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut model = LinearModel::random_init(k, d, 0.01, &mut rng)?;
    let mut vel_w = vec![0.0; k * d];
    let mut vel_b = vec![0.0; k];

    let test_features = par::map_indexed(test, |_, s| featurize(&s.image, data.downsample));
    let test_labels: Vec<usize> = test.iter().map(|s| s.label).collect();

    let n = driving_set_len(config.method, data);
    let mut loss_curve = Vec::with_capacity(config.epochs);
    let mut accuracy_curve = Vec::with_capacity(config.epochs);

    for _epoch in 0..config.epochs {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        let mut batches = 0usize;
        for chunk in order.chunks(config.batch_size) {
            let items = assemble_batch(config, data, chunk, &mut rng)?;
            let (loss, grad) = batch_loss_and_gradient(&model, &items, config.weight_decay)?;
            for ((w, v), g) in model.weights_mut().iter_mut().zip(&mut vel_w).zip(&grad.weights) {
                *v = config.momentum * *v + g;
                *w -= config.lr * *v;
            }
            for ((b, v), g) in model.bias_mut().iter_mut().zip(&mut vel_b).zip(&grad.bias) {
                *v = config.momentum * *v + g;
                *b -= config.lr * *v;
            }
            epoch_loss += loss;
            batches += 1;
        }
        loss_curve.push(epoch_loss / batches as f64);
        let predicted = predictions(&model, &test_features)?;
        let correct = predicted
            .iter()
            .zip(&test_labels)
            .filter(|(p, t)| p == t)
            .count();
        accuracy_curve.push(correct as f64 / test.len() as f64);
    }

    let predicted = predictions(&model, &test_features)?;
    let mut report = report_from_predictions(k, &test_labels, &predicted);
    let (best_epoch, best_accuracy) = accuracy_curve
        .iter()
        .enumerate()
        .fold((None, report.accuracy), |(be, ba), (e, &a)| {
            if a > ba {
                (Some(e), a)
            } else {
                (be, ba)
            }
        });
    report.loss_curve = loss_curve;
    report.accuracy_curve = accuracy_curve;
    report.best_accuracy = best_accuracy;
    report.best_epoch = best_epoch;
    Ok((model, report))
}

/// Write the learning curve as `epoch,accuracy,loss` CSV (1-based epochs).
pub fn write_curve_csv(path: impl AsRef<Path>, report: &EvalReport) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::from("epoch,accuracy,loss\n");
    for (i, (acc, loss)) in report
        .accuracy_curve
        .iter()
        .zip(&report.loss_curve)
        .enumerate()
    {
        out.push_str(&format!("{},{acc},{loss}\n", i + 1));
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

// ── Finite-difference oracle (test support) ────────────────────────────────

/// Central-difference gradient of `batch_loss` over every parameter.
///
/// Test oracle: independent of the analytic path in
/// [`batch_loss_and_gradient`].
pub fn finite_difference_gradient(
    model: &LinearModel,
    items: &[BatchItem],
    weight_decay: f64,
    step: f64,
) -> Result<Gradient> {
    let mut probe = model.clone();
    let mut grad = Gradient {
        weights: vec![0.0; model.weights.len()],
        bias: vec![0.0; model.bias.len()],
    };
    for i in 0..model.weights.len() {
        let original = model.weights[i];
        probe.weights[i] = original + step;
        let up = batch_loss(&probe, items, weight_decay)?;
        probe.weights[i] = original - step;
        let down = batch_loss(&probe, items, weight_decay)?;
        probe.weights[i] = original;
        grad.weights[i] = (up - down) / (2.0 * step);
    }
    for i in 0..model.bias.len() {
        let original = model.bias[i];
        probe.bias[i] = original + step;
        let up = batch_loss(&probe, items, weight_decay)?;
        probe.bias[i] = original - step;
        let down = batch_loss(&probe, items, weight_decay)?;
        probe.bias[i] = original;
        grad.bias[i] = (up - down) / (2.0 * step);
    }
    Ok(grad)
}

/// Relative L2 distance between two gradients.
pub fn gradient_relative_error(a: &Gradient, b: &Gradient) -> f64 {
    let mut diff = 0.0;
    let mut na = 0.0;
    let mut nb = 0.0;
    for (x, y) in a.weights.iter().zip(&b.weights).chain(a.bias.iter().zip(&b.bias)) {
        diff += (x - y) * (x - y);
        na += x * x;
        nb += y * y;
    }
    diff.sqrt() / na.sqrt().max(nb.sqrt()).max(LOG_CLAMP_EPS)
}
