//! Cross-class face mixing: pair sampling, component selection, mixed-face
//! composition, combinatorial counting, and offline dataset generation.
//!
//! A mix takes a *supplier* face and a *receiver* face with different
//! labels, cuts `gamma` facial components out of the supplier, and pastes
//! them over the receiver's corresponding regions. The receiver's geometry
//! governs the paste: each supplier crop is resampled to the receiver's
//! component rectangle, so the receiver's facial layout stays intact.
//!
//! Generation is offline and deterministic: plans are enumerated
//! sequentially from a seeded RNG, then composed (in parallel when the
//! `parallel` feature is on) and written in plan order. Output is a pure
//! function of (manifest, landmarks, config, seed), independent of thread
//! count.

use std::collections::{HashMap, HashSet};
use std::path::Path;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::FaceImage;
use crate::landmarks::{derive_region, validate_pair, FacialComponent, LandmarkSet};
use crate::manifest::{load_samples, JsonlWriter, LoadedSample, ManifestEntry};
use crate::par;

/// Non-empty subsets of the six components: C(6,1) + ... + C(6,6).
pub const COMPONENT_SUBSET_COUNT: u64 = 63;

/// The printed factor in the source formula, kept for compatibility
/// reporting; the true binomial sum is [`COMPONENT_SUBSET_COUNT`].
pub const PAPER_COMPAT_SUBSET_COUNT: u64 = 62;

/// Distribution over the number of components to replace (1..=6).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaDist {
    weights: [f64; 6],
}

impl GammaDist {
    /// Uniform over {1..6}, the default.
    pub fn uniform() -> Self {
        Self {
            weights: [1.0 / 6.0; 6],
        }
    }

    /// Weights for gamma = 1..=6; must be non-negative and sum to 1.
    pub fn new(weights: [f64; 6]) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidDistribution(
                "gamma weights must be finite and non-negative".into(),
            ));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidDistribution(format!(
                "gamma weights sum to {sum}, expected 1"
            )));
        }
        Ok(Self { weights })
    }

    /// Point mass on a single gamma value.
    pub fn fixed(gamma: u8) -> Result<Self> {
        if !(1..=6).contains(&gamma) {
            return Err(Error::InvalidDistribution(format!(
                "gamma must be in 1..=6, got {gamma}"
            )));
        }
        let mut weights = [0.0; 6];
        weights[gamma as usize - 1] = 1.0;
        Ok(Self { weights })
    }

    /// Draw a gamma value by cumulative inversion of one uniform variate.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> u8 {
        let r: f64 = rng.gen();
        let mut cum = 0.0;
        for (i, w) in self.weights.iter().enumerate() {
            cum += w;
            if r < cum {
                return i as u8 + 1;
            }
        }
        // r landed in the final rounding sliver; return the last positive bin.
        self.weights
            .iter()
            .rposition(|w| *w > 0.0)
            .map(|i| i as u8 + 1)
            .unwrap_or(6)
    }
}

impl Default for GammaDist {
    fn default() -> Self {
        Self::uniform()
    }
}

/// A fully specified mix: who supplies, who receives, and which components move.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixPlan {
    pub supplier_id: String,
    pub receiver_id: String,
    pub supplier_label: usize,
    pub receiver_label: usize,
    pub gamma: u8,
    pub components: Vec<FacialComponent>,
    pub seed: u64,
}

impl MixPlan {
    pub fn new(
        supplier_id: impl Into<String>,
        receiver_id: impl Into<String>,
        supplier_label: usize,
        receiver_label: usize,
        components: Vec<FacialComponent>,
        seed: u64,
    ) -> Result<Self> {
        if supplier_label == receiver_label {
            return Err(Error::SameClassPair);
        }
        let mut sorted = components;
        sorted.sort_unstable();
        let before = sorted.len();
        sorted.dedup();
        if sorted.len() != before || sorted.is_empty() || sorted.len() > 6 {
            return Err(Error::InvalidConfig(format!(
                "component set must be 1..=6 distinct components, got {before}"
            )));
        }
        let gamma = sorted.len() as u8;
        Ok(Self {
            supplier_id: supplier_id.into(),
            receiver_id: receiver_id.into(),
            supplier_label,
            receiver_label,
            gamma,
            components: sorted,
            seed,
        })
    }
}

/// A generated mixed face: its id, the plan that produced it, and where it
/// was written.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixedFaceRecord {
    pub mixed_id: String,
    pub plan: MixPlan,
    pub output_path: String,
    /// True when the unique plan space was exhausted and this plan repeats
    /// an earlier one.
    pub repeat: bool,
}

/// One line of the mixed-dataset metadata JSONL.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixedMetaRecord {
    pub mixed_path: String,
    pub supplier: String,
    pub receiver: String,
    pub gamma: u8,
    pub components: Vec<FacialComponent>,
    pub label_supplier: usize,
    pub label_receiver: usize,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub repeat: bool,
}

impl MixedMetaRecord {
    fn from_record(record: &MixedFaceRecord) -> Self {
        Self {
            mixed_path: record.output_path.clone(),
            supplier: record.plan.supplier_id.clone(),
            receiver: record.plan.receiver_id.clone(),
            gamma: record.plan.gamma,
            components: record.plan.components.clone(),
            label_supplier: record.plan.supplier_label,
            label_receiver: record.plan.receiver_label,
            seed: record.plan.seed,
            repeat: record.repeat,
        }
    }
}

/// Uniformly sample an ordered (supplier, receiver) index pair with
/// distinct labels, by rejection.
pub fn sample_pair<R: Rng>(labels: &[usize], rng: &mut R) -> Result<(usize, usize)> {
    let first = labels.first().ok_or(Error::InsufficientClasses)?;
    if labels.iter().all(|l| l == first) {
        return Err(Error::InsufficientClasses);
    }
    loop {
        let i = rng.gen_range(0..labels.len());
        let j = rng.gen_range(0..labels.len());
        if labels[i] != labels[j] {
            return Ok((i, j));
        }
    }
}

/// Draw gamma from `gamma_dist`, then a uniformly random gamma-subset of
/// the six components, returned in canonical order.
pub fn sample_components<R: Rng>(
    gamma_dist: &GammaDist,
    rng: &mut R,
) -> (u8, Vec<FacialComponent>) {
    let gamma = gamma_dist.sample(rng);
    let mut indices = [0usize, 1, 2, 3, 4, 5];
    // Partial Fisher-Yates: the first `gamma` slots are a uniform subset.
    for k in 0..gamma as usize {
        let j = rng.gen_range(k..6);
        indices.swap(k, j);
    }
    let mut chosen: Vec<usize> = indices[..gamma as usize].to_vec();
    chosen.sort_unstable();
    let components = chosen.into_iter().map(|i| FacialComponent::ALL[i]).collect();
    (gamma, components)
}

/// Paste the supplier's selected components into the receiver.
///
/// For each component in canonical order: crop the supplier's padded
/// region, bilinearly resample it to the receiver's region, and overwrite
/// the receiver's pixels there. Every pixel outside the selected receiver
/// regions is bit-identical to the receiver. Overlapping regions are
/// resolved by paste order (later components win).
pub fn compose_mixed_face(
    supplier: (&FaceImage, &LandmarkSet),
    receiver: (&FaceImage, &LandmarkSet),
    plan: &MixPlan,
    pad_frac: f64,
) -> Result<FaceImage> {
    let (sup_img, sup_lms) = supplier;
    let (rec_img, rec_lms) = receiver;
    if sup_img.channels() != rec_img.channels() {
        return Err(Error::DimensionMismatch {
            a_width: sup_img.width(),
            a_height: sup_img.height(),
            b_width: rec_img.width(),
            b_height: rec_img.height(),
        });
    }
    if plan.components.is_empty() {
        return Err(Error::InvalidConfig("plan selects no components".into()));
    }
    let mut out = rec_img.clone();
    for &component in &plan.components {
        let sup_region = derive_region(sup_lms, component, pad_frac, sup_img)?;
        let rec_region = derive_region(rec_lms, component, pad_frac, rec_img)?;
        let crop = sup_img.crop(sup_region.rect)?;
        let resized = crop.resize_bilinear(rec_region.rect.width(), rec_region.rect.height())?;
        out.paste(rec_region.rect, &resized)?;
    }
    Ok(out)
}

/// Exact size of the mix space for an `n`-image dataset, ignoring labels:
/// ordered pairs times non-empty component subsets.
pub fn count_possible_mixes(n: u64) -> u128 {
    if n < 2 {
        return 0;
    }
    u128::from(n) * u128::from(n - 1) * u128::from(COMPONENT_SUBSET_COUNT)
}

/// Same count using the printed factor 62 instead of the binomial sum 63.
pub fn count_possible_mixes_paper_compat(n: u64) -> u128 {
    if n < 2 {
        return 0;
    }
    u128::from(n) * u128::from(n - 1) * u128::from(PAPER_COMPAT_SUBSET_COUNT)
}

/// Settings for plan enumeration and dataset generation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GenerateConfig {
    pub count: usize,
    pub gamma_dist: GammaDist,
    pub pad_frac: f64,
    pub seed: u64,
}

impl GenerateConfig {
    pub fn new(count: usize, seed: u64) -> Self {
        Self {
            count,
            gamma_dist: GammaDist::uniform(),
            pad_frac: crate::landmarks::DEFAULT_PAD_FRAC,
            seed,
        }
    }
}

/// A plan bound to dataset indices, with its repetition flag.
#[derive(Debug, Clone, PartialEq)]
pub struct PlannedMix {
    pub supplier_index: usize,
    pub receiver_index: usize,
    pub plan: MixPlan,
    pub repeat: bool,
}

fn component_mask(components: &[FacialComponent]) -> u8 {
    let mut mask = 0u8;
    for c in components {
        let i = FacialComponent::ALL.iter().position(|x| x == c).unwrap();
        mask |= 1 << i;
    }
    mask
}

/// Number of ordered cross-label pairs in a labeled dataset.
fn legal_pair_count(labels: &[usize]) -> u64 {
    let mut per_class: HashMap<usize, u64> = HashMap::new();
    for &l in labels {
        *per_class.entry(l).or_insert(0) += 1;
    }
    let n = labels.len() as u64;
    let same: u64 = per_class.values().map(|c| c * c).sum();
    n * n - same
}

/// Enumerate `config.count` mix plans sequentially from the seeded RNG.
///
/// Plans are unique in (supplier, receiver, component set) until the legal
/// plan space is exhausted; after that, plans repeat and are flagged.
pub fn enumerate_plans(
    ids: &[String],
    labels: &[usize],
    config: &GenerateConfig,
) -> Result<Vec<PlannedMix>> {
    assert_eq!(ids.len(), labels.len());
    if labels.len() < 2 {
        return Err(Error::InsufficientClasses);
    }
    let space = u128::from(legal_pair_count(labels)) * u128::from(COMPONENT_SUBSET_COUNT);
    if space == 0 {
        return Err(Error::InsufficientClasses);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut seen: HashSet<(usize, usize, u8)> = HashSet::new();
    let mut plans = Vec::with_capacity(config.count);
    for _ in 0..config.count {
        let exhausted = (seen.len() as u128) >= space;
        let (i, j, components) = loop {
            let (i, j) = sample_pair(labels, &mut rng)?;
            let (_, components) = sample_components(&config.gamma_dist, &mut rng);
            if exhausted || seen.insert((i, j, component_mask(&components))) {
                break (i, j, components);
            }
        };
        let plan = MixPlan::new(
            ids[i].clone(),
            ids[j].clone(),
            labels[i],
            labels[j],
            components,
            config.seed,
        )?;
        plans.push(PlannedMix {
            supplier_index: i,
            receiver_index: j,
            plan,
            repeat: exhausted,
        });
    }
    Ok(plans)
}

/// Compose every planned mix against in-memory samples, in plan order.
pub fn compose_plans(
    samples: &[LoadedSample],
    plans: &[PlannedMix],
    pad_frac: f64,
) -> Result<Vec<FaceImage>> {
    par::try_map_indexed(plans, |idx, planned| {
        let sup = &samples[planned.supplier_index];
        let rec = &samples[planned.receiver_index];
        let mut img = compose_mixed_face(
            (&sup.image, &sup.landmarks),
            (&rec.image, &rec.landmarks),
            &planned.plan,
            pad_frac,
        )?;
        img.set_id(format!("mixed_{idx:06}"));
        Ok(img)
    })
}

/// Generate a mixed dataset on disk: PNG images plus a metadata JSONL.
///
/// Output is deterministic for a fixed (manifest, landmarks, config, seed):
/// two runs produce byte-identical files regardless of thread count.
pub fn generate_dataset(
    manifest_path: impl AsRef<Path>,
    entries: &[ManifestEntry],
    config: &GenerateConfig,
    out_dir: impl AsRef<Path>,
) -> Result<Vec<MixedFaceRecord>> {
    let manifest_path = manifest_path.as_ref();
    let out_dir = out_dir.as_ref();
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;

    let samples = load_samples(manifest_path, entries)?;
    for (entry, sample) in entries.iter().zip(&samples) {
        let report = validate_pair(&sample.image, &sample.landmarks);
        if !report.passed() {
            return Err(Error::InvalidImage(format!(
                "{}: {} out-of-bounds landmarks, {} degenerate components",
                entry.path,
                report.out_of_bounds.len(),
                report.degenerate.len()
            )));
        }
    }

    let ids: Vec<String> = samples.iter().map(|s| s.image.id().to_string()).collect();
    let labels: Vec<usize> = samples.iter().map(|s| s.label).collect();
    let plans = enumerate_plans(&ids, &labels, config)?;
    let repeats = plans.iter().filter(|p| p.repeat).count();
    if repeats > 0 {
        log::warn!(
            "plan space exhausted: {repeats} of {} plans repeat earlier mixes",
            plans.len()
        );
    }

    let images = compose_plans(&samples, &plans, config.pad_frac)?;

    let records: Vec<MixedFaceRecord> = plans
        .iter()
        .enumerate()
        .map(|(idx, planned)| MixedFaceRecord {
            mixed_id: format!("mixed_{idx:06}"),
            plan: planned.plan.clone(),
            output_path: format!("mixed_{idx:06}.png"),
            repeat: planned.repeat,
        })
        .collect();

    par::try_map_indexed(&images, |idx, img| {
        img.save_png(out_dir.join(&records[idx].output_path))
    })?;

    let mut meta = JsonlWriter::create(out_dir.join("mixed_meta.jsonl"))?;
    for record in &records {
        meta.write(&MixedMetaRecord::from_record(record))?;
    }
    Ok(records)
}


#[cfg(test)]
mod properties {
    use super::*;
    use crate::landmarks::derive_region;
    use proptest::prelude::*;

    fn arb_components() -> impl Strategy<Value = Vec<FacialComponent>> {
        (1u8..64).prop_map(|mask| {
            FacialComponent::ALL
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, c)| *c)
                .collect()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn pixel_partition_property(
            components in arb_components(),
            sup_salt in 0u8..255,
            rec_salt in 0u8..255,
            pad in 0.0f64..0.5,
        ) {
            let sup = {
                let pixels = (0..100u32 * 90).map(|i| ((i * 13 + u32::from(sup_salt) * 7) % 256) as u8).collect();
                FaceImage::new("sup", 100, 90, 1, pixels).unwrap()
            };
            let rec = {
                let pixels = (0..120u32 * 100).map(|i| ((i * 17 + u32::from(rec_salt) * 11) % 256) as u8).collect();
                FaceImage::new("rec", 120, 100, 1, pixels).unwrap()
            };
            let sup_lms = tests::grid_landmarks("sup", 1.0, 0.0, 0.0);
            let rec_lms = tests::grid_landmarks("rec", 1.2, 3.0, 2.0);
            let plan = MixPlan::new("sup", "rec", 0, 1, components, 0).unwrap();
            let out = compose_mixed_face((&sup, &sup_lms), (&rec, &rec_lms), &plan, pad).unwrap();

            // Reconstruct the expected image through the same documented
            // crop/resize/paste sequence.
            let mut expected = rec.clone();
            for &component in &plan.components {
                let sregion = derive_region(&sup_lms, component, pad, &sup).unwrap();
                let rregion = derive_region(&rec_lms, component, pad, &rec).unwrap();
                let crop = sup.crop(sregion.rect).unwrap();
                let resized = crop.resize_bilinear(rregion.rect.width(), rregion.rect.height()).unwrap();
                expected.paste(rregion.rect, &resized).unwrap();
            }
            prop_assert!(out.same_pixels(&expected));

            // And pixels outside every selected region equal the receiver.
            let regions: Vec<_> = plan
                .components
                .iter()
                .map(|&c| derive_region(&rec_lms, c, pad, &rec).unwrap().rect)
                .collect();
            for y in 0..rec.height() {
                for x in 0..rec.width() {
                    if !regions.iter().any(|r| r.contains(x, y)) {
                        prop_assert_eq!(out.get(x, y, 0), rec.get(x, y, 0));
                    }
                }
            }
        }
    }
}
