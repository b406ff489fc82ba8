//! General-purpose augmentations used as comparison baselines: Mixup,
//! CutMix, Cutout, and Random Erasing.
//!
//! All four are pure functions of their inputs and RNG state. Mixup and
//! CutMix produce soft labels; Cutout and Random Erasing leave labeling to
//! the caller.

use rand::Rng;

use crate::error::{Error, Result};
use crate::image::{FaceImage, PixelRect};
use crate::loss::LabelDistribution;

/// An augmented image with its (possibly soft) label.
#[derive(Debug, Clone)]
pub struct AugmentedSample {
    pub image: FaceImage,
    pub label: LabelDistribution,
}

fn check_same_dimensions(a: &FaceImage, b: &FaceImage) -> Result<()> {
    if !a.same_dimensions(b) {
        return Err(Error::DimensionMismatch {
            a_width: a.width(),
            a_height: a.height(),
            b_width: b.width(),
            b_height: b.height(),
        });
    }
    Ok(())
}

fn check_unit_interval(name: &str, value: f64) -> Result<()> {
    if !value.is_finite() || !(0.0..=1.0).contains(&value) {
        return Err(Error::InvalidConfig(format!(
            "{name} must lie in [0, 1], got {value}"
        )));
    }
    Ok(())
}

/// Pixel-wise weighted sum of two images: `lambda * a + (1 - lambda) * b`,
/// rounded to the nearest intensity; labels blend with the same weight.
pub fn mixup_images(
    a: &FaceImage,
    label_a: &LabelDistribution,
    b: &FaceImage,
    label_b: &LabelDistribution,
    lambda: f64,
) -> Result<AugmentedSample> {
    check_same_dimensions(a, b)?;
    check_unit_interval("lambda", lambda)?;
    let pixels = a
        .pixels()
        .iter()
        .zip(b.pixels())
        .map(|(&pa, &pb)| {
            let v = lambda * f64::from(pa) + (1.0 - lambda) * f64::from(pb);
            v.round().clamp(0.0, 255.0) as u8
        })
        .collect();
    let image = FaceImage::new(
        format!("mixup({},{})", a.id(), b.id()),
        a.width(),
        a.height(),
        a.channels(),
        pixels,
    )?;
    let label = LabelDistribution::blend(lambda, label_a, label_b)?;
    Ok(AugmentedSample { image, label })
}

/// Paste `b`'s rectangle into `a` at the same coordinates; the label mixes
/// by exact pixel-area fraction `|rect| / (W*H)`.
///
/// An empty rectangle is allowed and reproduces `a` with its label.
pub fn cutmix_images(
    a: &FaceImage,
    label_a: &LabelDistribution,
    b: &FaceImage,
    label_b: &LabelDistribution,
    rect: PixelRect,
) -> Result<AugmentedSample> {
    check_same_dimensions(a, b)?;
    if rect.x1 > a.width() || rect.y1 > a.height() {
        return Err(Error::RectOutOfBounds {
            x0: rect.x0,
            y0: rect.y0,
            x1: rect.x1,
            y1: rect.y1,
            width: a.width(),
            height: a.height(),
        });
    }
    let mut image = a.clone();
    image.set_id(format!("cutmix({},{})", a.id(), b.id()));
    if !rect.is_empty() {
        image.paste(rect, &b.crop(rect)?)?;
    }
    let area_frac = rect.area() as f64 / (u64::from(a.width()) * u64::from(a.height())) as f64;
    let label = LabelDistribution::blend(area_frac, label_b, label_a)?;
    Ok(AugmentedSample { image, label })
}

/// Sample a uniformly random in-bounds rectangle: width and height first,
/// then position.
pub fn random_rect<R: Rng>(width: u32, height: u32, rng: &mut R) -> PixelRect {
    let w = rng.gen_range(1..=width);
    let h = rng.gen_range(1..=height);
    let x0 = rng.gen_range(0..=width - w);
    let y0 = rng.gen_range(0..=height - h);
    PixelRect::new(x0, y0, x0 + w, y0 + h)
}

/// CutMix with a randomly sampled rectangle.
pub fn cutmix_images_random<R: Rng>(
    a: &FaceImage,
    label_a: &LabelDistribution,
    b: &FaceImage,
    label_b: &LabelDistribution,
    rng: &mut R,
) -> Result<AugmentedSample> {
    check_same_dimensions(a, b)?;
    let rect = random_rect(a.width(), a.height(), rng);
    cutmix_images(a, label_a, b, label_b, rect)
}

/// Mask a square of side `square_side` centered at `center` with `fill`,
/// clamped at the image borders. The label is unchanged by contract.
pub fn cutout(
    img: &FaceImage,
    square_side: u32,
    center: (u32, u32),
    fill: u8,
) -> Result<FaceImage> {
    if square_side == 0 {
        return Err(Error::InvalidConfig("square_side must be positive".into()));
    }
    let (cx, cy) = center;
    let half = i64::from(square_side) / 2;
    let x0 = (i64::from(cx) - half).max(0) as u32;
    let y0 = (i64::from(cy) - half).max(0) as u32;
    let x1 = ((i64::from(cx) - half) + i64::from(square_side)).clamp(0, i64::from(img.width())) as u32;
    let y1 = ((i64::from(cy) - half) + i64::from(square_side)).clamp(0, i64::from(img.height())) as u32;
    let mut out = img.clone();
    for y in y0..y1 {
        for x in x0..x1 {
            for ch in 0..img.channels() {
                out.set(x, y, ch, fill);
            }
        }
    }
    Ok(out)
}

/// Cutout at a uniformly random in-image center.
pub fn cutout_random<R: Rng>(
    img: &FaceImage,
    square_side: u32,
    fill: u8,
    rng: &mut R,
) -> Result<FaceImage> {
    let cx = rng.gen_range(0..img.width());
    let cy = rng.gen_range(0..img.height());
    cutout(img, square_side, (cx, cy), fill)
}

/// Number of pixels a clamped cutout square covers.
pub fn cutout_area(img: &FaceImage, square_side: u32, center: (u32, u32)) -> u64 {
    let (cx, cy) = center;
    let half = i64::from(square_side) / 2;
    let x0 = (i64::from(cx) - half).max(0);
    let y0 = (i64::from(cy) - half).max(0);
    let x1 = ((i64::from(cx) - half) + i64::from(square_side)).min(i64::from(img.width()));
    let y1 = ((i64::from(cy) - half) + i64::from(square_side)).min(i64::from(img.height()));
    ((x1 - x0).max(0) * (y1 - y0).max(0)) as u64
}

const ERASE_MAX_ATTEMPTS: usize = 100;

/// Erase one rectangle with i.i.d. uniform random intensities.
///
/// The rectangle's area fraction is drawn from `area_range` (a sub-range
/// of `(0, 1]`) and its aspect ratio (height over width) from
/// `aspect_range`. Sampling retries until the rectangle fits; a geometry
/// that never fits fails after a bounded number of attempts.
pub fn random_erase<R: Rng>(
    img: &FaceImage,
    area_range: (f64, f64),
    aspect_range: (f64, f64),
    rng: &mut R,
) -> Result<FaceImage> {
    let (a_lo, a_hi) = area_range;
    let (r_lo, r_hi) = aspect_range;
    if !(0.0 < a_lo && a_lo <= a_hi && a_hi <= 1.0) {
        return Err(Error::InvalidConfig(format!(
            "area range ({a_lo}, {a_hi}) must be a sub-range of (0, 1]"
        )));
    }
    if !(0.0 < r_lo && r_lo <= r_hi && r_hi.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "aspect range ({r_lo}, {r_hi}) must be a sub-range of (0, inf)"
        )));
    }
    let total = f64::from(img.width()) * f64::from(img.height());
    for _ in 0..ERASE_MAX_ATTEMPTS {
        let area = rng.gen_range(a_lo..=a_hi) * total;
        let aspect = rng.gen_range(r_lo..=r_hi);
        let h = (area * aspect).sqrt().round() as i64;
        let w = (area / aspect).sqrt().round() as i64;
        if h < 1 || w < 1 || h > i64::from(img.height()) || w > i64::from(img.width()) {
            continue;
        }
        let (w, h) = (w as u32, h as u32);
        let x0 = rng.gen_range(0..=img.width() - w);
        let y0 = rng.gen_range(0..=img.height() - h);
        let mut out = img.clone();
        for y in y0..y0 + h {
            for x in x0..x0 + w {
                for ch in 0..img.channels() {
                    out.set(x, y, ch, rng.gen());
                }
            }
        }
        return Ok(out);
    }
    Err(Error::SamplingFailure {
        what: "random-erase rectangle never fit the image".into(),
        attempts: ERASE_MAX_ATTEMPTS,
    })
}
