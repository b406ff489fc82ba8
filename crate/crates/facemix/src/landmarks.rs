//! 68-point facial landmarks: sidecar parsing, component index ranges, and
//! per-component pixel regions.
//!
//! The landmark layout follows the standard 68-point annotation scheme.
//! "Left" and "right" are in image coordinates: the image-left eyebrow is
//! indices 17-21 regardless of whose anatomical left it is.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{FaceImage, PixelRect};

/// Number of points in the annotation scheme.
pub const LANDMARK_COUNT: usize = 68;

/// Default bounding-box padding as a fraction of the box dimension.
pub const DEFAULT_PAD_FRAC: f64 = 0.15;

/// A sub-pixel landmark coordinate, origin top-left, y downward.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

/// The six facial components with fixed landmark index ranges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FacialComponent {
    LeftEyebrow,
    RightEyebrow,
    LeftEye,
    RightEye,
    Nose,
    Mouth,
}

impl FacialComponent {
    /// All six components in canonical order.
    pub const ALL: [FacialComponent; 6] = [
        FacialComponent::LeftEyebrow,
        FacialComponent::RightEyebrow,
        FacialComponent::LeftEye,
        FacialComponent::RightEye,
        FacialComponent::Nose,
        FacialComponent::Mouth,
    ];

    /// Landmark indices belonging to this component.
    pub fn landmark_range(self) -> std::ops::Range<usize> {
        match self {
            FacialComponent::LeftEyebrow => 17..22,
            FacialComponent::RightEyebrow => 22..27,
            FacialComponent::Nose => 27..36,
            FacialComponent::LeftEye => 36..42,
            FacialComponent::RightEye => 42..48,
            FacialComponent::Mouth => 48..68,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FacialComponent::LeftEyebrow => "LeftEyebrow",
            FacialComponent::RightEyebrow => "RightEyebrow",
            FacialComponent::LeftEye => "LeftEye",
            FacialComponent::RightEye => "RightEye",
            FacialComponent::Nose => "Nose",
            FacialComponent::Mouth => "Mouth",
        }
    }
}

/// Exactly 68 ordered points tied to an image id.
#[derive(Debug, Clone, PartialEq)]
pub struct LandmarkSet {
    image_id: String,
    points: Vec<Point>,
}

#[derive(Serialize, Deserialize)]
struct Sidecar {
    image: String,
    points: Vec<[serde_json::Value; 2]>,
}

impl LandmarkSet {
    pub fn new(image_id: impl Into<String>, points: Vec<Point>) -> Result<Self> {
        if points.len() != LANDMARK_COUNT {
            return Err(Error::WrongPointCount {
                got: points.len(),
                expected: LANDMARK_COUNT,
            });
        }
        if let Some(index) = points
            .iter()
            .position(|p| !p.x.is_finite() || !p.y.is_finite())
        {
            return Err(Error::NonFinitePoint { index });
        }
        Ok(Self {
            image_id: image_id.into(),
            points,
        })
    }

    pub fn image_id(&self) -> &str {
        &self.image_id
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn component_points(&self, component: FacialComponent) -> &[Point] {
        &self.points[component.landmark_range()]
    }

    /// Serialize to the sidecar JSON format.
    pub fn to_sidecar_json(&self) -> String {
        let sidecar = Sidecar {
            image: self.image_id.clone(),
            points: self
                .points
                .iter()
                .map(|p| [serde_json::json!(p.x), serde_json::json!(p.y)])
                .collect(),
        };
        serde_json::to_string(&sidecar).expect("sidecar serialization cannot fail")
    }
}

/// Parse a landmark sidecar file: `{"image": "<id>", "points": [[x,y], ...]}`.
///
/// Point values must be finite JSON numbers; anything else (including the
/// string `"NaN"`) is rejected as a non-finite point.
pub fn parse_landmark_file(bytes: &[u8]) -> Result<LandmarkSet> {
    let sidecar: Sidecar = serde_json::from_slice(bytes)?;
    if sidecar.points.len() != LANDMARK_COUNT {
        return Err(Error::WrongPointCount {
            got: sidecar.points.len(),
            expected: LANDMARK_COUNT,
        });
    }
    let mut points = Vec::with_capacity(LANDMARK_COUNT);
    for (index, [xv, yv]) in sidecar.points.iter().enumerate() {
        let (x, y) = match (xv.as_f64(), yv.as_f64()) {
            (Some(x), Some(y)) if x.is_finite() && y.is_finite() => (x, y),
            _ => return Err(Error::NonFinitePoint { index }),
        };
        points.push(Point::new(x, y));
    }
    LandmarkSet::new(sidecar.image, points)
}

/// A component's pixel region within a specific image.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ComponentRegion {
    pub component: FacialComponent,
    pub rect: PixelRect,
}

/// Padded axis-aligned bounding box of a component's landmarks.
///
/// The float bounding box is expanded by `pad_frac` times the box dimension
/// on each side, then converted to half-open pixel bounds: `x0 = floor(min)`
/// and `x1 = floor(max) + 1`, so the pixel containing each extreme landmark
/// is always included. The result is clamped to the image.
///
/// A component whose landmarks have zero extent along either axis is
/// degenerate: padding scales the extent, so no padding can repair it.
pub fn derive_region(
    landmarks: &LandmarkSet,
    component: FacialComponent,
    pad_frac: f64,
    img: &FaceImage,
) -> Result<ComponentRegion> {
    if !pad_frac.is_finite() || pad_frac < 0.0 {
        return Err(Error::InvalidConfig(format!(
            "pad_frac must be finite and non-negative, got {pad_frac}"
        )));
    }
    let pts = landmarks.component_points(component);
    let mut min_x = f64::INFINITY;
    let mut max_x = f64::NEG_INFINITY;
    let mut min_y = f64::INFINITY;
    let mut max_y = f64::NEG_INFINITY;
    for p in pts {
        min_x = min_x.min(p.x);
        max_x = max_x.max(p.x);
        min_y = min_y.min(p.y);
        max_y = max_y.max(p.y);
    }
    let span_w = max_x - min_x;
    let span_h = max_y - min_y;
    if span_w <= 0.0 || span_h <= 0.0 {
        return Err(Error::DegenerateRegion {
            component,
            reason: format!("landmark extent {span_w}x{span_h}"),
        });
    }

    let x0f = min_x - pad_frac * span_w;
    let x1f = max_x + pad_frac * span_w;
    let y0f = min_y - pad_frac * span_h;
    let y1f = max_y + pad_frac * span_h;

    let x0 = (x0f.floor() as i64).max(0) as u32;
    let y0 = (y0f.floor() as i64).max(0) as u32;
    let x1 = ((x1f.floor() as i64) + 1).clamp(0, i64::from(img.width())) as u32;
    let y1 = ((y1f.floor() as i64) + 1).clamp(0, i64::from(img.height())) as u32;

    if x1 <= x0 || y1 <= y0 {
        return Err(Error::DegenerateRegion {
            component,
            reason: "empty after clamping to image bounds".into(),
        });
    }
    Ok(ComponentRegion {
        component,
        rect: PixelRect::new(x0, y0, x1, y1),
    })
}

/// Findings from checking a (image, landmarks) pair.
#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    /// Indices of points outside `[0, width) x [0, height)`.
    pub out_of_bounds: Vec<usize>,
    /// Components with zero landmark extent along some axis.
    pub degenerate: Vec<FacialComponent>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.out_of_bounds.is_empty() && self.degenerate.is_empty()
    }
}

/// Check every point against the image bounds and every component for a
/// usable (non-degenerate) region. Findings are collected, not raised.
pub fn validate_pair(img: &FaceImage, landmarks: &LandmarkSet) -> ValidationReport {
    let mut report = ValidationReport::default();
    let (w, h) = (f64::from(img.width()), f64::from(img.height()));
    for (i, p) in landmarks.points().iter().enumerate() {
        if p.x < 0.0 || p.x >= w || p.y < 0.0 || p.y >= h {
            report.out_of_bounds.push(i);
        }
    }
    for component in FacialComponent::ALL {
        let pts = landmarks.component_points(component);
        let zero_x = pts.iter().all(|p| p.x == pts[0].x);
        let zero_y = pts.iter().all(|p| p.y == pts[0].y);
        if zero_x || zero_y {
            report.degenerate.push(component);
        }
    }
    report
}


#[cfg(test)]
mod properties {
    use super::*;
    use proptest::prelude::*;

    fn arb_points() -> impl Strategy<Value = Vec<Point>> {
        // In-bounds coordinates for a 1000x1000 image, away from the edges
        // so padding never clamps.
        proptest::collection::vec((100.0..900.0f64, 100.0..900.0f64), LANDMARK_COUNT)
            .prop_map(|v| v.into_iter().map(|(x, y)| Point::new(x, y)).collect())
    }

    proptest! {
        #[test]
        fn region_contains_all_component_landmarks(
            pts in arb_points(),
            pad in 0.0..1.0f64,
        ) {
            let img = FaceImage::filled("p", 1000, 1000, 1, 0);
            let lms = LandmarkSet::new("p", pts).unwrap();
            for component in FacialComponent::ALL {
                let region = derive_region(&lms, component, pad, &img).unwrap();
                for p in lms.component_points(component) {
                    prop_assert!(f64::from(region.rect.x0) <= p.x && p.x < f64::from(region.rect.x1));
                    prop_assert!(f64::from(region.rect.y0) <= p.y && p.y < f64::from(region.rect.y1));
                }
            }
        }

        #[test]
        fn region_is_monotone_in_padding(
            pts in arb_points(),
            pad_small in 0.0..0.4f64,
            extra in 0.0..0.4f64,
        ) {
            let img = FaceImage::filled("p", 1000, 1000, 1, 0);
            let lms = LandmarkSet::new("p", pts).unwrap();
            for component in FacialComponent::ALL {
                let small = derive_region(&lms, component, pad_small, &img).unwrap().rect;
                let large = derive_region(&lms, component, pad_small + extra, &img).unwrap().rect;
                prop_assert!(large.x0 <= small.x0 && large.y0 <= small.y0);
                prop_assert!(large.x1 >= small.x1 && large.y1 >= small.y1);
            }
        }

        #[test]
        fn sidecar_roundtrip_is_identity(pts in arb_points()) {
            let lms = LandmarkSet::new("rt", pts).unwrap();
            let reparsed = parse_landmark_file(lms.to_sidecar_json().as_bytes()).unwrap();
            prop_assert_eq!(reparsed, lms);
        }
    }
}
