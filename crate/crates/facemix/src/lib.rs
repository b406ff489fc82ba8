//! Facial-component data augmentation and a desk-scale training harness.
//!
//! The core operation cuts facial components (eyebrows, eyes, nose, mouth)
//! out of a "supplier" face and pastes them into a "receiver" face of a
//! different class, producing mixed images whose labels interpolate between
//! the two classes. Around that sit:
//!
//! - [`landmarks`]: 68-point sidecar parsing and component pixel regions;
//! - [`mixer`]: pair sampling, component selection, mixed-face composition,
//!   combinatorial counting, and offline dataset generation;
//! - [`baselines`]: Mixup, CutMix, Cutout, and Random Erasing for
//!   comparison;
//! - [`loss`]: cross-entropy and the mixed-label composite losses;
//! - [`trainer`]: a linear softmax classifier with hand-derived gradients,
//!   SGD with momentum, per-method batch assembly, and evaluation;
//! - [`synthfaces`]: a procedural schematic-face generator with landmarks
//!   known by construction, for end-to-end experiments without restricted
//!   face datasets.
//!
//! Everything downstream of a seed is deterministic: generation, training,
//! and evaluation produce byte-identical artifacts across runs and thread
//! counts. Build with `--no-default-features` to drop rayon and run all
//! batch operations sequentially.

pub mod baselines;
pub mod error;
pub mod image;
pub mod landmarks;
pub mod loss;
pub mod manifest;
pub mod mixer;
pub mod par;
pub mod synthfaces;
pub mod trainer;

pub use error::{Error, Result};
pub use image::{FaceImage, PixelRect};
pub use landmarks::{FacialComponent, LandmarkSet, Point};
