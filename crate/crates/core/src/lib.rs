//! Full-reference fidelity assessment for adversarial/original image pairs.
//!
//! The crate is organized around the pipeline that turns image pairs and raw
//! subjective ratings into a metric-vs-human performance table:
//!
//! - [`image`]: decoding, luminance conversion and the shared DSP primitives.
//! - [`norms`]: the L0 / L2 / L∞ perturbation distances.
//! - [`metrics`]: the full-reference metrics (tier 1 always built, tier 2
//!   behind the `tier2` feature).
//! - [`subjective`]: BT.500 subject screening, MOS and confidence intervals.
//! - [`descriptors`]: spatial information and colourfulness of contents.
//! - [`stats`]: 5-parameter logistic fitting and PLCC/SROCC/RMSE/OR.

pub mod descriptors;
mod error;
pub mod image;
pub mod metrics;
pub mod norms;
pub mod stats;
pub mod subjective;

pub use error::{Error, Result};
pub use image::{decode_image, load_image, Image, LumaPlane};
pub use metrics::{Constants, MetricId, MetricScore, ScoreValue, Scorer};
