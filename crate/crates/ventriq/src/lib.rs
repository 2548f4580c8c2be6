//! ventriq — fully automatic, quality-gated bi-ventricular segmentation of
//! cine short-axis image stacks with statistical shape models, plus
//! population reference-range statistics.
//!
//! The per-subject stage chain is: data organisation, image quality
//! assessment, organ detection, model initialisation, segmentation,
//! segmentation quality assessment, quantification, data sink. Subjects run
//! independently on a worker pool; models are shared read-only.

pub mod appearance;
pub mod config;
pub mod error;
pub mod geom;
pub mod io;
pub mod quantify;
pub mod shape;

pub use error::{Error, Result};
