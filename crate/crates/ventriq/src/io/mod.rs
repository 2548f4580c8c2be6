//! Cohort data organisation and persistence: volume files, shape files,
//! manifests, trained-model blobs, and the results table.

pub mod manifest;
pub mod model_file;
pub mod results;
pub mod shape_file;
pub mod volume_file;

pub use manifest::{load_manifest, organize, save_manifest, CohortManifest, SubjectEntry};
pub use model_file::{load_models, save_models};
pub use results::{load_results, write_results, ResultsTable, SubjectRow, SubjectStatus};
pub use shape_file::{load_shape, save_shape};
pub use volume_file::{load_volume, load_volume_header, save_volume, VolumeHeader};
