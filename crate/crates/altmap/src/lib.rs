//! File formats, tweet harvesting and the staged pipeline around
//! [`altmap_core`].

pub mod analysis;
pub mod config;
mod error;
pub mod fixture;
pub mod formats;
pub mod harvest;
pub mod pipeline;
pub mod server;

pub use altmap_core as core;
pub use config::PipelineConfig;
pub use error::{Error, Result};
pub use pipeline::{run_pipeline, ArtifactManifest};
