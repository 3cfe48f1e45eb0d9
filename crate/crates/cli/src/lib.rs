//! Command-line front end for perimkit: file formats, configuration, the
//! end-to-end pipeline and the ablation harness.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ablate;
pub mod app;
pub mod config;
pub mod formats;
pub mod io;
pub mod pipeline;
pub mod report;
pub mod svg;

pub use config::{ClusterMethod, PipelineConfig};
pub use pipeline::{process, run_pipeline, PipelineOutput, SceneInput, SceneRecord, StageError};
