//! Inference-side tooling: image stacks, light calibration, the
//! least-squares baseline, sphere rendering, map extraction and scoring.

mod evaluate;
mod extract;
mod lights;
mod normalmap;
mod render;
mod solve;
mod stack;

use std::io;

pub use evaluate::{evaluate, Evaluation, HEATMAP_MAX_DEG, PERCENTILES, THRESHOLDS};
pub use extract::{
    cell_direction, extract_map, extract_maps, extract_rotated, k_rotation_predict, map_baseline,
    MapBaseline, NormalPredictor, SubprocessPredictor, PREDICT_CHUNK,
};
pub use lights::{format_lights, load_lights, parse_lights, sample_light_subsets, SUBSET_SEED};
pub use normalmap::NormalMap;
pub use render::{render_sphere, sphere_normal};
pub use solve::woodham_solve;
pub use stack::{
    load_image_stack, load_stack_dir, read_png_rgb, ImageStack, DIRECTIONS_FILE, FILENAMES_FILE,
    INTENSITIES_FILE, MASK_FILE,
};

/// Magic and version of the normal-map file format.
pub mod pxnm {
    pub use super::normalmap::{MAGIC, VERSION};
}

use crate::brdf::BrdfError;
use crate::datagen::DatasetError;
use crate::obsmap::MapError;

#[derive(Debug, thiserror::Error)]
pub enum PstereoError {
    #[error("{directions} light directions but {intensities} light intensities")]
    LineCountMismatch { directions: usize, intensities: usize },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("{images} images but {lights} lights")]
    CountMismatch { images: usize, lights: usize },
    #[error("decode error: {0}")]
    Decode(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("pixel ({row}, {col}) is outside the mask")]
    OutsideMask { row: usize, col: usize },
    #[error("light directions do not span three dimensions")]
    RankDeficientLights,
    #[error("prediction and ground-truth masks do not overlap")]
    EmptyIntersection,
    #[error("predictor failed: {0}")]
    PredictorFailure(String),
    #[error("not a PXNM normal map")]
    BadMagic,
    #[error("unsupported normal-map version {0}")]
    VersionUnsupported(u32),
    #[error("normal map truncated")]
    TruncatedFile,
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Brdf(#[from] BrdfError),
}
