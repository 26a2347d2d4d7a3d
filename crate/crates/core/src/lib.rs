//! Pixelwise photometric-stereo data synthesis and evaluation.
//!
//! The crate generates per-pixel observation-map training records with
//! approximated global-illumination effects, and provides the inference-side
//! tooling around them: image-stack ingestion, a least-squares baseline
//! solver, a per-pixel sphere renderer and angular-error scoring.

pub mod brdf;
pub mod datagen;
pub mod effects;
pub mod geom;
pub mod obsmap;
pub mod pstereo;
pub mod rng;

pub use brdf::{DisneyParams, MaterialSpec, MerlLibrary, MerlTable};
pub use datagen::{GenConfig, GenStats, Preset, TrainingRecord};
pub use geom::{angular_error, Direction, Rgb, Vec3};
pub use obsmap::{build_map, LightSample, ObservationMap};
pub use pstereo::{ImageStack, NormalMap, PstereoError};
pub use rng::RandomStream;
