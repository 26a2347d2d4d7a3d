//! Training-record synthesis and the dataset pipeline.
//!
//! Every record is an independent draw of normal, lights, material, albedo
//! and effects, shaded into an observation map. Randomness for record `i`
//! (attempt `r`) comes from its own keyed stream, so output depends only on
//! the configuration and never on scheduling.

mod config;
mod format;
mod pixel;

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;

pub use config::{GenConfig, LightCount, Preset};
pub use format::{
    read_dataset, write_dataset, DatasetError, DatasetHeader, DatasetReader, DatasetWriter,
    HEADER_LEN, MAGIC, VERSION,
};
pub use pixel::{
    ambient_color, sample_pixel_effects, shade_pixel, EffectsConfig, Light, PixelEffects,
};

use crate::brdf::{BrdfError, DisneyParams, MaterialSpec, MerlLibrary};
use crate::geom::{sample_hemisphere_uniform, Direction, Rgb, Vec3};
use crate::obsmap::{build_map, MapError, ObservationMap};
use crate::rng::RandomStream;

/// Attempts per record index before giving up.
pub const MAX_RETRIES: u64 = 1000;

/// Records generated per parallel batch.
const BATCH: usize = 512;

#[derive(Debug, thiserror::Error)]
pub enum GenError {
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    #[error("record {index} was discarded {MAX_RETRIES} times in a row")]
    TooManyDiscards { index: u64 },
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Brdf(#[from] BrdfError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingRecord {
    pub map: ObservationMap,
    /// Ground truth; for mixed sub-pixels the renormalized mean normal.
    pub normal: Direction,
}

/// Which effects a single attempt activated.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RecordFlags {
    pub shadowed: bool,
    pub reflections: usize,
    pub ambient: bool,
    pub discontinuity: bool,
    pub merl: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Record(TrainingRecord),
    Discarded,
}

impl Outcome {
    pub fn is_discarded(&self) -> bool {
        matches!(self, Outcome::Discarded)
    }

    pub fn record(self) -> Option<TrainingRecord> {
        match self {
            Outcome::Record(r) => Some(r),
            Outcome::Discarded => None,
        }
    }
}

/// Sampling the parameters of one attempt, before shading.
#[derive(Debug, Clone)]
pub struct RecordDraw {
    pub normals: Vec<Direction>,
    pub albedos: Vec<Rgb>,
    pub ground_truth: Direction,
    pub lights: Vec<Light>,
    pub material: MaterialSpec,
    pub effects: PixelEffects,
    pub flags: RecordFlags,
}

impl GenConfig {
    pub fn effects(&self) -> EffectsConfig {
        EffectsConfig {
            wall: self.wall_model(),
            reflections: self.reflections,
            p_ambient: self.p_ambient,
            ambient_max: self.ambient_max,
            noise: self.noise_enabled.then_some(self.noise),
            quantize: self.quantize,
        }
    }
}

fn sample_lights(cfg: &GenConfig, rng: &mut RandomStream) -> Vec<Light> {
    let count = match cfg.lights {
        LightCount::Fixed(n) => n as u64,
        LightCount::Uniform { min, max } => rng.int_inclusive(min as u64, max as u64),
    };
    let max_polar = cfg.light_max_elevation_deg.to_radians();
    let (lo, hi) = cfg.brightness;
    (0..count)
        .map(|_| {
            let direction = sample_hemisphere_uniform(rng, max_polar);
            let brightness = Rgb::new(rng.uniform(lo, hi), rng.uniform(lo, hi), rng.uniform(lo, hi));
            Light {
                direction,
                brightness,
            }
        })
        .collect()
}

fn sample_albedo(cfg: &GenConfig, rng: &mut RandomStream) -> Rgb {
    let drawn = Rgb::new(rng.unit(), rng.unit(), rng.unit());
    cfg.albedo_override.unwrap_or(drawn)
}

/// Draws the parameters of attempt `retry` for record `index`.
pub fn draw_record(cfg: &GenConfig, library: &MerlLibrary, index: u64, retry: u64) -> (RecordDraw, RandomStream) {
    let mut rng = RandomStream::new(cfg.seed, index, retry);
    let normal = pixel::hemisphere(&mut rng);
    let lights = sample_lights(cfg, &mut rng);

    let merl_fraction = if library.is_empty() { 0.0 } else { cfg.merl_fraction };
    let sampled = if rng.bernoulli(merl_fraction) {
        let table_id = rng.int_inclusive(0, library.len() as u64 - 1) as usize;
        MaterialSpec::MerlMix {
            table_id,
            w: rng.unit(),
        }
    } else {
        let mut p = [0.0; 8];
        p.iter_mut().for_each(|v| *v = rng.unit());
        MaterialSpec::Disney(DisneyParams::from_array(p))
    };
    let material = cfg.material_override.unwrap_or(sampled);

    let mut normals = vec![normal];
    let mut albedos = vec![sample_albedo(cfg, &mut rng)];
    let mut ground_truth = normal;
    let discontinuity = rng.bernoulli(cfg.p_discontinuity);
    if discontinuity {
        let t = rng.int_inclusive(2, 3) as usize;
        // antipodal-ish sub-normals have no meaningful mean; redraw them
        loop {
            normals.truncate(1);
            albedos.truncate(1);
            for _ in 1..t {
                normals.push(pixel::hemisphere(&mut rng));
                albedos.push(sample_albedo(cfg, &mut rng));
            }
            let sum = normals.iter().fold(Vec3::ZERO, |acc, n| acc + n.vec());
            if let Some(mean) = (sum / t as f64).normalized().filter(|_| sum.norm() / t as f64 > 1e-3) {
                ground_truth = mean;
                break;
            }
        }
    }

    let effects = sample_pixel_effects(&mut rng, &cfg.effects());
    let flags = RecordFlags {
        shadowed: !effects.wall.is_empty(),
        reflections: effects.reflections.len(),
        ambient: effects.ambient_factor.is_some(),
        discontinuity,
        merl: material.is_merl(),
    };
    (
        RecordDraw {
            normals,
            albedos,
            ground_truth,
            lights,
            material,
            effects,
            flags,
        },
        rng,
    )
}

/// One attempt at record `index`: sample, shade, build the map and apply the
/// discard rule.
pub fn sample_attempt(
    cfg: &GenConfig,
    library: &MerlLibrary,
    index: u64,
    retry: u64,
) -> Result<(Outcome, RecordFlags), GenError> {
    let (draw, mut rng) = draw_record(cfg, library, index, retry);
    let material = draw.material.resolve(library)?;
    let fx = cfg.effects();
    let samples = shade_pixel(
        material,
        &draw.normals,
        &draw.albedos,
        &draw.effects,
        &draw.lights,
        fx.noise.as_ref(),
        fx.quantize,
        &mut rng,
    );
    let map = build_map(&samples, cfg.grid)?;
    let outcome = if (map.max_rgb() as f64) < cfg.discard_threshold {
        Outcome::Discarded
    } else {
        Outcome::Record(TrainingRecord {
            map,
            normal: draw.ground_truth,
        })
    };
    Ok((outcome, draw.flags))
}

/// First attempt of record `index`; `Discarded` is a normal outcome.
pub fn sample_record(cfg: &GenConfig, library: &MerlLibrary, index: u64) -> Result<Outcome, GenError> {
    cfg.validate()?;
    Ok(sample_attempt(cfg, library, index, 0)?.0)
}

/// Runs attempts for `index` until one is kept. Returns the record and the
/// flags of every attempt made.
pub fn sample_until_kept(
    cfg: &GenConfig,
    library: &MerlLibrary,
    index: u64,
) -> Result<(TrainingRecord, Vec<RecordFlags>), GenError> {
    let mut attempts = Vec::with_capacity(1);
    for retry in 0..MAX_RETRIES {
        let (outcome, flags) = sample_attempt(cfg, library, index, retry)?;
        attempts.push(flags);
        if let Outcome::Record(rec) = outcome {
            return Ok((rec, attempts));
        }
    }
    Err(GenError::TooManyDiscards { index })
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct GenStats {
    pub attempts: u64,
    pub generated: u64,
    pub discarded: u64,
    pub shadowed: u64,
    pub with_reflections: u64,
    pub ambient: u64,
    pub discontinuity: u64,
    pub merl: u64,
    pub elapsed_secs: f64,
}

impl GenStats {
    fn add(&mut self, f: &RecordFlags) {
        self.attempts += 1;
        self.shadowed += f.shadowed as u64;
        self.with_reflections += (f.reflections > 0) as u64;
        self.ambient += f.ambient as u64;
        self.discontinuity += f.discontinuity as u64;
        self.merl += f.merl as u64;
    }

    fn frac(&self, n: u64) -> f64 {
        if self.attempts == 0 {
            0.0
        } else {
            n as f64 / self.attempts as f64
        }
    }

    /// Fractions are over all attempts, discarded ones included.
    pub fn shadowed_fraction(&self) -> f64 {
        self.frac(self.shadowed)
    }
    pub fn empty_wall_fraction(&self) -> f64 {
        1.0 - self.shadowed_fraction()
    }
    pub fn reflection_fraction(&self) -> f64 {
        self.frac(self.with_reflections)
    }
    pub fn ambient_fraction(&self) -> f64 {
        self.frac(self.ambient)
    }
    pub fn discontinuity_fraction(&self) -> f64 {
        self.frac(self.discontinuity)
    }
    pub fn merl_fraction(&self) -> f64 {
        self.frac(self.merl)
    }
    pub fn discard_fraction(&self) -> f64 {
        self.frac(self.discarded)
    }

    pub fn records_per_second(&self) -> f64 {
        if self.elapsed_secs > 0.0 {
            self.generated as f64 / self.elapsed_secs
        } else {
            0.0
        }
    }
}

/// Generates `count` kept records into `sink`, in index order, using a pool
/// of `workers` threads. Output bytes do not depend on `workers`.
pub fn generate<W: Write>(
    cfg: &GenConfig,
    library: &MerlLibrary,
    count: u64,
    workers: usize,
    sink: &mut DatasetWriter<W>,
) -> Result<GenStats, GenError> {
    cfg.validate()?;
    if count == 0 {
        return Err(GenError::ConfigInvalid("record count must be at least 1".into()));
    }
    if sink.d() != cfg.grid {
        return Err(GenError::ConfigInvalid(format!(
            "dataset grid {} differs from config grid {}",
            sink.d(),
            cfg.grid
        )));
    }
    if library.is_empty() && cfg.merl_fraction > 0.0 && cfg.material_override.is_none() {
        log::warn!("no MERL tables loaded; generating Disney materials only");
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .expect("failed to start worker pool");

    let start = Instant::now();
    let mut stats = GenStats::default();
    let mut next = 0u64;
    while next < count {
        let end = (next + BATCH as u64).min(count);
        let batch: Vec<_> = pool.install(|| {
            (next..end)
                .into_par_iter()
                .map(|i| sample_until_kept(cfg, library, i))
                .collect()
        });
        for result in batch {
            let (rec, attempts) = result?;
            for f in &attempts {
                stats.add(f);
            }
            stats.discarded += attempts.len() as u64 - 1;
            stats.generated += 1;
            sink.write_record(&rec)?;
        }
        next = end;
    }
    stats.elapsed_secs = start.elapsed().as_secs_f64();
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_and_index_is_bit_identical() {
        let cfg = GenConfig::preset(Preset::Sparse);
        let lib = MerlLibrary::default();
        let a = sample_record(&cfg, &lib, 17).unwrap();
        let b = sample_record(&cfg, &lib, 17).unwrap();
        assert_eq!(a, b);
        let c = sample_record(&cfg, &lib, 18).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn tiny_albedo_is_discarded() {
        let mut cfg = GenConfig::preset(Preset::Sparse).without_effects();
        cfg.albedo_override = Some(Rgb::splat(1e-6));
        let out = sample_record(&cfg, &MerlLibrary::default(), 0).unwrap();
        assert!(out.is_discarded());
    }

    #[test]
    fn zero_count_is_rejected() {
        let cfg = GenConfig::preset(Preset::Sparse);
        let mut w = DatasetWriter::new(Vec::new(), 32, 0).unwrap();
        assert!(matches!(
            generate(&cfg, &MerlLibrary::default(), 0, 1, &mut w),
            Err(GenError::ConfigInvalid(_))
        ));
    }

    #[test]
    fn discontinuity_truth_is_mean_normal() {
        let mut cfg = GenConfig::preset(Preset::Sparse);
        cfg.p_discontinuity = 1.0;
        let lib = MerlLibrary::default();
        for i in 0..50 {
            let (draw, _) = draw_record(&cfg, &lib, i, 0);
            assert!(draw.normals.len() == 2 || draw.normals.len() == 3);
            let sum = draw.normals.iter().fold(Vec3::ZERO, |a, n| a + n.vec());
            let mean = sum.normalized().unwrap();
            assert!((mean.vec() - draw.ground_truth.vec()).norm() < 1e-12);
        }
    }
}
