//! Per-pixel observation maps from image stacks, and prediction through an
//! external normal regressor with z-rotation test-time augmentation.

use std::f64::consts::TAU;
use std::fs;
use std::io::{BufReader, BufWriter};
use std::path::PathBuf;
use std::process::Command;
use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;

use crate::datagen::DatasetWriter;
use crate::geom::{rotate_about_z, Direction, Vec3};
use crate::obsmap::{build_map, rotated_variant, LightSample, ObservationMap};

use super::{ImageStack, NormalMap, PstereoError};

/// Pixels per predictor call.
pub const PREDICT_CHUNK: usize = 4096;

fn samples_at(stack: &ImageStack, row: usize, col: usize) -> Result<Vec<LightSample>, PstereoError> {
    if !stack.in_mask(row, col) {
        return Err(PstereoError::OutsideMask { row, col });
    }
    Ok(stack
        .lights()
        .iter()
        .enumerate()
        .map(|(j, l)| LightSample {
            direction: l.direction,
            brightness: l.brightness,
            intensity: stack.pixel(j, row, col),
        })
        .collect())
}

pub fn extract_map(stack: &ImageStack, (row, col): (usize, usize), d: usize) -> Result<ObservationMap, PstereoError> {
    Ok(build_map(&samples_at(stack, row, col)?, d)?)
}

/// [`extract_map`] with the light configuration rotated about z by `theta`.
pub fn extract_rotated(
    stack: &ImageStack,
    (row, col): (usize, usize),
    d: usize,
    theta: f64,
) -> Result<ObservationMap, PstereoError> {
    Ok(rotated_variant(&samples_at(stack, row, col)?, theta, d)?)
}

pub fn extract_maps(stack: &ImageStack, pixels: &[(usize, usize)], d: usize) -> Result<Vec<ObservationMap>, PstereoError> {
    pixels.par_iter().map(|&p| extract_map(stack, p, d)).collect()
}

/// A batch regressor from observation maps to normals. `None` marks a map
/// the predictor declined to label.
pub trait NormalPredictor {
    fn predict(&mut self, maps: &[ObservationMap]) -> Result<Vec<Option<Direction>>, PstereoError>;
}

impl<F> NormalPredictor for F
where
    F: FnMut(&[ObservationMap]) -> Result<Vec<Option<Direction>>, PstereoError>,
{
    fn predict(&mut self, maps: &[ObservationMap]) -> Result<Vec<Option<Direction>>, PstereoError> {
        self(maps)
    }
}

/// Runs `program args.. <input.pxom> <output.pxnm>` per batch. The input
/// holds the maps with zero normals; the output must be a 1×N normal map.
#[derive(Debug, Clone)]
pub struct SubprocessPredictor {
    pub program: PathBuf,
    pub args: Vec<String>,
    pub work_dir: PathBuf,
}

static CALLS: AtomicU64 = AtomicU64::new(0);

impl SubprocessPredictor {
    pub fn new(program: impl Into<PathBuf>, args: Vec<String>) -> Self {
        SubprocessPredictor {
            program: program.into(),
            args,
            work_dir: std::env::temp_dir(),
        }
    }

    fn run(&self, maps: &[ObservationMap], input: &PathBuf, output: &PathBuf) -> Result<NormalMap, PstereoError> {
        let fail = |m: String| PstereoError::PredictorFailure(m);
        let d = maps.first().map_or(0, ObservationMap::d);
        let mut w = DatasetWriter::new(BufWriter::new(fs::File::create(input)?), d, maps.len() as u64)?;
        for m in maps {
            w.write_parts(m, [0.0; 3])?;
        }
        w.finish()?;
        let out = Command::new(&self.program)
            .args(&self.args)
            .arg(input)
            .arg(output)
            .output()
            .map_err(|e| fail(format!("cannot run {}: {e}", self.program.display())))?;
        if !out.status.success() {
            let stderr = String::from_utf8_lossy(&out.stderr);
            return Err(fail(format!("{} exited with {}: {}", self.program.display(), out.status, stderr.trim())));
        }
        let file = fs::File::open(output).map_err(|e| fail(format!("no output from predictor: {e}")))?;
        NormalMap::read(BufReader::new(file)).map_err(|e| fail(format!("unreadable predictor output: {e}")))
    }
}

impl NormalPredictor for SubprocessPredictor {
    fn predict(&mut self, maps: &[ObservationMap]) -> Result<Vec<Option<Direction>>, PstereoError> {
        let tag = format!("pxmap-{}-{}", std::process::id(), CALLS.fetch_add(1, Ordering::Relaxed));
        let input = self.work_dir.join(format!("{tag}.pxom"));
        let output = self.work_dir.join(format!("{tag}.pxnm"));
        let result = self.run(maps, &input, &output);
        let _ = fs::remove_file(&input);
        let _ = fs::remove_file(&output);
        let nm = result?;
        if nm.height() != 1 || nm.width() != maps.len() {
            return Err(PstereoError::PredictorFailure(format!(
                "expected a 1x{} normal map, got {}x{}",
                maps.len(),
                nm.height(),
                nm.width()
            )));
        }
        Ok(nm.normals().to_vec())
    }
}

/// Light direction at the centre of cell `(u, v)`, or `None` for cells
/// outside the unit disk.
pub fn cell_direction(u: usize, v: usize, d: usize) -> Option<Direction> {
    let x = (2 * u + 1) as f64 / d as f64 - 1.0;
    let y = (2 * v + 1) as f64 / d as f64 - 1.0;
    let r2 = x * x + y * y;
    (r2 < 1.0).then(|| Direction::from_unit(Vec3::new(x, y, (1.0 - r2).sqrt())))
}

/// Lambertian least-squares fit on a map alone: every occupied cell with a
/// positive gray value acts as a light at the cell centre.
pub fn map_baseline(map: &ObservationMap) -> Option<Direction> {
    let d = map.d();
    let mut ata = nalgebra::Matrix3::zeros();
    let mut atb = nalgebra::Vector3::zeros();
    let mut used = 0;
    for u in 0..d {
        for v in 0..d {
            let g = map.gray(u, v) as f64;
            if g <= 0.0 {
                continue;
            }
            let Some(l) = cell_direction(u, v, d) else { continue };
            let l = nalgebra::Vector3::new(l.x(), l.y(), l.z());
            ata += l * l.transpose();
            atb += l * g;
            used += 1;
        }
    }
    if used < 3 {
        return None;
    }
    let x = ata.cholesky()?.solve(&atb);
    Vec3::new(x[0], x[1], x[2]).normalized()
}

/// [`map_baseline`] as a [`NormalPredictor`].
#[derive(Debug, Clone, Copy, Default)]
pub struct MapBaseline;

impl NormalPredictor for MapBaseline {
    fn predict(&mut self, maps: &[ObservationMap]) -> Result<Vec<Option<Direction>>, PstereoError> {
        Ok(maps.par_iter().map(map_baseline).collect())
    }
}

/// Predicts a normal for every masked pixel, averaging `k` predictions made
/// under light configurations rotated by `2πi/k` and rotated back.
pub fn k_rotation_predict(
    stack: &ImageStack,
    k: usize,
    d: usize,
    predictor: &mut dyn NormalPredictor,
) -> Result<NormalMap, PstereoError> {
    if k == 0 {
        return Err(PstereoError::PredictorFailure("K must be at least 1".into()));
    }
    let pixels: Vec<(usize, usize)> = stack.masked_pixels().collect();
    let mut sums = vec![Vec3::ZERO; pixels.len()];
    let mut hits = vec![0usize; pixels.len()];
    for i in 0..k {
        let theta = TAU * i as f64 / k as f64;
        for (chunk_no, chunk) in pixels.chunks(PREDICT_CHUNK).enumerate() {
            let maps = chunk
                .par_iter()
                .map(|&p| extract_rotated(stack, p, d, theta))
                .collect::<Result<Vec<_>, _>>()?;
            let preds = predictor.predict(&maps)?;
            if preds.len() != maps.len() {
                return Err(PstereoError::PredictorFailure(format!(
                    "predictor returned {} normals for {} maps",
                    preds.len(),
                    maps.len()
                )));
            }
            let base = chunk_no * PREDICT_CHUNK;
            for (j, n) in preds.into_iter().enumerate() {
                if let Some(n) = n {
                    sums[base + j] = sums[base + j] + rotate_about_z(n, -theta).vec();
                    hits[base + j] += 1;
                }
            }
        }
    }
    let mut out = NormalMap::empty(stack.width(), stack.height());
    for ((&(r, c), s), h) in pixels.iter().zip(&sums).zip(&hits) {
        if *h > 0 {
            out.set(r, c, s.normalized());
        }
    }
    Ok(out)
}
