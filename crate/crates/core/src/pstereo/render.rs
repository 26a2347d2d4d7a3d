//! Orthographic per-pixel sphere rendering.

use rayon::prelude::*;

use crate::brdf::{MaterialSpec, MerlLibrary};
use crate::datagen::{sample_pixel_effects, shade_pixel, EffectsConfig, Light};
use crate::geom::{Direction, Rgb, Vec3};
use crate::rng::RandomStream;

use super::{ImageStack, NormalMap, PstereoError};

/// Geometric normal of pixel `(row, col)` on a sphere filling a
/// `resolution`² image, or `None` outside the disk. Pixel
/// `(resolution/2, resolution/2)` is the apex; image rows grow downwards
/// (towards -y).
pub fn sphere_normal(row: usize, col: usize, resolution: usize) -> Option<Direction> {
    let half = resolution as f64 / 2.0;
    let x = (col as f64 - half) / half;
    let y = (half - row as f64) / half;
    let r2 = x * x + y * y;
    if r2 >= 1.0 {
        return None;
    }
    Some(Direction::from_unit(Vec3::new(x, y, (1.0 - r2).sqrt())))
}

/// Renders a single-material sphere under `lights`.
///
/// Every pixel is shaded independently through the same pipeline as the
/// training-record generator, with effects drawn from a per-pixel stream
/// keyed by `seed` and the pixel index.
pub fn render_sphere(
    material: &MaterialSpec,
    library: &MerlLibrary,
    albedo: Rgb,
    lights: &[Light],
    resolution: usize,
    effects: &EffectsConfig,
    seed: u64,
) -> Result<(ImageStack, NormalMap), PstereoError> {
    if resolution < 8 {
        return Err(PstereoError::DimensionMismatch(format!(
            "sphere resolution {resolution} is below 8"
        )));
    }
    let material = material.resolve(library)?;
    let n_px = resolution * resolution;
    let shaded: Vec<Option<Vec<Rgb>>> = (0..n_px)
        .into_par_iter()
        .map(|p| {
            let normal = sphere_normal(p / resolution, p % resolution, resolution)?;
            let mut rng = RandomStream::new(seed, p as u64, 0);
            let fx = sample_pixel_effects(&mut rng, effects);
            let samples = shade_pixel(
                material,
                &[normal],
                &[albedo],
                &fx,
                lights,
                effects.noise.as_ref(),
                effects.quantize,
                &mut rng,
            );
            Some(samples.into_iter().map(|s| s.intensity).collect())
        })
        .collect();

    let mut images = vec![vec![0f32; n_px * 3]; lights.len()];
    for (p, px) in shaded.iter().enumerate() {
        if let Some(values) = px {
            for (j, v) in values.iter().enumerate() {
                images[j][p * 3] = v.r as f32;
                images[j][p * 3 + 1] = v.g as f32;
                images[j][p * 3 + 2] = v.b as f32;
            }
        }
    }
    let mask: Vec<bool> = shaded.iter().map(Option::is_some).collect();
    let normals = (0..n_px)
        .map(|p| sphere_normal(p / resolution, p % resolution, resolution))
        .collect();
    let stack = ImageStack::new(resolution, resolution, images, lights.to_vec(), mask)?;
    Ok((stack, NormalMap::from_vec(resolution, resolution, normals)))
}
