//! The per-pixel shading pipeline shared by the record generator and the
//! sphere renderer.

use std::f64::consts::FRAC_PI_2;

use crate::brdf::Material;
use crate::effects::{
    compose_intensity_with, sample_reflections, sample_shadow_wall, NoiseDraws, NoiseModel,
    PixelShader, ReflectionSet, ShadowWall, WallModel,
};
use crate::geom::{Direction, Rgb, VIEW};
use crate::obsmap::LightSample;
use crate::rng::RandomStream;

/// Which effects are sampled for a pixel, and how.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectsConfig {
    pub wall: WallModel,
    pub reflections: bool,
    pub p_ambient: f64,
    pub ambient_max: f64,
    pub noise: Option<NoiseModel>,
    pub quantize: bool,
}

impl EffectsConfig {
    /// No shadows, reflections, ambient, noise or quantization.
    pub fn off() -> Self {
        EffectsConfig {
            wall: WallModel {
                p_empty: 1.0,
                ..WallModel::default()
            },
            reflections: false,
            p_ambient: 0.0,
            ambient_max: 0.0,
            noise: None,
            quantize: false,
        }
    }
}

/// Sampled per-pixel effect state.
#[derive(Debug, Clone, PartialEq)]
pub struct PixelEffects {
    pub wall: ShadowWall,
    pub reflections: ReflectionSet,
    /// Ambient factor `u`; the ambient color is `mean_k(ρ_k N_k·V₀) · u`.
    pub ambient_factor: Option<f64>,
}

impl PixelEffects {
    pub fn none(knots: usize) -> Self {
        PixelEffects {
            wall: ShadowWall::empty(knots),
            reflections: ReflectionSet::empty(),
            ambient_factor: None,
        }
    }
}

pub fn sample_pixel_effects(rng: &mut RandomStream, cfg: &EffectsConfig) -> PixelEffects {
    let wall = sample_shadow_wall(rng, &cfg.wall);
    let reflections = if cfg.reflections {
        sample_reflections(rng, &wall)
    } else {
        ReflectionSet::empty()
    };
    let ambient_factor = rng
        .bernoulli(cfg.p_ambient)
        .then(|| rng.uniform(0.0, cfg.ambient_max));
    PixelEffects {
        wall,
        reflections,
        ambient_factor,
    }
}

/// Ambient color shared by every light of the pixel.
pub fn ambient_color(normals: &[Direction], albedos: &[Rgb], factor: f64) -> Rgb {
    let sum = normals
        .iter()
        .zip(albedos)
        .fold(Rgb::ZERO, |acc, (n, rho)| acc + *rho * n.dot(VIEW).max(0.0));
    sum * (factor / normals.len() as f64)
}

/// A light as seen by the sensor: direction and per-channel brightness.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Light {
    pub direction: Direction,
    pub brightness: Rgb,
}

/// Shades every light for one pixel. Noise draws come from `rng` in light
/// order. Intensities are rounded to `f32`, the precision images and
/// datasets are stored at.
#[allow(clippy::too_many_arguments)]
pub fn shade_pixel(
    material: Material<'_>,
    normals: &[Direction],
    albedos: &[Rgb],
    effects: &PixelEffects,
    lights: &[Light],
    noise: Option<&NoiseModel>,
    quantize: bool,
    rng: &mut RandomStream,
) -> Vec<LightSample> {
    let shader = PixelShader::new(normals, albedos, &effects.wall, &effects.reflections, material);
    let ambient = effects
        .ambient_factor
        .map_or(Rgb::ZERO, |u| ambient_color(normals, albedos, u));
    lights
        .iter()
        .map(|light| {
            let r_t = shader.reflectance(light.direction);
            let draws = noise.map_or(NoiseDraws::IDENTITY, |m| m.sample(rng));
            let i = compose_intensity_with(r_t, ambient, light.brightness, &draws, quantize);
            LightSample {
                direction: light.direction,
                brightness: light.brightness,
                intensity: i.map(|c| c as f32 as f64),
            }
        })
        .collect()
}

/// Uniform upper-hemisphere direction.
pub(crate) fn hemisphere(rng: &mut RandomStream) -> Direction {
    crate::geom::sample_hemisphere_uniform(rng, FRAC_PI_2)
}
