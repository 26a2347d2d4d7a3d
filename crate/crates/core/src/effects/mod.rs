//! Per-pixel approximations of global illumination and sensor effects.

mod intensity;
mod reflect;
mod shadow;

pub use intensity::{
    compose_intensity, compose_intensity_with, quantize16, quantize16_scalar, NoiseDraws,
    NoiseModel, SATURATION,
};
pub use reflect::{
    sample_reflections, self_reflection, total_reflectance, PixelShader, ReflectionSet, Reflector,
    REFLECTION_CANDIDATES,
};
pub use shadow::{sample_shadow_wall, ShadowWall, WallModel};
