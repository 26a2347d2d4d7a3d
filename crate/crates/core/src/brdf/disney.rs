//! Isotropic Disney principled BRDF without the subsurface lobe.
//!
//! Follows Burley's reference shader: a retro-reflective diffuse term, a
//! sheen term, a GTR2 specular lobe with separable Smith-GGX shadowing, and a
//! GTR1 clearcoat lobe with a fixed IOR of 1.5. The albedo is taken as linear
//! color (no gamma decode).

use std::f64::consts::PI;

use crate::geom::{Direction, Rgb};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DisneyParams {
    pub metallic: f64,
    pub specular: f64,
    pub roughness: f64,
    pub specular_tint: f64,
    pub sheen: f64,
    pub sheen_tint: f64,
    pub clearcoat: f64,
    pub clearcoat_roughness: f64,
}

impl DisneyParams {
    pub const FIELD_NAMES: [&'static str; 8] = [
        "metallic",
        "specular",
        "roughness",
        "specularTint",
        "sheen",
        "sheenTint",
        "clearcoat",
        "clearcoatRoughness",
    ];

    pub fn from_array(a: [f64; 8]) -> Self {
        DisneyParams {
            metallic: a[0],
            specular: a[1],
            roughness: a[2],
            specular_tint: a[3],
            sheen: a[4],
            sheen_tint: a[5],
            clearcoat: a[6],
            clearcoat_roughness: a[7],
        }
    }

    pub fn to_array(&self) -> [f64; 8] {
        [
            self.metallic,
            self.specular,
            self.roughness,
            self.specular_tint,
            self.sheen,
            self.sheen_tint,
            self.clearcoat,
            self.clearcoat_roughness,
        ]
    }

    pub fn is_valid(&self) -> bool {
        self.to_array().iter().all(|v| (0.0..=1.0).contains(v))
    }
}

#[inline]
fn mix(a: f64, b: f64, t: f64) -> f64 {
    a * (1.0 - t) + b * t
}

#[inline]
fn mix_rgb(a: Rgb, b: Rgb, t: f64) -> Rgb {
    a * (1.0 - t) + b * t
}

#[inline]
fn schlick_weight(cos: f64) -> f64 {
    let m = (1.0 - cos).clamp(0.0, 1.0);
    let m2 = m * m;
    m2 * m2 * m
}

#[inline]
fn gtr1(n_dot_h: f64, a: f64) -> f64 {
    if a >= 1.0 {
        return 1.0 / PI;
    }
    let a2 = a * a;
    let t = 1.0 + (a2 - 1.0) * n_dot_h * n_dot_h;
    (a2 - 1.0) / (PI * a2.ln() * t)
}

#[inline]
fn gtr2(n_dot_h: f64, a: f64) -> f64 {
    let a2 = a * a;
    let t = 1.0 + (a2 - 1.0) * n_dot_h * n_dot_h;
    a2 / (PI * t * t)
}

#[inline]
fn smith_g_ggx(n_dot_v: f64, alpha: f64) -> f64 {
    let a = alpha * alpha;
    let b = n_dot_v * n_dot_v;
    1.0 / (n_dot_v + (a + b - a * b).sqrt())
}

/// Cosine-weighted Disney reflectance: BRDF value times `max(n·l, 0)`.
///
/// Returns zero whenever `n·l ≤ 0` or `n·v ≤ 0`.
pub fn eval_disney(n: Direction, l: Direction, v: Direction, albedo: Rgb, p: &DisneyParams) -> Rgb {
    let n_dot_l = n.dot(l);
    let n_dot_v = n.dot(v);
    if n_dot_l <= 0.0 || n_dot_v <= 0.0 {
        return Rgb::ZERO;
    }
    let h = match (l.vec() + v.vec()).normalized() {
        Some(h) => h,
        None => return Rgb::ZERO,
    };
    let n_dot_h = n.dot(h).clamp(-1.0, 1.0);
    let l_dot_h = l.dot(h).clamp(-1.0, 1.0);

    let lum = 0.3 * albedo.r + 0.6 * albedo.g + 0.1 * albedo.b;
    let tint = if lum > 0.0 { albedo / lum } else { Rgb::ONE };
    let spec0 = mix_rgb(
        mix_rgb(Rgb::ONE, tint, p.specular_tint) * (p.specular * 0.08),
        albedo,
        p.metallic,
    );
    let sheen_color = mix_rgb(Rgb::ONE, tint, p.sheen_tint);

    // diffuse with retro-reflection
    let fl = schlick_weight(n_dot_l);
    let fv = schlick_weight(n_dot_v);
    let fd90 = 0.5 + 2.0 * l_dot_h * l_dot_h * p.roughness;
    let fd = mix(1.0, fd90, fl) * mix(1.0, fd90, fv);

    // specular
    let alpha = (p.roughness * p.roughness).max(0.001);
    let ds = gtr2(n_dot_h, alpha);
    let fh = schlick_weight(l_dot_h);
    let fs = mix_rgb(spec0, Rgb::ONE, fh);
    let gs = smith_g_ggx(n_dot_l, alpha) * smith_g_ggx(n_dot_v, alpha);

    let f_sheen = sheen_color * (fh * p.sheen);

    // clearcoat, IOR 1.5 -> F0 = 0.04
    let dr = gtr1(n_dot_h, mix(0.1, 0.001, 1.0 - p.clearcoat_roughness));
    let fr = mix(0.04, 1.0, fh);
    let gr = smith_g_ggx(n_dot_l, 0.25) * smith_g_ggx(n_dot_v, 0.25);

    let diffuse = (albedo * (fd / PI) + f_sheen) * (1.0 - p.metallic);
    let brdf = diffuse + fs * (gs * ds) + Rgb::splat(0.25 * p.clearcoat * gr * fr * dr);
    brdf * n_dot_l
}
