use crate::geom::Rgb;
use crate::rng::RandomStream;

const LEVELS: f64 = 65536.0;

/// Largest representable 16-bit level.
pub const SATURATION: f64 = 65535.0 / 65536.0;

/// 16-bit discretization with saturation: clamp to `[0, 65535/65536]`, then
/// floor to a multiple of `2⁻¹⁶`.
#[inline]
pub fn quantize16_scalar(x: f64) -> f64 {
    (x.clamp(0.0, SATURATION) * LEVELS).floor() / LEVELS
}

pub fn quantize16(x: Rgb) -> Rgb {
    x.map(quantize16_scalar)
}

/// Per-light, per-channel noise factors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseDraws {
    pub mult_uniform: Rgb,
    pub mult_gaussian: Rgb,
    pub add_uniform: Rgb,
    pub add_gaussian: Rgb,
}

impl NoiseDraws {
    pub const IDENTITY: NoiseDraws = NoiseDraws {
        mult_uniform: Rgb::ONE,
        mult_gaussian: Rgb::ONE,
        add_uniform: Rgb::ZERO,
        add_gaussian: Rgb::ZERO,
    };
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    /// Bounds of the multiplicative uniform factor.
    pub mult_uniform: (f64, f64),
    /// Std of the multiplicative Gaussian factor (mean 1).
    pub mult_gaussian_std: f64,
    /// Bounds of the additive uniform term.
    pub add_uniform: (f64, f64),
    /// Std of the additive Gaussian term (mean 0).
    pub add_gaussian_std: f64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel {
            mult_uniform: (0.95, 1.05),
            mult_gaussian_std: 1e-3,
            add_uniform: (-1e-4, 1e-4),
            add_gaussian_std: 1e-4,
        }
    }
}

impl NoiseModel {
    pub fn sample(&self, rng: &mut RandomStream) -> NoiseDraws {
        let mut ch = |f: &mut dyn FnMut(&mut RandomStream) -> f64| {
            let r = f(rng);
            let g = f(rng);
            let b = f(rng);
            Rgb::new(r, g, b)
        };
        let (mu_lo, mu_hi) = self.mult_uniform;
        let (au_lo, au_hi) = self.add_uniform;
        let mult_uniform = ch(&mut |r| r.uniform(mu_lo, mu_hi));
        let mult_gaussian = ch(&mut |r| r.normal(1.0, self.mult_gaussian_std));
        let add_uniform = ch(&mut |r| r.uniform(au_lo, au_hi));
        let add_gaussian = ch(&mut |r| r.normal(0.0, self.add_gaussian_std));
        NoiseDraws {
            mult_uniform,
            mult_gaussian,
            add_uniform,
            add_gaussian,
        }
    }
}

/// Sensor value of one light: `(r_T + a)·φ·n_MU·n_MG + n_AU + n_AG`, with
/// negatives clamped to zero and optional 16-bit quantization.
#[inline]
pub fn compose_intensity_with(
    reflectance: Rgb,
    ambient: Rgb,
    brightness: Rgb,
    noise: &NoiseDraws,
    quantize: bool,
) -> Rgb {
    let raw = (reflectance + ambient) * brightness * noise.mult_uniform * noise.mult_gaussian
        + noise.add_uniform
        + noise.add_gaussian;
    let raw = raw.map(|c| c.max(0.0));
    if quantize {
        quantize16(raw)
    } else {
        raw
    }
}

pub fn compose_intensity(reflectance: Rgb, ambient: Rgb, brightness: Rgb, noise: &NoiseDraws) -> Rgb {
    compose_intensity_with(reflectance, ambient, brightness, noise, true)
}

#[cfg(test)]
mod tests {
    use super::*;

    const STEP: f64 = 1.0 / 65536.0;

    #[test]
    fn quantize_examples() {
        assert_eq!(quantize16_scalar(0.5), 0.5);
        assert_eq!(quantize16_scalar(1.2), SATURATION);
        assert_eq!(quantize16_scalar(2f64.powi(-17)), 0.0);
        assert_eq!(quantize16_scalar(-0.3), 0.0);
    }

    #[test]
    fn compose_examples() {
        let id = NoiseDraws::IDENTITY;
        let out = compose_intensity(Rgb::splat(0.3), Rgb::ZERO, Rgb::ONE, &id);
        assert!((out.r - 0.3).abs() <= STEP && out.r <= 0.3);

        let out = compose_intensity(Rgb::splat(0.8), Rgb::ZERO, Rgb::splat(1.5), &id);
        assert_eq!(out, Rgb::splat(SATURATION));

        let out = compose_intensity(Rgb::ZERO, Rgb::new(0.01, 0.0, 0.0), Rgb::new(2.0, 1.0, 1.0), &id);
        assert!((out.r - 0.02).abs() <= STEP);
    }

    #[test]
    fn negative_noise_clamps() {
        let noise = NoiseDraws {
            add_uniform: Rgb::splat(-1e-4),
            ..NoiseDraws::IDENTITY
        };
        let out = compose_intensity_with(Rgb::ZERO, Rgb::ZERO, Rgb::ONE, &noise, false);
        assert_eq!(out, Rgb::ZERO);
    }

    #[test]
    fn noise_draws_respect_bounds() {
        let model = NoiseModel::default();
        let mut rng = RandomStream::new(2, 0, 0);
        for _ in 0..1000 {
            let d = model.sample(&mut rng);
            for c in d.mult_uniform.to_array() {
                assert!((0.95..1.05).contains(&c));
            }
            for c in d.add_uniform.to_array() {
                assert!((-1e-4..1e-4).contains(&c));
            }
        }
    }
}
