use std::fmt;
use std::str::FromStr;

use crate::brdf::MaterialSpec;
use crate::effects::{NoiseModel, ShadowWall, WallModel};
use crate::geom::Rgb;
use crate::obsmap::DEFAULT_GRID;

use super::GenError;

/// Number of lights drawn per record.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LightCount {
    /// Uniform integer in `[min, max]`, redrawn for every record.
    Uniform { min: u32, max: u32 },
    Fixed(u32),
}

impl fmt::Display for LightCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LightCount::Uniform { min, max } => write!(f, "{min}-{max}"),
            LightCount::Fixed(n) => write!(f, "{n}"),
        }
    }
}

impl FromStr for LightCount {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parse = |v: &str| v.trim().parse::<u32>().map_err(|e| format!("bad light count {s:?}: {e}"));
        match s.split_once('-') {
            Some((lo, hi)) => Ok(LightCount::Uniform {
                min: parse(lo)?,
                max: parse(hi)?,
            }),
            None => Ok(LightCount::Fixed(parse(s)?)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// 50-1000 lights up to 70 degrees from the view axis.
    Dense,
    /// Exactly 10 lights up to 45 degrees.
    Sparse,
}

impl FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dense" => Ok(Preset::Dense),
            "sparse" => Ok(Preset::Sparse),
            _ => Err(format!("unknown preset {s:?} (expected dense or sparse)")),
        }
    }
}

/// Every sampling hyperparameter of the generator.
#[derive(Debug, Clone, PartialEq)]
pub struct GenConfig {
    pub grid: usize,
    pub lights: LightCount,
    /// Largest light angle from the view axis, degrees.
    pub light_max_elevation_deg: f64,
    pub brightness: (f64, f64),
    pub merl_fraction: f64,
    /// Probability of a non-empty shadow wall.
    pub p_shadow: f64,
    pub p_zero_height: f64,
    pub wall_sigma: f64,
    pub wall_knots: usize,
    pub reflections: bool,
    pub p_ambient: f64,
    pub ambient_max: f64,
    pub p_discontinuity: f64,
    pub noise_enabled: bool,
    pub noise: NoiseModel,
    pub quantize: bool,
    pub discard_threshold: f64,
    pub seed: u64,
    /// Replaces the sampled material for every record.
    pub material_override: Option<MaterialSpec>,
    /// Replaces the sampled albedo of every sub-pixel.
    pub albedo_override: Option<Rgb>,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig::preset(Preset::Dense)
    }
}

impl GenConfig {
    pub fn preset(preset: Preset) -> Self {
        let (lights, elevation) = match preset {
            Preset::Dense => (LightCount::Uniform { min: 50, max: 1000 }, 70.0),
            Preset::Sparse => (LightCount::Fixed(10), 45.0),
        };
        GenConfig {
            grid: DEFAULT_GRID,
            lights,
            light_max_elevation_deg: elevation,
            brightness: (0.28, 3.2),
            merl_fraction: 0.25,
            p_shadow: 0.75,
            p_zero_height: 0.25,
            wall_sigma: 2.0,
            wall_knots: ShadowWall::DEFAULT_KNOTS,
            reflections: true,
            p_ambient: 0.75,
            ambient_max: 0.01,
            p_discontinuity: 0.15,
            noise_enabled: true,
            noise: NoiseModel::default(),
            quantize: true,
            discard_threshold: 1e-3,
            seed: 0,
            material_override: None,
            albedo_override: None,
        }
    }

    /// Turns off every effect, noise and quantization: records reduce to
    /// plain direct reflectance.
    pub fn without_effects(mut self) -> Self {
        self.p_shadow = 0.0;
        self.reflections = false;
        self.p_ambient = 0.0;
        self.p_discontinuity = 0.0;
        self.noise_enabled = false;
        self.quantize = false;
        self
    }

    pub fn wall_model(&self) -> WallModel {
        WallModel {
            p_empty: 1.0 - self.p_shadow,
            p_zero_height: self.p_zero_height,
            sigma: self.wall_sigma,
            knots: self.wall_knots,
        }
    }

    pub fn validate(&self) -> Result<(), GenError> {
        let bad = |msg: String| Err(GenError::ConfigInvalid(msg));
        for (name, p) in [
            ("merl_fraction", self.merl_fraction),
            ("p_shadow", self.p_shadow),
            ("p_zero_height", self.p_zero_height),
            ("p_ambient", self.p_ambient),
            ("p_discontinuity", self.p_discontinuity),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} = {p} is not a probability"));
            }
        }
        if self.grid == 0 {
            return bad("grid must be positive".into());
        }
        match self.lights {
            LightCount::Fixed(0) => return bad("light count must be positive".into()),
            LightCount::Uniform { min, max } if min == 0 || min > max => {
                return bad(format!("light range {min}-{max} is empty"))
            }
            _ => {}
        }
        if !(self.light_max_elevation_deg > 0.0 && self.light_max_elevation_deg <= 90.0) {
            return bad("light_max_elevation must lie in (0, 90] degrees".into());
        }
        let (lo, hi) = self.brightness;
        if !(lo > 0.0 && lo < hi && hi.is_finite()) {
            return bad(format!("brightness range [{lo}, {hi}] is invalid"));
        }
        if !(self.wall_sigma > 0.0) || self.wall_knots == 0 {
            return bad("wall_sigma and wall_knots must be positive".into());
        }
        if !(self.ambient_max >= 0.0) {
            return bad("ambient_max must be non-negative".into());
        }
        let n = &self.noise;
        if !(n.mult_uniform.0 < n.mult_uniform.1 && n.add_uniform.0 < n.add_uniform.1) {
            return bad("noise ranges must be non-degenerate".into());
        }
        if !(n.mult_gaussian_std >= 0.0 && n.add_gaussian_std >= 0.0) {
            return bad("noise deviations must be non-negative".into());
        }
        if !(self.discard_threshold > 0.0) {
            return bad("discard_threshold must be positive".into());
        }
        Ok(())
    }

    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), GenError> {
        let invalid = |e: String| GenError::ConfigInvalid(format!("{key}: {e}"));
        let f = |v: &str| v.parse::<f64>().map_err(|e| invalid(e.to_string()));
        let b = |v: &str| v.parse::<bool>().map_err(|e| invalid(e.to_string()));
        let range = |v: &str| -> Result<(f64, f64), GenError> {
            let (lo, hi) = v
                .split_once(',')
                .ok_or_else(|| invalid("expected `lo,hi`".into()))?;
            Ok((f(lo.trim())?, f(hi.trim())?))
        };
        match key {
            "preset" => {
                let seed = self.seed;
                *self = GenConfig::preset(value.parse().map_err(invalid)?);
                self.seed = seed;
            }
            "grid" | "d" => self.grid = value.parse().map_err(|e| invalid(format!("{e}")))?,
            "lights" => self.lights = value.parse().map_err(invalid)?,
            "light_max_elevation" => self.light_max_elevation_deg = f(value)?,
            "brightness" => self.brightness = range(value)?,
            "merl_fraction" => self.merl_fraction = f(value)?,
            "p_shadow" => self.p_shadow = f(value)?,
            "p_zero_height" => self.p_zero_height = f(value)?,
            "wall_sigma" => self.wall_sigma = f(value)?,
            "wall_knots" => self.wall_knots = value.parse().map_err(|e| invalid(format!("{e}")))?,
            "reflections" => self.reflections = b(value)?,
            "p_ambient" => self.p_ambient = f(value)?,
            "ambient_max" => self.ambient_max = f(value)?,
            "p_discontinuity" => self.p_discontinuity = f(value)?,
            "noise" => self.noise_enabled = b(value)?,
            "noise_mult_uniform" => self.noise.mult_uniform = range(value)?,
            "noise_mult_gaussian_std" => self.noise.mult_gaussian_std = f(value)?,
            "noise_add_uniform" => self.noise.add_uniform = range(value)?,
            "noise_add_gaussian_std" => self.noise.add_gaussian_std = f(value)?,
            "quantize" => self.quantize = b(value)?,
            "discard_threshold" => self.discard_threshold = f(value)?,
            "seed" => self.seed = value.parse().map_err(|e| invalid(format!("{e}")))?,
            _ => return Err(GenError::ConfigInvalid(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    /// Parses flat `key = value` text on top of `self`. Blank lines and
    /// `#` comments are ignored.
    pub fn apply_text(&mut self, text: &str) -> Result<(), GenError> {
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                GenError::ConfigInvalid(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            self.set(k.trim(), v.trim())?;
        }
        Ok(())
    }

    /// Key-value text that [`GenConfig::apply_text`] reads back to `self`
    /// (overrides excluded).
    pub fn to_text(&self) -> String {
        let n = &self.noise;
        format!(
            "grid = {}\nlights = {}\nlight_max_elevation = {}\nbrightness = {},{}\n\
             merl_fraction = {}\np_shadow = {}\np_zero_height = {}\nwall_sigma = {}\n\
             wall_knots = {}\nreflections = {}\np_ambient = {}\nambient_max = {}\n\
             p_discontinuity = {}\nnoise = {}\nnoise_mult_uniform = {},{}\n\
             noise_mult_gaussian_std = {}\nnoise_add_uniform = {},{}\n\
             noise_add_gaussian_std = {}\nquantize = {}\ndiscard_threshold = {}\nseed = {}\n",
            self.grid,
            self.lights,
            self.light_max_elevation_deg,
            self.brightness.0,
            self.brightness.1,
            self.merl_fraction,
            self.p_shadow,
            self.p_zero_height,
            self.wall_sigma,
            self.wall_knots,
            self.reflections,
            self.p_ambient,
            self.ambient_max,
            self.p_discontinuity,
            self.noise_enabled,
            n.mult_uniform.0,
            n.mult_uniform.1,
            n.mult_gaussian_std,
            n.add_uniform.0,
            n.add_uniform.1,
            n.add_gaussian_std,
            self.quantize,
            self.discard_threshold,
            self.seed,
        )
    }
}
