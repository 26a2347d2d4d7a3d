use std::f64::consts::TAU;

use crate::geom::Direction;
use crate::rng::RandomStream;

/// Circular occluder of radius 1 around the pixel, described by wall heights
/// at equally spaced azimuths and linearly interpolated in between.
#[derive(Debug, Clone, PartialEq)]
pub struct ShadowWall {
    heights: Vec<f64>,
}

impl ShadowWall {
    pub const DEFAULT_KNOTS: usize = 20;

    /// Panics if `heights` is empty or holds a negative or non-finite value.
    pub fn new(heights: Vec<f64>) -> Self {
        assert!(!heights.is_empty(), "a wall needs at least one knot");
        assert!(
            heights.iter().all(|h| h.is_finite() && *h >= 0.0),
            "wall heights must be finite and non-negative"
        );
        ShadowWall { heights }
    }

    pub fn empty(knots: usize) -> Self {
        ShadowWall::new(vec![0.0; knots])
    }

    pub fn heights(&self) -> &[f64] {
        &self.heights
    }

    pub fn is_empty(&self) -> bool {
        self.heights.iter().all(|h| *h == 0.0)
    }

    /// Wall height at `azimuth` radians, periodic linear interpolation.
    pub fn height_at(&self, azimuth: f64) -> f64 {
        let k = self.heights.len();
        let pos = azimuth.rem_euclid(TAU) / TAU * k as f64;
        let i = (pos.floor() as usize).min(k - 1);
        let f = pos - i as f64;
        self.heights[i] * (1.0 - f) + self.heights[(i + 1) % k] * f
    }

    /// True when the ray from the wall center along `l` hits the wall.
    ///
    /// With horizontal extent `s = |l_xy|` the ray reaches radius 1 at height
    /// `l_z / s`, so it is blocked iff `l_z < s * h`. The boundary ray is
    /// unshaded and the zenith is never shaded.
    pub fn is_shaded(&self, l: Direction) -> bool {
        let s = l.x().hypot(l.y());
        if s == 0.0 {
            return false;
        }
        l.z() < s * self.height_at(l.azimuth())
    }

    /// Fraction of a regular `res`×`res` grid of upper-hemisphere directions
    /// (parameterized by the observation-map disk) that is shaded.
    pub fn shaded_fraction(&self, res: usize) -> f64 {
        let mut inside = 0usize;
        let mut shaded = 0usize;
        for i in 0..res {
            for j in 0..res {
                let x = (i as f64 + 0.5) / res as f64 * 2.0 - 1.0;
                let y = (j as f64 + 0.5) / res as f64 * 2.0 - 1.0;
                let r2 = x * x + y * y;
                if r2 >= 1.0 {
                    continue;
                }
                inside += 1;
                let l = Direction::from_unit(crate::geom::Vec3::new(x, y, (1.0 - r2).sqrt()));
                if self.is_shaded(l) {
                    shaded += 1;
                }
            }
        }
        shaded as f64 / inside.max(1) as f64
    }
}

/// Parameters of the random wall model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WallModel {
    /// Probability that the whole wall is flat (no shadows at all).
    pub p_empty: f64,
    /// Per-knot probability of being zeroed after sampling.
    pub p_zero_height: f64,
    /// Scale of the half-normal knot heights.
    pub sigma: f64,
    pub knots: usize,
}

impl Default for WallModel {
    fn default() -> Self {
        WallModel {
            p_empty: 0.25,
            p_zero_height: 0.25,
            sigma: 2.0,
            knots: ShadowWall::DEFAULT_KNOTS,
        }
    }
}

/// Draws a random wall. The empty-wall decision is taken first so that it
/// always consumes exactly one draw.
pub fn sample_shadow_wall(rng: &mut RandomStream, model: &WallModel) -> ShadowWall {
    if rng.bernoulli(model.p_empty) {
        return ShadowWall::empty(model.knots);
    }
    let heights = (0..model.knots)
        .map(|_| {
            let h = rng.normal(0.0, model.sigma).abs();
            if rng.bernoulli(model.p_zero_height) {
                0.0
            } else {
                h
            }
        })
        .collect();
    ShadowWall::new(heights)
}
