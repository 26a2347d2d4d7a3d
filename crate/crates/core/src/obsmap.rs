//! Observation maps: a pixel's intensities under every light, scattered onto
//! a `d×d` grid indexed by the light's `(x, y)` components.
//!
//! Layout is row-major over `(u, v)` where `u` comes from the light's x
//! component, with the 4 channels interleaved per cell: brightness-compensated
//! r, g, b followed by the max-normalized gray value.

use crate::geom::{rotate_about_z, Direction, Rgb};

pub const CHANNELS: usize = 4;
pub const GRAY: usize = 3;
pub const DEFAULT_GRID: usize = 32;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum MapError {
    #[error("observation map needs at least one light sample")]
    EmptyInput,
    #[error("light brightness must be positive in every channel")]
    NonPositiveBrightness,
    #[error("grid side must be positive")]
    ZeroGrid,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LightSample {
    pub direction: Direction,
    pub brightness: Rgb,
    pub intensity: Rgb,
}

/// Equality compares the cell values only; occupancy is not serialized.
#[derive(Debug, Clone)]
pub struct ObservationMap {
    d: usize,
    grid: Vec<f32>,
    occupancy: Vec<bool>,
}

impl PartialEq for ObservationMap {
    fn eq(&self, other: &Self) -> bool {
        self.d == other.d && self.grid == other.grid
    }
}

/// Grid cell of light direction `l`: `⌊d(l+1)/2⌋` per axis, clamped into
/// `[0, d-1]` (the raw formula yields `d` at `l = 1`).
#[inline]
pub fn cell_of(l: Direction, d: usize) -> (usize, usize) {
    let idx = |c: f64| {
        let raw = (d as f64 * (c + 1.0) / 2.0).floor();
        (raw.max(0.0) as usize).min(d - 1)
    };
    (idx(l.x()), idx(l.y()))
}

impl ObservationMap {
    pub fn zeros(d: usize) -> Self {
        ObservationMap {
            d,
            grid: vec![0.0; d * d * CHANNELS],
            occupancy: vec![false; d * d],
        }
    }

    /// Rebuilds a map from stored values. Occupancy is inferred as any
    /// non-zero channel, which is the best a serialized grid can tell.
    pub fn from_grid(d: usize, grid: Vec<f32>) -> Self {
        assert_eq!(grid.len(), d * d * CHANNELS, "grid size mismatch");
        let occupancy = grid
            .chunks_exact(CHANNELS)
            .map(|c| c.iter().any(|v| *v != 0.0))
            .collect();
        ObservationMap { d, grid, occupancy }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn grid(&self) -> &[f32] {
        &self.grid
    }

    #[inline]
    fn offset(&self, u: usize, v: usize) -> usize {
        (u * self.d + v) * CHANNELS
    }

    pub fn value(&self, u: usize, v: usize, channel: usize) -> f32 {
        self.grid[self.offset(u, v) + channel]
    }

    pub fn gray(&self, u: usize, v: usize) -> f32 {
        self.value(u, v, GRAY)
    }

    pub fn rgb(&self, u: usize, v: usize) -> [f32; 3] {
        let o = self.offset(u, v);
        [self.grid[o], self.grid[o + 1], self.grid[o + 2]]
    }

    pub fn is_occupied(&self, u: usize, v: usize) -> bool {
        self.occupancy[u * self.d + v]
    }

    pub fn occupied_count(&self) -> usize {
        self.occupancy.iter().filter(|o| **o).count()
    }

    /// Largest rgb value over all cells.
    pub fn max_rgb(&self) -> f32 {
        self.grid
            .chunks_exact(CHANNELS)
            .flat_map(|c| c[..3].iter().copied())
            .fold(0.0, f32::max)
    }

    pub fn max_gray(&self) -> f32 {
        self.grid
            .chunks_exact(CHANNELS)
            .map(|c| c[GRAY])
            .fold(0.0, f32::max)
    }
}

/// Builds the map from per-light samples.
///
/// Each sample contributes `i_c/φ_c` to the rgb channels and
/// `Σ_c i_c/φ_c` to the gray channel. When two lights fall into one cell the
/// later sample wins; the gray channel is then divided by its maximum over
/// the map. An all-dark input yields an all-zero gray channel.
pub fn build_map(samples: &[LightSample], d: usize) -> Result<ObservationMap, MapError> {
    build_map_with(samples, d, |l| l)
}

fn build_map_with(
    samples: &[LightSample],
    d: usize,
    transform: impl Fn(Direction) -> Direction,
) -> Result<ObservationMap, MapError> {
    if samples.is_empty() {
        return Err(MapError::EmptyInput);
    }
    if d == 0 {
        return Err(MapError::ZeroGrid);
    }
    if samples
        .iter()
        .any(|s| !(s.brightness.r > 0.0 && s.brightness.g > 0.0 && s.brightness.b > 0.0))
    {
        return Err(MapError::NonPositiveBrightness);
    }

    let mut map = ObservationMap::zeros(d);
    // later samples overwrite earlier ones in the same cell
    let mut owner: Vec<Option<Rgb>> = vec![None; d * d];
    for s in samples {
        let (u, v) = cell_of(transform(s.direction), d);
        owner[u * d + v] = Some(s.intensity.zip(s.brightness, |i, phi| i / phi));
    }
    let max_gray = owner.iter().flatten().map(|c| c.sum()).fold(0.0, f64::max);
    for (k, c) in owner.iter().enumerate() {
        let Some(c) = c else { continue };
        let o = k * CHANNELS;
        map.grid[o] = c.r as f32;
        map.grid[o + 1] = c.g as f32;
        map.grid[o + 2] = c.b as f32;
        map.grid[o + GRAY] = if max_gray > 0.0 {
            (c.sum() / max_gray) as f32
        } else {
            0.0
        };
        map.occupancy[k] = true;
    }
    Ok(map)
}

/// [`build_map`] with every light direction rotated about z by `theta`.
pub fn rotated_variant(samples: &[LightSample], theta: f64, d: usize) -> Result<ObservationMap, MapError> {
    build_map_with(samples, d, |l| rotate_about_z(l, theta))
}
