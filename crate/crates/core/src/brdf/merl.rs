//! Reader and nearest-bin lookup for MERL measured BRDF tables.
//!
//! File layout: three little-endian `i32` dimensions `(90, 90, 180)`
//! followed by `3 * 90 * 90 * 180` little-endian `f64` values, one full block
//! per channel in R, G, B order. Within a block the index is
//! `phi_d + 180 * (theta_d + 90 * theta_h)`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::io::{self, Read, Write};

use crate::brdf::BrdfError;
use crate::geom::{Direction, Rgb, Vec3};

pub const THETA_H_BINS: usize = 90;
pub const THETA_D_BINS: usize = 90;
pub const PHI_D_BINS: usize = 180;
pub const BINS_PER_CHANNEL: usize = THETA_H_BINS * THETA_D_BINS * PHI_D_BINS;

/// Per-channel scale applied at lookup time.
pub const CHANNEL_SCALE: [f64; 3] = [1.0 / 1500.0, 1.15 / 1500.0, 1.66 / 1500.0];

#[derive(Clone)]
pub struct MerlTable {
    name: String,
    // channel-major, unscaled, exactly as stored on disk
    data: Vec<f64>,
}

impl std::fmt::Debug for MerlTable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MerlTable")
            .field("name", &self.name)
            .field("entries", &self.data.len())
            .finish()
    }
}

/// Rusinkiewicz half/difference angles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfDiff {
    pub theta_h: f64,
    pub theta_d: f64,
    pub phi_d: f64,
}

/// Bin coordinates inside one channel block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MerlBin {
    pub theta_h: usize,
    pub theta_d: usize,
    pub phi_d: usize,
}

impl MerlBin {
    #[inline]
    pub fn flat(self) -> usize {
        self.phi_d + PHI_D_BINS * (self.theta_d + THETA_D_BINS * self.theta_h)
    }
}

impl MerlTable {
    /// Wraps raw channel-major values. `data` must hold `3 * BINS_PER_CHANNEL`
    /// entries.
    pub fn from_raw(name: impl Into<String>, data: Vec<f64>) -> Result<Self, BrdfError> {
        if data.len() != 3 * BINS_PER_CHANNEL {
            return Err(BrdfError::TruncatedFile {
                expected: 3 * BINS_PER_CHANNEL,
                found: data.len(),
            });
        }
        Ok(MerlTable {
            name: name.into(),
            data,
        })
    }

    pub fn load(name: impl Into<String>, mut source: impl Read) -> Result<Self, BrdfError> {
        let mut header = [0u8; 12];
        source.read_exact(&mut header).map_err(|e| match e.kind() {
            io::ErrorKind::UnexpectedEof => BrdfError::TruncatedFile {
                expected: 3 * BINS_PER_CHANNEL,
                found: 0,
            },
            _ => BrdfError::Io(e),
        })?;
        let dims = [0, 1, 2].map(|i| {
            i32::from_le_bytes(header[4 * i..4 * i + 4].try_into().unwrap())
        });
        if dims != [THETA_H_BINS as i32, THETA_D_BINS as i32, PHI_D_BINS as i32] {
            return Err(BrdfError::DimensionMismatch(dims));
        }

        let mut bytes = Vec::with_capacity(3 * BINS_PER_CHANNEL * 8);
        source
            .take((3 * BINS_PER_CHANNEL * 8) as u64)
            .read_to_end(&mut bytes)?;
        if bytes.len() < 3 * BINS_PER_CHANNEL * 8 {
            return Err(BrdfError::TruncatedFile {
                expected: 3 * BINS_PER_CHANNEL,
                found: bytes.len() / 8,
            });
        }
        let data = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Ok(MerlTable {
            name: name.into(),
            data,
        })
    }

    pub fn load_file(path: impl AsRef<std::path::Path>) -> Result<Self, BrdfError> {
        let path = path.as_ref();
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let file = std::fs::File::open(path)?;
        Self::load(name, io::BufReader::new(file))
    }

    pub fn write(&self, mut sink: impl Write) -> io::Result<()> {
        for d in [THETA_H_BINS, THETA_D_BINS, PHI_D_BINS] {
            sink.write_all(&(d as i32).to_le_bytes())?;
        }
        for v in &self.data {
            sink.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn entries_per_channel(&self) -> usize {
        BINS_PER_CHANNEL
    }

    /// Unscaled stored value.
    pub fn raw(&self, channel: usize, bin: MerlBin) -> f64 {
        self.data[channel * BINS_PER_CHANNEL + bin.flat()]
    }

    /// Scaled reflectance of one bin; invalid (negative) bins read as zero.
    #[inline]
    pub fn lookup_bin(&self, bin: MerlBin) -> Rgb {
        let i = bin.flat();
        let c = |k: usize| (self.data[k * BINS_PER_CHANNEL + i] * CHANNEL_SCALE[k]).max(0.0);
        Rgb::new(c(0), c(1), c(2))
    }

    pub fn lookup(&self, angles: HalfDiff) -> Rgb {
        self.lookup_bin(bin_of(angles))
    }

    /// Count of negative (invalid) entries per channel.
    pub fn invalid_counts(&self) -> [usize; 3] {
        [0, 1, 2].map(|c| {
            self.data[c * BINS_PER_CHANNEL..(c + 1) * BINS_PER_CHANNEL]
                .iter()
                .filter(|v| **v < 0.0)
                .count()
        })
    }

    /// Mean scaled value over valid bins, per channel.
    pub fn mean_reflectance(&self) -> Rgb {
        let m = [0, 1, 2].map(|c| {
            let (sum, n) = self.data[c * BINS_PER_CHANNEL..(c + 1) * BINS_PER_CHANNEL]
                .iter()
                .filter(|v| **v >= 0.0)
                .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
            if n == 0 {
                0.0
            } else {
                sum / n as f64 * CHANNEL_SCALE[c]
            }
        });
        Rgb::from_array(m)
    }
}

#[inline]
fn theta_half_index(theta_h: f64) -> usize {
    if theta_h <= 0.0 {
        return 0;
    }
    // square-root warp: bin k covers theta_h around (k/90)^2 * 90 degrees
    let deg = theta_h / FRAC_PI_2 * THETA_H_BINS as f64;
    let idx = (deg * THETA_H_BINS as f64).sqrt() as usize;
    idx.min(THETA_H_BINS - 1)
}

#[inline]
fn theta_diff_index(theta_d: f64) -> usize {
    if theta_d <= 0.0 {
        return 0;
    }
    ((theta_d / FRAC_PI_2 * THETA_D_BINS as f64) as usize).min(THETA_D_BINS - 1)
}

#[inline]
fn phi_diff_index(phi_d: f64) -> usize {
    // reciprocity: phi_d and phi_d + pi share a bin
    let mut p = phi_d % PI;
    if p < 0.0 {
        p += PI;
    }
    ((p / PI * PHI_D_BINS as f64) as usize).min(PHI_D_BINS - 1)
}

/// Maps half/difference angles to their nearest table bin.
#[inline]
pub fn bin_of(a: HalfDiff) -> MerlBin {
    MerlBin {
        theta_h: theta_half_index(a.theta_h),
        theta_d: theta_diff_index(a.theta_d),
        phi_d: phi_diff_index(a.phi_d),
    }
}

/// Orthonormal tangent frame around `n` (Frisvad/Duff construction).
#[inline]
fn tangent_frame(n: Direction) -> (Vec3, Vec3) {
    let n = n.vec();
    let sign = 1.0f64.copysign(n.z);
    let a = -1.0 / (sign + n.z);
    let b = n.x * n.y * a;
    let t = Vec3::new(1.0 + sign * n.x * n.x * a, sign * b, -sign * n.x);
    let bt = Vec3::new(b, sign + n.y * n.y * a, -n.y);
    (t, bt)
}

#[inline]
fn rotate_z(v: Vec3, angle: f64) -> Vec3 {
    let (s, c) = angle.sin_cos();
    Vec3::new(c * v.x - s * v.y, s * v.x + c * v.y, v.z)
}

#[inline]
fn rotate_y(v: Vec3, angle: f64) -> Vec3 {
    let (s, c) = angle.sin_cos();
    Vec3::new(c * v.x + s * v.z, v.y, -s * v.x + c * v.z)
}

/// Half/difference angles of `(l, v)` in the local frame of `n`.
pub fn half_diff_angles(n: Direction, l: Direction, v: Direction) -> HalfDiff {
    let (t, bt) = tangent_frame(n);
    let to_local = |d: Direction| Vec3::new(d.vec().dot(t), d.vec().dot(bt), d.vec().dot(n.vec()));
    let wi = to_local(l);
    let wo = to_local(v);
    let h = (wi + wo).normalized().map(|h| h.vec()).unwrap_or(Vec3::new(0.0, 0.0, 1.0));
    let theta_h = h.z.clamp(-1.0, 1.0).acos();
    let phi_h = h.y.atan2(h.x);
    let diff = rotate_y(rotate_z(wi, -phi_h), -theta_h);
    let theta_d = (diff.z / diff.norm()).clamp(-1.0, 1.0).acos();
    let phi_d = diff.y.atan2(diff.x);
    HalfDiff {
        theta_h,
        theta_d,
        phi_d,
    }
}

/// Cosine-weighted MERL reflectance; zero when `n·l ≤ 0` or `n·v ≤ 0`.
pub fn eval_merl(table: &MerlTable, n: Direction, l: Direction, v: Direction) -> Rgb {
    let n_dot_l = n.dot(l);
    if n_dot_l <= 0.0 || n.dot(v) <= 0.0 {
        return Rgb::ZERO;
    }
    table.lookup(half_diff_angles(n, l, v)) * n_dot_l
}
