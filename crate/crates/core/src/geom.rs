//! Vector algebra shared by every stage: directions, colors, hemisphere
//! sampling and the angular error metric.

use std::f64::consts::{PI, TAU};
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use crate::rng::RandomStream;

/// Plain 3-vector, no normalization implied.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);

    #[inline]
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    #[inline]
    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    #[inline]
    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    /// Returns `None` for vectors too short to carry a direction.
    #[inline]
    pub fn normalized(self) -> Option<Direction> {
        let n = self.norm();
        if n > 1e-300 && n.is_finite() {
            Some(Direction(self / n))
        } else {
            None
        }
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    #[inline]
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vec3 {
    #[inline]
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    #[inline]
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    #[inline]
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    #[inline]
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Div<f64> for Vec3 {
    type Output = Vec3;
    #[inline]
    fn div(self, s: f64) -> Vec3 {
        Vec3::new(self.x / s, self.y / s, self.z / s)
    }
}

/// A unit 3-vector.
///
/// Construction goes through [`Direction::new`] (which normalizes) or
/// [`Vec3::normalized`]; the only way to skip normalization is
/// [`Direction::from_unit`], which is meant for compile-time constants and
/// values already known to be unit length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction(Vec3);

/// The orthographic viewing direction.
pub const VIEW: Direction = Direction(Vec3::new(0.0, 0.0, 1.0));

impl Direction {
    /// Normalizes `(x, y, z)`. Panics on a zero or non-finite vector.
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3::new(x, y, z)
            .normalized()
            .expect("direction must be a finite non-zero vector")
    }

    #[inline]
    pub const fn from_unit(v: Vec3) -> Self {
        Direction(v)
    }

    /// Builds a direction from a polar angle (measured from +z) and azimuth.
    pub fn from_spherical(polar: f64, azimuth: f64) -> Self {
        let (sp, cp) = polar.sin_cos();
        let (sa, ca) = azimuth.sin_cos();
        Direction(Vec3::new(sp * ca, sp * sa, cp))
    }

    #[inline]
    pub fn x(self) -> f64 {
        self.0.x
    }
    #[inline]
    pub fn y(self) -> f64 {
        self.0.y
    }
    #[inline]
    pub fn z(self) -> f64 {
        self.0.z
    }

    #[inline]
    pub fn vec(self) -> Vec3 {
        self.0
    }

    #[inline]
    pub fn dot(self, o: Direction) -> f64 {
        self.0.dot(o.0)
    }

    /// Azimuth in `[0, 2π)`.
    pub fn azimuth(self) -> f64 {
        let a = self.0.y.atan2(self.0.x);
        if a < 0.0 {
            a + TAU
        } else {
            a
        }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.0.x, self.0.y, self.0.z]
    }
}

impl Neg for Direction {
    type Output = Direction;
    fn neg(self) -> Direction {
        Direction(-self.0)
    }
}

/// Linear radiometric color triple. 1.0 is the sensor saturation level.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Rgb {
    pub r: f64,
    pub g: f64,
    pub b: f64,
}

impl Rgb {
    pub const ZERO: Rgb = Rgb::new(0.0, 0.0, 0.0);
    pub const ONE: Rgb = Rgb::new(1.0, 1.0, 1.0);

    #[inline]
    pub const fn new(r: f64, g: f64, b: f64) -> Self {
        Rgb { r, g, b }
    }

    #[inline]
    pub const fn splat(v: f64) -> Self {
        Rgb::new(v, v, v)
    }

    #[inline]
    pub fn map(self, f: impl Fn(f64) -> f64) -> Rgb {
        Rgb::new(f(self.r), f(self.g), f(self.b))
    }

    #[inline]
    pub fn zip(self, o: Rgb, f: impl Fn(f64, f64) -> f64) -> Rgb {
        Rgb::new(f(self.r, o.r), f(self.g, o.g), f(self.b, o.b))
    }

    pub fn max_channel(self) -> f64 {
        self.r.max(self.g).max(self.b)
    }

    pub fn sum(self) -> f64 {
        self.r + self.g + self.b
    }

    pub fn mean(self) -> f64 {
        self.sum() / 3.0
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.r, self.g, self.b]
    }

    pub fn from_array(a: [f64; 3]) -> Rgb {
        Rgb::new(a[0], a[1], a[2])
    }

    pub fn is_valid(self) -> bool {
        self.to_array().iter().all(|c| c.is_finite() && *c >= 0.0)
    }
}

impl Add for Rgb {
    type Output = Rgb;
    #[inline]
    fn add(self, o: Rgb) -> Rgb {
        Rgb::new(self.r + o.r, self.g + o.g, self.b + o.b)
    }
}

impl AddAssign for Rgb {
    #[inline]
    fn add_assign(&mut self, o: Rgb) {
        *self = *self + o;
    }
}

impl Sub for Rgb {
    type Output = Rgb;
    #[inline]
    fn sub(self, o: Rgb) -> Rgb {
        Rgb::new(self.r - o.r, self.g - o.g, self.b - o.b)
    }
}

/// Channel-wise product.
impl Mul for Rgb {
    type Output = Rgb;
    #[inline]
    fn mul(self, o: Rgb) -> Rgb {
        Rgb::new(self.r * o.r, self.g * o.g, self.b * o.b)
    }
}

impl Mul<f64> for Rgb {
    type Output = Rgb;
    #[inline]
    fn mul(self, s: f64) -> Rgb {
        Rgb::new(self.r * s, self.g * s, self.b * s)
    }
}

impl Div<f64> for Rgb {
    type Output = Rgb;
    #[inline]
    fn div(self, s: f64) -> Rgb {
        Rgb::new(self.r / s, self.g / s, self.b / s)
    }
}

/// Samples a direction uniformly (w.r.t. solid angle) on the cap of polar
/// angles `[0, max_polar]` around +z.
pub fn sample_hemisphere_uniform(rng: &mut RandomStream, max_polar: f64) -> Direction {
    debug_assert!(max_polar > 0.0 && max_polar <= PI / 2.0 + 1e-12);
    let z_min = max_polar.cos().max(0.0);
    let z = z_min + (1.0 - z_min) * rng.unit();
    let phi = TAU * rng.unit();
    let s = (1.0 - z * z).max(0.0).sqrt();
    let (sp, cp) = phi.sin_cos();
    Direction(Vec3::new(s * cp, s * sp, z))
}

/// Rotates `d` about the z axis by `theta` radians (counter-clockwise seen
/// from +z).
#[inline]
pub fn rotate_about_z(d: Direction, theta: f64) -> Direction {
    let (s, c) = theta.sin_cos();
    Direction(Vec3::new(c * d.x() - s * d.y(), s * d.x() + c * d.y(), d.z()))
}

/// Angle between two unit vectors in degrees, via `atan2(|a × b|, a · b)`.
#[inline]
pub fn angular_error(pred: Direction, truth: Direction) -> f64 {
    let cross = truth.vec().cross(pred.vec()).norm();
    cross.atan2(truth.dot(pred)).abs().to_degrees()
}
