use std::path::Path;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::datagen::Light;
use crate::geom::{Rgb, Vec3};

use super::PstereoError;

fn parse_triples(text: &str, what: &str) -> Result<Vec<[f64; 3]>, PstereoError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, line)| {
            let vals: Vec<f64> = line
                .split_whitespace()
                .map(|t| t.parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|e| PstereoError::Parse {
                    line: i + 1,
                    msg: format!("{what}: {e}"),
                })?;
            <[f64; 3]>::try_from(vals.as_slice()).map_err(|_| PstereoError::Parse {
                line: i + 1,
                msg: format!("{what}: expected 3 values, found {}", vals.len()),
            })
        })
        .collect()
}

/// Parses DiLiGenT-style light files: one `x y z` direction and one
/// `r g b` brightness per line. Directions are normalized.
pub fn parse_lights(directions: &str, intensities: &str) -> Result<Vec<Light>, PstereoError> {
    let dirs = parse_triples(directions, "light direction")?;
    let ints = parse_triples(intensities, "light intensity")?;
    if dirs.len() != ints.len() {
        return Err(PstereoError::LineCountMismatch {
            directions: dirs.len(),
            intensities: ints.len(),
        });
    }
    dirs.iter()
        .zip(&ints)
        .enumerate()
        .map(|(i, (d, b))| {
            let direction = Vec3::new(d[0], d[1], d[2])
                .normalized()
                .ok_or_else(|| PstereoError::Parse {
                    line: i + 1,
                    msg: "zero light direction".into(),
                })?;
            if !b.iter().all(|c| *c > 0.0 && c.is_finite()) {
                return Err(PstereoError::Parse {
                    line: i + 1,
                    msg: "light intensities must be positive".into(),
                });
            }
            Ok(Light {
                direction,
                brightness: Rgb::from_array(*b),
            })
        })
        .collect()
}

pub fn load_lights(directions: impl AsRef<Path>, intensities: impl AsRef<Path>) -> Result<Vec<Light>, PstereoError> {
    let d = std::fs::read_to_string(directions)?;
    let i = std::fs::read_to_string(intensities)?;
    parse_lights(&d, &i)
}

/// Inverse of [`parse_lights`].
pub fn format_lights(lights: &[Light]) -> (String, String) {
    let mut dirs = String::new();
    let mut ints = String::new();
    for l in lights {
        let d = l.direction;
        dirs.push_str(&format!("{:.17e} {:.17e} {:.17e}\n", d.x(), d.y(), d.z()));
        let b = l.brightness;
        ints.push_str(&format!("{:.17e} {:.17e} {:.17e}\n", b.r, b.g, b.b));
    }
    (dirs, ints)
}

/// Seed used for sparse-light evaluation subsets unless overridden.
pub const SUBSET_SEED: u64 = 0x5EED;

/// `count` random subsets of `size` distinct light indices out of `total`,
/// each sorted ascending. Deterministic in `seed`.
pub fn sample_light_subsets(total: usize, size: usize, count: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let mut s = sample(&mut rng, total, size.min(total)).into_vec();
            s.sort_unstable();
            s
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_light() {
        let l = parse_lights("0 0 1\n", "1 1 1\n").unwrap();
        assert_eq!(l.len(), 1);
        assert_eq!(l[0].direction.to_array(), [0.0, 0.0, 1.0]);
    }

    #[test]
    fn directions_are_normalized() {
        let l = parse_lights("0 0 2", "1 1 1").unwrap();
        assert_eq!(l[0].direction.to_array(), [0.0, 0.0, 1.0]);
    }

    #[test]
    fn mismatched_line_counts() {
        let dirs = "0 0 1\n".repeat(96);
        let ints = "1 1 1\n".repeat(95);
        assert!(matches!(
            parse_lights(&dirs, &ints),
            Err(PstereoError::LineCountMismatch {
                directions: 96,
                intensities: 95
            })
        ));
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        assert!(matches!(
            parse_lights("0 0 1\n0 x 1\n", "1 1 1\n1 1 1\n"),
            Err(PstereoError::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse_lights("0 0 1\n", "1 1\n"),
            Err(PstereoError::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn format_round_trip() {
        let lights = parse_lights("0.1 0.2 0.9\n-0.3 0.1 0.8\n", "1 2 3\n0.5 0.5 0.5\n").unwrap();
        let (d, i) = format_lights(&lights);
        let back = parse_lights(&d, &i).unwrap();
        for (a, b) in back.iter().zip(&lights) {
            assert!((a.direction.vec() - b.direction.vec()).norm() < 1e-15);
            assert_eq!(a.brightness, b.brightness);
        }
    }

    #[test]
    fn subsets_are_seeded() {
        let a = sample_light_subsets(96, 10, 10, SUBSET_SEED);
        assert_eq!(a, sample_light_subsets(96, 10, 10, SUBSET_SEED));
        assert_eq!(a.len(), 10);
        for s in &a {
            assert_eq!(s.len(), 10);
            assert!(s.windows(2).all(|w| w[0] < w[1]) && s[9] < 96);
        }
    }
}
