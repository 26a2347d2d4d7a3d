//! Angular-error scoring of normal maps.

use std::fmt::Write as _;
use std::path::Path;

use image::{ImageBuffer, Rgb as ImgRgb};

use crate::geom::angular_error;

use super::{NormalMap, PstereoError};

/// Percentiles reported alongside the mean.
pub const PERCENTILES: [f64; 5] = [25.0, 50.0, 75.0, 90.0, 95.0];
/// Thresholds (degrees) for the "fraction of pixels below" table.
pub const THRESHOLDS: [f64; 3] = [5.0, 10.0, 15.0];
/// Upper end of the heatmap color scale, degrees.
pub const HEATMAP_MAX_DEG: f64 = 90.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub width: usize,
    pub height: usize,
    /// Mean angular error in degrees over the intersected mask.
    pub mae: f64,
    pub pixels: usize,
    /// Per-pixel error in degrees, `None` outside the intersected mask.
    pub errors: Vec<Option<f64>>,
    pub percentiles: Vec<(f64, f64)>,
    pub below: Vec<(f64, f64)>,
}

/// Linear-interpolated percentile of sorted values.
fn percentile(sorted: &[f64], p: f64) -> f64 {
    let pos = p / 100.0 * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let f = pos - lo as f64;
    sorted[lo] * (1.0 - f) + sorted[hi] * f
}

pub fn evaluate(pred: &NormalMap, truth: &NormalMap) -> Result<Evaluation, PstereoError> {
    if (pred.width(), pred.height()) != (truth.width(), truth.height()) {
        return Err(PstereoError::DimensionMismatch(format!(
            "prediction is {}x{}, ground truth is {}x{}",
            pred.width(),
            pred.height(),
            truth.width(),
            truth.height()
        )));
    }
    let errors: Vec<Option<f64>> = pred
        .normals()
        .iter()
        .zip(truth.normals())
        .map(|(p, t)| Some(angular_error((*p)?, (*t)?)))
        .collect();
    let mut valid: Vec<f64> = errors.iter().flatten().copied().collect();
    if valid.is_empty() {
        return Err(PstereoError::EmptyIntersection);
    }
    let mae = valid.iter().sum::<f64>() / valid.len() as f64;
    valid.sort_by(f64::total_cmp);
    let percentiles = PERCENTILES.iter().map(|&p| (p, percentile(&valid, p))).collect();
    let below = THRESHOLDS
        .iter()
        .map(|&t| (t, valid.iter().filter(|e| **e < t).count() as f64 / valid.len() as f64))
        .collect();
    Ok(Evaluation {
        width: pred.width(),
        height: pred.height(),
        mae,
        pixels: valid.len(),
        errors,
        percentiles,
        below,
    })
}

impl Evaluation {
    pub fn summary(&self) -> String {
        let mut s = format!("MAE {:.3} deg over {} pixels\n", self.mae, self.pixels);
        for (p, v) in &self.percentiles {
            let _ = writeln!(s, "p{p:<3} {v:.3} deg");
        }
        for (t, f) in &self.below {
            let _ = writeln!(s, "<{t} deg {:.2}%", f * 100.0);
        }
        s
    }

    /// One header line and one value line.
    pub fn metrics_csv(&self) -> String {
        let mut head = vec!["mae_deg".to_string(), "pixels".to_string()];
        let mut vals = vec![format!("{:.6}", self.mae), self.pixels.to_string()];
        for (p, v) in &self.percentiles {
            head.push(format!("p{p}_deg"));
            vals.push(format!("{v:.6}"));
        }
        for (t, f) in &self.below {
            head.push(format!("below_{t}_deg"));
            vals.push(format!("{f:.6}"));
        }
        format!("{}\n{}\n", head.join(","), vals.join(","))
    }

    /// `row,col,error_deg` for every scored pixel.
    pub fn errors_csv(&self) -> String {
        let mut s = String::from("row,col,error_deg\n");
        for (i, e) in self.errors.iter().enumerate() {
            if let Some(e) = e {
                let _ = writeln!(s, "{},{},{e:.6}", i / self.width, i % self.width);
            }
        }
        s
    }

    /// 8-bit heatmap on a fixed 0–90° scale; unscored pixels are black.
    pub fn heatmap(&self) -> ImageBuffer<ImgRgb<u8>, Vec<u8>> {
        ImageBuffer::from_fn(self.width as u32, self.height as u32, |x, y| {
            match self.errors[y as usize * self.width + x as usize] {
                Some(e) => ImgRgb(colormap(e / HEATMAP_MAX_DEG)),
                None => ImgRgb([0, 0, 0]),
            }
        })
    }

    pub fn save_heatmap(&self, path: impl AsRef<Path>) -> Result<(), PstereoError> {
        self.heatmap()
            .save(path.as_ref())
            .map_err(|e| PstereoError::Decode(format!("{}: {e}", path.as_ref().display())))
    }
}

/// Blue → cyan → yellow → red ramp over `[0, 1]`.
fn colormap(t: f64) -> [u8; 3] {
    let t = t.clamp(0.0, 1.0);
    let stops: [(f64, [f64; 3]); 4] = [
        (0.0, [0.0, 0.0, 0.5]),
        (1.0 / 3.0, [0.0, 0.8, 1.0]),
        (2.0 / 3.0, [1.0, 0.9, 0.0]),
        (1.0, [0.6, 0.0, 0.0]),
    ];
    let k = stops.windows(2).position(|w| t <= w[1].0).unwrap_or(2);
    let (t0, c0) = stops[k];
    let (t1, c1) = stops[k + 1];
    let f = (t - t0) / (t1 - t0);
    [0, 1, 2].map(|i| ((c0[i] * (1.0 - f) + c1[i] * f) * 255.0).round() as u8)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Direction;

    fn map(normals: &[Option<Direction>]) -> NormalMap {
        NormalMap::from_vec(normals.len(), 1, normals.to_vec())
    }

    #[test]
    fn identical_maps_score_zero() {
        let n = [Some(Direction::new(0.1, 0.2, 0.9)), None, Some(Direction::new(-0.3, 0.0, 1.0))];
        let e = evaluate(&map(&n), &map(&n)).unwrap();
        assert_eq!(e.mae, 0.0);
        assert_eq!(e.pixels, 2);
    }

    #[test]
    fn disjoint_masks() {
        let a = [Some(Direction::new(0.0, 0.0, 1.0)), None];
        let b = [None, Some(Direction::new(0.0, 0.0, 1.0))];
        assert!(matches!(evaluate(&map(&a), &map(&b)), Err(PstereoError::EmptyIntersection)));
    }

    #[test]
    fn percentile_interpolates() {
        let v = [0.0, 10.0, 20.0, 30.0, 40.0];
        assert_eq!(percentile(&v, 50.0), 20.0);
        assert_eq!(percentile(&v, 25.0), 10.0);
        assert_eq!(percentile(&v, 90.0), 36.0);
    }

    #[test]
    fn colormap_endpoints() {
        assert_eq!(colormap(0.0), [0, 0, 128]);
        assert_eq!(colormap(1.0), [153, 0, 0]);
        assert_eq!(colormap(7.0), colormap(1.0));
    }
}
