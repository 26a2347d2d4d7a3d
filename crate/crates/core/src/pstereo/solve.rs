//! Classical least-squares Lambertian photometric stereo.

use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use rayon::prelude::*;

use crate::geom::Direction;

use super::{ImageStack, NormalMap, PstereoError};

/// Smallest accepted ratio between the smallest and largest eigenvalue of a
/// pixel's light Gram matrix.
const MIN_CONDITION: f64 = 1e-10;

fn gram(dirs: impl Iterator<Item = Direction>) -> Matrix3<f64> {
    dirs.fold(Matrix3::zeros(), |acc, l| {
        let v = Vector3::new(l.x(), l.y(), l.z());
        acc + v * v.transpose()
    })
}

fn well_conditioned(m: &Matrix3<f64>) -> bool {
    let eig = SymmetricEigen::new(*m).eigenvalues;
    let max = eig.max();
    max > 0.0 && eig.min() / max > MIN_CONDITION
}

/// Brightness-compensated gray value: mean over channels of `i_c / φ_c`.
#[inline]
fn gray(stack: &ImageStack, j: usize, row: usize, col: usize) -> f64 {
    let phi = stack.lights()[j].brightness;
    stack.pixel(j, row, col).zip(phi, |i, p| i / p).mean()
}

/// Solves `L·(ρN) = i` per masked pixel in the least-squares sense and
/// normalizes the result.
///
/// Observations that are exactly zero carry no shading information (they
/// are shadowed or below the sensor floor) and are left out of each pixel's
/// system. Pixels with fewer than three remaining observations, or whose
/// remaining lights do not span 3D, are marked invalid.
pub fn woodham_solve(stack: &ImageStack) -> Result<NormalMap, PstereoError> {
    if stack.len() < 3 || !well_conditioned(&gram(stack.lights().iter().map(|l| l.direction))) {
        return Err(PstereoError::RankDeficientLights);
    }
    let (w, h) = (stack.width(), stack.height());
    let normals: Vec<Option<Direction>> = (0..h * w)
        .into_par_iter()
        .map(|p| {
            let (row, col) = (p / w, p % w);
            if !stack.mask()[p] {
                return None;
            }
            solve_pixel(stack, row, col)
        })
        .collect();
    Ok(NormalMap::from_vec(w, h, normals))
}

fn solve_pixel(stack: &ImageStack, row: usize, col: usize) -> Option<Direction> {
    let mut ata = Matrix3::zeros();
    let mut atb = Vector3::zeros();
    let mut used = 0usize;
    for (j, light) in stack.lights().iter().enumerate() {
        let g = gray(stack, j, row, col);
        if g <= 0.0 {
            continue;
        }
        let l = Vector3::new(light.direction.x(), light.direction.y(), light.direction.z());
        ata += l * l.transpose();
        atb += l * g;
        used += 1;
    }
    if used < 3 || !well_conditioned(&ata) {
        return None;
    }
    let x = ata.cholesky()?.solve(&atb);
    crate::geom::Vec3::new(x[0], x[1], x[2]).normalized()
}
