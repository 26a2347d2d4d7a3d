//! Direct reflectance for every material family.
//!
//! All evaluators return reflectance already multiplied by the incidence
//! cosine `max(n·l, 0)`, i.e. the pixel value produced by a unit-brightness
//! directional light.

mod disney;
mod merl;

use std::path::Path;

pub use disney::{eval_disney, DisneyParams};
pub use merl::{
    bin_of, eval_merl, half_diff_angles, HalfDiff, MerlBin, MerlTable, BINS_PER_CHANNEL,
    CHANNEL_SCALE, PHI_D_BINS, THETA_D_BINS, THETA_H_BINS,
};

use crate::geom::{Direction, Rgb};

#[derive(Debug, thiserror::Error)]
pub enum BrdfError {
    #[error("MERL header dimensions {0:?}, expected [90, 90, 180]")]
    DimensionMismatch([i32; 3]),
    #[error("MERL payload truncated: expected {expected} values, found {found}")]
    TruncatedFile { expected: usize, found: usize },
    #[error("unknown material table {0}")]
    UnknownMaterial(usize),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Albedo times the clamped cosine; no `1/π`.
#[inline]
pub fn eval_lambertian(n: Direction, l: Direction, albedo: Rgb) -> Rgb {
    albedo * n.dot(l).max(0.0)
}

/// Material description as sampled and stored; MERL tables are referenced by
/// their index in a [`MerlLibrary`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MaterialSpec {
    Lambertian,
    Disney(DisneyParams),
    MerlMix { table_id: usize, w: f64 },
}

/// A [`MaterialSpec`] with its table reference resolved.
#[derive(Debug, Clone, Copy)]
pub enum Material<'a> {
    Lambertian,
    Disney(DisneyParams),
    MerlMix { table: &'a MerlTable, w: f64 },
}

impl MaterialSpec {
    pub fn resolve<'a>(&self, library: &'a MerlLibrary) -> Result<Material<'a>, BrdfError> {
        Ok(match *self {
            MaterialSpec::Lambertian => Material::Lambertian,
            MaterialSpec::Disney(p) => Material::Disney(p),
            MaterialSpec::MerlMix { table_id, w } => Material::MerlMix {
                table: library
                    .get(table_id)
                    .ok_or(BrdfError::UnknownMaterial(table_id))?,
                w,
            },
        })
    }

    pub fn is_merl(&self) -> bool {
        matches!(self, MaterialSpec::MerlMix { .. })
    }
}

impl Material<'_> {
    /// Direct reflectance `r_d`. For MERL mixtures the albedo multiplies
    /// both the measured lobe and the Lambertian part.
    #[inline]
    pub fn eval(&self, n: Direction, l: Direction, v: Direction, albedo: Rgb) -> Rgb {
        match self {
            Material::Lambertian => eval_lambertian(n, l, albedo),
            Material::Disney(p) => eval_disney(n, l, v, albedo, p),
            Material::MerlMix { table, w } => {
                if *w == 0.0 {
                    return eval_lambertian(n, l, albedo);
                }
                let measured = eval_merl(table, n, l, v);
                let lambert = Rgb::splat(n.dot(l).max(0.0));
                albedo * (measured * *w + lambert * (1.0 - *w))
            }
        }
    }
}

/// Resolves `m` against `library` and evaluates it.
pub fn eval_material(
    n: Direction,
    l: Direction,
    v: Direction,
    albedo: Rgb,
    m: &MaterialSpec,
    library: &MerlLibrary,
) -> Result<Rgb, BrdfError> {
    Ok(m.resolve(library)?.eval(n, l, v, albedo))
}

/// The set of loaded MERL tables, indexed by position.
#[derive(Debug, Default, Clone)]
pub struct MerlLibrary {
    tables: Vec<MerlTable>,
}

impl MerlLibrary {
    pub fn new(tables: Vec<MerlTable>) -> Self {
        MerlLibrary { tables }
    }

    /// Loads every `*.binary` file in `dir`, sorted by file name.
    pub fn load_dir(dir: impl AsRef<Path>) -> Result<Self, BrdfError> {
        let mut paths: Vec<_> = std::fs::read_dir(dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|e| e == "binary"))
            .collect();
        paths.sort();
        let tables = paths
            .iter()
            .map(MerlTable::load_file)
            .collect::<Result<Vec<_>, _>>()?;
        Ok(MerlLibrary { tables })
    }

    pub fn get(&self, id: usize) -> Option<&MerlTable> {
        self.tables.get(id)
    }

    pub fn len(&self) -> usize {
        self.tables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tables.is_empty()
    }

    pub fn tables(&self) -> &[MerlTable] {
        &self.tables
    }
}
