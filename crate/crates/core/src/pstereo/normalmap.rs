//! Normal maps and the "PXNM" file format.
//!
//! ```text
//! magic    4 bytes "PXNM"
//! version  u32 LE  1
//! H        u32 LE
//! W        u32 LE
//! H·W·3 f32 LE components, row-major; NaN triplets for masked-out pixels
//! ```

use std::io::{self, Read, Write};

use crate::geom::{Direction, Vec3};

use super::PstereoError;

pub const MAGIC: &[u8; 4] = b"PXNM";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct NormalMap {
    width: usize,
    height: usize,
    normals: Vec<Option<Direction>>,
}

impl NormalMap {
    pub fn empty(width: usize, height: usize) -> Self {
        NormalMap {
            width,
            height,
            normals: vec![None; width * height],
        }
    }

    pub fn from_vec(width: usize, height: usize, normals: Vec<Option<Direction>>) -> Self {
        assert_eq!(normals.len(), width * height, "normal count mismatch");
        NormalMap {
            width,
            height,
            normals,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, row: usize, col: usize) -> Option<Direction> {
        self.normals[row * self.width + col]
    }

    pub fn set(&mut self, row: usize, col: usize, n: Option<Direction>) {
        self.normals[row * self.width + col] = n;
    }

    pub fn normals(&self) -> &[Option<Direction>] {
        &self.normals
    }

    pub fn mask(&self) -> Vec<bool> {
        self.normals.iter().map(Option::is_some).collect()
    }

    pub fn valid_count(&self) -> usize {
        self.normals.iter().filter(|n| n.is_some()).count()
    }

    pub fn write(&self, mut sink: impl Write) -> io::Result<()> {
        let mut buf = Vec::with_capacity(16 + self.normals.len() * 12);
        buf.extend_from_slice(MAGIC);
        buf.extend_from_slice(&VERSION.to_le_bytes());
        buf.extend_from_slice(&(self.height as u32).to_le_bytes());
        buf.extend_from_slice(&(self.width as u32).to_le_bytes());
        for n in &self.normals {
            let c = n.map_or([f32::NAN; 3], |d| d.to_array().map(|v| v as f32));
            for v in c {
                buf.extend_from_slice(&v.to_le_bytes());
            }
        }
        sink.write_all(&buf)?;
        sink.flush()
    }

    /// Reads a PXNM stream. Components are renormalized in double precision;
    /// any NaN component marks the pixel masked out.
    pub fn read(mut source: impl Read) -> Result<Self, PstereoError> {
        let mut bytes = Vec::new();
        source.read_to_end(&mut bytes)?;
        if bytes.len() < 4 || &bytes[..4] != MAGIC {
            return Err(PstereoError::BadMagic);
        }
        if bytes.len() < 16 {
            return Err(PstereoError::TruncatedFile);
        }
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
        let version = u32_at(4);
        if version != VERSION {
            return Err(PstereoError::VersionUnsupported(version));
        }
        let (height, width) = (u32_at(8) as usize, u32_at(12) as usize);
        let need = 16 + height * width * 12;
        if bytes.len() < need {
            return Err(PstereoError::TruncatedFile);
        }
        let normals = bytes[16..need]
            .chunks_exact(12)
            .map(|c| {
                let v = [0, 4, 8].map(|o| f32::from_le_bytes(c[o..o + 4].try_into().unwrap()));
                if v.iter().any(|x| x.is_nan()) {
                    None
                } else {
                    Vec3::new(v[0] as f64, v[1] as f64, v[2] as f64).normalized()
                }
            })
            .collect();
        Ok(NormalMap {
            width,
            height,
            normals,
        })
    }

    pub fn save(&self, path: impl AsRef<std::path::Path>) -> Result<(), PstereoError> {
        let f = std::fs::File::create(path)?;
        self.write(io::BufWriter::new(f))?;
        Ok(())
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self, PstereoError> {
        let f = std::fs::File::open(path)?;
        Self::read(io::BufReader::new(f))
    }
}
