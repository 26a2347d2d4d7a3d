use std::fs;
use std::path::{Path, PathBuf};

use image::{ColorType, DynamicImage, ImageBuffer, Luma, Rgb as ImgRgb};

use crate::datagen::Light;
use crate::geom::Rgb;

use super::lights::{format_lights, load_lights};
use super::PstereoError;

pub const DIRECTIONS_FILE: &str = "light_directions.txt";
pub const INTENSITIES_FILE: &str = "light_intensities.txt";
pub const MASK_FILE: &str = "mask.png";
pub const FILENAMES_FILE: &str = "filenames.txt";

/// `J` linear RGB images sharing one camera, with per-image light
/// calibration and a pixel mask.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageStack {
    width: usize,
    height: usize,
    // one H·W·3 buffer per light, row-major, channel-interleaved
    images: Vec<Vec<f32>>,
    lights: Vec<Light>,
    mask: Vec<bool>,
}

impl ImageStack {
    pub fn new(
        width: usize,
        height: usize,
        images: Vec<Vec<f32>>,
        lights: Vec<Light>,
        mask: Vec<bool>,
    ) -> Result<Self, PstereoError> {
        if images.len() != lights.len() {
            return Err(PstereoError::CountMismatch {
                images: images.len(),
                lights: lights.len(),
            });
        }
        if mask.len() != width * height || images.iter().any(|im| im.len() != width * height * 3) {
            return Err(PstereoError::DimensionMismatch(format!(
                "expected {width}x{height} images and mask"
            )));
        }
        Ok(ImageStack {
            width,
            height,
            images,
            lights,
            mask,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.lights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lights.is_empty()
    }

    pub fn lights(&self) -> &[Light] {
        &self.lights
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn in_mask(&self, row: usize, col: usize) -> bool {
        row < self.height && col < self.width && self.mask[row * self.width + col]
    }

    /// Intensity of pixel `(row, col)` in image `j`.
    #[inline]
    pub fn pixel(&self, j: usize, row: usize, col: usize) -> Rgb {
        let o = (row * self.width + col) * 3;
        let im = &self.images[j];
        Rgb::new(im[o] as f64, im[o + 1] as f64, im[o + 2] as f64)
    }

    pub fn masked_pixels(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.height)
            .flat_map(move |r| (0..self.width).map(move |c| (r, c)))
            .filter(move |&(r, c)| self.mask[r * self.width + c])
    }

    /// Restriction to the images listed in `indices`.
    pub fn subset(&self, indices: &[usize]) -> ImageStack {
        ImageStack {
            width: self.width,
            height: self.height,
            images: indices.iter().map(|&i| self.images[i].clone()).collect(),
            lights: indices.iter().map(|&i| self.lights[i]).collect(),
            mask: self.mask.clone(),
        }
    }

    /// Writes 16-bit RGB PNGs plus light files and mask in the directory
    /// layout [`load_stack_dir`] reads.
    pub fn save_dir(&self, dir: impl AsRef<Path>) -> Result<(), PstereoError> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir)?;
        let mut names = String::new();
        for (j, im) in self.images.iter().enumerate() {
            let name = format!("{:03}.png", j + 1);
            let data: Vec<u16> = im
                .iter()
                .map(|v| (v.clamp(0.0, 1.0) as f64 * 65535.0).round() as u16)
                .collect();
            let buf: ImageBuffer<ImgRgb<u16>, _> =
                ImageBuffer::from_raw(self.width as u32, self.height as u32, data)
                    .expect("buffer sized from stack dimensions");
            buf.save(dir.join(&name))
                .map_err(|e| PstereoError::Decode(format!("{name}: {e}")))?;
            names.push_str(&name);
            names.push('\n');
        }
        fs::write(dir.join(FILENAMES_FILE), names)?;
        let (d, i) = format_lights(&self.lights);
        fs::write(dir.join(DIRECTIONS_FILE), d)?;
        fs::write(dir.join(INTENSITIES_FILE), i)?;
        let mask: Vec<u8> = self.mask.iter().map(|m| if *m { 255 } else { 0 }).collect();
        let buf: ImageBuffer<Luma<u8>, _> =
            ImageBuffer::from_raw(self.width as u32, self.height as u32, mask).unwrap();
        buf.save(dir.join(MASK_FILE))
            .map_err(|e| PstereoError::Decode(format!("{MASK_FILE}: {e}")))?;
        Ok(())
    }
}

/// Decoded PNG as `[0, 1]` RGB values plus its dimensions.
pub fn read_png_rgb(path: &Path) -> Result<(usize, usize, Vec<f32>), PstereoError> {
    let img = image::open(path).map_err(|e| PstereoError::Decode(format!("{}: {e}", path.display())))?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let values = if is_16_bit(&img) {
        img.to_rgb16().into_raw().into_iter().map(|v| v as f32 / 65535.0).collect()
    } else {
        img.to_rgb8().into_raw().into_iter().map(|v| v as f32 / 255.0).collect()
    };
    Ok((w, h, values))
}

fn is_16_bit(img: &DynamicImage) -> bool {
    matches!(
        img.color(),
        ColorType::L16 | ColorType::La16 | ColorType::Rgb16 | ColorType::Rgba16
    )
}

fn read_mask(path: &Path) -> Result<(usize, usize, Vec<bool>), PstereoError> {
    let img = image::open(path).map_err(|e| PstereoError::Decode(format!("{}: {e}", path.display())))?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let mask = img.to_luma16().into_raw().into_iter().map(|v| v > 0).collect();
    Ok((w, h, mask))
}

fn list_images(dir: &Path) -> Result<Vec<PathBuf>, PstereoError> {
    let listing = dir.join(FILENAMES_FILE);
    if listing.exists() {
        return Ok(fs::read_to_string(listing)?
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(|l| dir.join(l))
            .collect());
    }
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            let name = p.file_name().map(|n| n.to_string_lossy().to_lowercase()).unwrap_or_default();
            name.ends_with(".png") && name != MASK_FILE && !name.starts_with("normal")
        })
        .collect();
    paths.sort();
    Ok(paths)
}

/// Loads the PNG images of `dir` (listed in `filenames.txt`, or all PNGs
/// except the mask and normal maps in lexicographic order) and pairs them with
/// `lights`. Without a mask every pixel is used.
pub fn load_image_stack(
    dir: impl AsRef<Path>,
    lights: Vec<Light>,
    mask: Option<&Path>,
) -> Result<ImageStack, PstereoError> {
    let dir = dir.as_ref();
    let paths = list_images(dir)?;
    if paths.len() != lights.len() {
        return Err(PstereoError::CountMismatch {
            images: paths.len(),
            lights: lights.len(),
        });
    }
    let mut images = Vec::with_capacity(paths.len());
    let mut dims = None;
    for p in &paths {
        let (w, h, data) = read_png_rgb(p)?;
        match dims {
            None => dims = Some((w, h)),
            Some(d) if d != (w, h) => {
                return Err(PstereoError::DimensionMismatch(format!(
                    "{} is {w}x{h}, expected {}x{}",
                    p.display(),
                    d.0,
                    d.1
                )))
            }
            _ => {}
        }
        images.push(data);
    }
    let (w, h) = dims.unwrap_or((0, 0));
    let mask = match mask {
        Some(path) => {
            let (mw, mh, m) = read_mask(path)?;
            if (mw, mh) != (w, h) {
                return Err(PstereoError::DimensionMismatch(format!(
                    "mask is {mw}x{mh}, images are {w}x{h}"
                )));
            }
            m
        }
        None => vec![true; w * h],
    };
    ImageStack::new(w, h, images, lights, mask)
}

/// Loads a stack directory with its light files and optional `mask.png`.
pub fn load_stack_dir(dir: impl AsRef<Path>) -> Result<ImageStack, PstereoError> {
    let dir = dir.as_ref();
    let lights = load_lights(dir.join(DIRECTIONS_FILE), dir.join(INTENSITIES_FILE))?;
    let mask = dir.join(MASK_FILE);
    load_image_stack(dir, lights, mask.exists().then_some(mask.as_path()))
}
