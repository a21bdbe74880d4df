//! File formats: 16-bit label PNGs, 8-bit mask/image PNGs and `F32R`
//! little-endian float rasters.

use std::fs;
use std::io::Cursor;
use std::path::Path;

use image::{DynamicImage, ImageBuffer, ImageFormat, Luma, Rgb};

use crate::error::{Error, Result};
use crate::raster::{LabelMap, Mask, Raster, RealRaster};

pub const F32R_MAGIC: &[u8; 4] = b"F32R";

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn image_err(path: &Path) -> impl FnOnce(image::ImageError) -> Error + '_ {
    move |source| Error::Image {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes via a sibling temporary file and a rename, so readers never see
/// a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(io_err(parent))?;
        }
    }
    let file_name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let tmp = path.with_file_name(format!(".{file_name}.tmp"));
    fs::write(&tmp, bytes).map_err(io_err(&tmp))?;
    fs::rename(&tmp, path).map_err(io_err(path))
}

/// Serializes a real raster as `F32R`: magic, u32 width, u32 height, then
/// row-major f32 values, all little-endian.
pub fn encode_f32r(raster: &RealRaster) -> Vec<u8> {
    let mut out = Vec::with_capacity(12 + raster.len() * 4);
    out.extend_from_slice(F32R_MAGIC);
    out.extend_from_slice(&(raster.width() as u32).to_le_bytes());
    out.extend_from_slice(&(raster.height() as u32).to_le_bytes());
    for &v in raster.data() {
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
    out
}

pub fn decode_f32r(bytes: &[u8], path: &Path) -> Result<RealRaster> {
    let malformed = |reason: String| Error::MalformedRaster {
        path: path.to_path_buf(),
        reason,
    };
    if bytes.len() < 12 || &bytes[..4] != F32R_MAGIC {
        return Err(malformed("missing F32R header".into()));
    }
    let width = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let height = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let expected = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(4))
        .ok_or_else(|| malformed("dimensions overflow".into()))?;
    if bytes.len() - 12 != expected {
        return Err(malformed(format!(
            "{width}x{height} needs {expected} payload bytes, found {}",
            bytes.len() - 12
        )));
    }
    let data: Vec<f64> = bytes[12..]
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes(b.try_into().unwrap()) as f64)
        .collect();
    let raster = RealRaster::from_vec(width, height, data).map_err(|e| malformed(e.to_string()))?;
    raster.check_finite().map_err(|e| malformed(e.to_string()))?;
    Ok(raster)
}

pub fn read_f32r(path: &Path) -> Result<RealRaster> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    decode_f32r(&bytes, path)
}

pub fn write_f32r(path: &Path, raster: &RealRaster) -> Result<()> {
    write_atomic(path, &encode_f32r(raster))
}

fn encode_png(img: DynamicImage, path: &Path) -> Result<Vec<u8>> {
    let mut buf = Cursor::new(Vec::new());
    img.write_to(&mut buf, ImageFormat::Png).map_err(image_err(path))?;
    Ok(buf.into_inner())
}

fn load_png(path: &Path) -> Result<DynamicImage> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    image::load_from_memory_with_format(&bytes, ImageFormat::Png).map_err(image_err(path))
}

/// 16-bit grayscale PNG, pixel value = label.
pub fn encode_label_png(labels: &LabelMap) -> Result<Vec<u8>> {
    if labels.n_labels() > u16::MAX as u32 {
        return Err(Error::LabelOverflow(labels.n_labels()));
    }
    let data: Vec<u16> = labels.data().iter().map(|&v| v as u16).collect();
    let buf: ImageBuffer<Luma<u16>, Vec<u16>> =
        ImageBuffer::from_raw(labels.width() as u32, labels.height() as u32, data)
            .expect("buffer sized from raster");
    encode_png(DynamicImage::ImageLuma16(buf), Path::new("<label map>"))
}

pub fn write_label_png(path: &Path, labels: &LabelMap) -> Result<()> {
    write_atomic(path, &encode_label_png(labels)?)
}

/// Reads a grayscale label PNG (8- or 16-bit) and canonicalizes its labels.
pub fn read_label_png(path: &Path) -> Result<LabelMap> {
    let img = load_png(path)?.into_luma16();
    let (w, h) = img.dimensions();
    let data = img.into_raw().into_iter().map(u32::from).collect();
    let raster = Raster::from_vec(w as usize, h as usize, data).map_err(|e| Error::MalformedRaster {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    Ok(LabelMap::from_raster(raster))
}

pub fn encode_gray_png(raster: &Raster<u8>) -> Result<Vec<u8>> {
    let buf: ImageBuffer<Luma<u8>, Vec<u8>> = ImageBuffer::from_raw(
        raster.width() as u32,
        raster.height() as u32,
        raster.data().to_vec(),
    )
    .expect("buffer sized from raster");
    encode_png(DynamicImage::ImageLuma8(buf), Path::new("<gray image>"))
}

pub fn write_gray_png(path: &Path, raster: &Raster<u8>) -> Result<()> {
    write_atomic(path, &encode_gray_png(raster)?)
}

/// Binary mask as 8-bit PNG with 0/255.
pub fn write_mask_png(path: &Path, mask: &Mask) -> Result<()> {
    write_gray_png(path, &mask.map(|&b| if b { 255 } else { 0 }))
}

pub fn read_mask_png(path: &Path) -> Result<Mask> {
    Ok(read_gray_png(path)?.map(|&v| v != 0))
}

pub fn read_gray_png(path: &Path) -> Result<Raster<u8>> {
    let img = load_png(path)?.into_luma8();
    let (w, h) = img.dimensions();
    Raster::from_vec(w as usize, h as usize, img.into_raw()).map_err(|e| Error::MalformedRaster {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })
}

/// RGB8 raster stored as `[r, g, b]` triples.
pub fn read_rgb_png(path: &Path) -> Result<Raster<[u8; 3]>> {
    let img = load_png(path)?.into_rgb8();
    let (w, h) = img.dimensions();
    let data = img.pixels().map(|p| p.0).collect();
    Raster::from_vec(w as usize, h as usize, data).map_err(|e| Error::MalformedRaster {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })
}

pub fn encode_rgb_png(raster: &Raster<[u8; 3]>) -> Result<Vec<u8>> {
    let mut buf: ImageBuffer<Rgb<u8>, Vec<u8>> =
        ImageBuffer::new(raster.width() as u32, raster.height() as u32);
    for (px, v) in buf.pixels_mut().zip(raster.data()) {
        *px = Rgb(*v);
    }
    encode_png(DynamicImage::ImageRgb8(buf), Path::new("<rgb image>"))
}

pub fn write_rgb_png(path: &Path, raster: &Raster<[u8; 3]>) -> Result<()> {
    write_atomic(path, &encode_rgb_png(raster)?)
}
