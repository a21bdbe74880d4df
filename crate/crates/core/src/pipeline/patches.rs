use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{Raster, RealRaster};

/// Tiling of an image into square patches.
///
/// Offsets advance by `stride`; the last patch on each axis is pulled back
/// to end flush with the image edge. An axis shorter than the patch gets a
/// single patch whose overhang is filled by reflection.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatchGrid {
    pub patch_size: usize,
    pub stride: usize,
    pub row_offsets: Vec<usize>,
    pub col_offsets: Vec<usize>,
}

fn axis_offsets(dim: usize, patch: usize, stride: usize) -> Vec<usize> {
    if patch >= dim {
        return vec![0];
    }
    let mut out = vec![0];
    let last = dim - patch;
    while *out.last().unwrap() < last {
        let next = (out.last().unwrap() + stride).min(last);
        out.push(next);
    }
    out
}

impl PatchGrid {
    pub fn new(width: usize, height: usize, patch_size: usize, stride: usize) -> Result<Self> {
        if patch_size == 0 {
            return Err(Error::invalid("patch_size", "must be positive"));
        }
        if stride == 0 || stride > patch_size {
            return Err(Error::invalid(
                "stride",
                format!("{stride} must be in 1..={patch_size}"),
            ));
        }
        Ok(Self {
            patch_size,
            stride,
            row_offsets: axis_offsets(height, patch_size, stride),
            col_offsets: axis_offsets(width, patch_size, stride),
        })
    }

    /// Grid with stride `patch_size / 2`.
    pub fn half_overlap(width: usize, height: usize, patch_size: usize) -> Result<Self> {
        Self::new(width, height, patch_size, (patch_size / 2).max(1))
    }

    /// Patch origins `(row, col)` in row-major order.
    pub fn origins(&self) -> Vec<(usize, usize)> {
        self.row_offsets
            .iter()
            .flat_map(|&r| self.col_offsets.iter().map(move |&c| (r, c)))
            .collect()
    }
}

/// A patch and the image position of its top-left pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct Patch<T> {
    pub row: usize,
    pub col: usize,
    pub data: Raster<T>,
}

/// Mirror index into `0..dim` without repeating the edge sample.
pub(crate) fn reflect(i: isize, dim: usize) -> usize {
    if dim == 1 {
        return 0;
    }
    let period = 2 * (dim as isize - 1);
    let m = i.rem_euclid(period);
    if m >= dim as isize {
        (period - m) as usize
    } else {
        m as usize
    }
}

pub fn extract_patches<T: Clone>(image: &Raster<T>, grid: &PatchGrid) -> Vec<Patch<T>> {
    let p = grid.patch_size;
    let (w, h) = image.dims();
    grid.origins()
        .into_iter()
        .map(|(row, col)| Patch {
            row,
            col,
            data: Raster::from_fn(p, p, |r, c| {
                image[(reflect((row + r) as isize, h), reflect((col + c) as isize, w))].clone()
            }),
        })
        .collect()
}

/// Averages overlapping patches into a `width × height` raster. Patch pixels
/// beyond the output (reflection overhang) are ignored.
pub fn stitch(patches: &[Patch<f64>], width: usize, height: usize) -> Result<RealRaster> {
    let mut sum = RealRaster::filled(width, height, 0.0);
    let mut count = Raster::filled(width, height, 0u32);
    for patch in patches {
        let (pw, ph) = patch.data.dims();
        for r in 0..ph {
            let gr = patch.row + r;
            if gr >= height {
                break;
            }
            for c in 0..pw {
                let gc = patch.col + c;
                if gc >= width {
                    break;
                }
                sum[(gr, gc)] += patch.data[(r, c)];
                count[(gr, gc)] += 1;
            }
        }
    }
    if let Some(i) = count.data().iter().position(|&n| n == 0) {
        return Err(Error::UncoveredPixel {
            row: i / width,
            col: i % width,
        });
    }
    sum.zip_map(&count, |&s, &n| s / n as f64)
}
