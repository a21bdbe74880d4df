//! Row-major raster containers and label maps.
//!
//! Every map in the crate (masks, label maps, probability and distance maps)
//! is a [`Raster`] of some element type. Coordinates are `(row, col)`.

use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A `width × height` grid of values stored row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Raster<T> {
    width: usize,
    height: usize,
    data: Vec<T>,
}

/// Binary raster.
pub type Mask = Raster<bool>;

/// Real-valued raster (probabilities, distance maps, elevations).
pub type RealRaster = Raster<f64>;

impl<T> Raster<T> {
    pub fn from_vec(width: usize, height: usize, data: Vec<T>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyRaster { width, height });
        }
        if data.len() != width * height {
            return Err(Error::BufferLength {
                width,
                height,
                len: data.len(),
            });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// Builds a raster by evaluating `f(row, col)` for every pixel.
    ///
    /// # Panics
    /// Panics if either dimension is zero.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        assert!(width > 0 && height > 0, "raster dimensions must be positive");
        let mut data = Vec::with_capacity(width * height);
        for r in 0..height {
            for c in 0..width {
                data.push(f(r, c));
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    /// `(width, height)`.
    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn data(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn index_of(&self, row: usize, col: usize) -> usize {
        debug_assert!(row < self.height && col < self.width);
        row * self.width + col
    }

    /// Value at `(row, col)` or `None` when the signed coordinate is out of bounds.
    #[inline]
    pub fn get_signed(&self, row: isize, col: isize) -> Option<&T> {
        if row < 0 || col < 0 || row as usize >= self.height || col as usize >= self.width {
            None
        } else {
            Some(&self.data[row as usize * self.width + col as usize])
        }
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Raster<U> {
        Raster {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn zip_map<U, V>(&self, other: &Raster<U>, mut f: impl FnMut(&T, &U) -> V) -> Result<Raster<V>> {
        self.check_same_dims(other)?;
        Ok(Raster {
            width: self.width,
            height: self.height,
            data: self
                .data
                .iter()
                .zip(other.data.iter())
                .map(|(a, b)| f(a, b))
                .collect(),
        })
    }

    pub fn check_same_dims<U>(&self, other: &Raster<U>) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::DimensionMismatch {
                expected: self.dims(),
                found: other.dims(),
            });
        }
        Ok(())
    }
}

impl<T: Clone> Raster<T> {
    /// # Panics
    /// Panics if either dimension is zero.
    pub fn filled(width: usize, height: usize, value: T) -> Self {
        assert!(width > 0 && height > 0, "raster dimensions must be positive");
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    /// Mirror left-right.
    pub fn flip_h(&self) -> Self {
        Self::from_fn(self.width, self.height, |r, c| {
            self[(r, self.width - 1 - c)].clone()
        })
    }

    /// Mirror top-bottom.
    pub fn flip_v(&self) -> Self {
        Self::from_fn(self.width, self.height, |r, c| {
            self[(self.height - 1 - r, c)].clone()
        })
    }

    /// Rotate 90° clockwise; the result is `height × width`.
    pub fn rot90(&self) -> Self {
        let (w, h) = (self.width, self.height);
        Self::from_fn(h, w, |r, c| self[(h - 1 - c, r)].clone())
    }

    pub fn rot180(&self) -> Self {
        let (w, h) = (self.width, self.height);
        Self::from_fn(w, h, |r, c| self[(h - 1 - r, w - 1 - c)].clone())
    }

    pub fn rot270(&self) -> Self {
        let (w, h) = (self.width, self.height);
        Self::from_fn(h, w, |r, c| self[(c, w - 1 - r)].clone())
    }

    /// Copy of the window starting at `(row, col)`; the window must lie inside the raster.
    pub fn crop(&self, row: usize, col: usize, width: usize, height: usize) -> Self {
        assert!(row + height <= self.height && col + width <= self.width);
        Self::from_fn(width, height, |r, c| self[(row + r, col + c)].clone())
    }
}

impl RealRaster {
    /// Rejects NaN and infinite values.
    pub fn check_finite(&self) -> Result<()> {
        match self.data.iter().position(|v| !v.is_finite()) {
            Some(i) => Err(Error::NonFinite {
                row: i / self.width,
                col: i % self.width,
            }),
            None => Ok(()),
        }
    }
}

impl Mask {
    pub fn count_on(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }
}

impl<T> Index<(usize, usize)> for Raster<T> {
    type Output = T;

    #[inline]
    fn index(&self, (row, col): (usize, usize)) -> &T {
        &self.data[self.index_of(row, col)]
    }
}

impl<T> IndexMut<(usize, usize)> for Raster<T> {
    #[inline]
    fn index_mut(&mut self, (row, col): (usize, usize)) -> &mut T {
        let i = self.index_of(row, col);
        &mut self.data[i]
    }
}

/// Pixel adjacency.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Connectivity {
    #[serde(rename = "4")]
    Four,
    #[serde(rename = "8")]
    Eight,
}

const N4: [(isize, isize); 4] = [(-1, 0), (0, -1), (0, 1), (1, 0)];
const N8: [(isize, isize); 8] = [
    (-1, -1),
    (-1, 0),
    (-1, 1),
    (0, -1),
    (0, 1),
    (1, -1),
    (1, 0),
    (1, 1),
];

impl Connectivity {
    /// Neighbor offsets `(drow, dcol)` in scan order.
    pub fn offsets(self) -> &'static [(isize, isize)] {
        match self {
            Connectivity::Four => &N4,
            Connectivity::Eight => &N8,
        }
    }
}

/// Axis-aligned bounding box, inclusive on both ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundingBox {
    pub min_row: usize,
    pub min_col: usize,
    pub max_row: usize,
    pub max_col: usize,
}

impl BoundingBox {
    fn point(row: usize, col: usize) -> Self {
        Self {
            min_row: row,
            min_col: col,
            max_row: row,
            max_col: col,
        }
    }

    fn include(&mut self, row: usize, col: usize) {
        self.min_row = self.min_row.min(row);
        self.min_col = self.min_col.min(col);
        self.max_row = self.max_row.max(row);
        self.max_col = self.max_col.max(col);
    }

    pub fn width(&self) -> usize {
        self.max_col - self.min_col + 1
    }

    pub fn height(&self) -> usize {
        self.max_row - self.min_row + 1
    }

    pub fn union(&self, other: &Self) -> Self {
        Self {
            min_row: self.min_row.min(other.min_row),
            min_col: self.min_col.min(other.min_col),
            max_row: self.max_row.max(other.max_row),
            max_col: self.max_col.max(other.max_col),
        }
    }
}

/// Instance label map: 0 is background, `1..=n_labels` are objects.
///
/// Labels are always canonical: numbered in order of each object's first
/// pixel in row-major scan order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LabelMap {
    raster: Raster<u32>,
    n_labels: u32,
}

impl LabelMap {
    /// All-background map.
    pub fn empty(width: usize, height: usize) -> Self {
        Self {
            raster: Raster::filled(width, height, 0),
            n_labels: 0,
        }
    }

    /// Renumbers arbitrary nonzero ids into canonical order.
    ///
    /// Pixels sharing an id form one object even when they are not connected.
    pub fn from_raster(raster: Raster<u32>) -> Self {
        let mut raster = raster;
        let mut remap = std::collections::HashMap::new();
        let mut next = 0u32;
        for v in raster.data_mut() {
            if *v != 0 {
                *v = *remap.entry(*v).or_insert_with(|| {
                    next += 1;
                    next
                });
            }
        }
        Self {
            raster,
            n_labels: next,
        }
    }

    /// Wraps a raster whose labels are already canonical. Used internally by
    /// producers that assign labels in scan order.
    pub(crate) fn from_canonical(raster: Raster<u32>, n_labels: u32) -> Self {
        debug_assert_eq!(Self::from_raster(raster.clone()).raster, raster);
        Self { raster, n_labels }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.raster.width()
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.raster.height()
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        self.raster.dims()
    }

    #[inline]
    pub fn n_labels(&self) -> u32 {
        self.n_labels
    }

    #[inline]
    pub fn raster(&self) -> &Raster<u32> {
        &self.raster
    }

    pub fn into_raster(self) -> Raster<u32> {
        self.raster
    }

    #[inline]
    pub fn data(&self) -> &[u32] {
        self.raster.data()
    }

    pub fn foreground(&self) -> Mask {
        self.raster.map(|&v| v != 0)
    }

    /// Mask of a single label.
    pub fn object_mask(&self, label: u32) -> Mask {
        self.raster.map(|&v| v == label)
    }

    /// Pixel count per label; index 0 counts background.
    pub fn areas(&self) -> Vec<usize> {
        let mut areas = vec![0usize; self.n_labels as usize + 1];
        for &v in self.raster.data() {
            areas[v as usize] += 1;
        }
        areas
    }

    /// Bounding box per label; index 0 is unused and always `None`.
    pub fn bounding_boxes(&self) -> Vec<Option<BoundingBox>> {
        let mut boxes: Vec<Option<BoundingBox>> = vec![None; self.n_labels as usize + 1];
        let w = self.width();
        for (i, &v) in self.raster.data().iter().enumerate() {
            if v == 0 {
                continue;
            }
            let (r, c) = (i / w, i % w);
            match &mut boxes[v as usize] {
                Some(b) => b.include(r, c),
                slot @ None => *slot = Some(BoundingBox::point(r, c)),
            }
        }
        boxes
    }

    /// Applies a geometric transform to the raster and re-canonicalizes.
    pub fn transformed(&self, f: impl FnOnce(&Raster<u32>) -> Raster<u32>) -> Self {
        Self::from_raster(f(&self.raster))
    }
}
