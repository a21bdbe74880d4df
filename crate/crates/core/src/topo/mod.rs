//! Ground-truth generation: erosion depth, medial-axis distance maps,
//! distance-metric variants, skeletons, contours and watershed markers.

mod depth;
pub mod edt;
mod skeleton;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::morph::{connected_components, fill_holes, remove_small, StructuringElement};
use crate::raster::{Connectivity, LabelMap, Mask, RealRaster};

pub use depth::{erosion_depth, DepthMap};
pub use skeleton::{skeletonize, skeletonize_with, Skeleton};

/// Marker seeds, one connected region per gland.
pub type MarkerMap = LabelMap;

/// Default marker threshold on the MA map.
pub const DEFAULT_TAU_M: f64 = 0.7;
/// Default minimum marker area in pixels.
pub const DEFAULT_MIN_MARKER_AREA: usize = 16;

/// Distance used to build the per-gland normalized map.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceMetric {
    /// Erosion depth under the configured structuring element.
    #[default]
    Ma,
    Chessboard,
    Euclidean,
}

impl std::str::FromStr for DistanceMetric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "ma" => Ok(Self::Ma),
            "chessboard" => Ok(Self::Chessboard),
            "euclidean" => Ok(Self::Euclidean),
            other => Err(format!("unknown distance metric `{other}`")),
        }
    }
}

/// How raw per-gland distances are scaled into the map.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// `d / max d`: background 0, ridge exactly 1.
    #[default]
    MaxDepth,
    /// `d / (max d − min d)`, the unreduced form. Exceeds 1 on most glands.
    MaxMinusMin,
}

impl std::str::FromStr for Normalization {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "max_depth" => Ok(Self::MaxDepth),
            "max_minus_min" => Ok(Self::MaxMinusMin),
            other => Err(format!("unknown normalization `{other}`")),
        }
    }
}

/// Per-gland normalized medial-axis distance map.
///
/// 0 exactly on background; within every gland the maximum is exactly 1
/// under [`Normalization::MaxDepth`].
#[derive(Debug, Clone, PartialEq)]
pub struct MaDistanceMap(RealRaster);

impl MaDistanceMap {
    pub fn raster(&self) -> &RealRaster {
        &self.0
    }

    pub fn into_raster(self) -> RealRaster {
        self.0
    }
}

fn normalize(labels: &LabelMap, raw: &[f64], norm: Normalization) -> RealRaster {
    let n = labels.n_labels() as usize + 1;
    let mut max = vec![0.0f64; n];
    let mut min = vec![f64::INFINITY; n];
    for (&l, &d) in labels.data().iter().zip(raw) {
        if l != 0 {
            max[l as usize] = max[l as usize].max(d);
            min[l as usize] = min[l as usize].min(d);
        }
    }
    let scale: Vec<f64> = (0..n)
        .map(|l| match norm {
            Normalization::MaxDepth => max[l],
            Normalization::MaxMinusMin => max[l] - min[l],
        })
        .collect();
    let data = labels
        .data()
        .iter()
        .zip(raw)
        .map(|(&l, &d)| {
            if l == 0 {
                0.0
            } else if scale[l as usize] > 0.0 {
                d / scale[l as usize]
            } else {
                // thin or single-pixel gland: the whole object is ridge
                1.0
            }
        })
        .collect();
    RealRaster::from_vec(labels.width(), labels.height(), data).expect("dimensions preserved")
}

/// MA distance map from erosion depth, max-normalized per gland.
pub fn ma_distance_map(labels: &LabelMap, se: StructuringElement) -> MaDistanceMap {
    ma_distance_map_with(labels, se, Normalization::MaxDepth)
}

pub fn ma_distance_map_with(
    labels: &LabelMap,
    se: StructuringElement,
    norm: Normalization,
) -> MaDistanceMap {
    let depth = erosion_depth(labels, se);
    let raw: Vec<f64> = depth.raster().data().iter().map(|&d| d as f64).collect();
    MaDistanceMap(normalize(labels, &raw, norm))
}

/// Raw distance from each gland pixel to the nearest pixel outside its
/// gland (out-of-bounds counts as outside). Background is 0.
pub fn raw_distance(labels: &LabelMap, metric: DistanceMetric, se: StructuringElement) -> RealRaster {
    match metric {
        DistanceMetric::Ma => erosion_depth(labels, se).raster().map(|&d| d as f64),
        DistanceMetric::Chessboard => erosion_depth(labels, StructuringElement::Square3x3)
            .raster()
            .map(|&d| d as f64),
        DistanceMetric::Euclidean => euclidean_distance(labels),
    }
}

fn euclidean_distance(labels: &LabelMap) -> RealRaster {
    let (w, h) = labels.dims();
    let mut out = RealRaster::filled(w, h, 0.0);
    for (label, bbox) in labels.bounding_boxes().into_iter().enumerate().skip(1) {
        let Some(b) = bbox else { continue };
        // The padded frame lies entirely outside the gland, so it contains
        // the nearest outside pixel of every gland pixel.
        let lw = b.width() + 2;
        let lh = b.height() + 2;
        let outside = Mask::from_fn(lw, lh, |r, c| {
            if r == 0 || c == 0 || r == lh - 1 || c == lw - 1 {
                return true;
            }
            labels.raster()[(b.min_row + r - 1, b.min_col + c - 1)] != label as u32
        });
        let sq = edt::squared_edt(&outside);
        for r in 0..b.height() {
            for c in 0..b.width() {
                let (gr, gc) = (b.min_row + r, b.min_col + c);
                if labels.raster()[(gr, gc)] == label as u32 {
                    out[(gr, gc)] = sq[(r + 1, c + 1)].sqrt();
                }
            }
        }
    }
    out
}

/// Per-gland max-normalized distance map under `metric` (square element for
/// the erosion-depth variant).
pub fn distance_map(labels: &LabelMap, metric: DistanceMetric) -> RealRaster {
    distance_map_with(labels, metric, StructuringElement::Square3x3, Normalization::MaxDepth)
}

pub fn distance_map_with(
    labels: &LabelMap,
    metric: DistanceMetric,
    se: StructuringElement,
    norm: Normalization,
) -> RealRaster {
    let raw = raw_distance(labels, metric, se);
    normalize(labels, raw.data(), norm)
}

/// Pixels within `thickness` erosion steps of their gland's boundary.
pub fn contour_map(labels: &LabelMap, thickness: u32) -> Result<Mask> {
    contour_map_with(labels, thickness, StructuringElement::Square3x3)
}

pub fn contour_map_with(labels: &LabelMap, thickness: u32, se: StructuringElement) -> Result<Mask> {
    if thickness == 0 {
        return Err(Error::invalid("thickness", "must be at least 1"));
    }
    Ok(erosion_depth(labels, se)
        .raster()
        .map(|&d| d != 0 && d <= thickness))
}

/// Marker seeds: connected components of `{MA ≥ tau_m}`, holes filled,
/// components smaller than `min_area` removed.
pub fn marker_gt(ma: &RealRaster, tau_m: f64, min_area: usize) -> Result<MarkerMap> {
    check_unit_open("tau_m", tau_m)?;
    let seeds = fill_holes(&ma.map(|&v| v >= tau_m));
    Ok(remove_small(&connected_components(&seeds, Connectivity::Eight), min_area))
}

pub(crate) fn check_unit_open(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("{v} is not in (0, 1)")))
    }
}

/// Every ground-truth map derived from one label map.
#[derive(Debug, Clone)]
pub struct GroundTruth {
    pub distance: RealRaster,
    pub skeleton: Skeleton,
    pub contour: Mask,
    pub markers: MarkerMap,
}

/// Options for [`ground_truth`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GtConfig {
    pub metric: DistanceMetric,
    pub se: StructuringElement,
    pub normalization: Normalization,
    pub contour_thickness: u32,
    pub tau_m: f64,
    pub min_marker_area: usize,
}

impl Default for GtConfig {
    fn default() -> Self {
        Self {
            metric: DistanceMetric::Ma,
            se: StructuringElement::Square3x3,
            normalization: Normalization::MaxDepth,
            contour_thickness: 1,
            tau_m: DEFAULT_TAU_M,
            min_marker_area: DEFAULT_MIN_MARKER_AREA,
        }
    }
}

/// Computes the distance map, skeleton, contour and markers in one go,
/// sharing the erosion-depth pass.
pub fn ground_truth(labels: &LabelMap, cfg: &GtConfig) -> Result<GroundTruth> {
    let depth = erosion_depth(labels, cfg.se);
    let raw = match cfg.metric {
        DistanceMetric::Ma => depth.raster().map(|&d| d as f64),
        other => raw_distance(labels, other, cfg.se),
    };
    let distance = normalize(labels, raw.data(), cfg.normalization);
    let skeleton = skeleton::skeletonize_from_depth(labels, &depth);
    if cfg.contour_thickness == 0 {
        return Err(Error::invalid("contour_thickness", "must be at least 1"));
    }
    let contour = depth.raster().map(|&d| d != 0 && d <= cfg.contour_thickness);
    let markers = marker_gt(&distance, cfg.tau_m, cfg.min_marker_area)?;
    Ok(GroundTruth {
        distance,
        skeleton,
        contour,
        markers,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::Raster;

    fn rect(w: usize, h: usize, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> LabelMap {
        LabelMap::from_raster(Raster::from_fn(w, h, |r, c| {
            (rows.contains(&r) && cols.contains(&c)) as u32
        }))
    }

    fn disk(w: usize, h: usize, centers: &[(f64, f64, f64)]) -> LabelMap {
        LabelMap::from_raster(Raster::from_fn(w, h, |r, c| {
            centers
                .iter()
                .position(|&(cr, cc, rad)| {
                    let (dr, dc) = (r as f64 - cr, c as f64 - cc);
                    dr * dr + dc * dc <= rad * rad
                })
                .map_or(0, |i| i as u32 + 1)
        }))
    }

    #[test]
    fn ma_of_3x5_rectangle() {
        let lm = rect(7, 5, 1..4, 1..6);
        let ma = ma_distance_map(&lm, StructuringElement::Square3x3);
        let m = ma.raster();
        assert_eq!(m[(1, 1)], 0.5);
        assert_eq!(m[(3, 5)], 0.5);
        assert_eq!(m[(2, 1)], 0.5);
        assert_eq!(m[(2, 2)], 1.0);
        assert_eq!(m[(2, 4)], 1.0);
        assert_eq!(m[(0, 0)], 0.0);
    }

    #[test]
    fn literal_normalization_exceeds_one() {
        let lm = rect(7, 5, 1..4, 1..6);
        let ma = ma_distance_map_with(&lm, StructuringElement::Square3x3, Normalization::MaxMinusMin);
        // d in {1, 2}: 2 / (2 - 1)
        assert_eq!(ma.raster()[(2, 3)], 2.0);
        assert_eq!(ma.raster()[(1, 1)], 1.0);
    }

    #[test]
    fn single_pixel_gland_is_one() {
        let lm = rect(3, 3, 1..2, 1..2);
        for norm in [Normalization::MaxDepth, Normalization::MaxMinusMin] {
            let ma = ma_distance_map_with(&lm, StructuringElement::Square3x3, norm);
            assert_eq!(ma.raster()[(1, 1)], 1.0);
        }
        assert_eq!(distance_map(&lm, DistanceMetric::Euclidean)[(1, 1)], 1.0);
    }

    #[test]
    fn disk_is_monotone_along_rays() {
        let lm = disk(25, 25, &[(12.0, 12.0, 10.0)]);
        let ma = ma_distance_map(&lm, StructuringElement::Square3x3);
        let m = ma.raster();
        // rays from the boundary inward along rows, columns and diagonals
        for (dr, dc) in [(0i32, 1i32), (1, 0), (0, -1), (-1, 0), (1, 1), (-1, -1), (1, -1), (-1, 1)] {
            let mut prev = 0.0;
            for t in (0..=12).rev() {
                let (r, c) = (12 + dr * t, 12 + dc * t);
                if !(0..25).contains(&r) || !(0..25).contains(&c) {
                    continue;
                }
                let v = m[(r as usize, c as usize)];
                assert!(v >= prev, "ray {dr},{dc} at t={t}");
                prev = v;
            }
            assert_eq!(prev, 1.0);
        }
    }

    #[test]
    fn chessboard_equals_square_ma_on_rectangle() {
        let lm = rect(20, 15, 2..13, 3..17);
        assert_eq!(
            distance_map(&lm, DistanceMetric::Chessboard),
            *ma_distance_map(&lm, StructuringElement::Square3x3).raster()
        );
    }

    #[test]
    fn euclidean_thin_line_is_all_one() {
        let lm = rect(11, 3, 1..2, 1..10);
        let d = distance_map(&lm, DistanceMetric::Euclidean);
        assert!((1..10).all(|c| d[(1, c)] == 1.0));
        let raw = raw_distance(&lm, DistanceMetric::Euclidean, StructuringElement::Square3x3);
        assert!((1..10).all(|c| raw[(1, c)] == 1.0));
    }

    #[test]
    fn contour_of_5x5_block() {
        let lm = rect(7, 7, 1..6, 1..6);
        let c = contour_map(&lm, 1).unwrap();
        assert_eq!(c.count_on(), 16);
        assert!(!c[(3, 3)] && c[(1, 1)]);
        assert_eq!(contour_map(&lm, 3).unwrap(), lm.foreground());
        let empty = LabelMap::empty(7, 7);
        assert_eq!(contour_map(&empty, 1).unwrap().count_on(), 0);
        assert!(contour_map(&lm, 0).is_err());
    }

    #[test]
    fn markers_one_per_disk() {
        let lm = disk(60, 30, &[(15.0, 14.0, 10.0), (15.0, 44.0, 11.0)]);
        let ma = ma_distance_map(&lm, StructuringElement::Square3x3);
        let mk = marker_gt(ma.raster(), 0.7, 1).unwrap();
        assert_eq!(mk.n_labels(), 2);
        let (a, b) = (mk.raster()[(15, 14)], mk.raster()[(15, 44)]);
        assert!(a != 0 && b != 0 && a != b);

        // near-1 threshold still leaves a seed in each gland, on the ridge
        let mk = marker_gt(ma.raster(), 1.0 - 1e-9, 1).unwrap();
        assert_eq!(mk.n_labels(), 2);
        for (i, &v) in mk.data().iter().enumerate() {
            if v != 0 {
                assert_eq!(ma.raster().data()[i], 1.0);
            }
        }

        let empty = RealRaster::filled(10, 10, 0.0);
        assert_eq!(marker_gt(&empty, 0.7, 16).unwrap().n_labels(), 0);
        assert!(marker_gt(&empty, 1.0, 16).is_err());
    }

    #[test]
    fn ground_truth_bundle_agrees_with_single_ops() {
        let lm = disk(40, 40, &[(12.0, 12.0, 8.0), (26.0, 27.0, 9.0)]);
        let gt = ground_truth(&lm, &GtConfig::default()).unwrap();
        assert_eq!(gt.distance, *ma_distance_map(&lm, StructuringElement::Square3x3).raster());
        assert_eq!(gt.skeleton, skeletonize(&lm));
        assert_eq!(gt.contour, contour_map(&lm, 1).unwrap());
        assert_eq!(gt.markers, marker_gt(&gt.distance, DEFAULT_TAU_M, DEFAULT_MIN_MARKER_AREA).unwrap());
    }
}
