//! Inference-time postprocessing: threshold the instance map, seed markers
//! from the predicted MA map and flood with a marker-controlled watershed.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::morph::{connected_components, fill_holes, remove_small, StructuringElement};
use crate::raster::{Connectivity, LabelMap, Mask, RealRaster};
use crate::topo::{check_unit_open, marker_gt, MarkerMap, DEFAULT_MIN_MARKER_AREA, DEFAULT_TAU_M};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PostprocessConfig {
    /// Instance-probability threshold.
    pub tau_b: f64,
    /// Marker threshold on the predicted MA map.
    pub tau_m: f64,
    pub min_gland_area: usize,
    pub min_marker_area: usize,
    /// Also fixes the flooding and component connectivity.
    pub se: StructuringElement,
}

impl Default for PostprocessConfig {
    fn default() -> Self {
        Self {
            tau_b: 0.5,
            tau_m: DEFAULT_TAU_M,
            min_gland_area: 100,
            min_marker_area: DEFAULT_MIN_MARKER_AREA,
            se: StructuringElement::Square3x3,
        }
    }
}

impl PostprocessConfig {
    pub fn validate(&self) -> Result<()> {
        check_unit_open("tau_b", self.tau_b)?;
        check_unit_open("tau_m", self.tau_m)
    }
}

/// `prob >= tau`.
pub fn binarize(prob: &RealRaster, tau: f64) -> Result<Mask> {
    check_unit_open("tau", tau)?;
    Ok(prob.map(|&p| p >= tau))
}

#[derive(Debug, Clone, Copy)]
struct Entry {
    elevation: f64,
    seq: u64,
    index: usize,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    // reversed: BinaryHeap is a max-heap and we pop the lowest elevation,
    // earliest insertion first
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .elevation
            .total_cmp(&self.elevation)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Marker-controlled watershed by priority flood.
///
/// Pixels are labeled when first reached and expanded in order of
/// `(elevation, insertion sequence)`, so plateaus split by arrival order.
/// Region pixels no marker can reach stay 0, as does everything outside the
/// region.
pub fn watershed(
    region: &Mask,
    elevation: &RealRaster,
    markers: &MarkerMap,
    connectivity: Connectivity,
) -> Result<LabelMap> {
    region.check_same_dims(elevation)?;
    region.check_same_dims(markers.raster())?;
    elevation.check_finite()?;
    let (w, h) = region.dims();

    let mut labels = markers.raster().clone();
    let mut heap = BinaryHeap::new();
    let mut seq = 0u64;
    for (i, &l) in markers.data().iter().enumerate() {
        if l == 0 {
            continue;
        }
        if !region.data()[i] {
            return Err(Error::MarkerOutsideRegion {
                label: l,
                row: i / w,
                col: i % w,
            });
        }
        heap.push(Entry {
            elevation: elevation.data()[i],
            seq,
            index: i,
        });
        seq += 1;
    }

    let offsets = connectivity.offsets();
    while let Some(Entry { index, .. }) = heap.pop() {
        let label = labels.data()[index];
        let (r, c) = ((index / w) as isize, (index % w) as isize);
        for &(dr, dc) in offsets {
            let (nr, nc) = (r + dr, c + dc);
            if nr < 0 || nc < 0 || nr as usize >= h || nc as usize >= w {
                continue;
            }
            let j = nr as usize * w + nc as usize;
            if region.data()[j] && labels.data()[j] == 0 {
                labels.data_mut()[j] = label;
                heap.push(Entry {
                    elevation: elevation.data()[j],
                    seq,
                    index: j,
                });
                seq += 1;
            }
        }
    }
    Ok(LabelMap::from_raster(labels))
}

/// Full postprocessing chain from an instance-probability map and a
/// predicted MA map to a gland label map.
pub fn postprocess_pipeline(
    inst_prob: &RealRaster,
    ma_pred: &RealRaster,
    cfg: &PostprocessConfig,
) -> Result<LabelMap> {
    cfg.validate()?;
    inst_prob.check_same_dims(ma_pred)?;
    inst_prob.check_finite()?;
    ma_pred.check_finite()?;
    let connectivity = cfg.se.connectivity();

    let binary = binarize(inst_prob, cfg.tau_b)?;
    let kept = remove_small(&connected_components(&binary, connectivity), cfg.min_gland_area);
    let region = fill_holes(&kept.foreground());

    // markers the region does not support are dropped, not rejected
    let seeds = marker_gt(ma_pred, cfg.tau_m, cfg.min_marker_area)?;
    let inside = seeds.foreground().zip_map(&region, |&s, &r| s && r)?;
    let markers = connected_components(&inside, connectivity);

    let elevation = ma_pred.map(|&v| -v);
    let flooded = watershed(&region, &elevation, &markers, connectivity)?;
    Ok(remove_small(&flooded, cfg.min_gland_area))
}
