//! Object-level evaluation: detection F1, object Dice and object Hausdorff.
//!
//! Object Dice and object Hausdorff are two-sided, area-weighted sums: every
//! ground-truth object is scored against its best predicted counterpart and
//! every predicted object against its best ground-truth counterpart, and
//! the two halves are averaged.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::raster::{BoundingBox, LabelMap, Mask};
use crate::topo::edt::squared_edt;

/// When a predicted object counts as detecting its ground-truth object.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchCriterion {
    /// `|S ∩ G| / |G| > 0.5`.
    #[default]
    GtFraction,
    /// `|S ∩ G| / |S ∪ G| > 0.5`.
    Iou,
}

impl std::str::FromStr for MatchCriterion {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "gt_fraction" => Ok(Self::GtFraction),
            "iou" => Ok(Self::Iou),
            other => Err(format!("unknown match criterion `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchKind {
    TruePositive,
    FalsePositive,
    FalseNegative,
}

/// One row of the detection matching. Unmatched sides carry id 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectMatch {
    pub gt_id: u32,
    pub pred_id: u32,
    pub overlap: usize,
    /// `overlap / |G|`.
    pub overlap_fraction: f64,
    pub kind: MatchKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct F1Score {
    pub f1: f64,
    pub precision: f64,
    pub recall: f64,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub f1: f64,
    pub precision: f64,
    pub recall: f64,
    pub obj_dice: f64,
    pub obj_hausdorff: f64,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

/// Pixel overlaps between the objects of two label maps.
struct Overlaps {
    pred_area: Vec<usize>,
    gt_area: Vec<usize>,
    /// `(pred, gt) -> |S ∩ G|`, nonzero entries only.
    table: BTreeMap<(u32, u32), usize>,
}

impl Overlaps {
    fn new(pred: &LabelMap, gt: &LabelMap) -> Result<Self> {
        pred.raster().check_same_dims(gt.raster())?;
        let mut table = BTreeMap::new();
        for (&p, &g) in pred.data().iter().zip(gt.data()) {
            if p != 0 && g != 0 {
                *table.entry((p, g)).or_insert(0) += 1;
            }
        }
        Ok(Self {
            pred_area: pred.areas(),
            gt_area: gt.areas(),
            table,
        })
    }

    /// Largest-overlap GT object of each predicted object (ties: lowest id).
    fn best_gt_for_pred(&self) -> Vec<Option<(u32, usize)>> {
        let mut best: Vec<Option<(u32, usize)>> = vec![None; self.pred_area.len()];
        for (&(p, g), &o) in &self.table {
            let slot = &mut best[p as usize];
            if slot.is_none_or(|(_, bo)| o > bo) {
                *slot = Some((g, o));
            }
        }
        best
    }

    fn best_pred_for_gt(&self) -> Vec<Option<(u32, usize)>> {
        let mut best: Vec<Option<(u32, usize)>> = vec![None; self.gt_area.len()];
        // iterate in (gt, pred) order so ties resolve to the lowest pred id
        let mut by_gt: Vec<((u32, u32), usize)> =
            self.table.iter().map(|(&(p, g), &o)| ((g, p), o)).collect();
        by_gt.sort_unstable();
        for ((g, p), o) in by_gt {
            let slot = &mut best[g as usize];
            if slot.is_none_or(|(_, bo)| o > bo) {
                *slot = Some((p, o));
            }
        }
        best
    }
}

/// Matches each predicted object to the GT object it overlaps most. A pair
/// is a true positive when it meets `criterion` and the GT object has not
/// been claimed by a larger overlap already.
pub fn match_objects(pred: &LabelMap, gt: &LabelMap, criterion: MatchCriterion) -> Result<Vec<ObjectMatch>> {
    let ov = Overlaps::new(pred, gt)?;
    let best = ov.best_gt_for_pred();

    let mut candidates: Vec<(usize, u32, u32)> = Vec::new();
    for (p, b) in best.iter().enumerate().skip(1) {
        let Some((g, o)) = *b else { continue };
        let ga = ov.gt_area[g as usize] as f64;
        let pa = ov.pred_area[p] as f64;
        let ok = match criterion {
            MatchCriterion::GtFraction => o as f64 / ga > 0.5,
            MatchCriterion::Iou => o as f64 / (ga + pa - o as f64) > 0.5,
        };
        if ok {
            candidates.push((o, p as u32, g));
        }
    }
    candidates.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));

    let mut claimed = vec![false; ov.gt_area.len()];
    let mut pred_match: Vec<Option<(u32, usize)>> = vec![None; ov.pred_area.len()];
    for (o, p, g) in candidates {
        if !claimed[g as usize] {
            claimed[g as usize] = true;
            pred_match[p as usize] = Some((g, o));
        }
    }

    let mut out = Vec::with_capacity(ov.pred_area.len() + ov.gt_area.len());
    for p in 1..ov.pred_area.len() {
        out.push(match pred_match[p] {
            Some((g, o)) => ObjectMatch {
                gt_id: g,
                pred_id: p as u32,
                overlap: o,
                overlap_fraction: o as f64 / ov.gt_area[g as usize] as f64,
                kind: MatchKind::TruePositive,
            },
            None => ObjectMatch {
                gt_id: 0,
                pred_id: p as u32,
                overlap: 0,
                overlap_fraction: 0.0,
                kind: MatchKind::FalsePositive,
            },
        });
    }
    for g in 1..ov.gt_area.len() {
        if !claimed[g] {
            out.push(ObjectMatch {
                gt_id: g as u32,
                pred_id: 0,
                overlap: 0,
                overlap_fraction: 0.0,
                kind: MatchKind::FalseNegative,
            });
        }
    }
    Ok(out)
}

/// Detection F1. Two empty maps score 1 on every field.
pub fn object_f1(pred: &LabelMap, gt: &LabelMap) -> Result<F1Score> {
    object_f1_with(pred, gt, MatchCriterion::GtFraction)
}

pub fn object_f1_with(pred: &LabelMap, gt: &LabelMap, criterion: MatchCriterion) -> Result<F1Score> {
    let matches = match_objects(pred, gt, criterion)?;
    let count = |k: MatchKind| matches.iter().filter(|m| m.kind == k).count();
    let (tp, fp, fn_) = (
        count(MatchKind::TruePositive),
        count(MatchKind::FalsePositive),
        count(MatchKind::FalseNegative),
    );
    Ok(f1_from_counts(tp, fp, fn_))
}

pub fn f1_from_counts(tp: usize, fp: usize, fn_: usize) -> F1Score {
    if tp + fp + fn_ == 0 {
        return F1Score {
            f1: 1.0,
            precision: 1.0,
            recall: 1.0,
            tp,
            fp,
            fn_,
        };
    }
    let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    // 2PR/(P+R) reduced to counts: one rounding instead of four
    let f1 = ratio(2 * tp, 2 * tp + fp + fn_);
    F1Score {
        f1,
        precision,
        recall,
        tp,
        fp,
        fn_,
    }
}

/// Two-sided area-weighted object Dice. Both maps empty scores 1.
pub fn object_dice(pred: &LabelMap, gt: &LabelMap) -> Result<f64> {
    let ov = Overlaps::new(pred, gt)?;
    let (np, ng) = (pred.n_labels(), gt.n_labels());
    if np == 0 && ng == 0 {
        return Ok(1.0);
    }
    if np == 0 || ng == 0 {
        return Ok(0.0);
    }
    let side = |own: &[usize], other: &[usize], best: &[Option<(u32, usize)>]| {
        let total: usize = own[1..].iter().sum();
        (1..own.len())
            .map(|i| {
                let dice = match best[i] {
                    Some((j, o)) => 2.0 * o as f64 / (own[i] + other[j as usize]) as f64,
                    None => 0.0,
                };
                own[i] as f64 * dice
            })
            .sum::<f64>()
            / total as f64
    };
    let gt_side = side(&ov.gt_area, &ov.pred_area, &ov.best_pred_for_gt());
    let pred_side = side(&ov.pred_area, &ov.gt_area, &ov.best_gt_for_pred());
    Ok(0.5 * (gt_side + pred_side))
}

/// Boundary pixels of every object: pixels with a 4-neighbor of another
/// label, background, or outside the raster. Index 0 is unused.
pub fn object_boundaries(labels: &LabelMap) -> Vec<Vec<(usize, usize)>> {
    let (w, h) = labels.dims();
    let mut out = vec![Vec::new(); labels.n_labels() as usize + 1];
    let lab = labels.raster();
    for r in 0..h {
        for c in 0..w {
            let l = lab[(r, c)];
            if l == 0 {
                continue;
            }
            let edge = r == 0
                || c == 0
                || r == h - 1
                || c == w - 1
                || lab[(r - 1, c)] != l
                || lab[(r + 1, c)] != l
                || lab[(r, c - 1)] != l
                || lab[(r, c + 1)] != l;
            if edge {
                out[l as usize].push((r, c));
            }
        }
    }
    out
}

fn bbox_of(points: &[(usize, usize)]) -> BoundingBox {
    let mut b = BoundingBox {
        min_row: usize::MAX,
        min_col: usize::MAX,
        max_row: 0,
        max_col: 0,
    };
    for &(r, c) in points {
        b.min_row = b.min_row.min(r);
        b.min_col = b.min_col.min(c);
        b.max_row = b.max_row.max(r);
        b.max_col = b.max_col.max(c);
    }
    b
}

/// `max_{a ∈ from} min_{b ∈ to} ‖a − b‖` via an exact distance transform of
/// `to` over a window holding both sets.
fn directed_hausdorff(from: &[(usize, usize)], to: &[(usize, usize)], window: &BoundingBox) -> f64 {
    let mut features = Mask::filled(window.width(), window.height(), false);
    for &(r, c) in to {
        features[(r - window.min_row, c - window.min_col)] = true;
    }
    let sq = squared_edt(&features);
    from.iter()
        .map(|&(r, c)| sq[(r - window.min_row, c - window.min_col)])
        .fold(0.0, f64::max)
        .sqrt()
}

/// Symmetric Hausdorff distance between two boundary point sets.
pub fn hausdorff(a: &[(usize, usize)], b: &[(usize, usize)]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return f64::INFINITY;
    }
    let window = bbox_of(a).union(&bbox_of(b));
    directed_hausdorff(a, b, &window).max(directed_hausdorff(b, a, &window))
}

/// Two-sided area-weighted object Hausdorff distance, in pixels.
///
/// An object's counterpart is the other map's object with the largest
/// overlap, or the one at the smallest Hausdorff distance if none overlaps.
/// If the other map is empty the image diagonal is used. Both maps empty
/// scores 0.
pub fn object_hausdorff(pred: &LabelMap, gt: &LabelMap) -> Result<f64> {
    let ov = Overlaps::new(pred, gt)?;
    let (np, ng) = (pred.n_labels(), gt.n_labels());
    if np == 0 && ng == 0 {
        return Ok(0.0);
    }
    let (w, h) = pred.dims();
    let diagonal = ((w * w + h * h) as f64).sqrt();
    if np == 0 || ng == 0 {
        return Ok(diagonal);
    }
    let pred_b = object_boundaries(pred);
    let gt_b = object_boundaries(gt);

    let side = |own_area: &[usize],
                own_b: &[Vec<(usize, usize)>],
                other_b: &[Vec<(usize, usize)>],
                best: &[Option<(u32, usize)>]| {
        let total: usize = own_area[1..].iter().sum();
        (1..own_area.len())
            .map(|i| {
                let d = match best[i] {
                    Some((j, _)) => hausdorff(&own_b[i], &other_b[j as usize]),
                    None => other_b[1..]
                        .iter()
                        .map(|b| hausdorff(&own_b[i], b))
                        .fold(f64::INFINITY, f64::min),
                };
                own_area[i] as f64 * d
            })
            .sum::<f64>()
            / total as f64
    };
    let gt_side = side(&ov.gt_area, &gt_b, &pred_b, &ov.best_pred_for_gt());
    let pred_side = side(&ov.pred_area, &pred_b, &gt_b, &ov.best_gt_for_pred());
    Ok(0.5 * (gt_side + pred_side))
}

/// All object-level metrics for one image.
pub fn evaluate(pred: &LabelMap, gt: &LabelMap, criterion: MatchCriterion) -> Result<MetricsReport> {
    let f1 = object_f1_with(pred, gt, criterion)?;
    Ok(MetricsReport {
        f1: f1.f1,
        precision: f1.precision,
        recall: f1.recall,
        obj_dice: object_dice(pred, gt)?,
        obj_hausdorff: object_hausdorff(pred, gt)?,
        tp: f1.tp,
        fp: f1.fp,
        fn_: f1.fn_,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::Raster;

    fn blocks(w: usize, h: usize, rects: &[(usize, usize, usize, usize)]) -> LabelMap {
        // (row, col, height, width)
        LabelMap::from_raster(Raster::from_fn(w, h, |r, c| {
            rects
                .iter()
                .position(|&(r0, c0, hh, ww)| (r0..r0 + hh).contains(&r) && (c0..c0 + ww).contains(&c))
                .map_or(0, |i| i as u32 + 1)
        }))
    }

    #[test]
    fn perfect_prediction() {
        let gt = blocks(20, 20, &[(1, 1, 5, 5), (10, 10, 6, 4)]);
        let m = match_objects(&gt, &gt, MatchCriterion::GtFraction).unwrap();
        assert!(m.iter().all(|x| x.kind == MatchKind::TruePositive && x.overlap_fraction == 1.0));
        let r = evaluate(&gt, &gt, MatchCriterion::GtFraction).unwrap();
        assert_eq!((r.f1, r.obj_dice, r.obj_hausdorff), (1.0, 1.0, 0.0));
    }

    #[test]
    fn empty_prediction() {
        let gt = blocks(20, 20, &[(1, 1, 5, 5), (10, 10, 6, 4)]);
        let pred = LabelMap::empty(20, 20);
        let f = object_f1(&pred, &gt).unwrap();
        assert_eq!((f.tp, f.fn_, f.f1), (0, 2, 0.0));
        assert_eq!(object_dice(&pred, &gt).unwrap(), 0.0);
        assert_eq!(object_hausdorff(&pred, &gt).unwrap(), (800f64).sqrt());
        let e = LabelMap::empty(20, 20);
        assert_eq!(object_f1(&e, &e).unwrap().f1, 1.0);
        assert_eq!(object_dice(&e, &e).unwrap(), 1.0);
        assert_eq!(object_hausdorff(&e, &e).unwrap(), 0.0);
    }

    #[test]
    fn forty_percent_overlap_is_fp_and_fn() {
        // GT is 5x10 = 50 px; the prediction covers 20 of them plus 5 outside
        let gt = blocks(10, 10, &[(0, 0, 5, 10)]);
        let pred = blocks(10, 10, &[(1, 0, 5, 5)]);
        let overlap = (0..10)
            .flat_map(|r| (0..10).map(move |c| (r, c)))
            .filter(|&p| gt.raster()[p] != 0 && pred.raster()[p] != 0)
            .count();
        assert_eq!(overlap, 20);
        let m = match_objects(&pred, &gt, MatchCriterion::GtFraction).unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m[0].kind, MatchKind::FalsePositive);
        assert_eq!(m[1].kind, MatchKind::FalseNegative);
        let f = object_f1(&pred, &gt).unwrap();
        assert_eq!((f.tp, f.fp, f.fn_), (0, 1, 1));
    }

    #[test]
    fn half_detected_f1() {
        let gt = blocks(30, 30, &[(0, 0, 5, 5), (0, 10, 5, 5), (10, 0, 5, 5), (10, 10, 5, 5)]);
        let pred = blocks(30, 30, &[(0, 0, 5, 5), (0, 10, 5, 5)]);
        let f = object_f1(&pred, &gt).unwrap();
        assert_eq!(f.precision, 1.0);
        assert_eq!(f.recall, 0.5);
        assert!((f.f1 - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn iou_criterion_is_stricter() {
        let gt = blocks(20, 20, &[(0, 0, 4, 4)]);
        // covers all 16 GT pixels but is 36 px: GT fraction 1.0, IoU 0.44
        let pred = blocks(20, 20, &[(0, 0, 6, 6)]);
        assert_eq!(object_f1_with(&pred, &gt, MatchCriterion::GtFraction).unwrap().tp, 1);
        assert_eq!(object_f1_with(&pred, &gt, MatchCriterion::Iou).unwrap().tp, 0);
    }

    #[test]
    fn translated_squares_hausdorff() {
        let gt = blocks(20, 10, &[(2, 2, 4, 4)]);
        let pred = blocks(20, 10, &[(2, 5, 4, 4)]);
        assert_eq!(object_hausdorff(&pred, &gt).unwrap(), 3.0);
        let a = [(0usize, 0usize)];
        let b = [(0usize, 3usize)];
        assert_eq!(hausdorff(&a, &b), 3.0);
    }

    #[test]
    fn dimension_mismatch() {
        let a = LabelMap::empty(4, 4);
        let b = LabelMap::empty(4, 5);
        assert!(object_dice(&a, &b).is_err());
        assert!(match_objects(&a, &b, MatchCriterion::Iou).is_err());
    }
}
