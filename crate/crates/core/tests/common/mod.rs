//! Random shape generators and brute-force reference implementations shared
//! by the integration tests.
#![allow(dead_code)]

use rand::Rng;
use topogland::{LabelMap, Mask, Raster, RealRaster};

/// Paints `n` random disks, rectangles and ellipses with labels 1..=n in
/// order, later shapes overwriting earlier ones.
pub fn random_shapes<R: Rng>(rng: &mut R, w: usize, h: usize, n: usize) -> LabelMap {
    let mut raster = Raster::filled(w, h, 0u32);
    for label in 1..=n as u32 {
        let cr = rng.gen_range(0.0..h as f64);
        let cc = rng.gen_range(0.0..w as f64);
        let a = rng.gen_range(0.5..(w.max(h) as f64 / 3.0).max(1.0));
        let b = rng.gen_range(0.5..(w.max(h) as f64 / 3.0).max(1.0));
        let kind = rng.gen_range(0..3);
        let theta: f64 = rng.gen_range(0.0..std::f64::consts::PI);
        let (s, c) = theta.sin_cos();
        for r in 0..h {
            for col in 0..w {
                let (y, x) = (r as f64 - cr, col as f64 - cc);
                let inside = match kind {
                    0 => x * x + y * y <= a * a,
                    1 => x.abs() <= a && y.abs() <= b,
                    _ => {
                        let u = x * c + y * s;
                        let v = -x * s + y * c;
                        (u / a).powi(2) + (v / b).powi(2) <= 1.0
                    }
                };
                if inside {
                    raster[(r, col)] = label;
                }
            }
        }
    }
    LabelMap::from_raster(raster)
}

/// Random mask made of a union of disks.
pub fn random_blob_mask<R: Rng>(rng: &mut R, w: usize, h: usize, n: usize) -> Mask {
    let mut m = Mask::filled(w, h, false);
    for _ in 0..n {
        let cr = rng.gen_range(0.0..h as f64);
        let cc = rng.gen_range(0.0..w as f64);
        let rad = rng.gen_range(1.0..(w.min(h) as f64 / 4.0).max(1.5));
        for r in 0..h {
            for c in 0..w {
                let (y, x) = (r as f64 - cr, c as f64 - cc);
                if x * x + y * y <= rad * rad {
                    m[(r, c)] = true;
                }
            }
        }
    }
    m
}

/// Annulus, optionally with a bite taken out of it.
pub fn ring_mask(w: usize, h: usize, outer: f64, inner: f64, cut: bool) -> Mask {
    let (cr, cc) = (h as f64 / 2.0, w as f64 / 2.0);
    Mask::from_fn(w, h, |r, c| {
        let (y, x) = (r as f64 - cr, c as f64 - cc);
        let d2 = x * x + y * y;
        let on = d2 <= outer * outer && d2 > inner * inner;
        on && !(cut && x > 0.0 && y.abs() < 2.0)
    })
}

/// Pixels of the same label in `labels` are inside; everything else,
/// including the ring of pixels just outside the raster, is outside.
fn outside_points(labels: &LabelMap, label: u32) -> Vec<(isize, isize)> {
    let (w, h) = labels.dims();
    let mut pts = Vec::new();
    for r in -1..=h as isize {
        for c in -1..=w as isize {
            let inside = r >= 0
                && c >= 0
                && (r as usize) < h
                && (c as usize) < w
                && labels.raster()[(r as usize, c as usize)] == label;
            if !inside {
                pts.push((r, c));
            }
        }
    }
    pts
}

/// Chebyshev distance from each labeled pixel to the nearest pixel outside
/// its own object. Background is 0.
pub fn brute_chessboard(labels: &LabelMap) -> Raster<u32> {
    let (w, h) = labels.dims();
    let mut out = Raster::filled(w, h, 0u32);
    for label in 1..=labels.n_labels() {
        let outside = outside_points(labels, label);
        for r in 0..h {
            for c in 0..w {
                if labels.raster()[(r, c)] == label {
                    out[(r, c)] = outside
                        .iter()
                        .map(|&(orow, ocol)| (orow - r as isize).unsigned_abs().max((ocol - c as isize).unsigned_abs()))
                        .min()
                        .unwrap() as u32;
                }
            }
        }
    }
    out
}

/// Euclidean distance from each labeled pixel to the nearest pixel outside
/// its own object.
pub fn brute_euclidean(labels: &LabelMap) -> RealRaster {
    let (w, h) = labels.dims();
    let mut out = RealRaster::filled(w, h, 0.0);
    for label in 1..=labels.n_labels() {
        let outside = outside_points(labels, label);
        for r in 0..h {
            for c in 0..w {
                if labels.raster()[(r, c)] == label {
                    out[(r, c)] = outside
                        .iter()
                        .map(|&(orow, ocol)| {
                            let (dy, dx) = ((orow - r as isize) as f64, (ocol - c as isize) as f64);
                            dy * dy + dx * dx
                        })
                        .fold(f64::INFINITY, f64::min)
                        .sqrt();
                }
            }
        }
    }
    out
}

/// Number of connected components of `value` pixels, found by repeated
/// scanning rather than a queue.
fn count_components(mask: &Mask, value: bool, eight: bool, skip_border: bool) -> usize {
    let (w, h) = mask.dims();
    let mut comp = vec![0usize; w * h];
    let mut next = 0;
    for start in 0..w * h {
        if mask.data()[start] != value || comp[start] != 0 {
            continue;
        }
        next += 1;
        comp[start] = next;
        loop {
            let mut grew = false;
            for i in 0..w * h {
                if mask.data()[i] != value || comp[i] != 0 {
                    continue;
                }
                let (r, c) = ((i / w) as isize, (i % w) as isize);
                let touches = (-1..=1isize).any(|dr| {
                    (-1..=1isize).any(|dc| {
                        let diag = dr != 0 && dc != 0;
                        if (dr == 0 && dc == 0) || (diag && !eight) {
                            return false;
                        }
                        let (nr, nc) = (r + dr, c + dc);
                        nr >= 0 && nc >= 0 && nr < h as isize && nc < w as isize && comp[nr as usize * w + nc as usize] == next
                    })
                });
                if touches {
                    comp[i] = next;
                    grew = true;
                }
            }
            if !grew {
                break;
            }
        }
    }
    if !skip_border {
        return next;
    }
    let mut touching = vec![false; next + 1];
    for r in 0..h {
        for c in 0..w {
            if r == 0 || c == 0 || r == h - 1 || c == w - 1 {
                touching[comp[r * w + c]] = true;
            }
        }
    }
    (1..=next).filter(|&k| !touching[k]).count()
}

/// (8-connected foreground components, 4-connected background holes).
pub fn topology(mask: &Mask) -> (usize, usize) {
    (count_components(mask, true, true, false), count_components(mask, false, false, true))
}

pub fn has_full_2x2(mask: &Mask) -> bool {
    let (w, h) = mask.dims();
    (0..h.saturating_sub(1)).any(|r| {
        (0..w.saturating_sub(1)).any(|c| mask[(r, c)] && mask[(r + 1, c)] && mask[(r, c + 1)] && mask[(r + 1, c + 1)])
    })
}

/// Ground truth plus a prediction that is either unrelated, a jittered
/// copy, or a copy with objects merged and dropped.
pub fn random_pair<R: Rng>(rng: &mut R) -> (LabelMap, LabelMap) {
    let (w, h) = (rng.gen_range(1..=32), rng.gen_range(1..=32));
    let n = rng.gen_range(0..=5);
    let gt = random_shapes(rng, w, h, n);
    let pred = match rng.gen_range(0..3) {
        0 => {
            let n = rng.gen_range(0..=5);
            random_shapes(rng, w, h, n)
        }
        1 => {
            let (dr, dc) = (rng.gen_range(-2..=2isize), rng.gen_range(-2..=2isize));
            LabelMap::from_raster(Raster::from_fn(w, h, |r, c| {
                gt.raster().get_signed(r as isize + dr, c as isize + dc).copied().unwrap_or(0)
            }))
        }
        _ => {
            let drop = rng.gen_range(1..=5u32);
            let merge = rng.gen_range(1..=5u32);
            LabelMap::from_raster(gt.raster().map(|&l| match l {
                l if l == drop => 0,
                l if l == merge => 1,
                l => l,
            }))
        }
    };
    (pred, gt)
}

// ---- metrics by direct formula ----

fn pixels(labels: &LabelMap, l: u32) -> Vec<(usize, usize)> {
    let (w, h) = labels.dims();
    let mut v = Vec::new();
    for r in 0..h {
        for c in 0..w {
            if labels.raster()[(r, c)] == l {
                v.push((r, c));
            }
        }
    }
    v
}

fn overlap(a: &LabelMap, la: u32, b: &LabelMap, lb: u32) -> usize {
    a.data().iter().zip(b.data()).filter(|&(&x, &y)| x == la && y == lb).count()
}

/// Object of `other` with the largest overlap with object `l` of `own`,
/// lowest id on ties; `None` without any overlap.
fn best_counterpart(own: &LabelMap, l: u32, other: &LabelMap) -> Option<u32> {
    let mut best: Option<(u32, usize)> = None;
    for j in 1..=other.n_labels() {
        let o = overlap(own, l, other, j);
        if o > 0 && best.is_none_or(|(_, bo)| o > bo) {
            best = Some((j, o));
        }
    }
    best.map(|(j, _)| j)
}

/// (tp, fp, fn) with `|S ∩ G| / |G| > 0.5` against each prediction's best
/// ground-truth object.
pub fn brute_counts(pred: &LabelMap, gt: &LabelMap) -> (usize, usize, usize) {
    let mut tp = 0;
    for s in 1..=pred.n_labels() {
        if let Some(g) = best_counterpart(pred, s, gt) {
            let o = overlap(pred, s, gt, g) as f64;
            if o / pixels(gt, g).len() as f64 > 0.5 {
                tp += 1;
            }
        }
    }
    (tp, pred.n_labels() as usize - tp, gt.n_labels() as usize - tp)
}

pub fn brute_f1(pred: &LabelMap, gt: &LabelMap) -> f64 {
    let (tp, fp, fn_) = brute_counts(pred, gt);
    if tp + fp + fn_ == 0 {
        1.0
    } else {
        2.0 * tp as f64 / (2 * tp + fp + fn_) as f64
    }
}

pub fn brute_dice(pred: &LabelMap, gt: &LabelMap) -> f64 {
    let (np, ng) = (pred.n_labels(), gt.n_labels());
    if np == 0 && ng == 0 {
        return 1.0;
    }
    if np == 0 || ng == 0 {
        return 0.0;
    }
    let half = |own: &LabelMap, other: &LabelMap| {
        let total: usize = (1..=own.n_labels()).map(|l| pixels(own, l).len()).sum();
        (1..=own.n_labels())
            .map(|l| {
                let a = pixels(own, l).len();
                let d = match best_counterpart(own, l, other) {
                    Some(j) => 2.0 * overlap(own, l, other, j) as f64 / (a + pixels(other, j).len()) as f64,
                    None => 0.0,
                };
                a as f64 * d
            })
            .sum::<f64>()
            / total as f64
    };
    0.5 * (half(gt, pred) + half(pred, gt))
}

fn boundary(labels: &LabelMap, l: u32) -> Vec<(usize, usize)> {
    let (w, h) = labels.dims();
    pixels(labels, l)
        .into_iter()
        .filter(|&(r, c)| {
            [(-1isize, 0isize), (1, 0), (0, -1), (0, 1)].iter().any(|&(dr, dc)| {
                let (nr, nc) = (r as isize + dr, c as isize + dc);
                nr < 0 || nc < 0 || nr >= h as isize || nc >= w as isize || labels.raster()[(nr as usize, nc as usize)] != l
            })
        })
        .collect()
}

/// All-pairs symmetric Hausdorff distance.
pub fn brute_hausdorff_sets(a: &[(usize, usize)], b: &[(usize, usize)]) -> f64 {
    let d = |p: &(usize, usize), q: &(usize, usize)| {
        let (dy, dx) = (p.0 as f64 - q.0 as f64, p.1 as f64 - q.1 as f64);
        (dy * dy + dx * dx).sqrt()
    };
    let directed = |x: &[(usize, usize)], y: &[(usize, usize)]| {
        x.iter().map(|p| y.iter().map(|q| d(p, q)).fold(f64::INFINITY, f64::min)).fold(0.0, f64::max)
    };
    directed(a, b).max(directed(b, a))
}

pub fn brute_hausdorff(pred: &LabelMap, gt: &LabelMap) -> f64 {
    let (np, ng) = (pred.n_labels(), gt.n_labels());
    if np == 0 && ng == 0 {
        return 0.0;
    }
    let (w, h) = pred.dims();
    if np == 0 || ng == 0 {
        return ((w * w + h * h) as f64).sqrt();
    }
    let half = |own: &LabelMap, other: &LabelMap| {
        let total: usize = (1..=own.n_labels()).map(|l| pixels(own, l).len()).sum();
        (1..=own.n_labels())
            .map(|l| {
                let a = pixels(own, l).len();
                let bl = boundary(own, l);
                let d = match best_counterpart(own, l, other) {
                    Some(j) => brute_hausdorff_sets(&bl, &boundary(other, j)),
                    None => (1..=other.n_labels())
                        .map(|j| brute_hausdorff_sets(&bl, &boundary(other, j)))
                        .fold(f64::INFINITY, f64::min),
                };
                a as f64 * d
            })
            .sum::<f64>()
            / total as f64
    };
    0.5 * (half(gt, pred) + half(pred, gt))
}

/// Central finite difference of `f` along coordinate `i` of `x`.
pub fn central_difference(x: &RealRaster, i: usize, h: f64, f: impl Fn(&RealRaster) -> f64) -> f64 {
    let mut p = x.clone();
    p.data_mut()[i] = x.data()[i] + h;
    let up = f(&p);
    p.data_mut()[i] = x.data()[i] - h;
    let down = f(&p);
    (up - down) / (2.0 * h)
}
