//! Depth-ordered homotopic thinning.
//!
//! Each gland is peeled one erosion level at a time. A pixel is deleted only
//! if it is simple (removing it changes neither the 8-connected foreground
//! nor the 4-connected background locally), and ridge pixels of the depth
//! map are kept as anchors until a final pass that removes the remaining
//! 2×2 blocks.

use std::sync::OnceLock;

use crate::morph::StructuringElement;
use crate::raster::{LabelMap, Mask, Raster};

use super::depth::{erosion_depth, DepthMap};

/// One-pixel-wide, topology-preserving skeleton of every gland.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Skeleton(Mask);

impl Skeleton {
    pub fn mask(&self) -> &Mask {
        &self.0
    }

    pub fn into_mask(self) -> Mask {
        self.0
    }
}

/// Neighbor order used for the 8-bit neighborhood code.
const RING: [(isize, isize); 8] = [
    (-1, -1),
    (-1, 0),
    (-1, 1),
    (0, -1),
    (0, 1),
    (1, -1),
    (1, 0),
    (1, 1),
];

fn simple_table() -> &'static [bool; 256] {
    static TABLE: OnceLock<[bool; 256]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [false; 256];
        for (code, slot) in t.iter_mut().enumerate() {
            *slot = is_simple_code(code as u8);
        }
        t
    })
}

/// Topological numbers of the 3×3 configuration: one 8-component of
/// foreground neighbors and one 4-component of background neighbors that
/// touches a 4-neighbor of the center.
fn is_simple_code(code: u8) -> bool {
    let on = |k: usize| code & (1 << k) != 0;
    let adjacent = |a: usize, b: usize, four: bool| {
        let (ra, ca) = RING[a];
        let (rb, cb) = RING[b];
        let (dr, dc) = ((ra - rb).abs(), (ca - cb).abs());
        if four {
            dr + dc == 1
        } else {
            dr.max(dc) == 1
        }
    };
    let count = |want_on: bool, four: bool, must_touch_center4: bool| {
        let mut seen = [false; 8];
        let mut n = 0;
        for start in 0..8 {
            if seen[start] || on(start) != want_on {
                continue;
            }
            let mut stack = vec![start];
            seen[start] = true;
            let mut touches = false;
            while let Some(k) = stack.pop() {
                let (r, c) = RING[k];
                if r == 0 || c == 0 {
                    touches = true;
                }
                for j in 0..8 {
                    if !seen[j] && on(j) == want_on && adjacent(k, j, four) {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
            if !must_touch_center4 || touches {
                n += 1;
            }
        }
        n
    };
    count(true, false, false) == 1 && count(false, true, true) == 1
}

struct Local {
    w: usize,
    on: Vec<bool>,
}

impl Local {
    #[inline]
    fn code(&self, i: usize) -> u8 {
        let w = self.w as isize;
        let mut code = 0u8;
        for (k, &(dr, dc)) in RING.iter().enumerate() {
            let j = (i as isize + dr * w + dc) as usize;
            if self.on[j] {
                code |= 1 << k;
            }
        }
        code
    }

    #[inline]
    fn is_simple(&self, i: usize) -> bool {
        simple_table()[self.code(i) as usize]
    }

    fn in_full_block(&self, i: usize) -> bool {
        let w = self.w;
        let on = &self.on;
        // top-left corners of the four 2×2 windows containing i
        [i - w - 1, i - w, i - 1, i]
            .iter()
            .any(|&tl| on[tl] && on[tl + 1] && on[tl + w] && on[tl + w + 1])
    }
}

/// Skeleton using the default square element for depth ordering.
pub fn skeletonize(labels: &LabelMap) -> Skeleton {
    skeletonize_with(labels, StructuringElement::Square3x3)
}

pub fn skeletonize_with(labels: &LabelMap, se: StructuringElement) -> Skeleton {
    let depth = erosion_depth(labels, se);
    skeletonize_from_depth(labels, &depth)
}

pub(crate) fn skeletonize_from_depth(labels: &LabelMap, depth: &DepthMap) -> Skeleton {
    let (w, h) = labels.dims();
    let mut out = Raster::filled(w, h, false);
    for (label, bbox) in labels.bounding_boxes().into_iter().enumerate().skip(1) {
        let Some(b) = bbox else { continue };
        // local frame padded by one background pixel on every side
        let lw = b.width() + 2;
        let lh = b.height() + 2;
        let mut local = Local {
            w: lw,
            on: vec![false; lw * lh],
        };
        let mut d = vec![0u32; lw * lh];
        let mut max_depth = 0;
        for r in 0..b.height() {
            for c in 0..b.width() {
                let (gr, gc) = (b.min_row + r, b.min_col + c);
                if labels.raster()[(gr, gc)] == label as u32 {
                    let i = (r + 1) * lw + c + 1;
                    local.on[i] = true;
                    d[i] = depth.raster()[(gr, gc)];
                    max_depth = max_depth.max(d[i]);
                }
            }
        }

        let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); max_depth as usize + 1];
        for i in 0..local.on.len() {
            if !local.on[i] {
                continue;
            }
            let ridge = RING.iter().all(|&(dr, dc)| {
                let j = (i as isize + dr * lw as isize + dc) as usize;
                !local.on[j] || d[j] <= d[i]
            });
            if !ridge {
                buckets[d[i] as usize].push(i);
            }
        }

        let mut pending: Vec<usize> = Vec::new();
        for bucket in buckets.into_iter().skip(1) {
            pending.extend(bucket);
            loop {
                let before = pending.len();
                pending.retain(|&i| {
                    if local.is_simple(i) {
                        local.on[i] = false;
                        false
                    } else {
                        true
                    }
                });
                if pending.len() == before {
                    break;
                }
            }
        }

        loop {
            let mut changed = false;
            for i in 0..local.on.len() {
                if local.on[i] && local.in_full_block(i) && local.is_simple(i) {
                    local.on[i] = false;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }

        for r in 0..b.height() {
            for c in 0..b.width() {
                if local.on[(r + 1) * lw + c + 1] {
                    out[(b.min_row + r, b.min_col + c)] = true;
                }
            }
        }
    }
    Skeleton(out)
}
