use crate::morph::StructuringElement;
use crate::raster::{LabelMap, Raster};

/// Erosion depth per pixel: the iteration of repeated one-pixel erosion at
/// which the pixel is removed. Background is 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DepthMap(Raster<u32>);

impl DepthMap {
    pub fn raster(&self) -> &Raster<u32> {
        &self.0
    }

    pub fn into_raster(self) -> Raster<u32> {
        self.0
    }

    /// Largest depth per label; index 0 is unused.
    pub fn max_per_label(&self, labels: &LabelMap) -> Vec<u32> {
        let mut max = vec![0u32; labels.n_labels() as usize + 1];
        for (&l, &d) in labels.data().iter().zip(self.0.data()) {
            if l != 0 {
                max[l as usize] = max[l as usize].max(d);
            }
        }
        max
    }

    /// Smallest depth per label; index 0 and absent labels hold `u32::MAX`.
    pub fn min_per_label(&self, labels: &LabelMap) -> Vec<u32> {
        let mut min = vec![u32::MAX; labels.n_labels() as usize + 1];
        for (&l, &d) in labels.data().iter().zip(self.0.data()) {
            if l != 0 {
                min[l as usize] = min[l as usize].min(d);
            }
        }
        min
    }
}

/// Erosion depth of every gland, each eroded in isolation (pixels of other
/// labels and out-of-bounds pixels count as background).
///
/// Repeated erosion by the square element removes a pixel at its chessboard
/// distance to the complement; the cross element gives the city-block
/// distance. Both are computed here with a two-pass chamfer sweep restricted
/// to same-label neighbors. Shortest unit-step paths to the nearest
/// complement pixel never leave the gland, so the restriction is exact.
pub fn erosion_depth(labels: &LabelMap, se: StructuringElement) -> DepthMap {
    let (w, h) = labels.dims();
    let lab = labels.data();
    let mut depth: Vec<u32> = lab.iter().map(|&l| if l == 0 { 0 } else { u32::MAX }).collect();

    let (causal, anticausal): (&[(isize, isize)], &[(isize, isize)]) = match se {
        StructuringElement::Square3x3 => (
            &[(-1, -1), (-1, 0), (-1, 1), (0, -1)],
            &[(1, 1), (1, 0), (1, -1), (0, 1)],
        ),
        StructuringElement::Cross3x3 => (&[(-1, 0), (0, -1)], &[(1, 0), (0, 1)]),
    };

    let relax = |depth: &mut Vec<u32>, r: usize, c: usize, offsets: &[(isize, isize)]| {
        let i = r * w + c;
        let l = lab[i];
        if l == 0 {
            return;
        }
        let mut best = depth[i];
        for &(dr, dc) in offsets {
            let (nr, nc) = (r as isize + dr, c as isize + dc);
            let neighbor = if nr < 0 || nc < 0 || nr as usize >= h || nc as usize >= w {
                0
            } else {
                let j = nr as usize * w + nc as usize;
                if lab[j] == l {
                    depth[j]
                } else {
                    0
                }
            };
            best = best.min(neighbor.saturating_add(1));
        }
        depth[i] = best;
    };

    for r in 0..h {
        for c in 0..w {
            relax(&mut depth, r, c, causal);
        }
    }
    for r in (0..h).rev() {
        for c in (0..w).rev() {
            relax(&mut depth, r, c, anticausal);
        }
    }
    DepthMap(Raster::from_vec(w, h, depth).expect("dimensions preserved"))
}
