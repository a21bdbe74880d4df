//! Binary morphology, connected components and mask cleanup.

use serde::{Deserialize, Serialize};

use crate::raster::{Connectivity, LabelMap, Mask, Raster};

/// 3×3 structuring element.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StructuringElement {
    /// Full 3×3 square (8-connectivity footprint).
    #[default]
    Square3x3,
    /// Plus-shaped cross (4-connectivity footprint).
    Cross3x3,
}

impl StructuringElement {
    /// Footprint offsets, excluding the origin.
    pub fn offsets(self) -> &'static [(isize, isize)] {
        self.connectivity().offsets()
    }

    /// Adjacency whose unit ball is this element.
    pub fn connectivity(self) -> Connectivity {
        match self {
            StructuringElement::Square3x3 => Connectivity::Eight,
            StructuringElement::Cross3x3 => Connectivity::Four,
        }
    }
}

impl std::str::FromStr for StructuringElement {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "square" | "square3x3" => Ok(Self::Square3x3),
            "cross" | "cross3x3" => Ok(Self::Cross3x3),
            other => Err(format!("unknown structuring element `{other}`")),
        }
    }
}

/// Out-of-bounds pixels count as off, so objects erode inward from the raster border.
pub fn erode(mask: &Mask, se: StructuringElement) -> Mask {
    let offsets = se.offsets();
    Raster::from_fn(mask.width(), mask.height(), |r, c| {
        mask[(r, c)]
            && offsets.iter().all(|&(dr, dc)| {
                mask.get_signed(r as isize + dr, c as isize + dc)
                    .copied()
                    .unwrap_or(false)
            })
    })
}

pub fn dilate(mask: &Mask, se: StructuringElement) -> Mask {
    let offsets = se.offsets();
    Raster::from_fn(mask.width(), mask.height(), |r, c| {
        mask[(r, c)]
            || offsets.iter().any(|&(dr, dc)| {
                mask.get_signed(r as isize + dr, c as isize + dc)
                    .copied()
                    .unwrap_or(false)
            })
    })
}

/// Dilation followed by erosion, each repeated `iterations` times.
pub fn close(mask: &Mask, se: StructuringElement, iterations: usize) -> Mask {
    let mut out = mask.clone();
    for _ in 0..iterations {
        out = dilate(&out, se);
    }
    for _ in 0..iterations {
        out = erode(&out, se);
    }
    out
}

/// Labels the connected components of `mask`.
///
/// Labels are assigned in the scan order of each component's first pixel,
/// so the result is canonical.
pub fn connected_components(mask: &Mask, connectivity: Connectivity) -> LabelMap {
    let (w, h) = mask.dims();
    let mut labels = Raster::filled(w, h, 0u32);
    let mut next = 0u32;
    let mut stack = Vec::new();
    let offsets = connectivity.offsets();
    for start in 0..w * h {
        if !mask.data()[start] || labels.data()[start] != 0 {
            continue;
        }
        next += 1;
        labels.data_mut()[start] = next;
        stack.push(start);
        while let Some(i) = stack.pop() {
            let (r, c) = ((i / w) as isize, (i % w) as isize);
            for &(dr, dc) in offsets {
                let (nr, nc) = (r + dr, c + dc);
                if nr < 0 || nc < 0 || nr as usize >= h || nc as usize >= w {
                    continue;
                }
                let j = nr as usize * w + nc as usize;
                if mask.data()[j] && labels.data()[j] == 0 {
                    labels.data_mut()[j] = next;
                    stack.push(j);
                }
            }
        }
    }
    LabelMap::from_canonical(labels, next)
}

/// Sets every background pixel that cannot reach the raster border through
/// 4-connected background.
pub fn fill_holes(mask: &Mask) -> Mask {
    let (w, h) = mask.dims();
    let mut outside = vec![false; w * h];
    let mut stack: Vec<usize> = Vec::new();
    let seed = |i: usize, outside: &mut Vec<bool>, stack: &mut Vec<usize>| {
        if !mask.data()[i] && !outside[i] {
            outside[i] = true;
            stack.push(i);
        }
    };
    for c in 0..w {
        seed(c, &mut outside, &mut stack);
        seed((h - 1) * w + c, &mut outside, &mut stack);
    }
    for r in 0..h {
        seed(r * w, &mut outside, &mut stack);
        seed(r * w + w - 1, &mut outside, &mut stack);
    }
    while let Some(i) = stack.pop() {
        let (r, c) = ((i / w) as isize, (i % w) as isize);
        for &(dr, dc) in Connectivity::Four.offsets() {
            let (nr, nc) = (r + dr, c + dc);
            if nr < 0 || nc < 0 || nr as usize >= h || nc as usize >= w {
                continue;
            }
            let j = nr as usize * w + nc as usize;
            if !mask.data()[j] && !outside[j] {
                outside[j] = true;
                stack.push(j);
            }
        }
    }
    let data = outside.into_iter().map(|o| !o).collect();
    Raster::from_vec(w, h, data).expect("dimensions preserved")
}

/// Deletes objects with fewer than `min_area` pixels and renumbers the rest.
pub fn remove_small(labels: &LabelMap, min_area: usize) -> LabelMap {
    let areas = labels.areas();
    let kept = labels
        .raster()
        .map(|&v| if v != 0 && areas[v as usize] >= min_area { v } else { 0 });
    LabelMap::from_raster(kept)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mask_from(rows: &[&str]) -> Mask {
        let h = rows.len();
        let w = rows[0].len();
        Raster::from_fn(w, h, |r, c| rows[r].as_bytes()[c] == b'#')
    }

    #[test]
    fn erode_full_3x3_keeps_center() {
        let m = Raster::filled(3, 3, true);
        let e = erode(&m, StructuringElement::Square3x3);
        assert_eq!(e.count_on(), 1);
        assert!(e[(1, 1)]);
    }

    #[test]
    fn erode_thin_line_vanishes() {
        let m = Raster::filled(5, 1, true);
        assert_eq!(erode(&m, StructuringElement::Square3x3).count_on(), 0);
        assert_eq!(erode(&m, StructuringElement::Cross3x3).count_on(), 0);
    }

    #[test]
    fn erode_twice_on_rectangle_leaves_inner_line() {
        // 7 wide, 5 tall rectangle inside a 9x7 canvas.
        let m = Raster::from_fn(9, 7, |r, c| (1..=5).contains(&r) && (1..=7).contains(&c));
        let twice = erode(&erode(&m, StructuringElement::Square3x3), StructuringElement::Square3x3);
        // definition check: a pixel survives two square erosions iff its 5x5 window is all on
        let oracle = Raster::from_fn(9, 7, |r, c| {
            (-2..=2).all(|dr: isize| {
                (-2..=2).all(|dc: isize| {
                    m.get_signed(r as isize + dr, c as isize + dc).copied().unwrap_or(false)
                })
            })
        });
        assert_eq!(twice, oracle);
        assert_eq!(twice.count_on(), 3);
        assert!((3..=5).all(|c| twice[(3, c)]));
    }

    #[test]
    fn dilate_single_pixel_gives_block() {
        let mut m = Raster::filled(5, 5, false);
        m[(2, 2)] = true;
        let d = dilate(&m, StructuringElement::Square3x3);
        assert_eq!(d.count_on(), 9);
        assert!(d[(1, 1)] && d[(3, 3)] && !d[(0, 0)]);
        assert_eq!(dilate(&m, StructuringElement::Cross3x3).count_on(), 5);
    }

    #[test]
    fn dilate_empty_is_empty() {
        let m = Raster::filled(4, 4, false);
        assert_eq!(dilate(&m, StructuringElement::Square3x3), m);
    }

    #[test]
    fn opening_of_fat_block_is_identity() {
        let m = Raster::from_fn(8, 8, |r, c| (2..6).contains(&r) && (2..6).contains(&c));
        let se = StructuringElement::Square3x3;
        // erode∘dilate of the block returns the block
        assert_eq!(erode(&dilate(&m, se), se), m);
    }

    #[test]
    fn components_empty_and_blocks() {
        let m = Raster::filled(4, 4, false);
        assert_eq!(connected_components(&m, Connectivity::Eight).n_labels(), 0);

        let m = Raster::from_fn(8, 8, |r, c| (r < 2 && c < 2) || (r >= 6 && c >= 6));
        let lm = connected_components(&m, Connectivity::Four);
        assert_eq!(lm.n_labels(), 2);
        assert_eq!(lm.raster()[(0, 0)], 1);
        assert_eq!(lm.raster()[(7, 7)], 2);
    }

    #[test]
    fn diagonal_pair_depends_on_connectivity() {
        let m = mask_from(&["#.", ".#"]);
        assert_eq!(connected_components(&m, Connectivity::Eight).n_labels(), 1);
        assert_eq!(connected_components(&m, Connectivity::Four).n_labels(), 2);
    }

    #[test]
    fn fill_holes_ring() {
        let ring = mask_from(&["#####", "#...#", "#...#", "#...#", "#####"]);
        let filled = fill_holes(&ring);
        assert_eq!(filled, Raster::filled(5, 5, true));
        assert_eq!(fill_holes(&filled), filled);
        let empty = Raster::filled(5, 5, false);
        assert_eq!(fill_holes(&empty), empty);
    }

    #[test]
    fn fill_holes_keeps_border_bays() {
        // the notch touches the border, so it is not a hole
        let m = mask_from(&["##.##", "#...#", "#####"]);
        assert_eq!(fill_holes(&m), m);
        // diagonal leak does not count: background uses 4-connectivity
        let m = mask_from(&[".###.", "#...#", "#...#", ".###."]);
        assert_eq!(fill_holes(&m).count_on(), m.count_on() + 6);
    }

    #[test]
    fn remove_small_cases() {
        let mut r = Raster::filled(12, 12, 0u32);
        for c in 0..3 {
            r[(0, c)] = 5;
        }
        for row in 4..9 {
            for c in 0..10 {
                r[(row, c)] = 9;
            }
        }
        let lm = LabelMap::from_raster(r);
        let kept = remove_small(&lm, 16);
        assert_eq!(kept.n_labels(), 1);
        assert_eq!(kept.raster()[(4, 0)], 1);
        assert_eq!(remove_small(&lm, 0), lm);

        let lm = LabelMap::from_raster(Raster::from_fn(30, 1, |_, c| (c / 10) as u32 + 1));
        assert_eq!(remove_small(&lm, 11).n_labels(), 0);
    }
}
