//! Exact squared Euclidean distance transform (lower envelope of parabolas,
//! one pass per axis).

use crate::raster::{Mask, Raster};

/// Squared distance from every pixel to the nearest `true` pixel of `features`.
/// Pixels are at distance `f64::INFINITY` when there are no features.
pub fn squared_edt(features: &Mask) -> Raster<f64> {
    let (w, h) = features.dims();
    let mut grid: Vec<f64> = features
        .data()
        .iter()
        .map(|&f| if f { 0.0 } else { f64::INFINITY })
        .collect();

    let n = w.max(h);
    let mut scratch = Scratch::new(n);

    let mut column = vec![0.0; h];
    for c in 0..w {
        for r in 0..h {
            column[r] = grid[r * w + c];
        }
        scratch.transform(&mut column);
        for r in 0..h {
            grid[r * w + c] = column[r];
        }
    }
    for r in 0..h {
        scratch.transform(&mut grid[r * w..(r + 1) * w]);
    }
    Raster::from_vec(w, h, grid).expect("dimensions preserved")
}

struct Scratch {
    vertices: Vec<usize>,
    bounds: Vec<f64>,
    out: Vec<f64>,
}

impl Scratch {
    fn new(n: usize) -> Self {
        Self {
            vertices: vec![0; n],
            bounds: vec![0.0; n + 1],
            out: vec![0.0; n],
        }
    }

    /// In-place 1D transform: `f[q] <- min_p (q - p)^2 + f[p]`.
    fn transform(&mut self, f: &mut [f64]) {
        let n = f.len();
        let v = &mut self.vertices;
        let z = &mut self.bounds;
        let mut k: isize = -1;
        for q in 0..n {
            if f[q].is_infinite() {
                continue;
            }
            if k < 0 {
                k = 0;
                v[0] = q;
                z[0] = f64::NEG_INFINITY;
                z[1] = f64::INFINITY;
                continue;
            }
            loop {
                let p = v[k as usize];
                let s = intersection(f, p, q);
                if s <= z[k as usize] {
                    k -= 1;
                    if k < 0 {
                        break;
                    }
                } else {
                    k += 1;
                    v[k as usize] = q;
                    z[k as usize] = s;
                    z[k as usize + 1] = f64::INFINITY;
                    break;
                }
            }
            if k < 0 {
                k = 0;
                v[0] = q;
                z[0] = f64::NEG_INFINITY;
                z[1] = f64::INFINITY;
            }
        }
        if k < 0 {
            return;
        }
        let mut j = 0usize;
        for q in 0..n {
            while z[j + 1] < q as f64 {
                j += 1;
            }
            let p = v[j];
            let d = q as f64 - p as f64;
            self.out[q] = d * d + f[p];
        }
        f.copy_from_slice(&self.out[..n]);
    }
}

fn intersection(f: &[f64], p: usize, q: usize) -> f64 {
    let (pf, qf) = (p as f64, q as f64);
    ((f[q] + qf * qf) - (f[p] + pf * pf)) / (2.0 * qf - 2.0 * pf)
}
