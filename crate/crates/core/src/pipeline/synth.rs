//! Seeded synthetic gland corpus.
//!
//! Each image holds a random number of non-touching glands drawn from a set
//! of shape families. A fused pair is two labeled glands that share a
//! straight boundary, so its foreground is a single connected component.
//! Images are grayscale renderings: bright background, darker gland body,
//! a dark rim where the gland meets background, and a bright lumen for the
//! ring family. Ring glands are labeled solid (lumen included).

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io;
use crate::morph::{close, StructuringElement};
use crate::raster::{LabelMap, Mask, Raster};
use crate::topo::{erosion_depth, ground_truth, GtConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShapeFamily {
    Disk,
    Ellipse,
    /// Star polygon with jittered radii, smoothed by a closing.
    Blob,
    FusedPair,
    /// Disk rendered with a bright central lumen.
    Ring,
}

impl ShapeFamily {
    pub const ALL: [ShapeFamily; 5] = [
        ShapeFamily::Disk,
        ShapeFamily::Ellipse,
        ShapeFamily::Blob,
        ShapeFamily::FusedPair,
        ShapeFamily::Ring,
    ];
}

impl std::str::FromStr for ShapeFamily {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "disk" => Ok(Self::Disk),
            "ellipse" => Ok(Self::Ellipse),
            "blob" => Ok(Self::Blob),
            "fused-pair" => Ok(Self::FusedPair),
            "ring" => Ok(Self::Ring),
            other => Err(format!("unknown shape family `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthCorpusSpec {
    pub n_images: usize,
    pub width: usize,
    pub height: usize,
    /// Inclusive range of labeled glands per image; a fused pair counts twice.
    pub glands_min: usize,
    pub glands_max: usize,
    pub families: Vec<ShapeFamily>,
    /// Nominal gland radius range in pixels.
    pub radius_min: f64,
    pub radius_max: f64,
    /// Blob vertex count and relative radius jitter.
    pub blob_vertices: usize,
    pub blob_jitter: f64,
    /// Minimum background gap between separate glands.
    pub gap: usize,
    pub seed: u64,
}

impl Default for SynthCorpusSpec {
    fn default() -> Self {
        Self {
            n_images: 10,
            width: 256,
            height: 256,
            glands_min: 3,
            glands_max: 6,
            families: ShapeFamily::ALL.to_vec(),
            radius_min: 12.0,
            radius_max: 24.0,
            blob_vertices: 10,
            blob_jitter: 0.12,
            gap: 3,
            seed: 0,
        }
    }
}

impl SynthCorpusSpec {
    pub fn validate(&self) -> Result<()> {
        if self.glands_min == 0 || self.glands_min > self.glands_max {
            return Err(Error::invalid(
                "glands",
                format!("need 1 <= min <= max, got {}..={}", self.glands_min, self.glands_max),
            ));
        }
        if self.families.is_empty() {
            return Err(Error::invalid("families", "at least one shape family is required"));
        }
        if !(self.radius_min >= 4.0 && self.radius_max >= self.radius_min) {
            return Err(Error::invalid(
                "radius",
                format!("need 4 <= min <= max, got {}..{}", self.radius_min, self.radius_max),
            ));
        }
        let min_side = self.width.min(self.height) as f64;
        if min_side < 4.0 * self.radius_max {
            return Err(Error::invalid(
                "size",
                format!("image side {min_side} is too small for radius {}", self.radius_max),
            ));
        }
        if !(0.0..0.5).contains(&self.blob_jitter) || self.blob_vertices < 3 {
            return Err(Error::invalid("blob", "need >= 3 vertices and jitter in [0, 0.5)"));
        }
        Ok(())
    }
}

/// One generated image.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthSample {
    pub image: Raster<u8>,
    pub labels: LabelMap,
    pub families: Vec<ShapeFamily>,
}

impl SynthSample {
    pub fn fused_pairs(&self) -> usize {
        self.families.iter().filter(|&&f| f == ShapeFamily::FusedPair).count()
    }
}

/// Pixels of one placed shape, split into one or two glands.
struct Shape {
    parts: Vec<Vec<(isize, isize)>>,
    lumen: Vec<(isize, isize)>,
}

fn disk_pixels(cr: f64, cc: f64, radius: f64) -> Vec<(isize, isize)> {
    let mut out = Vec::new();
    let r = radius.ceil() as isize + 1;
    let (ir, ic) = (cr.round() as isize, cc.round() as isize);
    for row in ir - r..=ir + r {
        for col in ic - r..=ic + r {
            let (dr, dc) = (row as f64 - cr, col as f64 - cc);
            if dr * dr + dc * dc <= radius * radius {
                out.push((row, col));
            }
        }
    }
    out
}

fn make_shape(family: ShapeFamily, spec: &SynthCorpusSpec, rng: &mut ChaCha8Rng, cr: f64, cc: f64, scale: f64) -> Shape {
    let radius = rng.gen_range(spec.radius_min..=spec.radius_max) * scale;
    match family {
        ShapeFamily::Disk => Shape {
            parts: vec![disk_pixels(cr, cc, radius)],
            lumen: Vec::new(),
        },
        ShapeFamily::Ring => Shape {
            parts: vec![disk_pixels(cr, cc, radius)],
            lumen: disk_pixels(cr, cc, radius * 0.45),
        },
        ShapeFamily::Ellipse => {
            let a = radius * 1.3;
            let b = (radius * rng.gen_range(0.55..0.8)).max(spec.radius_min * 0.8 * scale);
            let theta: f64 = rng.gen_range(0.0..std::f64::consts::PI);
            let (s, c) = theta.sin_cos();
            let reach = a.ceil() as isize + 1;
            let (ir, ic) = (cr.round() as isize, cc.round() as isize);
            let mut pix = Vec::new();
            for row in ir - reach..=ir + reach {
                for col in ic - reach..=ic + reach {
                    let (y, x) = (row as f64 - cr, col as f64 - cc);
                    let u = x * c + y * s;
                    let v = -x * s + y * c;
                    if (u / a).powi(2) + (v / b).powi(2) <= 1.0 {
                        pix.push((row, col));
                    }
                }
            }
            Shape {
                parts: vec![pix],
                lumen: Vec::new(),
            }
        }
        ShapeFamily::Blob => {
            let n = spec.blob_vertices;
            let verts: Vec<(f64, f64)> = (0..n)
                .map(|i| {
                    let t = (i as f64 + rng.gen_range(-0.2..0.2)) / n as f64 * std::f64::consts::TAU;
                    let rad = radius * (1.0 + rng.gen_range(-spec.blob_jitter..=spec.blob_jitter));
                    (cr + rad * t.sin(), cc + rad * t.cos())
                })
                .collect();
            let reach = (radius * (1.0 + spec.blob_jitter)).ceil() as isize + 4;
            let (ir, ic) = (cr.round() as isize, cc.round() as isize);
            let side = (2 * reach + 1) as usize;
            let local = Mask::from_fn(side, side, |r, c| {
                point_in_polygon((ir - reach + r as isize) as f64, (ic - reach + c as isize) as f64, &verts)
            });
            let smooth = close(&local, StructuringElement::Square3x3, 2);
            let mut pix = Vec::new();
            for r in 0..side {
                for c in 0..side {
                    if smooth[(r, c)] {
                        pix.push((ir - reach + r as isize, ic - reach + c as isize));
                    }
                }
            }
            Shape {
                parts: vec![pix],
                lumen: Vec::new(),
            }
        }
        ShapeFamily::FusedPair => {
            let r1 = radius;
            let r2 = rng.gen_range(spec.radius_min..=spec.radius_max) * scale;
            let sep = (r1 + r2) * rng.gen_range(0.6..0.8);
            let theta: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            // center the pair's midpoint on (cr, cc)
            let (s, c) = theta.sin_cos();
            let (a_r, a_c) = (cr - s * sep / 2.0, cc - c * sep / 2.0);
            let (b_r, b_c) = (cr + s * sep / 2.0, cc + c * sep / 2.0);
            let mut union = disk_pixels(a_r, a_c, r1);
            union.extend(disk_pixels(b_r, b_c, r2));
            union.sort_unstable();
            union.dedup();
            // split on the radical axis: each side is a convex disk slice
            let (mut first, mut second) = (Vec::new(), Vec::new());
            for (row, col) in union {
                let pa = (row as f64 - a_r).powi(2) + (col as f64 - a_c).powi(2) - r1 * r1;
                let pb = (row as f64 - b_r).powi(2) + (col as f64 - b_c).powi(2) - r2 * r2;
                if pa <= pb {
                    first.push((row, col));
                } else {
                    second.push((row, col));
                }
            }
            Shape {
                parts: vec![first, second],
                lumen: Vec::new(),
            }
        }
    }
}

fn point_in_polygon(y: f64, x: f64, verts: &[(f64, f64)]) -> bool {
    let mut inside = false;
    let n = verts.len();
    let mut j = n - 1;
    for i in 0..n {
        let (yi, xi) = verts[i];
        let (yj, xj) = verts[j];
        if (yi > y) != (yj > y) && x < (xj - xi) * (y - yi) / (yj - yi) + xi {
            inside = !inside;
        }
        j = i;
    }
    inside
}

/// Generates image `index` of the corpus. Images are independent: each has
/// its own random stream derived from the corpus seed.
pub fn synth_image(spec: &SynthCorpusSpec, index: usize) -> Result<SynthSample> {
    spec.validate()?;
    let (w, h) = (spec.width, spec.height);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(index as u64);

    let target = rng.gen_range(spec.glands_min..=spec.glands_max);
    let mut labels = Raster::filled(w, h, 0u32);
    // pixels within `gap` of an existing gland
    let mut blocked = Raster::filled(w, h, false);
    let mut lumen = Raster::filled(w, h, false);
    let mut families = Vec::new();
    let mut placed = 0usize;
    let mut next_label = 1u32;
    let mut scale = 1.0;
    let mut failures = 0;

    while placed < target {
        let mut family = spec.families[rng.gen_range(0..spec.families.len())];
        if family == ShapeFamily::FusedPair && target - placed < 2 {
            family = ShapeFamily::Disk;
        }
        let margin = 2.2 * spec.radius_max * scale + 2.0;
        let cr = rng.gen_range(margin..(h as f64 - margin).max(margin + 1.0));
        let cc = rng.gen_range(margin..(w as f64 - margin).max(margin + 1.0));
        let shape = make_shape(family, spec, &mut rng, cr, cc, scale);

        let fits = shape.parts.iter().flatten().all(|&(r, c)| {
            r >= 0 && c >= 0 && (r as usize) < h && (c as usize) < w && !blocked[(r as usize, c as usize)]
        }) && shape.parts.iter().all(|p| !p.is_empty());
        if !fits {
            failures += 1;
            if failures % 200 == 0 {
                scale *= 0.85;
                if scale < 0.3 {
                    return Err(Error::invalid(
                        "glands",
                        format!("could not place {target} glands in a {w}x{h} image"),
                    ));
                }
            }
            continue;
        }

        for part in &shape.parts {
            for &(r, c) in part {
                labels[(r as usize, c as usize)] = next_label;
            }
            next_label += 1;
            placed += 1;
        }
        for &(r, c) in &shape.lumen {
            lumen[(r as usize, c as usize)] = true;
        }
        let g = spec.gap as isize;
        for &(r, c) in shape.parts.iter().flatten() {
            for dr in -g..=g {
                for dc in -g..=g {
                    let (nr, nc) = (r + dr, c + dc);
                    if nr >= 0 && nc >= 0 && (nr as usize) < h && (nc as usize) < w {
                        blocked[(nr as usize, nc as usize)] = true;
                    }
                }
            }
        }
        families.push(family);
    }

    let labels = LabelMap::from_raster(labels);
    let image = render(&labels, &lumen, &mut rng);
    Ok(SynthSample {
        image,
        labels,
        families,
    })
}

fn render(labels: &LabelMap, lumen: &Mask, rng: &mut ChaCha8Rng) -> Raster<u8> {
    // rim against background only: fused glands show no dividing line
    let fg = LabelMap::from_raster(labels.foreground().map(|&b| b as u32));
    let depth = erosion_depth(&fg, StructuringElement::Square3x3);
    Raster::from_fn(labels.width(), labels.height(), |r, c| {
        let base = if labels.raster()[(r, c)] == 0 {
            215.0
        } else if depth.raster()[(r, c)] <= 2 {
            70.0
        } else if lumen[(r, c)] {
            235.0
        } else {
            120.0
        };
        let noise: f64 = rng.gen_range(-12.0..12.0);
        (base + noise).clamp(0.0, 255.0).round() as u8
    })
}

/// One entry of `corpus.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusEntry {
    pub name: String,
    pub image: String,
    pub labels: String,
    pub ma: String,
    pub markers: String,
    pub n_labels: u32,
    pub families: Vec<ShapeFamily>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusManifest {
    pub spec: SynthCorpusSpec,
    pub seed: u64,
    pub gt: GtConfig,
    pub files: Vec<CorpusEntry>,
}

/// File stem of image `index`.
pub fn sample_name(index: usize) -> String {
    format!("synth_{index:04}")
}

/// Writes one sample and its derived maps under `root`.
pub fn write_sample(root: &Path, index: usize, sample: &SynthSample, gt: &GtConfig) -> Result<CorpusEntry> {
    let name = sample_name(index);
    let derived = ground_truth(&sample.labels, gt)?;
    let entry = CorpusEntry {
        image: format!("images/{name}.png"),
        labels: format!("labels/{name}.png"),
        ma: format!("ma/{name}.f32r"),
        markers: format!("markers/{name}.png"),
        n_labels: sample.labels.n_labels(),
        families: sample.families.clone(),
        name,
    };
    io::write_gray_png(&root.join(&entry.image), &sample.image)?;
    io::write_label_png(&root.join(&entry.labels), &sample.labels)?;
    io::write_f32r(&root.join(&entry.ma), &derived.distance)?;
    io::write_label_png(&root.join(&entry.markers), &derived.markers)?;
    Ok(entry)
}

/// Generates and writes the whole corpus sequentially, then `corpus.json`.
pub fn synth_corpus(spec: &SynthCorpusSpec, root: &Path, gt: &GtConfig) -> Result<CorpusManifest> {
    spec.validate()?;
    let files = (0..spec.n_images)
        .map(|i| write_sample(root, i, &synth_image(spec, i)?, gt))
        .collect::<Result<Vec<_>>>()?;
    write_manifest(root, spec, gt, files)
}

pub fn write_manifest(
    root: &Path,
    spec: &SynthCorpusSpec,
    gt: &GtConfig,
    files: Vec<CorpusEntry>,
) -> Result<CorpusManifest> {
    let manifest = CorpusManifest {
        spec: spec.clone(),
        seed: spec.seed,
        gt: *gt,
        files,
    };
    let mut json = serde_json::to_vec_pretty(&manifest)?;
    json.push(b'\n');
    io::write_atomic(&root.join("corpus.json"), &json)?;
    Ok(manifest)
}
