use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{LabelMap, RealRaster};

use super::patches::reflect;

/// One augmentation step. Geometric steps move image and labels together;
/// blurs touch the image only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AugmentOp {
    FlipH,
    FlipV,
    Rot90,
    Rot180,
    Rot270,
    GaussianBlur { sigma: f64 },
    MedianBlur { k: usize },
}

/// Ordered list of steps, each applied independently with `probability`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentationSpec {
    pub ops: Vec<AugmentOp>,
    pub probability: f64,
}

impl AugmentationSpec {
    /// Apply every step, in order.
    pub fn always(ops: Vec<AugmentOp>) -> Self {
        Self { ops, probability: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.probability) {
            return Err(Error::invalid("probability", format!("{} not in [0, 1]", self.probability)));
        }
        for op in &self.ops {
            match *op {
                AugmentOp::GaussianBlur { sigma } if !(0.5..=1.5).contains(&sigma) => {
                    return Err(Error::invalid("sigma", format!("{sigma} not in [0.5, 1.5]")));
                }
                AugmentOp::MedianBlur { k } if k != 3 && k != 5 => {
                    return Err(Error::invalid("k", format!("{k} must be 3 or 5")));
                }
                _ => {}
            }
        }
        Ok(())
    }
}

impl Default for AugmentationSpec {
    fn default() -> Self {
        Self {
            ops: vec![
                AugmentOp::FlipH,
                AugmentOp::FlipV,
                AugmentOp::Rot90,
                AugmentOp::GaussianBlur { sigma: 1.0 },
                AugmentOp::MedianBlur { k: 3 },
            ],
            probability: 0.5,
        }
    }
}

pub fn gaussian_blur(image: &RealRaster, sigma: f64) -> RealRaster {
    let radius = (3.0 * sigma).ceil() as isize;
    let mut kernel: Vec<f64> = (-radius..=radius)
        .map(|x| (-(x * x) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let total: f64 = kernel.iter().sum();
    kernel.iter_mut().for_each(|k| *k /= total);

    let (w, h) = image.dims();
    let horizontal = RealRaster::from_fn(w, h, |r, c| {
        kernel
            .iter()
            .enumerate()
            .map(|(i, k)| k * image[(r, reflect(c as isize + i as isize - radius, w))])
            .sum()
    });
    RealRaster::from_fn(w, h, |r, c| {
        kernel
            .iter()
            .enumerate()
            .map(|(i, k)| k * horizontal[(reflect(r as isize + i as isize - radius, h), c)])
            .sum()
    })
}

pub fn median_blur(image: &RealRaster, k: usize) -> RealRaster {
    let half = (k / 2) as isize;
    let (w, h) = image.dims();
    let mut window = Vec::with_capacity(k * k);
    RealRaster::from_fn(w, h, |r, c| {
        window.clear();
        for dr in -half..=half {
            for dc in -half..=half {
                window.push(image[(reflect(r as isize + dr, h), reflect(c as isize + dc, w))]);
            }
        }
        window.sort_by(f64::total_cmp);
        window[window.len() / 2]
    })
}

fn apply(op: AugmentOp, image: RealRaster, labels: LabelMap) -> (RealRaster, LabelMap) {
    match op {
        AugmentOp::FlipH => (image.flip_h(), labels.transformed(|r| r.flip_h())),
        AugmentOp::FlipV => (image.flip_v(), labels.transformed(|r| r.flip_v())),
        AugmentOp::Rot90 => (image.rot90(), labels.transformed(|r| r.rot90())),
        AugmentOp::Rot180 => (image.rot180(), labels.transformed(|r| r.rot180())),
        AugmentOp::Rot270 => (image.rot270(), labels.transformed(|r| r.rot270())),
        AugmentOp::GaussianBlur { sigma } => (gaussian_blur(&image, sigma), labels),
        AugmentOp::MedianBlur { k } => (median_blur(&image, k), labels),
    }
}

/// Applies `spec` to an image and its label map. The same seed always
/// selects the same steps.
pub fn augment(
    image: &RealRaster,
    labels: &LabelMap,
    spec: &AugmentationSpec,
    seed: u64,
) -> Result<(RealRaster, LabelMap)> {
    spec.validate()?;
    image.check_same_dims(labels.raster())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut img = image.clone();
    let mut lab = labels.clone();
    for &op in &spec.ops {
        let roll: f64 = rng.gen();
        if roll < spec.probability {
            (img, lab) = apply(op, img, lab);
        }
    }
    Ok((img, lab))
}
