//! Training losses as pure functions of predicted rasters, with analytic
//! gradients with respect to each prediction.
//!
//! `total = L_inst + alpha * (L_ma + L_mc)` where `L_inst` is pixelwise
//! binary cross-entropy on the foreground probability, `L_ma` the mean
//! squared error of the MA map and `L_mc` the soft Dice loss of the marker
//! map.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{Mask, RealRaster};

/// Probability clamp for the cross-entropy logs.
pub const CE_EPSILON: f64 = 1e-12;
/// Additive smoothing of the soft Dice ratio.
pub const DICE_SMOOTH: f64 = 1.0;
/// Default steepness of the sigmoid that turns an MA prediction into a soft marker map.
pub const DEFAULT_MARKER_STEEPNESS: f64 = 50.0;

/// Scalar loss and its gradient with respect to one prediction.
#[derive(Debug, Clone, PartialEq)]
pub struct LossValue {
    pub value: f64,
    pub gradient: RealRaster,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossWeights {
    /// Weight of the topology term.
    pub alpha: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self { alpha: 1.0 }
    }
}

impl LossWeights {
    pub fn validate(&self) -> Result<()> {
        if self.alpha.is_finite() && self.alpha >= 0.0 {
            Ok(())
        } else {
            Err(Error::invalid("alpha", format!("{} must be finite and >= 0", self.alpha)))
        }
    }
}

/// Mean binary cross-entropy of the foreground probability.
///
/// Predictions are clamped to `[ε, 1 − ε]`; the gradient is zero where the
/// clamp is active.
pub fn ce_instance_loss(pred_fg: &RealRaster, gt_fg: &Mask) -> Result<LossValue> {
    pred_fg.check_same_dims(gt_fg)?;
    let m = pred_fg.len() as f64;
    let mut value = 0.0;
    let gradient = pred_fg.zip_map(gt_fg, |&p, &y| {
        let clamped = p.clamp(CE_EPSILON, 1.0 - CE_EPSILON);
        if y {
            value -= clamped.ln();
        } else {
            value -= (1.0 - clamped).ln();
        }
        if clamped != p {
            0.0
        } else if y {
            -1.0 / (p * m)
        } else {
            1.0 / ((1.0 - p) * m)
        }
    })?;
    Ok(LossValue {
        value: value / m,
        gradient,
    })
}

/// Mean squared error between predicted and ground-truth MA maps.
pub fn ma_loss(pred_ma: &RealRaster, gt_ma: &RealRaster) -> Result<LossValue> {
    pred_ma.check_same_dims(gt_ma)?;
    let m = pred_ma.len() as f64;
    let mut sum = 0.0;
    let gradient = pred_ma.zip_map(gt_ma, |&p, &g| {
        let d = p - g;
        sum += d * d;
        2.0 * d / m
    })?;
    Ok(LossValue {
        value: sum / m,
        gradient,
    })
}

/// Soft Dice loss `1 − (2 Σ p·y + s) / (Σ p + Σ y + s)`.
pub fn marker_loss(pred_mc: &RealRaster, gt_mc: &Mask) -> Result<LossValue> {
    pred_mc.check_same_dims(gt_mc)?;
    let mut inter = 0.0;
    let mut sum_p = 0.0;
    let mut sum_y = 0.0;
    for (&p, &y) in pred_mc.data().iter().zip(gt_mc.data()) {
        let y = if y { 1.0 } else { 0.0 };
        inter += p * y;
        sum_p += p;
        sum_y += y;
    }
    let num = 2.0 * inter + DICE_SMOOTH;
    let den = sum_p + sum_y + DICE_SMOOTH;
    let gradient = pred_mc.zip_map(gt_mc, |_, &y| {
        let y = if y { 1.0 } else { 0.0 };
        -(2.0 * y * den - num) / (den * den)
    })?;
    Ok(LossValue {
        value: 1.0 - num / den,
        gradient,
    })
}

/// Differentiable marker map `σ(k · (ma − tau_m))` and its derivative
/// with respect to `ma`.
pub fn soft_markers(pred_ma: &RealRaster, tau_m: f64, steepness: f64) -> (RealRaster, RealRaster) {
    let soft = pred_ma.map(|&v| sigmoid(steepness * (v - tau_m)));
    let deriv = soft.map(|&s| steepness * s * (1.0 - s));
    (soft, deriv)
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopologyLoss {
    pub value: f64,
    pub l_ma: f64,
    pub l_mc: f64,
    pub grad_ma: RealRaster,
    pub grad_mc: RealRaster,
}

/// `L_ma + L_mc`.
pub fn topology_loss(
    pred_ma: &RealRaster,
    gt_ma: &RealRaster,
    pred_mc: &RealRaster,
    gt_mc: &Mask,
) -> Result<TopologyLoss> {
    pred_ma.check_same_dims(pred_mc)?;
    let ma = ma_loss(pred_ma, gt_ma)?;
    let mc = marker_loss(pred_mc, gt_mc)?;
    Ok(TopologyLoss {
        value: ma.value + mc.value,
        l_ma: ma.value,
        l_mc: mc.value,
        grad_ma: ma.gradient,
        grad_mc: mc.gradient,
    })
}

/// Predictions and targets for [`total_loss`].
#[derive(Debug, Clone, Copy)]
pub struct LossInputs<'a> {
    pub pred_fg: &'a RealRaster,
    pub gt_fg: &'a Mask,
    pub pred_ma: &'a RealRaster,
    pub gt_ma: &'a RealRaster,
    pub pred_mc: &'a RealRaster,
    pub gt_mc: &'a Mask,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TotalLoss {
    pub value: f64,
    pub l_inst: f64,
    pub l_ma: f64,
    pub l_mc: f64,
    pub l_top: f64,
    pub grad_fg: RealRaster,
    pub grad_ma: RealRaster,
    pub grad_mc: RealRaster,
}

/// `L_inst + alpha · L_top`.
pub fn total_loss(inputs: &LossInputs<'_>, weights: LossWeights) -> Result<TotalLoss> {
    weights.validate()?;
    inputs.pred_fg.check_same_dims(inputs.pred_ma)?;
    let inst = ce_instance_loss(inputs.pred_fg, inputs.gt_fg)?;
    let top = topology_loss(inputs.pred_ma, inputs.gt_ma, inputs.pred_mc, inputs.gt_mc)?;
    let a = weights.alpha;
    Ok(TotalLoss {
        value: inst.value + a * top.value,
        l_inst: inst.value,
        l_ma: top.l_ma,
        l_mc: top.l_mc,
        l_top: top.value,
        grad_fg: inst.gradient,
        grad_ma: top.grad_ma.map(|&g| a * g),
        grad_mc: top.grad_mc.map(|&g| a * g),
    })
}

/// Marker loss evaluated on the soft markers of an MA prediction, with the
/// gradient chained back to the MA prediction.
pub fn marker_loss_from_ma(
    pred_ma: &RealRaster,
    gt_mc: &Mask,
    tau_m: f64,
    steepness: f64,
) -> Result<LossValue> {
    let (soft, deriv) = soft_markers(pred_ma, tau_m, steepness);
    let mc = marker_loss(&soft, gt_mc)?;
    Ok(LossValue {
        value: mc.value,
        gradient: mc.gradient.zip_map(&deriv, |&g, &d| g * d)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::Raster;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ce_at_truth_and_half() {
        let gt = Raster::from_fn(4, 4, |r, c| (r + c) % 2 == 0);
        let pred = gt.map(|&b| if b { 1.0 } else { 0.0 });
        assert!(ce_instance_loss(&pred, &gt).unwrap().value <= 1e-10);
        let half = RealRaster::filled(4, 4, 0.5);
        let v = ce_instance_loss(&half, &gt).unwrap().value;
        assert!((v - std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn ma_loss_values() {
        let gt = RealRaster::from_fn(5, 5, |r, c| (r * c) as f64 / 16.0);
        assert_eq!(ma_loss(&gt, &gt).unwrap().value, 0.0);
        let shifted = gt.map(|&v| v + 0.1);
        assert!((ma_loss(&shifted, &gt).unwrap().value - 0.01).abs() < 1e-15);
    }

    #[test]
    fn dice_at_truth_and_inverse() {
        let gt = Raster::from_fn(6, 6, |r, _| r < 2);
        let sum_y = gt.count_on() as f64;
        let pred = gt.map(|&b| if b { 1.0 } else { 0.0 });
        let v = marker_loss(&pred, &gt).unwrap().value;
        assert!(v >= 0.0 && v < DICE_SMOOTH / (2.0 * sum_y + DICE_SMOOTH));
        let inv = gt.map(|&b| if b { 0.0 } else { 1.0 });
        let v = marker_loss(&inv, &gt).unwrap().value;
        assert!((v - 1.0).abs() < 0.03, "{v}");
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let a = RealRaster::filled(3, 3, 0.5);
        let m = Raster::filled(3, 4, true);
        assert!(ce_instance_loss(&a, &m).is_err());
        assert!(marker_loss(&a, &m).is_err());
        assert!(ma_loss(&a, &RealRaster::filled(4, 3, 0.0)).is_err());
    }

    #[test]
    fn soft_marker_gradient_chains() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pred = RealRaster::from_fn(6, 6, |_, _| rng.gen_range(0.5..0.9));
        let gt = Raster::from_fn(6, 6, |r, c| r > 1 && c > 2);
        let lv = marker_loss_from_ma(&pred, &gt, 0.7, 50.0).unwrap();
        let h = 1e-6;
        for i in 0..pred.len() {
            let mut p = pred.clone();
            p.data_mut()[i] += h;
            let up = marker_loss_from_ma(&p, &gt, 0.7, 50.0).unwrap().value;
            p.data_mut()[i] -= 2.0 * h;
            let down = marker_loss_from_ma(&p, &gt, 0.7, 50.0).unwrap().value;
            let fd = (up - down) / (2.0 * h);
            let a = lv.gradient.data()[i];
            assert!((a - fd).abs() <= 1e-5 * a.abs().max(fd.abs()).max(1e-3));
        }
    }

    #[test]
    fn alpha_zero_is_instance_loss() {
        let pred = RealRaster::filled(3, 3, 0.3);
        let gt = Raster::filled(3, 3, true);
        let inputs = LossInputs {
            pred_fg: &pred,
            gt_fg: &gt,
            pred_ma: &pred,
            gt_ma: &pred,
            pred_mc: &pred,
            gt_mc: &gt,
        };
        let t = total_loss(&inputs, LossWeights { alpha: 0.0 }).unwrap();
        assert_eq!(t.value, ce_instance_loss(&pred, &gt).unwrap().value);
        assert!(total_loss(&inputs, LossWeights { alpha: -1.0 }).is_err());
    }
}
