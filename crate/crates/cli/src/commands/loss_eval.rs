use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use topogland::io;
use topogland::losses::{soft_markers, total_loss, LossInputs, LossWeights, DEFAULT_MARKER_STEEPNESS};
use topogland::topo::{ground_truth, GtConfig};

use crate::failure::{CmdResult, Failure};
use crate::files;

#[derive(Debug, Clone, clap::Args, Serialize, Deserialize)]
pub struct Args {
    /// Foreground probability map (.f32r).
    #[arg(long)]
    pub pred_fg: PathBuf,
    /// Predicted MA map (.f32r).
    #[arg(long)]
    pub pred_ma: PathBuf,
    /// Marker probability map (.f32r); defaults to a sigmoid of --pred-ma.
    #[arg(long)]
    pub pred_mc: Option<PathBuf>,
    /// Ground-truth label PNG.
    #[arg(long)]
    pub gt_labels: PathBuf,
    /// Weight of the topology term.
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = topogland::topo::DEFAULT_TAU_M)]
    pub tau_m: f64,
    /// Sigmoid steepness for soft markers.
    #[arg(long, default_value_t = DEFAULT_MARKER_STEEPNESS)]
    pub steepness: f64,
    /// Also write the JSON result to this file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct LossReport {
    l_inst: f64,
    l_ma: f64,
    l_mc: f64,
    l_top: f64,
    total: f64,
}

pub fn run(args: Args) -> CmdResult {
    let read = |p: &PathBuf| io::read_f32r(p).map_err(|e| Failure::reading(p, e));
    let pred_fg = read(&args.pred_fg)?;
    let pred_ma = read(&args.pred_ma)?;
    let labels = io::read_label_png(&args.gt_labels).map_err(|e| Failure::reading(&args.gt_labels, e))?;
    pred_fg
        .check_same_dims(&pred_ma)
        .map_err(|e| Failure::mismatch(&args.pred_fg, &args.pred_ma, e))?;
    pred_fg
        .check_same_dims(labels.raster())
        .map_err(|e| Failure::mismatch(&args.pred_fg, &args.gt_labels, e))?;
    let pred_mc = match &args.pred_mc {
        Some(p) => {
            let mc = read(p)?;
            mc.check_same_dims(&pred_ma).map_err(|e| Failure::mismatch(p, &args.pred_ma, e))?;
            mc
        }
        None => soft_markers(&pred_ma, args.tau_m, args.steepness).0,
    };

    let gt = ground_truth(
        &labels,
        &GtConfig {
            tau_m: args.tau_m,
            ..Default::default()
        },
    )?;
    let gt_fg = labels.foreground();
    let gt_mc = gt.markers.foreground();
    let t = total_loss(
        &LossInputs {
            pred_fg: &pred_fg,
            gt_fg: &gt_fg,
            pred_ma: &pred_ma,
            gt_ma: &gt.distance,
            pred_mc: &pred_mc,
            gt_mc: &gt_mc,
        },
        LossWeights { alpha: args.alpha },
    )?;
    let report = LossReport {
        l_inst: t.l_inst,
        l_ma: t.l_ma,
        l_mc: t.l_mc,
        l_top: t.l_top,
        total: t.value,
    };
    println!("{}", serde_json::to_string(&report).expect("report serializes"));
    if let Some(path) = &args.out {
        files::write_json(path, &report)?;
        files::write_config_echo(&path.with_extension("config.json"), "loss-eval", &args)?;
    }
    Ok(())
}
