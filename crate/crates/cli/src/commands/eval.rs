use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use topogland::io;
use topogland::metrics::{evaluate, MatchCriterion, MetricsReport};

use crate::failure::{CmdResult, Failure};
use crate::files;

#[derive(Debug, Clone, clap::Args, Serialize, Deserialize)]
pub struct Args {
    /// Directory of predicted label PNGs.
    #[arg(long)]
    pub pred: PathBuf,
    /// Directory of ground-truth label PNGs, paired with --pred by file stem.
    #[arg(long)]
    pub gt: PathBuf,
    /// Report path; `.csv` and `.json` files are written next to it.
    #[arg(long)]
    pub report: PathBuf,
    /// gt_fraction or iou.
    #[arg(long, default_value = "gt_fraction")]
    pub criterion: MatchCriterion,
}

#[derive(Debug, Serialize)]
struct Means {
    f1: f64,
    precision: f64,
    recall: f64,
    obj_dice: f64,
    obj_hausdorff: f64,
}

#[derive(Debug, Serialize)]
struct ImageRow<'a> {
    name: &'a str,
    #[serde(flatten)]
    metrics: &'a MetricsReport,
}

#[derive(Debug, Serialize)]
struct Report<'a> {
    images: usize,
    criterion: MatchCriterion,
    mean: Means,
    per_image: Vec<ImageRow<'a>>,
}

fn process(pred_path: &Path, gt_path: &Path, criterion: MatchCriterion) -> CmdResult<MetricsReport> {
    let pred = io::read_label_png(pred_path).map_err(|e| Failure::reading(pred_path, e))?;
    let gt = io::read_label_png(gt_path).map_err(|e| Failure::reading(gt_path, e))?;
    pred.raster()
        .check_same_dims(gt.raster())
        .map_err(|e| Failure::mismatch(pred_path, gt_path, e))?;
    Ok(evaluate(&pred, &gt, criterion)?)
}

fn mean(rows: &[MetricsReport], f: impl Fn(&MetricsReport) -> f64) -> f64 {
    if rows.is_empty() {
        return 0.0;
    }
    rows.iter().map(f).sum::<f64>() / rows.len() as f64
}

pub fn run(args: Args) -> CmdResult {
    let pairs = files::pair_by_stem(
        files::list_by_stem(&args.pred, "png")?,
        &args.pred,
        files::list_by_stem(&args.gt, "png")?,
        &args.gt,
    )?;
    let rows = files::for_each_ordered(&pairs, |(_, p, g)| process(p, g, args.criterion))?;

    let mut csv = String::from("name,f1,precision,recall,obj_dice,obj_hausdorff,tp,fp,fn\n");
    for ((stem, _, _), r) in pairs.iter().zip(&rows) {
        let _ = writeln!(
            csv,
            "{stem},{},{},{},{},{},{},{},{}",
            r.f1, r.precision, r.recall, r.obj_dice, r.obj_hausdorff, r.tp, r.fp, r.fn_
        );
    }
    let report = Report {
        images: rows.len(),
        criterion: args.criterion,
        mean: Means {
            f1: mean(&rows, |r| r.f1),
            precision: mean(&rows, |r| r.precision),
            recall: mean(&rows, |r| r.recall),
            obj_dice: mean(&rows, |r| r.obj_dice),
            obj_hausdorff: mean(&rows, |r| r.obj_hausdorff),
        },
        per_image: pairs
            .iter()
            .zip(&rows)
            .map(|((stem, _, _), metrics)| ImageRow { name: stem, metrics })
            .collect(),
    };

    let csv_path = args.report.with_extension("csv");
    io::write_atomic(&csv_path, csv.as_bytes()).map_err(|e| Failure::writing(&csv_path, e))?;
    files::write_json(&args.report.with_extension("json"), &report)?;
    files::write_config_echo(&args.report.with_extension("config.json"), "eval", &args)?;
    eprintln!(
        "eval: {} images, mean f1 {:.4}, obj_dice {:.4}, obj_hausdorff {:.4}",
        report.images, report.mean.f1, report.mean.obj_dice, report.mean.obj_hausdorff
    );
    Ok(())
}
