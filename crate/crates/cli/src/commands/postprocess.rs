use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use topogland::io;
use topogland::postprocess::{postprocess_pipeline, PostprocessConfig};
use topogland::StructuringElement;

use crate::failure::{CmdResult, Failure};
use crate::files;

#[derive(Debug, Clone, clap::Args, Serialize, Deserialize)]
pub struct Args {
    /// Directory of instance-probability maps (.f32r).
    #[arg(long)]
    pub prob: PathBuf,
    /// Directory of predicted MA maps (.f32r), paired with --prob by file stem.
    #[arg(long)]
    pub ma: PathBuf,
    /// Output directory for label PNGs and summary.json.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    pub tau_b: f64,
    #[arg(long, default_value_t = topogland::topo::DEFAULT_TAU_M)]
    pub tau_m: f64,
    #[arg(long, default_value_t = 100)]
    pub min_gland_area: usize,
    #[arg(long, default_value_t = topogland::topo::DEFAULT_MIN_MARKER_AREA)]
    pub min_marker_area: usize,
    /// square3x3 or cross3x3.
    #[arg(long, default_value = "square3x3")]
    pub se: StructuringElement,
}

impl Args {
    fn config(&self) -> PostprocessConfig {
        PostprocessConfig {
            tau_b: self.tau_b,
            tau_m: self.tau_m,
            min_gland_area: self.min_gland_area,
            min_marker_area: self.min_marker_area,
            se: self.se,
        }
    }
}

#[derive(Debug, Serialize)]
struct ImageSummary {
    name: String,
    objects: u32,
}

#[derive(Debug, Serialize)]
struct Summary {
    images: Vec<ImageSummary>,
    total_objects: u64,
}

fn process(stem: &str, prob_path: &Path, ma_path: &Path, out: &Path, cfg: &PostprocessConfig) -> CmdResult<u32> {
    let prob = io::read_f32r(prob_path).map_err(|e| Failure::reading(prob_path, e))?;
    let ma = io::read_f32r(ma_path).map_err(|e| Failure::reading(ma_path, e))?;
    prob.check_same_dims(&ma).map_err(|e| Failure::mismatch(prob_path, ma_path, e))?;
    let labels = postprocess_pipeline(&prob, &ma, cfg)?;
    let path = out.join(format!("{stem}.png"));
    io::write_label_png(&path, &labels).map_err(|e| Failure::writing(&path, e))?;
    Ok(labels.n_labels())
}

pub fn run(args: Args) -> CmdResult {
    let cfg = args.config();
    cfg.validate()?;
    let pairs = files::pair_by_stem(
        files::list_by_stem(&args.prob, "f32r")?,
        &args.prob,
        files::list_by_stem(&args.ma, "f32r")?,
        &args.ma,
    )?;
    let counts = files::for_each_ordered(&pairs, |(stem, p, m)| process(stem, p, m, &args.out, &cfg))?;
    let summary = Summary {
        total_objects: counts.iter().map(|&n| n as u64).sum(),
        images: pairs
            .iter()
            .zip(&counts)
            .map(|((stem, _, _), &objects)| ImageSummary {
                name: stem.clone(),
                objects,
            })
            .collect(),
    };
    files::write_json(&args.out.join("summary.json"), &summary)?;
    files::write_config_echo(&args.out.join("postprocess.config.json"), "postprocess", &args)?;
    eprintln!("postprocess: {} images, {} objects", pairs.len(), summary.total_objects);
    Ok(())
}
