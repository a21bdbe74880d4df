use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use topogland::io;
use topogland::topo::{ground_truth, DistanceMetric, GtConfig, Normalization};
use topogland::StructuringElement;

use crate::failure::{CmdResult, Failure};
use crate::files;

#[derive(Debug, Clone, clap::Args, Serialize, Deserialize)]
pub struct Args {
    /// Directory of label-map PNGs.
    #[arg(long)]
    pub labels: PathBuf,
    /// Output root; gets ma/, fg/, skeleton/, contour/ and markers/.
    #[arg(long)]
    pub out: PathBuf,
    /// ma, chessboard or euclidean.
    #[arg(long, default_value = "ma")]
    pub metric: DistanceMetric,
    /// square3x3 or cross3x3.
    #[arg(long, default_value = "square3x3")]
    pub se: StructuringElement,
    /// max_depth or max_minus_min.
    #[arg(long, default_value = "max_depth")]
    pub normalization: Normalization,
    #[arg(long, default_value_t = 1)]
    pub contour_thickness: u32,
    #[arg(long, default_value_t = topogland::topo::DEFAULT_TAU_M)]
    pub tau_m: f64,
    #[arg(long, default_value_t = topogland::topo::DEFAULT_MIN_MARKER_AREA)]
    pub min_marker_area: usize,
}

impl Args {
    fn gt_config(&self) -> GtConfig {
        GtConfig {
            metric: self.metric,
            se: self.se,
            normalization: self.normalization,
            contour_thickness: self.contour_thickness,
            tau_m: self.tau_m,
            min_marker_area: self.min_marker_area,
        }
    }
}

fn process(stem: &str, path: &Path, out: &Path, cfg: &GtConfig) -> CmdResult {
    let labels = io::read_label_png(path).map_err(|e| Failure::reading(path, e))?;
    let gt = ground_truth(&labels, cfg)?;
    let fg = labels.foreground().map(|&b| if b { 1.0 } else { 0.0 });
    let target = |dir: &str, ext: &str| out.join(dir).join(format!("{stem}.{ext}"));

    let p = target("ma", "f32r");
    io::write_f32r(&p, &gt.distance).map_err(|e| Failure::writing(&p, e))?;
    let p = target("fg", "f32r");
    io::write_f32r(&p, &fg).map_err(|e| Failure::writing(&p, e))?;
    let p = target("skeleton", "png");
    io::write_mask_png(&p, gt.skeleton.mask()).map_err(|e| Failure::writing(&p, e))?;
    let p = target("contour", "png");
    io::write_mask_png(&p, &gt.contour).map_err(|e| Failure::writing(&p, e))?;
    let p = target("markers", "png");
    io::write_label_png(&p, &gt.markers).map_err(|e| Failure::writing(&p, e))
}

pub fn run(args: Args) -> CmdResult {
    let cfg = args.gt_config();
    if cfg.contour_thickness == 0 {
        return Err(Failure::new(crate::failure::code::FAILURE, "contour_thickness must be at least 1"));
    }
    let inputs: Vec<_> = files::list_by_stem(&args.labels, "png")?.into_iter().collect();
    files::for_each_ordered(&inputs, |(stem, path)| process(stem, path, &args.out, &cfg))?;
    files::write_config_echo(&args.out.join("gen-gt.config.json"), "gen-gt", &args)?;
    eprintln!("gen-gt: {} label maps -> {}", inputs.len(), args.out.display());
    Ok(())
}
