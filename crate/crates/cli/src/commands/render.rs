use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use topogland::io;
use topogland::Raster;

use crate::failure::{code, CmdResult, Failure};
use crate::files;

#[derive(Debug, Clone, clap::Args, Serialize, Deserialize)]
pub struct Args {
    /// Grayscale or RGB PNG.
    #[arg(long)]
    pub image: PathBuf,
    /// Label-map PNG of the same size.
    #[arg(long)]
    pub labels: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Overlay opacity in [0, 1].
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
}

const GOLDEN: f64 = 0.618_033_988_749_895;

/// Color of canonical label `label` (>= 1): hues stepped by the golden
/// ratio at fixed saturation and value.
pub fn palette(label: u32) -> [u8; 3] {
    let h = (label as f64 * GOLDEN).fract() * 6.0;
    let (s, v) = (0.65, 0.95);
    let i = h.floor();
    let f = h - i;
    let p = v * (1.0 - s);
    let q = v * (1.0 - s * f);
    let t = v * (1.0 - s * (1.0 - f));
    let (r, g, b) = match i as u32 {
        0 => (v, t, p),
        1 => (q, v, p),
        2 => (p, v, t),
        3 => (p, q, v),
        4 => (t, p, v),
        _ => (v, p, q),
    };
    [r, g, b].map(|c| (c * 255.0).round() as u8)
}

pub fn run(args: Args) -> CmdResult {
    if !(0.0..=1.0).contains(&args.alpha) {
        return Err(Failure::new(code::FAILURE, format!("alpha {} not in [0, 1]", args.alpha)));
    }
    let image = io::read_rgb_png(&args.image).map_err(|e| Failure::reading(&args.image, e))?;
    let labels = io::read_label_png(&args.labels).map_err(|e| Failure::reading(&args.labels, e))?;
    image
        .check_same_dims(labels.raster())
        .map_err(|e| Failure::mismatch(&args.image, &args.labels, e))?;
    let a = args.alpha;
    let out = Raster::from_fn(image.width(), image.height(), |r, c| {
        let px = image[(r, c)];
        match labels.raster()[(r, c)] {
            0 => px,
            l => {
                let col = palette(l);
                std::array::from_fn(|k| ((1.0 - a) * px[k] as f64 + a * col[k] as f64).round() as u8)
            }
        }
    });
    io::write_rgb_png(&args.out, &out).map_err(|e| Failure::writing(&args.out, e))?;
    files::write_config_echo(&args.out.with_extension("config.json"), "render", &args)
}
