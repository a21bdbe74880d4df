use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use topogland::pipeline::synth::{write_manifest, write_sample};
use topogland::pipeline::{synth_image, ShapeFamily, SynthCorpusSpec};
use topogland::topo::GtConfig;

use crate::failure::{CmdResult, Failure};
use crate::files;

#[derive(Debug, Clone, clap::Args, Serialize, Deserialize)]
pub struct Args {
    /// Corpus root; gets images/, labels/, ma/, markers/ and corpus.json.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 10)]
    pub n_images: usize,
    #[arg(long, default_value_t = 256)]
    pub width: usize,
    #[arg(long, default_value_t = 256)]
    pub height: usize,
    #[arg(long, default_value_t = 3)]
    pub glands_min: usize,
    #[arg(long, default_value_t = 6)]
    pub glands_max: usize,
    /// Comma-separated subset of disk, ellipse, blob, fused-pair, ring.
    #[arg(long, value_delimiter = ',', default_value = "disk,ellipse,blob,fused-pair,ring")]
    pub families: Vec<ShapeFamily>,
    /// Nominal gland radius range in pixels.
    #[arg(long, default_value_t = SynthCorpusSpec::default().radius_min)]
    pub radius_min: f64,
    #[arg(long, default_value_t = SynthCorpusSpec::default().radius_max)]
    pub radius_max: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

pub fn run(args: Args) -> CmdResult {
    let spec = SynthCorpusSpec {
        n_images: args.n_images,
        width: args.width,
        height: args.height,
        glands_min: args.glands_min,
        glands_max: args.glands_max,
        families: args.families.clone(),
        radius_min: args.radius_min,
        radius_max: args.radius_max,
        seed: args.seed,
        ..Default::default()
    };
    spec.validate()?;
    let gt = GtConfig::default();
    let indices: Vec<usize> = (0..spec.n_images).collect();
    let entries = files::for_each_ordered(&indices, |&i| {
        let sample = synth_image(&spec, i)?;
        write_sample(&args.out, i, &sample, &gt).map_err(|e| Failure::writing(&args.out, e))
    })?;
    let fused = entries
        .iter()
        .filter(|e| e.families.contains(&ShapeFamily::FusedPair))
        .count();
    write_manifest(&args.out, &spec, &gt, entries).map_err(|e| Failure::writing(&args.out, e))?;
    files::write_config_echo(&args.out.join("synth.config.json"), "synth", &args)?;
    eprintln!(
        "synth: {} images ({fused} with fused pairs) -> {}",
        spec.n_images,
        args.out.display()
    );
    Ok(())
}
