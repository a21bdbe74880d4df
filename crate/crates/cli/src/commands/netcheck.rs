use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use topogland::netspec::{
    build_tanet_with, format_table, layer_table, propagate_shapes, LayerRow, NetOptions, TensorShape,
    DEFAULT_GROWTH,
};

use crate::failure::{CmdResult, Failure};
use crate::files;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, clap::Args, Serialize, Deserialize)]
pub struct Args {
    #[arg(long, default_value_t = 512)]
    pub height: usize,
    #[arg(long, default_value_t = 512)]
    pub width: usize,
    #[arg(long, default_value_t = 3)]
    pub channels: usize,
    /// Dense block growth rate.
    #[arg(long, default_value_t = DEFAULT_GROWTH)]
    pub growth: usize,
    /// Instance head kernel: 1, or 2 for a literal 2x2 convolution.
    #[arg(long, default_value_t = 1)]
    pub inst_head_kernel: usize,
    /// Format printed to stdout.
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
    /// Also write the JSON table to this file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct NetReport {
    input: TensorShape,
    inst: TensorShape,
    top: TensorShape,
    params: u64,
    layers: Vec<LayerRow>,
}

pub fn run(args: Args) -> CmdResult {
    let graph = build_tanet_with(&NetOptions {
        input_channels: args.channels,
        growth: args.growth,
        inst_head_kernel: args.inst_head_kernel,
        ..Default::default()
    })?;
    let input = TensorShape::new(args.channels, args.height, args.width);
    let (inst, top) = propagate_shapes(&graph, input)?;
    let layers = layer_table(&graph, input)?;
    let report = NetReport {
        input,
        inst,
        top,
        params: layers.iter().map(|r| r.params).sum(),
        layers,
    };
    match args.format {
        Format::Text => {
            print!("{}", format_table(&report.layers));
            println!("input {} -> inst {}, top {}", report.input, report.inst, report.top);
        }
        Format::Json => {
            println!("{}", serde_json::to_string_pretty(&report).map_err(|e| Failure::new(1, e.to_string()))?);
        }
    }
    if let Some(path) = &args.out {
        files::write_json(path, &report)?;
        files::write_config_echo(&path.with_extension("config.json"), "netcheck", &args)?;
    }
    Ok(())
}
