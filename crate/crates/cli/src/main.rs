//! `topogland` command-line front end.
//!
//! Exit codes: 0 success, 1 other failure or bad arguments, 2 unreadable
//! input, 3 malformed input file, 4 unpaired input file, 5 dimension
//! mismatch.

mod commands;
mod failure;
mod files;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::failure::{code, Failure};

#[derive(Debug, Parser)]
#[command(name = "topogland", version, about = "Gland segmentation ground truth, postprocessing and evaluation")]
struct Cli {
    /// Worker threads; 0 uses every core. Never changes output bytes.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    /// JSON object whose keys override the subcommand's flags.
    #[arg(long, global = true, value_name = "JSON")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Derive MA, skeleton, contour and marker maps from label PNGs.
    GenGt(commands::gen_gt::Args),
    /// Marker-controlled watershed on probability and MA maps.
    Postprocess(commands::postprocess::Args),
    /// Object-level F1, Dice and Hausdorff against ground truth.
    Eval(commands::eval::Args),
    /// Print the network layer table with shapes and parameter counts.
    Netcheck(commands::netcheck::Args),
    /// Write a seeded synthetic gland corpus.
    Synth(commands::synth::Args),
    /// Color overlay of a label map on an image.
    Render(commands::render::Args),
    /// Evaluate the training losses on prediction rasters.
    LossEval(commands::loss_eval::Args),
}

fn run(cli: Cli) -> Result<(), Failure> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build()
        .map_err(|e| Failure::new(code::FAILURE, format!("thread pool: {e}")))?;
    let config = cli.config.as_deref();
    pool.install(|| match cli.command {
        Command::GenGt(a) => commands::gen_gt::run(files::apply_config(a, config)?),
        Command::Postprocess(a) => commands::postprocess::run(files::apply_config(a, config)?),
        Command::Eval(a) => commands::eval::run(files::apply_config(a, config)?),
        Command::Netcheck(a) => commands::netcheck::run(files::apply_config(a, config)?),
        Command::Synth(a) => commands::synth::run(files::apply_config(a, config)?),
        Command::Render(a) => commands::render::run(files::apply_config(a, config)?),
        Command::LossEval(a) => commands::loss_eval::run(files::apply_config(a, config)?),
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(code::FAILURE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code)
        }
    }
}
