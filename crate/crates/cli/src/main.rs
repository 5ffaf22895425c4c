mod commands;
mod config;
mod error;

use clap::{Parser, Subcommand};
use config::{AffinityFlags, AutoseedFlags};
use std::net::IpAddr;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug, Parser)]
#[command(name = "fuzzyseg", version, about = "Multi-object fuzzy segmentation of textured grayscale images")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Segment an image from clicked seed points
    Segment {
        /// Grayscale PNG or PGM
        #[arg(long)]
        image: Option<PathBuf>,
        /// Seeds JSON: {"objects": [{"id": 1, "points": [[x, y], ...]}, ...]}
        #[arg(long)]
        seeds: Option<PathBuf>,
        /// Output directory
        #[arg(long)]
        output: Option<PathBuf>,
        /// JSON file with defaults for every option; flags take precedence
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        affinity: AffinityFlags,
    },
    /// Choose seeds automatically for k texture classes, then segment
    Autoseg {
        #[arg(long)]
        image: Option<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        autoseed: AutoseedFlags,
        #[command(flatten)]
        affinity: AffinityFlags,
    },
    /// Print the neighborhood scale search for each object's seeds
    Scale {
        #[arg(long)]
        image: Option<PathBuf>,
        #[arg(long)]
        seeds: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Print the traces as JSON
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        affinity: AffinityFlags,
    },
    /// Run an experiment file and print the score table
    Bench {
        /// Experiment JSON file
        #[arg(long)]
        spec: PathBuf,
        /// Experiments run in parallel (0: one per core)
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Start the HTTP service
    Serve {
        #[arg(long, default_value = "127.0.0.1")]
        bind: IpAddr,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        /// Origin allowed by CORS (any when omitted)
        #[arg(long)]
        allow_origin: Option<String>,
        /// Directory of UI assets to serve
        #[arg(long)]
        static_dir: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Segment { image, seeds, output, config, affinity } => {
            commands::segment(image, seeds, output, config, &affinity)
        }
        Command::Autoseg { image, output, config, autoseed, affinity } => {
            commands::autoseg(image, output, config, &autoseed, &affinity)
        }
        Command::Scale { image, seeds, config, json, affinity } => {
            commands::scale(image, seeds, config, json, &affinity)
        }
        Command::Bench { spec, jobs } => commands::bench(&spec, jobs),
        Command::Serve { bind, port, allow_origin, static_dir } => {
            commands::serve(bind, port, allow_origin, static_dir)
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fuzzyseg: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
