use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qrouter_core::config::RunConfig;
use qrouter_core::error::Error;
use qrouter_core::pipeline;

#[derive(Parser)]
#[command(name = "qrouter", about = "Multi-tier video quality routing engine")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonOpts {
    /// JSON run configuration
    #[arg(long)]
    config: PathBuf,
    /// Routing tier (0, 1, or 2); overrides the config value
    #[arg(long)]
    tier: Option<u8>,
    /// Use deterministic mock experts instead of HTTP endpoints
    #[arg(long)]
    mock: bool,
    /// Seed for the mock experts
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Score a video and write report.json
    Score {
        /// Directory of numbered PPM frames
        #[arg(long)]
        video: PathBuf,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Localize artifacts and write heatmaps plus localization.json
    Localize {
        /// Directory of numbered PPM frames
        #[arg(long)]
        video: PathBuf,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Batch-evaluate a manifest and report PLCC/SRCC
    Eval {
        /// CSV manifest with header video_dir,mos
        #[arg(long)]
        manifest: PathBuf,
        #[command(flatten)]
        common: CommonOpts,
    },
}

fn load_config(common: &CommonOpts) -> Result<RunConfig, Error> {
    let mut cfg = RunConfig::from_file(&common.config)?;
    if let Some(tier) = common.tier {
        cfg.tier = tier;
    }
    if common.mock {
        cfg.mock = true;
    }
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn is_usage_error(err: &Error) -> bool {
    matches!(err, Error::Config(_) | Error::InvalidThresholds(_))
}

fn run() -> Result<(), (u8, Error)> {
    let cli = Cli::parse();
    let (common, body): (&CommonOpts, Box<dyn FnOnce(&RunConfig) -> Result<(), Error>>) =
        match &cli.command {
            Command::Score { video, common } => {
                let (video, out) = (video.clone(), common.out.clone());
                (
                    common,
                    Box::new(move |cfg| {
                        let report = pipeline::run_score(&video, cfg, &out)?;
                        println!("{}", serde_json::to_string_pretty(&report)?);
                        Ok(())
                    }),
                )
            }
            Command::Localize { video, common } => {
                let (video, out) = (video.clone(), common.out.clone());
                (
                    common,
                    Box::new(move |cfg| {
                        let outcome = pipeline::run_localize(&video, cfg, &out)?;
                        println!("{}", serde_json::to_string_pretty(&outcome.summary)?);
                        Ok(())
                    }),
                )
            }
            Command::Eval { manifest, common } => {
                let (manifest, out) = (manifest.clone(), common.out.clone());
                (
                    common,
                    Box::new(move |cfg| {
                        let result = pipeline::run_eval(&manifest, cfg, &out)?;
                        print!("{}", qrouter_core::eval::format_table(&result));
                        Ok(())
                    }),
                )
            }
        };
    let cfg = load_config(common).map_err(|e| (1, e))?;
    body(&cfg).map_err(|e| if is_usage_error(&e) { (1, e) } else { (2, e) })
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err((code, err)) => {
            eprintln!("error: {}", err);
            ExitCode::from(code)
        }
    }
}
