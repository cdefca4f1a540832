use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};
use darksight::evalmap::Protocol;
use darksight::gan::GeneratorArch;
use darksight_cli::{
    cmd_enhance, cmd_eval, cmd_report_hist, cmd_train, exit_code, EnhanceMethod, EnhanceOptions,
    EvalOptions, TrainOptions,
};

/// Low-light image enhancement and detection evaluation.
///
/// Exit codes: 0 success, 1 runtime/I-O failure, 2 usage or configuration
/// error, 3 malformed input file, 4 inconsistent inputs.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Brighten every .ppm image in a directory.
    Enhance {
        /// `he` (histogram equalization) or `cyclegan`.
        #[arg(long)]
        method: EnhanceMethod,
        #[arg(long = "in")]
        in_dir: PathBuf,
        #[arg(long = "out")]
        out_dir: PathBuf,
        /// Generator weights (cyclegan only).
        #[arg(long)]
        weights: Option<PathBuf>,
        /// Generator architecture: resnet9, unet256, resnet:BASE:BLOCKS or unet:BASE:DEPTH.
        #[arg(long)]
        arch: Option<GeneratorArch>,
        /// Also write a luma histogram CSV per output image.
        #[arg(long)]
        histograms: bool,
    },
    /// Train a CycleGAN between two image directories.
    Train {
        /// Key-value config file.
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        domain_a: PathBuf,
        #[arg(long)]
        domain_b: PathBuf,
        /// Output path of the A→B generator weights; other files are written beside it.
        #[arg(long)]
        out: PathBuf,
    },
    /// Score detections against annotations.
    Eval {
        /// Directory of annotation .txt files.
        #[arg(long)]
        gt: PathBuf,
        /// Detections JSON file.
        #[arg(long)]
        detections: PathBuf,
        /// `voc50` or `coco`.
        #[arg(long, default_value = "voc50")]
        protocol: Protocol,
        #[arg(long = "out")]
        out_dir: PathBuf,
    },
    /// Print or write the luma histogram of an image.
    ReportHist {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Report the histogram after equalization.
        #[arg(long)]
        after_he: bool,
    },
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Enhance {
            method,
            in_dir,
            out_dir,
            weights,
            arch,
            histograms,
        } => {
            let summary = cmd_enhance(&EnhanceOptions {
                method,
                in_dir,
                out_dir,
                weights,
                arch,
                histograms,
            })?;
            println!(
                "enhanced {} images ({} skipped)",
                summary.written.len(),
                summary.failed.len()
            );
        }
        Command::Train {
            config,
            domain_a,
            domain_b,
            out,
        } => {
            let summary = cmd_train(&TrainOptions {
                config,
                domain_a,
                domain_b,
                out,
            })?;
            if let Some(last) = summary.metrics.last() {
                println!(
                    "{} steps; final loss_G {:.4}, cycle {:.4}",
                    last.step, last.loss_g, last.cycle
                );
            }
            println!("weights: {}", summary.paths.g_ab.display());
        }
        Command::Eval {
            gt,
            detections,
            protocol,
            out_dir,
        } => {
            let summary = cmd_eval(&EvalOptions {
                gt_dir: gt,
                detections,
                protocol,
                out_dir,
            })?;
            print!("{}", summary.table);
        }
        Command::ReportHist {
            input,
            out,
            after_he,
        } => {
            let csv = cmd_report_hist(&input, out.as_deref(), after_he)?;
            if out.is_none() {
                print!("{csv}");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
