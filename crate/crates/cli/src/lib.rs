//! Command-line harness around the `sigmil` tracker: tracking image
//! sequences, scoring results, generating synthetic sequences and running
//! benchmark tables.

pub mod commands;
pub mod config;
pub mod error;
pub mod sequence;

use clap::{Parser, Subcommand};

pub use commands::{cmd_bench, cmd_eval, cmd_synth, cmd_track, RunManifest};
pub use error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "sigmil", version, about = "Significance-guided MIL tracker")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Track one sequence and write boxes, per-frame metrics and a manifest.
    Track(commands::TrackArgs),
    /// Score result files against ground truth.
    Eval(commands::EvalArgs),
    /// Write a synthetic sequence of a textured square on a random walk.
    Synth(commands::SynthArgs),
    /// Track and score every sequence under a directory.
    Bench(commands::BenchArgs),
}

/// Runs one command, returning the text to print on success.
pub fn execute(cli: &Cli) -> CliResult<String> {
    use sigmil::evaluation::Metric;
    Ok(match &cli.command {
        Command::Track(args) => {
            let m = cmd_track(args)?;
            format!(
                "{}: {} frames, mean CLE {:.2} px, mean VOR {:.3}, {:.1} fps\n",
                m.sequence,
                m.boxes.len(),
                m.mean_cle,
                m.mean_vor,
                m.timing.fps
            )
        }
        Command::Eval(args) => {
            let t = cmd_eval(args)?;
            format!("{}\n{}", t.to_text(Metric::Cle), t.to_text(Metric::Vor))
        }
        Command::Synth(args) => {
            let n = cmd_synth(args)?;
            format!("wrote {n} frames to {}\n", args.out.display())
        }
        Command::Bench(args) => {
            let t = cmd_bench(args)?;
            format!("{}\n{}", t.to_text(Metric::Cle), t.to_text(Metric::Vor))
        }
    })
}
