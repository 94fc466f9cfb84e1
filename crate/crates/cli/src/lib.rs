//! Command-line orchestration for the terapix toolkit: scene generation,
//! simulate → reconstruct → analyze pipelines, compression-ratio sweeps,
//! and the on-disk formats they share.

pub mod args;
pub mod commands;
pub mod formats;
pub mod images;
pub mod manifest;

use args::{AnalyzeCommand, Cli, Command, SceneCommand};

pub fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Scene {
            command: SceneCommand::Emit { name, out },
        } => commands::scene_emit(&name, out.as_deref()),
        Command::Simulate(args) => commands::simulate(&args),
        Command::Reconstruct(args) => commands::reconstruct(&args),
        Command::Analyze {
            command: AnalyzeCommand::Tof(args),
        } => commands::analyze_tof(&args),
        Command::Analyze {
            command: AnalyzeCommand::Spectral(args),
        } => commands::analyze_spectral(&args),
        Command::SweepCr(args) => commands::sweep_cr(&args),
    }
}
