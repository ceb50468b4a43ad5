use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::commands::{convert, evaluate, generate, render, synth, train};
use crate::error::Result;

/// Action-conditioned 3D human motion generation.
#[derive(Debug, Clone, Parser)]
#[command(name = "motiongen", version)]
pub struct Cli {
    /// Root for outputs of commands run without `--out`.
    #[arg(long, global = true, env = "MOTIONGEN_OUT", default_value = "motiongen-out")]
    pub out_root: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Write a procedural dataset: skeleton, motions and manifest.
    Synth(synth::SynthArgs),
    /// Train the motion model on a dataset manifest.
    Train(train::TrainArgs),
    /// Sample motions of one action from a trained model.
    Generate(generate::GenerateArgs),
    /// Score a trained model with FID, accuracy, diversity and multimodality.
    Evaluate(evaluate::EvaluateArgs),
    /// Convert a motion between joint coordinates and Lie parameters.
    Convert(convert::ConvertArgs),
    /// Draw a motion as an SVG strip of poses.
    Render(render::RenderArgs),
}

/// Runs the selected command and returns its summary.
pub fn run(cli: &Cli) -> Result<String> {
    let root = &cli.out_root;
    match &cli.command {
        Command::Synth(a) => synth::run(a, root),
        Command::Train(a) => train::run(a, root),
        Command::Generate(a) => generate::run(a, root),
        Command::Evaluate(a) => evaluate::run(a, root),
        Command::Convert(a) => convert::run(a, root),
        Command::Render(a) => render::run(a, root),
    }
}
