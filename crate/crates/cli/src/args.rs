use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use m3t_core::Modality;

#[derive(Debug, Parser)]
#[command(name = "m3t", version, about = "Multi-modal motion tokenization toolkit")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Seed for every random choice the command makes.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Scale::Desk)]
    pub scale: Scale,
    /// Worker threads for commands that process independent sequences.
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Scale {
    Desk,
    Paper,
}

pub fn parse_modality(s: &str) -> Result<Modality, String> {
    s.parse().map_err(|e: m3t_core::Error| e.to_string())
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a tokenizer on a directory of motion files.
    Train(TrainArgs),
    /// Encode motion files into token documents.
    Tokenize(TokenizeArgs),
    /// Decode a token document back into a motion file.
    Detokenize(DetokenizeArgs),
    /// Codebook utilization and token frequencies of token documents.
    Stats(StatsArgs),
    /// Refine a pose sequence against 2-D keypoints.
    Fit(FitArgs),
    /// Geometric and text metrics.
    Eval(EvalArgs),
    /// Write the synthetic fixture set.
    GenFixtures(GenFixturesArgs),
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long, value_parser = parse_modality)]
    pub modality: Modality,
    /// fsq-body, fsq-hand, fsq-face or vq-<modality>; defaults to the FSQ
    /// preset of the modality.
    #[arg(long)]
    pub preset: Option<String>,
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Motion file or directory of motion files; defaults to
    /// `$M3T_DATA_DIR/motion/<modality>`.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Held-out motion for checkpoint selection.
    #[arg(long)]
    pub validation: Option<PathBuf>,
    #[arg(long, short)]
    pub output: PathBuf,
    /// Per-epoch loss table; defaults to `<output>.trace.tsv`.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TokenizeArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Token document for a single input, otherwise a directory.
    #[arg(long, short)]
    pub output: PathBuf,
    #[arg(long, default_value = "ASL")]
    pub language: String,
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DetokenizeArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long, short)]
    pub input: PathBuf,
    #[arg(long, short)]
    pub output: PathBuf,
    /// Stream to decode when the document holds several the checkpoint can
    /// read.
    #[arg(long, value_parser = parse_modality)]
    pub modality: Option<Modality>,
    #[arg(long, default_value_t = 25.0)]
    pub fps: f64,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    /// Codebook sizes for body, left hand, right hand and face.
    #[arg(long, value_delimiter = ',', num_args = 4, default_values_t = [100, 180, 180, 216])]
    pub sizes: Vec<usize>,
    /// Report file; stdout when omitted.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    pub inputs: Vec<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Body model JSON.
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub keypoints: PathBuf,
    /// Initial pose sequence (JSON list of per-frame parameters).
    #[arg(long)]
    pub init: PathBuf,
    /// Orthographic camera as `scale,offset_x,offset_y`.
    #[arg(long, value_delimiter = ',', num_args = 3, default_values_t = [1.0, 0.0, 0.0])]
    pub camera: Vec<f64>,
    #[arg(long, default_value_t = 200)]
    pub steps: usize,
    #[arg(long, default_value_t = 0.01)]
    pub lr: f64,
    #[arg(long, default_value_t = 1.0)]
    pub keypoint_weight: f64,
    #[arg(long, default_value_t = 0.5)]
    pub acceleration_weight: f64,
    #[arg(long, default_value_t = 0.01)]
    pub regularization_weight: f64,
    #[arg(long, short)]
    pub output: PathBuf,
    /// Per-step loss table; defaults to `<output>.trace.tsv`.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Body model JSON, needed for pose sequences.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Predicted pose sequences, paired in order with `--gt`.
    #[arg(long)]
    pub pred: Vec<PathBuf>,
    #[arg(long)]
    pub gt: Vec<PathBuf>,
    /// Hypothesis sentences, one per line.
    #[arg(long)]
    pub hyp: Option<PathBuf>,
    /// Reference sentences, one per line.
    #[arg(long = "ref")]
    pub reference: Option<PathBuf>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenFixturesArgs {
    #[arg(long, short, env = "M3T_DATA_DIR")]
    pub output: PathBuf,
    /// Sequences per modality.
    #[arg(long, default_value_t = 16)]
    pub count: usize,
    #[arg(long, default_value_t = 32)]
    pub frames: usize,
}
