use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "augclust", version, about = "Learning-augmented k-means and k-median clustering")]
pub struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the synthetic lower-bound instance: points, labels and ground truth.
    GenSynth(GenSynthArgs),
    /// Run one algorithm once and write a report.
    Cluster(ClusterArgs),
    /// Compare algorithms over trials and a parameter sweep.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct GenSynthArgs {
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    #[arg(long, default_value_t = 1000)]
    pub d: usize,
    #[arg(long, default_value_t = 1000.0)]
    pub scale: f64,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algo {
    Main,
    Fast,
    Deletion,
    Kmedian,
    /// Per-class centroids of the predicted labels.
    Naive,
    /// Random-sampling baseline.
    Sampling,
    /// Plain kmeans++ seeding, ignoring the predictor.
    Kmeanspp,
}

impl Algo {
    pub fn name(self) -> &'static str {
        match self {
            Algo::Main => "main",
            Algo::Fast => "fast",
            Algo::Deletion => "deletion",
            Algo::Kmedian => "kmedian",
            Algo::Naive => "naive",
            Algo::Sampling => "sampling",
            Algo::Kmeanspp => "kmeanspp",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Normalize {
    Kmeanspp,
    Optimal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlphaArg {
    Auto,
    Fixed(f64),
}

impl FromStr for AlphaArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "auto" {
            return Ok(AlphaArg::Auto);
        }
        let a: f64 = s.parse().map_err(|_| format!("expected a number or `auto`, got {s:?}"))?;
        if a.is_finite() && a > 0.0 && a < 1.0 {
            Ok(AlphaArg::Fixed(a))
        } else {
            Err(format!("alpha must lie in (0, 1), got {a}"))
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    #[arg(long)]
    pub points: PathBuf,
    /// Labels file, one integer per line, -1 for unlabeled.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Predictor spec, e.g. `uniform:0.5`, `file:l.csv+deletion:0.9`, `kmeanspp:3`.
    #[arg(long)]
    pub predictor: Option<String>,
    #[arg(long)]
    pub k: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Normalize::Kmeanspp)]
    pub normalize: Normalize,
    /// Ground-truth JSON written by gen-synth; required for `--normalize optimal`.
    #[arg(long)]
    pub ground_truth: Option<PathBuf>,
    /// kmeans++ trials averaged for the normalization denominator.
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
    /// Exit with status 3 if any algorithm warning was raised.
    #[arg(long)]
    pub strict: bool,
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_enum, default_value_t = Algo::Main)]
    pub algo: Algo,
    #[arg(long, default_value = "auto")]
    pub alpha: AlphaArg,
    /// Report JSON path.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub centers_out: Option<PathBuf>,
    #[arg(long)]
    pub labels_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Uniform,
    Adversarial,
    Deletion,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_delimiter = ',', default_value = "main,naive,sampling,kmeanspp")]
    pub algos: Vec<Algo>,
    /// `lambda=0:0.05:1`, `q=0.01,0.1`, `alpha=0.05,0.1`, ...
    #[arg(long, default_value = "lambda=0")]
    pub sweep: String,
    /// Corruption mode applied at each swept λ; defaults to the predictor's suffix mode, else uniform.
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    #[arg(long, default_value = "auto")]
    pub alpha: AlphaArg,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output table; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
