//! Command-line harness: synthetic data generation, single runs with JSON
//! reports, and trial-averaged benchmark tables.

pub mod args;
mod commands;
pub mod experiment;

use augclust::Warning;

pub use args::Cli;
pub use commands::{bench, cluster, gen_synth, BenchRow, BenchTable, BENCH_COLUMNS};

pub const EXIT_OTHER: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_STRICT: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("input error: {0}")]
    Input(String),
    #[error("{} warning(s) raised under --strict: {}", .0.len(), join(.0))]
    Strict(Vec<Warning>),
    #[error(transparent)]
    Other(#[from] anyhow::Error),
}

fn join(ws: &[Warning]) -> String {
    ws.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

impl CliError {
    pub fn input(msg: impl Into<String>) -> Self {
        CliError::Input(msg.into())
    }

    /// Library errors all stem from the supplied data or parameters.
    pub fn from_core(e: augclust::Error) -> Self {
        CliError::Input(e.to_string())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Strict(_) => EXIT_STRICT,
            CliError::Other(_) => EXIT_OTHER,
        }
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(CliError::input("--threads must be at least 1"));
        }
        builder = builder.num_threads(t);
    }
    let pool = builder.build().map_err(|e| CliError::Other(e.into()))?;
    pool.install(|| match cli.command {
        args::Command::GenSynth(a) => gen_synth(&a),
        args::Command::Cluster(a) => cluster(&a).map(|_| ()),
        args::Command::Bench(a) => bench(&a).map(|_| ()),
    })
}
