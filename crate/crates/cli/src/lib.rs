//! Command-line front end: configuration, the five commands and their output files.

pub mod commands;
pub mod config;
pub mod error;
pub mod pipeline;
pub mod report;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use commands::Context;
pub use config::RunConfig;
pub use error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(
    name = "pmac",
    version,
    about = "Multilayer graph classification with power mean Laplacians"
)]
pub struct Cli {
    /// TOML configuration file
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// seed for label sampling, eigensolver start vectors and benchmarks
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// output directory (default: `output.dir` from the config, else `out`)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// worker threads for benchmark repetitions
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Classify the nodes of a feature or edge-list graph
    Classify,
    /// Segment one or more PNG images
    SegmentImage,
    /// Misclassification over repeated stochastic block model draws
    SbmBench,
    /// Accuracy and run time of the fast kernel summation
    FastsumBench,
    /// Smallest eigenvalues of the power mean Laplacian
    Eig,
}

impl Cli {
    pub fn context(&self) -> CliResult<Context> {
        let config = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        let out = self
            .out
            .clone()
            .or_else(|| config.output.dir.clone())
            .unwrap_or_else(|| PathBuf::from("out"));
        if self.threads == Some(0) {
            return Err(CliError::config("--threads must be at least 1"));
        }
        Ok(Context {
            config,
            seed: self.seed,
            out,
            threads: self.threads,
        })
    }
}

/// Runs one command and returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    let result = cli.context().and_then(|ctx| match cli.command {
        Command::Classify => commands::cmd_classify(&ctx).map(|r| summary(&r)),
        Command::SegmentImage => commands::cmd_segment_image(&ctx).map(|r| summary(&r)),
        Command::SbmBench => commands::cmd_sbm_bench(&ctx).map(|_| ()),
        Command::FastsumBench => commands::cmd_fastsum_bench(&ctx).map(|_| ()),
        Command::Eig => commands::cmd_eig(&ctx).map(|r| {
            for v in &r.eigenvalues {
                println!("{v}");
            }
        }),
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn summary(r: &report::RunReport) {
    println!(
        "{} nodes, {} classes, {} labeled: {} iterations (converged: {})",
        r.nodes, r.classes, r.labeled, r.iterations, r.converged
    );
    if let (Some(a), Some(u)) = (r.accuracy, r.accuracy_unlabeled) {
        println!("accuracy {a:.4} (unlabeled nodes: {u:.4})");
    }
    if let Some(p) = r.outputs.last() {
        println!("report written to {}", p.display());
    }
}
