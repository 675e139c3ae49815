//! Command-line driver for the bblab experiments.

pub mod commands;
pub mod config;
pub mod experiments;
pub mod report;

use std::ffi::OsString;

use clap::{Parser, Subcommand};

use crate::commands::Failure;
use crate::config::CommonArgs;

#[derive(Debug, Parser)]
#[command(name = "bblab", version, about = "Spectral laboratory for bounded divergence solutions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Bounded solution of div u = div v.
    SolveDiv {
        #[command(flatten)]
        common: CommonArgs,
        /// Source vector field (TFD1); random when omitted.
        #[arg(long)]
        input: Option<std::path::PathBuf>,
        /// Second norm X of the objective max(‖u‖_∞, ‖u‖_X).
        #[arg(long, default_value = "hs:1")]
        x1: String,
        /// Write the solution as TFD1.
        #[arg(long)]
        save: Option<std::path::PathBuf>,
    },
    /// Discrete (θ, q) interpolation norm.
    InterpNorm {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        input: Option<std::path::PathBuf>,
        /// `linf-sobolev` or `linf-intersection`.
        #[arg(long, default_value = "linf-sobolev")]
        couple: String,
    },
    /// K-functional at one or more t.
    KFunctional {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        input: Option<std::path::PathBuf>,
        #[arg(long, default_value = "linf-sobolev")]
        couple: String,
        /// Comma-separated t values.
        #[arg(long, default_value = "0.125,0.5,2")]
        t: String,
    },
    /// Interpolation of bounded solutions through the strip.
    Pipeline {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        input: Option<std::path::PathBuf>,
        /// Write the boundary spectrum v̂_1 as LFD1.
        #[arg(long)]
        save_trace: Option<std::path::PathBuf>,
    },
    /// Decay constant and S₁L^∞ ratio of a multiplier symbol.
    CheckSymbol {
        #[command(flatten)]
        common: CommonArgs,
        /// `inv-n`, `n1-over-cube` or `n1n2-over-quartic`.
        #[arg(long)]
        builtin: Option<String>,
        /// Symbol values as a TFD1 record.
        #[arg(long)]
        input: Option<std::path::PathBuf>,
        /// Number of odd leading coordinates for `--input`.
        #[arg(long, default_value_t = 1)]
        ell: usize,
        /// Largest acceptable S₁L^∞ ratio.
        #[arg(long, default_value_t = 100.0)]
        ceiling: f64,
    },
    /// Averaged bumps with bounded J-sum and growing value at 0.
    Counterexample {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value_t = 3)]
        n_max: u32,
        /// Also evaluate the interpolation norm of every partial sum.
        #[arg(long)]
        interp: bool,
    },
    /// K-functional of a gradient subcouple against the ambient couple.
    KRatio {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value = "0.25,1,4")]
        t: String,
    },
    /// Distribution of optimal objectives over random unit sources.
    BbProbe {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value_t = 8)]
        trials: usize,
        #[arg(long, default_value = "hs:1")]
        x1: String,
    },
}

/// Parse `args` (program name first), run, and return the exit code:
/// 0 on success, 1 on an invariant or numerical failure, 2 on usage errors.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if let Some(t) = std::env::var("BBLAB_THREADS").ok().and_then(|s| s.parse().ok()) {
        bblab_core::exec::init_threads(t);
    }
    match commands::dispatch(cli.command) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            2
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            1
        }
    }
}
