use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(
    name = "qfsk-lab",
    version,
    about = "CRC-aided convolutional codes over GF(4) for noncoherent 4-FSK"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Distance-spectrum-optimal CRC search (m = 0 reports the base code)
    Search(SearchArgs),
    /// Truncated distance spectrum of one code, optionally with an
    /// estimated union bound
    Spectrum(SpectrumArgs),
    /// Monte-Carlo FER sweep with adaptive list Viterbi decoding
    Fer(FerArgs),
    /// Saddlepoint approximation of the RCU bound
    Rcu(BoundArgs),
    /// Normal approximation from capacity and dispersion
    Normal(BoundArgs),
    /// Horizontal gap in dB between a FER curve and a bound curve
    Gap(GapArgs),
}

/// Which SNR the grid refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SnrRef {
    #[default]
    Ebno,
    Esno,
}

impl SnrRef {
    pub fn column(self) -> &'static str {
        match self {
            SnrRef::Ebno => "ebno_db",
            SnrRef::Esno => "esno_db",
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SnrRef::Ebno => "ebno",
            SnrRef::Esno => "esno",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MetricArg {
    Envelope,
    SquareLaw,
}

#[derive(Debug, Clone, Args, Default)]
pub struct CodeArgs {
    /// Encoder memory; selects the default generators for 2 and 4
    #[arg(long)]
    pub nu: Option<usize>,
    /// First generator, lowest power first, e.g. "1,1,1"
    #[arg(long)]
    pub g1: Option<String>,
    /// Second generator, e.g. "1,a,1"
    #[arg(long)]
    pub g2: Option<String>,
    /// Message length in GF(4) symbols
    #[arg(long = "K")]
    pub k: Option<usize>,
    /// CRC degree
    #[arg(long)]
    pub m: Option<usize>,
    /// CRC polynomial, e.g. "1,0,0,a,b,1"
    #[arg(long)]
    pub g: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    /// SNR grid in dB: "start:stop:step" or a comma-separated list
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
    #[arg(long, value_enum)]
    pub snr_ref: Option<SnrRef>,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// JSON campaign file; flags given on the command line take precedence
    #[arg(long)]
    pub campaign: Option<PathBuf>,
    /// Random seed (required, here or in the campaign file)
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads
    #[arg(long, env = "QFSK_LAB_WORKERS")]
    pub workers: Option<usize>,
    /// Output CSV; a manifest is written next to it
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[arg(long)]
    pub nu: usize,
    #[arg(long)]
    pub g1: Option<String>,
    #[arg(long)]
    pub g2: Option<String>,
    #[arg(long = "K", default_value_t = 64)]
    pub k: usize,
    #[arg(long)]
    pub m: usize,
    /// Weight truncation; defaults to d_free + 12
    #[arg(long)]
    pub dtilde: Option<u32>,
    #[arg(long, env = "QFSK_LAB_WORKERS")]
    pub workers: Option<usize>,
    /// Report JSON; the text table is written next to it
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub code: CodeArgs,
    /// Weight truncation; defaults to d_free + 12
    #[arg(long)]
    pub dtilde: Option<u32>,
    /// Spectrum JSON
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Seed for the pairwise error estimates of the union bound
    #[arg(long)]
    pub seed: Option<u64>,
    /// Samples per pairwise error estimate
    #[arg(long, default_value_t = 100_000)]
    pub p2_samples: u64,
    /// CSV of the estimated union bound over the grid
    #[arg(long)]
    pub union_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FerArgs {
    #[command(flatten)]
    pub run: RunArgs,
    #[command(flatten)]
    pub code: CodeArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Stop a grid point after this many frame errors
    #[arg(long)]
    pub min_errors: Option<u64>,
    /// Stop a grid point after this many frames
    #[arg(long)]
    pub max_frames: Option<u64>,
    #[arg(long)]
    pub initial_list: Option<usize>,
    #[arg(long)]
    pub max_list: Option<usize>,
    #[arg(long, value_enum)]
    pub metric: Option<MetricArg>,
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    #[command(flatten)]
    pub run: RunArgs,
    #[command(flatten)]
    pub code: CodeArgs,
    /// Blocklength in channel uses; defaults to that of the code
    #[arg(long)]
    pub n: Option<usize>,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long)]
    pub e0_samples: Option<usize>,
    #[arg(long)]
    pub omega_samples: Option<usize>,
    #[arg(long)]
    pub capacity_samples: Option<usize>,
    /// Tolerance on |E0'(rho) - R| in nats
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct GapArgs {
    /// FER curve CSV (fer, rcu or normal output)
    #[arg(long)]
    pub curve: PathBuf,
    /// Reference curve CSV, usually rcu output
    #[arg(long)]
    pub bound: PathBuf,
    /// FER values at which to measure the gap
    #[arg(long, default_value = "1e-2,1e-3,1e-4")]
    pub fer: String,
    #[arg(long, value_enum, default_value_t = SnrRef::Ebno)]
    pub snr_ref: SnrRef,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
