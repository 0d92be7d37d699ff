//! Command-line flags.

use std::path::PathBuf;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use necorpia::decoder::Variant;

use crate::{usage, CliResult};

pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Parser)]
#[command(name = "necorpia", version, about = "Random packet-index network coding experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Encode and decode one generation and print what the decoder saw.
    Demo(DemoArgs),
    /// Rank-profile laws, expected branch counts, error bounds and cost ratios as CSV.
    Analyze(AnalyzeArgs),
    /// Network simulation and header-length comparison as CSV.
    Simulate(SimulateArgs),
    /// Instrumented decoder operation counts against the cost formulas as CSV.
    Bench(BenchArgs),
    /// Oracle-equivalence and pmf-agreement checks; exit code 2 on failure.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Sle,
    Lut,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Sle => Variant::Sle,
            VariantArg::Lut => Variant::Lut,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct HeaderArgs {
    /// Number of header blocks.
    #[arg(long, default_value_t = 2)]
    pub nv: usize,
    /// Block lengths, comma separated (default 100 for one block, 50 per block otherwise).
    #[arg(long = "L", value_delimiter = ',', action = ArgAction::Set)]
    pub lengths: Vec<usize>,
    /// Hash length in bits.
    #[arg(long = "Lh", default_value_t = 16)]
    pub hash_len: usize,
}

impl HeaderArgs {
    pub fn block_lengths(&self) -> CliResult<Vec<usize>> {
        if self.nv == 0 {
            return usage("--nv must be at least 1");
        }
        let lengths = if self.lengths.is_empty() {
            if self.nv == 1 {
                vec![100]
            } else {
                vec![50; self.nv]
            }
        } else {
            self.lengths.clone()
        };
        if lengths.len() != self.nv {
            return usage(format!("--L lists {} blocks but --nv is {}", lengths.len(), self.nv));
        }
        if lengths.contains(&0) {
            return usage("block lengths must be positive");
        }
        Ok(lengths)
    }
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    /// Generation sizes, comma separated.
    #[arg(long, value_delimiter = ',', action = ArgAction::Set)]
    pub g: Vec<usize>,
    /// Base seed; grid points use seeds derived from it.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Monte Carlo trials per grid point.
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    /// Output directory for CSV files.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

impl GridArgs {
    pub fn gs(&self, default: &[usize]) -> CliResult<Vec<usize>> {
        let gs = if self.g.is_empty() { default.to_vec() } else { self.g.clone() };
        if gs.contains(&0) {
            return usage("generation sizes must be positive");
        }
        Ok(gs)
    }
}

/// Resolves the seed and announces it so any run can be repeated.
pub fn resolve_seed(seed: Option<u64>) -> u64 {
    match seed {
        Some(s) => {
            println!("seed: {s}");
            s
        }
        None => {
            println!("seed: {DEFAULT_SEED} (default)");
            DEFAULT_SEED
        }
    }
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct DemoArgs {
    #[command(flatten)]
    pub header: HeaderArgs,
    /// Number of source packets.
    #[arg(long, default_value_t = 30)]
    pub g: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Payload length in bits.
    #[arg(long, default_value_t = 256)]
    pub payload: usize,
    #[arg(long, value_enum, default_value_t = VariantArg::Lut)]
    pub variant: VariantArg,
    /// Always run the tree search, even when Gaussian elimination would do.
    #[arg(long)]
    pub no_fast_path: bool,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub header: HeaderArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Packet length used by the plain network coding cost reference.
    #[arg(long = "Lx", default_value_t = 2048)]
    pub packet_len: usize,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct BenchArgs {
    #[command(flatten)]
    pub header: HeaderArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Packet length (header, payload and hash).
    #[arg(long = "Lx", default_value_t = 2048)]
    pub packet_len: usize,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct SimulateArgs {
    /// Number of non-sink nodes.
    #[arg(long = "N", default_value_t = 100)]
    pub n: usize,
    /// Numbers of active sources, comma separated (default 2,4,…,50).
    #[arg(long, value_delimiter = ',', action = ArgAction::Set)]
    pub g: Vec<usize>,
    #[arg(long, default_value_t = 10)]
    pub topologies: usize,
    /// Target collision / decoding-failure probability.
    #[arg(long, default_value_t = 1e-6)]
    pub pc: f64,
    /// Budget on the expected number of terminal decoding branches.
    #[arg(long = "nb-max", default_value_t = 1000.0)]
    pub nb_max: f64,
    /// Forwarding factor.
    #[arg(long, default_value_t = 1.5)]
    pub d: f64,
    /// Per-node buffer size (unlimited when absent).
    #[arg(long)]
    pub buffer: Option<usize>,
    /// Bound on active sources used to size COPE identifiers (default N).
    #[arg(long = "cope-gmax")]
    pub cope_g_max: Option<usize>,
    /// Block lengths of the fixed random-index header.
    #[arg(long = "fixed-L", value_delimiter = ',', action = ArgAction::Set, default_value = "60,60")]
    pub fixed_lengths: Vec<usize>,
    /// Reruns allowed per topology when forwarding dies out.
    #[arg(long = "max-redraws", default_value_t = 100)]
    pub max_redraws: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
pub struct VerifyArgs {
    /// Random instances for the decoder oracle comparison.
    #[arg(long, default_value_t = 500)]
    pub trials: usize,
    /// Monte Carlo draws per generation size for the pmf comparison.
    #[arg(long = "mc-trials", default_value_t = 10_000)]
    pub mc_trials: usize,
    #[arg(long)]
    pub seed: Option<u64>,
}
