//! Command-line argument definitions.

use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "coloc",
    version,
    about = "Colocalization analysis for dual-channel images",
    long_about = "Computes colocalization statistics (Pearson, Manders, and a \
thresholded rank-correlation scan) with block-permutation p-values, generates \
synthetic image pairs, and runs Monte-Carlo power experiments."
)]
pub struct Cli {
    /// Worker threads for parallel sections (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Compute statistics and permutation p-values for an image pair.
    Analyze(AnalyzeArgs),
    /// Generate a synthetic dual-channel image pair.
    Simulate(SimulateArgs),
    /// Monte-Carlo power table over a parameter grid.
    Power(PowerArgs),
    /// Emit the permutation null distribution of one statistic.
    NullDist(NullDistArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum StatChoice {
    Pearson,
    Manders,
    TauStar,
    TauStarApp,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PowerStat {
    Pearson,
    MandersM1,
    MandersM2,
    TauStar,
    TauStarApp,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FloorChoice {
    Default,
    OtsuMedian,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FormatChoice {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum InputFormat {
    Auto,
    Pgm,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SimMode {
    Null,
    Alt,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SimFormat {
    Pgm,
    Csv,
}

/// Block size: a positive pixel count or `auto` for
/// `floor(min(sqrt(width), sqrt(height)))`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlockSizeArg {
    Auto,
    Fixed(usize),
}

impl FromStr for BlockSizeArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(BlockSizeArg::Auto);
        }
        match s.parse::<usize>() {
            Ok(n) if n >= 1 => Ok(BlockSizeArg::Fixed(n)),
            _ => Err(format!("expected a positive integer or 'auto', got {s:?}")),
        }
    }
}

#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    /// First channel image (x).
    pub x: PathBuf,
    /// Second channel image (y).
    pub y: PathBuf,
    /// Statistic to test; `manders` reports both split coefficients.
    #[arg(long, value_enum, default_value_t = StatChoice::TauStarApp)]
    pub stat: StatChoice,
    /// Number of permutation replicates B.
    #[arg(long, default_value_t = 1000)]
    pub perms: usize,
    /// Shuffle block size in pixels, or `auto`.
    #[arg(long, default_value = "auto")]
    pub block_size: BlockSizeArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Lower bound policy for the scanned thresholds.
    #[arg(long, value_enum, default_value_t = FloorChoice::Default)]
    pub floor: FloorChoice,
    #[arg(long, value_enum, default_value_t = FormatChoice::Json)]
    pub format: FormatChoice,
    /// Output path (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = InputFormat::Auto)]
    pub input_format: InputFormat,
    /// Shuffle the y channel instead of the x channel.
    #[arg(long)]
    pub shuffle_y: bool,
    /// Report the add-one-smoothed p-value instead of the strict count.
    #[arg(long)]
    pub smoothed: bool,
    /// Omit the timestamp so identical runs produce identical bytes.
    #[arg(long)]
    pub no_timestamp: bool,
}

#[derive(Args, Debug)]
pub struct NullDistArgs {
    pub x: PathBuf,
    pub y: PathBuf,
    /// Statistic whose null distribution is estimated.
    #[arg(long, value_enum, default_value_t = PowerStat::TauStarApp)]
    pub stat: PowerStat,
    #[arg(long, default_value_t = 1000)]
    pub perms: usize,
    #[arg(long, default_value = "auto")]
    pub block_size: BlockSizeArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = FloorChoice::Default)]
    pub floor: FloorChoice,
    #[arg(long, value_enum, default_value_t = FormatChoice::Csv)]
    pub format: FormatChoice,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = InputFormat::Auto)]
    pub input_format: InputFormat,
    #[arg(long)]
    pub shuffle_y: bool,
    #[arg(long)]
    pub smoothed: bool,
    #[arg(long)]
    pub no_timestamp: bool,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// Output path for the x channel.
    #[arg(long)]
    pub out_x: PathBuf,
    /// Output path for the y channel.
    #[arg(long)]
    pub out_y: PathBuf,
    #[arg(long, default_value_t = 50)]
    pub width: usize,
    #[arg(long, default_value_t = 50)]
    pub height: usize,
    /// `null` for independent channels, `alt` for the copula mixture.
    #[arg(long, value_enum, default_value_t = SimMode::Alt)]
    pub mode: SimMode,
    /// Signal threshold R in [0, 1).
    #[arg(long, default_value_t = 0.3)]
    pub r: f64,
    /// Dependence strength theta > 0.
    #[arg(long, default_value_t = 100.0)]
    pub theta: f64,
    /// Gaussian PSF width in pixels (0 disables blurring).
    #[arg(long, default_value_t = 1.0)]
    pub psf_sigma: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// `csv` is lossless; `pgm` quantizes to 16 bits and writes a sidecar
    /// with the scale factors.
    #[arg(long, value_enum, default_value_t = SimFormat::Csv)]
    pub format: SimFormat,
}

#[derive(Args, Debug)]
pub struct PowerArgs {
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.7, 0.8, 0.9])]
    pub r_list: Vec<f64>,
    #[arg(
        long,
        value_delimiter = ',',
        default_values_t = vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0]
    )]
    pub theta_list: Vec<f64>,
    /// Simulation runs per (R, theta) point.
    #[arg(long, default_value_t = 200)]
    pub runs: usize,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Null simulations used for each critical value.
    #[arg(long, default_value_t = 1000)]
    pub null_runs: usize,
    #[arg(long, default_value_t = 50)]
    pub width: usize,
    #[arg(long, default_value_t = 50)]
    pub height: usize,
    #[arg(long, default_value_t = 1.0)]
    pub psf_sigma: f64,
    #[arg(
        long,
        value_enum,
        value_delimiter = ',',
        default_values_t = vec![
            PowerStat::Pearson,
            PowerStat::MandersM1,
            PowerStat::MandersM2,
            PowerStat::TauStarApp,
        ]
    )]
    pub stats: Vec<PowerStat>,
    #[arg(long, value_enum, default_value_t = FloorChoice::Default)]
    pub floor: FloorChoice,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = FormatChoice::Csv)]
    pub format: FormatChoice,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
