use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use zakharov_core::stability::RouteMode;

#[derive(Debug, Parser)]
#[command(
    name = "zakharov",
    version,
    about = "Spectral stability of dnoidal Zakharov waves"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a wave profile.
    Wave(WaveArgs),
    /// Compare Lamé eigenvalues on [0, 4K] with their closed forms.
    LameCheck(LameArgs),
    /// Spectra, kernels and Krein signatures at one point.
    Spectrum(PointArgs),
    /// Full stability report at one point.
    Stability(StabilityArgs),
    /// Stability reports over a parameter grid.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    ClosedForm,
    Numeric,
    Both,
}

impl From<Mode> for RouteMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::ClosedForm => RouteMode::ClosedForm,
            Mode::Numeric => RouteMode::Numeric,
            Mode::Both => RouteMode::Both,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct PointArgs {
    /// Elliptic modulus κ.
    #[arg(long)]
    pub kappa: f64,
    /// Wave speed, |c| < 1.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub c: f64,
    /// Winding number enforcing c·T = 2πl.
    #[arg(long, allow_negative_numbers = true, conflicts_with = "sigma")]
    pub l: Option<i64>,
    /// Frequency parameter σ > 0.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Grid points per period.
    #[arg(long, default_value_t = 256)]
    pub n: usize,
    /// Override the zero threshold for JH.
    #[arg(long)]
    pub tol_zero: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct WaveArgs {
    #[command(flatten)]
    pub point: PointArgs,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct LameArgs {
    #[arg(long)]
    pub kappa: f64,
    #[arg(long, default_value_t = 256)]
    pub n: usize,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct StabilityArgs {
    #[command(flatten)]
    pub point: PointArgs,
    #[arg(long, value_enum, default_value_t = Mode::Both)]
    pub mode: Mode,
    /// Also run the generalized-kernel audit.
    #[arg(long)]
    pub audit: bool,
    /// Multiply the closed-form ⟨L+⁻¹φ, φ⟩ by this factor.
    #[arg(long = "corrupt-I", hide = true)]
    pub corrupt_i: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// κ range as `lo,hi,count`.
    #[arg(long)]
    pub kappa: String,
    /// Comma-separated speeds.
    #[arg(long, default_value = "0", allow_negative_numbers = true)]
    pub c: String,
    /// Comma-separated winding numbers (excludes --sigma).
    #[arg(long, allow_negative_numbers = true, conflicts_with = "sigma")]
    pub l: Option<String>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long, default_value_t = 256)]
    pub n: usize,
    #[arg(long, value_enum, default_value_t = Mode::Both)]
    pub mode: Mode,
    #[arg(long)]
    pub tol_zero: Option<f64>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
}
