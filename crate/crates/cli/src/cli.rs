use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use contagion_core::AccrualMode;

use crate::config::Format;

#[derive(Debug, Parser)]
#[command(
    name = "contagion",
    version,
    about = "Default contagion CDS pricing, simulation and validation"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Swap premium and leg breakdown under both accrual modes.
    Price,
    /// Joint/marginal survival, density and increment bounds on a square grid.
    Curves(GridArgs),
    /// Monte Carlo estimates of survival curves and swap legs.
    Simulate,
    /// Closed form vs quadrature vs Monte Carlo report; exit 1 if any row fails.
    Validate,
    /// Pricing outputs while one parameter varies over a range.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// JSON run configuration (see --print-schema).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Print the JSON schema of the configuration file and exit.
    #[arg(long)]
    pub print_schema: bool,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub paths: Option<usize>,
    /// Worker threads for simulation; results do not depend on it.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Accrual factor used for the headline premium.
    #[arg(long, global = true, value_enum)]
    pub accrual: Option<AccrualArg>,
    /// Also report the premium per unit time (premium / interval).
    #[arg(long, global = true)]
    pub annualized: bool,

    #[arg(long, global = true, allow_negative_numbers = true)]
    pub b0: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub c0: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub b: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub c: Option<f64>,
    /// Risk-free rate.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub r: Option<f64>,
    /// Maturity T.
    #[arg(long = "maturity", visible_alias = "T", global = true)]
    pub maturity: Option<f64>,
    /// Payment interval.
    #[arg(long = "interval", visible_alias = "dT", global = true)]
    pub interval: Option<f64>,
    /// Settlement lag.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub delta: Option<f64>,
    #[arg(long, global = true)]
    pub abs_tol: Option<f64>,
    #[arg(long, global = true)]
    pub rel_tol: Option<f64>,
    #[arg(long, global = true)]
    pub tail_epsilon: Option<f64>,
    #[arg(long, global = true)]
    pub max_subdivisions: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AccrualArg {
    Summed,
    Paper,
}

impl From<AccrualArg> for AccrualMode {
    fn from(a: AccrualArg) -> Self {
        match a {
            AccrualArg::Summed => AccrualMode::SummedPerPeriod,
            AccrualArg::Paper => AccrualMode::PaperCondensed,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    #[arg(long, default_value_t = 0.0)]
    pub t_min: f64,
    #[arg(long, default_value_t = 5.0)]
    pub t_max: f64,
    /// Points per axis.
    #[arg(long, default_value_t = 11)]
    pub steps: usize,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// One of b0, c0, b, c, r, T, dT, delta.
    #[arg(long)]
    pub param: String,
    #[arg(long, allow_negative_numbers = true)]
    pub from: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub to: f64,
    #[arg(long, default_value_t = 11)]
    pub steps: usize,
}
