use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Spectrum-sharing relay network simulator.
#[derive(Debug, Parser)]
#[command(name = "cogrelay", version, about)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Scenario file with `key = value` lines.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Override one config key, e.g. `--set n=200`. Repeatable; applied after
    /// `--config`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,

    /// Master seed of all random draws.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Monte Carlo trials (cycles for `arp`) per point.
    #[arg(long, global = true)]
    pub trials: Option<u64>,

    /// Output file; standard output when absent.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    /// Worker threads; defaults to the number of CPUs.
    #[arg(long, global = true, env = "COGRELAY_THREADS")]
    pub threads: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Fixed,
    Gain,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Monte Carlo rate at one design point against the closed form.
    Rate {
        #[arg(long, default_value_t = 5.0)]
        ps: f64,
        #[arg(long, value_enum, default_value_t = Mode::Fixed)]
        mode: Mode,
    },
    /// Rate-maximizing eligibility threshold.
    OptimizeAlpha {
        #[arg(long, default_value_t = 5.0)]
        ps: f64,
    },
    /// Optimal source power for a given f(α).
    OptimizePs {
        /// Value of f(α) used by the objective.
        #[arg(long, default_value_t = 0.8, conflicts_with = "alpha")]
        f_alpha: f64,
        /// Derive f(α) from this threshold instead.
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Closed forms, and Monte Carlo when `--trials` is given, along one axis.
    Sweep {
        /// alpha, ps, n, sigma_sp2, sigma_s2, sigma_d2, sigma_r2 or delta.
        #[arg(long)]
        axis: String,
        /// Comma-separated axis values.
        #[arg(long, value_delimiter = ',', required_unless_present = "range", num_args = 1..)]
        values: Vec<f64>,
        /// `start:stop:step`, inclusive of `stop`.
        #[arg(long, conflicts_with = "values")]
        range: Option<String>,
        #[arg(long, default_value_t = 5.0)]
        ps: f64,
        #[arg(long, value_enum, default_value_t = Mode::Fixed)]
        mode: Mode,
        /// Apply the decaying cap γ n^{−δ} at every point.
        #[arg(long)]
        delta: Option<f64>,
        /// Use the alternating relay protocol with this many frames.
        #[arg(long)]
        arp_frames: Option<usize>,
    },
    /// Alternating relay protocol: Monte Carlo per frame and closed form.
    Arp {
        #[arg(long, default_value_t = 3)]
        frames: usize,
        #[arg(long, default_value_t = 5.0)]
        ps: f64,
        /// Relay power sum `n·Pr`; defaults to the interference budget.
        #[arg(long)]
        eta: Option<f64>,
        /// Treat the inter-relay signal as noise instead of cancelling it.
        #[arg(long)]
        keep_inter_relay: bool,
    },
    /// Rate versus eligibility threshold.
    Fig2,
    /// Optimal source power versus channel variances.
    Fig3,
    /// Closed form and Monte Carlo versus relay count.
    Fig4,
    /// Rate and interference under a decaying cap.
    Fig6,
    /// Alternating relay protocol versus relay count.
    Fig7,
}
