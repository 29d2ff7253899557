use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "bose-mi",
    version,
    about = "Entanglement and mutual information of free lattice bosons"
)]
pub struct Cli {
    /// Output table format.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write the table to this file instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// File of `key = value` lines; command-line flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelName {
    Nn,
    Infinite,
    Powerlaw,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Single-particle energies on the momentum grid.
    Dispersion {
        #[command(flatten)]
        model: ModelArgs,
        /// Number of lattice sites.
        #[arg(long = "L")]
        sites: Option<usize>,
        /// Use the infinite-lattice dispersion sampled on the grid.
        #[arg(long)]
        thermo_limit: bool,
    },
    /// Condensation temperature.
    Tc {
        #[command(flatten)]
        model: ModelArgs,
        /// Particle density.
        #[arg(long)]
        n: Option<f64>,
    },
    /// Chemical potential at fixed density.
    Mu {
        #[command(flatten)]
        model: ModelArgs,
        /// Number of lattice sites.
        #[arg(long = "L")]
        sites: Option<usize>,
        #[command(flatten)]
        temperature: TemperatureArgs,
        /// Particle density.
        #[arg(long)]
        n: Option<f64>,
        /// Relative tolerance of the density solve.
        #[arg(long)]
        tol: Option<f64>,
        /// Use the infinite-lattice dispersion sampled on the grid.
        #[arg(long)]
        thermo_limit: bool,
    },
    /// Zero-temperature entanglement entropy of the condensate.
    ZeroEntropy {
        /// Particle numbers: `a:b` (doubling), `a:b:r` (ratio r) or a comma list.
        #[arg(long)]
        particles: Option<Ladder>,
        /// Subsystem sites.
        #[arg(long)]
        la: Option<usize>,
        /// Number of lattice sites.
        #[arg(long = "L")]
        sites: Option<usize>,
    },
    /// Entropies and mutual information of one ring.
    MutualInfo {
        #[command(flatten)]
        model: ModelArgs,
        /// Number of lattice sites.
        #[arg(long = "L")]
        sites: Option<usize>,
        #[command(flatten)]
        temperature: TemperatureArgs,
        /// Particle density.
        #[arg(long)]
        n: Option<f64>,
        #[command(flatten)]
        partition: PartitionArgs,
        /// Relative tolerance of the density solve.
        #[arg(long)]
        tol: Option<f64>,
        /// Use the infinite-lattice dispersion sampled on the grid.
        #[arg(long)]
        thermo_limit: bool,
    },
    /// Mutual information over a grid of temperatures and ring sizes.
    Sweep {
        #[command(flatten)]
        model: ModelArgs,
        /// Ring sizes: `a:b` (doubling), `a:b:r` (ratio r) or a comma list.
        #[arg(long, conflicts_with = "sites")]
        sizes: Option<Ladder>,
        /// Number of lattice sites.
        #[arg(long = "L")]
        sites: Option<usize>,
        #[command(flatten)]
        temperature: TemperatureArgs,
        /// Particle density.
        #[arg(long)]
        n: Option<f64>,
        #[command(flatten)]
        partition: PartitionArgs,
        /// Relative tolerance of the density solve.
        #[arg(long)]
        tol: Option<f64>,
        /// Use the infinite-lattice dispersion sampled on the grid.
        #[arg(long)]
        thermo_limit: bool,
        /// Worker threads (0 = all cores).
        #[arg(long, env = "BOSE_MI_WORKERS")]
        workers: Option<usize>,
        /// Keep the rows already in `--output` and compute only the missing points.
        #[arg(long)]
        resume: bool,
    },
    /// Least-squares fit of `E_M = a ln L_A + b` to sweep output.
    Fit {
        /// Sweep table (CSV or JSON lines); stdin when absent or `-`.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Fit only the rows at this inverse temperature.
        #[arg(long)]
        beta: Option<f64>,
        /// Inclusive `L_A` range `lo:hi`; default is the upper half of the sizes.
        #[arg(long)]
        window: Option<Window>,
    },
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// Hopping model.
    #[arg(long, value_enum)]
    pub model: Option<ModelName>,
    /// Power-law hopping exponent.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Hopping amplitude.
    #[arg(long = "t")]
    pub hopping: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct TemperatureArgs {
    /// Inverse temperatures, comma separated.
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["temperature", "relative"])]
    pub beta: Option<Vec<f64>>,
    /// Temperatures, comma separated.
    #[arg(long = "T", value_delimiter = ',', conflicts_with = "relative")]
    pub temperature: Option<Vec<f64>>,
    /// Temperatures in units of the condensation temperature.
    #[arg(long = "T-rel", value_delimiter = ',')]
    pub relative: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Args)]
pub struct PartitionArgs {
    /// Fixed subsystem size.
    #[arg(long, conflicts_with = "partition")]
    pub la: Option<usize>,
    /// `equal` or a fraction of the ring in (0, 1).
    #[arg(long)]
    pub partition: Option<PartitionChoice>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PartitionChoice {
    Equal,
    Fraction(f64),
}

impl FromStr for PartitionChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "equal" {
            return Ok(PartitionChoice::Equal);
        }
        s.parse::<f64>()
            .map(PartitionChoice::Fraction)
            .map_err(|_| format!("expected `equal` or a fraction, got `{s}`"))
    }
}

/// Increasing list of positive integers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ladder(pub Vec<u64>);

impl FromStr for Ladder {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .ok()
                .filter(|x| *x >= 1.0 && x.fract() == 0.0 && *x <= 1e15)
                .map(|x| x as u64)
                .ok_or_else(|| format!("expected a positive integer, got `{t}`"))
        };
        let values = if s.contains(':') {
            let parts: Vec<&str> = s.split(':').collect();
            if parts.len() > 3 {
                return Err(format!("ladder must be `a:b` or `a:b:ratio`, got `{s}`"));
            }
            let (lo, hi) = (num(parts[0])?, num(parts[1])?);
            let ratio = parts.get(2).map(|r| num(r)).transpose()?.unwrap_or(2);
            if ratio < 2 {
                return Err(format!("ladder ratio must be at least 2, got {ratio}"));
            }
            if hi < lo {
                return Err(format!("ladder end {hi} is below its start {lo}"));
            }
            let mut v = vec![lo];
            while let Some(next) = v.last().unwrap().checked_mul(ratio).filter(|&x| x <= hi) {
                v.push(next);
            }
            v
        } else {
            s.split(',').map(num).collect::<Result<Vec<_>, _>>()?
        };
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(format!("values must be strictly increasing, got `{s}`"));
        }
        Ok(Ladder(values))
    }
}

/// Inclusive `lo:hi` range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window(pub f64, pub f64);

impl FromStr for Window {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || format!("expected `lo:hi`, got `{s}`");
        let (lo, hi) = s.split_once(':').ok_or_else(bad)?;
        let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
        let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
        if !(lo > 0.0 && hi >= lo) {
            return Err(format!("window needs 0 < lo <= hi, got `{s}`"));
        }
        Ok(Window(lo, hi))
    }
}
