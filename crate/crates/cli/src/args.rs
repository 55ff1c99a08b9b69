use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qnpr_core::localpoly::KernelFamily;
use qnpr_core::Backend;

use crate::error::{usage, Result};
use crate::ingest::ColumnRef;

pub const SEED_ENV: &str = "QNN_NPR_SEED";

#[derive(Debug, Parser)]
#[command(
    name = "qnpr",
    version,
    about = "Exact-pivot regression fits, confidence bands and Grover demos"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Least-squares fit with a pointwise confidence band.
    FitLinear(FitLinearArgs),
    /// Local polynomial fit with a pointwise confidence band.
    FitLocal(FitLocalArgs),
    /// Reduced row-echelon form of a CSV matrix.
    Rref(RrefArgs),
    /// Simulated Grover search over a marked set.
    GroverDemo(GroverArgs),
    /// Empirical band coverage on synthetic data.
    CoverageSim(CoverageArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendArg {
    Classical,
    #[value(alias = "quantum")]
    QuantumSim,
}

impl From<BackendArg> for Backend {
    fn from(b: BackendArg) -> Self {
        match b {
            BackendArg::Classical => Backend::Classical,
            BackendArg::QuantumSim => Backend::QuantumSim,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KernelArg {
    Gaussian,
    Epanechnikov,
    Boxcar,
}

impl From<KernelArg> for KernelFamily {
    fn from(k: KernelArg) -> Self {
        match k {
            KernelArg::Gaussian => KernelFamily::Gaussian,
            KernelArg::Epanechnikov => KernelFamily::Epanechnikov,
            KernelArg::Boxcar => KernelFamily::Boxcar,
        }
    }
}

/// Evaluation grid: `MIN:MAX:COUNT` or an explicit comma-separated list.
#[derive(Debug, Clone, PartialEq)]
pub enum GridSpec {
    Range { min: f64, max: f64, count: usize },
    List(Vec<f64>),
}

impl GridSpec {
    pub fn points(&self) -> Vec<f64> {
        match self {
            GridSpec::List(v) => v.clone(),
            GridSpec::Range { min, max, count } => (0..*count)
                .map(|k| min + (max - min) * k as f64 / (*count - 1) as f64)
                .collect(),
        }
    }
}

impl std::fmt::Display for GridSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GridSpec::Range { min, max, count } => write!(f, "{min}:{max}:{count}"),
            GridSpec::List(v) => {
                let parts: Vec<String> = v.iter().map(f64::to_string).collect();
                f.write_str(&parts.join(","))
            }
        }
    }
}

impl FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let num = |t: &str| -> std::result::Result<f64, String> {
            match t.trim().parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(format!("bad grid value {t:?}")),
            }
        };
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            [min, max, count] => {
                let (min, max) = (num(min)?, num(max)?);
                let count: usize = count
                    .trim()
                    .parse()
                    .map_err(|_| format!("bad grid count {count:?}"))?;
                if count < 2 {
                    return Err("grid count must be at least 2".into());
                }
                if min >= max {
                    return Err(format!("grid minimum {min} must be below maximum {max}"));
                }
                Ok(GridSpec::Range { min, max, count })
            }
            [list] => {
                let v = list
                    .split(',')
                    .map(num)
                    .collect::<std::result::Result<Vec<_>, _>>()?;
                Ok(GridSpec::List(v))
            }
            _ => Err(format!(
                "grid must be MIN:MAX:COUNT or a comma list, got {s:?}"
            )),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    /// CSV file with a header row.
    #[arg(long)]
    pub input: PathBuf,
    /// Response column, by name or zero-based index.
    #[arg(long = "y")]
    pub y_column: ColumnRef,
    /// Band level: the band targets coverage 1 - alpha.
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, value_enum, default_value_t = BackendArg::Classical)]
    pub backend: BackendArg,
    /// Overridden by the QNN_NPR_SEED environment variable when set.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Defaults to 25 points spanning the first predictor.
    #[arg(long)]
    pub grid: Option<GridSpec>,
    /// JSON report path; printed to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Band table; defaults to the report path with a `.csv` extension.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long)]
    pub plot: Option<PathBuf>,
    /// CSV with the same columns; counts rows accepted by the band.
    #[arg(long)]
    pub holdout: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct FitLinearArgs {
    #[command(flatten)]
    pub fit: FitArgs,
    /// Fit without an intercept column.
    #[arg(long)]
    pub no_intercept: bool,
}

#[derive(Debug, Clone, Args)]
pub struct FitLocalArgs {
    #[command(flatten)]
    pub fit: FitArgs,
    #[arg(long, default_value_t = 1)]
    pub degree: usize,
    #[arg(long, value_enum, default_value_t = KernelArg::Gaussian)]
    pub kernel: KernelArg,
    /// Defaults to the normal-reference rule 1.06 sd n^(-1/5).
    #[arg(long)]
    pub bandwidth: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct RrefArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = BackendArg::Classical)]
    pub backend: BackendArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct GroverArgs {
    #[arg(long)]
    pub qubits: usize,
    /// Marked basis indices, comma separated. May be empty.
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    pub marked: Vec<usize>,
    /// Largest iteration count in the probability table.
    #[arg(long, default_value_t = 10)]
    pub max_iterations: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 64)]
    pub max_rounds: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Linear,
    Local,
}

#[derive(Debug, Clone, Args)]
pub struct CoverageArgs {
    #[arg(long, default_value_t = 1000)]
    pub replicates: usize,
    #[arg(long, default_value_t = 50)]
    pub n: usize,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 5)]
    pub grid_points: usize,
    #[arg(long, value_enum, default_value_t = ModelArg::Linear)]
    pub model: ModelArg,
    #[arg(long, default_value_t = 1)]
    pub degree: usize,
    #[arg(long, value_enum, default_value_t = KernelArg::Gaussian)]
    pub kernel: KernelArg,
    #[arg(long)]
    pub bandwidth: Option<f64>,
    #[arg(long, value_enum, default_value_t = BackendArg::Classical)]
    pub backend: BackendArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// The seed to use: `QNN_NPR_SEED` wins over the flag.
pub fn effective_seed(flag: u64, env: Option<&str>) -> Result<u64> {
    match env {
        None => Ok(flag),
        Some(text) => match text.trim().parse() {
            Ok(seed) => Ok(seed),
            Err(_) => usage(format!(
                "{SEED_ENV} must be an unsigned integer, got {text:?}"
            )),
        },
    }
}

pub fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        usage(format!("alpha must lie in (0, 1), got {alpha}"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_forms() {
        let g: GridSpec = "0:1:5".parse().unwrap();
        assert_eq!(g.points(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(g.to_string(), "0:1:5");
        let g: GridSpec = "0.5,2,-1".parse().unwrap();
        assert_eq!(g.points(), vec![0.5, 2.0, -1.0]);
        assert!("0:1:1".parse::<GridSpec>().is_err());
        assert!("1:0:3".parse::<GridSpec>().is_err());
        assert!("a:1:3".parse::<GridSpec>().is_err());
        assert!("1:2".parse::<GridSpec>().is_err());
    }

    #[test]
    fn env_seed_overrides_flag() {
        assert_eq!(effective_seed(7, None).unwrap(), 7);
        assert_eq!(effective_seed(7, Some("42")).unwrap(), 42);
        assert_eq!(effective_seed(7, Some("x")).unwrap_err().exit_code(), 1);
    }

    #[test]
    fn alpha_must_be_open_unit_interval() {
        assert!(check_alpha(0.05).is_ok());
        for a in [0.0, 1.0, 1.5, -0.1, f64::NAN] {
            assert!(check_alpha(a).is_err());
        }
    }
}
