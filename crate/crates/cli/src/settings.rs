//! Flags and the optional TOML file behind them. Flags win over the file.

use std::fs;
use std::path::PathBuf;

use anyhow::Context;
use clap::Args;
use onebit_mimo::EstimateMode;
use serde::Deserialize;

use crate::UsageError;

#[derive(Args, Debug, Clone, Default)]
pub struct Flags {
    /// Antenna counts, comma separated
    #[arg(long, value_delimiter = ',')]
    pub m: Option<Vec<usize>>,
    /// Number of users
    #[arg(long)]
    pub k: Option<usize>,
    /// Training SNR in dB
    #[arg(long, allow_hyphen_values = true)]
    pub rho_p_db: Option<f64>,
    /// Transmit power(s) in dB, comma separated
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub pt_db: Option<Vec<f64>>,
    /// Monte-Carlo trials per grid point
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Channel estimate generation: simulated or gaussian
    #[arg(long)]
    pub mode: Option<String>,
    /// CSV destination; stdout when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Flat TOML file using the flag names as keys
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Worker threads (output does not depend on it)
    #[arg(long)]
    pub threads: Option<usize>,
    /// Scaled transmit energy E_t in dB (power-scaling)
    #[arg(long, allow_hyphen_values = true)]
    pub et_db: Option<f64>,
    /// Scaled training energy E_u in dB (power-scaling)
    #[arg(long, allow_hyphen_values = true)]
    pub eu_db: Option<f64>,
    /// Sum-rate targets, comma separated
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub target_sum: Option<Vec<f64>>,
    /// Per-user rate targets, comma separated
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub target_per_user: Option<Vec<f64>>,
}

#[derive(Deserialize, Debug, Clone)]
#[serde(untagged)]
enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T> From<OneOrMany<T>> for Vec<T> {
    fn from(v: OneOrMany<T>) -> Self {
        match v {
            OneOrMany::One(x) => vec![x],
            OneOrMany::Many(xs) => xs,
        }
    }
}

#[derive(Deserialize, Debug, Default)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct FileConfig {
    m: Option<OneOrMany<usize>>,
    k: Option<usize>,
    rho_p_db: Option<f64>,
    pt_db: Option<OneOrMany<f64>>,
    trials: Option<usize>,
    seed: Option<u64>,
    mode: Option<String>,
    out: Option<PathBuf>,
    threads: Option<usize>,
    et_db: Option<f64>,
    eu_db: Option<f64>,
    target_sum: Option<OneOrMany<f64>>,
    target_per_user: Option<OneOrMany<f64>>,
}

/// Flags merged with the config file, still unresolved against defaults.
#[derive(Debug, Clone)]
pub struct Settings {
    pub m: Option<Vec<usize>>,
    pub k: usize,
    pub rho_p_db: f64,
    pub pt_db: Option<Vec<f64>>,
    pub trials: Option<usize>,
    pub seed: u64,
    pub mode: EstimateMode,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    pub et_db: f64,
    pub eu_db: f64,
    pub target_sum: Option<Vec<f64>>,
    pub target_per_user: Option<Vec<f64>>,
}

impl Settings {
    pub fn resolve(flags: Flags) -> anyhow::Result<Self> {
        let file = match &flags.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .with_context(|| format!("cannot read config file {}", path.display()))
                    .map_err(|e| UsageError(format!("{e:#}")))?;
                toml::from_str::<FileConfig>(&text)
                    .map_err(|e| UsageError(format!("invalid config file {}: {e}", path.display())))?
            }
            None => FileConfig::default(),
        };
        let mode_text = flags.mode.or(file.mode).unwrap_or_else(|| "simulated".into());
        let mode = mode_text.parse().map_err(|e| UsageError(format!("{e}")))?;
        let settings = Self {
            m: flags.m.or(file.m.map(Into::into)),
            k: flags.k.or(file.k).unwrap_or(10),
            rho_p_db: flags.rho_p_db.or(file.rho_p_db).unwrap_or(10.0),
            pt_db: flags.pt_db.or(file.pt_db.map(Into::into)),
            trials: flags.trials.or(file.trials),
            seed: flags.seed.or(file.seed).unwrap_or(1),
            mode,
            out: flags.out.or(file.out),
            threads: flags.threads.or(file.threads),
            et_db: flags.et_db.or(file.et_db).unwrap_or(10.0),
            eu_db: flags.eu_db.or(file.eu_db).unwrap_or(10.0),
            target_sum: flags.target_sum.or(file.target_sum.map(Into::into)),
            target_per_user: flags.target_per_user.or(file.target_per_user.map(Into::into)),
        };
        if settings.threads == Some(0) {
            return Err(UsageError("--threads must be at least 1".into()).into());
        }
        Ok(settings)
    }

    /// The single value of a list flag, for subcommands that take one point.
    pub fn single<T: Copy>(values: &Option<Vec<T>>, name: &str, default: T) -> anyhow::Result<T> {
        match values.as_deref() {
            None => Ok(default),
            Some([v]) => Ok(*v),
            Some(_) => Err(UsageError(format!("--{name} takes a single value here")).into()),
        }
    }
}
