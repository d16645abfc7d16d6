use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::CliError;

pub const OUT_DIR_ENV: &str = "LMG_OUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Every option any subcommand reads. Flags and the JSON config file share
/// these names; a flag given on the command line replaces the file value.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// JSON file with any of these options (snake_case keys)
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,

    /// Spin length J
    #[arg(long)]
    pub j: Option<f64>,
    /// Energy unit ε0
    #[arg(long)]
    pub epsilon0: Option<f64>,
    #[arg(long = "gx", alias = "gamma-x", allow_negative_numbers = true)]
    pub gamma_x: Option<f64>,
    /// Explicit γy (exclusive with --ratio)
    #[arg(long = "gy", alias = "gamma-y", allow_negative_numbers = true)]
    pub gamma_y: Option<f64>,
    /// γy/γx (exclusive with --gy)
    #[arg(long, allow_negative_numbers = true)]
    pub ratio: Option<f64>,

    #[arg(long, allow_negative_numbers = true)]
    pub gamma_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub gamma_max: Option<f64>,
    #[arg(long)]
    pub gamma_steps: Option<usize>,

    /// Crossing integers N (repeatable or comma separated)
    #[arg(long, value_delimiter = ',')]
    pub n: Option<Vec<u32>>,
    /// Also locate the gap minima near each prediction
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub locate: Option<bool>,

    /// Energy window in ε = E/(Jε0)
    #[arg(long, allow_negative_numbers = true)]
    pub energy_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub energy_max: Option<f64>,
    #[arg(long)]
    pub energy_steps: Option<usize>,

    /// Parity sector, +1 or -1
    #[arg(long, allow_negative_numbers = true)]
    pub parity: Option<i32>,
    /// 1-based level index within the sector (repeatable or comma separated)
    #[arg(long, value_delimiter = ',')]
    pub k: Option<Vec<usize>>,
    /// Husimi grid points per axis
    #[arg(long)]
    pub grid: Option<usize>,

    /// Quench scenario a-h
    #[arg(long)]
    pub scenario: Option<char>,
    /// Explicit initial coherent state
    #[arg(long, allow_negative_numbers = true)]
    pub q0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub p0: Option<f64>,
    /// Evolution time for the husimi subcommand
    #[arg(long)]
    pub time: Option<f64>,
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    /// Rolling-average window
    #[arg(long)]
    pub window: Option<f64>,

    /// Monte Carlo samples (Wehrl or TWA)
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Wehrl measure: normalized or raw
    #[arg(long)]
    pub convention: Option<String>,

    /// Output directory (default: $LMG_OUT_DIR, then the working directory)
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Output file stem (default: the subcommand name)
    #[arg(long)]
    pub output: Option<String>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

impl RunConfig {
    /// Config file values overlaid with the flags that were given.
    pub fn resolve(flags: RunConfig) -> Result<RunConfig, CliError> {
        let Some(path) = flags.config.clone() else {
            return Ok(flags);
        };
        let file = read_config(&path)?;
        let mut merged = to_object(&file)?;
        for (k, v) in to_object(&flags)? {
            if !v.is_null() {
                merged.insert(k, v);
            }
        }
        let mut out: RunConfig = serde_json::from_value(Value::Object(merged))
            .map_err(|e| CliError::config(format!("cannot merge options: {e}")))?;
        out.config = Some(path);
        Ok(out)
    }

    pub fn format(&self) -> Format {
        self.format.unwrap_or(Format::Csv)
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out_dir
            .clone()
            .or_else(|| std::env::var_os(OUT_DIR_ENV).filter(|v| !v.is_empty()).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("."))
    }
}

fn read_config(path: &Path) -> Result<RunConfig, CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
}

fn to_object(c: &RunConfig) -> Result<Map<String, Value>, CliError> {
    match serde_json::to_value(c) {
        Ok(Value::Object(m)) => Ok(m),
        _ => Err(CliError::config("options do not serialize to an object".into())),
    }
}
