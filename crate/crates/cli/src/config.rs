//! Option resolution: command-line flags override config-file values, which
//! override built-in defaults. The fully resolved configuration is echoed
//! into every emitted dataset so outputs are self-describing.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde_json::{json, Value};

use crate::AppError;

/// Environment variable naming the directory used when `--out` is absent.
pub const OUT_DIR_ENV: &str = "QNDSIM_OUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }

    pub fn name(self) -> &'static str {
        self.extension()
    }
}

/// The flags shared by every subcommand. All optional: anything not given
/// falls back to the config file, then to the built-in default.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct CommonOpts {
    /// Measurement resolution (width of the Gaussian measurement kernel)
    #[arg(long, allow_hyphen_values = true)]
    pub dx: Option<f64>,

    /// Measurement outcome to condition on
    #[arg(long = "x-m", allow_hyphen_values = true)]
    pub x_m: Option<f64>,

    /// Number-basis truncation dimension
    #[arg(long)]
    pub dim: Option<usize>,

    /// Monte Carlo trial count
    #[arg(long)]
    pub trials: Option<usize>,

    /// Random-number-generator seed
    #[arg(long)]
    pub seed: Option<u64>,

    /// Detector efficiency, in (0, 1]
    #[arg(long, allow_hyphen_values = true)]
    pub eta: Option<f64>,

    /// Detector noise scale, in (0, 1]
    #[arg(long, allow_hyphen_values = true)]
    pub xi: Option<f64>,

    /// Half-width of the outcome grid
    #[arg(long = "grid-span", allow_hyphen_values = true)]
    pub grid_span: Option<f64>,

    /// Spacing of the outcome grid
    #[arg(long = "grid-step", allow_hyphen_values = true)]
    pub grid_step: Option<f64>,

    /// Output file path (default: <out dir>/<command>.<format>)
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Output format
    #[arg(long, value_enum)]
    pub format: Option<Format>,

    /// Flat key-value JSON file supplying defaults for the flags above
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Fully resolved, validated run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: &'static str,
    pub dx: f64,
    pub x_m: f64,
    pub dim: usize,
    pub trials: usize,
    pub seed: u64,
    pub eta: f64,
    pub xi: f64,
    pub grid_span: f64,
    pub grid_step: f64,
    pub format: Format,
    pub out: PathBuf,
    /// True when `out` came from the default-directory rule rather than an
    /// explicit `--out`/config value; only then is the directory created.
    pub out_is_default: bool,
}

/// Typed view of one config-file entry.
struct FileValues(BTreeMap<String, Value>);

impl FileValues {
    fn empty() -> Self {
        FileValues(BTreeMap::new())
    }

    fn load(path: &PathBuf) -> Result<Self, AppError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            AppError::Validation(format!("cannot read config file {}: {e}", path.display()))
        })?;
        let map: BTreeMap<String, Value> = serde_json::from_str(&text).map_err(|e| {
            AppError::Validation(format!(
                "config file {} is not a flat JSON object: {e}",
                path.display()
            ))
        })?;
        const KNOWN: &[&str] = &[
            "dx", "x_m", "dim", "trials", "seed", "eta", "xi", "grid_span", "grid_step", "out",
            "format",
        ];
        for key in map.keys() {
            if !KNOWN.contains(&key.as_str()) {
                return Err(AppError::Validation(format!(
                    "unknown config key `{key}` (known keys: {})",
                    KNOWN.join(", ")
                )));
            }
        }
        Ok(FileValues(map))
    }

    fn real(&self, key: &str) -> Result<Option<f64>, AppError> {
        match self.0.get(key) {
            None => Ok(None),
            Some(v) => v.as_f64().map(Some).ok_or_else(|| {
                AppError::Validation(format!("config key `{key}` must be a number"))
            }),
        }
    }

    fn integer(&self, key: &str) -> Result<Option<u64>, AppError> {
        match self.0.get(key) {
            None => Ok(None),
            Some(v) => v.as_u64().map(Some).ok_or_else(|| {
                AppError::Validation(format!("config key `{key}` must be a nonnegative integer"))
            }),
        }
    }

    fn text(&self, key: &str) -> Result<Option<&str>, AppError> {
        match self.0.get(key) {
            None => Ok(None),
            Some(v) => v.as_str().map(Some).ok_or_else(|| {
                AppError::Validation(format!("config key `{key}` must be a string"))
            }),
        }
    }
}

fn require(cond: bool, message: String) -> Result<(), AppError> {
    if cond {
        Ok(())
    } else {
        Err(AppError::Validation(message))
    }
}

/// Merge flags, config file, and defaults into a validated [`RunConfig`].
pub fn resolve(command: &'static str, opts: &CommonOpts) -> Result<RunConfig, AppError> {
    let file = match &opts.config {
        Some(path) => FileValues::load(path)?,
        None => FileValues::empty(),
    };

    let dx = opts.dx.or(file.real("dx")?).unwrap_or(1.0);
    let x_m = opts.x_m.or(file.real("x_m")?).unwrap_or(-0.5);
    let dim = opts
        .dim
        .or(file.integer("dim")?.map(|v| v as usize))
        .unwrap_or(32);
    let trials = opts
        .trials
        .or(file.integer("trials")?.map(|v| v as usize))
        .unwrap_or(100_000);
    let seed = opts.seed.or(file.integer("seed")?).unwrap_or(1);
    let eta = opts.eta.or(file.real("eta")?).unwrap_or(1.0);
    let xi = opts.xi.or(file.real("xi")?).unwrap_or(1.0);
    let grid_span = opts.grid_span.or(file.real("grid_span")?).unwrap_or(4.0);
    let grid_step = opts.grid_step.or(file.real("grid_step")?).unwrap_or(0.05);
    let format = opts
        .format
        .or(match file.text("format")? {
            None => None,
            Some("csv") => Some(Format::Csv),
            Some("json") => Some(Format::Json),
            Some(other) => {
                return Err(AppError::Validation(format!(
                    "config key `format` must be \"csv\" or \"json\", got \"{other}\""
                )))
            }
        })
        .unwrap_or(Format::Csv);

    require(dx.is_finite() && dx > 0.0, format!("dx = {dx}: must be a positive real"))?;
    require(x_m.is_finite(), format!("x_m = {x_m}: must be finite"))?;
    require(dim >= 2, format!("dim = {dim}: must be at least 2"))?;
    require(trials >= 1, format!("trials = {trials}: must be positive"))?;
    require(
        eta.is_finite() && eta > 0.0 && eta <= 1.0,
        format!("eta = {eta}: must lie in (0, 1]"),
    )?;
    require(
        xi.is_finite() && xi > 0.0 && xi <= 1.0,
        format!("xi = {xi}: must lie in (0, 1]"),
    )?;
    require(
        grid_span.is_finite() && grid_span > 0.0,
        format!("grid_span = {grid_span}: must be a positive real"),
    )?;
    require(
        grid_step.is_finite() && grid_step > 0.0 && grid_step <= grid_span,
        format!("grid_step = {grid_step}: must lie in (0, grid_span]"),
    )?;

    let explicit_out = opts
        .out
        .clone()
        .or(file.text("out")?.map(PathBuf::from));
    let (out, out_is_default) = match explicit_out {
        Some(path) => (path, false),
        None => {
            let dir = std::env::var_os(OUT_DIR_ENV)
                .map(PathBuf::from)
                .unwrap_or_else(|| PathBuf::from("."));
            (dir.join(format!("{command}.{}", format.extension())), true)
        }
    };

    Ok(RunConfig {
        command,
        dx,
        x_m,
        dim,
        trials,
        seed,
        eta,
        xi,
        grid_span,
        grid_step,
        format,
        out,
        out_is_default,
    })
}

impl RunConfig {
    /// The effective configuration as echoed into dataset metadata.
    pub fn echo(&self) -> Value {
        json!({
            "dx": self.dx,
            "x_m": self.x_m,
            "dim": self.dim,
            "trials": self.trials,
            "seed": self.seed,
            "eta": self.eta,
            "xi": self.xi,
            "grid_span": self.grid_span,
            "grid_step": self.grid_step,
            "format": self.format.name(),
            "out": self.out.display().to_string(),
        })
    }
}
