//! Run configuration: defaults, then a flat `key = value` file, then flags.

use std::path::{Path, PathBuf};

use clap::error::{ContextKind, ContextValue, ErrorKind};
use clap::{Args, Parser, Subcommand};
use lmg_otto::phase_space::QuadratureGrid;
use lmg_otto::{CouplingPair, EngineParams, ScalingMode, SpinSector};
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::presets::FigurePreset;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("unknown flag or key `{0}`")]
    UnknownFlag(String),
    #[error("malformed value `{value}` for `{key}`")]
    MalformedValue { key: String, value: String },
    #[error("conflicting modes: `{0}`")]
    ConflictingModes(String),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Invalid(#[from] lmg_otto::Error),
    #[error("cannot read config file {path}: {message}")]
    Io { path: PathBuf, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

impl Format {
    pub const ALL: [Format; 3] = [Format::Csv, Format::Json, Format::Svg];

    pub fn as_str(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Svg => "svg",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    Cycle,
    Sweep,
    Interference,
    Geometry,
    Squeezed,
    Figure(FigurePreset),
}

impl Command {
    pub fn name(&self) -> String {
        match self {
            Command::Cycle => "cycle".into(),
            Command::Sweep => "sweep".into(),
            Command::Interference => "interference".into(),
            Command::Geometry => "geometry".into(),
            Command::Squeezed => "squeezed".into(),
            Command::Figure(p) => format!("figure {}", p.id()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub params: EngineParams,
    pub modes: Vec<ScalingMode>,
    pub n_from: u32,
    pub n_to: u32,
    pub twice_s: u32,
    pub n_list: Vec<u32>,
    pub out_dir: PathBuf,
    pub formats: Vec<Format>,
    pub grid: QuadratureGrid,
    /// Reserved; every production path is deterministic.
    pub seed: u64,
    pub squeeze_r: f64,
    pub k_max: usize,
}

impl RunConfig {
    pub fn defaults(command: Command) -> Self {
        Self {
            command,
            params: EngineParams::default(),
            modes: ScalingMode::ALL.to_vec(),
            n_from: 1,
            n_to: 60,
            twice_s: 16,
            n_list: vec![2, 4, 6, 8],
            out_dir: PathBuf::from("out"),
            formats: Format::ALL.to_vec(),
            grid: QuadratureGrid::PRODUCTION,
            seed: 0,
            squeeze_r: 1.0,
            k_max: 100,
        }
    }

    pub fn sector(&self) -> Result<SpinSector, lmg_otto::Error> {
        SpinSector::new(self.twice_s as i64)
    }

    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }

    /// Every effective setting, echoed into output headers.
    pub fn meta(&self) -> Map<String, Value> {
        let p = &self.params;
        let mut m = Map::new();
        m.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
        m.insert("command".into(), json!(self.command.name()));
        m.insert("gamma_x_high".into(), json!(p.hot.gamma_x));
        m.insert("gamma_y_high".into(), json!(p.hot.gamma_y));
        m.insert("gamma_x_low".into(), json!(p.cold.gamma_x));
        m.insert("gamma_y_low".into(), json!(p.cold.gamma_y));
        m.insert("t_high".into(), json!(p.t_hot));
        m.insert("t_low".into(), json!(p.t_cold));
        let modes: Vec<&str> = self.modes.iter().map(|m| m.as_str()).collect();
        m.insert("modes".into(), json!(modes.join(",")));
        m.insert("n_from".into(), json!(self.n_from));
        m.insert("n_to".into(), json!(self.n_to));
        m.insert("twice_s".into(), json!(self.twice_s));
        let list: Vec<String> = self.n_list.iter().map(|n| n.to_string()).collect();
        m.insert("n_list".into(), json!(list.join(",")));
        m.insert("quad_theta".into(), json!(self.grid.n_theta));
        m.insert("quad_phi".into(), json!(self.grid.n_phi));
        m.insert("seed".into(), json!(self.seed));
        m.insert("squeeze_r".into(), json!(self.squeeze_r));
        m.insert("k_max".into(), json!(self.k_max));
        m
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "lmg-otto",
    version,
    about = "Quantum Otto engine with an LMG spin working medium"
)]
struct Cli {
    #[command(subcommand)]
    command: CliCommand,
    #[command(flatten)]
    opts: Overrides,
}

#[derive(Debug, Subcommand)]
enum CliCommand {
    /// One engine cycle at the sector given by --twice-s.
    Cycle,
    /// Exact and perturbative results over a range of N.
    Sweep,
    /// Baseline and sign-flip isolation of the interference work.
    Interference,
    /// Band-geometry and transition tables for one sector.
    Geometry,
    /// Photon-number distribution of a squeezed vacuum.
    Squeezed,
    /// Reproduce the data behind one figure.
    Figure { preset: String },
}

#[derive(Debug, Args, Default)]
struct Overrides {
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    gamma_x_high: Option<String>,
    #[arg(long, global = true)]
    gamma_y_high: Option<String>,
    #[arg(long, global = true)]
    gamma_x_low: Option<String>,
    #[arg(long, global = true)]
    gamma_y_low: Option<String>,
    #[arg(long, global = true)]
    t_high: Option<String>,
    #[arg(long, global = true)]
    t_low: Option<String>,
    /// extensive, nonextensive or both; may be repeated.
    #[arg(long, global = true)]
    mode: Vec<String>,
    #[arg(long, global = true)]
    n_from: Option<String>,
    #[arg(long, global = true)]
    n_to: Option<String>,
    #[arg(long, global = true)]
    twice_s: Option<String>,
    /// Comma-separated N values.
    #[arg(long, global = true)]
    n_list: Option<String>,
    #[arg(long, global = true)]
    out_dir: Option<String>,
    /// Comma-separated subset of csv,json,svg; may be repeated.
    #[arg(long, global = true)]
    format: Vec<String>,
    #[arg(long, global = true)]
    quad_theta: Option<String>,
    #[arg(long, global = true)]
    quad_phi: Option<String>,
    #[arg(long, global = true)]
    seed: Option<String>,
    #[arg(long, global = true)]
    squeeze_r: Option<String>,
    #[arg(long, global = true)]
    k_max: Option<String>,
}

impl Overrides {
    fn pairs(&self) -> Vec<(&'static str, String)> {
        let mut out = Vec::new();
        let mut push = |k: &'static str, v: &Option<String>| {
            if let Some(v) = v {
                out.push((k, v.clone()));
            }
        };
        push("gamma-x-high", &self.gamma_x_high);
        push("gamma-y-high", &self.gamma_y_high);
        push("gamma-x-low", &self.gamma_x_low);
        push("gamma-y-low", &self.gamma_y_low);
        push("t-high", &self.t_high);
        push("t-low", &self.t_low);
        push("n-from", &self.n_from);
        push("n-to", &self.n_to);
        push("twice-s", &self.twice_s);
        push("n-list", &self.n_list);
        push("out-dir", &self.out_dir);
        push("quad-theta", &self.quad_theta);
        push("quad-phi", &self.quad_phi);
        push("seed", &self.seed);
        push("squeeze-r", &self.squeeze_r);
        push("k-max", &self.k_max);
        for m in &self.mode {
            out.push(("mode", m.clone()));
        }
        for f in &self.format {
            out.push(("format", f.clone()));
        }
        out
    }
}

fn malformed(key: &str, value: &str) -> ConfigError {
    ConfigError::MalformedValue {
        key: key.to_string(),
        value: value.to_string(),
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    value.trim().parse().map_err(|_| malformed(key, value))
}

fn parse_modes(key: &str, value: &str) -> Result<Vec<ScalingMode>, ConfigError> {
    match value.trim() {
        "both" => Ok(ScalingMode::ALL.to_vec()),
        v => v
            .parse::<ScalingMode>()
            .map(|m| vec![m])
            .map_err(|_| malformed(key, value)),
    }
}

fn parse_formats(key: &str, value: &str) -> Result<Vec<Format>, ConfigError> {
    value
        .split(',')
        .map(|f| match f.trim() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "svg" => Ok(Format::Svg),
            _ => Err(malformed(key, value)),
        })
        .collect()
}

/// Applies one layer of settings. Repeated `mode` values within a layer must
/// agree; `format` values accumulate.
fn apply(cfg: &mut RunConfig, pairs: &[(&str, String)]) -> Result<(), ConfigError> {
    let mut modes: Option<(Vec<ScalingMode>, String)> = None;
    let mut formats: Vec<Format> = Vec::new();
    for (key, value) in pairs {
        let key = *key;
        let v = value.as_str();
        match key {
            "gamma-x-high" => cfg.params.hot.gamma_x = parse_num(key, v)?,
            "gamma-y-high" => cfg.params.hot.gamma_y = parse_num(key, v)?,
            "gamma-x-low" => cfg.params.cold.gamma_x = parse_num(key, v)?,
            "gamma-y-low" => cfg.params.cold.gamma_y = parse_num(key, v)?,
            "t-high" => cfg.params.t_hot = parse_num(key, v)?,
            "t-low" => cfg.params.t_cold = parse_num(key, v)?,
            "n-from" => cfg.n_from = parse_num(key, v)?,
            "n-to" => cfg.n_to = parse_num(key, v)?,
            "twice-s" => {
                let t: i64 = parse_num(key, v)?;
                cfg.twice_s = SpinSector::new(t)?.twice_s();
            }
            "n-list" => {
                cfg.n_list = v
                    .split(',')
                    .map(|x| parse_num(key, x))
                    .collect::<Result<_, _>>()?;
            }
            "out-dir" => cfg.out_dir = PathBuf::from(v.trim()),
            "quad-theta" => cfg.grid.n_theta = parse_num(key, v)?,
            "quad-phi" => cfg.grid.n_phi = parse_num(key, v)?,
            "seed" => cfg.seed = parse_num(key, v)?,
            "squeeze-r" => cfg.squeeze_r = parse_num(key, v)?,
            "k-max" => cfg.k_max = parse_num(key, v)?,
            "mode" => {
                let m = parse_modes(key, v)?;
                if let Some((prev, prev_raw)) = &modes {
                    if *prev != m {
                        return Err(ConfigError::ConflictingModes(format!("{prev_raw} vs {v}")));
                    }
                }
                modes = Some((m, v.to_string()));
            }
            "format" => {
                for f in parse_formats(key, v)? {
                    if !formats.contains(&f) {
                        formats.push(f);
                    }
                }
            }
            other => return Err(ConfigError::UnknownFlag(other.to_string())),
        }
    }
    if let Some((m, _)) = modes {
        cfg.modes = m;
    }
    if !formats.is_empty() {
        cfg.formats = formats;
    }
    Ok(())
}

/// Parses `key = value` lines; `#` starts a comment. Keys may use `-` or `_`.
pub fn parse_config_text(text: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let mut out = Vec::new();
    for line in text.lines() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| malformed(line, ""))?;
        out.push((k.trim().replace('_', "-"), v.trim().to_string()));
    }
    Ok(out)
}

const KEYS: [&str; 18] = [
    "gamma-x-high",
    "gamma-y-high",
    "gamma-x-low",
    "gamma-y-low",
    "t-high",
    "t-low",
    "n-from",
    "n-to",
    "twice-s",
    "n-list",
    "out-dir",
    "quad-theta",
    "quad-phi",
    "seed",
    "squeeze-r",
    "k-max",
    "mode",
    "format",
];

fn read_config_file(path: &Path) -> Result<Vec<(&'static str, String)>, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    parse_config_text(&text)?
        .into_iter()
        .map(|(k, v)| match KEYS.iter().find(|&&known| known == k) {
            Some(known) => Ok((*known, v)),
            None => Err(ConfigError::UnknownFlag(k)),
        })
        .collect()
}

fn from_clap(e: clap::Error) -> ConfigError {
    let context = |kind| match e.get(kind) {
        Some(ContextValue::String(s)) => s.clone(),
        Some(other) => other.to_string(),
        None => String::new(),
    };
    match e.kind() {
        ErrorKind::UnknownArgument => ConfigError::UnknownFlag(context(ContextKind::InvalidArg)),
        ErrorKind::InvalidValue | ErrorKind::ValueValidation => ConfigError::MalformedValue {
            key: context(ContextKind::InvalidArg),
            value: context(ContextKind::InvalidValue),
        },
        _ => ConfigError::Usage(e.render().to_string()),
    }
}

/// Defaults, overridden by the config file, overridden by flags.
/// `--help` and `--version` come back as the clap error for the caller to print.
pub fn parse_config<I, T>(argv: I) -> Result<RunConfig, Result<ConfigError, clap::Error>>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| match e.kind() {
        ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => Err(e),
        _ => Ok(from_clap(e)),
    })?;
    let command = match &cli.command {
        CliCommand::Cycle => Command::Cycle,
        CliCommand::Sweep => Command::Sweep,
        CliCommand::Interference => Command::Interference,
        CliCommand::Geometry => Command::Geometry,
        CliCommand::Squeezed => Command::Squeezed,
        CliCommand::Figure { preset } => Command::Figure(
            preset
                .parse()
                .map_err(|_| Ok(malformed("preset", preset)))?,
        ),
    };
    build(command, cli.opts.config.as_deref(), &cli.opts.pairs()).map_err(Ok)
}

fn build(
    command: Command,
    file: Option<&Path>,
    flags: &[(&'static str, String)],
) -> Result<RunConfig, ConfigError> {
    let mut cfg = RunConfig::defaults(command);
    if let Some(path) = file {
        apply(&mut cfg, &read_config_file(path)?)?;
    }
    apply(&mut cfg, flags)?;
    validate(&cfg)?;
    Ok(cfg)
}

fn validate(cfg: &RunConfig) -> Result<(), ConfigError> {
    let p = &cfg.params;
    CouplingPair::new(p.hot.gamma_x, p.hot.gamma_y)?;
    CouplingPair::new(p.cold.gamma_x, p.cold.gamma_y)?;
    p.validate()?;
    if cfg.n_from < 1 || cfg.n_from > cfg.n_to || cfg.n_to > lmg_otto::sweep::MAX_SWEEP_N {
        return Err(ConfigError::Usage(format!(
            "N range {}..={} must satisfy 1 <= n-from <= n-to <= {}",
            cfg.n_from,
            cfg.n_to,
            lmg_otto::sweep::MAX_SWEEP_N
        )));
    }
    if cfg.n_list.is_empty() || cfg.n_list.iter().any(|&n| n < 1) {
        return Err(malformed("n-list", "0"));
    }
    if cfg.grid.n_theta < 2 || cfg.grid.n_phi < 4 {
        return Err(ConfigError::Usage(format!(
            "quadrature grid {}x{} is too coarse",
            cfg.grid.n_theta, cfg.grid.n_phi
        )));
    }
    Ok(())
}
