//! Run configuration: defaults, a flat TOML file and command-line overrides.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use serde::{Deserialize, Serialize};
use thiserror::Error;
use twistcheck_core::clifford::Signature;
use twistcheck_core::geometry::MetricField;

pub const CONFIG_ENV: &str = "TWISTCHECK_CONFIG";

/// Tolerance classes and their default bounds.
pub const TOLERANCE_CLASSES: [(&str, f64); 6] = [
    ("construction", 1e-12),
    ("compound", 1e-11),
    ("amplified", 1e-10),
    ("involution", 1e-13),
    ("fd", 1e-5),
    ("dirac", 1e-4),
];

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("signature ({0},{1}) is not even-dimensional with p+q >= 2")]
    Signature(usize, usize),
    #[error("fd step {0} is outside (1e-6, 1e-1)")]
    FdStep(f64),
    #[error("unknown tolerance class `{0}` (known: all, construction, compound, amplified, involution, fd, dirac)")]
    UnknownTolClass(String),
    #[error("tolerance for `{0}` must be a finite nonnegative number, got {1}")]
    BadTolerance(String, f64),
    #[error("expected KEY=VALUE, got `{0}`")]
    Assignment(String),
    #[error("metric: {0}")]
    Metric(String),
    #[error("cannot read config {path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("cannot parse config {path}: {message}")]
    Parse { path: PathBuf, message: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Clifford,
    Krein,
    Morphism,
    Geometry,
    Product,
    Emergence,
    All,
}

impl Suite {
    pub const ORDER: [Suite; 6] =
        [Suite::Clifford, Suite::Krein, Suite::Morphism, Suite::Geometry, Suite::Product, Suite::Emergence];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Clifford => "clifford",
            Suite::Krein => "krein",
            Suite::Morphism => "morphism",
            Suite::Geometry => "geometry",
            Suite::Product => "product",
            Suite::Emergence => "emergence",
            Suite::All => "all",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Text,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub suites: Vec<Suite>,
    pub signatures: Vec<[usize; 2]>,
    pub metric: String,
    pub params: BTreeMap<String, f64>,
    pub fd_step: f64,
    pub seed: u64,
    pub tolerances: BTreeMap<String, f64>,
    pub format: Format,
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            suites: vec![Suite::All],
            signatures: Signature::all_up_to(6).iter().map(|s| [s.p(), s.q()]).collect(),
            metric: "lorentz_wave".into(),
            params: BTreeMap::new(),
            fd_step: 1e-3,
            seed: 7,
            tolerances: TOLERANCE_CLASSES.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            format: Format::Text,
            out: None,
        }
    }
}

impl SuiteConfig {
    /// Selected suites in declared order, with `all` expanded.
    pub fn expanded_suites(&self) -> Vec<Suite> {
        let all = self.suites.contains(&Suite::All);
        Suite::ORDER.into_iter().filter(|s| all || self.suites.contains(s)).collect()
    }

    pub fn tol(&self, class: &str) -> f64 {
        self.tolerances[class]
    }

    pub fn signatures(&self) -> Vec<Signature> {
        self.signatures.iter().map(|[p, q]| Signature::new(*p, *q).expect("validated")).collect()
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        for [p, q] in &self.signatures {
            Signature::new(*p, *q).map_err(|_| ConfigError::Signature(*p, *q))?;
        }
        if !(self.fd_step > 1e-6 && self.fd_step < 1e-1) {
            return Err(ConfigError::FdStep(self.fd_step));
        }
        for (class, v) in &self.tolerances {
            if !TOLERANCE_CLASSES.iter().any(|(k, _)| k == class) {
                return Err(ConfigError::UnknownTolClass(class.clone()));
            }
            if !v.is_finite() || *v < 0.0 {
                return Err(ConfigError::BadTolerance(class.clone(), *v));
            }
        }
        MetricField::family(&self.metric, &self.params).map_err(|e| ConfigError::Metric(e.to_string()))?;
        Ok(())
    }

    fn set_tolerance(&mut self, class: &str, value: f64) -> Result<(), ConfigError> {
        if class == "all" {
            for v in self.tolerances.values_mut() {
                *v = value;
            }
        } else if self.tolerances.contains_key(class) {
            self.tolerances.insert(class.to_string(), value);
        } else {
            return Err(ConfigError::UnknownTolClass(class.to_string()));
        }
        Ok(())
    }
}

/// Config file schema; every key is optional.
///
/// ```toml
/// suites = ["clifford", "geometry"]
/// signatures = [[1, 3], [2, 2]]
/// metric = "conformal"
/// param.a = 0.05
/// fd_step = 1e-3
/// seed = 7
/// tol.fd = 1e-6
/// format = "json"
/// out = "report.json"
/// ```
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    suites: Option<Vec<Suite>>,
    signatures: Option<Vec<[usize; 2]>>,
    metric: Option<String>,
    param: Option<BTreeMap<String, f64>>,
    fd_step: Option<f64>,
    seed: Option<u64>,
    tol: Option<BTreeMap<String, f64>>,
    format: Option<Format>,
    out: Option<PathBuf>,
}

#[derive(Debug, Parser)]
#[command(name = "verify", version, about = "Run residual checks of twisted and pseudo-Riemannian spectral triples")]
pub struct Cli {
    /// Suites to run, in any order; `all` selects every suite
    #[arg(long = "suite", value_enum, num_args = 1..)]
    pub suites: Vec<Suite>,
    /// Signature to test; repeat for several
    #[arg(long = "signature", num_args = 2, value_names = ["P", "Q"])]
    pub signatures: Vec<usize>,
    /// Metric family for the geometry suite
    #[arg(long)]
    pub metric: Option<String>,
    /// Metric family parameter
    #[arg(long = "param", value_name = "K=V")]
    pub params: Vec<String>,
    /// Finite-difference step
    #[arg(long)]
    pub fd_step: Option<f64>,
    /// Seed for every sampled quantity
    #[arg(long)]
    pub seed: Option<u64>,
    /// Tolerance override; CLASS may be `all`
    #[arg(long = "tol", value_name = "CLASS=EPS")]
    pub tolerances: Vec<String>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write the report here instead of standard output
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Config file; defaults to the path in TWISTCHECK_CONFIG
    #[arg(long)]
    pub config: Option<PathBuf>,
}

fn assignment(s: &str) -> Result<(String, f64), ConfigError> {
    let (k, v) = s.split_once('=').ok_or_else(|| ConfigError::Assignment(s.to_string()))?;
    let v: f64 = v.trim().parse().map_err(|_| ConfigError::Assignment(s.to_string()))?;
    Ok((k.trim().to_string(), v))
}

fn load_file(path: &Path) -> Result<FileConfig, ConfigError> {
    let text = fs::read_to_string(path).map_err(|e| ConfigError::Io { path: path.into(), message: e.to_string() })?;
    toml::from_str(&text).map_err(|e| ConfigError::Parse { path: path.into(), message: e.to_string() })
}

/// Defaults, then the config file (explicit or from the environment), then flags.
pub fn resolve(cli: Cli, env_config: Option<PathBuf>) -> Result<SuiteConfig, ConfigError> {
    let mut cfg = SuiteConfig::default();
    if let Some(path) = cli.config.or(env_config) {
        let file = load_file(&path)?;
        if let Some(s) = file.suites {
            cfg.suites = s;
        }
        if let Some(s) = file.signatures {
            cfg.signatures = s;
        }
        if let Some(m) = file.metric {
            cfg.metric = m;
        }
        cfg.params.extend(file.param.unwrap_or_default());
        if let Some(h) = file.fd_step {
            cfg.fd_step = h;
        }
        if let Some(s) = file.seed {
            cfg.seed = s;
        }
        for (k, v) in file.tol.unwrap_or_default() {
            cfg.set_tolerance(&k, v)?;
        }
        if let Some(f) = file.format {
            cfg.format = f;
        }
        cfg.out = file.out;
    }
    if !cli.suites.is_empty() {
        cfg.suites = cli.suites;
    }
    if !cli.signatures.is_empty() {
        cfg.signatures = cli.signatures.chunks(2).map(|c| [c[0], c[1]]).collect();
    }
    if let Some(m) = cli.metric {
        cfg.metric = m;
    }
    for p in &cli.params {
        let (k, v) = assignment(p)?;
        cfg.params.insert(k, v);
    }
    if let Some(h) = cli.fd_step {
        cfg.fd_step = h;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    for t in &cli.tolerances {
        let (k, v) = assignment(t)?;
        cfg.set_tolerance(&k, v)?;
    }
    if let Some(f) = cli.format {
        cfg.format = f;
    }
    if cli.out.is_some() {
        cfg.out = cli.out;
    }
    cfg.validate()?;
    Ok(cfg)
}
