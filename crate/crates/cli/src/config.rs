use std::path::{Path, PathBuf};
use std::str::FromStr;

use mscluster_core::{Dataset, GraphBuildParams, GraphMethod, LabelColumn, ScanParams, SelectionParams};
use serde::Serialize;

use crate::error::CliError;

/// Feature scaling applied before distances are computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Scaling {
    None,
    Zscore,
    /// z-score only when [`Dataset::feature_spread`] exceeds [`AUTO_SPREAD`].
    ///
    /// [`Dataset::feature_spread`]: mscluster_core::Dataset::feature_spread
    Auto,
}

pub const AUTO_SPREAD: f64 = 10.0;

impl Scaling {
    pub fn applies_to(self, ds: &Dataset) -> bool {
        match self {
            Scaling::None => false,
            Scaling::Zscore => true,
            Scaling::Auto => ds.feature_spread() > AUTO_SPREAD,
        }
    }
}

impl FromStr for Scaling {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "auto" => Ok(Scaling::Auto),
            "zscore" => Ok(Scaling::Zscore),
            "none" => Ok(Scaling::None),
            other => match parse_bool(other) {
                Some(true) => Ok(Scaling::Zscore),
                Some(false) => Ok(Scaling::None),
                None => Err(format!("unknown scaling {other:?}")),
            },
        }
    }
}

/// Everything needed to run the pipeline once.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub data: PathBuf,
    pub label_col: Option<LabelColumn>,
    pub standardize: Scaling,
    pub graph: GraphBuildParams,
    pub scan: ScanParams,
    pub selection: SelectionParams,
    pub c_target: Option<usize>,
    pub out: PathBuf,
    pub dump_bt: bool,
}

impl PipelineConfig {
    pub fn new(data: impl Into<PathBuf>, out: impl Into<PathBuf>) -> Self {
        PipelineConfig {
            data: data.into(),
            label_col: None,
            standardize: Scaling::None,
            graph: GraphBuildParams::default(),
            scan: ScanParams::default(),
            selection: SelectionParams::default(),
            c_target: None,
            out: out.into(),
            dump_bt: false,
        }
    }

    pub fn set_seed(&mut self, seed: u64) {
        self.scan.seed = seed;
        self.graph.seed = seed;
    }

    /// Range checks that do not need the data.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.data.as_os_str().is_empty() {
            return Err(CliError::Config("no data file given".into()));
        }
        self.scan.validate().map_err(|e| CliError::Config(e.to_string()))?;
        self.selection.resolve(2).map_err(|e| CliError::Config(e.to_string()))?;
        self.graph
            .validate(usize::MAX)
            .map_err(|e| CliError::Config(e.to_string()))?;
        if self.c_target == Some(0) {
            return Err(CliError::Config("c_target must be positive".into()));
        }
        Ok(())
    }

    /// Applies one `key = value` setting. Keys accept `-` or `_`.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let key = key.trim().replace('-', "_");
        let value = value.trim();
        let bad = |what: &str| CliError::Config(format!("invalid value {value:?} for {key}: expected {what}"));
        macro_rules! parse {
            ($what:expr) => {
                value.parse().map_err(|_| bad($what))?
            };
        }
        match key.as_str() {
            "data" => self.data = PathBuf::from(value),
            "out" => self.out = PathBuf::from(value),
            "label_col" => {
                self.label_col = if value.is_empty() || value == "none" {
                    None
                } else {
                    Some(value.parse().map_err(|_| bad("a column name or index"))?)
                }
            }
            "standardize" => self.standardize = parse!("true, false or auto"),
            "dump_bt" => self.dump_bt = parse_bool(value).ok_or_else(|| bad("a boolean"))?,
            "graph" => {
                let method: GraphMethod = value.parse().map_err(|_| bad("a graph method"))?;
                let keep = self.graph.clone();
                self.graph = GraphBuildParams::new(method);
                self.graph.seed = keep.seed;
            }
            "k" => self.graph.k = parse!("a positive integer"),
            "delta" => self.graph.delta = parse!("a number"),
            "gamma" => self.graph.gamma = parse!("a number"),
            "eps" => self.graph.eps = Some(parse!("a number")),
            "pmst_r" => self.graph.noise_ratio = parse!("a number"),
            "pmst_ensemble" => self.graph.ensemble_size = parse!("a positive integer"),
            "connect" => self.graph.connect = parse_bool(value).ok_or_else(|| bad("a boolean"))?,
            "seed" => self.set_seed(parse!("an unsigned integer")),
            "t_min" => self.scan.t_min = parse!("a number"),
            "t_max" => self.scan.t_max = parse!("a number"),
            "n_times" => self.scan.n_times = parse!("a positive integer"),
            "n_louvain" => self.scan.n_louvain = parse!("a positive integer"),
            "min_persistence" => self.selection.min_persistence = Some(parse!("a number")),
            "vi_block_thresh" => self.selection.block_vi = Some(parse!("a number")),
            "vi_dispersion_thresh" => self.selection.dispersion = Some(parse!("a number")),
            "c_target" => self.c_target = Some(parse!("a positive integer")),
            _ => return Err(CliError::Config(format!("unknown configuration key {key:?}"))),
        }
        Ok(())
    }

    /// Applies every setting of a flat `key = value` file. Blank lines and
    /// lines starting with `#` are skipped. `graph` is applied first so that
    /// method defaults never clobber explicit parameters.
    pub fn apply_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        let pairs = parse_key_values(&text)?;
        let (graph, rest): (Vec<_>, Vec<_>) = pairs.into_iter().partition(|(k, _)| k == "graph");
        for (k, v) in graph.iter().chain(&rest) {
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn echo(&self) -> ConfigEcho {
        ConfigEcho {
            data: self.data.display().to_string(),
            label_col: self.label_col.as_ref().map(label_col_string),
            standardize: self.standardize,
            graph: self.graph.clone(),
            scan: self.scan.clone(),
            selection: self.selection,
            c_target: self.c_target,
            dump_bt: self.dump_bt,
        }
    }
}

/// The configuration as recorded in the report. The output directory is left
/// out so that identical runs into different directories report identically.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfigEcho {
    pub data: String,
    pub label_col: Option<String>,
    pub standardize: Scaling,
    pub graph: GraphBuildParams,
    pub scan: ScanParams,
    pub selection: SelectionParams,
    pub c_target: Option<usize>,
    pub dump_bt: bool,
}

pub fn label_col_string(l: &LabelColumn) -> String {
    match l {
        LabelColumn::Name(s) => s.clone(),
        LabelColumn::Index(i) => i.to_string(),
        LabelColumn::Last => "last".into(),
    }
}

pub fn parse_bool(s: &str) -> Option<bool> {
    match s.trim().to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "on" => Some(true),
        "0" | "false" | "no" | "off" => Some(false),
        _ => None,
    }
}

/// Splits a flat config text into `(key, value)` pairs, normalising keys.
pub fn parse_key_values(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(CliError::Config(format!(
                "config line {}: expected key = value, got {line:?}",
                lineno + 1
            )));
        };
        out.push((k.trim().replace('-', "_"), v.trim().to_string()));
    }
    Ok(out)
}
