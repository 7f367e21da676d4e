//! Flat `key = value` run configuration.
//!
//! ```text
//! # comments run to the end of the line
//! preset = yaleb
//! dataset = data/faces
//! lambda1 = 0.001, 0.01     # lists are only accepted by gridsearch
//! ```
//!
//! Keys are case-insensitive and `-` is read as `_`. A preset is applied
//! first; every other key overrides it regardless of order.

use std::collections::BTreeMap;
use std::path::PathBuf;

use crate::dataio::SplitSpec;
use crate::error::{Error, Result};
use crate::model::{Hyperparams, SampleMode};
use crate::patching::ConvGeometry;
use crate::presets;

/// Unvalidated key/value pairs, in the order later sources override earlier.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    entries: BTreeMap<String, String>,
}

fn normalize_key(key: &str) -> String {
    key.trim().to_ascii_lowercase().replace('-', "_")
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut raw = RawConfig::default();
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value, got {line:?}", no + 1)))?;
            let key = normalize_key(key);
            if key.is_empty() {
                return Err(Error::Config(format!("line {}: missing key", no + 1)));
            }
            if raw.entries.contains_key(&key) {
                return Err(Error::Config(format!("line {}: duplicate key {key:?}", no + 1)));
            }
            raw.entries.insert(key, value.trim().to_string());
        }
        Ok(raw)
    }

    /// Sets or replaces a value, as command-line overrides do.
    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.entries.insert(normalize_key(key), value.into());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(&normalize_key(key)).map(String::as_str)
    }
}

/// Which part of the split `eval` scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalOn {
    Test,
    Train,
    All,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub preset: Option<&'static str>,
    pub dataset: Option<PathBuf>,
    /// `None` infers image mode for directories and feature mode for files.
    pub mode: Option<SampleMode>,
    pub input_rows: Option<usize>,
    pub input_cols: Option<usize>,
    pub atom_rows: usize,
    pub atom_cols: usize,
    pub stride_rows: usize,
    pub stride_cols: usize,
    pub atoms: usize,
    pub hyperparams: Hyperparams,
    pub seed: u64,
    pub split: SplitSpec,
    pub threshold_at_test: bool,
    pub out: Option<PathBuf>,
    pub model: Option<PathBuf>,
    /// Objective trace CSV written by `train`.
    pub trace: Option<PathBuf>,
    pub folds: usize,
    pub repetitions: usize,
    pub grid_cap: usize,
    pub eval_on: EvalOn,
}

/// Candidate values per hyperparameter for grid search.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub lambda1: Vec<f64>,
    pub lambda2: Vec<f64>,
    pub lambda3: Vec<f64>,
    pub lambda4: Vec<f64>,
    pub rho: Vec<f64>,
}

impl Grid {
    pub fn cell_count(&self) -> usize {
        [&self.lambda1, &self.lambda2, &self.lambda3, &self.lambda4, &self.rho]
            .iter()
            .map(|v| v.len())
            .product()
    }

    /// Cartesian product with `lambda1` varying slowest and `rho` fastest.
    pub fn cells(&self, base: &Hyperparams) -> Vec<Hyperparams> {
        let mut out = Vec::with_capacity(self.cell_count());
        for &l1 in &self.lambda1 {
            for &l2 in &self.lambda2 {
                for &l3 in &self.lambda3 {
                    for &l4 in &self.lambda4 {
                        for &rho in &self.rho {
                            out.push(Hyperparams {
                                lambda1: l1,
                                lambda2: l2,
                                lambda3: l3,
                                lambda4: l4,
                                rho,
                                ..*base
                            });
                        }
                    }
                }
            }
        }
        out
    }
}

struct Fields {
    entries: BTreeMap<String, String>,
}

impl Fields {
    fn take(&mut self, key: &str) -> Option<String> {
        self.entries.remove(key)
    }

    fn parsed<T: std::str::FromStr>(&mut self, key: &str, what: &str) -> Result<Option<T>> {
        match self.take(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| Error::Config(format!("{key}: expected {what}, got {v:?}"))),
        }
    }

    fn count(&mut self, key: &str) -> Result<Option<usize>> {
        self.parsed(key, "a nonnegative integer")
    }

    fn list(&mut self, key: &str) -> Result<Option<Vec<f64>>> {
        let Some(v) = self.take(key) else { return Ok(None) };
        let vals: Vec<f64> = v
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Config(format!("{key}: expected a number, got {:?}", s.trim())))
            })
            .collect::<Result<_>>()?;
        Ok(Some(vals))
    }

    fn flag(&mut self, key: &str) -> Result<Option<bool>> {
        let Some(v) = self.take(key) else { return Ok(None) };
        match v.to_ascii_lowercase().as_str() {
            "1" | "true" | "yes" | "on" => Ok(Some(true)),
            "0" | "false" | "no" | "off" => Ok(Some(false)),
            _ => Err(Error::Config(format!("{key}: expected true or false, got {v:?}"))),
        }
    }
}

fn parse_split(v: &str) -> Result<SplitSpec> {
    let bad = || {
        Error::Config(format!(
            "split: expected per-class:N, fraction:F or a bare count or fraction, got {v:?}"
        ))
    };
    let (kind, num) = match v.split_once(':') {
        Some((k, n)) => (Some(k.trim().to_ascii_lowercase().replace('_', "-")), n.trim()),
        None => (None, v.trim()),
    };
    let spec = match kind.as_deref() {
        Some("per-class") => SplitSpec::PerClass(num.parse().map_err(|_| bad())?),
        Some("fraction") => SplitSpec::Fraction(num.parse().map_err(|_| bad())?),
        Some(_) => return Err(bad()),
        None if num.contains('.') => SplitSpec::Fraction(num.parse().map_err(|_| bad())?),
        None => SplitSpec::PerClass(num.parse().map_err(|_| bad())?),
    };
    match spec {
        SplitSpec::PerClass(0) => Err(Error::Config("split: per-class training count must be at least 1".into())),
        SplitSpec::Fraction(f) if !(f > 0.0 && f < 1.0) => {
            Err(Error::Config(format!("split: fraction must lie strictly between 0 and 1, got {f}")))
        }
        s => Ok(s),
    }
}

fn single(key: &str, vals: Option<Vec<f64>>, fallback: f64) -> Result<f64> {
    match vals.as_deref() {
        None => Ok(fallback),
        Some([v]) => Ok(*v),
        Some(_) => Err(Error::Config(format!("{key}: value lists are only accepted by gridsearch"))),
    }
}

impl RunConfig {
    /// Builds and validates a configuration with a single value per
    /// hyperparameter.
    pub fn from_raw(raw: &RawConfig) -> Result<Self> {
        let (cfg, grid) = Self::with_grid(raw)?;
        for (key, vals) in [
            ("lambda1", &grid.lambda1),
            ("lambda2", &grid.lambda2),
            ("lambda3", &grid.lambda3),
            ("lambda4", &grid.lambda4),
            ("rho", &grid.rho),
        ] {
            if vals.len() > 1 {
                return Err(Error::Config(format!("{key}: value lists are only accepted by gridsearch")));
            }
        }
        Ok(cfg)
    }

    /// Like [`RunConfig::from_raw`] but accepts comma-separated lists for
    /// the four lambdas and rho. The returned config holds the first value
    /// of each list.
    pub fn with_grid(raw: &RawConfig) -> Result<(Self, Grid)> {
        let mut f = Fields {
            entries: raw.entries.clone(),
        };
        let preset = f.take("preset").map(|name| presets::by_name(&name)).transpose()?;
        let base_hp = preset.map(|p| p.hyperparams).unwrap_or_default();

        let mode = match f.take("mode") {
            None => preset.map(|p| p.mode),
            Some(v) => Some(match v.to_ascii_lowercase().as_str() {
                "image" | "image2d" => SampleMode::Image2D,
                "feature" | "feature1d" => SampleMode::Feature1D,
                _ => return Err(Error::Config(format!("mode: expected image or feature, got {v:?}"))),
            }),
        };
        let feature = mode == Some(SampleMode::Feature1D);

        let input_rows = f.count("input_rows")?.or(preset.map(|p| p.geom.input_rows));
        let input_cols = f.count("input_cols")?.or(preset.map(|p| p.geom.input_cols));
        let stride = f.count("stride")?;
        let geom_default = |pick: fn(&ConvGeometry) -> usize, image: usize| {
            preset.map(|p| pick(&p.geom)).unwrap_or(if feature { 1 } else { image })
        };
        let atom_rows = f.count("atom_rows")?.unwrap_or(geom_default(|g| g.atom_rows, 12));
        let atom_cols = f.count("atom_cols")?.unwrap_or(geom_default(|g| g.atom_cols, 12));
        let stride_rows = f
            .count("stride_rows")?
            .or(stride)
            .unwrap_or(geom_default(|g| g.stride_rows, 6));
        let stride_cols = f
            .count("stride_cols")?
            .or(if feature { None } else { stride })
            .unwrap_or(geom_default(|g| g.stride_cols, 6));

        let grid = Grid {
            lambda1: f.list("lambda1")?.unwrap_or(vec![base_hp.lambda1]),
            lambda2: f.list("lambda2")?.unwrap_or(vec![base_hp.lambda2]),
            lambda3: f.list("lambda3")?.unwrap_or(vec![base_hp.lambda3]),
            lambda4: f.list("lambda4")?.unwrap_or(vec![base_hp.lambda4]),
            rho: f.list("rho")?.unwrap_or(vec![base_hp.rho]),
        };
        let hyperparams = Hyperparams {
            lambda1: grid.lambda1[0],
            lambda2: grid.lambda2[0],
            lambda3: grid.lambda3[0],
            lambda4: grid.lambda4[0],
            rho: grid.rho[0],
            max_iter: f.count("max_iter")?.unwrap_or(base_hp.max_iter),
            tol: single("tol", f.list("tol")?, base_hp.tol)?,
        };

        let eval_on = match f.take("on").as_deref().map(str::to_ascii_lowercase).as_deref() {
            None | Some("test") => EvalOn::Test,
            Some("train") => EvalOn::Train,
            Some("all") => EvalOn::All,
            Some(v) => return Err(Error::Config(format!("on: expected test, train or all, got {v:?}"))),
        };

        let cfg = RunConfig {
            preset: preset.map(|p| p.name),
            dataset: f.take("dataset").map(PathBuf::from),
            mode,
            input_rows,
            input_cols,
            atom_rows,
            atom_cols,
            stride_rows,
            stride_cols,
            atoms: f.count("m")?.or(preset.map(|p| p.atoms)).unwrap_or(50),
            hyperparams,
            seed: f.parsed("seed", "a nonnegative integer")?.unwrap_or(0),
            split: match f.take("split") {
                Some(v) => parse_split(&v)?,
                None => preset.map(|p| p.split).unwrap_or(SplitSpec::Fraction(0.5)),
            },
            threshold_at_test: f.flag("threshold_at_test")?.unwrap_or(false),
            out: f.take("out").map(PathBuf::from),
            model: f.take("model").map(PathBuf::from),
            trace: f.take("trace").map(PathBuf::from),
            folds: f.count("folds")?.unwrap_or(10),
            repetitions: f.count("repetitions")?.unwrap_or(3),
            grid_cap: f.count("grid_cap")?.unwrap_or(256),
            eval_on,
        };
        if let Some(key) = f.entries.keys().next() {
            return Err(Error::Config(format!("unknown key {key:?}")));
        }
        cfg.validate(&grid)?;
        Ok((cfg, grid))
    }

    fn validate(&self, grid: &Grid) -> Result<()> {
        let cfg_err = |e: Error| match e {
            Error::InvalidInput(msg) => Error::Config(msg),
            other => other,
        };
        if self.atoms == 0 {
            return Err(Error::Config("m: the dictionary needs at least one atom".into()));
        }
        for (key, v) in [
            ("atom_rows", self.atom_rows),
            ("atom_cols", self.atom_cols),
            ("stride_rows", self.stride_rows),
            ("stride_cols", self.stride_cols),
        ] {
            if v == 0 {
                return Err(Error::Config(format!("{key} must be at least 1")));
            }
        }
        if self.mode == Some(SampleMode::Feature1D) {
            if self.atom_cols != 1 || self.stride_cols != 1 {
                return Err(Error::Config("feature mode needs atom_cols = 1 and stride_cols = 1".into()));
            }
            if self.input_cols.is_some_and(|c| c != 1) {
                return Err(Error::Config("feature mode needs input_cols = 1".into()));
            }
        }
        match (self.input_rows, self.input_cols) {
            (Some(r), Some(c)) => {
                self.geometry(r, c).map_err(cfg_err)?;
            }
            (Some(r), None) if self.mode == Some(SampleMode::Feature1D) => {
                self.geometry(r, 1).map_err(cfg_err)?;
            }
            (None, None) => {}
            _ => return Err(Error::Config("set both input_rows and input_cols, or neither".into())),
        }
        for hp in grid.cells(&self.hyperparams).iter().take(self.grid_cap.max(1)) {
            hp.validate().map_err(cfg_err)?;
        }
        if self.folds < 2 {
            return Err(Error::Config(format!("folds must be at least 2, got {}", self.folds)));
        }
        if self.repetitions == 0 {
            return Err(Error::Config("repetitions must be at least 1".into()));
        }
        Ok(())
    }

    /// Convolution geometry for samples of the given shape.
    pub fn geometry(&self, rows: usize, cols: usize) -> Result<ConvGeometry> {
        ConvGeometry::new(rows, cols, self.atom_rows, self.atom_cols, self.stride_rows, self.stride_cols)
    }
}
