//! Run configuration: a `key = value` text file, overridden by command-line
//! flags, resolved into a [`RunConfig`] whose full snapshot is written with
//! every run.
//!
//! Keys: `metrics`, `tier2`, `jobs`, `cache`, `cache_dir`, `out_dir`,
//! `histogram_bins`, `or_threshold` (`ci95` or `fixed`), `or_band`,
//! `image_check` (`eager` or `lazy`), and `constants.<path>` for any entry of
//! the metric constants table (e.g. `constants.ssim.k1 = 0.01`).

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use advfid_core::stats::OrThreshold;
use advfid_core::{Constants, MetricId};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::manifest::ImageCheck;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("config line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("config key {key:?}: {message}")]
    Value { key: String, message: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub metrics: Vec<MetricId>,
    pub tier2: bool,
    pub constants: Constants,
    pub or_threshold: OrThreshold,
    pub jobs: usize,
    pub cache: bool,
    /// Overridden by the cache-root environment variable when set.
    pub cache_dir: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub histogram_bins: usize,
    pub image_check: ImageCheck,
}

impl Default for RunConfig {
    fn default() -> Self {
        let tier2 = advfid_core::Scorer::default().tier2_enabled;
        Self {
            metrics: default_metrics(tier2),
            tier2,
            constants: Constants::default(),
            or_threshold: OrThreshold::default(),
            jobs: std::thread::available_parallelism().map_or(1, |n| n.get()),
            cache: true,
            cache_dir: None,
            out_dir: PathBuf::from("advfid-out"),
            histogram_bins: 8,
            image_check: ImageCheck::Eager,
        }
    }
}

fn default_metrics(tier2: bool) -> Vec<MetricId> {
    MetricId::ALL
        .into_iter()
        .filter(|m| tier2 || m.tier() == 1)
        .collect()
}

/// Parses a comma-separated metric list; `all`, `tier1`, `tier2` and `norms`
/// expand to groups.
pub fn parse_metric_list(s: &str) -> Result<Vec<MetricId>, String> {
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        match item.to_ascii_lowercase().as_str() {
            "all" => out.extend(MetricId::ALL),
            "tier1" => out.extend(MetricId::tier1()),
            "tier2" => out.extend(MetricId::tier2()),
            "norms" => out.extend(MetricId::ALL.into_iter().filter(|m| m.is_norm())),
            _ => out.push(item.parse::<MetricId>().map_err(|e| e.to_string())?),
        }
    }
    out.sort();
    out.dedup();
    if out.is_empty() {
        return Err("empty metric list".into());
    }
    Ok(out)
}

fn parse_bool(s: &str) -> Result<bool, String> {
    match s.to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(format!("expected a boolean, got {s:?}")),
    }
}

fn parse_number<T: std::str::FromStr>(s: &str) -> Result<T, String> {
    s.parse::<T>()
        .map_err(|_| format!("expected a number, got {s:?}"))
}

impl RunConfig {
    /// Defaults, then the optional config file.
    pub fn load(path: Option<&Path>) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        if let Some(path) = path {
            let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
                path: path.to_path_buf(),
                source,
            })?;
            cfg.apply_text(&text)?;
        }
        Ok(cfg)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        let mut metrics_set = false;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split_once('#').map_or(raw, |(l, _)| l).trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: i + 1,
                message: format!("expected `key = value`, got {raw:?}"),
            })?;
            let key = key.trim();
            metrics_set |= key == "metrics";
            self.set(key, value.trim())?;
        }
        if !metrics_set {
            self.metrics = default_metrics(self.tier2);
        }
        Ok(())
    }

    /// Sets one key; used for file entries and command-line overrides alike.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let err = |message: String| ConfigError::Value {
            key: key.to_string(),
            message,
        };
        match key {
            "metrics" => self.metrics = parse_metric_list(value).map_err(err)?,
            "tier2" => self.tier2 = parse_bool(value).map_err(err)?,
            "jobs" => self.jobs = parse_number(value).map_err(err)?,
            "cache" => self.cache = parse_bool(value).map_err(err)?,
            "cache_dir" => self.cache_dir = (!value.is_empty()).then(|| PathBuf::from(value)),
            "out_dir" => self.out_dir = PathBuf::from(value),
            "histogram_bins" => self.histogram_bins = parse_number(value).map_err(err)?,
            "image_check" => {
                self.image_check = match value.to_ascii_lowercase().as_str() {
                    "eager" => ImageCheck::Eager,
                    "lazy" => ImageCheck::Lazy,
                    _ => return Err(err(format!("expected eager or lazy, got {value:?}"))),
                }
            }
            "or_threshold" => {
                let band = self.or_band();
                self.or_threshold = match value.to_ascii_lowercase().as_str() {
                    "ci95" => OrThreshold::Ci95 { fallback: band },
                    "fixed" => OrThreshold::Fixed(band),
                    _ => return Err(err(format!("expected ci95 or fixed, got {value:?}"))),
                }
            }
            "or_band" => {
                let band: f64 = parse_number(value).map_err(err)?;
                if !(band.is_finite() && band > 0.0) {
                    return Err(err(format!("band must be positive, got {value}")));
                }
                self.or_threshold = match self.or_threshold {
                    OrThreshold::Ci95 { .. } => OrThreshold::Ci95 { fallback: band },
                    OrThreshold::Fixed(_) => OrThreshold::Fixed(band),
                };
            }
            _ => match key.strip_prefix("constants.") {
                Some(path) => {
                    self.constants = override_constant(&self.constants, path, value).map_err(err)?
                }
                None => return Err(err("unknown key".into())),
            },
        }
        Ok(())
    }

    fn or_band(&self) -> f64 {
        match self.or_threshold {
            OrThreshold::Ci95 { fallback } => fallback,
            OrThreshold::Fixed(b) => b,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.jobs == 0 {
            return Err(ConfigError::Invalid("jobs must be at least 1".into()));
        }
        if self.histogram_bins < 2 {
            return Err(ConfigError::Invalid(
                "histogram_bins must be at least 2".into(),
            ));
        }
        if self.metrics.is_empty() {
            return Err(ConfigError::Invalid("no metrics selected".into()));
        }
        let scorer = self.scorer();
        let disabled: Vec<&str> = self
            .metrics
            .iter()
            .filter(|m| !scorer.is_enabled(**m))
            .map(|m| m.name())
            .collect();
        if !disabled.is_empty() {
            return Err(ConfigError::Invalid(format!(
                "metrics {} need tier-2 support, which is disabled",
                disabled.join(", ")
            )));
        }
        Ok(())
    }

    pub fn scorer(&self) -> advfid_core::Scorer {
        advfid_core::Scorer {
            constants: self.constants.clone(),
            tier2_enabled: self.tier2,
        }
    }

    /// SHA-256 of the serialized constants table.
    pub fn constants_hash(&self) -> String {
        let json = serde_json::to_string(&self.constants).expect("constants serialize");
        hex(&Sha256::digest(json.as_bytes()))
    }

    /// Every setting in `key = value` form; feeding it back through
    /// [`RunConfig::apply_text`] reproduces this configuration.
    pub fn snapshot(&self) -> String {
        let mut out = String::new();
        let names: Vec<&str> = self.metrics.iter().map(|m| m.name()).collect();
        let (mode, band) = match self.or_threshold {
            OrThreshold::Ci95 { fallback } => ("ci95", fallback),
            OrThreshold::Fixed(b) => ("fixed", b),
        };
        let _ = writeln!(out, "metrics = {}", names.join(","));
        let _ = writeln!(out, "tier2 = {}", self.tier2);
        let _ = writeln!(out, "jobs = {}", self.jobs);
        let _ = writeln!(out, "cache = {}", self.cache);
        if let Some(dir) = &self.cache_dir {
            let _ = writeln!(out, "cache_dir = {}", dir.display());
        }
        let _ = writeln!(out, "out_dir = {}", self.out_dir.display());
        let _ = writeln!(out, "histogram_bins = {}", self.histogram_bins);
        let _ = writeln!(out, "or_threshold = {mode}");
        let _ = writeln!(out, "or_band = {band}");
        let image_check = match self.image_check {
            ImageCheck::Eager => "eager",
            ImageCheck::Lazy => "lazy",
        };
        let _ = writeln!(out, "image_check = {image_check}");
        let constants = serde_json::to_value(&self.constants).expect("constants serialize");
        flatten("constants", &constants, &mut out);
        out
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut String) {
    match v {
        Value::Object(map) => {
            for (k, child) in map {
                flatten(&format!("{prefix}.{k}"), child, out);
            }
        }
        Value::String(s) => {
            let _ = writeln!(out, "{prefix} = {s}");
        }
        other => {
            let _ = writeln!(out, "{prefix} = {other}");
        }
    }
}

/// Replaces one leaf of the constants table, re-validating the whole table.
fn override_constant(constants: &Constants, path: &str, value: &str) -> Result<Constants, String> {
    let mut tree = serde_json::to_value(constants).map_err(|e| e.to_string())?;
    let mut node = &mut tree;
    for part in path.split('.') {
        node = node
            .as_object_mut()
            .and_then(|m| m.get_mut(part))
            .ok_or_else(|| format!("no constant named {path:?}"))?;
    }
    if node.is_object() {
        return Err(format!("{path:?} is a group, not a single constant"));
    }
    *node = serde_json::from_str(value).unwrap_or_else(|_| Value::String(value.to_string()));
    serde_json::from_value(tree).map_err(|e| format!("bad value {value:?}: {e}"))
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes
        .iter()
        .fold(String::with_capacity(bytes.len() * 2), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_overrides_defaults() {
        let mut c = RunConfig::default();
        c.apply_text(
            "# comment\nmetrics = psnr, ssim ,norms\njobs=3\nor_threshold = fixed\nor_band = 0.4\n",
        )
        .unwrap();
        assert_eq!(
            c.metrics,
            vec![
                MetricId::Psnr,
                MetricId::Ssim,
                MetricId::L0,
                MetricId::L2,
                MetricId::Linf
            ]
        );
        assert_eq!(c.jobs, 3);
        assert_eq!(c.or_threshold, OrThreshold::Fixed(0.4));
    }

    #[test]
    fn constant_overrides_are_typed() {
        let mut c = RunConfig::default();
        c.set("constants.ssim.k1", "0.02").unwrap();
        assert_eq!(c.constants.ssim.k1, 0.02);
        assert!(c.set("constants.ssim.k1", "\"x\"").is_err());
        assert!(c.set("constants.ssim.nope", "1").is_err());
        assert!(c.set("constants.ssim", "1").is_err());
        assert_ne!(c.constants_hash(), RunConfig::default().constants_hash());
    }

    #[test]
    fn snapshot_round_trips() {
        let mut c = RunConfig::default();
        c.apply_text("metrics = tier1\njobs = 2\nconstants.ssim.k2 = 0.05\nor_band = 0.7\n")
            .unwrap();
        let mut d = RunConfig::default();
        d.apply_text(&c.snapshot()).unwrap();
        assert_eq!(c, d);
    }

    #[test]
    fn rejects_bad_input() {
        let mut c = RunConfig::default();
        assert!(matches!(
            c.apply_text("jobs 3"),
            Err(ConfigError::Syntax { line: 1, .. })
        ));
        assert!(c.set("jobs", "many").is_err());
        assert!(c.set("colour", "blue").is_err());
        assert!(c.set("metrics", "psnr,bogus").is_err());
        c.jobs = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn tier2_metrics_need_tier2() {
        let mut c = RunConfig::default();
        c.apply_text("tier2 = false\nmetrics = vif\n").unwrap();
        assert!(c.validate().is_err());
        c.apply_text("tier2 = false\n").unwrap();
        assert!(c.metrics.iter().all(|m| m.tier() == 1));
        c.validate().unwrap();
    }
}
