//! Flat `key = value` experiment configuration.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Schema version of every CSV and JSON file written by the harness.
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub p: Vec<usize>,
    pub eps: Vec<f64>,
    /// `r` grid (heights in units of `√p`) or time grid, depending on the experiment.
    pub grid: Vec<f64>,
    pub samples: usize,
    /// Samples on the continuum side; defaults to `samples`.
    pub continuum_samples: usize,
    pub seed: u64,
    /// Truncation of `ξ`.
    pub delta: f64,
    /// Explicit-jump threshold of `ξ`.
    pub exact: f64,
    /// Spawn floor of the cell systems, relative to the initial mass.
    pub floor: f64,
    /// Height threshold in units of `√p` for the frozen-hole experiment.
    pub height_threshold: f64,
    /// Subtree tables for extinction times; 0 disables.
    pub subtree_draws: usize,
    /// Pass threshold for KS tests.
    pub alpha: f64,
    /// Tolerance for mean comparisons, in standard errors.
    pub sigmas: f64,
    pub out: Option<String>,
    pub format_version: u32,
}

impl ExperimentConfig {
    pub fn new(experiment: &str) -> Self {
        ExperimentConfig {
            experiment: experiment.to_string(),
            p: vec![1000],
            eps: vec![0.1, 0.05, 0.02, 0.01],
            grid: vec![0.2, 0.5, 1.0],
            samples: 10_000,
            continuum_samples: 10_000,
            seed: 1,
            delta: 1e-4,
            exact: 0.05,
            floor: 0.01,
            height_threshold: 0.5,
            subtree_draws: 4096,
            alpha: 0.01,
            sigmas: 3.0,
            out: None,
            format_version: FORMAT_VERSION,
        }
    }

    /// Parse `key = value` lines; `#` starts a comment, lists are comma separated.
    pub fn parse(text: &str) -> Result<Self> {
        let mut kv = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", n + 1)))?;
            if kv.insert(k.trim().to_string(), v.trim().to_string()).is_some() {
                return Err(Error::Config(format!("line {}: duplicate key {}", n + 1, k.trim())));
            }
        }
        let exp = kv.remove("experiment").unwrap_or_default();
        let mut cfg = ExperimentConfig::new(&exp);
        let mut continuum_set = false;
        for (k, v) in &kv {
            cfg.set(k, v)?;
            continuum_set |= k == "continuum_samples";
        }
        if !continuum_set {
            cfg.continuum_samples = cfg.samples;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Set one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |e: &dyn std::fmt::Display| Error::Config(format!("{key} = {value}: {e}"));
        match key {
            "experiment" => self.experiment = value.to_string(),
            "p" => self.p = list(value).map_err(|e| bad(&e))?,
            "eps" => self.eps = list(value).map_err(|e| bad(&e))?,
            "grid" => self.grid = list(value).map_err(|e| bad(&e))?,
            "samples" => self.samples = value.parse().map_err(|e| bad(&e))?,
            "continuum_samples" => self.continuum_samples = value.parse().map_err(|e| bad(&e))?,
            "seed" => self.seed = value.parse().map_err(|e| bad(&e))?,
            "delta" => self.delta = value.parse().map_err(|e| bad(&e))?,
            "exact" => self.exact = value.parse().map_err(|e| bad(&e))?,
            "floor" => self.floor = value.parse().map_err(|e| bad(&e))?,
            "height_threshold" => self.height_threshold = value.parse().map_err(|e| bad(&e))?,
            "subtree_draws" => self.subtree_draws = value.parse().map_err(|e| bad(&e))?,
            "alpha" => self.alpha = value.parse().map_err(|e| bad(&e))?,
            "sigmas" => self.sigmas = value.parse().map_err(|e| bad(&e))?,
            "out" => self.out = Some(value.to_string()),
            "format_version" => {
                let v: u32 = value.parse().map_err(|e| bad(&e))?;
                if v != FORMAT_VERSION {
                    return Err(Error::Config(format!("format version {v}, expected {FORMAT_VERSION}")));
                }
            }
            _ => return Err(Error::Config(format!("unknown key {key}"))),
        }
        Ok(())
    }

    /// Canonical `key = value` text: sorted keys, shortest round-trip numbers.
    /// The output directory is not part of it.
    pub fn canonical(&self) -> String {
        fn join<T: ToString>(v: &[T]) -> String {
            v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
        }
        let mut kv = BTreeMap::new();
        kv.insert("alpha", self.alpha.to_string());
        kv.insert("continuum_samples", self.continuum_samples.to_string());
        kv.insert("delta", self.delta.to_string());
        kv.insert("eps", join(&self.eps));
        kv.insert("exact", self.exact.to_string());
        kv.insert("experiment", self.experiment.clone());
        kv.insert("floor", self.floor.to_string());
        kv.insert("format_version", self.format_version.to_string());
        kv.insert("grid", join(&self.grid));
        kv.insert("height_threshold", self.height_threshold.to_string());
        kv.insert("p", join(&self.p));
        kv.insert("samples", self.samples.to_string());
        kv.insert("seed", self.seed.to_string());
        kv.insert("sigmas", self.sigmas.to_string());
        kv.insert("subtree_draws", self.subtree_draws.to_string());
        kv.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    /// First 16 hex digits of the SHA-256 of [`Self::canonical`].
    pub fn hash(&self) -> String {
        config_hash(&self.canonical())
    }
}

/// First 16 hex digits of the SHA-256 of `text`.
pub fn config_hash(text: &str) -> String {
    let digest = Sha256::digest(text.as_bytes());
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

fn list<T: std::str::FromStr>(v: &str) -> std::result::Result<Vec<T>, T::Err> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty()).map(str::parse).collect()
}
