//! Comparison reports.

use serde::Serialize;

use super::export::Provenance;
use super::stats::{KsResult, MeanSe};

/// One verdict against a tolerance fixed before the run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub statistic: f64,
    pub threshold: f64,
    pub p_value: Option<f64>,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    /// Passes when `statistic <= threshold`.
    pub fn at_most(name: impl Into<String>, statistic: f64, threshold: f64, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            statistic,
            threshold,
            p_value: None,
            pass: statistic <= threshold,
            detail: detail.into(),
        }
    }

    /// Two-sample KS test; passes below the critical distance.
    pub fn ks(name: impl Into<String>, ks: &KsResult) -> Self {
        Check {
            name: name.into(),
            statistic: ks.d,
            threshold: ks.critical,
            p_value: Some(ks.p_value),
            pass: ks.pass,
            detail: format!("n={} m={}", ks.n, ks.m),
        }
    }

    /// `|mean - target| <= sigmas * se`; the statistic is `|z|`.
    pub fn mean(name: impl Into<String>, m: &MeanSe, target: f64, sigmas: f64) -> Self {
        let z = m.z(target).abs();
        Check {
            name: name.into(),
            statistic: z,
            threshold: sigmas,
            p_value: None,
            pass: z <= sigmas,
            detail: format!("mean={:.6} se={:.2e} target={:.6} n={}", m.mean, m.se, target, m.n),
        }
    }

    pub fn line(&self) -> String {
        let p = self.p_value.map_or(String::new(), |p| format!(" p={p:.3}"));
        format!(
            "{} {}: {:.4e} vs {:.4e}{} ({})",
            if self.pass { "ok  " } else { "FAIL" },
            self.name,
            self.statistic,
            self.threshold,
            p,
            self.detail
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub experiment: String,
    pub provenance: Provenance,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    /// Fewer samples than the configuration asked for were usable.
    pub underpowered: bool,
    pub runtime_s: f64,
}

impl ComparisonReport {
    pub fn new(experiment: &str, provenance: Provenance) -> Self {
        ComparisonReport {
            experiment: experiment.to_string(),
            provenance,
            checks: Vec::new(),
            notes: Vec::new(),
            underpowered: false,
            runtime_s: 0.0,
        }
    }

    pub fn pass(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }

    pub fn summary(&self) -> String {
        let mut s = format!("{} [{}]\n", self.experiment, if self.pass() { "PASS" } else { "FAIL" });
        for c in &self.checks {
            s.push_str("  ");
            s.push_str(&c.line());
            s.push('\n');
        }
        for n in &self.notes {
            s.push_str("  note: ");
            s.push_str(n);
            s.push('\n');
        }
        s
    }
}
