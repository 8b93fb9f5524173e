//! The deterministic exact-identity suite.

use std::time::Instant;

use super::export::Provenance;
use super::report::{Check, ComparisonReport};
use crate::error::Result;
use crate::gf::cumulants::{kappa, kappa_integral, psi_prime0, psi_prime0_fd, psi_prime0_printed};
use crate::kernel::{half_plane, llc_kernel, log_b_split, step_law, OddSplit};
use crate::llc::supermartingale_sweep;
use crate::weights::{count_dp, count_triangulations, WeightTable};

/// Sizes of the exact suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ValidateConfig {
    /// Perimeters checked for recurrence, normalisation, symmetry and the sweep.
    pub p_max: usize,
    /// Cutoff of the half-plane sums before the exact tail.
    pub k_max: usize,
    /// Counts are compared for `n, p <= counts_max`.
    pub counts_max: usize,
}

impl Default for ValidateConfig {
    fn default() -> Self {
        ValidateConfig { p_max: 10_000, k_max: 10_000, counts_max: 40 }
    }
}

/// Step of the central difference for `Ψ'(0)`.
pub const PSI_FD_STEP: f64 = 1e-5;

/// Run the suite on a fresh weight table.
pub fn validate(cfg: &ValidateConfig) -> Result<ComparisonReport> {
    let w = WeightTable::new(cfg.p_max.max(cfg.k_max) + 2)?;
    validate_with(&w, cfg)
}

/// Run the suite on a given weight table.
pub fn validate_with(w: &WeightTable, cfg: &ValidateConfig) -> Result<ComparisonReport> {
    let start = Instant::now();
    let mut rep = ComparisonReport::new("validate", Provenance::new(0, "exact"));
    let pm = cfg.p_max;

    let (p, r) = worst((1..=pm).map(|p| (p, w.recurrence_residual(p))))?;
    rep.checks.push(Check::at_most("Z recurrence", r, 1e-10, format!("worst at p = {p}, p <= {pm}")));

    let (p, r) = worst((1..=pm).map(|p| (p, step_law(w, p).map(|l| (l.total() - 1.0).abs()))))?;
    rep.checks.push(Check::at_most("step-law normalisation", r, 1e-10, format!("worst at p = {p}")));

    for rule in [OddSplit::Literal, OddSplit::Larger] {
        let (p, r) = worst((1..=pm).map(|p| (p, llc_kernel(w, p, rule).map(|l| (l.total() - 1.0).abs()))))?;
        rep.checks.push(Check::at_most(
            format!("llc row normalisation ({rule:?})"),
            r,
            1e-10,
            format!("worst at p = {p}"),
        ));
    }

    let mut asym = 0usize;
    let mut first = None;
    for p in 1..=pm {
        for k in 0..p / 2 {
            if log_b_split(w, p, k).to_bits() != log_b_split(w, p, p - 1 - k).to_bits() {
                asym += 1;
                first.get_or_insert((p, k));
            }
        }
    }
    rep.checks.push(Check::at_most(
        "b_k symmetry in log space",
        asym as f64,
        0.0,
        first.map_or("bitwise equal".into(), |(p, k)| format!("first mismatch p = {p}, k = {k}")),
    ));

    let defect = half_plane::mass_defect(w, cfg.k_max);
    rep.checks.push(Check::at_most(
        "q_-1 + 2 sum q_k = 1",
        defect.abs(),
        1e-6,
        format!("K = {} plus exact tail", cfg.k_max),
    ));
    let drift = half_plane::drift(w, cfg.k_max);
    rep.checks.push(Check::at_most(
        "q_-1 - 2 sum k q_k = 0",
        drift.abs(),
        1e-6,
        format!("K = {} plus exact tail", cfg.k_max),
    ));

    for q in [2.0, 3.0] {
        rep.checks.push(Check::at_most(format!("kappa({q}) closed form"), kappa(q).abs(), 1e-7, ""));
        rep.checks.push(Check::at_most(
            format!("kappa({q}) quadrature"),
            kappa_integral(q)?.abs(),
            1e-7,
            "",
        ));
    }
    let pi = std::f64::consts::PI;
    rep.checks.push(Check::at_most("kappa(4) = pi closed form", (kappa(4.0) - pi).abs(), 1e-6, ""));
    rep.checks.push(Check::at_most(
        "kappa(4) = pi quadrature",
        (kappa_integral(4.0)? - pi).abs(),
        1e-6,
        "",
    ));

    let fd = psi_prime0_fd(PSI_FD_STEP)?;
    rep.checks.push(Check::at_most(
        "Psi'(0) = -8/3 + 8/9 (6 pi - 18)",
        (fd - psi_prime0_printed()).abs(),
        1e-6,
        format!("finite difference {fd:.9}, closed {:.9}", psi_prime0_printed()),
    ));
    rep.notes.push(format!(
        "Psi'(0) by finite difference is {fd:.9}; -8/3 - 8/9 (6 pi - 17) = {:.9} differs by {:.1e}",
        psi_prime0(),
        (fd - psi_prime0()).abs()
    ));

    let (p, r) = supermartingale_sweep(w, pm, OddSplit::Literal)?;
    rep.checks.push(Check::at_most(
        "supermartingale sweep Delta(p) / f(p)",
        r,
        1e-9,
        format!("largest at p = {p}, p <= {pm}"),
    ));

    let n = cfg.counts_max;
    let dp = count_dp(n, n)?;
    let mut bad = 0usize;
    let mut first = None;
    for (ni, row) in dp.iter().enumerate() {
        for (pi_, c) in row.iter().enumerate().skip(1) {
            if count_triangulations(ni as u64, pi_ as u64)? != *c {
                bad += 1;
                first.get_or_insert((ni, pi_));
            }
        }
    }
    rep.checks.push(Check::at_most(
        "count formula = DP oracle",
        bad as f64,
        0.0,
        first.map_or(format!("n, p <= {n}"), |(a, b)| format!("first mismatch n = {a}, p = {b}")),
    ));

    rep.runtime_s = start.elapsed().as_secs_f64();
    Ok(rep)
}

// Largest value and its argument.
fn worst<I: Iterator<Item = (usize, Result<f64>)>>(it: I) -> Result<(usize, f64)> {
    let mut best = (0, f64::NEG_INFINITY);
    for (p, r) in it {
        let r = r?;
        if !(r <= best.1) {
            best = (p, r);
        }
    }
    Ok(best)
}
