//! Tables behind the inspection subcommands.

use rayon::prelude::*;
use serde::Serialize;

use super::export::{num, Table};
use crate::error::Result;
use crate::gf::cells::{CellConfig, CellEngine};
use crate::gf::cumulants::{kappa, psi};
use crate::kernel::{llc_kernel, step_law, Event, LlcRow, OddSplit, StepLaw};
use crate::layers::{explore_with, ulam_label, ExploreConfig, Explorer, Schedule};
use crate::llc::{default_step_cap, llc_at_heights, simulate_llc, simulate_llc_engine};
use crate::rng::{root_key, stream, tagged_key};
use crate::weights::{
    a_delta, count_triangulations, height_factor, t_delta, time_factor, WeightTable, BOLTZMANN_WEIGHT,
};

/// Settings of the `explore` tables.
#[derive(Debug, Clone, PartialEq)]
pub struct ExploreDump {
    pub p: usize,
    pub samples: usize,
    pub seed: u64,
    pub cutoff: Option<f64>,
    pub max_height: Option<u32>,
    pub sync: bool,
}

/// `snapshots`, `genealogy`, `martingales` and `summary` tables.
pub fn explore_tables(d: &ExploreDump) -> Result<Vec<(String, Table)>> {
    let traces: Vec<_> = (0..d.samples as u64)
        .into_par_iter()
        .map_init(
            || Explorer::new(d.p),
            |ex, s| {
                let mut cfg = ExploreConfig::new(d.p, d.seed);
                cfg.sample = s;
                cfg.cutoff = d.cutoff;
                cfg.genealogy = true;
                if d.max_height.is_some() {
                    cfg.limits.max_height = d.max_height;
                }
                if d.sync {
                    cfg.limits.schedule = Schedule::Synchronized;
                    cfg.limits.martingales = true;
                }
                explore_with(ex, &cfg)
            },
        )
        .collect::<Result<_>>()?;
    let mut snap = Table::new(&["sample_id", "height", "rank", "perimeter"]);
    let mut gen = Table::new(&["sample_id", "label", "parent", "birth_height", "birth_perimeter"]);
    let mut mart = Table::new(&["sample_id", "r", "M", "V"]);
    let mut summ = Table::new(&["sample_id", "volume", "height", "steps", "complete", "frozen"]);
    for (s, tr) in traces.iter().enumerate() {
        for (h, cycles) in tr.snapshots.iter().enumerate() {
            for (k, l) in cycles.iter().enumerate() {
                snap.push([s.to_string(), h.to_string(), (k + 1).to_string(), l.to_string()]);
            }
        }
        for (i, ind) in tr.genealogy.iter().enumerate() {
            gen.push([
                s.to_string(),
                ulam_label(&tr.genealogy, i as u32),
                ind.parent.map_or(String::new(), |p| ulam_label(&tr.genealogy, p)),
                ind.birth_height.to_string(),
                ind.birth_perimeter.to_string(),
            ]);
        }
        for (r, (m, v)) in tr.stats.martingales.iter().enumerate() {
            mart.push([s.to_string(), r.to_string(), num(*m), num(*v)]);
        }
        summ.push([
            s.to_string(),
            tr.volume().to_string(),
            tr.height().to_string(),
            tr.stats.steps.to_string(),
            tr.stats.complete.to_string(),
            tr.frozen.len().to_string(),
        ]);
    }
    Ok(vec![
        ("snapshots".into(), snap),
        ("genealogy".into(), gen),
        ("martingales".into(), mart),
        ("summary".into(), summ),
    ])
}

/// Locally largest cycle paths, by step or by height.
///
/// Heights need the engine, which follows the larger child at equal odd splits.
pub fn llc_table(p: usize, samples: usize, seed: u64, heights: bool, rule: OddSplit) -> Result<Table> {
    let paths: Vec<_> = (0..samples as u64)
        .into_par_iter()
        .map_init(
            || WeightTable::new(4 * p + 8).expect("table size"),
            |w, s| {
                let cap = default_step_cap(p);
                if heights {
                    simulate_llc_engine(w, p, seed, s, cap)
                } else {
                    simulate_llc(w, p, rule, cap, &mut stream(tagged_key(root_key(seed, s), "llc kernel")))
                }
            },
        )
        .collect::<Result<_>>()?;
    let mut t = Table::new(&["sample_id", if heights { "height" } else { "step" }, "value"]);
    for (s, path) in paths.iter().enumerate() {
        if heights {
            let r_max = path.heights.last().copied().unwrap_or(0);
            for (r, v) in llc_at_heights(path, r_max).iter().enumerate() {
                t.push([s.to_string(), r.to_string(), v.map_or(String::new(), |v| v.to_string())]);
            }
        } else {
            for (n, v) in path.values.iter().enumerate() {
                t.push([s.to_string(), n.to_string(), v.to_string()]);
            }
        }
    }
    Ok(t)
}

/// Settings of the `gf` tables.
#[derive(Debug, Clone, PartialEq)]
pub struct GfDump {
    pub x0: f64,
    pub floor: f64,
    pub delta: f64,
    pub horizon: f64,
    pub dt: f64,
    pub samples: usize,
    pub seed: u64,
}

/// Ranked masses on a grid and extinction times of cell systems.
pub fn gf_tables(d: &GfDump) -> Result<Vec<(String, Table)>> {
    let mut cfg = CellConfig::new(d.x0, d.floor);
    cfg.levy.delta = d.delta;
    cfg.levy.exact = cfg.levy.exact.max(d.delta);
    let n = (d.horizon / d.dt).floor() as usize;
    cfg.times = (0..=n).map(|i| i as f64 * d.dt).collect();
    cfg.horizon = f64::INFINITY;
    let eng = CellEngine::new(cfg)?;
    let systems: Vec<_> = (0..d.samples as u64)
        .into_par_iter()
        .map(|s| eng.run(tagged_key(root_key(d.seed, s), "gf")))
        .collect();
    let mut masses = Table::new(&["sample_id", "time", "rank", "mass"]);
    let mut ext = Table::new(&["sample_id", "extinction", "cells", "overflow"]);
    for (s, sys) in systems.iter().enumerate() {
        for (i, ranked) in sys.ranked.iter().enumerate() {
            for (k, m) in ranked.iter().enumerate() {
                masses.push([s.to_string(), num(i as f64 * d.dt), (k + 1).to_string(), num(*m)]);
            }
        }
        ext.push([
            s.to_string(),
            sys.extinction_on_grid(d.dt).map_or(String::new(), num),
            sys.cells.len().to_string(),
            sys.overflow.to_string(),
        ]);
    }
    Ok(vec![("masses".into(), masses), ("extinction".into(), ext)])
}

/// `Ψ(q)` and `κ(q)` on a grid; `κ` is blank where undefined.
pub fn cumulants_table(qs: &[f64]) -> Result<Table> {
    let mut t = Table::new(&["q", "psi", "kappa"]);
    for &q in qs {
        let k = kappa(q);
        t.push([num(q), psi(q).map_or(String::new(), num), if k.is_finite() { num(k) } else { String::new() }]);
    }
    Ok(t)
}

/// `log Z`, `f`, `g` and `q_k` for `p <= p_max`.
pub fn weights_table(p_max: usize) -> Result<Table> {
    let w = WeightTable::new(p_max + 2)?;
    let mut t = Table::new(&["p", "log_z", "log_c", "f", "g", "q", "recurrence_residual"]);
    for p in 1..=p_max {
        t.push([
            p.to_string(),
            num(w.log_z(p)),
            num(w.log_c(p)),
            num(w.f(p)),
            num(w.g(p)),
            num(w.q(p)),
            num(w.recurrence_residual(p)?),
        ]);
    }
    Ok(t)
}

#[derive(Debug, Clone, Serialize)]
pub struct Constants {
    pub t_delta: f64,
    pub a_delta: f64,
    pub time_factor: f64,
    pub height_factor: f64,
    pub boltzmann_weight: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CountEntry {
    pub n: usize,
    pub p: usize,
    /// Decimal digits.
    pub count: String,
}

/// The `weights` JSON document; arrays are indexed by `p - 1`.
#[derive(Debug, Clone, Serialize)]
pub struct WeightsDump {
    pub p_max: usize,
    pub log_z: Vec<f64>,
    pub log_c: Vec<f64>,
    pub f: Vec<f64>,
    pub g: Vec<f64>,
    pub constants: Constants,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counts: Option<Vec<CountEntry>>,
}

/// Weights up to `p_max`, with exact counts for `n <= counts.0`, `p <= counts.1`.
pub fn weights_dump(p_max: usize, counts: Option<(usize, usize)>) -> Result<WeightsDump> {
    let w = WeightTable::new(p_max + 2)?;
    let ps = 1..=p_max;
    let counts = match counts {
        Some((n_max, pc)) => {
            let mut out = Vec::new();
            for n in 0..=n_max {
                for p in 1..=pc {
                    out.push(CountEntry { n, p, count: count_triangulations(n as u64, p as u64)?.to_string() });
                }
            }
            Some(out)
        }
        None => None,
    };
    Ok(WeightsDump {
        p_max,
        log_z: ps.clone().map(|p| w.log_z(p)).collect(),
        log_c: ps.clone().map(|p| w.log_c(p)).collect(),
        f: ps.clone().map(|p| w.f(p)).collect(),
        g: ps.map(|p| w.g(p)).collect(),
        constants: Constants {
            t_delta: t_delta(),
            a_delta: a_delta(),
            time_factor: time_factor(),
            height_factor: height_factor(),
            boltzmann_weight: BOLTZMANN_WEIGHT,
        },
        counts,
    })
}

/// One-step law at perimeter `p`.
pub fn step_law_table(p: usize) -> Result<(StepLaw, Table)> {
    let w = WeightTable::new(p + 2)?;
    let law = step_law(&w, p)?;
    let mut t = Table::new(&["event", "k", "children", "probability"]);
    for (e, m) in law.events() {
        let (name, k) = match e {
            Event::C => ("C", String::new()),
            Event::G(k) => ("G", k.to_string()),
            Event::V => ("V", String::new()),
        };
        let (a, b) = e.children(p);
        t.push([name.to_string(), k, format!("{a} {b}"), num(m)]);
    }
    Ok((law, t))
}

/// Locally largest cycle row at perimeter `p`.
pub fn llc_row_table(p: usize, rule: OddSplit) -> Result<(LlcRow, Table)> {
    let w = WeightTable::new(p + 2)?;
    let row = llc_kernel(&w, p, rule)?;
    let mut t = Table::new(&["y", "probability"]);
    for (y, m) in &row.entries {
        t.push([y.to_string(), num(*m)]);
    }
    Ok((row, t))
}
