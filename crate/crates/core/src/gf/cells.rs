//! Cell systems of the growth-fragmentation `X`.
//!
//! Every cell follows the Lamperti transform at index `-1/2` of its own copy
//! of `ξ`; a jump `x` of a cell of mass `m` leaves the mother with `x m` and
//! starts a daughter of mass `(1 - x) m`. Only daughters of mass at least
//! `floor * x0` are followed.

use rand::Rng;
use rand_distr::{Exp1, StandardNormal};

use super::cumulants::psi;
use super::jumps::JumpSampler;
use super::levy::{expm1_ratio, mass_along, Band, Index, LevyConfig};
use crate::error::{Error, Result};
use crate::rng::{child_key, stream, tagged_key};

const LEVELS_PER_OCTAVE: f64 = 8.0;

#[derive(Debug, Clone, PartialEq)]
pub struct CellConfig {
    pub x0: f64,
    /// Spawn floor, relative to `x0`.
    pub floor: f64,
    /// `delta` is the truncation; jumps below `max(delta, floor x0 / m)`,
    /// capped at `exact`, are replaced by a Gaussian.
    pub levy: LevyConfig,
    /// Cells below `kill * x0` are removed; their remaining lifetime is
    /// completed by its mean.
    pub kill: f64,
    /// Clock horizon.
    pub horizon: f64,
    /// Times at which the ranked masses are reported.
    pub times: Vec<f64>,
    /// Ranks kept per reported time; 0 keeps all.
    pub top_k: usize,
    pub cell_cap: usize,
    pub index: Index,
    /// Keep the mass path of every cell.
    pub record_paths: bool,
    /// Once no report time is pending, a cell below `leaf * floor * x0` is
    /// finished with a lifetime drawn from the law of `∫ e^{θ ξ}`; 0 disables.
    ///
    /// Such a cell would have to grow by `2 / leaf` to spawn again, which has
    /// probability `(leaf / 2)^γ` with `Ψ(γ) = 0`.
    pub leaf: f64,
    /// Draws per table of subtree extinction times; 0 disables them.
    ///
    /// A daughter of mass `y < 4 floor x0` born after the last report time is
    /// not simulated: its subtree dies after `y^θ ζ_r`, with `ζ_r` the
    /// extinction time of a system from mass 1 with floor `r = floor x0 / y`,
    /// drawn from a table on a grid of `r` in `[1/4, 1]`.
    pub subtree_draws: usize,
}

impl CellConfig {
    pub fn new(x0: f64, floor: f64) -> Self {
        CellConfig {
            x0,
            floor,
            levy: LevyConfig { delta: 1e-4, exact: 0.05, gaussian: true, max_step: 0.2 },
            kill: 1e-4,
            horizon: f64::INFINITY,
            times: Vec::new(),
            top_k: 0,
            cell_cap: 1_000_000,
            index: Index::Half,
            record_paths: false,
            leaf: 0.25,
            subtree_draws: 0,
        }
    }

    /// Uniform grid `0, dt, 2dt, ...` up to `t_max`.
    pub fn with_grid(mut self, dt: f64, t_max: f64) -> Self {
        let n = (t_max / dt + 1e-9).floor() as usize;
        self.times = (0..=n).map(|i| i as f64 * dt).collect();
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.levy.validate()?;
        if !(self.x0 > 0.0) {
            return Err(Error::InvalidArgument("x0 must be positive".into()));
        }
        if !(self.floor > 0.0) {
            return Err(Error::InvalidArgument("mass floor must be positive".into()));
        }
        if !(self.kill > 0.0 && self.kill < 1.0) {
            return Err(Error::InvalidArgument("kill level outside (0, 1)".into()));
        }
        if self.times.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidArgument("report times must be sorted".into()));
        }
        Ok(())
    }
}

/// Precomputed truncation ladder and jump sampler, shared by many systems.
#[derive(Debug, Clone)]
pub struct CellEngine {
    pub cfg: CellConfig,
    levels: Vec<Band>,
    sampler: JumpSampler,
    /// Mean of `∫_0^∞ e^{θ ξ(s)} ds`, i.e. `-1/Ψ(θ)`.
    mean_residual: f64,
    /// Sorted draws of `∫_0^∞ e^{θ ξ(s)} ds`.
    functional: Vec<f64>,
    /// Subtree extinction tables, from `r = 1` down.
    subtrees: Vec<Vec<f64>>,
}

/// Points of the subtree grid on `r ∈ [1/4, 1]`.
pub const SUBTREE_GRID: usize = 32;

fn subtree_index(r: f64) -> f64 {
    -r.ln() / (4f64.ln() / (SUBTREE_GRID - 1) as f64)
}

/// Draws in the exponential functional table.
pub const FUNCTIONAL_DRAWS: usize = 1 << 16;

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub parent: Option<u32>,
    /// Birth rank among the mother's daughters, from 1.
    pub index: u32,
    pub birth: f64,
    pub mass0: f64,
    /// `None` if alive at the horizon.
    pub death: Option<f64>,
    /// `(t, X(t))` at every knot; a jump appears as two entries at the same time.
    pub path: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellSystem {
    pub cells: Vec<Cell>,
    /// Ranked masses at each report time, largest first.
    pub ranked: Vec<Vec<f64>>,
    /// Time at which every followed cell is dead.
    pub extinction: Option<f64>,
    /// The cell cap stopped further spawning.
    pub overflow: bool,
    pub steps: u64,
    /// Daughters whose subtree was drawn from a table.
    pub leaves: u64,
}

impl CellSystem {
    /// Extinction time rounded up to a grid of spacing `dt`.
    pub fn extinction_on_grid(&self, dt: f64) -> Option<f64> {
        self.extinction.map(|e| (e / dt).ceil() * dt)
    }
}

impl CellEngine {
    pub fn new(cfg: CellConfig) -> Result<Self> {
        cfg.validate()?;
        let lv = &cfg.levy;
        let octaves = (lv.exact / lv.delta).log2();
        let n = (octaves * LEVELS_PER_OCTAVE).ceil() as usize;
        let mut levels = Vec::with_capacity(n + 1);
        for j in 0..=n {
            let d = (lv.delta * (j as f64 / LEVELS_PER_OCTAVE).exp2()).min(lv.exact);
            levels.push(Band::new(lv.delta, d, lv.gaussian)?);
        }
        let mean_residual = -1.0 / psi(cfg.index.theta())?;
        let mut eng = CellEngine {
            cfg,
            levels,
            sampler: JumpSampler::new(),
            mean_residual,
            functional: Vec::new(),
            subtrees: Vec::new(),
        };
        if eng.cfg.leaf > 0.0 && eng.cfg.floor.is_finite() {
            eng.functional = eng.functional_table()?;
        }
        if eng.cfg.subtree_draws > 0 && eng.cfg.floor.is_finite() {
            eng.subtrees = eng.subtree_tables()?;
        }
        Ok(eng)
    }

    // Copy of this engine for systems from mass 1 with floor r and no reports.
    fn unit_engine(&self, floor: f64, subtrees: Vec<Vec<f64>>) -> CellEngine {
        let mut cfg = self.cfg.clone();
        cfg.x0 = 1.0;
        cfg.floor = floor;
        cfg.times.clear();
        cfg.horizon = f64::INFINITY;
        cfg.record_paths = false;
        CellEngine {
            cfg,
            levels: self.levels.clone(),
            sampler: self.sampler.clone(),
            mean_residual: self.mean_residual,
            functional: self.functional.clone(),
            subtrees,
        }
    }

    fn subtree_tables(&self) -> Result<Vec<Vec<f64>>> {
        let base = tagged_key(self.cfg.index.theta().to_bits(), "subtree extinction");
        let mut tables: Vec<Vec<f64>> = Vec::with_capacity(SUBTREE_GRID);
        for j in 0..SUBTREE_GRID {
            let r = 0.25f64.powf(j as f64 / (SUBTREE_GRID - 1) as f64);
            let eng = self.unit_engine(r, tables.clone());
            let key = child_key(base, j as u32);
            let mut draws: Vec<f64> = (0..self.cfg.subtree_draws)
                .map(|i| eng.run(child_key(key, i as u32)).extinction.unwrap_or(f64::NAN))
                .collect();
            if draws.iter().any(|x| !x.is_finite()) {
                return Err(Error::Numerical(format!("subtree table at r = {r}")));
            }
            draws.sort_unstable_by(f64::total_cmp);
            tables.push(draws);
        }
        Ok(tables)
    }

    // Extinction time of the subtree of a daughter of mass y, if tabulated.
    fn subtree_draw<R: Rng>(&self, y: f64, rng: &mut R) -> Option<f64> {
        let r = self.cfg.floor * self.cfg.x0 / y;
        if !(r > 0.25 * 0.999) {
            return None;
        }
        let j = subtree_index(r.min(1.0)).round() as usize;
        let table = self.subtrees.get(j)?;
        let i = (rng.random::<f64>() * table.len() as f64) as usize;
        Some(y.powf(self.cfg.index.theta()) * table[i.min(table.len() - 1)])
    }

    // Lifetimes of single cells from mass 1, with no spawning.
    fn functional_table(&self) -> Result<Vec<f64>> {
        let mut cfg = self.cfg.clone();
        cfg.x0 = 1.0;
        cfg.floor = f64::INFINITY;
        cfg.kill = 1e-10;
        cfg.times.clear();
        cfg.horizon = f64::INFINITY;
        cfg.leaf = 0.0;
        cfg.record_paths = false;
        let single = CellEngine {
            cfg,
            levels: self.levels.clone(),
            sampler: self.sampler.clone(),
            mean_residual: self.mean_residual,
            functional: Vec::new(),
            subtrees: Vec::new(),
        };
        let base = tagged_key(self.cfg.index.theta().to_bits(), "exponential functional");
        let mut out: Vec<f64> = (0..FUNCTIONAL_DRAWS as u64)
            .map(|i| single.run(child_key(base, i as u32)).extinction.unwrap_or(f64::NAN))
            .collect();
        if out.iter().any(|x| !x.is_finite()) {
            return Err(Error::Numerical("exponential functional table".into()));
        }
        out.sort_unstable_by(f64::total_cmp);
        Ok(out)
    }

    /// Mean of the exponential functional, `-1/Ψ(θ)`.
    pub fn mean_functional(&self) -> f64 {
        self.mean_residual
    }

    /// Sorted table of the exponential functional (empty when `leaf` is 0).
    pub fn functional(&self) -> &[f64] {
        &self.functional
    }

    pub fn sampler(&self) -> &JumpSampler {
        &self.sampler
    }

    fn level(&self, m: f64) -> &Band {
        let lv = &self.cfg.levy;
        let target = self.cfg.floor * self.cfg.x0 / m;
        if !(target > lv.delta) {
            return &self.levels[0];
        }
        let j = ((target / lv.delta).log2() * LEVELS_PER_OCTAVE).floor() as usize;
        &self.levels[j.min(self.levels.len() - 1)]
    }

    /// Simulate one system from the stream keyed by `key`.
    pub fn run(&self, key: u64) -> CellSystem {
        let cfg = &self.cfg;
        let mut sys = CellSystem {
            cells: Vec::new(),
            ranked: vec![Vec::new(); cfg.times.len()],
            extinction: Some(0.0),
            overflow: false,
            steps: 0,
            leaves: 0,
        };
        // (id, key, birth, mass)
        let mut stack = vec![(0u32, key, 0.0, cfg.x0)];
        sys.cells.push(Cell { parent: None, index: 0, birth: 0.0, mass0: cfg.x0, death: None, path: Vec::new() });
        while let Some((id, k, birth, m0)) = stack.pop() {
            self.run_cell(id, k, birth, m0, &mut sys, &mut stack);
        }
        for r in sys.ranked.iter_mut() {
            r.sort_unstable_by(|a, b| b.partial_cmp(a).unwrap());
            if cfg.top_k > 0 {
                r.truncate(cfg.top_k);
            }
        }
        sys
    }

    fn run_cell(
        &self,
        id: u32,
        key: u64,
        birth: f64,
        m0: f64,
        sys: &mut CellSystem,
        stack: &mut Vec<(u32, u64, f64, f64)>,
    ) {
        let cfg = &self.cfg;
        let theta = cfg.index.theta();
        let floor = cfg.floor * cfg.x0;
        let kill = cfg.kill * cfg.x0;
        let mut rng = stream(key);
        let mut kids = 0u32;
        let mut path = Vec::new();
        let (mut t, mut lm) = (birth, m0.ln());
        let mut qi = cfg.times.partition_point(|&x| x < birth);
        if cfg.record_paths {
            path.push((t, m0));
        }
        let leaf = !self.functional.is_empty();
        let mut leaf_max = 0.0f64;
        let death = loop {
            let m = lm.exp();
            if leaf && m < cfg.leaf * floor && qi >= cfg.times.len() {
                let i = (rng.random::<f64>() * self.functional.len() as f64) as usize;
                break Some(t + m.powf(theta) * self.functional[i.min(self.functional.len() - 1)]);
            }
            if m < kill {
                let d = t + m.powf(theta) * self.mean_residual;
                record(&cfg.times, &mut qi, &mut sys.ranked, t, d, |_| m);
                break Some(d);
            }
            let band = self.level(m);
            let wait = if band.rate > 0.0 {
                rng.sample::<f64, _>(Exp1) / band.rate
            } else {
                f64::INFINITY
            };
            let ds = wait.min(cfg.levy.max_step);
            let mut dx = band.drift * ds;
            if band.sigma > 0.0 {
                dx += band.sigma * ds.sqrt() * rng.sample::<f64, _>(StandardNormal);
            }
            sys.steps += 1;
            let dt = m.powf(theta) * ds * expm1_ratio(theta * dx);
            let slope = dx / ds;
            let end = (t + dt).min(cfg.horizon);
            record(&cfg.times, &mut qi, &mut sys.ranked, t, end, |s| mass_along(m, s - t, theta, slope));
            if t + dt >= cfg.horizon {
                if cfg.record_paths {
                    path.push((cfg.horizon, mass_along(m, cfg.horizon - t, theta, slope)));
                }
                break None;
            }
            t += dt;
            lm += dx;
            if cfg.record_paths {
                path.push((t, lm.exp()));
            }
            if wait <= ds {
                let u = self.sampler.sample_with_rate(band.rate, 1.0 - rng.random::<f64>());
                let before = lm.exp();
                let y = u * before;
                lm += (-u).ln_1p();
                if cfg.record_paths {
                    path.push((t, lm.exp()));
                }
                if y >= floor {
                    let settled = if cfg.times.last().is_none_or(|&last| last < t) {
                        self.subtree_draw(y, &mut rng)
                    } else {
                        None
                    };
                    if let Some(d) = settled {
                        sys.leaves += 1;
                        leaf_max = leaf_max.max(t + d);
                    } else if sys.cells.len() < cfg.cell_cap {
                        kids += 1;
                        let cid = sys.cells.len() as u32;
                        sys.cells.push(Cell {
                            parent: Some(id),
                            index: kids,
                            birth: t,
                            mass0: y,
                            death: None,
                            path: Vec::new(),
                        });
                        stack.push((cid, child_key(key, kids), t, y));
                    } else {
                        sys.overflow = true;
                    }
                }
            }
        };
        let death = death.map(|d| d.max(leaf_max));
        let cell = &mut sys.cells[id as usize];
        cell.death = death;
        cell.path = path;
        sys.extinction = match (sys.extinction, death) {
            (Some(e), Some(d)) => Some(e.max(d)),
            _ => None,
        };
    }
}

// Report the mass at every report time in [from, to).
fn record<F: Fn(f64) -> f64>(times: &[f64], qi: &mut usize, out: &mut [Vec<f64>], from: f64, to: f64, mass: F) {
    while *qi < times.len() && times[*qi] < to {
        if times[*qi] >= from {
            out[*qi].push(mass(times[*qi]));
        }
        *qi += 1;
    }
}

/// Simulate one cell system with a fresh engine.
pub fn simulate_cell_system(cfg: CellConfig, key: u64) -> Result<CellSystem> {
    Ok(CellEngine::new(cfg)?.run(key))
}
