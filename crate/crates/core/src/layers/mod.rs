//! Branching peeling by layers.

mod engine;
mod marks;

pub use engine::{Explorer, Fate, FrozenMode, HoleView, Limits, RunStats, Schedule, Tracker};
pub use marks::{apply_event, select_peel_edge, CycleState, Outcome};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::weights::{cycle_weight, volume_weight};

#[derive(Debug, Clone)]
pub struct ExploreConfig {
    pub p0: usize,
    pub seed: u64,
    pub sample: u64,
    /// Holes born with perimeter below `cutoff * p0` are frozen.
    pub cutoff: Option<f64>,
    pub limits: Limits,
    pub genealogy: bool,
}

impl ExploreConfig {
    pub fn new(p0: usize, seed: u64) -> Self {
        ExploreConfig {
            p0,
            seed,
            sample: 0,
            cutoff: None,
            limits: Limits { max_height: Some(Limits::default_height(p0)), ..Limits::default() },
            genealogy: false,
        }
    }
}

/// One individual of the genealogy.
#[derive(Debug, Clone, Serialize)]
pub struct Individual {
    pub parent: Option<u32>,
    /// Birth rank among the parent's children, from 1.
    pub index: u32,
    pub birth_height: u32,
    pub birth_perimeter: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct FrozenHole {
    pub individual: u32,
    pub perimeter: usize,
    pub low: usize,
    /// Base height of the parent when the hole was created.
    pub base: u32,
    /// Largest height of an inner vertex of the hole, if it was explored.
    pub max_vertex_height: Option<u32>,
}

impl FrozenHole {
    /// Height of the hole's own triangulation measured from its boundary.
    ///
    /// Boundary vertices sit at `base` or `base + 1`, so this can be one too low.
    pub fn inner_height(&self) -> u32 {
        self.max_vertex_height.map_or(0, |h| h.saturating_sub(self.base + 1) + 1)
    }
}

/// Record of one exploration.
#[derive(Debug, Clone, Default)]
pub struct Trace {
    pub p0: usize,
    /// Perimeters of the cycles at each height, largest first; lost cycles excluded.
    pub snapshots: Vec<Vec<usize>>,
    /// `Σ ℓ³` over lost cycles at each height.
    pub lost_cubes: Vec<f64>,
    /// Inner vertices at each height, lost ones excluded.
    pub volume_by_height: Vec<u64>,
    pub frozen: Vec<FrozenHole>,
    pub genealogy: Vec<Individual>,
    pub stats: RunStats,
}

impl Trace {
    /// Height of the triangulation: largest height of an inner vertex.
    pub fn height(&self) -> u32 {
        self.stats.height
    }

    pub fn volume(&self) -> u64 {
        self.stats.volume
    }

    /// `sup_r Σ ℓ³` over lost cycles, normalised by `p0³`.
    pub fn lost_mass(&self) -> f64 {
        let p3 = (self.p0 as f64).powi(3);
        self.lost_cubes.iter().cloned().fold(0.0, f64::max) / p3
    }

    /// Perimeters at height `r`, largest first.
    pub fn at_height(&self, r: usize) -> &[usize] {
        self.snapshots.get(r).map_or(&[], |v| v.as_slice())
    }
}

#[derive(Clone, Copy)]
pub struct TraceTag {
    id: u32,
    hole: u32,
}

struct TraceTracker<'a> {
    trace: &'a mut Trace,
    threshold: Option<f64>,
    genealogy: bool,
}

impl TraceTracker<'_> {
    fn grow<T: Default + Clone>(v: &mut Vec<T>, i: usize) -> &mut T {
        if v.len() <= i {
            v.resize(i + 1, T::default());
        }
        &mut v[i]
    }
}

impl Tracker for TraceTracker<'_> {
    type Tag = TraceTag;

    fn root(&mut self, p0: usize) -> TraceTag {
        if self.genealogy {
            self.trace.genealogy.push(Individual {
                parent: None,
                index: 0,
                birth_height: 0,
                birth_perimeter: p0,
            });
        }
        TraceTag { id: 0, hole: u32::MAX }
    }

    fn spawn(&mut self, parent: &TraceTag, index: u32, child: &HoleView, birth: u32) -> TraceTag {
        let mut id = 0;
        if self.genealogy {
            id = self.trace.genealogy.len() as u32;
            self.trace.genealogy.push(Individual {
                parent: Some(parent.id),
                index,
                birth_height: birth,
                birth_perimeter: child.perimeter,
            });
        }
        TraceTag { id, hole: parent.hole }
    }

    fn created(&mut self, tag: &mut TraceTag, child: &HoleView, birth: u32) -> Fate {
        match self.threshold {
            Some(c) if (child.perimeter as f64) < c => {
                tag.hole = self.trace.frozen.len() as u32;
                self.trace.frozen.push(FrozenHole {
                    individual: tag.id,
                    perimeter: child.perimeter,
                    low: child.low,
                    base: birth,
                    max_vertex_height: None,
                });
                Fate::Freeze
            }
            _ => Fate::Explore,
        }
    }

    fn vertex(&mut self, tag: &TraceTag, height: u32, lost: bool) {
        if lost {
            let h = &mut self.trace.frozen[tag.hole as usize].max_vertex_height;
            *h = Some(h.map_or(height, |x| x.max(height)));
        } else {
            *Self::grow(&mut self.trace.volume_by_height, height as usize) += 1;
        }
    }

    fn layer(&mut self, _tag: &TraceTag, view: &HoleView) {
        let r = view.base as usize;
        if view.lost {
            *Self::grow(&mut self.trace.lost_cubes, r) += (view.perimeter as f64).powi(3);
        } else {
            Self::grow(&mut self.trace.snapshots, r).push(view.perimeter);
        }
    }
}

/// Explore one Boltzmann triangulation by layers.
pub fn explore(cfg: &ExploreConfig) -> Result<Trace> {
    let mut ex = Explorer::new(cfg.p0);
    explore_with(&mut ex, cfg)
}

/// As [`explore`], reusing an [`Explorer`].
pub fn explore_with(ex: &mut Explorer, cfg: &ExploreConfig) -> Result<Trace> {
    if cfg.p0 == 0 {
        return Err(Error::InvalidArgument("perimeter must be >= 1".into()));
    }
    if let Some(eps) = cfg.cutoff {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::InvalidArgument(format!("cutoff {eps} outside (0, 1)")));
        }
    }
    let mut trace = Trace { p0: cfg.p0, ..Default::default() };
    let mut tr = TraceTracker {
        trace: &mut trace,
        threshold: cfg.cutoff.map(|e| e * cfg.p0 as f64),
        genealogy: cfg.genealogy,
    };
    let stats = ex.run(cfg.p0, cfg.seed, cfg.sample, &cfg.limits, &mut tr);
    trace.stats = stats;
    for s in trace.snapshots.iter_mut() {
        s.sort_unstable_by(|a, b| b.cmp(a));
    }
    Ok(trace)
}

/// `(M, V)` at the layer times `θ_0, θ_1, ...`, rebuilt from a trace.
///
/// `M = Σ f(ℓ)` and `V = |H| + Σ g(ℓ)` over live and frozen holes. After the
/// last layer the sequence is extended to `r_max` with its final value.
pub fn martingale_at_layers(trace: &Trace, r_max: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(r_max + 1);
    let mut vol = 0u64;
    for r in 0..=r_max {
        vol += trace.volume_by_height.get(r).copied().unwrap_or(0);
        let mut m = 0.0;
        let mut v = vol as f64;
        for &p in trace.at_height(r) {
            m += cycle_weight(p);
            v += volume_weight(p);
        }
        for fz in trace.frozen.iter().filter(|f| (f.base as usize) < r) {
            m += cycle_weight(fz.perimeter);
            v += volume_weight(fz.perimeter);
        }
        out.push((m, v));
    }
    out
}

/// Dotted Ulam label of individual `id`; the root is `∅`.
pub fn ulam_label(genealogy: &[Individual], id: u32) -> String {
    let mut parts = Vec::new();
    let mut cur = id;
    while let Some(p) = genealogy[cur as usize].parent {
        parts.push(genealogy[cur as usize].index.to_string());
        cur = p;
    }
    if parts.is_empty() {
        return "∅".into();
    }
    parts.reverse();
    parts.join(".")
}
