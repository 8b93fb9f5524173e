//! Compact peeling-by-layers engine.
//!
//! With the peeled edge always at the start of the low arc, a hole is a
//! rotation of `low^a high^(p-a)` and is fully described by `(p, a, r)`.
//! [`super::marks`] holds the explicit-marks version used to check this.

use rand::RngCore;

use crate::kernel::{sample_event_fast, Event};
use crate::rng::{child_key, root_key, stream, Stream};
use crate::weights::{cycle_weight, volume_weight, WeightTable};

/// Read-only view of a hole passed to trackers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HoleView {
    pub perimeter: usize,
    /// Vertices at the base height.
    pub low: usize,
    pub base: u32,
    /// Descends from a frozen hole.
    pub lost: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fate {
    Explore,
    Freeze,
}

/// Order in which holes are processed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Schedule {
    /// Depth-first, each hole run to completion.
    #[default]
    Independent,
    /// Layer by layer; required for quantities at the global layer times.
    Synchronized,
}

/// What happens to frozen holes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FrozenMode {
    /// Frozen holes are never peeled.
    #[default]
    Stop,
    /// Frozen holes are peeled further; everything inside is flagged lost.
    Continue,
}

/// Observer of an exploration.
///
/// Each individual (left twig of the genealogy) carries a tag.
pub trait Tracker {
    type Tag;

    fn root(&mut self, p0: usize) -> Self::Tag;

    /// A new individual split off `parent`; `index` is its birth rank among the parent's children.
    fn spawn(&mut self, parent: &Self::Tag, index: u32, child: &HoleView, birth_base: u32) -> Self::Tag;

    /// Called for both children of every split, before any layer completion is reported.
    fn created(&mut self, _tag: &mut Self::Tag, _child: &HoleView, _birth_base: u32) -> Fate {
        Fate::Explore
    }

    /// A new inner vertex at `height`.
    fn vertex(&mut self, _tag: &Self::Tag, _height: u32, _lost: bool) {}

    /// The hole is a cycle at height `view.base`: all its vertices sit there.
    fn layer(&mut self, _tag: &Self::Tag, _view: &HoleView) {}

    fn closed(&mut self, _tag: &Self::Tag, _view: &HoleView) {}

    fn frozen(&mut self, _tag: &Self::Tag, _view: &HoleView) {}
}

#[derive(Debug, Clone)]
pub struct Limits {
    pub max_height: Option<u32>,
    pub step_cap: u64,
    pub schedule: Schedule,
    pub frozen: FrozenMode,
    /// Record `(M, V)` at every layer time; needs [`Schedule::Synchronized`].
    pub martingales: bool,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_height: None,
            step_cap: 1_000_000_000,
            schedule: Schedule::Independent,
            frozen: FrozenMode::Stop,
            martingales: false,
        }
    }
}

impl Limits {
    /// Default height budget `32 √p0`.
    pub fn default_height(p0: usize) -> u32 {
        (32.0 * (p0 as f64).sqrt()).ceil() as u32
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunStats {
    pub steps: u64,
    /// Inner vertices revealed outside frozen holes.
    pub volume: u64,
    /// Inner vertices revealed inside frozen holes.
    pub volume_lost: u64,
    /// Largest height of a revealed vertex.
    pub height: u32,
    /// Step cap not hit.
    pub complete: bool,
    /// Some hole was left unexplored at the height budget.
    pub truncated: bool,
    /// `(M, V)` at layer times `θ_0, θ_1, ...`.
    pub martingales: Vec<(f64, f64)>,
}

struct Hole<T> {
    p: usize,
    low: usize,
    base: u32,
    lost: bool,
    key: u64,
    kids: u32,
    rng: Stream,
    tag: T,
}

impl<T> Hole<T> {
    fn view(&self) -> HoleView {
        HoleView { perimeter: self.p, low: self.low, base: self.base, lost: self.lost }
    }
}

/// Reusable exploration context owning a growable weight table.
#[derive(Debug, Clone)]
pub struct Explorer {
    weights: WeightTable,
}

impl Explorer {
    pub fn new(p_hint: usize) -> Self {
        let cap = (4 * p_hint).max(64);
        Explorer { weights: WeightTable::new(cap).expect("table size within limits") }
    }

    pub fn weights(&self) -> &WeightTable {
        &self.weights
    }

    /// Explore the Boltzmann triangulation of the `p0`-gon of sample `sample`.
    pub fn run<T: Tracker>(
        &mut self,
        p0: usize,
        seed: u64,
        sample: u64,
        limits: &Limits,
        tracker: &mut T,
    ) -> RunStats {
        assert!(p0 >= 1, "perimeter must be >= 1");
        let key = root_key(seed, sample);
        let root = Hole {
            p: p0,
            low: p0,
            base: 0,
            lost: false,
            key,
            kids: 0,
            rng: stream(key),
            tag: tracker.root(p0),
        };
        let mut st = RunState {
            stats: RunStats { complete: true, ..Default::default() },
            frozen_f: 0.0,
            frozen_g: 0.0,
        };
        tracker.layer(&root.tag, &root.view());
        let max_h = limits.max_height.unwrap_or(u32::MAX);
        let sync = limits.schedule == Schedule::Synchronized;
        let track_mg = limits.martingales && sync;
        if track_mg {
            st.stats.martingales.push((cycle_weight(p0), volume_weight(p0)));
        }
        if max_h == 0 {
            st.stats.truncated = true;
            return st.stats;
        }
        let mut current = vec![root];
        let mut next: Vec<Hole<T::Tag>> = Vec::new();
        let mut layer = 0u32;
        loop {
            while let Some(h) = current.pop() {
                if !self.advance(h, &mut current, &mut next, sync, max_h, limits, tracker, &mut st) {
                    return st.stats;
                }
            }
            if !sync {
                break;
            }
            layer += 1;
            if track_mg {
                let (mut m, mut v) = (st.frozen_f, st.stats.volume as f64 + st.frozen_g);
                for h in next.iter().filter(|h| !h.lost) {
                    m += cycle_weight(h.p);
                    v += volume_weight(h.p);
                }
                st.stats.martingales.push((m, v));
            }
            if next.is_empty() {
                break;
            }
            if layer >= max_h {
                st.stats.truncated = true;
                break;
            }
            std::mem::swap(&mut current, &mut next);
        }
        st.stats
    }

    // Runs one hole until it closes, freezes, is parked for the next layer or
    // hits the height budget. Returns false when the step cap is hit.
    #[allow(clippy::too_many_arguments)]
    fn advance<T: Tracker>(
        &mut self,
        mut h: Hole<T::Tag>,
        stack: &mut Vec<Hole<T::Tag>>,
        next: &mut Vec<Hole<T::Tag>>,
        sync: bool,
        max_h: u32,
        limits: &Limits,
        tracker: &mut T,
        st: &mut RunState,
    ) -> bool {
        loop {
            if st.stats.steps >= limits.step_cap {
                st.stats.complete = false;
                return false;
            }
            if h.p + 1 > self.weights.p_max() {
                self.weights.extend_to(2 * (h.p + 1));
            }
            let ev = sample_event_fast(&self.weights, h.p, h.rng.next_u64());
            st.stats.steps += 1;
            match ev {
                Event::C => {
                    let hv = h.base + 1;
                    if h.lost {
                        st.stats.volume_lost += 1;
                    } else {
                        st.stats.volume += 1;
                    }
                    st.stats.height = st.stats.height.max(hv);
                    tracker.vertex(&h.tag, hv, h.lost);
                    h.p += 1;
                }
                Event::V => {
                    tracker.closed(&h.tag, &h.view());
                    return true;
                }
                Event::G(k) => {
                    let birth = h.base;
                    let (pa, la) = (k + 1, (k + 1).min(h.low));
                    let (pb, lb) = (h.p - k, h.low.saturating_sub(k));
                    // the larger child continues the twig; ties go to the child
                    // holding the first low vertex
                    let (keep, split) = if pa >= pb { ((pa, la), (pb, lb)) } else { ((pb, lb), (pa, la)) };
                    h.kids += 1;
                    let index = h.kids;
                    let ckey = child_key(h.key, index);
                    let mut c = Hole {
                        p: split.0,
                        low: split.1,
                        base: birth,
                        lost: h.lost,
                        key: ckey,
                        kids: 0,
                        rng: stream(ckey),
                        tag: tracker.spawn(&h.tag, index, &view_of(split, birth, h.lost), birth),
                    };
                    h.p = keep.0;
                    h.low = keep.1;
                    let fate_h = settle(&mut h, birth, tracker, st);
                    let fate_c = settle(&mut c, birth, tracker, st);
                    let place = Place { birth, sync, max_h, mode: limits.frozen };
                    if let Some(c) = place.dispose(c, fate_c, next, st) {
                        stack.push(c);
                    }
                    match place.dispose(h, fate_h, next, st) {
                        Some(hh) => h = hh,
                        None => return true,
                    }
                }
            }
        }
    }
}

// Freeze decision for a freshly created hole, then layer completion.
fn settle<T: Tracker>(h: &mut Hole<T::Tag>, birth: u32, tracker: &mut T, st: &mut RunState) -> Fate {
    let fate = if h.lost {
        Fate::Explore
    } else {
        let v = h.view();
        tracker.created(&mut h.tag, &v, birth)
    };
    if fate == Fate::Freeze {
        st.frozen_f += cycle_weight(h.p);
        st.frozen_g += volume_weight(h.p);
        h.lost = true;
        tracker.frozen(&h.tag, &h.view());
    }
    if h.low == 0 {
        h.base += 1;
        h.low = h.p;
        tracker.layer(&h.tag, &h.view());
    }
    fate
}

struct Place {
    birth: u32,
    sync: bool,
    max_h: u32,
    mode: FrozenMode,
}

impl Place {
    // Returns the hole if it should keep being peeled in the current pass.
    fn dispose<T>(&self, h: Hole<T>, fate: Fate, next: &mut Vec<Hole<T>>, st: &mut RunState) -> Option<Hole<T>> {
        if fate == Fate::Freeze && self.mode == FrozenMode::Stop {
            return None;
        }
        if h.base > self.birth {
            if self.sync {
                next.push(h);
                return None;
            }
            if h.base >= self.max_h {
                st.stats.truncated = true;
                return None;
            }
        }
        Some(h)
    }
}

fn view_of(c: (usize, usize), base: u32, lost: bool) -> HoleView {
    HoleView { perimeter: c.0, low: c.1, base, lost }
}

struct RunState {
    stats: RunStats,
    frozen_f: f64,
    frozen_g: f64,
}
