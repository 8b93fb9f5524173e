//! The locally largest cycle.
//!
//! Follow the larger child at every split. Kernel-driven paths use the
//! transition row directly; engine-driven paths carry the boundary marks and
//! so also know the height of the cycle.

use rand::RngCore;

use crate::error::{Error, Result};
use crate::kernel::{llc_drift, sample_event_fast, Event, OddSplit};
use crate::rng::{root_key, stream};
use crate::weights::{cycle_weight, WeightTable};

/// Default step cap `64 p^{3/2}`.
pub fn default_step_cap(p0: usize) -> u64 {
    (64.0 * (p0 as f64).powf(1.5)).ceil() as u64
}

/// Path of the locally largest cycle.
#[derive(Debug, Clone, Default)]
pub struct LlcPath {
    /// `L̃_0, L̃_1, ...`; ends with 0 when absorbed.
    pub values: Vec<usize>,
    /// Height of the cycle after each step (engine-driven paths only).
    pub heights: Vec<u32>,
    pub absorbed: bool,
}

impl LlcPath {
    /// `L̃_n`, or 0 after absorption; `None` past a cap.
    pub fn at(&self, n: usize) -> Option<usize> {
        match self.values.get(n) {
            Some(&v) => Some(v),
            None if self.absorbed => Some(0),
            None => None,
        }
    }

    /// Step at which the chain hit 0.
    pub fn absorption_step(&self) -> Option<usize> {
        self.absorbed.then(|| self.values.len() - 1)
    }
}

fn next_value(p: usize, ev: Event, rule: OddSplit) -> usize {
    match ev {
        Event::C => p + 1,
        Event::V => 0,
        Event::G(k) => {
            let (a, b) = (k + 1, p - k);
            if a == b && rule == OddSplit::Literal {
                a - 1
            } else {
                a.max(b)
            }
        }
    }
}

/// Run the chain with kernel `b(p, .)` from `p0` for at most `cap` steps.
pub fn simulate_llc<R: RngCore>(
    w: &mut WeightTable,
    p0: usize,
    rule: OddSplit,
    cap: u64,
    rng: &mut R,
) -> Result<LlcPath> {
    if p0 == 0 {
        return Err(Error::InvalidArgument("perimeter must be >= 1".into()));
    }
    let mut path = LlcPath { values: vec![p0], ..Default::default() };
    let mut p = p0;
    for _ in 0..cap {
        if p + 1 > w.p_max() {
            w.extend_to(2 * (p + 1));
        }
        p = next_value(p, sample_event_fast(w, p, rng.next_u64()), rule);
        path.values.push(p);
        if p == 0 {
            path.absorbed = true;
            break;
        }
    }
    Ok(path)
}

/// Run the locally largest cycle of the layered exploration of sample `sample`.
///
/// This is the root individual of [`crate::layers::Explorer`] and uses the
/// same random stream, so it matches the root twig of a full exploration.
pub fn simulate_llc_engine(
    w: &mut WeightTable,
    p0: usize,
    seed: u64,
    sample: u64,
    cap: u64,
) -> Result<LlcPath> {
    if p0 == 0 {
        return Err(Error::InvalidArgument("perimeter must be >= 1".into()));
    }
    let mut rng = stream(root_key(seed, sample));
    let (mut p, mut low, mut base) = (p0, p0, 0u32);
    let mut path = LlcPath { values: vec![p0], heights: vec![0], absorbed: false };
    for _ in 0..cap {
        if p + 1 > w.p_max() {
            w.extend_to(2 * (p + 1));
        }
        match sample_event_fast(w, p, rng.next_u64()) {
            Event::C => p += 1,
            Event::V => {
                path.values.push(0);
                path.heights.push(base);
                path.absorbed = true;
                return Ok(path);
            }
            Event::G(k) => {
                let (pa, la) = (k + 1, (k + 1).min(low));
                let (pb, lb) = (p - k, low.saturating_sub(k));
                (p, low) = if pa >= pb { (pa, la) } else { (pb, lb) };
                if low == 0 {
                    base += 1;
                    low = p;
                }
            }
        }
        path.values.push(p);
        path.heights.push(base);
    }
    Ok(path)
}

/// `L(r)`: perimeter of the locally largest cycle when it first reaches height `r`.
///
/// Returns one value per `r = 0..=r_max`; 0 after absorption, `None` where the
/// path was cut by its cap.
pub fn llc_at_heights(path: &LlcPath, r_max: u32) -> Vec<Option<usize>> {
    let mut out = vec![None; r_max as usize + 1];
    for (i, &h) in path.heights.iter().enumerate() {
        let v = path.values[i];
        if v == 0 {
            break;
        }
        for slot in out.iter_mut().take(h.min(r_max) as usize + 1) {
            if slot.is_none() {
                *slot = Some(v);
            }
        }
    }
    if path.absorbed {
        for slot in out.iter_mut() {
            if slot.is_none() {
                *slot = Some(0);
            }
        }
    }
    out
}

/// Height reached when the chain is absorbed.
pub fn absorption_height(path: &LlcPath) -> Option<u32> {
    if path.absorbed {
        path.heights.last().copied()
    } else {
        None
    }
}

/// Largest `Δ(p) / f(p)` over `1 <= p <= p_max`, where `Δ(p) = Σ_y b(p,y) f(y) - f(p)`.
pub fn supermartingale_sweep(w: &WeightTable, p_max: usize, rule: OddSplit) -> Result<(usize, f64)> {
    let mut worst = (0, f64::NEG_INFINITY);
    for p in 1..=p_max {
        let r = llc_drift(w, p, rule)? / cycle_weight(p);
        if r > worst.1 {
            worst = (p, r);
        }
    }
    Ok(worst)
}
