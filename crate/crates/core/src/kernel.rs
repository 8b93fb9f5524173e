//! One-step peeling laws.
//!
//! Sampling uses sequential inversion over symmetric pairs `{k, p-1-k}`:
//! one uniform picks the event class and a separate bit picks the side.
//! The pair masses decay like `k^{-5/2}`, so the expected scan length is O(1)
//! and no per-perimeter table is needed.

use rand::RngCore;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::weights::{cycle_weight, WeightTable, SQRT3};

/// A peeling event on a cycle of perimeter `p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Event {
    /// New inner vertex; perimeter grows by one.
    C,
    /// Third vertex `k` edges clockwise from the peeled edge; children `k+1` and `p-k`.
    G(usize),
    /// The 2-gon closes.
    V,
}

impl Event {
    /// Perimeters produced by the event on a cycle of perimeter `p`.
    pub fn children(self, p: usize) -> (usize, usize) {
        match self {
            Event::C => (p + 1, 0),
            Event::G(k) => (k + 1, p - k),
            Event::V => (0, 0),
        }
    }
}

/// Split a raw 64-bit draw into a uniform in `[0, 1)` and a side bit.
#[inline]
pub fn split_draw(x: u64) -> (f64, bool) {
    ((x >> 11) as f64 * (1.0 / (1u64 << 53) as f64), x & 1 == 1)
}

/// Step law of the peeling of a Boltzmann triangulation of the p-gon.
#[derive(Debug, Clone, Serialize)]
pub struct StepLaw {
    pub p: usize,
    /// Masses in event order C, G_0, ..., G_{p-1}, V (V only for p = 2).
    pub masses: Vec<f64>,
    #[serde(skip)]
    pairs: Vec<f64>,
}

impl StepLaw {
    pub fn events(&self) -> impl Iterator<Item = (Event, f64)> + '_ {
        let p = self.p;
        self.masses.iter().enumerate().map(move |(i, &m)| {
            let e = match i {
                0 => Event::C,
                i if i <= p => Event::G(i - 1),
                _ => Event::V,
            };
            (e, m)
        })
    }

    pub fn mass(&self, e: Event) -> f64 {
        match e {
            Event::C => self.masses[0],
            Event::G(k) if k < self.p => self.masses[k + 1],
            Event::V if self.p == 2 => self.masses[self.p + 1],
            _ => 0.0,
        }
    }

    pub fn total(&self) -> f64 {
        self.masses.iter().sum()
    }

    /// Deterministic inversion: `u` selects C, a pair, the middle split or V; `side`
    /// chooses `k` or `p-1-k` within a pair.
    pub fn event_at(&self, u: f64, side: bool) -> Event {
        invert_pairs(self.p, &self.pairs, u, side)
    }

    pub fn sample<R: RngCore>(&self, rng: &mut R) -> Event {
        let (u, side) = split_draw(rng.next_u64());
        self.event_at(u, side)
    }
}

// Layout of `pairs`: [C, pair_0, ..., pair_{m-1}, (middle), (V)].
fn invert_pairs(p: usize, pairs: &[f64], mut u: f64, side: bool) -> Event {
    let n_pairs = p / 2;
    let odd = p % 2 == 1;
    if u < pairs[0] {
        return Event::C;
    }
    u -= pairs[0];
    for k in 0..n_pairs {
        let m = pairs[1 + k];
        if u < m {
            return Event::G(if side { p - 1 - k } else { k });
        }
        u -= m;
    }
    if odd {
        return Event::G(n_pairs);
    }
    if p == 2 {
        return Event::V;
    }
    // rounding fall-through: last pair
    let k = n_pairs - 1;
    Event::G(if side { p - 1 - k } else { k })
}

fn check_table(w: &WeightTable, p: usize) -> Result<()> {
    if p == 0 {
        return Err(Error::InvalidArgument("perimeter must be >= 1".into()));
    }
    if p + 1 > w.p_max() {
        return Err(Error::InvalidArgument(format!(
            "perimeter {p} needs a weight table up to {}, have {}",
            p + 1,
            w.p_max()
        )));
    }
    Ok(())
}

/// `b_{-1}^{(p)}`, the probability of event C.
#[inline]
pub fn b_grow(w: &WeightTable, p: usize) -> f64 {
    w.reduced(p + 1) / (w.reduced(p) * SQRT3)
}

/// `b_k^{(p)} = Z(k+1) Z(p-k) / Z(p)`.
#[inline]
pub fn b_split(w: &WeightTable, p: usize, k: usize) -> f64 {
    w.reduced(k + 1) * w.reduced(p - k) * (1.0 / w.reduced(p))
}

/// `log b_k^{(p)}`.
pub fn log_b_split(w: &WeightTable, p: usize, k: usize) -> f64 {
    w.reduced_log(k + 1) + w.reduced_log(p - k) - w.reduced_log(p)
}

/// `b_∅^{(2)} = 1 / Z(2)`.
pub fn b_close() -> f64 {
    4.0 / (3.0 * SQRT3)
}

/// One-step law of the peeling on the p-gon.
pub fn step_law(w: &WeightTable, p: usize) -> Result<StepLaw> {
    check_table(w, p)?;
    let inv = 1.0 / w.reduced(p);
    let mut masses = Vec::with_capacity(p + 2);
    masses.push(b_grow(w, p));
    for k in 0..p {
        masses.push(w.reduced(k + 1) * w.reduced(p - k) * inv);
    }
    if p == 2 {
        masses.push(b_close());
    }
    let mut pairs = Vec::with_capacity(p / 2 + 3);
    pairs.push(masses[0]);
    for k in 0..p / 2 {
        pairs.push(2.0 * w.reduced(k + 1) * w.reduced(p - k) * inv);
    }
    if p % 2 == 1 {
        pairs.push(masses[1 + p / 2]);
    }
    if p == 2 {
        pairs.push(b_close());
    }
    Ok(StepLaw { p, masses, pairs })
}

/// Sample an event of the step law at `p` without materialising the law.
///
/// Uses the same arithmetic as [`StepLaw::event_at`], so both routes agree
/// draw for draw.
#[inline]
pub fn sample_event_fast(w: &WeightTable, p: usize, x: u64) -> Event {
    let (mut u, side) = split_draw(x);
    let inv = 1.0 / w.reduced(p);
    let mc = b_grow(w, p);
    if u < mc {
        return Event::C;
    }
    u -= mc;
    let n_pairs = p / 2;
    for k in 0..n_pairs {
        let m = 2.0 * w.reduced(k + 1) * w.reduced(p - k) * inv;
        if u < m {
            return Event::G(if side { p - 1 - k } else { k });
        }
        u -= m;
    }
    if p % 2 == 1 {
        return Event::G(n_pairs);
    }
    if p == 2 {
        return Event::V;
    }
    let k = n_pairs - 1;
    Event::G(if side { p - 1 - k } else { k })
}

/// Sample an event from a materialised law.
pub fn sample_event<R: RngCore>(law: &StepLaw, rng: &mut R) -> Event {
    law.sample(rng)
}

/// Half-plane limit masses.
pub mod half_plane {
    use super::*;

    /// `q_{-1} = 1/√3`.
    pub fn q_grow() -> f64 {
        1.0 / SQRT3
    }

    /// `q_k = 12^{-k} Z(k+1)`.
    pub fn q(w: &WeightTable, k: usize) -> f64 {
        w.q(k)
    }

    /// `q_{-1} + 2 Σ q_k - 1` with the tail beyond `k_max` included exactly.
    pub fn mass_defect(w: &WeightTable, k_max: usize) -> f64 {
        let (s, tail) = w.q_sum(k_max);
        q_grow() + 2.0 * (s + tail) - 1.0
    }

    /// `q_{-1} - 2 Σ k q_k`, zero for the critical walk.
    pub fn drift(w: &WeightTable, k_max: usize) -> f64 {
        let (s, tail) = w.kq_sum(k_max);
        q_grow() - 2.0 * (s + tail)
    }
}

/// Resolution of the equal split at odd perimeter in the locally largest cycle kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum OddSplit {
    /// Middle mass goes to `m` when `p = 2m + 1`, as in the transition formula.
    #[default]
    Literal,
    /// Middle mass goes to `m + 1`, the actual size of both children.
    Larger,
}

impl std::str::FromStr for OddSplit {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "literal" => Ok(OddSplit::Literal),
            "larger" => Ok(OddSplit::Larger),
            _ => Err(Error::InvalidArgument(format!("unknown odd-split rule {s}"))),
        }
    }
}

/// One row of the locally largest cycle kernel.
#[derive(Debug, Clone, Serialize)]
pub struct LlcRow {
    pub p: usize,
    /// `(target, mass)` pairs, targets strictly decreasing.
    pub entries: Vec<(usize, f64)>,
}

impl LlcRow {
    pub fn total(&self) -> f64 {
        self.entries.iter().map(|e| e.1).sum()
    }

    pub fn mass(&self, y: usize) -> f64 {
        self.entries.iter().filter(|e| e.0 == y).map(|e| e.1).sum()
    }
}

/// Transition row `b(p, .)` of the locally largest cycle chain.
pub fn llc_kernel(w: &WeightTable, p: usize, rule: OddSplit) -> Result<LlcRow> {
    check_table(w, p)?;
    let mut entries = vec![(p + 1, b_grow(w, p))];
    let mut k = 0;
    while 2 * k + 1 < p {
        entries.push((p - k, 2.0 * b_split(w, p, k)));
        k += 1;
    }
    if p % 2 == 1 {
        let m = (p - 1) / 2;
        let target = match rule {
            OddSplit::Literal => m,
            OddSplit::Larger => m + 1,
        };
        entries.push((target, b_split(w, p, m)));
    }
    if p == 2 {
        entries.push((0, b_close()));
    }
    Ok(LlcRow { p, entries })
}

/// `Σ_y b(p, y) f(y) - f(p)`; non-positive for every `p`.
pub fn llc_drift(w: &WeightTable, p: usize, rule: OddSplit) -> Result<f64> {
    let row = llc_kernel(w, p, rule)?;
    let s: f64 = row.entries.iter().map(|&(y, m)| m * cycle_weight(y)).sum();
    Ok(s - cycle_weight(p))
}

/// Step law on the distinguished hole of the UIPT of the p-gon.
///
/// Each Boltzmann mass is multiplied by the total cycle weight of its
/// children over `f(p)`. V has mass zero.
pub fn uipt_step_law(w: &WeightTable, p: usize) -> Result<StepLaw> {
    let law = step_law(w, p)?;
    let fp = cycle_weight(p);
    let mut masses = Vec::with_capacity(law.masses.len());
    masses.push(law.masses[0] * cycle_weight(p + 1) / fp);
    for k in 0..p {
        masses.push(law.masses[k + 1] * (cycle_weight(k + 1) + cycle_weight(p - k)) / fp);
    }
    if p == 2 {
        masses.push(0.0);
    }
    let total: f64 = masses.iter().sum();
    if (total - 1.0).abs() > 1e-8 {
        return Err(Error::Numerical(format!(
            "reweighted law at p={p} sums to {total}"
        )));
    }
    let mut pairs = Vec::with_capacity(p / 2 + 3);
    pairs.push(masses[0]);
    for k in 0..p / 2 {
        pairs.push(masses[k + 1] + masses[p - k]);
    }
    if p % 2 == 1 {
        pairs.push(masses[1 + p / 2]);
    }
    if p == 2 {
        pairs.push(0.0);
    }
    Ok(StepLaw { p, masses, pairs })
}

/// Probability that the distinguished child after `G(k)` on the p-gon is the `k+1` child.
pub fn uipt_child_choice(p: usize, k: usize) -> f64 {
    let a = cycle_weight(k + 1);
    a / (a + cycle_weight(p - k))
}
