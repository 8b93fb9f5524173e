//! Explicit boundary marks.
//!
//! A mark is `false` for a vertex at the base height `r` and `true` for a
//! vertex at height `r + 1`. Vertices are listed clockwise; edge `i` joins
//! vertex `i` to vertex `i + 1 mod p`.

use crate::error::{Error, Result};
use crate::kernel::Event;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleState {
    pub marks: Vec<bool>,
    pub base_height: u32,
}

/// Result of applying one event to a cycle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Grown(CycleState),
    /// Children in the order (k+1 child, p-k child).
    Split(CycleState, CycleState),
    Closed,
}

impl CycleState {
    /// A cycle all of whose vertices sit at height `base`.
    pub fn fresh(p: usize, base: u32) -> Self {
        CycleState { marks: vec![false; p], base_height: base }
    }

    pub fn perimeter(&self) -> usize {
        self.marks.len()
    }

    /// Number of vertices at the base height.
    pub fn low_arc(&self) -> usize {
        self.marks.iter().filter(|m| !**m).count()
    }

    /// Low vertices form one non-empty contiguous cyclic arc.
    pub fn satisfies_p(&self) -> bool {
        let p = self.marks.len();
        if p == 0 {
            return false;
        }
        let starts = (0..p)
            .filter(|&i| !self.marks[i] && self.marks[(i + p - 1) % p])
            .count();
        let low = self.low_arc();
        low > 0 && (starts == 1 || low == p)
    }

    // an all-high cycle has completed its layer
    fn normalise(mut self) -> Self {
        if self.marks.iter().all(|m| *m) {
            self.base_height += 1;
            self.marks.iter_mut().for_each(|m| *m = false);
        }
        self
    }
}

/// Edge to peel next: the edge from a high vertex to the first low vertex of
/// the arc, or edge 0 when every vertex is low.
pub fn select_peel_edge(c: &CycleState) -> Result<usize> {
    let p = c.marks.len();
    if p == 0 {
        return Err(Error::InvalidArgument("empty cycle".into()));
    }
    if c.marks.iter().all(|m| *m) {
        return Err(Error::InvalidArgument(
            "no vertex at the base height; advance the layer first".into(),
        ));
    }
    if c.marks.iter().all(|m| !*m) {
        return Ok(0);
    }
    (0..p)
        .find(|&i| c.marks[i] && !c.marks[(i + 1) % p])
        .ok_or_else(|| Error::Numerical("property (P) violated".into()))
}

/// Apply `event` at edge `edge`.
///
/// Children inherit the marks of their vertices; a new vertex is high. A child
/// with no low vertex advances its base height.
pub fn apply_event(c: &CycleState, edge: usize, event: Event) -> Result<Outcome> {
    let p = c.marks.len();
    if edge >= p {
        return Err(Error::InvalidArgument(format!("edge {edge} on a {p}-gon")));
    }
    let at = |j: usize| c.marks[(edge + 1 + j) % p];
    let out = match event {
        Event::C => {
            // listed from vertex edge+1; the new vertex closes the list
            let mut marks = Vec::with_capacity(p + 1);
            for j in 0..p {
                marks.push(at(j));
            }
            marks.push(true);
            Outcome::Grown(CycleState { marks, base_height: c.base_height })
        }
        Event::G(k) => {
            if k >= p {
                return Err(Error::InvalidArgument(format!("G({k}) on a {p}-gon")));
            }
            let a: Vec<bool> = (0..=k).map(at).collect();
            let b: Vec<bool> = (k..p).map(at).collect();
            Outcome::Split(
                CycleState { marks: a, base_height: c.base_height }.normalise(),
                CycleState { marks: b, base_height: c.base_height }.normalise(),
            )
        }
        Event::V => {
            if p != 2 {
                return Err(Error::InvalidArgument(format!("V on a {p}-gon")));
            }
            Outcome::Closed
        }
    };
    if cfg!(debug_assertions) {
        match &out {
            Outcome::Grown(x) => debug_assert!(x.satisfies_p()),
            Outcome::Split(x, y) => debug_assert!(x.satisfies_p() && y.satisfies_p()),
            Outcome::Closed => {}
        }
    }
    Ok(out)
}
