//! Inverse-CDF sampler for jump sizes under `ν`.
//!
//! The tail `T(u) = ν([1/2, 1-u])` has a closed form (see
//! [`super::cumulants::jump_rate`]). Its inverse is tabulated as `ln u`
//! against `ln T` on a uniform grid and read with cubic Hermite interpolation.

use super::cumulants::{jump_rate, nu};

/// Number of table knots.
pub const KNOTS: usize = 4096;
/// Smallest jump size the table covers.
pub const U_MIN: f64 = 1e-7;
// below T(1/2 - EDGE) the tail is linear to the accuracy we need
const EDGE: f64 = 1e-3;

#[derive(Debug, Clone)]
pub struct JumpSampler {
    s0: f64,
    h: f64,
    y: Vec<f64>,
    dy: Vec<f64>,
    t_edge: f64,
}

impl Default for JumpSampler {
    fn default() -> Self {
        Self::new()
    }
}

impl JumpSampler {
    pub fn new() -> Self {
        let t_edge = jump_rate(0.5 - EDGE);
        let s0 = t_edge.ln();
        let s1 = jump_rate(U_MIN).ln();
        let h = (s1 - s0) / (KNOTS - 1) as f64;
        let mut y = Vec::with_capacity(KNOTS);
        let mut dy = Vec::with_capacity(KNOTS);
        for i in 0..KNOTS {
            let s = s0 + h * i as f64;
            let u = solve_tail(s);
            let t = s.exp();
            y.push(u.ln());
            // d ln u / d ln t = -t / (u ν(u))
            dy.push(-t / (u * nu(u)));
        }
        JumpSampler { s0, h, y, dy, t_edge }
    }

    /// `T^{-1}(t)` for `0 < t <= T(U_MIN)`.
    pub fn inverse_tail(&self, t: f64) -> f64 {
        if t <= self.t_edge {
            // ν(1/2 ± e) = 32 + O(e²)
            return 0.5 - t / 32.0;
        }
        let x = (t.ln() - self.s0) / self.h;
        let i = (x.floor() as usize).min(KNOTS - 2);
        let r = x - i as f64;
        let (r2, r3) = (r * r, r * r * r);
        let h00 = 2.0 * r3 - 3.0 * r2 + 1.0;
        let h10 = r3 - 2.0 * r2 + r;
        let h01 = -2.0 * r3 + 3.0 * r2;
        let h11 = r3 - r2;
        (h00 * self.y[i] + h10 * self.h * self.dy[i] + h01 * self.y[i + 1] + h11 * self.h * self.dy[i + 1]).exp()
    }

    /// Jump size `u = 1 - x` under `ν` restricted to `[δ, 1/2]`, from a uniform `v ∈ (0, 1]`.
    #[inline]
    pub fn sample(&self, delta: f64, v: f64) -> f64 {
        self.inverse_tail(v * jump_rate(delta))
    }

    /// As [`Self::sample`] with a precomputed `Λ(δ)`.
    #[inline]
    pub fn sample_with_rate(&self, rate: f64, v: f64) -> f64 {
        self.inverse_tail(v * rate)
    }
}

// Bisection in ln u for ln T(u) = s.
fn solve_tail(s: f64) -> f64 {
    let (mut lo, mut hi) = ((U_MIN * 0.5).ln(), 0.5f64.ln());
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if jump_rate(mid.exp()).ln() > s {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    (0.5 * (lo + hi)).exp()
}
