//! Partition function, cycle and volume weights, exact enumeration.
//!
//! The partition function is stored in reduced form
//! `h(p) = log Z(p) - (p - 1) log 12`, which stays O(log p) and keeps every
//! ratio used by the peeling laws well conditioned.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use std::f64::consts::{PI, SQRT_2};

use crate::error::{Error, Result};

pub const SQRT3: f64 = 1.732_050_807_568_877_2;
/// Boltzmann weight per inner vertex, (12√3)^-1.
pub const BOLTZMANN_WEIGHT: f64 = 1.0 / (12.0 * SQRT3);
/// Largest perimeter accepted by [`WeightTable::new`].
pub const P_MAX_LIMIT: usize = 10_000_000;
/// Above this the DP oracle refuses to run.
pub const DP_LIMIT: usize = 60;

/// `t_Δ = √3 / (8√π)`.
pub fn t_delta() -> f64 {
    SQRT3 / (8.0 * PI.sqrt())
}

/// `a_Δ = 1 / (2√3)`.
pub fn a_delta() -> f64 {
    1.0 / (2.0 * SQRT3)
}

/// Height-to-time factor `2 t_Δ / a_Δ = 3 / (2√π)`.
pub fn time_factor() -> f64 {
    2.0 * t_delta() / a_delta()
}

/// Reciprocal of [`time_factor`], the height rescaling constant.
pub fn height_factor() -> f64 {
    1.0 / time_factor()
}

/// Closed-form `log Z(p)` for `p >= 1`.
pub fn log_z_closed(p: usize) -> f64 {
    match p {
        0 => f64::NEG_INFINITY,
        1 => ((2.0 - SQRT3) / 4.0).ln(),
        _ => {
            // (2p-5)!! = (2p-4)! / (2^(p-2) (p-2)!)
            let pf = p as f64;
            let dfact = statrs::function::gamma::ln_gamma(2.0 * pf - 3.0)
                - (pf - 2.0) * std::f64::consts::LN_2
                - statrs::function::gamma::ln_gamma(pf - 1.0);
            pf * 6f64.ln() + dfact - (8.0 * SQRT3).ln() - statrs::function::gamma::ln_gamma(pf + 1.0)
        }
    }
}

/// Cycle weight `f(p) = C(p) / Z(p)`.
pub fn cycle_weight(p: usize) -> f64 {
    match p {
        0 => 0.0,
        1 => SQRT_2 * (2.0 + SQRT3) / (3.0 * PI.sqrt()),
        _ => {
            let x = p as f64;
            6f64.sqrt() / (9.0 * PI.sqrt()) * x * (2.0 * x - 1.0) * (2.0 * x - 3.0)
        }
    }
}

/// Volume weight `g(p)`, the expected inner-vertex count of a Boltzmann triangulation of the p-gon.
pub fn volume_weight(p: usize) -> f64 {
    match p {
        0 => 0.0,
        1 => 1.0 + 2.0 / SQRT3,
        _ => {
            let x = p as f64;
            (2.0 * x - 3.0) * (2.0 * x - 1.0) / 3.0
        }
    }
}

/// `log C(p)` where `C(p) = 3^(p-2) p (2p)! / (4 √(2π) (p!)^2)`.
pub fn log_c_closed(p: usize) -> f64 {
    if p == 0 {
        return f64::NEG_INFINITY;
    }
    let x = p as f64;
    let lg = statrs::function::gamma::ln_gamma;
    (x - 2.0) * 3f64.ln() + x.ln() + lg(2.0 * x + 1.0)
        - (4.0 * (2.0 * PI).sqrt()).ln()
        - 2.0 * lg(x + 1.0)
}

/// Tabulated partition function.
///
/// Index `p` holds data for the p-gon; index 0 is the closed state.
#[derive(Debug, Clone)]
pub struct WeightTable {
    h: Vec<f64>,
    q: Vec<f64>,
    // compensated-sum state of the h recurrence
    acc: f64,
    comp: f64,
}

impl WeightTable {
    pub fn new(p_max: usize) -> Result<Self> {
        if p_max == 0 || p_max > P_MAX_LIMIT {
            return Err(Error::InvalidArgument(format!(
                "p_max must lie in [1, {P_MAX_LIMIT}], got {p_max}"
            )));
        }
        let h2 = (SQRT3 / 16.0).ln();
        let mut t = WeightTable {
            h: vec![f64::NEG_INFINITY, ((2.0 - SQRT3) / 4.0).ln(), h2],
            q: vec![0.0, (2.0 - SQRT3) / 4.0, SQRT3 / 16.0],
            acc: h2,
            comp: 0.0,
        };
        t.extend_to(p_max);
        Ok(t)
    }

    /// Grow the table so that perimeters up to `p_max` are available.
    ///
    /// Extension continues the same recurrence, so values are bit-identical
    /// to a table built at the larger size directly.
    pub fn extend_to(&mut self, p_max: usize) {
        if self.h.len() > p_max {
            return;
        }
        while self.h.len() <= p_max {
            let p = self.h.len() - 1;
            let term = (-5.0 / (2.0 * p as f64 + 2.0)).ln_1p();
            let y = term - self.comp;
            let s = self.acc + y;
            self.comp = (s - self.acc) - y;
            self.acc = s;
            self.h.push(s);
            self.q.push(s.exp());
        }
    }

    pub fn p_max(&self) -> usize {
        self.h.len() - 1
    }

    /// Multiply `Z(p)` by `1 + rel`. Only for fault-injection tests.
    pub fn perturb(&mut self, p: usize, rel: f64) {
        self.h[p] += rel.ln_1p();
        self.q[p] = self.h[p].exp();
    }

    /// Reduced log partition function `log Z(p) - (p-1) log 12`.
    #[inline]
    pub fn reduced_log(&self, p: usize) -> f64 {
        self.h[p]
    }

    /// `Q(p) = 12^-(p-1) Z(p)`; equals the half-plane mass `q_(p-1)`.
    #[inline]
    pub fn reduced(&self, p: usize) -> f64 {
        self.q[p]
    }

    pub fn log_z(&self, p: usize) -> f64 {
        if p == 0 {
            return f64::NEG_INFINITY;
        }
        self.h[p] + (p as f64 - 1.0) * 12f64.ln()
    }

    pub fn z(&self, p: usize) -> f64 {
        self.log_z(p).exp()
    }

    pub fn log_c(&self, p: usize) -> f64 {
        self.log_z(p) + cycle_weight(p).ln()
    }

    pub fn f(&self, p: usize) -> f64 {
        cycle_weight(p)
    }

    pub fn g(&self, p: usize) -> f64 {
        volume_weight(p)
    }

    /// Half-plane mass `q_k = 12^-k Z(k+1)` for `k >= 0`.
    #[inline]
    pub fn q(&self, k: usize) -> f64 {
        self.q[k + 1]
    }

    /// Relative residual of
    /// `Z(p) = (12√3)^-1 Z(p+1) + Σ_k Z(k+1) Z(p-k) + [p = 2]`,
    /// evaluated by log-sum-exp with every term divided by `Z(p)`.
    pub fn recurrence_residual(&self, p: usize) -> Result<f64> {
        if p == 0 || p + 1 > self.p_max() {
            return Err(Error::InvalidArgument(format!("perimeter {p} outside table")));
        }
        let h = &self.h;
        let mut terms = Vec::with_capacity(p + 2);
        terms.push((12.0 * BOLTZMANN_WEIGHT).ln() + h[p + 1] - h[p]);
        for k in 0..p {
            terms.push(h[k + 1] + h[p - k] - h[p]);
        }
        if p == 2 {
            terms.push(-self.log_z(2));
        }
        Ok(log_sum_exp(&terms).exp_m1().abs())
    }

    /// `Σ_{k=0}^{K} q_k` plus the exact tail `Σ_{k>K} q_k`.
    ///
    /// The tail telescopes because `q_k = t_Δ Γ(k-1/2) / Γ(k+2)`; it is
    /// returned separately so callers can see its size.
    pub fn q_sum(&self, k_max: usize) -> (f64, f64) {
        let s: f64 = (0..=k_max).map(|k| self.q(k)).sum();
        let qn = self.q(k_max + 1);
        let kk = k_max as f64;
        (s, 2.0 / 3.0 * (kk + 2.0) * qn)
    }

    /// `Σ_{k=0}^{K} k q_k` and its exact tail.
    pub fn kq_sum(&self, k_max: usize) -> (f64, f64) {
        let s: f64 = (0..=k_max).map(|k| k as f64 * self.q(k)).sum();
        let qn = self.q(k_max + 1);
        let kk = k_max as f64;
        (s, 2.0 * (kk + 1.0) * (kk + 2.0) * qn - 2.0 / 3.0 * (kk + 2.0) * qn)
    }
}

pub(crate) fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    // sort ascending so small terms are added first
    let mut v: Vec<f64> = xs.iter().map(|x| (x - m).exp()).collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    m + v.iter().sum::<f64>().ln()
}

fn double_factorial(n: i64) -> BigUint {
    let mut acc = BigUint::one();
    let mut k = n;
    while k > 1 {
        acc *= BigUint::from(k as u64);
        k -= 2;
    }
    acc
}

fn factorial(n: u64) -> BigUint {
    (2..=n).fold(BigUint::one(), |acc, k| acc * BigUint::from(k))
}

/// Number of triangulations of the p-gon with `n` inner vertices.
pub fn count_triangulations(n: u64, p: u64) -> Result<BigUint> {
    if p == 0 {
        return Err(Error::InvalidArgument("perimeter must be >= 1".into()));
    }
    if n == 0 && p == 1 {
        return Ok(BigUint::zero());
    }
    let (ni, pi) = (n as i64, p as i64);
    let mut num = BigUint::from(p) * factorial(2 * p) * double_factorial(2 * pi + 3 * ni - 5);
    let mut den = factorial(p).pow(2) * factorial(n) * double_factorial(2 * pi + ni - 1);
    if n == 0 {
        den *= BigUint::from(4u32);
    } else {
        num *= BigUint::from(4u32).pow((n - 1) as u32);
    }
    let (q, r) = (&num / &den, &num % &den);
    if !r.is_zero() {
        return Err(Error::Numerical(format!("non-integral count at n={n}, p={p}")));
    }
    Ok(q)
}

/// Table `t[n][p]` of triangulation counts from the root-edge peeling recursion.
///
/// Independent of [`count_triangulations`]; used as its oracle.
pub fn count_dp(n_max: usize, p_max: usize) -> Result<Vec<Vec<BigUint>>> {
    if n_max > DP_LIMIT || p_max > DP_LIMIT {
        return Err(Error::InvalidArgument(format!("DP oracle limited to {DP_LIMIT}")));
    }
    if p_max == 0 {
        return Err(Error::InvalidArgument("p_max must be >= 1".into()));
    }
    // C events raise p while lowering n, so rows need width p_max + n_max.
    let width = p_max + n_max + 1;
    let mut t = vec![vec![BigUint::zero(); width + 1]; n_max + 1];
    for n in 0..=n_max {
        let pw = width - n;
        for p in 1..=pw {
            let mut acc = BigUint::zero();
            if n == 0 && p == 2 {
                acc += 1u32;
            }
            if n >= 1 && p < width {
                acc += &t[n - 1][p + 1];
            }
            for k in 0..p {
                let (a, b) = (k + 1, p - k);
                for n1 in 0..=n {
                    let x = &t[n1][a];
                    if x.is_zero() {
                        continue;
                    }
                    let y = &t[n - n1][b];
                    if !y.is_zero() {
                        acc += x * y;
                    }
                }
            }
            t[n][p] = acc;
        }
    }
    for row in t.iter_mut() {
        row.truncate(p_max + 1);
    }
    Ok(t)
}

/// Partial Boltzmann sum `Σ_{n<=N} #T_{n,p} (12√3)^-n / Z(p)`, which tends to 1.
pub fn boltzmann_partial_sum(p: u64, n_max: u64) -> Result<f64> {
    let mut s = 0.0;
    let lw = BOLTZMANN_WEIGHT.ln();
    for n in 0..=n_max {
        let c = count_triangulations(n, p)?;
        if c.is_zero() {
            continue;
        }
        s += (big_ln(&c) + n as f64 * lw - log_z_closed(p as usize)).exp();
    }
    Ok(s)
}

/// Natural log of a big integer.
pub fn big_ln(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().unwrap();
    top.ln() + shift as f64 * std::f64::consts::LN_2
}
