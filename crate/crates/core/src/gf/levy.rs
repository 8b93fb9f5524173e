//! The Lévy process `ξ` and its Lamperti transforms.

use rand::Rng;
use rand_distr::{Distribution, Exp1, Poisson, StandardNormal};

use super::cumulants::{jump_rate, small_jump_variance, truncated_drift};
use super::jumps::JumpSampler;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct LevyConfig {
    /// Jumps with `1 - x < delta` are not simulated.
    pub delta: f64,
    /// Jumps with `delta <= 1 - x < exact` are replaced by a Gaussian with
    /// their mean and variance. Must be at least `delta`.
    pub exact: f64,
    /// Keep the variance of the jumps below `delta` as a Gaussian.
    pub gaussian: bool,
    /// Longest piece of the skeleton when a Gaussian part is present.
    pub max_step: f64,
}

impl Default for LevyConfig {
    fn default() -> Self {
        LevyConfig { delta: 1e-4, exact: 1e-4, gaussian: true, max_step: 0.05 }
    }
}

impl LevyConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta <= 0.5) {
            return Err(Error::InvalidArgument(format!("delta {} outside (0, 1/2]", self.delta)));
        }
        if !(self.exact >= self.delta && self.exact <= 0.5) {
            return Err(Error::InvalidArgument(format!(
                "exact threshold {} outside [delta, 1/2]",
                self.exact
            )));
        }
        if !(self.max_step > 0.0) {
            return Err(Error::InvalidArgument("max_step must be positive".into()));
        }
        Ok(())
    }
}

/// Coefficients of the simulated process for one truncation level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Band {
    /// Smallest simulated jump size `1 - x`.
    pub threshold: f64,
    /// `Λ(threshold)`.
    pub rate: f64,
    pub drift: f64,
    pub sigma: f64,
}

impl Band {
    /// Band with explicit jumps above `exact`, Gaussian for `[delta, exact)` and,
    /// if `gaussian`, also below `delta`.
    pub fn new(delta: f64, exact: f64, gaussian: bool) -> Result<Self> {
        let e = exact.max(delta);
        let mut var = small_jump_variance(e)?;
        if !gaussian {
            var -= small_jump_variance(delta)?;
        }
        Ok(Band {
            threshold: e,
            rate: if e < 0.5 { jump_rate(e) } else { 0.0 },
            drift: truncated_drift(e)?,
            sigma: var.max(0.0).sqrt(),
        })
    }

    pub fn from_config(cfg: &LevyConfig) -> Result<Self> {
        cfg.validate()?;
        Band::new(cfg.delta, cfg.exact, cfg.gaussian)
    }
}

/// One knot of a path skeleton.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Knot {
    pub time: f64,
    /// `ξ(time-)`.
    pub before: f64,
    /// `ln x <= 0`, or 0 for a plain grid knot.
    pub jump: f64,
}

/// Piecewise linear path of `ξ` with downward jumps at knots.
#[derive(Debug, Clone, PartialEq)]
pub struct LevyPath {
    pub band: Band,
    pub knots: Vec<Knot>,
}

impl LevyPath {
    pub fn horizon(&self) -> f64 {
        self.knots.last().map_or(0.0, |k| k.time)
    }

    /// `ξ(s)`, right-continuous; `None` past the horizon.
    pub fn value(&self, s: f64) -> Option<f64> {
        if s < 0.0 || s > self.horizon() {
            return None;
        }
        let i = self.knots.partition_point(|k| k.time <= s);
        let a = &self.knots[i - 1];
        if i == self.knots.len() {
            return Some(a.before + a.jump);
        }
        let b = &self.knots[i];
        let r = (s - a.time) / (b.time - a.time);
        Some(a.before + a.jump + r * (b.before - a.before - a.jump))
    }

    /// A path identically zero on `[0, horizon]`.
    pub fn constant(horizon: f64) -> Self {
        LevyPath {
            band: Band { threshold: 0.5, rate: 0.0, drift: 0.0, sigma: 0.0 },
            knots: vec![
                Knot { time: 0.0, before: 0.0, jump: 0.0 },
                Knot { time: horizon, before: 0.0, jump: 0.0 },
            ],
        }
    }
}

/// Simulate `ξ` on `[0, horizon]`.
pub fn simulate_xi<R: Rng + ?Sized>(
    horizon: f64,
    cfg: &LevyConfig,
    sampler: &JumpSampler,
    rng: &mut R,
) -> Result<LevyPath> {
    if !(horizon > 0.0) {
        return Err(Error::InvalidArgument("horizon must be positive".into()));
    }
    let band = Band::from_config(cfg)?;
    let step = if band.sigma > 0.0 { cfg.max_step } else { f64::INFINITY };
    let mut knots = vec![Knot { time: 0.0, before: 0.0, jump: 0.0 }];
    let (mut s, mut x) = (0.0, 0.0);
    loop {
        let wait = if band.rate > 0.0 {
            rng.sample::<f64, _>(Exp1) / band.rate
        } else {
            f64::INFINITY
        };
        let ds = wait.min(step).min(horizon - s);
        x += band.drift * ds;
        if band.sigma > 0.0 {
            x += band.sigma * ds.sqrt() * rng.sample::<f64, _>(StandardNormal);
        }
        s += ds;
        let jumped = wait <= ds;
        let jump = if jumped {
            let u = sampler.sample_with_rate(band.rate, 1.0 - rng.random::<f64>());
            (-u).ln_1p()
        } else {
            0.0
        };
        knots.push(Knot { time: s, before: x, jump });
        x += jump;
        if s >= horizon {
            break;
        }
    }
    Ok(LevyPath { band, knots })
}

/// `ξ(t)` alone: Poisson number of kept jumps plus drift and Gaussian part.
pub fn sample_xi_at<R: Rng + ?Sized>(t: f64, band: &Band, sampler: &JumpSampler, rng: &mut R) -> f64 {
    let mut x = band.drift * t;
    if band.sigma > 0.0 {
        x += band.sigma * t.sqrt() * rng.sample::<f64, _>(StandardNormal);
    }
    if band.rate > 0.0 {
        let n = Poisson::new(band.rate * t).expect("positive mean").sample(rng) as u64;
        for _ in 0..n {
            let u = sampler.sample_with_rate(band.rate, 1.0 - rng.random::<f64>());
            x += (-u).ln_1p();
        }
    }
    x
}

/// `ξ(t)` at two truncation levels on shared noise, returned as `(fine, coarse)`.
///
/// The coarse value keeps the fine jumps above its own threshold and draws
/// the extra Gaussian variance independently, so each marginal is exact for
/// its band.
pub fn sample_xi_pair<R: Rng + ?Sized>(
    t: f64,
    fine: &Band,
    coarse: &Band,
    sampler: &JumpSampler,
    rng: &mut R,
) -> Result<(f64, f64)> {
    if !(fine.threshold <= coarse.threshold && fine.sigma <= coarse.sigma) {
        return Err(Error::InvalidArgument("fine band must refine the coarse band".into()));
    }
    let st = t.sqrt();
    let z1: f64 = rng.sample(StandardNormal);
    let z2: f64 = rng.sample(StandardNormal);
    let extra = (coarse.sigma * coarse.sigma - fine.sigma * fine.sigma).max(0.0).sqrt();
    let mut xf = fine.drift * t + fine.sigma * st * z1;
    let mut xc = coarse.drift * t + fine.sigma * st * z1 + extra * st * z2;
    if fine.rate > 0.0 {
        let n = Poisson::new(fine.rate * t).expect("positive mean").sample(rng) as u64;
        for _ in 0..n {
            let u = sampler.sample_with_rate(fine.rate, 1.0 - rng.random::<f64>());
            let j = (-u).ln_1p();
            xf += j;
            if u >= coarse.threshold {
                xc += j;
            }
        }
    }
    Ok((xf, xc))
}

/// `(e^z - 1) / z`.
#[inline]
pub fn expm1_ratio(z: f64) -> f64 {
    if z.abs() < 1e-8 {
        1.0 + 0.5 * z
    } else {
        z.exp_m1() / z
    }
}

/// Self-similarity index of a Lamperti transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Index {
    /// `-1/2`: the cell mass process `X`.
    Half,
    /// `-3/2`: the locally largest cycle limit `X̃`.
    ThreeHalves,
}

impl Index {
    /// `θ = -α`, so that `dt = X^θ ds`.
    pub fn theta(self) -> f64 {
        match self {
            Index::Half => 0.5,
            Index::ThreeHalves => 1.5,
        }
    }
}

/// Lamperti transform of a skeleton: `X(t) = x0 exp(ξ(τ(t)))`.
#[derive(Debug, Clone, PartialEq)]
pub struct LampertiPath {
    pub theta: f64,
    pub x0: f64,
    /// Clock time of every knot of the driving path.
    pub clock: Vec<f64>,
    path: LevyPath,
}

/// Compute the Lamperti clock exactly on each linear piece.
pub fn lamperti(path: &LevyPath, index: Index, x0: f64) -> Result<LampertiPath> {
    if !(x0 > 0.0) {
        return Err(Error::InvalidArgument("x0 must be positive".into()));
    }
    let theta = index.theta();
    let scale = x0.powf(theta);
    let mut clock = Vec::with_capacity(path.knots.len());
    let mut t = 0.0;
    clock.push(0.0);
    for w in path.knots.windows(2) {
        let a = w[0].before + w[0].jump;
        let ds = w[1].time - w[0].time;
        t += scale * ds * (theta * a).exp() * expm1_ratio(theta * (w[1].before - a));
        clock.push(t);
    }
    Ok(LampertiPath { theta, x0, clock, path: path.clone() })
}

impl LampertiPath {
    /// Clock time at which the driving path ends.
    pub fn horizon(&self) -> f64 {
        *self.clock.last().unwrap()
    }

    /// `τ(t)`, the driving time reached at clock time `t`; `None` past the horizon.
    pub fn tau(&self, t: f64) -> Option<f64> {
        let (i, a, b) = self.piece(t)?;
        let (ka, kb) = (&self.path.knots[i], &self.path.knots[i + 1]);
        let ds = kb.time - ka.time;
        let slope = (b - a) / ds;
        let m = self.x0 * a.exp();
        let dt = t - self.clock[i];
        Some(ka.time + ds_of(dt, m, self.theta, slope).min(ds))
    }

    /// `X(t)`; `None` past the horizon.
    pub fn mass(&self, t: f64) -> Option<f64> {
        let (i, a, b) = self.piece(t)?;
        let (ka, kb) = (&self.path.knots[i], &self.path.knots[i + 1]);
        let slope = (b - a) / (kb.time - ka.time);
        Some(mass_along(self.x0 * a.exp(), t - self.clock[i], self.theta, slope))
    }

    // Piece containing clock time t, with ξ at its ends.
    fn piece(&self, t: f64) -> Option<(usize, f64, f64)> {
        if t < 0.0 || t > self.horizon() || self.clock.len() < 2 {
            return None;
        }
        let i = (self.clock.partition_point(|&c| c <= t)).clamp(1, self.clock.len() - 1) - 1;
        let k = &self.path.knots;
        Some((i, k[i].before + k[i].jump, k[i + 1].before))
    }

    /// Clock times of the jumps.
    pub fn jump_times(&self) -> Vec<f64> {
        self.path
            .knots
            .iter()
            .zip(&self.clock)
            .filter(|(k, _)| k.jump < 0.0)
            .map(|(_, &c)| c)
            .collect()
    }
}

/// Mass after clock time `dt` along a piece where `ξ` has slope `slope`, starting at mass `m`.
#[inline]
pub fn mass_along(m: f64, dt: f64, theta: f64, slope: f64) -> f64 {
    // e^{θ slope s} = 1 + θ slope dt / m^θ
    let z = theta * slope * dt / m.powf(theta);
    m * (z.ln_1p() / theta).exp()
}

// Driving time needed to spend clock time dt from mass m.
#[inline]
fn ds_of(dt: f64, m: f64, theta: f64, slope: f64) -> f64 {
    let z = dt / m.powf(theta);
    let c = theta * slope;
    if c.abs() * z < 1e-10 {
        z
    } else {
        (c * z).ln_1p() / c
    }
}
