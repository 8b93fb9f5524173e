//! Laplace exponent `Ψ`, cumulant `κ` and the small-jump integrals of `ν`.
//!
//! The Lévy measure lives on `x ∈ [1/2, 1)`; we integrate in the jump size
//! `u = 1 - x`, where `ν(u) = (u(1-u))^{-5/2}` is symmetric about `1/2`.
//! Integrands that behave like `u^{-1/2}` at 0 are taken in `w = √u`.

use std::f64::consts::PI;

use statrs::function::gamma::gamma;

use super::quad::integrate;
use crate::error::{Error, Result};

/// Drift coefficient in `Ψ`.
pub const DRIFT: f64 = -8.0 / 3.0;
/// Absolute tolerance of every quadrature in this module.
pub const TOL: f64 = 1e-10;

/// Density of `ν` at jump size `u = 1 - x`.
#[inline]
pub fn nu(u: f64) -> f64 {
    (u * (1.0 - u)).powf(-2.5)
}

/// `ln(1 - u) + u`, accurate for small `u`.
pub fn log1m_plus(u: f64) -> f64 {
    if u < 0.05 {
        let mut term = u;
        let mut sum = 0.0;
        for k in 2..40 {
            term *= u;
            sum -= term / k as f64;
            if term < 1e-18 * sum.abs() {
                break;
            }
        }
        sum
    } else {
        (-u).ln_1p() + u
    }
}

/// `e^y - 1 - y`, accurate for small `y`.
pub fn expm1_minus(y: f64) -> f64 {
    if y.abs() < 0.05 {
        let mut term = y;
        let mut sum = 0.0;
        for k in 2..30 {
            term *= y / k as f64;
            sum += term;
            if term.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        sum
    } else {
        y.exp_m1() - y
    }
}

/// `(1-u)^q - 1 + q u`.
fn compensated(u: f64, q: f64) -> f64 {
    let l = (-u).ln_1p();
    expm1_minus(q * l) + q * log1m_plus(u)
}

// ∫_0^a g(u) ν(u) du for g(u) = O(u^2) at 0, in w = √u.
fn small_integral<G: Fn(f64) -> f64>(g: G, a: f64) -> Result<f64> {
    let f = |w: f64| {
        let u = w * w;
        2.0 * g(u) / (w * w * w * w * (1.0 - u).powf(2.5))
    };
    Ok(integrate(f, 0.0, a.sqrt(), TOL)?.0)
}

/// `Ψ(q) = -8q/3 + ∫ (x^q - 1 + q(1-x)) ν(dx)`.
pub fn psi(q: f64) -> Result<f64> {
    if q == 0.0 {
        return Ok(0.0);
    }
    Ok(DRIFT * q + small_integral(|u| compensated(u, q), 0.5)?)
}

/// `Ψ'(0) = -8/3 - 8/9 (6π - 17)`, the value of `-8/3 + ∫ (ln x + 1 - x) ν(dx)`.
pub fn psi_prime0() -> f64 {
    DRIFT - 8.0 / 9.0 * (6.0 * PI - 17.0)
}

/// The often quoted `-8/3 + 8/9 (6π - 18) ≈ -1.9115`.
///
/// This does not match the integral: `ln x + 1 - x <= 0` on `[1/2, 1]`, so the
/// integral is negative. Kept for comparison only.
pub fn psi_prime0_printed() -> f64 {
    DRIFT + 8.0 / 9.0 * (6.0 * PI - 18.0)
}

/// `Ψ'(0)` as `-8/3 + ∫ (ln x + 1 - x) ν(dx)` by quadrature.
pub fn psi_prime0_integral() -> Result<f64> {
    Ok(DRIFT + small_integral(log1m_plus, 0.5)?)
}

/// Central difference `(Ψ(h) - Ψ(-h)) / 2h`.
pub fn psi_prime0_fd(h: f64) -> Result<f64> {
    Ok((psi(h)? - psi(-h)?) / (2.0 * h))
}

/// `∫ (1-x)^q ν(dx)` for `q > 3/2`.
pub fn daughter_moment(q: f64) -> Result<f64> {
    if !(q > 1.5) {
        return Err(Error::InvalidArgument(format!("daughter moment diverges at q = {q}")));
    }
    // u^q ν(u) ~ u^{q-5/2}; in w the integrand is 2 w^{2q-4} (1-w²)^{-5/2}
    let f = |w: f64| 2.0 * w.powf(2.0 * q - 4.0) * (1.0 - w * w).powf(-2.5);
    Ok(integrate(f, 0.0, 0.5f64.sqrt(), TOL)?.0)
}

/// Closed form `κ(q) = (4√π/3) Γ(q - 3/2) / Γ(q - 3)` for `q > 3/2`, using
/// `1/Γ` so that the roots at `q = 2, 3` are exact zeros. NaN for `q <= 3/2`.
pub fn kappa(q: f64) -> f64 {
    if !(q > 1.5) {
        return f64::NAN;
    }
    4.0 * PI.sqrt() / 3.0 * gamma(q - 1.5) * recip_gamma(q - 3.0)
}

/// `κ(q) = Ψ(q) + ∫ (1-x)^q ν(dx)` by quadrature.
pub fn kappa_integral(q: f64) -> Result<f64> {
    Ok(psi(q)? + daughter_moment(q)?)
}

/// `1 / Γ(x)`, zero at the poles.
pub fn recip_gamma(x: f64) -> f64 {
    if x <= 0.0 && x == x.floor() {
        0.0
    } else {
        1.0 / gamma(x)
    }
}

/// Jump rate `Λ(δ) = ν([1/2, 1-δ])`, in closed form.
pub fn jump_rate(delta: f64) -> f64 {
    let u = delta;
    let poly = (1.0 - 2.0 * u) * (((8.0 * u - 16.0) * u + 7.0) * u + 1.0);
    2.0 * poly / (3.0 * u.powf(1.5) * (1.0 - u).powf(2.5))
}

/// Drift of `ξ` between kept jumps when jumps with `1 - x < δ` are replaced by their mean:
/// `-8/3 + ∫_{1/2}^{1-δ} (1-x) ν(dx) + ∫_{1-δ}^1 (ln x + 1 - x) ν(dx)`.
pub fn truncated_drift(delta: f64) -> Result<f64> {
    let big = if delta < 0.5 {
        let f = |w: f64| 2.0 / (w * w * (1.0 - w * w).powf(2.5));
        integrate(f, delta.sqrt(), 0.5f64.sqrt(), TOL)?.0
    } else {
        0.0
    };
    Ok(DRIFT + big + small_integral(log1m_plus, delta.min(0.5))?)
}

/// Variance rate `∫_{1-δ}^1 (ln x)^2 ν(dx)` of the jumps removed by truncation at `δ`.
pub fn small_jump_variance(delta: f64) -> Result<f64> {
    small_integral(|u| (-u).ln_1p().powi(2), delta.min(0.5))
}

/// Third cumulant rate `∫_{1-δ}^1 (ln x)^3 ν(dx)`.
pub fn small_jump_skew(delta: f64) -> Result<f64> {
    small_integral(|u| (-u).ln_1p().powi(3), delta.min(0.5))
}
