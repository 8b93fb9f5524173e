//! Two-sample Kolmogorov–Smirnov test and simple moment summaries.

use serde::Serialize;

/// `c(α)` for the two-sample KS test at the 1% level.
pub const KS_C_1PCT: f64 = 1.628;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KsResult {
    pub d: f64,
    pub n: usize,
    pub m: usize,
    /// Asymptotic p-value.
    pub p_value: f64,
    /// `c(α) √((n + m) / (n m))` at the 1% level.
    pub critical: f64,
    pub pass: bool,
}

/// Two-sample KS statistic `sup |F_a - F_b|`; ties are handled exactly.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_unstable_by(f64::total_cmp);
    y.sort_unstable_by(f64::total_cmp);
    let (n, m) = (x.len() as f64, y.len() as f64);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < x.len() && j < y.len() {
        let v = x[i].min(y[j]);
        while i < x.len() && x[i] <= v {
            i += 1;
        }
        while j < y.len() && y[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    d
}

/// Kolmogorov tail `Q(λ) = 2 Σ (-1)^{k-1} e^{-2 k² λ²}`.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..200 {
        let term = (-2.0 * (k * k) as f64 * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Two-sample KS test at the 1% level.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> KsResult {
    let (n, m) = (a.len(), b.len());
    if n == 0 || m == 0 {
        return KsResult { d: f64::NAN, n, m, p_value: f64::NAN, critical: f64::NAN, pass: false };
    }
    let d = ks_statistic(a, b);
    let ne = (n * m) as f64 / (n + m) as f64;
    let critical = KS_C_1PCT / ne.sqrt();
    let se = ne.sqrt();
    let p_value = kolmogorov_q((se + 0.12 + 0.11 / se) * d);
    KsResult { d, n, m, p_value, critical, pass: d <= critical }
}

/// Sample mean and its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanSe {
    pub mean: f64,
    pub se: f64,
    pub n: usize,
}

impl MeanSe {
    pub fn of(xs: &[f64]) -> Self {
        let n = xs.len();
        if n == 0 {
            return MeanSe { mean: f64::NAN, se: f64::NAN, n };
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = if n > 1 {
            xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64
        } else {
            f64::NAN
        };
        MeanSe { mean, se: (var / n as f64).sqrt(), n }
    }

    /// `(mean - target) / se`.
    pub fn z(&self, target: f64) -> f64 {
        (self.mean - target) / self.se
    }
}

/// Median; the mean of the two middle values for even lengths.
pub fn median(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let mut v = xs.to_vec();
    v.sort_unstable_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Standard error of the median by the bootstrap-free normal approximation
/// `sqrt(p(1-p)/n) / density`, with the density estimated from the
/// inter-quantile spread around the median.
pub fn median_se(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 10 {
        return f64::NAN;
    }
    let mut v = xs.to_vec();
    v.sort_unstable_by(f64::total_cmp);
    let h = ((n as f64).sqrt() as usize).max(1);
    let lo = v[(n / 2).saturating_sub(h)];
    let hi = v[(n / 2 + h).min(n - 1)];
    // P(lo < X < hi) ≈ 2h/n
    let density = (2 * h) as f64 / n as f64 / (hi - lo).max(f64::MIN_POSITIVE);
    0.5 / (density * (n as f64).sqrt())
}
