//! Plain Monte Carlo estimators, CLT half-widths and the MC-RB bounds.
//!
//! Sums use Neumaier compensation over fixed-size chunks that are combined
//! in index order, so results do not depend on the number of threads.

use crate::error::{Error, Result};
use crate::par;

/// Chunk length of the deterministic reduction tree.
const CHUNK: usize = 4096;

/// Default confidence coefficients (95 % and 99.9 %).
pub const A_95: f64 = 1.96;
pub const A_999: f64 = 3.3;

/// A point estimate with its CLT half-width.
#[derive(Clone, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub half_width: f64,
    /// Sample counts (one entry per level for multilevel estimators).
    pub m: Vec<usize>,
    pub a: f64,
}

impl Estimate {
    /// Nominal coverage `erf(a/√2)`.
    pub fn confidence(&self) -> f64 {
        confidence(self.a)
    }
}

pub fn confidence(a: f64) -> f64 {
    libm::erf(a / std::f64::consts::SQRT_2)
}

#[derive(Clone, Copy, Default)]
struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(self) -> f64 {
        self.sum + self.comp
    }
}

/// Compensated sum of `f(i)` for `i in 0..n`.
pub fn sum_by<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    let chunks = n.div_ceil(CHUNK);
    let partial = if chunks > 1 {
        par::map_range(chunks, |c| {
            let mut acc = Neumaier::default();
            for i in c * CHUNK..((c + 1) * CHUNK).min(n) {
                acc.add(f(i));
            }
            acc
        })
    } else {
        let mut acc = Neumaier::default();
        for i in 0..n {
            acc.add(f(i));
        }
        vec![acc]
    };
    let mut total = Neumaier::default();
    for p in partial {
        total.add(p.sum);
        total.add(p.comp);
    }
    total.value()
}

pub fn sum(values: &[f64]) -> f64 {
    sum_by(values.len(), |i| values[i])
}

fn check(values: &[f64], min: usize) -> Result<()> {
    if values.len() < min {
        return Err(Error::InsufficientSamples(format!(
            "need at least {min} samples, got {}",
            values.len()
        )));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::config("sample contains non-finite values"));
    }
    Ok(())
}

/// `E_M = (1/M) Σ s_m`.
pub fn mean(values: &[f64]) -> Result<f64> {
    check(values, 1)?;
    Ok(sum(values) / values.len() as f64)
}

/// `(E_M, V_M)` with `V_M = (1/(M−1)) Σ (E_M − s_m)²`, evaluated by the
/// corrected two-pass algorithm.
pub fn mean_var(values: &[f64]) -> Result<(f64, f64)> {
    check(values, 2)?;
    let m = values.len() as f64;
    let mu = sum(values) / m;
    let ss = sum_by(values.len(), |i| (values[i] - mu).powi(2));
    let d = sum_by(values.len(), |i| values[i] - mu);
    Ok((mu, ((ss - d * d / m) / (m - 1.0)).max(0.0)))
}

/// Unbiased sample covariance of paired samples.
pub fn covariance(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::config("paired samples differ in length"));
    }
    check(x, 2)?;
    check(y, 2)?;
    let m = x.len() as f64;
    let mx = sum(x) / m;
    let my = sum(y) / m;
    Ok(sum_by(x.len(), |i| (x[i] - mx) * (y[i] - my)) / (m - 1.0))
}

/// `a √(V_M / M)`.
pub fn clt_halfwidth(var: f64, m: usize, a: f64) -> f64 {
    if var <= 0.0 {
        return 0.0;
    }
    a * (var / m as f64).sqrt()
}

/// MC estimate of the expectation with its CLT half-width.
pub fn mc_expectation(values: &[f64], a: f64) -> Result<Estimate> {
    let (mu, var) = mean_var(values)?;
    Ok(Estimate {
        value: mu,
        half_width: clt_halfwidth(var, values.len(), a),
        m: vec![values.len()],
        a,
    })
}

/// MC estimate of the variance; the half-width uses the sample variance of
/// the squared deviations `(s_m − E_M)²`.
pub fn mc_variance(values: &[f64], a: f64) -> Result<Estimate> {
    let (mu, var) = mean_var(values)?;
    let sq: Vec<f64> = values.iter().map(|v| (v - mu).powi(2)).collect();
    let (_, var_sq) = mean_var(&sq)?;
    Ok(Estimate {
        value: var,
        half_width: clt_halfwidth(var_sq, values.len(), a),
        m: vec![values.len()],
        a,
    })
}

/// `Δ^E_{N,M} = (1/M) Σ Δ^s_N(y_m)`, which bounds `|E_M[s_h] − E_M[s_N]|`.
pub fn mc_rb_expectation_bound(deltas: &[f64]) -> Result<f64> {
    check(deltas, 1)?;
    if deltas.iter().any(|&d| d < 0.0) {
        return Err(Error::config("output bounds must be nonnegative"));
    }
    mean(deltas)
}

/// `Δ^V_{N,M} = (1/(M−1)) Σ (Δ^s_N(y_m) + Δ^E_{N,M}) (Δ^s_N(y_m) + 2|s_N(y_m)|)`,
/// which bounds `|V_M[s_h] − V_M[s_N]|`.
pub fn mc_rb_variance_bound(s_n: &[f64], deltas: &[f64], delta_e: f64) -> Result<f64> {
    if s_n.len() != deltas.len() {
        return Err(Error::config("paired samples differ in length"));
    }
    check(deltas, 2)?;
    let m = s_n.len() as f64;
    Ok(sum_by(s_n.len(), |i| (deltas[i] + delta_e) * (deltas[i] + 2.0 * s_n[i].abs())) / (m - 1.0))
}

/// `Δ̃^E_{N,M} = a √((V_M[s_N] + Δ^V_{N,M}) / M) + Δ^E_{N,M}`. The first term
/// is the sampling error and vanishes as `M → ∞`; the second stays.
pub fn mc_rb_total_bound(var_sn: f64, delta_v: f64, m: usize, a: f64, delta_e: f64) -> f64 {
    clt_halfwidth(var_sn + delta_v, m, a) + delta_e
}

/// Control-variate coefficient `γ = Cov(X, Y) / V[Y]` minimizing
/// `V[X − γ (Y − E[Y])]`.
pub fn optimal_cv_gamma(x: &[f64], y: &[f64]) -> Result<f64> {
    let (_, vy) = mean_var(y)?;
    if vy == 0.0 {
        return Err(Error::InsufficientSamples("control variate has zero sample variance".into()));
    }
    Ok(covariance(x, y)? / vy)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_examples() {
        assert_eq!(mean_var(&[1.0; 4]).unwrap(), (1.0, 0.0));
        assert_eq!(mean_var(&[0.0, 2.0]).unwrap(), (1.0, 2.0));
        assert!(mean_var(&[1.0]).is_err());
        assert!((clt_halfwidth(4.0, 100, 2.0) - 0.4).abs() < 1e-15);
        assert_eq!(clt_halfwidth(0.0, 10, 2.0), 0.0);
        assert_eq!(mc_rb_expectation_bound(&[0.0; 5]).unwrap(), 0.0);
        assert_eq!(mc_rb_variance_bound(&[1.0, 2.0], &[0.0, 0.0], 0.0).unwrap(), 0.0);
        assert_eq!(mc_rb_total_bound(4.0, 0.0, 100, 2.0, 0.0), 0.4);
        assert!((mc_rb_total_bound(0.0, 0.0, 1 << 40, 1.96, 0.11) - 0.11).abs() < 1e-12);
        let x = [1.0, 3.0, 2.0, 5.0];
        assert!((optimal_cv_gamma(&x, &x).unwrap() - 1.0).abs() < 1e-15);
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
        assert!((optimal_cv_gamma(&x, &y).unwrap() - 0.5).abs() < 1e-15);
        assert!(optimal_cv_gamma(&x, &[1.0; 4]).is_err());
        assert!((confidence(1.96) - 0.95).abs() < 1e-3);
    }

    #[test]
    fn compensated_sum_is_exact_on_cancelling_input() {
        let mut v = vec![1e16, 1.0, -1e16];
        v.extend(std::iter::repeat_n(1.0, 10_000));
        assert_eq!(sum(&v), 10_001.0);
    }

    #[test]
    fn variance_of_offset_data() {
        // large offset with tiny spread: naive one-pass formulas lose it all
        let v: Vec<f64> = (0..1000).map(|i| 1e9 + (i % 2) as f64).collect();
        let (_, var) = mean_var(&v).unwrap();
        assert!((var - 0.25 * 1000.0 / 999.0).abs() < 1e-9);
    }
}
