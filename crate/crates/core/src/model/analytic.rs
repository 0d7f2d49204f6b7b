use super::domain::{ParameterDomain, ParameterVector};
use crate::error::{Error, Result};

/// Closed-form solution of `-(κ u')' = f` on `(0, 1)` with `u(0) = 0`,
/// `κ u'(1) = 0`, constant source `f` and `κ = Σ_q y_q 1_{D_q}` on `Q` equal
/// subdomains.
///
/// With `f` constant, `u(x) = f ∫_0^x (1 - z)/κ(z) dz` and the mean
/// temperature is `s(y) = f Σ_q c_q / y_q`, where
/// `c_q = ∫_{D_q} (1 - z)^2 dz`.
#[derive(Clone, Debug)]
pub struct HeatBenchmark {
    q: usize,
    source: f64,
    coeffs: Vec<f64>,
}

/// Expectation and variance of the benchmark output.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
}

impl HeatBenchmark {
    pub fn new(q: usize, source: f64) -> Result<Self> {
        if q == 0 {
            return Err(Error::config("benchmark needs Q >= 1"));
        }
        if !source.is_finite() {
            return Err(Error::config("benchmark source must be finite"));
        }
        // c_q = [(Q-q+1)^3 - (Q-q)^3] / (3 Q^3): exact integer numerator,
        // single rounding in the division.
        let q3 = 3 * (q as u128).pow(3);
        let coeffs = (1..=q as u128)
            .map(|i| {
                let hi = (q as u128 - i + 1).pow(3);
                let lo = (q as u128 - i).pow(3);
                (hi - lo) as f64 / q3 as f64
            })
            .collect();
        Ok(Self { q, source, coeffs })
    }

    pub fn dim(&self) -> usize {
        self.q
    }

    pub fn source(&self) -> f64 {
        self.source
    }

    /// Output weights `c_q` (they sum to 1/3).
    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    fn check(&self, y: &ParameterVector) -> Result<()> {
        if y.len() != self.q {
            return Err(Error::config(format!(
                "expected {} coefficients, got {}",
                self.q,
                y.len()
            )));
        }
        if let Some(q) = y.iter().position(|&v| !(v > 0.0)) {
            return Err(Error::config(format!(
                "diffusivity y_{} = {} is not positive",
                q + 1,
                y[q]
            )));
        }
        Ok(())
    }

    /// `u(x, y)` for `x ∈ [0, 1]`.
    pub fn solution(&self, y: &ParameterVector, x: f64) -> Result<f64> {
        self.check(y)?;
        let x = x.clamp(0.0, 1.0);
        let h = 1.0 / self.q as f64;
        let mut u = 0.0;
        for (i, &yq) in y.iter().enumerate() {
            let a = i as f64 * h;
            if a >= x {
                break;
            }
            let b = ((i + 1) as f64 * h).min(x);
            u += ((1.0 - a).powi(2) - (1.0 - b).powi(2)) / (2.0 * yq);
        }
        Ok(self.source * u)
    }

    /// `s(y) = ∫_0^1 u(x, y) dx`.
    pub fn output(&self, y: &ParameterVector) -> Result<f64> {
        self.check(y)?;
        Ok(self.source
            * self
                .coeffs
                .iter()
                .zip(y.iter())
                .map(|(c, yq)| c / yq)
                .sum::<f64>())
    }

    /// `E[s]` and `V[s]` for independent uniform coefficients with positive
    /// lower bounds.
    pub fn moments(&self, domain: &ParameterDomain) -> Result<Moments> {
        if domain.dim() != self.q {
            return Err(Error::config("domain dimension does not match the benchmark"));
        }
        if !domain.is_all_uniform() {
            return Err(Error::config("analytic moments need uniform marginals"));
        }
        let mut mean = 0.0;
        let mut variance = 0.0;
        for (&c, &(a, b)) in self.coeffs.iter().zip(domain.bounds()) {
            if !(a > 0.0) {
                return Err(Error::config(format!(
                    "analytic moments need positive diffusivity bounds, got [{a}, {b}]"
                )));
            }
            let (inv, inv_var) = if a == b {
                (1.0 / a, 0.0)
            } else {
                // E[1/y] = ln(b/a)/(b-a), E[1/y^2] = 1/(ab).
                let e1 = (b / a).ln() / (b - a);
                let e2 = 1.0 / (a * b);
                (e1, (e2 - e1 * e1).max(0.0))
            };
            mean += c * inv;
            variance += c * c * inv_var;
        }
        let f = self.source;
        Ok(Moments {
            mean: f * mean,
            variance: f * f * variance,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Adaptive Simpson quadrature, used as an independent oracle.
    fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
        fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
            let m = 0.5 * (a + b);
            let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
            let (flm, frm) = (f(lm), f(rm));
            let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
                return left + right + (left + right - whole) / 15.0;
            }
            rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
        let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
        let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        rec(f, a, b, fa, fm, fb, whole, tol, 50)
    }

    /// `u(x) = ∫_0^x (1/κ(z)) ∫_z^1 f dξ dz` integrated piece by piece.
    fn quad_solution(y: &[f64], x: f64) -> f64 {
        let q = y.len();
        let mut total = 0.0;
        for (i, &yq) in y.iter().enumerate() {
            let a = i as f64 / q as f64;
            let b = ((i + 1) as f64 / q as f64).min(x);
            if a >= x {
                break;
            }
            total += simpson(&|z: f64| simpson(&|_xi: f64| 1.0, z, 1.0, 1e-15) / yq, a, b, 1e-14);
        }
        total
    }

    fn quad_output(y: &[f64]) -> f64 {
        let q = y.len();
        (0..q)
            .map(|i| {
                let a = i as f64 / q as f64;
                let b = (i + 1) as f64 / q as f64;
                simpson(&|x: f64| quad_solution(y, x), a, b, 1e-14)
            })
            .sum()
    }

    #[test]
    fn constant_field_solution() {
        let bm = HeatBenchmark::new(1, 1.0).unwrap();
        let y = ParameterVector::new(vec![1.0]);
        assert!((bm.solution(&y, 0.5).unwrap() - 0.375).abs() < 1e-15);
        assert_eq!(bm.solution(&y, 0.0).unwrap(), 0.0);
        assert!((bm.output(&y).unwrap() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn two_subdomain_solution_matches_quadrature() {
        let bm = HeatBenchmark::new(2, 1.0).unwrap();
        let y = ParameterVector::new(vec![0.5, 1.0]);
        let exact = bm.solution(&y, 1.0).unwrap();
        let oracle = quad_solution(&[0.5, 1.0], 1.0);
        assert!((exact - oracle).abs() < 1e-12, "{exact} vs {oracle}");
        // (1 - 1/4)/(2·0.5) + (1/4)/(2·1) = 0.875
        assert!((exact - 0.875).abs() < 1e-15);
    }

    #[test]
    fn output_reduction_matches_double_integral() {
        let bm = HeatBenchmark::new(10, 1.0).unwrap();
        let dom = ParameterDomain::uniform(10, 0.1, 1.0).unwrap();
        let ys = crate::model::SampleStream::new(99, 0).draw_samples(&dom, 100);
        for y in &ys {
            let s = bm.output(y).unwrap();
            let oracle = quad_output(y.as_slice());
            assert!(((s - oracle) / oracle).abs() < 1e-10, "{s} vs {oracle}");
        }
    }

    #[test]
    fn coefficients_sum_to_one_third() {
        for q in [1, 2, 7, 10, 17] {
            let bm = HeatBenchmark::new(q, 1.0).unwrap();
            let sum: f64 = bm.coefficients().iter().sum();
            assert!((sum - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn benchmark_output_values() {
        let bm = HeatBenchmark::new(10, 1.0).unwrap();
        let ones = ParameterVector::constant(10, 1.0);
        assert!((bm.output(&ones).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        let tenth = ParameterVector::constant(10, 0.1);
        assert!((bm.output(&tenth).unwrap() - 10.0 / 3.0).abs() < 1e-14);
        assert!(bm.output(&ParameterVector::new(vec![0.0; 10])).is_err());
        assert!(bm.output(&ParameterVector::new(vec![-1.0; 10])).is_err());
    }

    #[test]
    fn benchmark_moments() {
        let bm = HeatBenchmark::new(10, 1.0).unwrap();
        let dom = ParameterDomain::uniform(10, 0.1, 1.0).unwrap();
        let m = bm.moments(&dom).unwrap();
        let e_inv = 10f64.ln() / 0.9;
        assert!((m.mean - e_inv / 3.0).abs() < 1e-15);
        assert!((m.mean - 0.852809).abs() < 5e-7);
        // Σ c_q^2 = Σ_k (3k^2+3k+1)^2 / 3000^2 = 179002 / 9e6.
        let sum_c2 = 179_002.0 / 9.0e6;
        let expected = sum_c2 * (10.0 - e_inv * e_inv);
        assert!((m.variance - expected).abs() < 1e-15);
        assert!((m.variance - 0.0687).abs() < 5e-5);
    }

    #[test]
    fn degenerate_domain_moments() {
        let bm = HeatBenchmark::new(10, 1.0).unwrap();
        let m = bm.moments(&ParameterDomain::uniform(10, 1.0, 1.0).unwrap()).unwrap();
        assert!((m.mean - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(m.variance, 0.0);
        let bm1 = HeatBenchmark::new(1, 1.0).unwrap();
        let m1 = bm1.moments(&ParameterDomain::uniform(1, 1.0, 1.0).unwrap()).unwrap();
        assert!((m1.mean - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn moments_reject_nonpositive_bounds() {
        let bm = HeatBenchmark::new(2, 1.0).unwrap();
        assert!(bm.moments(&ParameterDomain::uniform(2, -1.0, 1.0).unwrap()).is_err());
        assert!(bm.moments(&ParameterDomain::uniform(3, 0.1, 1.0).unwrap()).is_err());
    }
}
