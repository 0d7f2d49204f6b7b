use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::ops::Index;

/// Marginal density of one random coefficient.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
#[non_exhaustive]
pub enum Density {
    Uniform,
}

impl Density {
    /// Maps a uniform variate in `[0, 1)` to the interval `[lo, hi]`.
    pub fn transform(self, u: f64, lo: f64, hi: f64) -> f64 {
        match self {
            Density::Uniform => lo + (hi - lo) * u,
        }
    }

    /// Mean of the marginal on `[lo, hi]`.
    pub fn mean(self, lo: f64, hi: f64) -> f64 {
        match self {
            Density::Uniform => 0.5 * (lo + hi),
        }
    }
}

/// Product domain `Λ = Π_q [lo_q, hi_q]` with independent marginals.
///
/// Degenerate intervals (`lo == hi`) are allowed and describe deterministic
/// coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct ParameterDomain {
    bounds: Vec<(f64, f64)>,
    densities: Vec<Density>,
}

impl ParameterDomain {
    pub fn new(bounds: Vec<(f64, f64)>, densities: Vec<Density>) -> Result<Self> {
        if bounds.is_empty() {
            return Err(Error::config("parameter domain needs at least one coefficient"));
        }
        if bounds.len() != densities.len() {
            return Err(Error::config(format!(
                "{} intervals but {} densities",
                bounds.len(),
                densities.len()
            )));
        }
        for (q, &(lo, hi)) in bounds.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite()) || lo > hi {
                return Err(Error::config(format!(
                    "interval {q} is invalid: [{lo}, {hi}]"
                )));
            }
        }
        Ok(Self { bounds, densities })
    }

    /// `q` identical uniform coordinates on `[lo, hi]`.
    pub fn uniform(q: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![(lo, hi); q], vec![Density::Uniform; q])
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn densities(&self) -> &[Density] {
        &self.densities
    }

    pub fn contains(&self, y: &ParameterVector) -> bool {
        y.len() == self.dim()
            && y
                .iter()
                .zip(&self.bounds)
                .all(|(&v, &(lo, hi))| v >= lo && v <= hi)
    }

    /// Componentwise mean of the product density.
    pub fn mean(&self) -> ParameterVector {
        ParameterVector(
            self.bounds
                .iter()
                .zip(&self.densities)
                .map(|(&(lo, hi), d)| d.mean(lo, hi))
                .collect(),
        )
    }

    pub fn is_all_uniform(&self) -> bool {
        self.densities.iter().all(|d| *d == Density::Uniform)
    }
}

/// A point `y = (y_1, …, y_Q)` of the parameter domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParameterVector(pub Vec<f64>);

impl ParameterVector {
    pub fn new(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn constant(q: usize, value: f64) -> Self {
        Self(vec![value; q])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.0.iter()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

impl Index<usize> for ParameterVector {
    type Output = f64;

    fn index(&self, q: usize) -> &f64 {
        &self.0[q]
    }
}

impl From<Vec<f64>> for ParameterVector {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_reversed_interval() {
        assert!(ParameterDomain::uniform(2, 1.0, 0.5).is_err());
        assert!(ParameterDomain::uniform(0, 0.0, 1.0).is_err());
        assert!(ParameterDomain::new(vec![(0.0, 1.0)], vec![]).is_err());
    }

    #[test]
    fn degenerate_interval_is_allowed() {
        let d = ParameterDomain::uniform(3, 1.0, 1.0).unwrap();
        assert_eq!(d.mean(), ParameterVector::constant(3, 1.0));
        assert!(d.contains(&ParameterVector::constant(3, 1.0)));
    }

    #[test]
    fn mean_of_benchmark_domain() {
        let d = ParameterDomain::uniform(10, 0.1, 1.0).unwrap();
        for v in d.mean().iter() {
            assert!((v - 0.55).abs() < 1e-15);
        }
    }
}
