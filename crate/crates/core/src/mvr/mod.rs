//! Model-and-variance-reduction estimators.
//!
//! A level spec `N_1 > … > N_L` defines `L + 1` telescoping channels:
//! level 0 samples `s_h − s_{N_1}`, level `ℓ` samples `s_{N_ℓ} − s_{N_{ℓ+1}}`
//! and level `L` samples `s_{N_L}`. Each level draws from its own stream.

mod adaptive;
mod cost;
mod estimator;
mod hierarchy;

pub use adaptive::{adaptive_run, AdaptiveOptions, AdaptiveResult};
pub use cost::{
    compare_level_counts, equivalent_cost, level_costs, measure_timings, optimal_weights, select_levels,
    LevelPlan, LevelRow, TestSetStats, Timings, WEIGHT_FLOOR,
};
pub use estimator::{
    multilevel_expectation, multilevel_variance, two_level_expectation, two_level_variance, variance_bias, zeta_sum, LevelData,
    LevelStats, MVREstimate,
};
pub use hierarchy::{sample_level, Fidelity, FullModel, OutputHierarchy, RbHierarchy};

use crate::error::{Error, Result};

/// Strictly decreasing RB dimensions `N_1 > N_2 > … > N_L ≥ 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LevelSpec {
    n: Vec<usize>,
}

impl LevelSpec {
    pub fn new(n: Vec<usize>) -> Result<Self> {
        if n.is_empty() {
            return Err(Error::config("level spec needs at least one RB dimension"));
        }
        if n.windows(2).any(|w| w[0] <= w[1]) {
            return Err(Error::config(format!("RB dimensions must be strictly decreasing, got {n:?}")));
        }
        if *n.last().unwrap() == 0 {
            return Err(Error::config("RB dimensions must be at least 1"));
        }
        Ok(Self { n })
    }

    /// Number of RB levels `L`; the spec has `L + 1` channels.
    pub fn num_levels(&self) -> usize {
        self.n.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.n
    }

    /// Fine and coarse fidelity of channel `level` (`0 ..= L`).
    pub fn channel(&self, level: usize) -> (Fidelity, Option<Fidelity>) {
        let l = self.n.len();
        assert!(level <= l, "level {level} out of range for L = {l}");
        let fine = if level == 0 { Fidelity::Full } else { Fidelity::Rb(self.n[level - 1]) };
        let coarse = (level < l).then(|| Fidelity::Rb(self.n[level]));
        (fine, coarse)
    }

    pub fn check_against(&self, n_max: usize) -> Result<()> {
        if self.n[0] > n_max {
            return Err(Error::config(format!("N_1 = {} exceeds N_max = {n_max}", self.n[0])));
        }
        Ok(())
    }
}

/// Positive level weights summing to one.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(w: Vec<f64>) -> Result<Self> {
        if w.is_empty() || w.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
            return Err(Error::config(format!("weights must be positive, got {w:?}")));
        }
        let s: f64 = w.iter().sum();
        if (s - 1.0).abs() > 1e-12 {
            return Err(Error::config(format!("weights must sum to 1, got {s}")));
        }
        Ok(Self(w))
    }

    pub fn uniform(n: usize) -> Self {
        Self(vec![1.0 / n as f64; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_validation() {
        assert!(LevelSpec::new(vec![]).is_err());
        assert!(LevelSpec::new(vec![5, 5]).is_err());
        assert!(LevelSpec::new(vec![3, 5]).is_err());
        assert!(LevelSpec::new(vec![2, 0]).is_err());
        let s = LevelSpec::new(vec![9, 5]).unwrap();
        assert_eq!(s.channel(0), (Fidelity::Full, Some(Fidelity::Rb(9))));
        assert_eq!(s.channel(1), (Fidelity::Rb(9), Some(Fidelity::Rb(5))));
        assert_eq!(s.channel(2), (Fidelity::Rb(5), None));
        assert!(s.check_against(8).is_err());
        assert!(s.check_against(9).is_ok());
    }

    #[test]
    fn weight_validation() {
        assert!(WeightVector::new(vec![0.5, 0.5]).is_ok());
        assert!(WeightVector::new(vec![0.5, 0.6]).is_err());
        assert!(WeightVector::new(vec![1.0, 0.0]).is_err());
        assert_eq!(WeightVector::uniform(4).as_slice(), &[0.25; 4]);
    }
}
