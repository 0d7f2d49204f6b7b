use std::time::Instant;

use super::{Fidelity, LevelData, LevelSpec, OutputHierarchy, WeightVector};
use crate::error::{Error, Result};
use crate::mc::mean_var;
use crate::model::ParameterVector;
use crate::par;

/// Weight given to zero-cost levels before renormalization.
pub const WEIGHT_FLOOR: f64 = 1e-6;

/// Outputs of every model on a fixed test set `Y_M̂`.
#[derive(Clone, Debug, PartialEq)]
pub struct TestSetStats {
    pub ys: Vec<ParameterVector>,
    pub full: Vec<f64>,
    /// `rb[n][m] = s_n(y_m)` for `n = 0 ..= N_max`.
    pub rb: Vec<Vec<f64>>,
}

impl TestSetStats {
    pub fn compute<H: OutputHierarchy + ?Sized>(h: &H, ys: Vec<ParameterVector>) -> Result<Self> {
        let rows = par::try_map_range(ys.len(), |m| h.all_outputs(&ys[m]))?;
        let full = rows.iter().map(|r| r.0).collect();
        let rb = (0..=h.n_max()).map(|n| rows.iter().map(|r| r.1[n]).collect()).collect();
        Self::from_outputs(ys, full, rb)
    }

    pub fn from_outputs(ys: Vec<ParameterVector>, full: Vec<f64>, rb: Vec<Vec<f64>>) -> Result<Self> {
        if full.len() < 2 {
            return Err(Error::InsufficientSamples("test set needs at least 2 points".into()));
        }
        if ys.len() != full.len() || rb.iter().any(|r| r.len() != full.len()) {
            return Err(Error::config("test-set outputs are incomplete"));
        }
        Ok(Self { ys, full, rb })
    }

    pub fn len(&self) -> usize {
        self.full.len()
    }

    pub fn is_empty(&self) -> bool {
        self.full.is_empty()
    }

    pub fn n_max(&self) -> usize {
        self.rb.len() - 1
    }

    fn values(&self, f: Fidelity) -> Result<&[f64]> {
        match f {
            Fidelity::Full => Ok(&self.full),
            Fidelity::Rb(n) => self
                .rb
                .get(n)
                .map(|v| v.as_slice())
                .ok_or_else(|| Error::config(format!("no cached outputs for N = {n}"))),
        }
    }

    /// Sample variance of `s_fine − s_coarse` (or of `s_fine`).
    pub fn variance(&self, fine: Fidelity, coarse: Option<Fidelity>) -> Result<f64> {
        let f = self.values(fine)?;
        let d: Vec<f64> = match coarse {
            Some(c) => f.iter().zip(self.values(c)?).map(|(a, b)| a - b).collect(),
            None => f.to_vec(),
        };
        Ok(mean_var(&d)?.1)
    }

    /// The test set as level-0 samples of `spec`, for reuse in the adaptive loop.
    pub fn level0_data(&self, spec: &LevelSpec, tag: u64) -> Result<LevelData> {
        spec.check_against(self.n_max())?;
        LevelData::new(self.full.clone(), Some(self.rb[spec.dims()[0]].clone()), tag)
    }
}

/// Per-evaluation wall-clock costs (seconds) of the full and RB models.
#[derive(Clone, Debug, PartialEq)]
pub struct Timings {
    pub t_h: f64,
    /// `t_rb[n]` is the cost of one online output at dimension `n`.
    pub t_rb: Vec<f64>,
}

impl Timings {
    pub fn cost(&self, f: Fidelity) -> f64 {
        match f {
            Fidelity::Full => self.t_h,
            Fidelity::Rb(n) => self.t_rb[n],
        }
    }

    /// Cost of one sample of each channel of `spec`.
    pub fn per_sample(&self, spec: &LevelSpec) -> Vec<f64> {
        (0..=spec.num_levels())
            .map(|l| {
                let (f, c) = spec.channel(l);
                self.cost(f) + c.map_or(0.0, |c| self.cost(c))
            })
            .collect()
    }
}

/// Median over 5 passes of the per-evaluation cost over `ys`. Every pass
/// times all fidelities back to back, so slow drift in machine speed shifts
/// them together and leaves their ratios intact.
pub fn measure_timings<H: OutputHierarchy + ?Sized>(h: &H, ys: &[ParameterVector]) -> Result<Timings> {
    if ys.is_empty() {
        return Err(Error::config("timing needs at least one parameter point"));
    }
    let fidelities: Vec<Fidelity> =
        std::iter::once(Fidelity::Full).chain((1..=h.n_max()).map(Fidelity::Rb)).collect();
    for &f in &fidelities {
        for y in ys {
            h.output(f, y)?;
        }
    }
    let mut samples = vec![Vec::with_capacity(5); fidelities.len()];
    for _ in 0..5 {
        for (&f, times) in fidelities.iter().zip(&mut samples) {
            let start = Instant::now();
            for y in ys {
                std::hint::black_box(h.output(f, std::hint::black_box(y))?);
            }
            times.push(start.elapsed().as_secs_f64() / ys.len() as f64);
        }
    }
    let medians: Vec<f64> = samples
        .into_iter()
        .map(|mut t| {
            t.sort_by(f64::total_cmp);
            t[2]
        })
        .collect();
    let mut t_rb = vec![0.0];
    t_rb.extend_from_slice(&medians[1..]);
    Ok(Timings { t_h: medians[0], t_rb })
}

/// Per-level costs `Ĉ^ℓ = V_M̂[z_ℓ] · (cost of one z_ℓ sample)`.
pub fn level_costs(spec: &LevelSpec, stats: &TestSetStats, timings: &Timings) -> Result<Vec<f64>> {
    spec.check_against(stats.n_max())?;
    if timings.t_rb.len() <= spec.dims()[0] {
        return Err(Error::config("timings missing for the requested RB dimensions"));
    }
    let per = timings.per_sample(spec);
    (0..=spec.num_levels())
        .map(|l| {
            let (f, c) = spec.channel(l);
            Ok(stats.variance(f, c)? * per[l])
        })
        .collect()
}

/// `Ĉ_L = Σ_ℓ Ĉ^ℓ / w_ℓ`.
pub fn equivalent_cost(costs: &[f64], w: &WeightVector) -> f64 {
    costs.iter().zip(w.as_slice()).map(|(c, w)| c / w).sum()
}

/// Minimizer of `Σ Ĉ^ℓ / w_ℓ` subject to `Σ w_ℓ = 1`: `w_ℓ ∝ √Ĉ^ℓ`.
pub fn optimal_weights(costs: &[f64]) -> Result<WeightVector> {
    if costs.is_empty() || costs.iter().any(|&c| !(c >= 0.0) || !c.is_finite()) {
        return Err(Error::config(format!("level costs must be finite and nonnegative, got {costs:?}")));
    }
    let roots: Vec<f64> = costs.iter().map(|c| c.sqrt()).collect();
    let total: f64 = roots.iter().sum();
    if total == 0.0 {
        return Ok(WeightVector::uniform(costs.len()));
    }
    let w: Vec<f64> = roots.iter().map(|r| (r / total).max(WEIGHT_FLOOR)).collect();
    let s: f64 = w.iter().sum();
    WeightVector::new(w.into_iter().map(|x| x / s).collect())
}

/// A level configuration with its predicted cost.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelPlan {
    pub spec: LevelSpec,
    pub weights: WeightVector,
    /// `Ĉ^ℓ` per level.
    pub level_costs: Vec<f64>,
    /// `Ĉ_L`.
    pub predicted_cost: f64,
    /// Cost of one sample per level.
    pub per_sample: Vec<f64>,
    /// `V_M̂[s_h] t_h / Ĉ_L`.
    pub predicted_speedup: f64,
    pub timings: Timings,
}

impl LevelPlan {
    pub fn new(spec: LevelSpec, stats: &TestSetStats, timings: &Timings) -> Result<Self> {
        let level_costs = level_costs(&spec, stats, timings)?;
        let weights = optimal_weights(&level_costs)?;
        Self::with_weights(spec, weights, stats, timings)
    }

    pub fn with_weights(spec: LevelSpec, weights: WeightVector, stats: &TestSetStats, timings: &Timings) -> Result<Self> {
        if weights.len() != spec.num_levels() + 1 {
            return Err(Error::config("one weight per level is required"));
        }
        let level_costs = level_costs(&spec, stats, timings)?;
        let predicted_cost = equivalent_cost(&level_costs, &weights);
        let baseline = stats.variance(Fidelity::Full, None)? * timings.t_h;
        Ok(Self {
            per_sample: timings.per_sample(&spec),
            predicted_speedup: baseline / predicted_cost,
            spec,
            weights,
            level_costs,
            predicted_cost,
            timings: timings.clone(),
        })
    }
}

/// Strictly decreasing `l`-tuples from `1 ..= n_max` in lexicographic order.
fn decreasing_tuples(l: usize, n_max: usize) -> Vec<Vec<usize>> {
    fn rec(l: usize, below: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == l {
            out.push(cur.clone());
            return;
        }
        let need = l - cur.len();
        for n in need..below {
            cur.push(n);
            rec(l, n, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(l, n_max + 1, &mut Vec::new(), &mut out);
    out.sort();
    out
}

/// Exhaustive search for the `l`-level spec minimizing `Ĉ_L` under its KKT
/// weights. Ties go to the lexicographically smallest tuple.
pub fn select_levels(l: usize, stats: &TestSetStats, timings: &Timings) -> Result<LevelPlan> {
    if l == 0 {
        return Err(Error::config("at least one RB level is required"));
    }
    let n_max = stats.n_max().min(timings.t_rb.len().saturating_sub(1));
    let tuples = decreasing_tuples(l, n_max);
    if tuples.is_empty() {
        return Err(Error::config(format!("no strictly decreasing {l}-tuple fits N_max = {n_max}")));
    }
    let plans = par::try_map_range(tuples.len(), |i| {
        LevelPlan::new(LevelSpec::new(tuples[i].clone())?, stats, timings)
    })?;
    let mut best: Option<LevelPlan> = None;
    for p in plans {
        if best.as_ref().is_none_or(|b| p.predicted_cost < b.predicted_cost) {
            best = Some(p);
        }
    }
    Ok(best.unwrap())
}

/// One row of the level-count comparison.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelRow {
    pub plan: LevelPlan,
    /// `Ĉ_L / min_L' Ĉ_L'`.
    pub normalized: f64,
}

/// Best plan for each level count with its cost relative to the overall best.
pub fn compare_level_counts(ls: &[usize], stats: &TestSetStats, timings: &Timings) -> Result<Vec<LevelRow>> {
    let plans = ls.iter().map(|&l| select_levels(l, stats, timings)).collect::<Result<Vec<_>>>()?;
    let best = plans.iter().map(|p| p.predicted_cost).fold(f64::INFINITY, f64::min);
    Ok(plans
        .into_iter()
        .map(|plan| LevelRow {
            normalized: plan.predicted_cost / best,
            plan,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tuples() {
        assert_eq!(decreasing_tuples(1, 3), vec![vec![1], vec![2], vec![3]]);
        assert_eq!(decreasing_tuples(2, 3), vec![vec![2, 1], vec![3, 1], vec![3, 2]]);
        assert!(decreasing_tuples(3, 2).is_empty());
        assert_eq!(decreasing_tuples(3, 10).len(), 120);
    }

    #[test]
    fn weight_examples() {
        assert_eq!(optimal_weights(&[1.0, 1.0]).unwrap().as_slice(), &[0.5, 0.5]);
        let w = optimal_weights(&[4.0, 1.0]).unwrap();
        assert!((w.as_slice()[0] - 2.0 / 3.0).abs() < 1e-15 && (w.as_slice()[1] - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(optimal_weights(&[0.0; 3]).unwrap(), WeightVector::uniform(3));
        let w = optimal_weights(&[0.0, 1.0]).unwrap();
        assert!(w.as_slice()[0] > 0.0 && w.as_slice()[0] < 1.1 * WEIGHT_FLOOR);
        assert!(optimal_weights(&[-1.0, 1.0]).is_err());
    }
}
