use crate::error::{Error, Result};
use crate::mc::{clt_halfwidth, mean_var, sum_by};

/// Samples of one telescoping channel: fine outputs, coarse outputs (absent
/// on the last level) and the tag of the stream they were drawn from.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelData {
    pub fine: Vec<f64>,
    pub coarse: Option<Vec<f64>>,
    pub tag: u64,
}

impl LevelData {
    pub fn new(fine: Vec<f64>, coarse: Option<Vec<f64>>, tag: u64) -> Result<Self> {
        if let Some(c) = &coarse {
            if c.len() != fine.len() {
                return Err(Error::config("fine and coarse samples differ in length"));
            }
        }
        Ok(Self { fine, coarse, tag })
    }

    pub fn len(&self) -> usize {
        self.fine.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fine.is_empty()
    }

    /// Channel value `z_m = fine_m − coarse_m`.
    pub fn z(&self, m: usize) -> f64 {
        self.fine[m] - self.coarse.as_ref().map_or(0.0, |c| c[m])
    }

    /// `ζ_m = (fine_m − e)² − (coarse_m − e)²`.
    pub fn zeta(&self, m: usize, e: f64) -> f64 {
        (self.fine[m] - e).powi(2) - self.coarse.as_ref().map_or(0.0, |c| (c[m] - e).powi(2))
    }

    pub fn z_values(&self) -> Vec<f64> {
        (0..self.len()).map(|m| self.z(m)).collect()
    }

    pub fn zeta_values(&self, e: f64) -> Vec<f64> {
        (0..self.len()).map(|m| self.zeta(m, e)).collect()
    }

    pub fn append(&mut self, other: LevelData) -> Result<()> {
        if self.coarse.is_some() != other.coarse.is_some() {
            return Err(Error::config("cannot append samples of a different channel"));
        }
        self.fine.extend(other.fine);
        if let (Some(c), Some(o)) = (&mut self.coarse, other.coarse) {
            c.extend(o);
        }
        Ok(())
    }
}

/// Per-level sample statistics.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelStats {
    pub m: usize,
    /// `E_{M_ℓ}[z_ℓ]`.
    pub mean: f64,
    /// `V_{M_ℓ}[z_ℓ]`.
    pub var: f64,
    /// `E_{M_ℓ}[ζ_ℓ]` and `V_{M_ℓ}[ζ_ℓ]`, present once the variance is estimated.
    pub zeta_mean: Option<f64>,
    pub zeta_var: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MVREstimate {
    pub expectation: f64,
    pub delta_e: f64,
    pub variance: Option<f64>,
    pub delta_v: Option<f64>,
    /// Predicted bias `−Σ_ℓ V_{M_ℓ}[z_ℓ]/M_ℓ` of the variance estimate.
    pub variance_bias: f64,
    pub levels: Vec<LevelStats>,
    pub a: f64,
}

impl MVREstimate {
    pub fn sample_counts(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.m).collect()
    }
}

fn check_levels(levels: &[LevelData], allow_shared: bool) -> Result<()> {
    if levels.len() < 2 {
        return Err(Error::config("an MVR estimator needs at least two levels"));
    }
    let last = levels.len() - 1;
    for (l, d) in levels.iter().enumerate() {
        if d.len() < 2 {
            return Err(Error::InsufficientSamples(format!("level {l} has {} samples, need 2", d.len())));
        }
        if (l < last) != d.coarse.is_some() {
            return Err(Error::config(format!(
                "level {l} must {} a coarse channel",
                if l < last { "have" } else { "not have" }
            )));
        }
        if d.fine.iter().chain(d.coarse.iter().flatten()).any(|v| !v.is_finite()) {
            return Err(Error::config(format!("level {l} contains non-finite outputs")));
        }
        if !allow_shared && levels[..l].iter().any(|o| o.tag == d.tag) {
            return Err(Error::config(format!("levels share stream tag {}", d.tag)));
        }
    }
    Ok(())
}

/// Telescoping estimate `Σ_ℓ E_{M_ℓ}[z_ℓ]` with half-width
/// `a √(Σ_ℓ V_{M_ℓ}[z_ℓ]/M_ℓ)`.
///
/// Levels must come from distinct streams; `allow_shared` lifts that check
/// for diagnostics on a merged sample set.
pub fn multilevel_expectation(levels: &[LevelData], a: f64, allow_shared: bool) -> Result<MVREstimate> {
    check_levels(levels, allow_shared)?;
    let mut stats = Vec::with_capacity(levels.len());
    for d in levels {
        let (mean, var) = mean_var(&d.z_values())?;
        stats.push(LevelStats {
            m: d.len(),
            mean,
            var,
            zeta_mean: None,
            zeta_var: None,
        });
    }
    let expectation = stats.iter().map(|s| s.mean).sum();
    let ve: f64 = stats.iter().map(|s| s.var / s.m as f64).sum();
    Ok(MVREstimate {
        expectation,
        delta_e: clt_halfwidth(ve, 1, a),
        variance: None,
        delta_v: None,
        variance_bias: variance_bias(&stats),
        levels: stats,
        a,
    })
}

/// `−Σ_ℓ V_{M_ℓ}[z_ℓ] / M_ℓ`.
pub fn variance_bias(levels: &[LevelStats]) -> f64 {
    -levels.iter().map(|s| s.var / s.m as f64).sum::<f64>()
}

/// `Σ_ℓ E_{M_ℓ}[ζ_ℓ]` with `ζ` centered at `center`.
pub fn zeta_sum(levels: &[LevelData], center: f64) -> f64 {
    levels
        .iter()
        .map(|d| sum_by(d.len(), |m| d.zeta(m, center)) / d.len() as f64)
        .sum()
}

/// Expectation and variance estimates. The variance telescopes the squared
/// deviations `ζ` centered at the MVR mean; it is biased low by
/// `Σ_ℓ V[z_ℓ]/M_ℓ`, which is reported as `variance_bias`.
pub fn multilevel_variance(levels: &[LevelData], a: f64, allow_shared: bool) -> Result<MVREstimate> {
    let mut est = multilevel_expectation(levels, a, allow_shared)?;
    let e = est.expectation;
    let mut vv = 0.0;
    for (d, s) in levels.iter().zip(est.levels.iter_mut()) {
        let (zm, zv) = mean_var(&d.zeta_values(e))?;
        s.zeta_mean = Some(zm);
        s.zeta_var = Some(zv);
        vv += zv / d.len() as f64;
    }
    est.variance = Some(est.levels.iter().map(|s| s.zeta_mean.unwrap()).sum());
    est.delta_v = Some(clt_halfwidth(vv, 1, a));
    Ok(est)
}

/// `E_{M_0}[s_h − s_{N_1}] + E_{M_1}[s_{N_1}]`.
pub fn two_level_expectation(level0: &LevelData, level1: &LevelData, a: f64) -> Result<MVREstimate> {
    multilevel_expectation(&[level0.clone(), level1.clone()], a, false)
}

pub fn two_level_variance(level0: &LevelData, level1: &LevelData, a: f64) -> Result<MVREstimate> {
    multilevel_variance(&[level0.clone(), level1.clone()], a, false)
}
