use std::time::Instant;

use super::{multilevel_variance, sample_level, LevelData, LevelPlan, MVREstimate, OutputHierarchy, TestSetStats};
use crate::error::{Error, Result};
use crate::mc::mean_var;
use crate::model::{ParameterDomain, SampleStream};

#[derive(Clone, Debug, PartialEq)]
pub struct AdaptiveOptions {
    pub a: f64,
    pub eps_tol: f64,
    pub seed: u64,
    /// Level `ℓ` draws from stream tag `base_tag + ℓ`.
    pub base_tag: u64,
    /// Minimum sample count per level.
    pub threshold: usize,
    /// Factor applied to the required count when a level is grown.
    pub safety: f64,
    /// Largest allowed growth of a level per round.
    pub max_growth: f64,
    /// Per-level sample cap; exceeding it aborts the run.
    pub max_samples: usize,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        Self {
            a: crate::mc::A_95,
            eps_tol: 1e-3,
            seed: 0,
            base_tag: 0,
            threshold: 30,
            safety: 1.1,
            max_growth: 2.0,
            max_samples: 100_000_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AdaptiveResult {
    pub estimate: MVREstimate,
    pub rounds: usize,
    /// `Σ_ℓ M_ℓ c_ℓ` with the plan's per-sample costs.
    pub cost: f64,
    /// `a² V[s_h] / ε²`, the plain MC sample count for the same tolerance.
    pub m_equiv: f64,
    /// `t_h M_equiv / cost`.
    pub speedup: f64,
    /// Wall-clock time spent sampling, in seconds.
    pub elapsed: f64,
}

/// Grows each level until `M_ℓ ≥ a² V_{M_ℓ}[z_ℓ] / (w_ℓ ε²)` and
/// `M_ℓ ≥ threshold`, so that `Δ^E ≤ ε`.
///
/// With `test_set`, its points seed level 0; they must come from a stream
/// other than `(seed, base_tag ..= base_tag + L)`.
pub fn adaptive_run<H: OutputHierarchy + ?Sized>(
    h: &H,
    plan: &LevelPlan,
    domain: &ParameterDomain,
    opts: &AdaptiveOptions,
    test_set: Option<&TestSetStats>,
) -> Result<AdaptiveResult> {
    if !(opts.eps_tol > 0.0) || !(opts.a > 0.0) {
        return Err(Error::config("tolerance and confidence coefficient must be positive"));
    }
    if opts.threshold < 2 || !(opts.safety >= 1.0) || !(opts.max_growth > 1.0) {
        return Err(Error::config("invalid adaptive-run options"));
    }
    let spec = &plan.spec;
    spec.check_against(h.n_max())?;
    let start = Instant::now();
    let nl = spec.num_levels() + 1;
    let mut streams: Vec<SampleStream> =
        (0..nl).map(|l| SampleStream::new(opts.seed, opts.base_tag + l as u64)).collect();

    let draw = |l: usize, k: usize, stream: &mut SampleStream| -> Result<LevelData> {
        let ys = stream.draw_samples(domain, k);
        sample_level(h, spec, l, &ys, opts.base_tag + l as u64)
    };

    let mut levels = Vec::with_capacity(nl);
    for (l, stream) in streams.iter_mut().enumerate() {
        let mut d = match (l, test_set) {
            (0, Some(t)) => t.level0_data(spec, opts.base_tag)?,
            _ => LevelData::new(Vec::new(), (l < nl - 1).then(Vec::new), opts.base_tag + l as u64)?,
        };
        if d.len() < opts.threshold {
            d.append(draw(l, opts.threshold - d.len(), stream)?)?;
        }
        levels.push(d);
    }

    let w = plan.weights.as_slice();
    let mut history: Vec<Vec<f64>> = vec![Vec::new(); nl];
    let mut rounds = 0;
    loop {
        rounds += 1;
        let mut done = true;
        for l in 0..nl {
            let var = mean_var(&levels[l].z_values())?.1;
            let hist = &mut history[l];
            hist.push(var);
            let k = hist.len();
            if k >= 4 && hist[k - 3..].iter().zip(&hist[k - 4..k - 1]).all(|(b, a)| b > a) && var > 10.0 * hist[k - 4]
            {
                return Err(Error::Diverged(format!("level {l} variance history {:?}", &hist[k - 4..])));
            }
            let need = (opts.a * opts.a * var / (w[l] * opts.eps_tol * opts.eps_tol)).ceil();
            let target = need.max(opts.threshold as f64);
            let m = levels[l].len();
            if (m as f64) < target {
                done = false;
                let grown = (opts.safety * target).ceil().min((opts.max_growth * m as f64).ceil());
                if grown > opts.max_samples as f64 {
                    return Err(Error::Diverged(format!(
                        "level {l} needs {target:e} samples, above the cap {}",
                        opts.max_samples
                    )));
                }
                let extra = draw(l, grown as usize - m, &mut streams[l])?;
                levels[l].append(extra)?;
            }
        }
        if done {
            break;
        }
    }

    let estimate = multilevel_variance(&levels, opts.a, false)?;
    let cost: f64 = levels.iter().zip(&plan.per_sample).map(|(d, c)| d.len() as f64 * c).sum();
    let m_equiv = opts.a * opts.a * estimate.variance.unwrap().max(0.0) / (opts.eps_tol * opts.eps_tol);
    Ok(AdaptiveResult {
        speedup: plan.timings.t_h * m_equiv / cost,
        estimate,
        rounds,
        cost,
        m_equiv,
        elapsed: start.elapsed().as_secs_f64(),
    })
}
