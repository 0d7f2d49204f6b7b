//! Experiment configuration, read from TOML.
//!
//! Every block has defaults matching the heat benchmark; unknown keys are
//! rejected. See `configs/` for annotated examples.

use std::path::{Path, PathBuf};

use rbmvr_core::hdg::{HdgProblem, Mesh1D};
use rbmvr_core::model::{HeatBenchmark, ParameterDomain};
use rbmvr_core::mvr::{AdaptiveOptions, LevelSpec, Timings};
use serde::Deserialize;

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemKind {
    /// Piecewise-constant diffusivity, homogeneous Dirichlet at 0, insulated at 1.
    Heat,
    /// Helmholtz with an outgoing impedance condition (complex arithmetic).
    Helmholtz,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Truth {
    /// The HDG discretization.
    Hdg,
    /// The closed-form benchmark output (heat only).
    Analytic,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelConfig {
    pub kind: ProblemKind,
    pub q: usize,
    /// Parameter range `[lo, hi]` shared by all `y_q`.
    pub bounds: [f64; 2],
    pub source: f64,
    pub wavenumber: f64,
    /// Model evaluating `s_h` in the sampling methods.
    pub truth: Truth,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            kind: ProblemKind::Heat,
            q: 10,
            bounds: [0.1, 1.0],
            source: 1.0,
            wavenumber: 6.0,
            truth: Truth::Hdg,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiscretizationConfig {
    pub elements: usize,
    pub degree: usize,
    pub tau: f64,
}

impl Default for DiscretizationConfig {
    fn default() -> Self {
        Self {
            elements: 10,
            degree: 2,
            tau: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RbConfig {
    pub n_max: usize,
    pub training: usize,
    pub seed: u64,
    pub compliant: bool,
    /// Model file name inside the output directory.
    pub model_file: String,
}

impl Default for RbConfig {
    fn default() -> Self {
        Self {
            n_max: 10,
            training: 1000,
            seed: 1,
            compliant: true,
            model_file: "rb_model.txt".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct McConfig {
    pub a: f64,
    pub eps_tol: f64,
    pub seed: u64,
    pub replications: usize,
    pub m_schedule: Vec<usize>,
    /// RB dimension used by the MC-RB method.
    pub n_rb: usize,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            a: 1.96,
            eps_tol: 1e-3,
            seed: 42,
            replications: 100,
            m_schedule: vec![100, 1000, 10_000],
            n_rb: 9,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MvrConfig {
    /// RB dimensions `N_1 > … > N_L`; empty selects them from the test set.
    pub levels: Vec<usize>,
    /// Level counts compared by `select`.
    pub l_range: Vec<usize>,
    /// Level count used when `levels` is empty.
    pub l: usize,
    /// Fixed-schedule runs use `M_ℓ = ratio^(L−ℓ) M`.
    pub ratio: f64,
    /// Grow the samples adaptively to `eps_tol` instead of the fixed schedule.
    pub adaptive: bool,
    pub test_set: usize,
    pub test_seed: u64,
    pub threshold: usize,
    pub safety: f64,
    pub max_growth: f64,
    /// Seed level 0 of adaptive runs with the test set.
    pub reuse_test_set: bool,
}

impl Default for MvrConfig {
    fn default() -> Self {
        Self {
            levels: vec![5],
            l_range: vec![1, 2, 3],
            l: 1,
            ratio: 0.1,
            adaptive: false,
            test_set: 1000,
            test_seed: 7,
            threshold: 30,
            safety: 1.1,
            max_growth: 2.0,
            reuse_test_set: false,
        }
    }
}

/// Per-evaluation costs replacing measured timings.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimingsConfig {
    pub t_h: f64,
    /// `t_rb[n]` for `n = 0 ..= N_max`.
    pub t_rb: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: "out".into() }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub id: String,
    pub model: ModelConfig,
    pub discretization: DiscretizationConfig,
    pub rb: RbConfig,
    pub mc: McConfig,
    pub mvr: MvrConfig,
    pub timings: Option<TimingsConfig>,
    pub output: OutputConfig,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let mut cfg: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        if cfg.id.is_empty() {
            cfg.id = "experiment".into();
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            e => e,
        })
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        let m = &self.model;
        if m.q == 0 {
            return bad("model.q must be at least 1".into());
        }
        if !(m.bounds[0] < m.bounds[1]) && m.bounds[0] != m.bounds[1] {
            return bad(format!("model.bounds must satisfy lo <= hi, got {:?}", m.bounds));
        }
        if m.kind == ProblemKind::Heat && !(m.bounds[0] > 0.0) {
            return bad("heat diffusivities need a positive lower bound".into());
        }
        if m.truth == Truth::Analytic && m.kind != ProblemKind::Heat {
            return bad("the analytic truth exists only for the heat problem".into());
        }
        if self.discretization.elements == 0 || !(self.discretization.tau > 0.0) {
            return bad("discretization needs at least one element and tau > 0".into());
        }
        if self.rb.n_max == 0 || self.rb.training == 0 {
            return bad("rb.n_max and rb.training must be positive".into());
        }
        let c = &self.mc;
        if !(c.a > 0.0) || !(c.eps_tol > 0.0) {
            return bad("mc.a and mc.eps_tol must be positive".into());
        }
        if c.replications == 0 || c.m_schedule.iter().any(|&m| m < 2) {
            return bad("mc.replications must be positive and every M at least 2".into());
        }
        if c.n_rb > self.rb.n_max {
            return bad(format!("mc.n_rb = {} exceeds rb.n_max = {}", c.n_rb, self.rb.n_max));
        }
        let v = &self.mvr;
        if !v.levels.is_empty() {
            LevelSpec::new(v.levels.clone())
                .and_then(|s| s.check_against(self.rb.n_max))
                .map_err(|e| CliError::Config(format!("mvr.levels: {e}")))?;
        }
        if !(v.ratio > 0.0 && v.ratio <= 1.0) || v.test_set < 2 || v.threshold < 2 {
            return bad("mvr.ratio must lie in (0, 1], test_set and threshold must be at least 2".into());
        }
        if let Some(t) = &self.timings {
            if t.t_rb.len() != self.rb.n_max + 1 || !(t.t_h >= 0.0) || t.t_rb.iter().any(|x| !(*x >= 0.0)) {
                return bad("timings need t_h >= 0 and N_max + 1 nonnegative t_rb entries".into());
            }
        }
        Ok(())
    }

    /// Level counts must satisfy `1 <= L < N_max`. Checked only by the
    /// commands that build level hierarchies, so a one-snapshot model
    /// (`N_max = 1`) stays usable for the single-level methods.
    pub fn check_level_counts(&self) -> Result<(), CliError> {
        let v = &self.mvr;
        let fixed = (!v.levels.is_empty()).then_some(v.levels.len());
        for l in v.l_range.iter().copied().chain([fixed.unwrap_or(v.l)]) {
            if l == 0 || l >= self.rb.n_max {
                return Err(CliError::Config(format!(
                    "level count {l} must satisfy 1 <= L < N_max = {}",
                    self.rb.n_max
                )));
            }
        }
        Ok(())
    }

    pub fn domain(&self) -> Result<ParameterDomain, CliError> {
        Ok(ParameterDomain::uniform(self.model.q, self.model.bounds[0], self.model.bounds[1])?)
    }

    pub fn problem(&self) -> Result<HdgProblem, CliError> {
        let m = &self.model;
        let mut p = match m.kind {
            ProblemKind::Heat => HdgProblem::heat_benchmark(m.q)?,
            ProblemKind::Helmholtz => {
                let amp = m.bounds[1];
                if m.bounds[0] != -amp {
                    return Err(CliError::Config("helmholtz bounds must be symmetric [-amp, amp]".into()));
                }
                HdgProblem::helmholtz(m.wavenumber, m.q, amp)?
            }
        };
        p.domain = self.domain()?;
        p.source = rbmvr_core::model::SpatialFunction::Constant(m.source);
        p.tau = self.discretization.tau;
        p.validate()?;
        Ok(p)
    }

    pub fn mesh(&self) -> Result<Mesh1D, CliError> {
        Ok(Mesh1D::uniform(self.discretization.elements)?)
    }

    /// The closed-form oracle, when the configuration is the heat problem.
    pub fn benchmark(&self) -> Option<HeatBenchmark> {
        (self.model.kind == ProblemKind::Heat).then(|| HeatBenchmark::new(self.model.q, self.model.source).ok())?
    }

    pub fn is_complex(&self) -> bool {
        self.model.kind == ProblemKind::Helmholtz
    }

    pub fn timings(&self) -> Option<Timings> {
        self.timings.as_ref().map(|t| Timings {
            t_h: t.t_h,
            t_rb: t.t_rb.clone(),
        })
    }

    pub fn adaptive_options(&self, seed: u64) -> AdaptiveOptions {
        AdaptiveOptions {
            a: self.mc.a,
            eps_tol: self.mc.eps_tol,
            seed,
            base_tag: 0,
            threshold: self.mvr.threshold,
            safety: self.mvr.safety,
            max_growth: self.mvr.max_growth,
            ..Default::default()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_rejections() {
        let cfg = ExperimentConfig::from_toml("").unwrap();
        assert_eq!(cfg.model.q, 10);
        assert_eq!(cfg.id, "experiment");
        let err = ExperimentConfig::from_toml("[model]\nq = 10\nwat = 1\n").unwrap_err();
        assert!(matches!(&err, CliError::Config(m) if m.contains("line 3")), "{err}");
        assert!(ExperimentConfig::from_toml("[mc]\neps_tol = 0.0").is_err());
        assert!(ExperimentConfig::from_toml("[mvr]\nlevels = [3, 5]").is_err());
        let cfg = ExperimentConfig::from_toml("[mvr]\nl_range = [10]").unwrap();
        assert!(cfg.check_level_counts().is_err());
        let cfg = ExperimentConfig::from_toml("[rb]\nn_max = 1\n[mc]\nn_rb = 1\n[mvr]\nlevels = [1]").unwrap();
        assert!(cfg.check_level_counts().is_err());
        assert!(ExperimentConfig::from_toml("[model]\nkind = \"helmholtz\"\ntruth = \"analytic\"").is_err());
    }
}
