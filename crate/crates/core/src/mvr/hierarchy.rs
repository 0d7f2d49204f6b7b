use super::{LevelData, LevelSpec};
use crate::error::{Error, Result};
use crate::hdg::HdgDiscretization;
use crate::model::{HeatBenchmark, ParameterVector};
use crate::par;
use crate::rb::RbModel;
use crate::scalar::HdgScalar;

/// Which model evaluates an output.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Fidelity {
    Full,
    Rb(usize),
}

/// A truth model `y ↦ s_h(y)`.
pub trait FullModel: Sync {
    fn output(&self, y: &ParameterVector) -> Result<f64>;
}

impl<T: HdgScalar> FullModel for HdgDiscretization<T> {
    fn output(&self, y: &ParameterVector) -> Result<f64> {
        HdgDiscretization::output(self, y)
    }
}

impl FullModel for HeatBenchmark {
    fn output(&self, y: &ParameterVector) -> Result<f64> {
        HeatBenchmark::output(self, y)
    }
}

/// The truth model together with its nested RB approximations.
pub trait OutputHierarchy: Sync {
    fn n_max(&self) -> usize;

    fn output(&self, f: Fidelity, y: &ParameterVector) -> Result<f64>;

    /// `(s_h(y), [s_0(y), …, s_{N_max}(y)])`.
    fn all_outputs(&self, y: &ParameterVector) -> Result<(f64, Vec<f64>)> {
        let full = self.output(Fidelity::Full, y)?;
        let rb = (0..=self.n_max())
            .map(|n| self.output(Fidelity::Rb(n), y))
            .collect::<Result<_>>()?;
        Ok((full, rb))
    }
}

/// A full model paired with an RB model built from it (or from a model
/// with the same outputs).
pub struct RbHierarchy<'a, F, T: HdgScalar> {
    pub full: &'a F,
    pub rb: &'a RbModel<T>,
}

impl<'a, F, T: HdgScalar> RbHierarchy<'a, F, T> {
    pub fn new(full: &'a F, rb: &'a RbModel<T>) -> Self {
        Self { full, rb }
    }
}

impl<F: FullModel, T: HdgScalar> OutputHierarchy for RbHierarchy<'_, F, T> {
    fn n_max(&self) -> usize {
        self.rb.n_max()
    }

    fn output(&self, f: Fidelity, y: &ParameterVector) -> Result<f64> {
        match f {
            Fidelity::Full => self.full.output(y),
            Fidelity::Rb(n) => self.rb.online_output(n, y),
        }
    }

    fn all_outputs(&self, y: &ParameterVector) -> Result<(f64, Vec<f64>)> {
        Ok((self.full.output(y)?, self.rb.outputs_all(y)?))
    }
}

/// Evaluates channel `level` of `spec` on the parameter points `ys`.
pub fn sample_level<H: OutputHierarchy + ?Sized>(
    h: &H,
    spec: &LevelSpec,
    level: usize,
    ys: &[ParameterVector],
    tag: u64,
) -> Result<LevelData> {
    if level > spec.num_levels() {
        return Err(Error::config(format!("level {level} out of range")));
    }
    spec.check_against(h.n_max())?;
    let (fine, coarse) = spec.channel(level);
    let pairs = par::try_map_range(ys.len(), |m| {
        let f = h.output(fine, &ys[m])?;
        let c = coarse.map(|c| h.output(c, &ys[m])).transpose()?;
        Ok::<_, Error>((f, c))
    })?;
    let fine_v = pairs.iter().map(|p| p.0).collect();
    let coarse_v = coarse.map(|_| pairs.iter().map(|p| p.1.unwrap()).collect());
    LevelData::new(fine_v, coarse_v, tag)
}
