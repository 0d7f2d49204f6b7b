use super::domain::{ParameterDomain, ParameterVector};
use crate::error::{Error, Result};

/// A real function on `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub enum SpatialFunction {
    Constant(f64),
    /// `values[i]` on `[breaks[i], breaks[i+1])`; `breaks` is strictly
    /// increasing.
    PiecewiseConstant { breaks: Vec<f64>, values: Vec<f64> },
    /// Piecewise-linear interpolation of `(xs[i], values[i])`, constant
    /// extrapolation outside `[xs[0], xs[last]]`.
    Tabulated { xs: Vec<f64>, values: Vec<f64> },
}

/// Side from which a function is evaluated at a possible discontinuity.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

impl SpatialFunction {
    /// Indicator of `[a, b)` on `[0, 1]`, scaled by `height`.
    pub fn indicator(a: f64, b: f64, height: f64) -> Self {
        let mut breaks = vec![0.0];
        let mut values = Vec::new();
        if a > 0.0 {
            breaks.push(a);
            values.push(0.0);
        }
        breaks.push(b);
        values.push(height);
        if b < 1.0 {
            breaks.push(1.0);
            values.push(0.0);
        }
        SpatialFunction::PiecewiseConstant { breaks, values }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SpatialFunction::Constant(c) if c.is_finite() => Ok(()),
            SpatialFunction::Constant(_) => Err(Error::config("non-finite constant")),
            SpatialFunction::PiecewiseConstant { breaks, values } => {
                if breaks.len() != values.len() + 1 || values.is_empty() {
                    return Err(Error::config("piecewise-constant needs len(breaks) = len(values) + 1"));
                }
                if breaks.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::config("piecewise-constant breaks must be strictly increasing"));
                }
                Ok(())
            }
            SpatialFunction::Tabulated { xs, values } => {
                if xs.len() != values.len() || xs.is_empty() {
                    return Err(Error::config("tabulated function needs matching non-empty xs and values"));
                }
                if xs.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::config("tabulated abscissae must be strictly increasing"));
                }
                Ok(())
            }
        }
    }

    /// Value at `x`; at a jump of a piecewise-constant function the value
    /// to the right is returned.
    pub fn eval(&self, x: f64) -> f64 {
        self.eval_from(x, Side::Right)
    }

    /// One-sided value: the limit at `x` approached from `side`.
    pub fn eval_from(&self, x: f64, side: Side) -> f64 {
        match self {
            SpatialFunction::Constant(c) => *c,
            SpatialFunction::PiecewiseConstant { breaks, values } => {
                // Number of breaks strictly below / at-or-below x.
                let k = match side {
                    Side::Right => breaks.partition_point(|&b| b <= x),
                    Side::Left => breaks.partition_point(|&b| b < x),
                };
                let idx = k.saturating_sub(1).min(values.len() - 1);
                values[idx]
            }
            SpatialFunction::Tabulated { xs, values } => {
                let n = xs.len();
                if x <= xs[0] {
                    return values[0];
                }
                if x >= xs[n - 1] {
                    return values[n - 1];
                }
                let k = xs.partition_point(|&b| b <= x);
                let (x0, x1) = (xs[k - 1], xs[k]);
                let t = (x - x0) / (x1 - x0);
                values[k - 1] * (1.0 - t) + values[k] * t
            }
        }
    }

    /// True if the function is nonnegative everywhere.
    pub fn is_nonnegative(&self) -> bool {
        match self {
            SpatialFunction::Constant(c) => *c >= 0.0,
            SpatialFunction::PiecewiseConstant { values, .. }
            | SpatialFunction::Tabulated { values, .. } => values.iter().all(|&v| v >= 0.0),
        }
    }

    /// True if the function vanishes identically.
    pub fn is_zero(&self) -> bool {
        match self {
            SpatialFunction::Constant(c) => *c == 0.0,
            SpatialFunction::PiecewiseConstant { values, .. }
            | SpatialFunction::Tabulated { values, .. } => values.iter().all(|&v| v == 0.0),
        }
    }

    /// Jump locations inside `(0, 1)`; meshes should contain them as nodes.
    pub fn discontinuities(&self) -> Vec<f64> {
        match self {
            SpatialFunction::PiecewiseConstant { breaks, .. } => breaks
                .iter()
                .copied()
                .filter(|&b| b > 0.0 && b < 1.0)
                .collect(),
            _ => Vec::new(),
        }
    }
}

/// `κ(x, y) = κ̄(x) + Σ_q ψ_q(x) y_q`.
#[derive(Clone, Debug, PartialEq)]
pub struct RandomFieldExpansion {
    pub mean: SpatialFunction,
    pub modes: Vec<SpatialFunction>,
}

impl RandomFieldExpansion {
    pub fn new(mean: SpatialFunction, modes: Vec<SpatialFunction>) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::config("random field needs at least one mode"));
        }
        mean.validate()?;
        for m in &modes {
            m.validate()?;
        }
        Ok(Self { mean, modes })
    }

    /// Heat-diffusion benchmark field: `κ = Σ_q y_q 1_{D_q}` on `Q` equal
    /// subdomains `D_q = ((q-1)/Q, q/Q)`.
    pub fn piecewise_constant(q: usize) -> Self {
        let modes = (0..q)
            .map(|i| SpatialFunction::indicator(i as f64 / q as f64, (i + 1) as f64 / q as f64, 1.0))
            .collect();
        Self {
            mean: SpatialFunction::Constant(0.0),
            modes,
        }
    }

    pub fn dim(&self) -> usize {
        self.modes.len()
    }

    pub fn eval(&self, x: f64, y: &ParameterVector) -> f64 {
        self.eval_from(x, Side::Right, y)
    }

    pub fn eval_from(&self, x: f64, side: Side, y: &ParameterVector) -> f64 {
        self.mean.eval_from(x, side)
            + self
                .modes
                .iter()
                .zip(y.iter())
                .map(|(m, &yq)| m.eval_from(x, side) * yq)
                .sum::<f64>()
    }

    /// Exact minimum and maximum of `κ(x, ·)` over the box `Λ` at a fixed `x`
    /// (the field is affine in `y`, so the extremes sit at box corners).
    pub fn range_at(&self, x: f64, side: Side, domain: &ParameterDomain) -> (f64, f64) {
        let base = self.mean.eval_from(x, side);
        let (mut lo, mut hi) = (base, base);
        for (m, &(a, b)) in self.modes.iter().zip(domain.bounds()) {
            let v = m.eval_from(x, side);
            lo += (v * a).min(v * b);
            hi += (v * a).max(v * b);
        }
        (lo, hi)
    }

    /// Union of the jump locations of all component functions.
    pub fn discontinuities(&self) -> Vec<f64> {
        let mut all: Vec<f64> = std::iter::once(&self.mean)
            .chain(&self.modes)
            .flat_map(|f| f.discontinuities())
            .collect();
        all.sort_by(f64::total_cmp);
        all.dedup();
        all
    }
}
