use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{ParameterDomain, RandomFieldExpansion, SpatialFunction};

/// Boundary condition at one end of `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BoundaryCondition {
    /// Homogeneous Dirichlet: the boundary trace is fixed to zero.
    Dirichlet,
    /// `κ ∂u/∂n + ν u = g`; Neumann is `ν = 0`.
    Robin { nu: Complex64, g: Complex64 },
}

impl BoundaryCondition {
    pub fn neumann(g: f64) -> Self {
        BoundaryCondition::Robin {
            nu: Complex64::new(0.0, 0.0),
            g: Complex64::new(g, 0.0),
        }
    }
}

/// Linear output functional applied to `u_h`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OutputFunctional {
    /// `∫_0^1 u dx`.
    Mean,
    /// `∫_0^1 u(x) exp(−((x − center)/width)²) dx`.
    Gaussian { center: f64, width: f64 },
}

/// `−(κ u')' + ϱ u = f` on `(0, 1)` with a random diffusion field.
#[derive(Clone, Debug)]
pub struct HdgProblem {
    pub field: RandomFieldExpansion,
    pub domain: ParameterDomain,
    pub reaction: Complex64,
    pub source: SpatialFunction,
    pub left: BoundaryCondition,
    pub right: BoundaryCondition,
    pub output: OutputFunctional,
    pub tau: f64,
}

impl HdgProblem {
    /// Heat diffusion with `κ = Σ y_q 1_{D_q}`, `y_q ~ U[0.1, 1]`, `f = 1`,
    /// `u(0) = 0`, `κ u'(1) = 0` and the mean temperature as output.
    pub fn heat_benchmark(q: usize) -> Result<Self> {
        if q == 0 {
            return Err(Error::config("Q must be at least 1"));
        }
        let p = Self {
            field: RandomFieldExpansion::piecewise_constant(q),
            domain: ParameterDomain::uniform(q, 0.1, 1.0)?,
            reaction: Complex64::new(0.0, 0.0),
            source: SpatialFunction::Constant(1.0),
            left: BoundaryCondition::Dirichlet,
            right: BoundaryCondition::neumann(0.0),
            output: OutputFunctional::Mean,
            tau: 1.0,
        };
        p.validate()?;
        Ok(p)
    }

    /// Helmholtz surrogate: `κ = 1 + Σ y_q 1_{D_q}` with `y_q ~ U[−amp, amp]`,
    /// `ϱ = −k²`, `u(0) = 0` and the outgoing impedance condition
    /// `u'(1) − i k u(1) = 0`.
    pub fn helmholtz(wavenumber: f64, q: usize, amp: f64) -> Result<Self> {
        if q == 0 {
            return Err(Error::config("Q must be at least 1"));
        }
        let base = RandomFieldExpansion::piecewise_constant(q);
        let field = RandomFieldExpansion::new(SpatialFunction::Constant(1.0), base.modes)?;
        let p = Self {
            field,
            domain: ParameterDomain::uniform(q, -amp, amp)?,
            reaction: Complex64::new(-wavenumber * wavenumber, 0.0),
            source: SpatialFunction::Constant(1.0),
            left: BoundaryCondition::Dirichlet,
            right: BoundaryCondition::Robin {
                nu: Complex64::new(0.0, -wavenumber),
                g: Complex64::new(0.0, 0.0),
            },
            output: OutputFunctional::Mean,
            tau: 1.0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn dim(&self) -> usize {
        self.field.dim()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0) || !self.tau.is_finite() {
            return Err(Error::config(format!("stabilization τ must be positive, got {}", self.tau)));
        }
        if self.field.dim() != self.domain.dim() {
            return Err(Error::config(format!(
                "field has {} modes but the parameter domain has dimension {}",
                self.field.dim(),
                self.domain.dim()
            )));
        }
        self.source.validate()?;
        if let OutputFunctional::Gaussian { width, .. } = self.output {
            if !(width > 0.0) {
                return Err(Error::config("Gaussian output width must be positive"));
            }
        }
        if matches!(
            (self.left, self.right),
            (BoundaryCondition::Robin { .. }, BoundaryCondition::Robin { .. })
        ) && self.reaction == Complex64::new(0.0, 0.0)
        {
            let zero = |bc: BoundaryCondition| matches!(bc, BoundaryCondition::Robin { nu, .. } if nu == Complex64::new(0.0, 0.0));
            if zero(self.left) && zero(self.right) {
                return Err(Error::config("pure Neumann problem without reaction is singular"));
            }
        }
        Ok(())
    }

    /// True when every coefficient is real.
    pub fn is_real(&self) -> bool {
        let bc_real = |bc: BoundaryCondition| match bc {
            BoundaryCondition::Dirichlet => true,
            BoundaryCondition::Robin { nu, g } => nu.im == 0.0 && g.im == 0.0,
        };
        self.reaction.im == 0.0 && bc_real(self.left) && bc_real(self.right)
    }

    /// True when the form is coercive for every `y` (real, `ϱ ≥ 0`, `ν ≥ 0`).
    pub fn is_coercive(&self) -> bool {
        let nu_ok = |bc: BoundaryCondition| match bc {
            BoundaryCondition::Dirichlet => true,
            BoundaryCondition::Robin { nu, .. } => nu.re >= 0.0,
        };
        self.is_real() && self.reaction.re >= 0.0 && nu_ok(self.left) && nu_ok(self.right)
    }
}
