use nalgebra::ComplexField;
use num_complex::Complex64;

/// Scalar field of a discretization: `f64` for the coercive diffusion
/// problems, `Complex64` for Helmholtz problems with impedance boundaries.
pub trait HdgScalar: ComplexField<RealField = f64> + Copy + Send + Sync + 'static {
    const IS_COMPLEX: bool;

    /// Converts a complex constant, failing when `Self` is real and the
    /// imaginary part is nonzero.
    fn from_complex(c: Complex64) -> Option<Self>;

    fn to_complex(self) -> Complex64;

    fn from_re(x: f64) -> Self {
        Self::from_real(x)
    }
}

impl HdgScalar for f64 {
    const IS_COMPLEX: bool = false;

    fn from_complex(c: Complex64) -> Option<Self> {
        (c.im == 0.0).then_some(c.re)
    }

    fn to_complex(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }
}

impl HdgScalar for Complex64 {
    const IS_COMPLEX: bool = true;

    fn from_complex(c: Complex64) -> Option<Self> {
        Some(c)
    }

    fn to_complex(self) -> Complex64 {
        self
    }
}
