use std::io::Write;

use nalgebra::{DMatrix, DVector};
use nalgebra_sparse::CsrMatrix;
use num_complex::Complex64;

use crate::scalar::HdgScalar;

/// `A(θ) = Σ_q θ_q A_q` with `θ_0 = 1`, `θ_q = y_q`, together with the load
/// vector, the output functional and the Gram matrix of the energy inner
/// product at unit coefficients.
///
/// Matrix entries are `A[i][j] = a(φ_j, φ_i)`; the form is evaluated as
/// `a(v, w) = wᴴ A v` and the output as `ℓ(v) = ℓᵀ v`.
#[derive(Clone, Debug)]
pub struct AffineSystem<T: HdgScalar> {
    pub a: Vec<CsrMatrix<T>>,
    pub b: DVector<T>,
    pub l: DVector<T>,
    pub w: CsrMatrix<T>,
}

impl<T: HdgScalar> AffineSystem<T> {
    pub fn ndof(&self) -> usize {
        self.b.len()
    }

    /// Number of affine terms, `Q + 1`.
    pub fn num_terms(&self) -> usize {
        self.a.len()
    }

    /// Coefficients `θ(y) = (1, y_1, …, y_Q)`.
    pub fn theta(y: &[f64]) -> Vec<f64> {
        std::iter::once(1.0).chain(y.iter().copied()).collect()
    }

    /// `Σ_q θ_q A_q x`.
    pub fn apply(&self, theta: &[f64], x: &DVector<T>) -> DVector<T> {
        let mut out = DVector::zeros(self.ndof());
        for (a, &t) in self.a.iter().zip(theta) {
            if t != 0.0 {
                spmv_acc(a, T::from_re(t), x, &mut out);
            }
        }
        out
    }

    pub fn dense_at(&self, theta: &[f64]) -> DMatrix<T> {
        let mut out = DMatrix::zeros(self.ndof(), self.ndof());
        for (a, &t) in self.a.iter().zip(theta) {
            for (i, j, &v) in a.triplet_iter() {
                out[(i, j)] += v * T::from_re(t);
            }
        }
        out
    }

    pub fn w_dense(&self) -> DMatrix<T> {
        DMatrix::from(&self.w)
    }

    /// Writes every matrix and vector as `row col real imag` triplets. Each
    /// block starts with a `# name rows cols nnz` header; vectors use column 0.
    pub fn write_triplets<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let n = self.ndof();
        for (q, a) in self.a.iter().enumerate() {
            write_csr(&mut out, &format!("A{q}"), a)?;
        }
        write_csr(&mut out, "W", &self.w)?;
        for (name, v) in [("b", &self.b), ("l", &self.l)] {
            let nnz = v.iter().filter(|x| **x != T::zero()).count();
            writeln!(out, "# {name} {n} 1 {nnz}")?;
            for (i, x) in v.iter().enumerate() {
                if *x != T::zero() {
                    let c = x.to_complex();
                    writeln!(out, "{i} 0 {:.16e} {:.16e}", c.re, c.im)?;
                }
            }
        }
        Ok(())
    }
}

fn write_csr<T: HdgScalar, W: Write>(out: &mut W, name: &str, a: &CsrMatrix<T>) -> std::io::Result<()> {
    writeln!(out, "# {name} {} {} {}", a.nrows(), a.ncols(), a.nnz())?;
    for (i, j, v) in a.triplet_iter() {
        let c = v.to_complex();
        writeln!(out, "{i} {j} {:.16e} {:.16e}", c.re, c.im)?;
    }
    Ok(())
}

/// `y += s · A x`.
pub fn spmv_acc<T: HdgScalar>(a: &CsrMatrix<T>, s: T, x: &DVector<T>, y: &mut DVector<T>) {
    let (offsets, cols, vals) = (a.row_offsets(), a.col_indices(), a.values());
    for i in 0..a.nrows() {
        let mut acc = T::zero();
        for k in offsets[i]..offsets[i + 1] {
            acc += vals[k] * x[cols[k]];
        }
        y[i] += s * acc;
    }
}

/// Real dot product accumulator with error-free products and sums, accurate
/// as if computed in twice the working precision.
#[derive(Clone, Copy, Default)]
struct Dot2 {
    sum: f64,
    comp: f64,
}

impl Dot2 {
    fn add(&mut self, a: f64, b: f64) {
        let p = a * b;
        let e = a.mul_add(b, -p);
        let t = self.sum + p;
        let z = t - self.sum;
        self.comp += (self.sum - (t - z)) + (p - z) + e;
        self.sum = t;
    }

    fn value(self) -> f64 {
        self.sum + self.comp
    }
}

/// Compensated `Σ x_k y_k` over real or complex scalars.
#[derive(Clone, Copy, Default)]
pub struct CompensatedDot {
    re: Dot2,
    im: Dot2,
}

impl CompensatedDot {
    pub fn add<T: HdgScalar>(&mut self, x: T, y: T) {
        let (x, y) = (x.to_complex(), y.to_complex());
        self.re.add(x.re, y.re);
        self.re.add(-x.im, y.im);
        self.im.add(x.re, y.im);
        self.im.add(x.im, y.re);
    }

    pub fn value<T: HdgScalar>(self) -> T {
        let v = Complex64::new(self.re.value(), self.im.value());
        T::from_complex(v).expect("real operands give a real sum")
    }
}

/// `A x` for a sparse matrix and a dense block of columns, with compensated
/// row sums.
pub fn spmm<T: HdgScalar>(a: &CsrMatrix<T>, x: &DMatrix<T>) -> DMatrix<T> {
    let (offsets, cols, vals) = (a.row_offsets(), a.col_indices(), a.values());
    let mut y = DMatrix::zeros(a.nrows(), x.ncols());
    for c in 0..x.ncols() {
        for i in 0..a.nrows() {
            let mut acc = CompensatedDot::default();
            for k in offsets[i]..offsets[i + 1] {
                acc.add(vals[k], x[(cols[k], c)]);
            }
            y[(i, c)] = acc.value();
        }
    }
    y
}

/// `xᴴ y` (or `xᵀ y` without conjugation) with compensated sums.
pub fn project<T: HdgScalar>(x: &DMatrix<T>, y: &DMatrix<T>, conjugate: bool) -> DMatrix<T> {
    assert_eq!(x.nrows(), y.nrows());
    DMatrix::from_fn(x.ncols(), y.ncols(), |i, j| {
        let mut acc = CompensatedDot::default();
        for k in 0..x.nrows() {
            let xk = if conjugate { x[(k, i)].conjugate() } else { x[(k, i)] };
            acc.add(xk, y[(k, j)]);
        }
        acc.value()
    })
}
