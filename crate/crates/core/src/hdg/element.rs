use nalgebra::{DMatrix, DVector};

use super::basis::{gauss_legendre, legendre};
use crate::scalar::HdgScalar;

/// Reference data of one element `[x_L, x_R]` with a degree-`p` Legendre
/// basis. Local trial/test ordering is `[v_0 … v_p, η_L, η_R]`.
#[derive(Clone, Debug)]
pub struct ElementOps {
    pub p: usize,
    pub xl: f64,
    pub xr: f64,
    /// Physical quadrature points and weights.
    pub qx: Vec<f64>,
    pub qw: Vec<f64>,
    /// `phi[k][i]` = basis function `i` at quadrature point `k`.
    pub phi: Vec<Vec<f64>>,
    /// Physical derivatives at quadrature points.
    pub dphi: Vec<Vec<f64>>,
    pub phi_l: Vec<f64>,
    pub phi_r: Vec<f64>,
    pub mass: DMatrix<f64>,
    /// `(p+1) × (p+3)` map from `[v, η_L, η_R]` to the coefficients of
    /// `q = l(v) + m(η)`.
    pub lift: DMatrix<f64>,
}

impl ElementOps {
    pub fn new(xl: f64, xr: f64, p: usize) -> Self {
        Self::with_quadrature(xl, xr, p, p + 2)
    }

    pub fn with_quadrature(xl: f64, xr: f64, p: usize, nq: usize) -> Self {
        let h = xr - xl;
        let (xi, w) = gauss_legendre(nq);
        let mut qx = Vec::with_capacity(nq);
        let mut qw = Vec::with_capacity(nq);
        let mut phi = Vec::with_capacity(nq);
        let mut dphi: Vec<Vec<f64>> = Vec::with_capacity(nq);
        for (&t, &wt) in xi.iter().zip(&w) {
            let (v, d) = legendre(p, t);
            qx.push(xl + 0.5 * (t + 1.0) * h);
            qw.push(0.5 * h * wt);
            phi.push(v);
            dphi.push(d.iter().map(|&di| di * 2.0 / h).collect());
        }
        let phi_l = legendre(p, -1.0).0;
        let phi_r = legendre(p, 1.0).0;

        let n = p + 1;
        let mut mass = DMatrix::<f64>::zeros(n, n);
        // d[(j, i)] = ∫ φ_i φ_j'
        let mut d = DMatrix::<f64>::zeros(n, n);
        for k in 0..nq {
            for j in 0..n {
                for i in 0..n {
                    mass[(j, i)] += qw[k] * phi[k][i] * phi[k][j];
                    d[(j, i)] += qw[k] * phi[k][i] * dphi[k][j];
                }
            }
        }
        let mut rhs = DMatrix::<f64>::zeros(n, n + 2);
        for j in 0..n {
            for i in 0..n {
                rhs[(j, i)] = -d[(j, i)];
            }
            rhs[(j, n)] = -phi_l[j];
            rhs[(j, n + 1)] = phi_r[j];
        }
        let lift = mass
            .clone()
            .cholesky()
            .expect("Legendre mass matrix is positive definite")
            .solve(&rhs);
        Self {
            p,
            xl,
            xr,
            qx,
            qw,
            phi,
            dphi,
            phi_l,
            phi_r,
            mass,
            lift,
        }
    }

    pub fn h(&self) -> f64 {
        self.xr - self.xl
    }

    pub fn ndof(&self) -> usize {
        self.p + 1
    }

    pub fn reference_coord(&self, x: f64) -> f64 {
        2.0 * (x - self.xl) / self.h() - 1.0
    }

    /// Evaluates `Σ c_i φ_i(x)`.
    pub fn eval<T: HdgScalar>(&self, coeffs: &[T], x: f64) -> T {
        let (v, _) = legendre(self.p, self.reference_coord(x));
        coeffs
            .iter()
            .zip(&v)
            .fold(T::zero(), |acc, (&c, &vi)| acc + c * T::from_re(vi))
    }

    /// Diffusion part of the element matrix for a coefficient `κ` given by
    /// its values at the quadrature points and its one-sided traces at the
    /// two element ends:
    ///
    /// `(κ Q(v), w') − ⟨κ Q(v)·n − κτ(v − η), w⟩ + ⟨κ Q(v)·n − κτ(v − η), μ⟩`
    /// with `Q(v) = l(v) + m(η)`.
    pub fn diffusion_matrix(&self, kappa_q: &[f64], kappa_l: f64, kappa_r: f64, tau: f64) -> DMatrix<f64> {
        let n = self.p + 1;
        let m = n + 2;
        let mut k = DMatrix::zeros(m, m);
        // (κ φ_k, φ_i')
        let mut kd = DMatrix::zeros(n, n);
        for (qp, &w) in self.qw.iter().enumerate() {
            let wk = w * kappa_q[qp];
            for i in 0..n {
                for kk in 0..n {
                    kd[(i, kk)] += wk * self.phi[qp][kk] * self.dphi[qp][i];
                }
            }
        }
        let t1 = &kd * &self.lift;
        // Q at the element ends for every trial column.
        let q_l = self.lift.tr_mul(&DVector::from_column_slice(&self.phi_l));
        let q_r = self.lift.tr_mul(&DVector::from_column_slice(&self.phi_r));
        // v − η at the ends, per trial column.
        let jump = |c: usize, right: bool| -> f64 {
            let phi = if right { &self.phi_r } else { &self.phi_l };
            if c < n {
                phi[c]
            } else if (c == n && !right) || (c == n + 1 && right) {
                -1.0
            } else {
                0.0
            }
        };
        for c in 0..m {
            let (jl, jr) = (jump(c, false), jump(c, true));
            // flux κQ·n − κτ(v − η) leaving through each end (n = −1, +1)
            let flux_l = -kappa_l * q_l[c] - kappa_l * tau * jl;
            let flux_r = kappa_r * q_r[c] - kappa_r * tau * jr;
            for i in 0..n {
                k[(i, c)] = t1[(i, c)] - flux_l * self.phi_l[i] - flux_r * self.phi_r[i];
            }
            k[(n, c)] = flux_l;
            k[(n + 1, c)] = flux_r;
        }
        k
    }

    /// Mass matrix padded to the `(p+3) × (p+3)` local layout.
    pub fn padded_mass(&self) -> DMatrix<f64> {
        let n = self.p + 1;
        let mut m = DMatrix::zeros(n + 2, n + 2);
        m.view_mut((0, 0), (n, n)).copy_from(&self.mass);
        m
    }

    /// `∫ f φ_i` for a function sampled at the quadrature points.
    pub fn load(&self, f_q: &[f64]) -> DVector<f64> {
        let n = self.p + 1;
        let mut b = DVector::zeros(n);
        for (qp, &w) in self.qw.iter().enumerate() {
            for i in 0..n {
                b[i] += w * f_q[qp] * self.phi[qp][i];
            }
        }
        b
    }
}

/// Gradient coefficients `q = l(u) + m(û)` on one element.
pub fn lift<T: HdgScalar>(ops: &ElementOps, u: &[T], uhat_l: T, uhat_r: T) -> DVector<T> {
    let n = ops.p + 1;
    assert_eq!(u.len(), n);
    let mut out = DVector::zeros(n);
    for j in 0..n {
        let mut s = T::zero();
        for (c, &uc) in u.iter().enumerate() {
            s += T::from_re(ops.lift[(j, c)]) * uc;
        }
        s += T::from_re(ops.lift[(j, n)]) * uhat_l + T::from_re(ops.lift[(j, n + 1)]) * uhat_r;
        out[j] = s;
    }
    out
}
