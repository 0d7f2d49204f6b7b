use std::sync::atomic::{AtomicUsize, Ordering};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::ParameterVector;
use crate::scalar::HdgScalar;

/// Which residual a dual norm refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Residual {
    Primal,
    Dual,
}

/// Reference data of the min-θ coercivity lower bound.
#[derive(Clone, Debug, PartialEq)]
pub struct StabilityData {
    /// Smallest generalized eigenvalue of `(A(ȳ), W)`.
    pub beta_ref: f64,
    pub y_ref: ParameterVector,
    /// `active[q]` is false for affine terms whose matrix is zero.
    pub active: Vec<bool>,
}

/// RB output with its certified error bounds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OutputBound {
    pub s_n: f64,
    pub delta_pr: f64,
    pub delta_du: f64,
    pub delta_s: f64,
    pub beta: f64,
    /// Floating-point allowance included in `delta_s`, so that
    /// `delta_s = beta · delta_pr · delta_du + rounding`.
    pub rounding: f64,
}

/// Reduced affine data for hierarchical primal and dual spaces.
///
/// With `Z` the primal and `Z_d` the dual basis (`W`-orthonormal), the stored
/// blocks are `Zᴴ A_q Z`, `Zᴴ b`, `ℓᵀ Z`, `Z_dᴴ A_q Z_d`, `Z_dᴴ A_q Z`,
/// `Z_dᴴ b` and `−Z_dᴴ conj(ℓ)`.
///
/// Residual dual norms use the functionals `R_0 = b` (resp. `−conj ℓ`) and
/// `R_{1 + n(Q+1) + q} = A_q ζ_n` (resp. `A_qᴴ ζ_n^du`). With `W = L Lᴴ`,
/// `riesz_*` is the triangular factor of a QR decomposition of `L⁻¹ R`, so
/// `‖Σ α_k R_k‖_{W'} = ‖riesz · α‖₂` and its Gram matrix is `riesz ᴴ riesz`.
/// The column ordering makes any prefix of the basis a leading column block.
#[derive(Debug)]
pub struct RbModel<T: HdgScalar> {
    pub num_terms: usize,
    pub compliant: bool,
    pub snapshots: Vec<ParameterVector>,
    pub a_pr: Vec<DMatrix<T>>,
    pub b_pr: DVector<T>,
    pub l_pr: DVector<T>,
    pub a_du: Vec<DMatrix<T>>,
    pub a_cross: Vec<DMatrix<T>>,
    pub b_du: DVector<T>,
    pub f_du: DVector<T>,
    pub riesz_pr: DMatrix<T>,
    pub riesz_du: DMatrix<T>,
    pub stability: Option<StabilityData>,
    clamped: AtomicUsize,
}

impl<T: HdgScalar> Clone for RbModel<T> {
    fn clone(&self) -> Self {
        Self {
            num_terms: self.num_terms,
            compliant: self.compliant,
            snapshots: self.snapshots.clone(),
            a_pr: self.a_pr.clone(),
            b_pr: self.b_pr.clone(),
            l_pr: self.l_pr.clone(),
            a_du: self.a_du.clone(),
            a_cross: self.a_cross.clone(),
            b_du: self.b_du.clone(),
            f_du: self.f_du.clone(),
            riesz_pr: self.riesz_pr.clone(),
            riesz_du: self.riesz_du.clone(),
            stability: self.stability.clone(),
            clamped: AtomicUsize::new(self.clamped.load(Ordering::Relaxed)),
        }
    }
}

impl<T: HdgScalar> PartialEq for RbModel<T> {
    fn eq(&self, o: &Self) -> bool {
        self.num_terms == o.num_terms
            && self.compliant == o.compliant
            && self.snapshots == o.snapshots
            && self.a_pr == o.a_pr
            && self.b_pr == o.b_pr
            && self.l_pr == o.l_pr
            && self.a_du == o.a_du
            && self.a_cross == o.a_cross
            && self.b_du == o.b_du
            && self.f_du == o.f_du
            && self.riesz_pr == o.riesz_pr
            && self.riesz_du == o.riesz_du
            && self.stability == o.stability
    }
}

/// Solution of the reduced problems at one `(N, y)`.
#[derive(Clone, Debug)]
pub struct ReducedSolution<T: HdgScalar> {
    pub n: usize,
    pub theta: Vec<f64>,
    pub primal: DVector<T>,
    /// Dual coefficients; empty in the compliant case.
    pub dual: DVector<T>,
}

fn combine<T: HdgScalar>(blocks: &[DMatrix<T>], theta: &[f64], r: usize, c: usize) -> DMatrix<T> {
    let mut out = DMatrix::zeros(r, c);
    for (b, &t) in blocks.iter().zip(theta) {
        if t != 0.0 {
            out += b.view((0, 0), (r, c)) * T::from_re(t);
        }
    }
    out
}

impl<T: HdgScalar> RbModel<T> {
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn from_parts(
        num_terms: usize,
        compliant: bool,
        snapshots: Vec<ParameterVector>,
        a_pr: Vec<DMatrix<T>>,
        b_pr: DVector<T>,
        l_pr: DVector<T>,
        a_du: Vec<DMatrix<T>>,
        a_cross: Vec<DMatrix<T>>,
        b_du: DVector<T>,
        f_du: DVector<T>,
        riesz_pr: DMatrix<T>,
        riesz_du: DMatrix<T>,
        stability: Option<StabilityData>,
    ) -> Self {
        Self {
            num_terms,
            compliant,
            snapshots,
            a_pr,
            b_pr,
            l_pr,
            a_du,
            a_cross,
            b_du,
            f_du,
            riesz_pr,
            riesz_du,
            stability,
            clamped: AtomicUsize::new(0),
        }
    }

    /// Number of primal basis functions.
    pub fn n_max(&self) -> usize {
        self.b_pr.len()
    }

    /// Number of dual basis functions (equal to [`Self::n_max`] when compliant).
    pub fn n_dual(&self) -> usize {
        if self.compliant {
            self.n_max()
        } else {
            self.b_du.len()
        }
    }

    pub fn num_params(&self) -> usize {
        self.num_terms - 1
    }

    /// How many residual norms were negative from round-off and clamped.
    pub fn clamped_residuals(&self) -> usize {
        self.clamped.load(Ordering::Relaxed)
    }

    fn check(&self, n: usize, y: &ParameterVector) -> Result<()> {
        if n > self.n_max() {
            return Err(Error::config(format!("N = {n} exceeds the basis size {}", self.n_max())));
        }
        if y.len() != self.num_params() {
            return Err(Error::config(format!(
                "parameter has dimension {} but the model expects {}",
                y.len(),
                self.num_params()
            )));
        }
        Ok(())
    }

    /// Solves the reduced primal problem `(Σ θ_q Zᴴ A_q Z) c = Zᴴ b` with the
    /// first `n` basis functions.
    pub fn online_solve(&self, n: usize, y: &ParameterVector) -> Result<DVector<T>> {
        self.check(n, y)?;
        let theta: Vec<f64> = std::iter::once(1.0).chain(y.iter().copied()).collect();
        self.primal_coefficients(n, &theta, y)
    }

    fn primal_coefficients(&self, n: usize, theta: &[f64], y: &ParameterVector) -> Result<DVector<T>> {
        if n == 0 {
            return Ok(DVector::zeros(0));
        }
        let a = combine(&self.a_pr, theta, n, n);
        a.lu().solve(&self.b_pr.rows(0, n).into_owned()).ok_or_else(|| Error::Singular {
            y: y.0.clone(),
            context: format!("reduced primal system with N = {n}"),
        })
    }

    fn dual_size(&self, n: usize) -> usize {
        n.min(self.n_dual())
    }

    /// Primal and dual reduced solutions.
    pub fn online_eval(&self, n: usize, y: &ParameterVector) -> Result<ReducedSolution<T>> {
        self.check(n, y)?;
        let theta: Vec<f64> = std::iter::once(1.0).chain(y.iter().copied()).collect();
        let primal = self.primal_coefficients(n, &theta, y)?;
        let dual = if self.compliant {
            DVector::zeros(0)
        } else {
            let nd = self.dual_size(n);
            if nd == 0 {
                DVector::zeros(0)
            } else {
                let a = combine(&self.a_du, &theta, nd, nd).adjoint();
                a.lu().solve(&self.f_du.rows(0, nd).into_owned()).ok_or_else(|| Error::Singular {
                    y: y.0.clone(),
                    context: format!("reduced dual system with N = {nd}"),
                })?
            }
        };
        Ok(ReducedSolution { n, theta, primal, dual })
    }

    /// `s_N = ℓ(u_N) + a(u_N, φ_N) − b(φ_N)`, real part.
    pub fn output_of(&self, sol: &ReducedSolution<T>) -> f64 {
        let n = sol.n;
        let mut s = T::zero();
        for i in 0..n {
            s += self.l_pr[i] * sol.primal[i];
        }
        let nd = sol.dual.len();
        if nd > 0 {
            let cross = combine(&self.a_cross, &sol.theta, nd, n);
            let ac = cross * &sol.primal;
            for i in 0..nd {
                s += sol.dual[i].conjugate() * (ac[i] - self.b_du[i]);
            }
        }
        s.to_complex().re
    }

    pub fn online_output(&self, n: usize, y: &ParameterVector) -> Result<f64> {
        let sol = self.online_eval(n, y)?;
        Ok(self.output_of(&sol))
    }

    /// `‖r‖_{W'}` from the factored representer data, together with a bound
    /// on its floating-point evaluation error.
    fn residual_norm(&self, sol: &ReducedSolution<T>, which: Residual) -> (f64, f64) {
        let (factor, coeffs) = match which {
            Residual::Primal => (&self.riesz_pr, &sol.primal),
            Residual::Dual if self.compliant => (&self.riesz_pr, &sol.primal),
            Residual::Dual => (&self.riesz_du, &sol.dual),
        };
        let k = 1 + coeffs.len() * self.num_terms;
        let mut alpha = Vec::with_capacity(k);
        alpha.push(T::one());
        for &c in coeffs.iter() {
            for &t in &sol.theta {
                alpha.push(-(c * T::from_re(t)));
            }
        }
        let mut sq = 0.0;
        let mut abs = 0.0;
        for i in 0..factor.nrows() {
            let mut v = T::zero();
            let mut a = 0.0;
            for j in i.min(k)..k {
                let f = factor[(i, j)];
                v += f * alpha[j];
                a += f.modulus() * alpha[j].modulus();
            }
            sq += v.modulus_squared();
            abs += a * a;
        }
        let guard = 8.0 * (k as f64 + 1.0) * f64::EPSILON * abs.sqrt();
        (sq.sqrt(), guard)
    }

    fn clamp(&self, v: f64) -> f64 {
        if v < 0.0 || v.is_nan() {
            self.clamped.fetch_add(1, Ordering::Relaxed);
            log::debug!("invalid residual norm {v:e} clamped to zero");
            0.0
        } else {
            v
        }
    }

    /// Dual norm of the primal or dual residual at `(N, y)`.
    pub fn residual_dual_norm(&self, n: usize, y: &ParameterVector, which: Residual) -> Result<f64> {
        let sol = self.online_eval(n, y)?;
        Ok(self.clamp(self.residual_norm(&sol, which).0))
    }

    /// Min-θ lower bound `β̃(y) = β_h(ȳ) · min_q θ_q(y)/θ_q(ȳ)` over the
    /// nonzero affine terms.
    pub fn stability_lower_bound(&self, y: &ParameterVector) -> Result<f64> {
        let st = self
            .stability
            .as_ref()
            .ok_or_else(|| Error::StabilityUnavailable("model was built without a coercivity bound".into()))?;
        if y.len() != self.num_params() {
            return Err(Error::config("parameter dimension mismatch"));
        }
        let mut ratio = f64::INFINITY;
        for (q, &act) in st.active.iter().enumerate() {
            if !act {
                continue;
            }
            let (t, t_ref) = if q == 0 { (1.0, 1.0) } else { (y[q - 1], st.y_ref[q - 1]) };
            if !(t > 0.0) {
                return Err(Error::StabilityUnavailable(format!(
                    "coefficient θ_{q} = {t} is not positive"
                )));
            }
            ratio = ratio.min(t / t_ref);
        }
        if !ratio.is_finite() {
            return Err(Error::StabilityUnavailable("no active affine term".into()));
        }
        Ok(st.beta_ref * ratio)
    }

    /// `s_N` with `Δ^pr = ‖r^pr‖/β̃`, `Δ^du = ‖r^du‖/β̃` and
    /// `Δ^s = β̃ Δ^pr Δ^du`. Both norms include the rounding-error bound of
    /// their evaluation, and `Δ^s` adds an allowance for the rounding error
    /// of the computed outputs themselves, so the certificate also holds
    /// when the true error sits at machine precision.
    pub fn output_bound(&self, n: usize, y: &ParameterVector) -> Result<OutputBound> {
        let beta = self.stability_lower_bound(y)?;
        let sol = self.online_eval(n, y)?;
        let s_n = self.output_of(&sol);
        let (rp, gp) = self.residual_norm(&sol, Residual::Primal);
        let rp = self.clamp(rp) + gp;
        let rd = if self.compliant {
            rp
        } else {
            let (rd, gd) = self.residual_norm(&sol, Residual::Dual);
            self.clamp(rd) + gd
        };
        let delta_pr = rp / beta;
        let delta_du = rd / beta;
        let rounding = 256.0 * (n as f64 + 1.0) * f64::EPSILON * self.output_magnitude(&sol);
        Ok(OutputBound {
            s_n,
            delta_pr,
            delta_du,
            delta_s: beta * delta_pr * delta_du + rounding,
            beta,
            rounding,
        })
    }

    /// Sum of the magnitudes of the terms entering `s_N`.
    fn output_magnitude(&self, sol: &ReducedSolution<T>) -> f64 {
        let n = sol.n;
        let mut m = 0.0;
        for i in 0..n {
            m += (self.l_pr[i] * sol.primal[i]).modulus();
        }
        let nd = sol.dual.len();
        if nd > 0 {
            let cross = combine(&self.a_cross, &sol.theta, nd, n);
            let ac = cross * &sol.primal;
            for i in 0..nd {
                m += sol.dual[i].modulus() * (ac[i].modulus() + self.b_du[i].modulus());
            }
        }
        m
    }

    /// Outputs `s_1(y), …, s_{N_max}(y)` (index 0 holds `s_0 = 0`).
    pub fn outputs_all(&self, y: &ParameterVector) -> Result<Vec<f64>> {
        (0..=self.n_max()).map(|n| self.online_output(n, y)).collect()
    }
}
