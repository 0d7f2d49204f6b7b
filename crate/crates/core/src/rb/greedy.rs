use nalgebra::{DMatrix, DVector};
use nalgebra_sparse::{CooMatrix, CsrMatrix};

use super::model::{RbModel, StabilityData};
use crate::error::{Error, Result};
use crate::hdg::{project, spmm, AffineSystem, HdgDiscretization};
use crate::model::ParameterVector;
use crate::par;
use crate::scalar::HdgScalar;

/// Options of the greedy basis construction.
#[derive(Clone, Debug)]
pub struct GreedyOptions {
    pub n_max: usize,
    /// Treat the output as compliant (`ℓ = b`, real symmetric form); the dual
    /// space is then the primal one.
    pub compliant: bool,
    /// Snapshots whose projected `W`-norm falls below this fraction of the
    /// original norm are rejected.
    pub drop_tol: f64,
    /// Stop once the largest training indicator is at or below this value.
    pub tol: f64,
    /// Reference parameter of the min-θ bound; defaults to `(1, …, 1)`.
    pub y_ref: Option<ParameterVector>,
}

impl Default for GreedyOptions {
    fn default() -> Self {
        Self {
            n_max: 10,
            compliant: false,
            drop_tol: 1e-10,
            tol: 0.0,
            y_ref: None,
        }
    }
}

/// `W`-orthonormal primal and dual bases and the greedily chosen parameters.
#[derive(Clone, Debug)]
pub struct RbSpace<T: HdgScalar> {
    pub primal: DMatrix<T>,
    pub dual: DMatrix<T>,
    pub params: Vec<ParameterVector>,
}

/// One greedy iteration: basis size before the step, the largest indicator
/// over the training set and the index that was added (if any).
#[derive(Clone, Debug, PartialEq)]
pub struct GreedyStep {
    pub n: usize,
    pub max_indicator: f64,
    pub selected: Option<usize>,
}

/// Result of [`greedy_build`].
#[derive(Clone, Debug)]
pub struct GreedyResult<T: HdgScalar> {
    pub space: RbSpace<T>,
    pub model: RbModel<T>,
    pub history: Vec<GreedyStep>,
    /// True when the indicator is the certified `Δ^s`, false when the true
    /// output error on the training set was used.
    pub certified: bool,
}

/// Per-`N` statistics of an RB model over a test set.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub n: usize,
    pub max_error: f64,
    pub avg_error: f64,
    pub max_bound: Option<f64>,
    pub avg_bound: Option<f64>,
}

/// Offline data shared by all greedy iterations.
struct Offline<'a, T: HdgScalar> {
    sys: &'a AffineSystem<T>,
    adjoints: Vec<CsrMatrix<T>>,
    w: DMatrix<T>,
    w_chol: nalgebra::Cholesky<T, nalgebra::Dyn>,
    compliant: bool,
    stability: Option<StabilityData>,
}

fn adjoint_csr<T: HdgScalar>(a: &CsrMatrix<T>) -> CsrMatrix<T> {
    let mut coo = CooMatrix::new(a.ncols(), a.nrows());
    for (i, j, v) in a.triplet_iter() {
        coo.push(j, i, v.conjugate());
    }
    CsrMatrix::from(&coo)
}

fn hermitian_part<T: HdgScalar>(a: &DMatrix<T>) -> DMatrix<T> {
    (a + a.adjoint()) * T::from_re(0.5)
}

/// Smallest eigenvalue of `L⁻¹ A L⁻ᴴ` for Hermitian `A` and `W = L Lᴴ`.
fn generalized_min_eig<T: HdgScalar>(a: &DMatrix<T>, chol: &nalgebra::Cholesky<T, nalgebra::Dyn>) -> f64 {
    let l = chol.l();
    let x = l.solve_lower_triangular(a).expect("Cholesky factor is nonsingular");
    let c = l.solve_lower_triangular(&x.adjoint()).expect("Cholesky factor is nonsingular");
    hermitian_part(&c).symmetric_eigenvalues().min()
}

/// Reference coercivity data, or `None` when the min-θ bound does not apply
/// (complex or noncoercive forms, indefinite terms, nonpositive coefficients).
pub fn stability_data<T: HdgScalar>(
    disc: &HdgDiscretization<T>,
    sys: &AffineSystem<T>,
    w_chol: &nalgebra::Cholesky<T, nalgebra::Dyn>,
    y_ref: &ParameterVector,
) -> Option<StabilityData> {
    if T::IS_COMPLEX || !disc.problem().is_coercive() {
        return None;
    }
    let bounds = disc.problem().domain.bounds();
    let mut active = Vec::with_capacity(sys.num_terms());
    for (q, a) in sys.a.iter().enumerate() {
        let act = a.values().iter().any(|v| *v != T::zero());
        if act {
            let d = hermitian_part(&DMatrix::from(a));
            let eig = d.symmetric_eigenvalues();
            let scale = eig.amax();
            if eig.min() < -1e-10 * scale {
                log::info!("affine term {q} is indefinite; no coercivity bound");
                return None;
            }
            if q > 0 && (bounds[q - 1].0 <= 0.0 || y_ref[q - 1] <= 0.0) {
                log::info!("coefficient {q} is not positive on the domain; no coercivity bound");
                return None;
            }
        }
        active.push(act);
    }
    let a_ref = sys.dense_at(&AffineSystem::<T>::theta(y_ref.as_slice()));
    let beta = generalized_min_eig(&hermitian_part(&a_ref), w_chol);
    (beta > 0.0).then(|| StabilityData {
        beta_ref: beta,
        y_ref: y_ref.clone(),
        active,
    })
}

/// Exact coercivity constant `β_h(y)` (smallest generalized eigenvalue of
/// the Hermitian part of `A(y)` with respect to `W`).
pub fn coercivity_constant<T: HdgScalar>(sys: &AffineSystem<T>, y: &ParameterVector) -> Result<f64> {
    let chol = sys
        .w_dense()
        .cholesky()
        .ok_or_else(|| Error::config("energy Gram matrix is not positive definite"))?;
    let a = sys.dense_at(&AffineSystem::<T>::theta(y.as_slice()));
    Ok(generalized_min_eig(&hermitian_part(&a), &chol))
}

fn project_vec<T: HdgScalar>(x: &DMatrix<T>, v: &DVector<T>, conjugate: bool) -> DVector<T> {
    let v = DMatrix::from_column_slice(v.len(), 1, v.as_slice());
    project(x, &v, conjugate).column(0).into_owned()
}

impl<'a, T: HdgScalar> Offline<'a, T> {
    fn inner(&self, u: &DVector<T>, v: &DVector<T>) -> T {
        // (u, v)_W = vᴴ W u
        v.dotc(&(&self.w * u))
    }

    /// Gram-Schmidt with one reorthogonalization pass. Returns false if the
    /// snapshot is numerically dependent on the current basis.
    fn orthonormalize(&self, basis: &mut DMatrix<T>, snap: DVector<T>, drop_tol: f64) -> bool {
        let norm0 = self.inner(&snap, &snap).to_complex().re.sqrt();
        if !(norm0 > 0.0) {
            return false;
        }
        let mut v = snap;
        for _ in 0..2 {
            for k in 0..basis.ncols() {
                let z = basis.column(k).into_owned();
                let c = self.inner(&v, &z);
                v -= z * c;
            }
        }
        let norm = self.inner(&v, &v).to_complex().re.max(0.0).sqrt();
        if norm < drop_tol * norm0 {
            return false;
        }
        v /= T::from_re(norm);
        let n = basis.ncols();
        *basis = basis.clone().insert_column(n, T::zero());
        basis.set_column(n, &v);
        true
    }

    /// Triangular factor `T` with `‖L⁻¹ R α‖₂ = ‖T α‖₂`.
    fn riesz_factor(&self, reps: &DMatrix<T>) -> DMatrix<T> {
        let f = self
            .w_chol
            .l_dirty()
            .solve_lower_triangular(reps)
            .expect("Cholesky factor is nonsingular");
        f.qr().r()
    }

    fn model(&self, space: &RbSpace<T>) -> RbModel<T> {
        let sys = self.sys;
        let nt = sys.num_terms();
        let zp = &space.primal;
        let n = zp.ncols();
        let az: Vec<DMatrix<T>> = sys.a.iter().map(|a| spmm(a, zp)).collect();
        let a_pr: Vec<DMatrix<T>> = az.iter().map(|m| project(zp, m, true)).collect();
        let b_pr = project_vec(zp, &sys.b, true);
        let l_pr = project_vec(zp, &sys.l, false);
        let ndof = sys.ndof();

        let mut reps = DMatrix::zeros(ndof, 1 + n * nt);
        reps.set_column(0, &sys.b);
        for k in 0..n {
            for (q, m) in az.iter().enumerate() {
                reps.set_column(1 + k * nt + q, &m.column(k));
            }
        }
        let riesz_pr = self.riesz_factor(&reps);

        let (a_du, a_cross, b_du, f_du, riesz_du) = if self.compliant {
            (Vec::new(), Vec::new(), DVector::zeros(0), DVector::zeros(0), DMatrix::zeros(0, 0))
        } else {
            let zd = &space.dual;
            let nd = zd.ncols();
            let a_du: Vec<DMatrix<T>> = sys.a.iter().map(|a| project(zd, &spmm(a, zd), true)).collect();
            let a_cross: Vec<DMatrix<T>> = az.iter().map(|m| project(zd, m, true)).collect();
            let b_du = project_vec(zd, &sys.b, true);
            let minus_l = -sys.l.map(|v| v.conjugate());
            let f_du = project_vec(zd, &minus_l, true);
            let ahz: Vec<DMatrix<T>> = self.adjoints.iter().map(|a| spmm(a, zd)).collect();
            let mut reps = DMatrix::zeros(ndof, 1 + nd * nt);
            reps.set_column(0, &minus_l);
            for k in 0..nd {
                for (q, m) in ahz.iter().enumerate() {
                    reps.set_column(1 + k * nt + q, &m.column(k));
                }
            }
            (a_du, a_cross, b_du, f_du, self.riesz_factor(&reps))
        };
        RbModel::from_parts(
            nt,
            self.compliant,
            space.params.clone(),
            a_pr,
            b_pr,
            l_pr,
            a_du,
            a_cross,
            b_du,
            f_du,
            riesz_pr,
            riesz_du,
            self.stability.clone(),
        )
    }
}

/// Greedy construction of hierarchical `W`-orthonormal primal (and dual)
/// bases.
///
/// Each iteration evaluates the indicator on the whole training set, takes
/// the maximizer (lowest index on ties), solves the full problem there and
/// appends the orthonormalized snapshot. The indicator is `Δ^s` when the
/// coercivity bound is available and the true output error otherwise.
pub fn greedy_build<T: HdgScalar>(
    disc: &HdgDiscretization<T>,
    training: &[ParameterVector],
    opts: &GreedyOptions,
) -> Result<GreedyResult<T>> {
    if opts.n_max == 0 {
        return Err(Error::config("N_max must be at least 1"));
    }
    if training.len() < opts.n_max {
        return Err(Error::config(format!(
            "training set has {} points but N_max = {}",
            training.len(),
            opts.n_max
        )));
    }
    let sys = disc.affine_system();
    if opts.compliant {
        if T::IS_COMPLEX {
            return Err(Error::config("the compliant shortcut requires a real discretization"));
        }
        let diff = (&sys.l - &sys.b).norm();
        if diff > 1e-14 * sys.b.norm().max(sys.l.norm()) {
            return Err(Error::config("compliant flag set but the output functional differs from the load"));
        }
    }
    let w = sys.w_dense();
    let w_chol = w
        .clone()
        .cholesky()
        .ok_or_else(|| Error::config("energy Gram matrix is not positive definite"))?;
    let y_ref = opts
        .y_ref
        .clone()
        .unwrap_or_else(|| ParameterVector::constant(disc.num_params(), 1.0));
    let stability = stability_data(disc, &sys, &w_chol, &y_ref);
    let certified = stability.is_some();
    let off = Offline {
        adjoints: sys.a.iter().map(adjoint_csr).collect(),
        sys: &sys,
        w,
        w_chol,
        compliant: opts.compliant,
        stability,
    };

    let truth: Option<Vec<f64>> = if certified {
        None
    } else {
        Some(par::try_map_range(training.len(), |i| disc.output(&training[i]))?)
    };

    let ndof = sys.ndof();
    let mut space = RbSpace {
        primal: DMatrix::zeros(ndof, 0),
        dual: DMatrix::zeros(ndof, 0),
        params: Vec::new(),
    };
    let mut used = vec![false; training.len()];
    let mut history = Vec::new();
    let minus_l = -sys.l.map(|v| v.conjugate());

    while space.primal.ncols() < opts.n_max {
        let model = off.model(&space);
        let n = space.primal.ncols();
        let ind: Vec<f64> = par::map_range(training.len(), |i| {
            let v = match &truth {
                None => model.output_bound(n, &training[i]).map(|b| b.delta_s),
                Some(t) => model.online_output(n, &training[i]).map(|s| (s - t[i]).abs()),
            };
            match v {
                Ok(x) if x.is_finite() => x,
                _ => f64::INFINITY,
            }
        });
        let mut order: Vec<usize> = (0..training.len()).filter(|&i| !used[i]).collect();
        order.sort_by(|&a, &b| ind[b].total_cmp(&ind[a]).then(a.cmp(&b)));
        let max_indicator = order.first().map_or(0.0, |&i| ind[i]);
        if order.is_empty() || max_indicator <= opts.tol {
            history.push(GreedyStep { n, max_indicator, selected: None });
            break;
        }
        let mut selected = None;
        for &i in &order {
            used[i] = true;
            let y = &training[i];
            let Ok(sol) = disc.solve(y) else {
                log::warn!("full solve failed at training point {i}; skipped");
                continue;
            };
            if !off.orthonormalize(&mut space.primal, sol.coeffs, opts.drop_tol) {
                log::debug!("snapshot at training point {i} is dependent; skipped");
                continue;
            }
            if !opts.compliant {
                let dual = disc.solve_rhs(y, &minus_l, true)?;
                if !off.orthonormalize(&mut space.dual, dual, opts.drop_tol) {
                    log::debug!("dual snapshot at training point {i} is dependent");
                }
            }
            space.params.push(y.clone());
            selected = Some(i);
            break;
        }
        history.push(GreedyStep { n, max_indicator, selected });
        if selected.is_none() {
            break;
        }
    }
    let model = off.model(&space);
    Ok(GreedyResult {
        space,
        model,
        history,
        certified,
    })
}

/// Maximum and average true output error (and bound, when available) for
/// every `N = 0, …, N_max` over a test set with known full outputs.
pub fn convergence_table<T: HdgScalar>(
    model: &RbModel<T>,
    test: &[ParameterVector],
    full: &[f64],
) -> Result<Vec<ConvergenceRow>> {
    assert_eq!(test.len(), full.len());
    let m = test.len() as f64;
    let mut rows = Vec::new();
    for n in 0..=model.n_max() {
        let vals = par::try_map_range(test.len(), |i| -> Result<(f64, Option<f64>)> {
            let (s, bound) = match model.output_bound(n, &test[i]) {
                Ok(b) => (b.s_n, Some(b.delta_s)),
                Err(Error::StabilityUnavailable(_)) => (model.online_output(n, &test[i])?, None),
                Err(e) => return Err(e),
            };
            Ok(((s - full[i]).abs(), bound))
        })?;
        let max_error = vals.iter().map(|v| v.0).fold(0.0, f64::max);
        let avg_error = vals.iter().map(|v| v.0).sum::<f64>() / m;
        let bounds: Option<Vec<f64>> = vals.iter().map(|v| v.1).collect();
        rows.push(ConvergenceRow {
            n,
            max_error,
            avg_error,
            max_bound: bounds.as_ref().map(|b| b.iter().copied().fold(0.0, f64::max)),
            avg_bound: bounds.as_ref().map(|b| b.iter().sum::<f64>() / m),
        });
    }
    Ok(rows)
}
