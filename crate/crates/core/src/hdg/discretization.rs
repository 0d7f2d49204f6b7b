use nalgebra::{DMatrix, DVector};
use nalgebra_sparse::{CooMatrix, CsrMatrix};
use num_complex::Complex64;

use super::affine::AffineSystem;
use super::element::{lift, ElementOps};
use super::mesh::Mesh1D;
use super::problem::{BoundaryCondition, HdgProblem, OutputFunctional};
use super::tridiag::{solve_tridiagonal, solve_tridiagonal_row_sums};
use crate::error::{Error, Result};
use crate::model::{ParameterVector, Side, SpatialFunction};
use crate::scalar::HdgScalar;

/// Coefficient vector of `(u_h, û_h)` with its element and face views.
#[derive(Clone, Debug)]
pub struct FieldSolution<T: HdgScalar> {
    /// Global coefficients: element modes first, then free traces.
    pub coeffs: DVector<T>,
    /// Modal coefficients of `u_h` per element.
    pub u: Vec<DVector<T>>,
    /// Trace value per mesh face, including constrained faces.
    pub uhat: Vec<T>,
}

/// One element's contribution: affine terms `(index into θ, local block)`
/// with only nonzero blocks stored, and the local load vector.
#[derive(Clone, Debug)]
struct ElementData<T: HdgScalar> {
    ops: ElementOps,
    terms: Vec<(usize, DMatrix<T>)>,
    /// Reaction and Robin part of the element matrix. The diffusion blocks
    /// map the constant mode to zero, so this alone gives the action of the
    /// element on constants without cancellation.
    lower_order: DMatrix<T>,
    w_block: DMatrix<T>,
    load: DVector<T>,
    output: DVector<f64>,
}

/// HDG discretization of an [`HdgProblem`] on a 1D mesh.
///
/// Degrees of freedom are ordered as `e·(p+1) + i` for mode `i` of element
/// `e`, followed by one trace unknown per unconstrained face.
#[derive(Clone, Debug)]
pub struct HdgDiscretization<T: HdgScalar> {
    problem: HdgProblem,
    mesh: Mesh1D,
    p: usize,
    elements: Vec<ElementData<T>>,
    trace_index: Vec<Option<usize>>,
    n_u: usize,
    ndof: usize,
}

fn scalar<T: HdgScalar>(c: Complex64, what: &str) -> Result<T> {
    T::from_complex(c).ok_or_else(|| Error::config(format!("{what} is complex but the discretization is real")))
}

fn coefficient_values(f: &SpatialFunction, ops: &ElementOps) -> (Vec<f64>, f64, f64) {
    let q = ops.qx.iter().map(|&x| f.eval(x)).collect();
    (q, f.eval_from(ops.xl, Side::Right), f.eval_from(ops.xr, Side::Left))
}

impl<T: HdgScalar> HdgDiscretization<T> {
    pub fn new(problem: HdgProblem, mesh: Mesh1D, p: usize) -> Result<Self> {
        problem.validate()?;
        let rho: T = scalar(problem.reaction, "reaction coefficient")?;
        let nu = |bc: BoundaryCondition| -> Result<Option<(T, T)>> {
            match bc {
                BoundaryCondition::Dirichlet => Ok(None),
                BoundaryCondition::Robin { nu, g } => Ok(Some((scalar(nu, "Robin ν")?, scalar(g, "Robin g")?))),
            }
        };
        let left = nu(problem.left)?;
        let right = nu(problem.right)?;
        let jumps = problem.field.discontinuities();
        if !mesh.contains_nodes(&jumps) {
            log::warn!("mesh faces do not align with the discontinuities of the diffusion field");
        }

        let n_el = mesh.num_elements();
        let nf = mesh.num_faces();
        let mut trace_index = vec![None; nf];
        let n_u = n_el * (p + 1);
        let mut next = n_u;
        for (f, slot) in trace_index.iter_mut().enumerate() {
            let constrained = (f == 0 && left.is_none()) || (f == nf - 1 && right.is_none());
            if !constrained {
                *slot = Some(next);
                next += 1;
            }
        }

        let tau = problem.tau;
        let mut elements = Vec::with_capacity(n_el);
        for e in 0..n_el {
            let (xl, xr) = mesh.element(e);
            let ops = ElementOps::new(xl, xr, p);
            for (&x, side) in ops
                .qx
                .iter()
                .map(|x| (x, Side::Right))
                .chain([(&xl, Side::Right), (&xr, Side::Left)])
            {
                let (lo, _) = problem.field.range_at(x, side, &problem.domain);
                if !(lo > 0.0) {
                    return Err(Error::config(format!(
                        "diffusion field is not strictly positive over the parameter domain (min {lo} at x = {x})"
                    )));
                }
            }
            let mass = ops.padded_mass().map(T::from_re);
            let boundary = |k: &mut DMatrix<T>, b: &mut DVector<T>, nu_l: T, nu_r: T| {
                let n = p + 1;
                if e == 0 {
                    if let Some((nu, g)) = left {
                        k[(n, n)] += nu * nu_l;
                        b[n] += g;
                    }
                }
                if e == n_el - 1 {
                    if let Some((nu, g)) = right {
                        k[(n + 1, n + 1)] += nu * nu_r;
                        b[n + 1] += g;
                    }
                }
            };

            let mut terms = Vec::new();
            let (kq, kl, kr) = coefficient_values(&problem.field.mean, &ops);
            let mut k0 = ops.diffusion_matrix(&kq, kl, kr, tau).map(T::from_re) + &mass * rho;
            let mut load = DVector::zeros(p + 3);
            let (fq, _, _) = coefficient_values(&problem.source, &ops);
            load.rows_mut(0, p + 1).copy_from(&ops.load(&fq).map(T::from_re));
            boundary(&mut k0, &mut load, T::one(), T::one());
            let mut lower_order = &mass * rho;
            boundary(&mut lower_order, &mut DVector::zeros(p + 3), T::one(), T::one());
            if k0.iter().any(|v| *v != T::zero()) {
                terms.push((0, k0));
            }
            for (q, mode) in problem.field.modes.iter().enumerate() {
                let (kq, kl, kr) = coefficient_values(mode, &ops);
                let kq_block = ops.diffusion_matrix(&kq, kl, kr, tau);
                if kq_block.iter().any(|v| *v != 0.0) {
                    terms.push((q + 1, kq_block.map(T::from_re)));
                }
            }

            let ones = vec![1.0; ops.qx.len()];
            let mut w_block = ops.diffusion_matrix(&ones, 1.0, 1.0, tau).map(T::from_re) + &mass;
            let n = p + 1;
            if e == 0 && left.is_some() {
                w_block[(n, n)] += T::one();
            }
            if e == n_el - 1 && right.is_some() {
                w_block[(n + 1, n + 1)] += T::one();
            }

            let output = match problem.output {
                OutputFunctional::Mean => ops.load(&ones),
                OutputFunctional::Gaussian { center, width } => {
                    let fine = ElementOps::with_quadrature(xl, xr, p, p + 16);
                    let g: Vec<f64> = fine.qx.iter().map(|&x| (-((x - center) / width).powi(2)).exp()).collect();
                    fine.load(&g)
                }
            };
            elements.push(ElementData {
                ops,
                terms,
                lower_order,
                w_block,
                load,
                output,
            });
        }
        Ok(Self {
            problem,
            mesh,
            p,
            elements,
            trace_index,
            n_u,
            ndof: next,
        })
    }

    pub fn problem(&self) -> &HdgProblem {
        &self.problem
    }

    pub fn mesh(&self) -> &Mesh1D {
        &self.mesh
    }

    pub fn degree(&self) -> usize {
        self.p
    }

    pub fn ndof(&self) -> usize {
        self.ndof
    }

    pub fn num_u_dofs(&self) -> usize {
        self.n_u
    }

    pub fn num_params(&self) -> usize {
        self.problem.dim()
    }

    pub fn element_ops(&self, e: usize) -> &ElementOps {
        &self.elements[e].ops
    }

    /// Global index of the trace unknown on face `f`, if it is free.
    pub fn trace_index(&self, f: usize) -> Option<usize> {
        self.trace_index[f]
    }

    /// Global index of local slot `k` (modes, then left and right trace) of
    /// element `e`.
    pub fn local_to_global(&self, e: usize, k: usize) -> Option<usize> {
        let n = self.p + 1;
        if k < n {
            Some(e * n + k)
        } else {
            self.trace_index[e + k - n]
        }
    }

    fn scatter(&self, e: usize, block: &DMatrix<T>, coo: &mut CooMatrix<T>) {
        for c in 0..block.ncols() {
            let Some(gc) = self.local_to_global(e, c) else { continue };
            for r in 0..block.nrows() {
                let v = block[(r, c)];
                if v == T::zero() {
                    continue;
                }
                if let Some(gr) = self.local_to_global(e, r) {
                    coo.push(gr, gc, v);
                }
            }
        }
    }

    pub fn load_vector(&self) -> DVector<T> {
        let mut b = DVector::zeros(self.ndof);
        for (e, el) in self.elements.iter().enumerate() {
            for (k, &v) in el.load.iter().enumerate() {
                if let Some(g) = self.local_to_global(e, k) {
                    b[g] += v;
                }
            }
        }
        b
    }

    pub fn output_vector(&self) -> DVector<T> {
        let mut l = DVector::zeros(self.ndof);
        for (e, el) in self.elements.iter().enumerate() {
            for (k, &v) in el.output.iter().enumerate() {
                l[e * (self.p + 1) + k] = T::from_re(v);
            }
        }
        l
    }

    /// Assembles `A_0, …, A_Q`, `b`, `ℓ` and `W`.
    pub fn affine_system(&self) -> AffineSystem<T> {
        let nt = self.problem.dim() + 1;
        let mut coo: Vec<CooMatrix<T>> = (0..nt).map(|_| CooMatrix::new(self.ndof, self.ndof)).collect();
        let mut w = CooMatrix::new(self.ndof, self.ndof);
        for (e, el) in self.elements.iter().enumerate() {
            for (q, block) in &el.terms {
                self.scatter(e, block, &mut coo[*q]);
            }
            self.scatter(e, &el.w_block, &mut w);
        }
        AffineSystem {
            a: coo.iter().map(CsrMatrix::from).collect(),
            b: self.load_vector(),
            l: self.output_vector(),
            w: CsrMatrix::from(&w),
        }
    }

    /// Assembles `A(y)` by evaluating `κ(x, y)` directly rather than through
    /// the affine expansion.
    pub fn assemble_direct(&self, y: &ParameterVector) -> Result<CsrMatrix<T>> {
        self.check_dim(y)?;
        let rho: T = scalar(self.problem.reaction, "reaction coefficient")?;
        let mut coo = CooMatrix::new(self.ndof, self.ndof);
        let field = &self.problem.field;
        let n_el = self.elements.len();
        for (e, el) in self.elements.iter().enumerate() {
            let ops = &el.ops;
            let kq: Vec<f64> = ops.qx.iter().map(|&x| field.eval(x, y)).collect();
            let kl = field.eval_from(ops.xl, Side::Right, y);
            let kr = field.eval_from(ops.xr, Side::Left, y);
            let mut k = ops.diffusion_matrix(&kq, kl, kr, self.problem.tau).map(T::from_re)
                + ops.padded_mass().map(T::from_re) * rho;
            let n = self.p + 1;
            if e == 0 {
                if let BoundaryCondition::Robin { nu, .. } = self.problem.left {
                    k[(n, n)] += scalar::<T>(nu, "Robin ν")?;
                }
            }
            if e == n_el - 1 {
                if let BoundaryCondition::Robin { nu, .. } = self.problem.right {
                    k[(n + 1, n + 1)] += scalar::<T>(nu, "Robin ν")?;
                }
            }
            self.scatter(e, &k, &mut coo);
        }
        Ok(CsrMatrix::from(&coo))
    }

    fn check_dim(&self, y: &ParameterVector) -> Result<()> {
        if y.len() != self.problem.dim() {
            return Err(Error::config(format!(
                "parameter has dimension {} but the model expects {}",
                y.len(),
                self.problem.dim()
            )));
        }
        Ok(())
    }

    fn element_matrix(&self, e: usize, theta: &[f64], adjoint: bool) -> DMatrix<T> {
        let m = self.p + 3;
        let mut k = DMatrix::zeros(m, m);
        for (q, block) in &self.elements[e].terms {
            k += block * T::from_re(theta[*q]);
        }
        if adjoint {
            k.adjoint()
        } else {
            k
        }
    }

    /// Solves `A(y) x = rhs` (or `A(y)ᴴ x = rhs`) by static condensation:
    /// element modes are eliminated locally and the tridiagonal trace system
    /// is solved in row-sum form when it is diagonally dominant, with partial
    /// pivoting otherwise.
    ///
    /// On an element of width `h` the condensed diffusion block is of size
    /// `κ/h` while its row sums vanish. Forming the diagonal of the trace
    /// system explicitly would bury the neighbouring `O(1)` couplings under
    /// `ε κ/h` of rounding, so row sums are accumulated separately from the
    /// lower-order terms.
    pub fn solve_rhs(&self, y: &ParameterVector, rhs: &DVector<T>, adjoint: bool) -> Result<DVector<T>> {
        self.check_dim(y)?;
        let theta = AffineSystem::<T>::theta(y.as_slice());
        let n = self.p + 1;
        let n_el = self.elements.len();
        let nf = n_el + 1;
        let mut rho = vec![T::zero(); nf];
        let mut dl = vec![T::zero(); nf - 1];
        let mut du = vec![T::zero(); nf - 1];
        let mut bt = vec![T::zero(); nf];
        let singular = |ctx: String| Error::Singular {
            y: y.0.clone(),
            context: ctx,
        };
        // constant mode of the local layout: φ_0 = 1 and both traces 1
        let mut ones = DVector::<T>::zeros(n + 2);
        ones[0] = T::one();
        ones[n] = T::one();
        ones[n + 1] = T::one();
        let mut local = Vec::with_capacity(n_el);
        for e in 0..n_el {
            let k = self.element_matrix(e, &theta, adjoint);
            let kuu = k.view((0, 0), (n, n)).into_owned();
            let kul = k.view((0, n), (n, 2)).into_owned();
            let klu = k.view((n, 0), (2, n));
            let ru = rhs.rows(e * n, n).into_owned();
            let lu = kuu.lu();
            let x = lu.solve(&kul).ok_or_else(|| singular(format!("element {e} block")))?;
            let xu = lu.solve(&ru).ok_or_else(|| singular(format!("element {e} block")))?;
            let s = k.view((n, n), (2, 2)) - klu * &x;
            // S·1 = m_η − K_ηu K_uu⁻¹ m_u with m = (lower-order part)·constant
            let low = &self.elements[e].lower_order;
            let m = if adjoint { low.adjoint() * &ones } else { low * &ones };
            let delta = lu.solve(&m.rows(0, n).into_owned()).ok_or_else(|| singular(format!("element {e} block")))?;
            let row_sums = m.rows(n, 2) - klu * delta;
            let rt = -(klu * &xu);
            du[e] += s[(0, 1)];
            dl[e] += s[(1, 0)];
            rho[e] += row_sums[0];
            rho[e + 1] += row_sums[1];
            bt[e] += rt[0];
            bt[e + 1] += rt[1];
            local.push((x, xu));
        }
        for f in 0..nf {
            match self.trace_index[f] {
                Some(g) => bt[f] += rhs[g],
                None => {
                    // the known value moves to the right-hand side, which
                    // drops its column from the neighbouring rows
                    if f > 0 {
                        rho[f - 1] -= du[f - 1];
                        du[f - 1] = T::zero();
                        dl[f - 1] = T::zero();
                    }
                    if f + 1 < nf {
                        rho[f + 1] -= dl[f];
                        dl[f] = T::zero();
                        du[f] = T::zero();
                    }
                    rho[f] = T::one();
                    bt[f] = T::zero();
                }
            }
        }
        let mut d: Vec<T> = (0..nf)
            .map(|f| {
                let mut v = rho[f];
                if f > 0 {
                    v -= dl[f - 1];
                }
                if f + 1 < nf {
                    v -= du[f];
                }
                v
            })
            .collect();
        let dominant = (0..nf).all(|f| {
            let off = (if f > 0 { dl[f - 1].modulus() } else { 0.0 }) + (if f + 1 < nf { du[f].modulus() } else { 0.0 });
            d[f].modulus() >= off * (1.0 - 1e-8)
        });
        let solved = if dominant {
            solve_tridiagonal_row_sums(&dl, &du, &mut rho, &mut bt)
        } else {
            solve_tridiagonal(&mut dl, &mut d, &mut du, &mut bt)
        };
        if !solved {
            return Err(singular("trace system".into()));
        }
        let mut out = DVector::zeros(self.ndof);
        for (e, (x, xu)) in local.iter().enumerate() {
            let lam = DVector::from_vec(vec![bt[e], bt[e + 1]]);
            let u = xu - x * lam;
            out.rows_mut(e * n, n).copy_from(&u);
        }
        for (f, g) in self.trace_index.iter().enumerate() {
            if let Some(g) = g {
                out[*g] = bt[f];
            }
        }
        if out.iter().any(|v| !v.to_complex().is_finite()) {
            return Err(singular("non-finite solution".into()));
        }
        Ok(out)
    }

    pub fn solve(&self, y: &ParameterVector) -> Result<FieldSolution<T>> {
        let b = self.load_vector();
        let x = self.solve_rhs(y, &b, false)?;
        Ok(self.field_solution(x))
    }

    /// Dense LU solve of the full `(u, û)` system; used as a reference for
    /// the condensed solver.
    pub fn solve_monolithic(&self, y: &ParameterVector) -> Result<FieldSolution<T>> {
        self.check_dim(y)?;
        let sys = self.affine_system();
        let a = sys.dense_at(&AffineSystem::<T>::theta(y.as_slice()));
        let x = a.lu().solve(&sys.b).ok_or_else(|| Error::Singular {
            y: y.0.clone(),
            context: "monolithic system".into(),
        })?;
        Ok(self.field_solution(x))
    }

    pub fn field_solution(&self, coeffs: DVector<T>) -> FieldSolution<T> {
        let n = self.p + 1;
        let u = (0..self.elements.len())
            .map(|e| coeffs.rows(e * n, n).into_owned())
            .collect();
        let uhat = self
            .trace_index
            .iter()
            .map(|g| g.map_or(T::zero(), |g| coeffs[g]))
            .collect();
        FieldSolution { coeffs, u, uhat }
    }

    /// `ℓ(u_h)`.
    pub fn evaluate_output(&self, sol: &FieldSolution<T>) -> T {
        let l = self.output_vector();
        l.iter().zip(sol.coeffs.iter()).fold(T::zero(), |acc, (&a, &b)| acc + a * b)
    }

    /// Real part of `ℓ(u_h(y))`.
    pub fn output(&self, y: &ParameterVector) -> Result<f64> {
        let sol = self.solve(y)?;
        Ok(self.evaluate_output(&sol).to_complex().re)
    }

    /// Gradient coefficients `q_h = l(u_h) + m(û_h)` on element `e`.
    pub fn gradient(&self, sol: &FieldSolution<T>, e: usize) -> DVector<T> {
        lift(&self.elements[e].ops, sol.u[e].as_slice(), sol.uhat[e], sol.uhat[e + 1])
    }

    /// `u_h(x)`, taken from the element to the left at interior faces.
    pub fn eval_u(&self, sol: &FieldSolution<T>, x: f64) -> T {
        let e = self.mesh.locate(x);
        self.elements[e].ops.eval(sol.u[e].as_slice(), x)
    }

    /// `∫ |u_h − g|² dx` with `g` given pointwise, by high-order quadrature.
    pub fn l2_error_sq<G: Fn(f64) -> T>(&self, sol: &FieldSolution<T>, g: G) -> f64 {
        let mut s = 0.0;
        for (e, el) in self.elements.iter().enumerate() {
            let fine = ElementOps::with_quadrature(el.ops.xl, el.ops.xr, self.p, self.p + 8);
            for (k, &w) in fine.qw.iter().enumerate() {
                let x = fine.qx[k];
                let uh = fine.eval(sol.u[e].as_slice(), x);
                s += w * (uh - g(x)).modulus_squared();
            }
        }
        s
    }
}
