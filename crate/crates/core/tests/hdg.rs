use nalgebra::{DMatrix, DVector};
use nalgebra_sparse::CsrMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rbmvr_core::hdg::{AffineSystem, BoundaryCondition, HdgDiscretization, HdgProblem, Mesh1D};
use rbmvr_core::model::{
    HeatBenchmark, ParameterDomain, ParameterVector, RandomFieldExpansion, SampleStream, SpatialFunction,
};

fn benchmark(q: usize, elements: usize, p: usize) -> HdgDiscretization<f64> {
    HdgDiscretization::new(HdgProblem::heat_benchmark(q).unwrap(), Mesh1D::uniform(elements).unwrap(), p).unwrap()
}

fn frob<T: rbmvr_core::HdgScalar>(a: &DMatrix<T>) -> f64 {
    a.iter().map(|v| v.modulus_squared()).sum::<f64>().sqrt()
}

fn dense(a: &CsrMatrix<f64>) -> DMatrix<f64> {
    DMatrix::from(a)
}

#[test]
fn constant_field_reproduces_quadratic_solution() {
    for mesh in [Mesh1D::uniform(3).unwrap(), Mesh1D::new(vec![0.0, 0.13, 0.5, 0.91, 1.0]).unwrap()] {
        let disc: HdgDiscretization<f64> = HdgDiscretization::new(HdgProblem::heat_benchmark(1).unwrap(), mesh, 2).unwrap();
        let y = ParameterVector::new(vec![1.0]);
        let sol = disc.solve(&y).unwrap();
        for i in 0..=40 {
            let x = i as f64 / 40.0;
            assert!((disc.eval_u(&sol, x) - (x - 0.5 * x * x)).abs() < 1e-13, "x = {x}");
        }
        assert!((disc.evaluate_output(&sol) - 1.0 / 3.0).abs() < 1e-14);
        // q_h = u' = 1 − x exactly
        for e in 0..disc.mesh().num_elements() {
            let q = disc.gradient(&sol, e);
            let ops = disc.element_ops(e);
            for &x in &ops.qx {
                assert!((ops.eval(q.as_slice(), x) - (1.0 - x)).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn benchmark_interfaces_match_analytic_solution() {
    let reference = HeatBenchmark::new(10, 1.0).unwrap();
    let domain = ParameterDomain::uniform(10, 0.1, 1.0).unwrap();
    let mut stream = SampleStream::new(11, 0);
    for p in 1..=3 {
        let disc = benchmark(10, 10, p);
        for y in stream.draw_samples(&domain, 10) {
            let sol = disc.solve(&y).unwrap();
            for f in 0..=10 {
                let x = f as f64 / 10.0;
                let exact = reference.solution(&y, x).unwrap();
                assert!((sol.uhat[f] - exact).abs() < 1e-10 * exact.abs().max(1.0), "p = {p}, face {f}");
            }
        }
    }
}

#[test]
fn benchmark_output_matches_analytic_output() {
    let reference = HeatBenchmark::new(10, 1.0).unwrap();
    let domain = ParameterDomain::uniform(10, 0.1, 1.0).unwrap();
    let disc = benchmark(10, 10, 2);
    let mut stream = SampleStream::new(5, 0);
    for y in stream.draw_samples(&domain, 100) {
        let s = disc.output(&y).unwrap();
        assert!((s - reference.output(&y).unwrap()).abs() < 1e-10);
    }
    assert!((disc.output(&ParameterVector::constant(10, 1.0)).unwrap() - 1.0 / 3.0).abs() < 1e-13);
}

#[test]
fn condensed_solve_matches_monolithic() {
    let disc = benchmark(10, 20, 3);
    let domain = ParameterDomain::uniform(10, 0.1, 1.0).unwrap();
    let mut stream = SampleStream::new(3, 0);
    for y in stream.draw_samples(&domain, 20) {
        let a = disc.solve(&y).unwrap();
        let b = disc.solve_monolithic(&y).unwrap();
        let scale = b.coeffs.amax();
        assert!((&a.coeffs - &b.coeffs).amax() < 1e-11 * scale);
        assert!((disc.evaluate_output(&a) - disc.evaluate_output(&b)).abs() < 1e-11);
    }
}

#[test]
fn condensed_residual_is_small() {
    let disc = benchmark(10, 40, 2);
    let sys = disc.affine_system();
    let y = ParameterVector::new((0..10).map(|q| 0.1 + 0.09 * q as f64).collect());
    let sol = disc.solve(&y).unwrap();
    let theta = AffineSystem::<f64>::theta(y.as_slice());
    let r = sys.apply(&theta, &sol.coeffs) - &sys.b;
    let scale = frob(&sys.dense_at(&theta)) * sol.coeffs.norm();
    assert!(r.norm() < 1e-13 * scale, "relative residual {}", r.norm() / scale);
}

#[test]
fn adjoint_solve_matches_transposed_system() {
    let problem = HdgProblem::helmholtz(6.0, 4, 0.2).unwrap();
    let disc: HdgDiscretization<Complex64> = HdgDiscretization::new(problem, Mesh1D::uniform(8).unwrap(), 2).unwrap();
    let sys = disc.affine_system();
    let y = ParameterVector::new(vec![0.1, -0.05, 0.15, 0.0]);
    let a = sys.dense_at(&AffineSystem::<Complex64>::theta(y.as_slice()));
    let rhs = DVector::from_fn(sys.ndof(), |i, _| Complex64::new((i as f64).sin(), (i as f64 * 0.3).cos()));
    let x = disc.solve_rhs(&y, &rhs, true).unwrap();
    let r = a.adjoint() * &x - &rhs;
    assert!(r.norm() < 1e-11 * rhs.norm());
    let x = disc.solve_rhs(&y, &rhs, false).unwrap();
    assert!((&a * &x - &rhs).norm() < 1e-11 * rhs.norm());
}

#[test]
fn single_mode_affinity() {
    let field = RandomFieldExpansion::new(SpatialFunction::Constant(0.0), vec![SpatialFunction::indicator(0.0, 1.0, 1.0)]).unwrap();
    let mut problem = HdgProblem::heat_benchmark(1).unwrap();
    problem.field = field;
    let disc: HdgDiscretization<f64> = HdgDiscretization::new(problem, Mesh1D::uniform(7).unwrap(), 2).unwrap();
    let sys = disc.affine_system();
    for y1 in [0.1, 0.5, 1.0] {
        let y = ParameterVector::new(vec![y1]);
        let direct = dense(&disc.assemble_direct(&y).unwrap());
        let affine = sys.dense_at(&[1.0, y1]);
        assert!(frob(&(&affine - &direct)) < 1e-13 * frob(&direct));
    }
}

#[test]
fn affinity_against_direct_assembly() {
    // smooth mean plus overlapping modes, non-aligned with the mesh on purpose
    let field = RandomFieldExpansion::new(
        SpatialFunction::Tabulated { xs: vec![0.0, 1.0], values: vec![1.0, 2.0] },
        vec![
            SpatialFunction::indicator(0.0, 0.5, 0.3),
            SpatialFunction::Tabulated { xs: vec![0.0, 0.4, 1.0], values: vec![0.0, 0.2, 0.1] },
            SpatialFunction::indicator(0.25, 1.0, 0.2),
        ],
    )
    .unwrap();
    let mut problem = HdgProblem::heat_benchmark(3).unwrap();
    problem.field = field;
    problem.domain = ParameterDomain::uniform(3, -1.0, 1.0).unwrap();
    problem.reaction = Complex64::new(0.7, 0.0);
    problem.right = BoundaryCondition::Robin { nu: Complex64::new(0.4, 0.0), g: Complex64::new(0.2, 0.0) };
    let disc: HdgDiscretization<f64> = HdgDiscretization::new(problem.clone(), Mesh1D::uniform(8).unwrap(), 3).unwrap();
    let sys = disc.affine_system();
    let mut stream = SampleStream::new(17, 0);
    for y in stream.draw_samples(&problem.domain, 50) {
        let direct = dense(&disc.assemble_direct(&y).unwrap());
        let affine = sys.dense_at(&AffineSystem::<f64>::theta(y.as_slice()));
        assert!(frob(&(&affine - &direct)) < 1e-12 * frob(&direct));
    }
}

#[test]
fn unit_coefficients_give_the_gram_matrix() {
    let mut problem = HdgProblem::heat_benchmark(4).unwrap();
    problem.reaction = Complex64::new(1.0, 0.0);
    problem.right = BoundaryCondition::Robin { nu: Complex64::new(1.0, 0.0), g: Complex64::new(0.0, 0.0) };
    let disc: HdgDiscretization<f64> = HdgDiscretization::new(problem, Mesh1D::uniform(8).unwrap(), 2).unwrap();
    let sys = disc.affine_system();
    let a = sys.dense_at(&[1.0; 5]);
    let w = sys.w_dense();
    assert!(frob(&(&a - &w)) < 1e-13 * frob(&w));
}

#[test]
fn benchmark_modes_are_supported_on_their_subdomain() {
    let (q, per) = (10, 2);
    let disc = benchmark(q, q * per, 2);
    let sys = disc.affine_system();
    let n = 3;
    for (k, a) in sys.a.iter().enumerate().skip(1) {
        // elements of subdomain k-1 and the faces bounding them
        let elems: Vec<usize> = ((k - 1) * per..k * per).collect();
        let mut allowed: Vec<usize> = elems.iter().flat_map(|&e| e * n..(e + 1) * n).collect();
        for f in (k - 1) * per..=k * per {
            if let Some(g) = disc.trace_index(f) {
                allowed.push(g);
            }
        }
        assert!(a.nnz() > 0);
        for (i, j, _) in a.triplet_iter() {
            assert!(allowed.contains(&i) && allowed.contains(&j), "A_{k} has entry ({i}, {j})");
        }
    }
    // the mean field is zero and there is no reaction or Robin term
    assert_eq!(sys.a[0].nnz(), 0);
}

#[test]
fn gram_matrix_is_positive_definite_and_form_coercive() {
    let disc = benchmark(10, 10, 2);
    let sys = disc.affine_system();
    let w = sys.w_dense();
    assert!((&w - w.transpose()).amax() < 1e-13);
    assert!(w.clone().symmetric_eigenvalues().min() > 0.0);
    let domain = ParameterDomain::uniform(10, 0.1, 1.0).unwrap();
    let mut stream = SampleStream::new(23, 0);
    let mut vs = SampleStream::new(23, 1);
    for y in stream.draw_samples(&domain, 20) {
        let a = sys.dense_at(&AffineSystem::<f64>::theta(y.as_slice()));
        assert!((&a - a.transpose()).amax() < 1e-12 * a.amax());
        let v = DVector::from_vec(vs.draw_uniform(sys.ndof()).iter().map(|u| u - 0.5).collect());
        assert!(v.dot(&(&a * &v)) > 0.0);
    }
    // each A_q is positive semidefinite
    for a in sys.a.iter().skip(1) {
        assert!(dense(a).symmetric_eigenvalues().min() > -1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn constant_kappa_output_is_exact(
        p in 2usize..6,
        mut cuts in proptest::collection::vec(0.01f64..0.99, 0..6),
    ) {
        cuts.sort_by(f64::total_cmp);
        cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-6);
        let nodes: Vec<f64> = std::iter::once(0.0).chain(cuts).chain(std::iter::once(1.0)).collect();
        let disc: HdgDiscretization<f64> =
            HdgDiscretization::new(HdgProblem::heat_benchmark(1).unwrap(), Mesh1D::new(nodes).unwrap(), p).unwrap();
        let s = disc.output(&ParameterVector::new(vec![1.0])).unwrap();
        prop_assert!((s - 1.0 / 3.0).abs() < 1e-13);
    }
}

#[test]
fn helmholtz_converges_at_order_p_plus_one() {
    let problem = HdgProblem::helmholtz(6.0, 4, 0.3).unwrap();
    let y = ParameterVector::new(vec![0.2, -0.1, 0.25, -0.3]);
    for p in 1..=3 {
        let fine: HdgDiscretization<Complex64> =
            HdgDiscretization::new(problem.clone(), Mesh1D::uniform(256).unwrap(), p + 2).unwrap();
        let reference = fine.solve(&y).unwrap();
        let errs: Vec<f64> = [16usize, 32, 64]
            .iter()
            .map(|&n| {
                let d: HdgDiscretization<Complex64> =
                    HdgDiscretization::new(problem.clone(), Mesh1D::uniform(n).unwrap(), p).unwrap();
                let sol = d.solve(&y).unwrap();
                d.l2_error_sq(&sol, |x| fine.eval_u(&reference, x)).sqrt()
            })
            .collect();
        let rate = (errs[1] / errs[2]).log2();
        assert!((rate - (p as f64 + 1.0)).abs() < 0.3, "p = {p}: errors {errs:?}, rate {rate}");
    }
}

#[test]
fn real_discretization_rejects_complex_coefficients() {
    let problem = HdgProblem::helmholtz(3.0, 2, 0.1).unwrap();
    assert!(HdgDiscretization::<f64>::new(problem, Mesh1D::uniform(4).unwrap(), 1).is_err());
}

#[test]
fn rejects_nonpositive_field_and_tau() {
    let mut problem = HdgProblem::heat_benchmark(2).unwrap();
    problem.domain = ParameterDomain::uniform(2, -0.1, 1.0).unwrap();
    assert!(HdgDiscretization::<f64>::new(problem, Mesh1D::uniform(4).unwrap(), 1).is_err());
    let mut problem = HdgProblem::heat_benchmark(2).unwrap();
    problem.tau = 0.0;
    assert!(HdgDiscretization::<f64>::new(problem, Mesh1D::uniform(4).unwrap(), 1).is_err());
}

#[test]
fn triplet_dump_lists_every_block() {
    let disc = benchmark(2, 2, 1);
    let sys = disc.affine_system();
    let mut buf = Vec::new();
    sys.write_triplets(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let headers: Vec<&str> = text.lines().filter(|l| l.starts_with('#')).collect();
    assert_eq!(headers.len(), 3 + 1 + 2);
    assert!(headers[0].starts_with(&format!("# A0 {n} {n} ", n = sys.ndof())));
    let entries = text.lines().filter(|l| !l.starts_with('#')).count();
    let nnz: usize = sys.a.iter().map(|a| a.nnz()).sum::<usize>() + sys.w.nnz();
    assert!(entries >= nnz);
}
