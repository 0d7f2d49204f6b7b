use nalgebra::DVector;
use num_complex::Complex64;
use rbmvr_core::hdg::{AffineSystem, HdgDiscretization, HdgProblem, Mesh1D};
use rbmvr_core::model::{ParameterDomain, ParameterVector, SampleStream, SpatialFunction};
use rbmvr_core::rb::{
    coercivity_constant, convergence_table, greedy_build, read_model, write_model, GreedyOptions, GreedyResult,
    Residual,
};
use rbmvr_core::Error;

fn benchmark_disc(p: usize) -> HdgDiscretization<f64> {
    HdgDiscretization::new(HdgProblem::heat_benchmark(10).unwrap(), Mesh1D::uniform(10).unwrap(), p).unwrap()
}

fn draw(seed: u64, tag: u64, m: usize) -> Vec<ParameterVector> {
    let domain = ParameterDomain::uniform(10, 0.1, 1.0).unwrap();
    SampleStream::new(seed, tag).draw_samples(&domain, m)
}

fn build(disc: &HdgDiscretization<f64>, compliant: bool, n_max: usize) -> GreedyResult<f64> {
    let training = draw(1, 100, 1000);
    let opts = GreedyOptions {
        n_max,
        compliant,
        ..Default::default()
    };
    greedy_build(disc, &training, &opts).unwrap()
}

/// `sqrt(rᴴ W⁻¹ r)` by a direct dense solve.
fn direct_dual_norm(sys: &AffineSystem<f64>, r: &DVector<f64>) -> f64 {
    let w = sys.w_dense();
    let e = w.cholesky().unwrap().solve(r);
    r.dot(&e).sqrt()
}

#[test]
fn benchmark_cliff_and_orthonormality() {
    let disc = benchmark_disc(2);
    let res = build(&disc, true, 10);
    assert!(res.certified);
    assert_eq!(res.model.n_max(), 10);
    let z = &res.space.primal;
    let w = disc.affine_system().w_dense();
    let gram = z.transpose() * &w * z;
    assert!((gram - nalgebra::DMatrix::identity(10, 10)).amax() < 1e-10);

    let training = draw(1, 100, 1000);
    let max10 = training
        .iter()
        .map(|y| res.model.output_bound(10, y).unwrap().delta_s)
        .fold(0.0, f64::max);
    assert!(max10 < 1e-8, "max Δ^s at N = 10: {max10:e}");

    // the same greedy run twice selects the same parameters
    let again = build(&disc, true, 10);
    assert_eq!(res.history, again.history);
    assert_eq!(res.model, again.model);
}

#[test]
fn benchmark_errors_and_bounds_on_test_set() {
    let disc = benchmark_disc(2);
    let res = build(&disc, true, 10);
    let test = draw(2, 200, 1000);
    let full: Vec<f64> = test.iter().map(|y| disc.output(y).unwrap()).collect();
    let table = convergence_table(&res.model, &test, &full).unwrap();
    let r9 = &table[9];
    let r10 = &table[10];
    assert!(r9.avg_error > 1e-3 && r9.avg_error < 9e-3, "average error at N = 9: {:e}", r9.avg_error);
    assert!(r10.max_error * 1e4 <= r9.max_error);
    assert!(r10.max_bound.unwrap() * 1e4 <= r9.max_bound.unwrap());
    // bounds are above errors for every N, and the N = 9 bound is pessimistic
    for row in &table {
        assert!(row.max_bound.unwrap() >= row.max_error);
    }
    let ratio = r9.avg_bound.unwrap() / r9.avg_error;
    assert!(ratio > 3.0 && ratio < 1e3, "effectivity {ratio}");
    // every N = 10 output matches the full solver
    for (y, s) in test.iter().zip(&full).take(100) {
        assert!((res.model.online_output(10, y).unwrap() - s).abs() < 1e-8);
    }
}

#[test]
fn bounds_are_rigorous_on_random_pairs() {
    let disc = benchmark_disc(2);
    for compliant in [true, false] {
        let res = build(&disc, compliant, 10);
        let test = draw(3, 300, 1000);
        let mut rng = SampleStream::new(3, 301);
        let ns = rng.draw_uniform(1000);
        let mut violations = 0;
        for (y, u) in test.iter().zip(ns) {
            let n = ((u * 11.0) as usize).min(10);
            let b = res.model.output_bound(n, y).unwrap();
            let s = disc.output(y).unwrap();
            if (s - b.s_n).abs() > b.delta_s {
                violations += 1;
            }
            assert!(b.delta_pr >= 0.0 && b.delta_du >= 0.0);
            assert!((b.delta_s - b.beta * b.delta_pr * b.delta_du - b.rounding).abs() <= 1e-14 * b.delta_s);
        }
        assert_eq!(violations, 0, "compliant = {compliant}");
    }
}

#[test]
fn full_basis_reproduces_the_solution() {
    let disc = benchmark_disc(2);
    let res = build(&disc, true, 10);
    let sys = disc.affine_system();
    let w = sys.w_dense();
    for y in draw(4, 0, 10) {
        let c = res.model.online_solve(10, &y).unwrap();
        let lifted = &res.space.primal * &c;
        let full = disc.solve(&y).unwrap().coeffs;
        let e = &lifted - &full;
        assert!(e.dot(&(&w * &e)).sqrt() < 1e-9);
        // zero residual means the dual correction vanishes
        let sol = res.model.online_eval(10, &y).unwrap();
        assert!(sol.dual.is_empty());
        assert!(res.model.residual_dual_norm(10, &y, Residual::Primal).unwrap() < 1e-10);
    }
}

#[test]
fn residual_norms_match_direct_riesz_solves() {
    let disc = benchmark_disc(2);
    let res = build(&disc, false, 10);
    let sys = disc.affine_system();
    let zp = &res.space.primal.columns(0, 5).into_owned();
    let zd = &res.space.dual.columns(0, 5).into_owned();
    for y in draw(5, 0, 10) {
        let theta = AffineSystem::<f64>::theta(y.as_slice());
        let sol = res.model.online_eval(5, &y).unwrap();
        let u = zp * &sol.primal;
        let r = &sys.b - sys.apply(&theta, &u);
        let direct = direct_dual_norm(&sys, &r);
        let offline = res.model.residual_dual_norm(5, &y, Residual::Primal).unwrap();
        assert!((direct - offline).abs() <= 1e-8 * direct, "{direct} vs {offline}");
        // Galerkin orthogonality of the lifted residual
        assert!((zp.transpose() * &r).amax() < 1e-10 * sys.b.norm());

        let phi = zd * &sol.dual;
        let a = sys.dense_at(&theta);
        let rd = -&sys.l - a.transpose() * &phi;
        let direct = direct_dual_norm(&sys, &rd);
        let offline = res.model.residual_dual_norm(5, &y, Residual::Dual).unwrap();
        assert!((direct - offline).abs() <= 1e-8 * direct, "{direct} vs {offline}");
    }
}

#[test]
fn primal_residual_scales_with_the_load() {
    let disc = benchmark_disc(2);
    let mut problem = HdgProblem::heat_benchmark(10).unwrap();
    problem.source = SpatialFunction::Constant(2.0);
    let disc2: HdgDiscretization<f64> = HdgDiscretization::new(problem, Mesh1D::uniform(10).unwrap(), 2).unwrap();
    let a = build(&disc, false, 5);
    let b = build(&disc2, false, 5);
    for y in draw(6, 0, 5) {
        let r1 = a.model.residual_dual_norm(3, &y, Residual::Primal).unwrap();
        let r2 = b.model.residual_dual_norm(3, &y, Residual::Primal).unwrap();
        assert!((r2 / r1 - 2.0).abs() < 1e-8);
        let d1 = a.model.residual_dual_norm(3, &y, Residual::Dual).unwrap();
        let d2 = b.model.residual_dual_norm(3, &y, Residual::Dual).unwrap();
        assert!((d2 / d1 - 1.0).abs() < 1e-8);
    }
}

#[test]
fn min_theta_bound() {
    let disc = benchmark_disc(2);
    let res = build(&disc, true, 3);
    let sys = disc.affine_system();
    let ones = ParameterVector::constant(10, 1.0);
    let beta_ref = coercivity_constant(&sys, &ones).unwrap();
    let m = &res.model;
    assert!((m.stability_lower_bound(&ones).unwrap() - beta_ref).abs() < 1e-12 * beta_ref);
    let low = ParameterVector::constant(10, 0.1);
    assert!((m.stability_lower_bound(&low).unwrap() - 0.1 * beta_ref).abs() < 1e-12 * beta_ref);
    for y in draw(7, 0, 20) {
        let lb = m.stability_lower_bound(&y).unwrap();
        assert!(lb > 0.0);
        assert!(lb <= coercivity_constant(&sys, &y).unwrap() * (1.0 + 1e-10));
    }
}

#[test]
fn single_parameter_manifold_is_one_dimensional() {
    let disc: HdgDiscretization<f64> =
        HdgDiscretization::new(HdgProblem::heat_benchmark(1).unwrap(), Mesh1D::uniform(6).unwrap(), 2).unwrap();
    let domain = ParameterDomain::uniform(1, 0.1, 1.0).unwrap();
    let training = SampleStream::new(8, 0).draw_samples(&domain, 20);
    let res = greedy_build(
        &disc,
        &training,
        &GreedyOptions {
            n_max: 1,
            compliant: true,
            ..Default::default()
        },
    )
    .unwrap();
    let w = disc.affine_system().w_dense();
    for y in SampleStream::new(8, 1).draw_samples(&domain, 20).iter().chain(&training) {
        let b = res.model.output_bound(1, y).unwrap();
        assert!(b.delta_pr < 1e-10);
        let full = disc.solve(y).unwrap().coeffs;
        let z = res.space.primal.column(0);
        let proj = z * z.dot(&(&w * &full));
        let e = &full - proj;
        assert!(e.dot(&(&w * &e)).sqrt() < 1e-10 * full.norm());
        assert!((res.model.online_output(1, y).unwrap() - disc.output(y).unwrap()).abs() < 1e-12);
    }
}

#[test]
fn compliant_flag_is_validated() {
    let mut problem = HdgProblem::heat_benchmark(10).unwrap();
    problem.source = SpatialFunction::Constant(2.0);
    let disc: HdgDiscretization<f64> = HdgDiscretization::new(problem, Mesh1D::uniform(10).unwrap(), 2).unwrap();
    let training = draw(1, 0, 20);
    let opts = GreedyOptions {
        n_max: 3,
        compliant: true,
        ..Default::default()
    };
    assert!(matches!(greedy_build(&disc, &training, &opts), Err(Error::Config(_))));
    let opts = GreedyOptions { n_max: 30, ..Default::default() };
    assert!(greedy_build(&disc, &training, &opts).is_err());
}

#[test]
fn model_file_round_trip() {
    let disc = benchmark_disc(2);
    for compliant in [true, false] {
        let res = build(&disc, compliant, 6);
        let mut buf = Vec::new();
        write_model(&res.model, &mut buf).unwrap();
        let back = read_model::<f64, _>(buf.as_slice()).unwrap();
        assert_eq!(back, res.model);
        let mut again = Vec::new();
        write_model(&back, &mut again).unwrap();
        assert_eq!(buf, again);
    }
    assert!(read_model::<f64, _>("garbage\n".as_bytes()).is_err());
}

#[test]
fn helmholtz_model_uses_true_error_indicator() {
    let problem = HdgProblem::helmholtz(6.0, 3, 0.2).unwrap();
    let domain = problem.domain.clone();
    let disc: HdgDiscretization<Complex64> = HdgDiscretization::new(problem, Mesh1D::uniform(12).unwrap(), 2).unwrap();
    let training = SampleStream::new(9, 0).draw_samples(&domain, 200);
    let res = greedy_build(&disc, &training, &GreedyOptions { n_max: 8, ..Default::default() }).unwrap();
    assert!(!res.certified);
    let y = &training[0];
    assert!(matches!(res.model.output_bound(3, y), Err(Error::StabilityUnavailable(_))));
    let test = SampleStream::new(9, 1).draw_samples(&domain, 50);
    let full: Vec<f64> = test.iter().map(|y| disc.output(y).unwrap()).collect();
    let table = convergence_table(&res.model, &test, &full).unwrap();
    assert!(table[8].max_error < 1e-3 * table[1].max_error.max(1e-300) || table[8].max_error < 1e-10);
    assert!(table[8].max_bound.is_none());
    // complex models also survive a file round trip
    let mut buf = Vec::new();
    write_model(&res.model, &mut buf).unwrap();
    assert_eq!(read_model::<Complex64, _>(buf.as_slice()).unwrap(), res.model);
    assert!(read_model::<f64, _>(buf.as_slice()).is_err());
}
