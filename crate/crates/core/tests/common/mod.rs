#![allow(dead_code)]

use rbmvr_core::hdg::{HdgDiscretization, HdgProblem, Mesh1D};
use rbmvr_core::model::{HeatBenchmark, ParameterDomain, ParameterVector, SampleStream};
use rbmvr_core::rb::{greedy_build, GreedyOptions, RbModel};

pub fn domain() -> ParameterDomain {
    ParameterDomain::uniform(10, 0.1, 1.0).unwrap()
}

pub fn draw(seed: u64, tag: u64, m: usize) -> Vec<ParameterVector> {
    SampleStream::new(seed, tag).draw_samples(&domain(), m)
}

pub fn benchmark_disc() -> HdgDiscretization<f64> {
    HdgDiscretization::new(HdgProblem::heat_benchmark(10).unwrap(), Mesh1D::uniform(10).unwrap(), 2).unwrap()
}

pub fn analytic() -> HeatBenchmark {
    HeatBenchmark::new(10, 1.0).unwrap()
}

/// Compliant RB model of the benchmark with `N_max = 10`.
pub fn benchmark_rb() -> RbModel<f64> {
    let opts = GreedyOptions {
        n_max: 10,
        compliant: true,
        ..Default::default()
    };
    greedy_build(&benchmark_disc(), &draw(1, 100, 1000), &opts).unwrap().model
}

/// Mean and standard error of replicated values.
pub fn mean_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}
