//! Subcommand implementations. Each writes its files into the output
//! directory and also returns the data for programmatic use.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use num_complex::Complex64;
use rbmvr_core::hdg::HdgDiscretization;
use rbmvr_core::mc::{self, mean_var};
use rbmvr_core::model::{derive_seed, HeatBenchmark, Moments, ParameterVector, SampleStream};
use rbmvr_core::mvr::{
    adaptive_run, compare_level_counts, measure_timings, multilevel_variance, sample_level, select_levels,
    Fidelity, FullModel, LevelPlan, LevelRow, LevelSpec, OutputHierarchy, TestSetStats, Timings,
};
use rbmvr_core::par;
use rbmvr_core::rb::{convergence_table, greedy_build, read_model, write_model, ConvergenceRow, GreedyOptions, OutputBound, RbModel};
use rbmvr_core::HdgScalar;

use crate::config::{ExperimentConfig, Truth};
use crate::results::{fmt17, summarize, write_rows, ResultRow};
use crate::CliError;

/// Stream tags of the training and test sets; replication streams use the
/// level index as tag.
pub const TRAINING_TAG: u64 = 1 << 32;
pub const TEST_TAG: u64 = (1 << 32) + 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    McHdg,
    McRb,
    Mvr,
}

impl Method {
    pub fn tag(self) -> &'static str {
        match self {
            Method::McHdg => "MC-HDG",
            Method::McRb => "MC-RB",
            Method::Mvr => "L-MVR",
        }
    }

    fn file_stem(self) -> &'static str {
        match self {
            Method::McHdg => "mc-hdg",
            Method::McRb => "mc-rb",
            Method::Mvr => "mvr",
        }
    }
}

/// Resolved configuration plus command-line overrides.
#[derive(Clone, Debug)]
pub struct Context {
    pub cfg: ExperimentConfig,
    pub out: PathBuf,
    /// Omit wall-clock values so that outputs depend only on config and seeds.
    pub deterministic: bool,
}

impl Context {
    pub fn new(cfg: ExperimentConfig, out: Option<PathBuf>, seed: Option<u64>, deterministic: bool) -> Self {
        let mut cfg = cfg;
        if let Some(s) = seed {
            cfg.mc.seed = s;
        }
        let out = out.unwrap_or_else(|| cfg.output.dir.clone());
        Self { cfg, out, deterministic }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn create(&self, name: &str) -> Result<BufWriter<File>, CliError> {
        fs::create_dir_all(&self.out)?;
        Ok(BufWriter::new(File::create(self.path(name))?))
    }

    fn oracle_moments(&self) -> Result<Option<Moments>, CliError> {
        match self.cfg.benchmark() {
            Some(b) => Ok(Some(b.moments(&self.cfg.domain()?)?)),
            None => Ok(None),
        }
    }
}

/// Truth models usable as the `s_h` channel.
pub enum TruthModel {
    Analytic(HeatBenchmark),
    Real(HdgDiscretization<f64>),
    Complex(HdgDiscretization<Complex64>),
}

impl FullModel for TruthModel {
    fn output(&self, y: &ParameterVector) -> rbmvr_core::Result<f64> {
        match self {
            TruthModel::Analytic(b) => b.output(y),
            TruthModel::Real(d) => d.output(y),
            TruthModel::Complex(d) => d.output(y),
        }
    }
}

pub enum AnyRb {
    Real(RbModel<f64>),
    Complex(RbModel<Complex64>),
}

impl AnyRb {
    pub fn n_max(&self) -> usize {
        match self {
            AnyRb::Real(m) => m.n_max(),
            AnyRb::Complex(m) => m.n_max(),
        }
    }

    pub fn output(&self, n: usize, y: &ParameterVector) -> rbmvr_core::Result<f64> {
        match self {
            AnyRb::Real(m) => m.online_output(n, y),
            AnyRb::Complex(m) => m.online_output(n, y),
        }
    }

    pub fn outputs_all(&self, y: &ParameterVector) -> rbmvr_core::Result<Vec<f64>> {
        match self {
            AnyRb::Real(m) => m.outputs_all(y),
            AnyRb::Complex(m) => m.outputs_all(y),
        }
    }

    pub fn output_bound(&self, n: usize, y: &ParameterVector) -> rbmvr_core::Result<OutputBound> {
        match self {
            AnyRb::Real(m) => m.output_bound(n, y),
            AnyRb::Complex(m) => m.output_bound(n, y),
        }
    }
}

/// Truth model and RB model of one experiment.
pub struct Harness {
    pub truth: TruthModel,
    pub rb: AnyRb,
}

impl OutputHierarchy for Harness {
    fn n_max(&self) -> usize {
        self.rb.n_max()
    }

    fn output(&self, f: Fidelity, y: &ParameterVector) -> rbmvr_core::Result<f64> {
        match f {
            Fidelity::Full => self.truth.output(y),
            Fidelity::Rb(n) => self.rb.output(n, y),
        }
    }

    fn all_outputs(&self, y: &ParameterVector) -> rbmvr_core::Result<(f64, Vec<f64>)> {
        Ok((self.truth.output(y)?, self.rb.outputs_all(y)?))
    }
}

impl Harness {
    /// Builds the truth model and loads the RB model written by `build-rb`.
    pub fn load(ctx: &Context) -> Result<Self, CliError> {
        let path = ctx.path(&ctx.cfg.rb.model_file);
        let file = File::open(&path)
            .map_err(|e| CliError::Config(format!("cannot open RB model {} ({e}); run build-rb first", path.display())))?;
        let r = BufReader::new(file);
        let rb = if ctx.cfg.is_complex() { AnyRb::Complex(read_model(r)?) } else { AnyRb::Real(read_model(r)?) };
        if rb.n_max() < ctx.cfg.rb.n_max.min(ctx.cfg.mc.n_rb.max(1)) {
            log::warn!("RB model has N_max = {}, configuration asks for {}", rb.n_max(), ctx.cfg.rb.n_max);
        }
        Ok(Self { truth: truth_model(&ctx.cfg)?, rb })
    }
}

pub fn truth_model(cfg: &ExperimentConfig) -> Result<TruthModel, CliError> {
    Ok(match (cfg.model.truth, cfg.is_complex()) {
        (Truth::Analytic, _) => TruthModel::Analytic(cfg.benchmark().expect("validated")),
        (Truth::Hdg, false) => TruthModel::Real(HdgDiscretization::new(cfg.problem()?, cfg.mesh()?, cfg.discretization.degree)?),
        (Truth::Hdg, true) => {
            TruthModel::Complex(HdgDiscretization::new(cfg.problem()?, cfg.mesh()?, cfg.discretization.degree)?)
        }
    })
}

pub fn test_points(cfg: &ExperimentConfig) -> Result<Vec<ParameterVector>, CliError> {
    Ok(SampleStream::new(cfg.mvr.test_seed, TEST_TAG).draw_samples(&cfg.domain()?, cfg.mvr.test_set))
}

/// Result of `build-rb`.
pub struct BuildReport {
    pub certified: bool,
    pub n_max: usize,
    pub table: Vec<ConvergenceRow>,
    pub model_path: PathBuf,
}

fn build_typed<T: HdgScalar>(ctx: &Context) -> Result<BuildReport, CliError> {
    let cfg = &ctx.cfg;
    let disc = HdgDiscretization::<T>::new(cfg.problem()?, cfg.mesh()?, cfg.discretization.degree)?;
    let training = SampleStream::new(cfg.rb.seed, TRAINING_TAG).draw_samples(&cfg.domain()?, cfg.rb.training);
    let opts = GreedyOptions {
        n_max: cfg.rb.n_max,
        compliant: cfg.rb.compliant,
        ..Default::default()
    };
    let res = greedy_build(&disc, &training, &opts)?;
    // cached test-set outputs belong to the previous model
    match std::fs::remove_file(ctx.path("test_set.csv")) {
        Err(e) if e.kind() != std::io::ErrorKind::NotFound => return Err(e.into()),
        _ => {}
    }
    let model_path = ctx.path(&cfg.rb.model_file);
    let mut w = ctx.create(&cfg.rb.model_file)?;
    write_model(&res.model, &mut w)?;
    w.flush()?;

    let test = test_points(cfg)?;
    let full = par::try_map_range(test.len(), |i| disc.output(&test[i]))?;
    let table = convergence_table(&res.model, &test, &full)?;
    let mut w = ctx.create("greedy.csv")?;
    writeln!(w, "# rbmvr-greedy v1")?;
    writeln!(w, "n,max_error,avg_error,max_bound,avg_bound")?;
    let opt = |x: Option<f64>| x.map(fmt17).unwrap_or_default();
    for r in &table {
        writeln!(w, "{},{},{},{},{}", r.n, fmt17(r.max_error), fmt17(r.avg_error), opt(r.max_bound), opt(r.avg_bound))?;
    }
    w.flush()?;
    Ok(BuildReport {
        certified: res.certified,
        n_max: res.model.n_max(),
        table,
        model_path,
    })
}

/// Offline stage: greedy RB construction, model file and convergence table.
pub fn build_rb(ctx: &Context) -> Result<BuildReport, CliError> {
    if ctx.cfg.is_complex() {
        build_typed::<Complex64>(ctx)
    } else {
        build_typed::<f64>(ctx)
    }
}

fn counts(m: &[usize]) -> String {
    m.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(";")
}

fn err(est: f64, truth: Option<f64>) -> Option<f64> {
    truth.map(|t| (est - t).abs())
}

fn mc_hdg_rep(ctx: &Context, h: &dyn FullModel, m: usize, rep: u64, truth: Option<Moments>) -> Result<ResultRow, CliError> {
    let a = ctx.cfg.mc.a;
    let start = Instant::now();
    let ys = SampleStream::new(derive_seed(ctx.cfg.mc.seed, rep), 0).draw_samples(&ctx.cfg.domain()?, m);
    let s = par::try_map_range(m, |i| h.output(&ys[i]))?;
    let e = mc::mc_expectation(&s, a)?;
    let v = mc::mc_variance(&s, a)?;
    Ok(ResultRow {
        experiment: ctx.cfg.id.clone(),
        method: Method::McHdg.tag().into(),
        levels: String::new(),
        m,
        rep: rep.to_string(),
        m_counts: counts(&[m]),
        a,
        estimate_e: e.value,
        error_e: err(e.value, truth.map(|t| t.mean)),
        bound_e_factor: e.half_width / a,
        bound_e_rb: 0.0,
        bound_e: e.half_width,
        estimate_v: v.value,
        error_v: err(v.value, truth.map(|t| t.variance)),
        bound_v_factor: v.half_width / a,
        bound_v_rb: 0.0,
        bound_v: v.half_width,
        bias_v: 0.0,
        full_solves: m as f64,
        rb_solves: 0.0,
        time_s: if ctx.deterministic { 0.0 } else { start.elapsed().as_secs_f64() },
        speedup: None,
    })
}

fn mc_rb_rep(ctx: &Context, rb: &AnyRb, m: usize, rep: u64, truth: Option<Moments>) -> Result<ResultRow, CliError> {
    let (a, n) = (ctx.cfg.mc.a, ctx.cfg.mc.n_rb);
    let start = Instant::now();
    let ys = SampleStream::new(derive_seed(ctx.cfg.mc.seed, rep), 0).draw_samples(&ctx.cfg.domain()?, m);
    let b = par::try_map_range(m, |i| rb.output_bound(n, &ys[i]))?;
    let sn: Vec<f64> = b.iter().map(|b| b.s_n).collect();
    let ds: Vec<f64> = b.iter().map(|b| b.delta_s).collect();
    let (e, var) = mean_var(&sn)?;
    let de = mc::mc_rb_expectation_bound(&ds)?;
    let dv = mc::mc_rb_variance_bound(&sn, &ds, de)?;
    let factor_e = ((var + dv) / m as f64).sqrt();
    let v = mc::mc_variance(&sn, a)?;
    Ok(ResultRow {
        experiment: ctx.cfg.id.clone(),
        method: Method::McRb.tag().into(),
        levels: n.to_string(),
        m,
        rep: rep.to_string(),
        m_counts: counts(&[m]),
        a,
        estimate_e: e,
        error_e: err(e, truth.map(|t| t.mean)),
        bound_e_factor: factor_e,
        bound_e_rb: de,
        bound_e: mc::mc_rb_total_bound(var, dv, m, a, de),
        estimate_v: var,
        error_v: err(var, truth.map(|t| t.variance)),
        bound_v_factor: v.half_width / a,
        bound_v_rb: dv,
        bound_v: v.half_width + dv,
        bias_v: 0.0,
        full_solves: 0.0,
        rb_solves: m as f64,
        time_s: if ctx.deterministic { 0.0 } else { start.elapsed().as_secs_f64() },
        speedup: None,
    })
}

fn rb_evaluations(spec: &LevelSpec, m: &[usize]) -> f64 {
    (0..m.len())
        .map(|l| {
            let (f, c) = spec.channel(l);
            let k = usize::from(matches!(f, Fidelity::Rb(_))) + usize::from(c.is_some());
            (k * m[l]) as f64
        })
        .sum()
}

fn mvr_row(
    ctx: &Context,
    spec: &LevelSpec,
    m: usize,
    rep: u64,
    est: &rbmvr_core::mvr::MVREstimate,
    truth: Option<Moments>,
    time: f64,
    speedup: Option<f64>,
) -> ResultRow {
    let a = est.a;
    let mc = est.sample_counts();
    let var = est.variance.unwrap();
    let dv = est.delta_v.unwrap();
    ResultRow {
        experiment: ctx.cfg.id.clone(),
        method: Method::Mvr.tag().into(),
        levels: counts(spec.dims()),
        m,
        rep: rep.to_string(),
        m_counts: counts(&mc),
        a,
        estimate_e: est.expectation,
        error_e: err(est.expectation, truth.map(|t| t.mean)),
        bound_e_factor: est.delta_e / a,
        bound_e_rb: 0.0,
        bound_e: est.delta_e,
        estimate_v: var,
        error_v: err(var, truth.map(|t| t.variance)),
        bound_v_factor: dv / a,
        bound_v_rb: 0.0,
        bound_v: dv,
        bias_v: est.variance_bias,
        full_solves: mc[0] as f64,
        rb_solves: rb_evaluations(spec, &mc),
        time_s: if ctx.deterministic { 0.0 } else { time },
        speedup,
    }
}

/// Fixed-schedule sample sizes `M_ℓ = max(2, ⌈ratio^(L−ℓ) M⌉)`.
pub fn schedule_counts(spec: &LevelSpec, m: usize, ratio: f64) -> Vec<usize> {
    let l = spec.num_levels();
    (0..=l)
        .map(|k| ((ratio.powi((l - k) as i32) * m as f64).ceil() as usize).max(2))
        .collect()
}

fn mvr_fixed_rep(
    ctx: &Context,
    h: &Harness,
    spec: &LevelSpec,
    m: usize,
    rep: u64,
    truth: Option<Moments>,
) -> Result<ResultRow, CliError> {
    let start = Instant::now();
    let domain = ctx.cfg.domain()?;
    let seed = derive_seed(ctx.cfg.mc.seed, rep);
    let levels = schedule_counts(spec, m, ctx.cfg.mvr.ratio)
        .iter()
        .enumerate()
        .map(|(l, &ml)| {
            let ys = SampleStream::new(seed, l as u64).draw_samples(&domain, ml);
            sample_level(h, spec, l, &ys, l as u64)
        })
        .collect::<rbmvr_core::Result<Vec<_>>>()?;
    let est = multilevel_variance(&levels, ctx.cfg.mc.a, false)?;
    Ok(mvr_row(ctx, spec, m, rep, &est, truth, start.elapsed().as_secs_f64(), None))
}

fn timings_for(ctx: &Context, h: &Harness, stats: &TestSetStats) -> Result<Timings, CliError> {
    if let Some(t) = ctx.cfg.timings() {
        return Ok(t);
    }
    if ctx.deterministic {
        return Err(CliError::Config("deterministic mode needs a [timings] block".into()));
    }
    let probe = &stats.ys[..stats.len().min(20)];
    Ok(measure_timings(h, probe)?)
}

/// The configured level spec, or the cost-optimal one for `mvr.l` levels.
pub fn resolve_plan(ctx: &Context, h: &Harness, stats: &TestSetStats) -> Result<LevelPlan, CliError> {
    let timings = timings_for(ctx, h, stats)?;
    if ctx.cfg.mvr.levels.is_empty() {
        Ok(select_levels(ctx.cfg.mvr.l, stats, &timings)?)
    } else {
        Ok(LevelPlan::new(LevelSpec::new(ctx.cfg.mvr.levels.clone())?, stats, &timings)?)
    }
}

/// Online stage: `H` replications of one method, written to `run-<method>.csv`.
pub fn run(ctx: &Context, method: Method) -> Result<Vec<ResultRow>, CliError> {
    if method == Method::Mvr {
        ctx.cfg.check_level_counts()?;
    }
    let truth = ctx.oracle_moments()?;
    let h = match method {
        Method::McHdg => None,
        _ => Some(Harness::load(ctx)?),
    };
    let reps = ctx.cfg.mc.replications as u64;
    let mut rows = Vec::new();
    let mut push = |batch: Vec<ResultRow>| {
        let s = summarize(&batch);
        rows.extend(batch);
        rows.push(s);
    };
    match method {
        Method::McHdg => {
            let full = truth_model(&ctx.cfg)?;
            for &m in &ctx.cfg.mc.m_schedule {
                push((0..reps).map(|r| mc_hdg_rep(ctx, &full, m, r, truth)).collect::<Result<_, _>>()?);
            }
        }
        Method::McRb => {
            let h = h.as_ref().unwrap();
            if ctx.cfg.mc.n_rb > h.rb.n_max() {
                return Err(CliError::Config(format!("mc.n_rb exceeds the model's N_max = {}", h.rb.n_max())));
            }
            for &m in &ctx.cfg.mc.m_schedule {
                push((0..reps).map(|r| mc_rb_rep(ctx, &h.rb, m, r, truth)).collect::<Result<_, _>>()?);
            }
        }
        Method::Mvr if ctx.cfg.mvr.adaptive => {
            let h = h.as_ref().unwrap();
            let stats = test_set(ctx, h)?;
            let plan = resolve_plan(ctx, h, &stats)?;
            let domain = ctx.cfg.domain()?;
            let reuse = ctx.cfg.mvr.reuse_test_set.then_some(&stats);
            let batch = (0..reps)
                .map(|r| {
                    let opts = ctx.cfg.adaptive_options(derive_seed(ctx.cfg.mc.seed, r));
                    let res = adaptive_run(h, &plan, &domain, &opts, reuse)?;
                    Ok(mvr_row(ctx, &plan.spec, 0, r, &res.estimate, truth, res.elapsed, Some(res.speedup)))
                })
                .collect::<Result<_, CliError>>()?;
            push(batch);
        }
        Method::Mvr => {
            let h = h.as_ref().unwrap();
            let spec = if ctx.cfg.mvr.levels.is_empty() {
                resolve_plan(ctx, h, &test_set(ctx, h)?)?.spec
            } else {
                LevelSpec::new(ctx.cfg.mvr.levels.clone())?
            };
            spec.check_against(h.rb.n_max())?;
            for &m in &ctx.cfg.mc.m_schedule {
                push((0..reps).map(|r| mvr_fixed_rep(ctx, h, &spec, m, r, truth)).collect::<Result<_, _>>()?);
            }
        }
    }
    write_rows(ctx.create(&format!("run-{}.csv", method.file_stem()))?, &rows)?;
    Ok(rows)
}

const TEST_SET_SCHEMA: &str = "# rbmvr-test-set v1";

fn cache_key(cfg: &ExperimentConfig, n_max: usize) -> String {
    format!(
        "{TEST_SET_SCHEMA} seed={} size={} n_max={} {:?} {:?}",
        cfg.mvr.test_seed, cfg.mvr.test_set, n_max, cfg.model, cfg.discretization
    )
}

/// Test-set outputs of every model, cached in `test_set.csv`. The cache is
/// reused when the sampling and discretization settings match; `build-rb`
/// deletes it.
pub fn test_set(ctx: &Context, h: &Harness) -> Result<TestSetStats, CliError> {
    let key = cache_key(&ctx.cfg, h.rb.n_max());
    let path = ctx.path("test_set.csv");
    if let Ok(f) = File::open(&path) {
        let mut lines = BufReader::new(f).lines();
        if lines.next().transpose()?.as_deref() == Some(key.as_str()) {
            lines.next();
            let (mut ys, mut full, mut rb) = (Vec::new(), Vec::new(), vec![Vec::new(); h.rb.n_max() + 1]);
            for line in lines {
                let line = line?;
                let v: Vec<f64> = line
                    .split(',')
                    .map(|x| x.parse::<f64>())
                    .collect::<Result<_, _>>()
                    .map_err(|e| CliError::Config(format!("corrupt test-set cache: {e}")))?;
                let q = ctx.cfg.model.q;
                if v.len() != q + h.rb.n_max() + 2 {
                    return Err(CliError::Config("corrupt test-set cache: wrong column count".into()));
                }
                ys.push(ParameterVector::new(v[..q].to_vec()));
                full.push(v[q]);
                for (n, col) in rb.iter_mut().enumerate() {
                    col.push(v[q + 1 + n]);
                }
            }
            return Ok(TestSetStats::from_outputs(ys, full, rb)?);
        }
    }
    let stats = TestSetStats::compute(h, test_points(&ctx.cfg)?)?;
    let mut w = ctx.create("test_set.csv")?;
    writeln!(w, "{key}")?;
    let head: Vec<String> = (1..=ctx.cfg.model.q)
        .map(|q| format!("y{q}"))
        .chain(["s_h".to_string()])
        .chain((0..=h.rb.n_max()).map(|n| format!("s_{n}")))
        .collect();
    writeln!(w, "{}", head.join(","))?;
    for m in 0..stats.len() {
        let row: Vec<String> = stats.ys[m]
            .iter()
            .copied()
            .chain([stats.full[m]])
            .chain(stats.rb.iter().map(|c| c[m]))
            .map(fmt17)
            .collect();
        writeln!(w, "{}", row.join(","))?;
    }
    w.flush()?;
    Ok(stats)
}

/// Level-count comparison: the best plan for each `L` in `mvr.l_range`.
pub fn select(ctx: &Context) -> Result<Vec<LevelRow>, CliError> {
    ctx.cfg.check_level_counts()?;
    let h = Harness::load(ctx)?;
    let stats = test_set(ctx, &h)?;
    let timings = timings_for(ctx, &h, &stats)?;
    let rows = compare_level_counts(&ctx.cfg.mvr.l_range, &stats, &timings)?;
    let mut w = ctx.create("select.csv")?;
    writeln!(w, "# rbmvr-select v1")?;
    writeln!(w, "l,levels,weights,cost,normalized_cost,predicted_speedup")?;
    for r in &rows {
        let weights: Vec<String> = r.plan.weights.as_slice().iter().map(|x| fmt17(*x)).collect();
        writeln!(
            w,
            "{},{},{},{},{},{}",
            r.plan.spec.num_levels(),
            counts(r.plan.spec.dims()),
            weights.join(";"),
            fmt17(r.plan.predicted_cost),
            fmt17(r.normalized),
            fmt17(r.plan.predicted_speedup)
        )?;
    }
    w.flush()?;
    let mut w = ctx.create("timings.csv")?;
    writeln!(w, "# rbmvr-timings v1")?;
    writeln!(w, "model,seconds")?;
    writeln!(w, "full,{}", fmt17(timings.t_h))?;
    for (n, t) in timings.t_rb.iter().enumerate() {
        writeln!(w, "rb{n},{}", fmt17(*t))?;
    }
    w.flush()?;
    Ok(rows)
}

/// Closed-form reference values of the heat benchmark.
pub struct OracleReport {
    pub moments: Moments,
    pub probes: Vec<(String, ParameterVector, f64)>,
}

pub fn oracle(ctx: &Context) -> Result<OracleReport, CliError> {
    let b = ctx
        .cfg
        .benchmark()
        .ok_or_else(|| CliError::Config("the analytic oracle exists only for the heat problem".into()))?;
    let domain = ctx.cfg.domain()?;
    let q = ctx.cfg.model.q;
    let [lo, hi] = ctx.cfg.model.bounds;
    let mut probes = vec![
        ("ones".to_string(), ParameterVector::constant(q, 1.0)),
        ("lower".to_string(), ParameterVector::constant(q, lo)),
        ("upper".to_string(), ParameterVector::constant(q, hi)),
        ("mean".to_string(), domain.mean()),
    ];
    let random = SampleStream::new(ctx.cfg.mc.seed, TEST_TAG).draw_samples(&domain, 5);
    probes.extend(random.into_iter().enumerate().map(|(i, y)| (format!("random{i}"), y)));
    let probes = probes
        .into_iter()
        .map(|(name, y)| {
            let s = b.output(&y)?;
            Ok((name, y, s))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let moments = b.moments(&domain)?;
    let mut w = ctx.create("oracle.csv")?;
    writeln!(w, "# rbmvr-oracle v1")?;
    writeln!(w, "name,value,y")?;
    writeln!(w, "mean,{},", fmt17(moments.mean))?;
    writeln!(w, "variance,{},", fmt17(moments.variance))?;
    for (name, y, s) in &probes {
        let ys: Vec<String> = y.iter().map(|v| fmt17(*v)).collect();
        writeln!(w, "{name},{},{}", fmt17(*s), ys.join(";"))?;
    }
    w.flush()?;
    Ok(OracleReport { moments, probes })
}

/// Paths written by a subcommand, for messages.
pub fn describe(out: &Path, names: &[&str]) -> String {
    names.iter().map(|n| out.join(n).display().to_string()).collect::<Vec<_>>().join(", ")
}
