//! Versioned CSV output. Every file starts with a `# <schema> v<N>` comment
//! line; floats carry 17 significant digits so values round-trip exactly.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize, Serializer};

use crate::CliError;

pub const RESULTS_SCHEMA: &str = "# rbmvr-results v1";

pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

fn ser_f64<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&fmt17(*x))
}

fn ser_opt<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(v) => s.serialize_str(&fmt17(*v)),
        None => s.serialize_str(""),
    }
}

/// One replication (or the average over replications, `rep = "mean"`).
///
/// Bounds are reported as `bound = a · factor + rb`: `factor` is the
/// confidence-free sampling part and `rb` the certified RB part (MC-RB only).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub experiment: String,
    /// `MC-HDG`, `MC-RB` or `L-MVR`.
    pub method: String,
    /// RB dimensions, `;`-separated.
    pub levels: String,
    /// Nominal sample size of the schedule (0 for adaptive runs).
    pub m: usize,
    pub rep: String,
    /// Realized sample counts per level, `;`-separated.
    pub m_counts: String,
    #[serde(serialize_with = "ser_f64")]
    pub a: f64,
    #[serde(serialize_with = "ser_f64")]
    pub estimate_e: f64,
    #[serde(serialize_with = "ser_opt")]
    pub error_e: Option<f64>,
    #[serde(serialize_with = "ser_f64")]
    pub bound_e_factor: f64,
    #[serde(serialize_with = "ser_f64")]
    pub bound_e_rb: f64,
    #[serde(serialize_with = "ser_f64")]
    pub bound_e: f64,
    #[serde(serialize_with = "ser_f64")]
    pub estimate_v: f64,
    #[serde(serialize_with = "ser_opt")]
    pub error_v: Option<f64>,
    #[serde(serialize_with = "ser_f64")]
    pub bound_v_factor: f64,
    #[serde(serialize_with = "ser_f64")]
    pub bound_v_rb: f64,
    #[serde(serialize_with = "ser_f64")]
    pub bound_v: f64,
    /// Predicted bias of the variance estimate.
    #[serde(serialize_with = "ser_f64")]
    pub bias_v: f64,
    #[serde(serialize_with = "ser_f64")]
    pub full_solves: f64,
    #[serde(serialize_with = "ser_f64")]
    pub rb_solves: f64,
    #[serde(serialize_with = "ser_f64")]
    pub time_s: f64,
    #[serde(serialize_with = "ser_opt")]
    pub speedup: Option<f64>,
}

impl ResultRow {
    pub fn is_summary(&self) -> bool {
        self.rep == "mean"
    }

    pub fn counts(&self) -> Vec<f64> {
        self.m_counts.split(';').filter_map(|c| c.parse().ok()).collect()
    }
}

fn mean(v: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = v.collect();
    rbmvr_core::mc::sum(&v) / v.len() as f64
}

fn mean_opt(rows: &[ResultRow], f: impl Fn(&ResultRow) -> Option<f64>) -> Option<f64> {
    let v: Option<Vec<f64>> = rows.iter().map(f).collect();
    v.map(|v| mean(v.into_iter()))
}

/// Arithmetic mean of the replication rows.
pub fn summarize(rows: &[ResultRow]) -> ResultRow {
    assert!(!rows.is_empty());
    let first = &rows[0];
    let ncounts = first.counts().len();
    let counts: Vec<String> = (0..ncounts)
        .map(|i| fmt17(mean(rows.iter().map(|r| r.counts()[i]))))
        .collect();
    let m = |f: fn(&ResultRow) -> f64| mean(rows.iter().map(f));
    ResultRow {
        experiment: first.experiment.clone(),
        method: first.method.clone(),
        levels: first.levels.clone(),
        m: first.m,
        rep: "mean".into(),
        m_counts: counts.join(";"),
        a: first.a,
        estimate_e: m(|r| r.estimate_e),
        error_e: mean_opt(rows, |r| r.error_e),
        bound_e_factor: m(|r| r.bound_e_factor),
        bound_e_rb: m(|r| r.bound_e_rb),
        bound_e: m(|r| r.bound_e),
        estimate_v: m(|r| r.estimate_v),
        error_v: mean_opt(rows, |r| r.error_v),
        bound_v_factor: m(|r| r.bound_v_factor),
        bound_v_rb: m(|r| r.bound_v_rb),
        bound_v: m(|r| r.bound_v),
        bias_v: m(|r| r.bias_v),
        full_solves: m(|r| r.full_solves),
        rb_solves: m(|r| r.rb_solves),
        time_s: m(|r| r.time_s),
        speedup: mean_opt(rows, |r| r.speedup),
    }
}

pub fn write_rows<W: Write>(mut w: W, rows: &[ResultRow]) -> Result<(), CliError> {
    writeln!(w, "{RESULTS_SCHEMA}")?;
    let mut csv = csv::Writer::from_writer(w);
    for r in rows {
        csv.serialize(r).map_err(|e| CliError::Io(e.to_string()))?;
    }
    csv.flush()?;
    Ok(())
}

pub fn read_rows<R: Read>(r: R) -> Result<Vec<ResultRow>, CliError> {
    let mut text = String::new();
    let mut r = r;
    r.read_to_string(&mut text)?;
    let (head, body) = text.split_once('\n').unwrap_or((&text, ""));
    if head.trim_end() != RESULTS_SCHEMA {
        return Err(CliError::Config(format!("unsupported results schema line {head:?}")));
    }
    csv::Reader::from_reader(body.as_bytes())
        .deserialize()
        .map(|r| r.map_err(|e| CliError::Config(format!("malformed results file: {e}"))))
        .collect()
}
