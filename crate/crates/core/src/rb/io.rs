//! Plain-text serialization of [`RbModel`].
//!
//! ```text
//! rbmvr-rb-model 1
//! scalar real|complex
//! terms <Q+1>
//! compliant 0|1
//! stability none | stability <β_ref>
//! y_ref <y_1> … <y_Q>            (only with a stability line other than none)
//! active <0|1> …                 (idem)
//! snapshots <count>
//! <y_1> … <y_Q>                  (one line per snapshot)
//! block <name> <rows> <cols>
//! <row-major entries, one matrix row per line>
//! ```
//!
//! Complex entries are written as `re im` pairs. Every number carries 17
//! significant digits, so a write/read cycle is exact.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::model::{RbModel, StabilityData};
use crate::error::{Error, Result};
use crate::model::ParameterVector;
use crate::scalar::HdgScalar;

const MAGIC: &str = "rbmvr-rb-model 1";

fn num(out: &mut String, v: f64) {
    let _ = write!(out, "{v:.16e}");
}

fn write_block<T: HdgScalar>(out: &mut String, name: &str, m: &DMatrix<T>) {
    let _ = writeln!(out, "block {name} {} {}", m.nrows(), m.ncols());
    for i in 0..m.nrows() {
        let mut first = true;
        for j in 0..m.ncols() {
            let c = m[(i, j)].to_complex();
            if !first {
                out.push(' ');
            }
            first = false;
            num(out, c.re);
            if T::IS_COMPLEX {
                out.push(' ');
                num(out, c.im);
            }
        }
        out.push('\n');
    }
}

fn col<T: HdgScalar>(v: &DVector<T>) -> DMatrix<T> {
    DMatrix::from_column_slice(v.len(), 1, v.as_slice())
}

/// Writes the model in the text format described in the module docs.
pub fn write_model<T: HdgScalar, W: Write>(model: &RbModel<T>, mut w: W) -> Result<()> {
    let mut s = String::new();
    let _ = writeln!(s, "{MAGIC}");
    let _ = writeln!(s, "scalar {}", if T::IS_COMPLEX { "complex" } else { "real" });
    let _ = writeln!(s, "terms {}", model.num_terms);
    let _ = writeln!(s, "compliant {}", u8::from(model.compliant));
    match &model.stability {
        None => s.push_str("stability none\n"),
        Some(st) => {
            s.push_str("stability ");
            num(&mut s, st.beta_ref);
            s.push_str("\ny_ref");
            for &v in st.y_ref.iter() {
                s.push(' ');
                num(&mut s, v);
            }
            s.push_str("\nactive");
            for &a in &st.active {
                let _ = write!(s, " {}", u8::from(a));
            }
            s.push('\n');
        }
    }
    let _ = writeln!(s, "snapshots {}", model.snapshots.len());
    for y in &model.snapshots {
        let mut first = true;
        for &v in y.iter() {
            if !first {
                s.push(' ');
            }
            first = false;
            num(&mut s, v);
        }
        s.push('\n');
    }
    for (q, m) in model.a_pr.iter().enumerate() {
        write_block(&mut s, &format!("a_pr{q}"), m);
    }
    write_block(&mut s, "b_pr", &col(&model.b_pr));
    write_block(&mut s, "l_pr", &col(&model.l_pr));
    write_block(&mut s, "riesz_pr", &model.riesz_pr);
    if !model.compliant {
        for (q, m) in model.a_du.iter().enumerate() {
            write_block(&mut s, &format!("a_du{q}"), m);
        }
        for (q, m) in model.a_cross.iter().enumerate() {
            write_block(&mut s, &format!("a_cross{q}"), m);
        }
        write_block(&mut s, "b_du", &col(&model.b_du));
        write_block(&mut s, "f_du", &col(&model.f_du));
        write_block(&mut s, "riesz_du", &model.riesz_du);
    }
    w.write_all(s.as_bytes())?;
    Ok(())
}

struct Lines<R> {
    inner: std::io::Lines<R>,
    line: usize,
}

impl<R: BufRead> Lines<R> {
    fn next(&mut self) -> Result<String> {
        self.line += 1;
        match self.inner.next() {
            Some(l) => Ok(l?),
            None => Err(self.err("unexpected end of file")),
        }
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse {
            line: self.line,
            msg: msg.into(),
        }
    }

    fn keyed(&mut self, key: &str) -> Result<Vec<String>> {
        let l = self.next()?;
        let mut it = l.split_whitespace();
        if it.next() != Some(key) {
            return Err(self.err(format!("expected `{key}`")));
        }
        Ok(it.map(str::to_owned).collect())
    }

    fn parse<F: std::str::FromStr>(&self, s: &str) -> Result<F> {
        s.parse().map_err(|_| self.err(format!("cannot parse `{s}`")))
    }

    fn floats(&mut self, expected: usize) -> Result<Vec<f64>> {
        let l = self.next()?;
        let v: Vec<f64> = l.split_whitespace().map(|t| self.parse(t)).collect::<Result<_>>()?;
        if v.len() != expected {
            return Err(self.err(format!("expected {expected} numbers, found {}", v.len())));
        }
        Ok(v)
    }

    fn block<T: HdgScalar>(&mut self, name: &str) -> Result<DMatrix<T>> {
        let h = self.keyed("block")?;
        if h.len() != 3 || h[0] != name {
            return Err(self.err(format!("expected block `{name}`")));
        }
        let rows: usize = self.parse(&h[1])?;
        let cols: usize = self.parse(&h[2])?;
        let per = if T::IS_COMPLEX { 2 } else { 1 };
        let mut m = DMatrix::zeros(rows, cols);
        for i in 0..rows {
            let v = self.floats(cols * per)?;
            for j in 0..cols {
                let c = if T::IS_COMPLEX {
                    Complex64::new(v[2 * j], v[2 * j + 1])
                } else {
                    Complex64::new(v[j], 0.0)
                };
                m[(i, j)] = T::from_complex(c).ok_or_else(|| self.err("complex entry in real model"))?;
            }
        }
        Ok(m)
    }

    fn vector<T: HdgScalar>(&mut self, name: &str) -> Result<DVector<T>> {
        let m = self.block::<T>(name)?;
        if m.ncols() != 1 && m.nrows() != 0 {
            return Err(self.err(format!("block `{name}` must be a column")));
        }
        Ok(DVector::from_column_slice(m.as_slice()))
    }
}

/// Reads a model written by [`write_model`].
pub fn read_model<T: HdgScalar, R: BufRead>(r: R) -> Result<RbModel<T>> {
    let mut l = Lines { inner: r.lines(), line: 0 };
    if l.next()? != MAGIC {
        return Err(l.err("not an RB model file"));
    }
    let sc = l.keyed("scalar")?;
    let want = if T::IS_COMPLEX { "complex" } else { "real" };
    if sc.first().map(String::as_str) != Some(want) {
        return Err(l.err(format!("model scalar type does not match `{want}`")));
    }
    let t = l.keyed("terms")?.first().cloned().unwrap_or_default();
    let nt: usize = l.parse(&t)?;
    if nt < 2 {
        return Err(l.err("a model needs at least two affine terms"));
    }
    let compliant = l.keyed("compliant")?.first().map(String::as_str) == Some("1");
    let st = l.keyed("stability")?;
    let stability = match st.first().map(String::as_str) {
        Some("none") => None,
        Some(v) => {
            let beta_ref: f64 = l.parse(v)?;
            let y_ref: Vec<f64> = l.keyed("y_ref")?.iter().map(|t| l.parse(t)).collect::<Result<_>>()?;
            let active: Vec<bool> = l.keyed("active")?.iter().map(|t| t == "1").collect();
            if y_ref.len() != nt - 1 || active.len() != nt {
                return Err(l.err("stability data has the wrong length"));
            }
            Some(StabilityData {
                beta_ref,
                y_ref: ParameterVector::new(y_ref),
                active,
            })
        }
        None => return Err(l.err("missing stability value")),
    };
    let t = l.keyed("snapshots")?.first().cloned().unwrap_or_default();
    let ns: usize = l.parse(&t)?;
    let mut snapshots = Vec::with_capacity(ns);
    for _ in 0..ns {
        snapshots.push(ParameterVector::new(l.floats(nt - 1)?));
    }
    let a_pr = (0..nt).map(|q| l.block::<T>(&format!("a_pr{q}"))).collect::<Result<Vec<_>>>()?;
    let b_pr = l.vector::<T>("b_pr")?;
    let l_pr = l.vector::<T>("l_pr")?;
    let riesz_pr = l.block::<T>("riesz_pr")?;
    let n = b_pr.len();
    if a_pr.iter().any(|m| m.shape() != (n, n)) || l_pr.len() != n || riesz_pr.ncols() != 1 + n * nt {
        return Err(l.err("inconsistent primal block sizes"));
    }
    let (a_du, a_cross, b_du, f_du, riesz_du) = if compliant {
        (Vec::new(), Vec::new(), DVector::zeros(0), DVector::zeros(0), DMatrix::zeros(0, 0))
    } else {
        let a_du = (0..nt).map(|q| l.block::<T>(&format!("a_du{q}"))).collect::<Result<Vec<_>>>()?;
        let a_cross = (0..nt).map(|q| l.block::<T>(&format!("a_cross{q}"))).collect::<Result<Vec<_>>>()?;
        let b_du = l.vector::<T>("b_du")?;
        let f_du = l.vector::<T>("f_du")?;
        let riesz_du = l.block::<T>("riesz_du")?;
        let nd = b_du.len();
        if a_du.iter().any(|m| m.shape() != (nd, nd))
            || a_cross.iter().any(|m| m.shape() != (nd, n))
            || f_du.len() != nd
            || riesz_du.ncols() != 1 + nd * nt
        {
            return Err(l.err("inconsistent dual block sizes"));
        }
        (a_du, a_cross, b_du, f_du, riesz_du)
    };
    Ok(RbModel::from_parts(
        nt, compliant, snapshots, a_pr, b_pr, l_pr, a_du, a_cross, b_du, f_du, riesz_pr, riesz_du, stability,
    ))
}
