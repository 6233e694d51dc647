//! Plain-text network files.
//!
//! ```text
//! heliquad-mlp v1
//! layers <n_in> <n_hidden> <n_out>
//! in_min <n_in values>
//! in_max <n_in values>
//! out_min <n_out values>
//! out_max <n_out values>
//! w1 <n_hidden * n_in values, row-major>
//! b1 <n_hidden values>
//! w2 <n_out * n_hidden values, row-major>
//! b2 <n_out values>
//! ```
//!
//! Values are decimal and written in shortest round-trip form, so files are
//! exact and independent of byte order. Blank lines and `#` comments are
//! ignored.

use std::io::{BufRead, Write};

use heliquad_core::nn::MlpModel;

use crate::{parse_f64, FormatError};

pub const MAGIC: &str = "heliquad-mlp v1";

const SECTIONS: [&str; 8] = ["in_min", "in_max", "out_min", "out_max", "w1", "b1", "w2", "b2"];

pub fn write_model<W: Write>(mut w: W, m: &MlpModel) -> Result<(), FormatError> {
    writeln!(w, "{MAGIC}")?;
    writeln!(w, "layers {} {} {}", m.n_in, m.n_hidden, m.n_out)?;
    let values = [&m.in_min, &m.in_max, &m.out_min, &m.out_max, &m.w1, &m.b1, &m.w2, &m.b2];
    for (name, vals) in SECTIONS.iter().zip(values) {
        write!(w, "{name}")?;
        for v in vals.iter() {
            write!(w, " {v:?}")?;
        }
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_model<R: BufRead>(r: R) -> Result<MlpModel, FormatError> {
    let mut lines = Vec::new();
    for (i, l) in r.lines().enumerate() {
        let l = l?;
        let body = l.split('#').next().unwrap_or("").trim().to_string();
        if !body.is_empty() {
            lines.push((i as u64 + 1, body));
        }
    }
    let mut it = lines.into_iter();
    match it.next() {
        Some((_, l)) if l == MAGIC => {}
        Some((n, l)) => return Err(FormatError::at(n, format!("expected {MAGIC:?}, found {l:?}"))),
        None => return Err(FormatError::at(1, "empty model file")),
    }
    let (n, l) = it.next().ok_or_else(|| FormatError::at(2, "missing layers line"))?;
    let sizes: Vec<&str> = l.split_whitespace().collect();
    if sizes.len() != 4 || sizes[0] != "layers" {
        return Err(FormatError::at(n, "expected `layers <n_in> <n_hidden> <n_out>`"));
    }
    let size = |s: &str| s.parse::<usize>().map_err(|_| FormatError::at(n, format!("bad layer size {s:?}")));
    let (ni, nh, no) = (size(sizes[1])?, size(sizes[2])?, size(sizes[3])?);
    let expect = [ni, ni, no, no, nh * ni, nh, no * nh, no];

    let mut sections: Vec<Vec<f64>> = Vec::with_capacity(SECTIONS.len());
    for (name, len) in SECTIONS.iter().zip(expect) {
        let (n, l) = it.next().ok_or_else(|| FormatError::Invalid(format!("missing section {name}")))?;
        let mut parts = l.split_whitespace();
        if parts.next() != Some(name) {
            return Err(FormatError::at(n, format!("expected section {name}")));
        }
        let vals = parts.map(|s| parse_f64(s, n, name)).collect::<Result<Vec<_>, _>>()?;
        if vals.len() != len {
            return Err(FormatError::at(n, format!("{name} needs {len} values, found {}", vals.len())));
        }
        sections.push(vals);
    }
    if let Some((n, _)) = it.next() {
        return Err(FormatError::at(n, "unexpected trailing content"));
    }
    let mut s = sections.into_iter();
    let mut next = || s.next().unwrap_or_default();
    let m = MlpModel {
        n_in: ni,
        n_hidden: nh,
        n_out: no,
        in_min: next(),
        in_max: next(),
        out_min: next(),
        out_max: next(),
        w1: next(),
        b1: next(),
        w2: next(),
        b2: next(),
    };
    m.validate().map_err(|e| FormatError::Invalid(e.to_string()))?;
    Ok(m)
}
