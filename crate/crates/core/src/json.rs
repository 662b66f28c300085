//! Matrix JSON: `{"rows": r, "cols": c, "data": [[[re, im], ...], ...]}`.
//!
//! Entries are written with 17 significant digits so that output is
//! byte-stable and round-trips exactly.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;
use serde::ser::{Serialize, SerializeMap, Serializer};
use serde::Deserialize;
use serde_json::value::RawValue;

use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix};

fn push_f64(out: &mut String, x: f64) {
    if x.is_finite() {
        let _ = write!(out, "{x:.16e}");
    } else {
        out.push_str("null");
    }
}

fn push_complex(out: &mut String, z: Complex64) {
    out.push('[');
    push_f64(out, z.re);
    out.push(',');
    push_f64(out, z.im);
    out.push(']');
}

/// Compact matrix JSON text.
pub fn matrix_to_string(m: &CMatrix) -> String {
    let mut out = String::with_capacity(16 + 50 * m.len());
    let _ = write!(
        out,
        "{{\"rows\":{},\"cols\":{},\"data\":[",
        m.nrows(),
        m.ncols()
    );
    for i in 0..m.nrows() {
        if i > 0 {
            out.push(',');
        }
        out.push('[');
        for j in 0..m.ncols() {
            if j > 0 {
                out.push(',');
            }
            push_complex(&mut out, m[(i, j)]);
        }
        out.push(']');
    }
    out.push_str("]}");
    out
}

fn raw(text: String) -> Box<RawValue> {
    RawValue::from_string(text).expect("generated JSON is well formed")
}

pub fn serialize_matrix<S: Serializer>(
    m: &CMatrix,
    ser: S,
) -> std::result::Result<S::Ok, S::Error> {
    raw(matrix_to_string(m)).serialize(ser)
}

pub fn serialize_complex<S: Serializer>(
    z: &Complex64,
    ser: S,
) -> std::result::Result<S::Ok, S::Error> {
    let mut out = String::new();
    push_complex(&mut out, *z);
    raw(out).serialize(ser)
}

pub fn serialize_matrix_map<S: Serializer>(
    map: &BTreeMap<String, CMatrix>,
    ser: S,
) -> std::result::Result<S::Ok, S::Error> {
    let mut state = ser.serialize_map(Some(map.len()))?;
    for (k, v) in map {
        state.serialize_entry(k, &raw(matrix_to_string(v)))?;
    }
    state.end()
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixDoc {
    rows: usize,
    cols: usize,
    data: Vec<Vec<[f64; 2]>>,
}

/// Parses matrix JSON, rejecting shape mismatches and non-finite entries.
pub fn parse_matrix(text: &str) -> Result<CMatrix> {
    let doc: MatrixDoc = serde_json::from_str(text)
        .map_err(|e| Error::InvalidInput(format!("malformed matrix JSON: {e}")))?;
    if doc.data.len() != doc.rows {
        return Err(Error::InvalidInput(format!(
            "declared {} rows but data has {}",
            doc.rows,
            doc.data.len()
        )));
    }
    if let Some((i, row)) = doc
        .data
        .iter()
        .enumerate()
        .find(|(_, r)| r.len() != doc.cols)
    {
        return Err(Error::InvalidInput(format!(
            "row {i} has {} entries, expected {}",
            row.len(),
            doc.cols
        )));
    }
    let m = CMatrix::from_fn(doc.rows, doc.cols, |i, j| {
        let [re, im] = doc.data[i][j];
        c(re, im)
    });
    crate::linalg::validate(&m)?;
    Ok(m)
}

pub fn read_matrix(path: &Path) -> Result<CMatrix> {
    parse_matrix(&std::fs::read_to_string(path)?)
}

pub fn write_matrix(path: &Path, m: &CMatrix) -> Result<()> {
    let mut text = matrix_to_string(m);
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}
