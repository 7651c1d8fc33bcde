//! JSON files for maps, canonical data and results.
//!
//! A matrix is a list of rows. Real entries are numbers and complex entries
//! are `[re, im]` pairs. Floats are written in shortest round-trip form, so
//! writing a parsed file reproduces it byte for byte.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::canonical::{CanonicalError, CanonicalForm, DecomposeFailure};
use crate::classify::ClassifierVerdict;
use crate::linmap::{LinMap, LinMapError};
use crate::matcore::{Field, Mat};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Matrix(String),
    #[error(transparent)]
    Map(#[from] LinMapError),
    #[error(transparent)]
    Canonical(#[from] CanonicalError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

type Rows = Vec<Vec<Entry>>;

fn rows_of(a: &Mat) -> Rows {
    (0..a.rows())
        .map(|i| {
            (0..a.cols())
                .map(|j| {
                    let z = a.get(i, j);
                    match a.field() {
                        Field::Real => Entry::Real(z.re),
                        Field::Complex => Entry::Complex([z.re, z.im]),
                    }
                })
                .collect()
        })
        .collect()
}

fn mat_of(rows: &Rows, field: Field, shape: Option<(usize, usize)>) -> Result<Mat, FormatError> {
    let r = rows.len();
    let c = rows.first().map_or(0, |row| row.len());
    if rows.iter().any(|row| row.len() != c) {
        return Err(FormatError::Matrix("ragged matrix rows".into()));
    }
    if let Some(expected) = shape {
        if (r, c) != expected {
            return Err(FormatError::Matrix(format!(
                "matrix has shape {:?}, expected {expected:?}",
                (r, c)
            )));
        }
    }
    let mut out = Mat::zeros(r, c, field);
    for (i, row) in rows.iter().enumerate() {
        for (j, e) in row.iter().enumerate() {
            let z = match (e, field) {
                (Entry::Real(x), _) => Complex64::new(*x, 0.0),
                (Entry::Complex([re, im]), Field::Complex) => Complex64::new(*re, *im),
                (Entry::Complex(_), Field::Real) => {
                    return Err(FormatError::Matrix("complex entry in a real matrix".into()))
                }
            };
            out.set(i, j, z);
        }
    }
    Ok(out)
}

/// Matrix as a JSON value.
pub fn matrix_to_value(a: &Mat) -> Value {
    serde_json::to_value(rows_of(a)).expect("finite entries serialize")
}

pub fn matrix_from_value(v: &Value, field: Field) -> Result<Mat, FormatError> {
    let rows: Rows = serde_json::from_value(v.clone())?;
    mat_of(&rows, field, None)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MapFile {
    m: usize,
    n: usize,
    r: usize,
    s: usize,
    field: Field,
    images: Vec<Rows>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CanonicalFile {
    m: usize,
    n: usize,
    r: usize,
    s: usize,
    field: Field,
    #[serde(rename = "U")]
    u: Rows,
    #[serde(rename = "V")]
    v: Rows,
    #[serde(rename = "Q1")]
    q1: Vec<f64>,
    #[serde(rename = "Q2")]
    q2: Vec<f64>,
}

/// `{m, n, r, s, field, images}` with images in row-major order of `E_ij`.
pub fn map_to_json(phi: &LinMap) -> String {
    let file = MapFile {
        m: phi.m(),
        n: phi.n(),
        r: phi.r(),
        s: phi.s(),
        field: phi.field(),
        images: phi.images().iter().map(rows_of).collect(),
    };
    serde_json::to_string(&file).expect("finite entries serialize")
}

pub fn map_from_json(text: &str) -> Result<LinMap, FormatError> {
    let file: MapFile = serde_json::from_str(text)?;
    let images = file
        .images
        .iter()
        .map(|rows| mat_of(rows, file.field, Some((file.r, file.s))))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(LinMap::from_images(
        file.m, file.n, file.r, file.s, file.field, images,
    )?)
}

/// `{m, n, r, s, field, U, V, Q1, Q2}`.
pub fn canonical_to_json(c: &CanonicalForm) -> String {
    serde_json::to_string(&canonical_file(c)).expect("finite entries serialize")
}

fn canonical_file(c: &CanonicalForm) -> CanonicalFile {
    CanonicalFile {
        m: c.m(),
        n: c.n(),
        r: c.r(),
        s: c.s(),
        field: c.field(),
        u: rows_of(c.u()),
        v: rows_of(c.v()),
        q1: c.q1().to_vec(),
        q2: c.q2().to_vec(),
    }
}

pub fn canonical_to_value(c: &CanonicalForm) -> Value {
    serde_json::to_value(canonical_file(c)).expect("finite entries serialize")
}

pub fn canonical_from_json(text: &str) -> Result<CanonicalForm, FormatError> {
    let f: CanonicalFile = serde_json::from_str(text)?;
    let u = mat_of(&f.u, f.field, Some((f.r, f.r)))?;
    let v = mat_of(&f.v, f.field, Some((f.s, f.s)))?;
    Ok(CanonicalForm::new(
        f.m, f.n, f.r, f.s, f.field, u, v, f.q1, f.q2,
    )?)
}

/// `{kind, witness, residual}` with `witness` a pair of matrices or null.
pub fn failure_to_json(f: &DecomposeFailure) -> String {
    let witness = f
        .witness
        .as_ref()
        .map(|(a, b)| Value::Array(vec![matrix_to_value(a), matrix_to_value(b)]));
    let v = serde_json::json!({
        "kind": f.kind,
        "witness": witness,
        "residual": finite_or_null(f.residual),
    });
    v.to_string()
}

fn finite_or_null(x: f64) -> Value {
    if x.is_finite() {
        Value::from(x)
    } else {
        Value::Null
    }
}

/// `{verdict, detail, certificate?, witness?}`; absent parts are omitted.
pub fn verdict_to_json(v: &ClassifierVerdict) -> String {
    let mut out = serde_json::Map::new();
    out.insert("verdict".into(), serde_json::json!(v.verdict));
    out.insert("detail".into(), serde_json::json!(v.detail));
    if let Some(c) = &v.certificate {
        out.insert("certificate".into(), canonical_to_value(c));
    }
    if let Some(ms) = &v.witness {
        out.insert(
            "witness".into(),
            Value::Array(ms.iter().map(matrix_to_value).collect()),
        );
    }
    Value::Object(out).to_string()
}
