//! JSON formats for matrices and polynomials.
//!
//! Matrices: `{"n": N, "re": [[..]], "im": [[..]]}`, row-major, `"im"`
//! optional. Compound matrices carry `"basis": ["12", "13", ..]`.
//! Polynomials: `{"degree": d, "terms": [{"i": i, "j": j, "c": c}, ..]}`.
//!
//! Output is canonical: sorted keys and every float printed as `{:.16e}`.

use serde::Serialize;
use serde_json::{Map, Value};
use std::io;

use crate::error::{Error, Result};
use crate::matrix::{CMatrix, Hermitian};
use crate::poly::BiPoly;
use crate::scalar::c;

struct Canonical;

impl serde_json::ser::Formatter for Canonical {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        write!(w, "{v:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        write!(w, "{:.16e}", v as f64)
    }
}

/// Serializes any value with sorted keys and 17 significant digits.
pub fn to_canonical_json<S: Serialize>(value: &S) -> Result<String> {
    // round trip through Value so map keys come out sorted
    let v = serde_json::to_value(value).map_err(|e| Error::invalid(format!("serialization failed: {e}")))?;
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Canonical);
    v.serialize(&mut ser).map_err(|e| Error::invalid(format!("serialization failed: {e}")))?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("JSON is UTF-8"))
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str) -> Result<&'a Value> {
    obj.get(key).ok_or_else(|| Error::invalid(format!("missing field \"{key}\"")))
}

fn as_usize(v: &Value, what: &str) -> Result<usize> {
    v.as_u64()
        .map(|n| n as usize)
        .ok_or_else(|| Error::invalid(format!("{what}: expected a nonnegative integer, found {v}")))
}

fn real_grid(v: &Value, name: &str, n: usize) -> Result<Vec<Vec<f64>>> {
    let rows = v.as_array().ok_or_else(|| Error::invalid(format!("\"{name}\": expected an array of rows")))?;
    if rows.len() != n {
        return Err(Error::invalid(format!("\"{name}\": expected {n} rows, found {}", rows.len())));
    }
    rows.iter()
        .enumerate()
        .map(|(i, row)| {
            let row = row.as_array().ok_or_else(|| Error::invalid(format!("{name}[{i}]: expected an array")))?;
            if row.len() != n {
                return Err(Error::invalid(format!("{name}[{i}]: expected {n} entries, found {}", row.len())));
            }
            row.iter()
                .enumerate()
                .map(|(j, x)| {
                    x.as_f64()
                        .filter(|x| x.is_finite())
                        .ok_or_else(|| Error::invalid(format!("{name}[{i}][{j}]: expected a finite number, found {x}")))
                })
                .collect()
        })
        .collect()
}

/// Parsed matrix file: the matrix and the optional compound basis labels.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixFile {
    pub matrix: CMatrix<f64>,
    pub basis: Option<Vec<String>>,
}

/// Parses the matrix JSON format from an already decoded value.
pub fn matrix_from_value(v: &Value) -> Result<MatrixFile> {
    let obj = v.as_object().ok_or_else(|| Error::invalid("matrix file must be a JSON object"))?;
    let n = as_usize(field(obj, "n")?, "\"n\"")?;
    if n == 0 {
        return Err(Error::invalid("\"n\" must be positive"));
    }
    let re = real_grid(field(obj, "re")?, "re", n)?;
    let im = match obj.get("im") {
        Some(v) => real_grid(v, "im", n)?,
        None => vec![vec![0.0; n]; n],
    };
    let basis = match obj.get("basis") {
        None => None,
        Some(b) => {
            let arr = b.as_array().ok_or_else(|| Error::invalid("\"basis\": expected an array of strings"))?;
            let labels = arr
                .iter()
                .enumerate()
                .map(|(i, s)| {
                    s.as_str()
                        .map(str::to_string)
                        .ok_or_else(|| Error::invalid(format!("basis[{i}]: expected a string")))
                })
                .collect::<Result<Vec<_>>>()?;
            if labels.len() != n {
                return Err(Error::invalid(format!("\"basis\" has {} labels for n = {n}", labels.len())));
            }
            Some(labels)
        }
    };
    let matrix = CMatrix::from_fn(n, n, |i, j| c(re[i][j], im[i][j]));
    Ok(MatrixFile { matrix, basis })
}

/// Parses matrix JSON text. Syntax errors and format errors are both
/// [`Error::Invalid`]; callers that need to tell them apart decode first.
pub fn parse_matrix(text: &str) -> Result<MatrixFile> {
    let v: Value = serde_json::from_str(text).map_err(|e| Error::invalid(format!("malformed JSON: {e}")))?;
    matrix_from_value(&v)
}

/// Parses a matrix and checks that it is Hermitian.
pub fn parse_hermitian(text: &str) -> Result<Hermitian<f64>> {
    Hermitian::new(parse_matrix(text)?.matrix)
}

/// Matrix JSON value; `"im"` is written only when some entry is nonreal.
pub fn matrix_to_value(m: &CMatrix<f64>, basis: Option<&[String]>) -> Result<Value> {
    if !m.is_square() {
        return Err(Error::invalid("matrix format needs a square matrix"));
    }
    let n = m.rows();
    let grid = |f: fn(&num_complex::Complex<f64>) -> f64| -> Value {
        Value::Array((0..n).map(|i| Value::Array(m.row(i).iter().map(|z| Value::from(f(z))).collect())).collect())
    };
    let mut obj = Map::new();
    obj.insert("n".into(), Value::from(n));
    obj.insert("re".into(), grid(|z| z.re));
    if m.as_slice().iter().any(|z| z.im != 0.0) {
        obj.insert("im".into(), grid(|z| z.im));
    }
    if let Some(b) = basis {
        obj.insert("basis".into(), Value::Array(b.iter().map(|s| Value::from(s.as_str())).collect()));
    }
    Ok(Value::Object(obj))
}

pub fn write_matrix(m: &CMatrix<f64>, basis: Option<&[String]>) -> Result<String> {
    to_canonical_json(&matrix_to_value(m, basis)?)
}

pub fn poly_from_value(v: &Value) -> Result<BiPoly<f64>> {
    let obj = v.as_object().ok_or_else(|| Error::invalid("polynomial file must be a JSON object"))?;
    let degree = as_usize(field(obj, "degree")?, "\"degree\"")?;
    let terms = field(obj, "terms")?
        .as_array()
        .ok_or_else(|| Error::invalid("\"terms\": expected an array"))?;
    let mut p = BiPoly::zero(degree);
    for (t, term) in terms.iter().enumerate() {
        let o = term.as_object().ok_or_else(|| Error::invalid(format!("terms[{t}]: expected an object")))?;
        let i = as_usize(field(o, "i").map_err(|e| Error::invalid(format!("terms[{t}]: {e}")))?, &format!("terms[{t}].i"))?;
        let j = as_usize(field(o, "j").map_err(|e| Error::invalid(format!("terms[{t}]: {e}")))?, &format!("terms[{t}].j"))?;
        let cv = field(o, "c")
            .map_err(|e| Error::invalid(format!("terms[{t}]: {e}")))?
            .as_f64()
            .filter(|x| x.is_finite())
            .ok_or_else(|| Error::invalid(format!("terms[{t}].c: expected a finite number")))?;
        if i + j > degree {
            return Err(Error::invalid(format!("terms[{t}]: x^{i} y^{j} exceeds degree {degree}")));
        }
        p.set(i, j, p.get(i, j) + cv);
    }
    Ok(p)
}

pub fn parse_poly(text: &str) -> Result<BiPoly<f64>> {
    let v: Value = serde_json::from_str(text).map_err(|e| Error::invalid(format!("malformed JSON: {e}")))?;
    poly_from_value(&v)
}

pub fn poly_to_value(p: &BiPoly<f64>) -> Value {
    let terms: Vec<Value> = p
        .terms()
        .into_iter()
        .map(|(i, j, cv)| serde_json::json!({"i": i, "j": j, "c": cv}))
        .collect();
    serde_json::json!({"degree": p.degree(), "terms": terms})
}

pub fn write_poly(p: &BiPoly<f64>) -> Result<String> {
    to_canonical_json(&poly_to_value(p))
}
