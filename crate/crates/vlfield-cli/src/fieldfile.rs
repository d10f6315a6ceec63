//! The field file format: a small text header followed by row-major cell
//! data. Floats are written in shortest round-trip decimal form, so write
//! followed by parse reproduces the numbers bit-exactly.
//!
//! ```text
//! vlfield 1
//! kind exponent | scalar | vector | matrix
//! n 1..3
//! d 1..3
//! L <power of two>
//! J <integer>
//! p_inf <float>        (exponent kind only)
//! <one cell per line: 1, d, or d*d whitespace-separated entries>
//! ```

use std::fmt::Write as _;

use vlfield_core::domain::LatticeDomain;
use vlfield_core::exponent::ExponentField;
use vlfield_core::field::{ScalarField, VectorField};
use vlfield_core::linalg::Mat;
use vlfield_core::weights::MatrixWeightField;
use vlfield_core::{Error, Result};

pub const FORMAT_TAG: &str = "vlfield 1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Exponent,
    Scalar,
    Vector,
    Matrix,
}

impl Kind {
    fn parse(s: &str) -> Result<Kind> {
        match s {
            "exponent" => Ok(Kind::Exponent),
            "scalar" => Ok(Kind::Scalar),
            "vector" => Ok(Kind::Vector),
            "matrix" => Ok(Kind::Matrix),
            other => Err(Error::Data(format!("unknown field kind `{other}`"))),
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Kind::Exponent => "exponent",
            Kind::Scalar => "scalar",
            Kind::Vector => "vector",
            Kind::Matrix => "matrix",
        }
    }

    fn arity(&self, d: usize) -> usize {
        match self {
            Kind::Exponent | Kind::Scalar => 1,
            Kind::Vector => d,
            Kind::Matrix => d * d,
        }
    }
}

#[derive(Debug)]
pub enum Field {
    Exponent(ExponentField),
    Scalar(ScalarField),
    Vector(VectorField),
    Matrix(MatrixWeightField),
}

pub fn parse(text: &str) -> Result<Field> {
    let mut lines = text.lines();
    let tag = lines.next().unwrap_or_default().trim();
    if tag != FORMAT_TAG {
        return Err(Error::Data(format!("expected header `{FORMAT_TAG}`, got `{tag}`")));
    }
    let mut kind = None;
    let mut n = None;
    let mut d = None;
    let mut l = None;
    let mut j = None;
    let mut p_inf = None;
    let mut data_rows: Vec<&str> = Vec::new();
    let mut in_header = true;
    for line in lines {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if in_header {
            let mut parts = line.split_whitespace();
            let key = parts.next().unwrap_or_default();
            let is_header_key =
                matches!(key, "kind" | "n" | "d" | "L" | "J" | "p_inf");
            if is_header_key {
                let value = parts.next().ok_or_else(|| {
                    Error::Data(format!("header key `{key}` missing its value"))
                })?;
                match key {
                    "kind" => kind = Some(Kind::parse(value)?),
                    "n" => n = Some(parse_num::<usize>(key, value)?),
                    "d" => d = Some(parse_num::<usize>(key, value)?),
                    "L" => l = Some(parse_num::<f64>(key, value)?),
                    "J" => j = Some(parse_num::<i32>(key, value)?),
                    "p_inf" => p_inf = Some(parse_num::<f64>(key, value)?),
                    _ => unreachable!(),
                }
                continue;
            }
            in_header = false;
        }
        data_rows.push(line);
    }
    let kind = kind.ok_or_else(|| Error::Data("missing `kind` header".into()))?;
    let n = n.ok_or_else(|| Error::Data("missing `n` header".into()))?;
    let d = d.ok_or_else(|| Error::Data("missing `d` header".into()))?;
    let l = l.ok_or_else(|| Error::Data("missing `L` header".into()))?;
    let j = j.ok_or_else(|| Error::Data("missing `J` header".into()))?;
    if kind == Kind::Exponent && p_inf.is_none() {
        return Err(Error::Data("exponent fields require the `p_inf` header".into()));
    }

    let domain = LatticeDomain::build(n, l, j)?;
    if data_rows.len() != domain.num_cells() {
        return Err(Error::Data(format!(
            "expected {} data rows, got {}",
            domain.num_cells(),
            data_rows.len()
        )));
    }
    let arity = kind.arity(d);
    let mut values = Vec::with_capacity(data_rows.len() * arity);
    for (row_idx, row) in data_rows.iter().enumerate() {
        let entries: Vec<&str> = row.split_whitespace().collect();
        if entries.len() != arity {
            return Err(Error::Data(format!(
                "row {row_idx}: expected {arity} entries for kind {}, got {}",
                kind.name(),
                entries.len()
            )));
        }
        for e in entries {
            values.push(parse_num::<f64>("data", e)?);
        }
    }

    Ok(match kind {
        Kind::Exponent => Field::Exponent(ExponentField::from_values(
            &domain,
            values,
            p_inf.expect("checked above"),
        )?),
        Kind::Scalar => Field::Scalar(ScalarField::new(&domain, values)?),
        Kind::Vector => Field::Vector(VectorField::new(&domain, d, values)?),
        Kind::Matrix => {
            let mats: Vec<Mat> = values
                .chunks(d * d)
                .map(|rows| Mat::from_rows(d, rows))
                .collect();
            Field::Matrix(MatrixWeightField::from_mats(&domain, d, mats)?)
        }
    })
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse::<T>()
        .map_err(|_| Error::Data(format!("cannot parse `{value}` for `{key}`")))
}

fn header(kind: Kind, domain: &LatticeDomain, d: usize, p_inf: Option<f64>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{FORMAT_TAG}");
    let _ = writeln!(out, "kind {}", kind.name());
    let _ = writeln!(out, "n {}", domain.dim());
    let _ = writeln!(out, "d {d}");
    let _ = writeln!(out, "L {:?}", domain.half_width());
    let _ = writeln!(out, "J {}", domain.refinement());
    if let Some(p) = p_inf {
        let _ = writeln!(out, "p_inf {p:?}");
    }
    out
}

pub fn write_exponent(f: &ExponentField) -> String {
    let mut out = header(Kind::Exponent, f.domain(), 1, Some(f.p_inf()));
    for v in f.values() {
        let _ = writeln!(out, "{v:?}");
    }
    out
}

pub fn write_scalar(f: &ScalarField) -> String {
    let mut out = header(Kind::Scalar, f.domain(), 1, None);
    for v in f.values() {
        let _ = writeln!(out, "{v:?}");
    }
    out
}

pub fn write_vector(f: &VectorField) -> String {
    let mut out = header(Kind::Vector, f.domain(), f.dim(), None);
    for cell in 0..f.domain().num_cells() {
        let row: Vec<String> = f.get(cell).iter().map(|v| format!("{v:?}")).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    out
}

pub fn write_matrix(f: &MatrixWeightField) -> String {
    let mut out = header(Kind::Matrix, f.domain(), f.dim(), None);
    for cell in 0..f.domain().num_cells() {
        let row: Vec<String> = f.mat(cell).rows().iter().map(|v| format!("{v:?}")).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    out
}
