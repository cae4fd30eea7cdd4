//! Linear frames loaded from JSON files.

use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde_json::Value;

use super::CliError;
use crate::fixtures::linear_frame;
use crate::frame::Frame;
use crate::spaces::ScalarField;

fn schema(field: &str, message: impl std::fmt::Display) -> CliError {
    CliError::Parse(format!("frame file: field `{field}`: {message}"))
}

fn field<'a>(doc: &'a serde_json::Map<String, Value>, name: &str) -> Result<&'a Value, CliError> {
    doc.get(name).ok_or_else(|| schema(name, "missing"))
}

fn as_count(doc: &serde_json::Map<String, Value>, name: &str) -> Result<usize, CliError> {
    field(doc, name)?
        .as_u64()
        .filter(|&n| n > 0)
        .map(|n| n as usize)
        .ok_or_else(|| schema(name, "expected a positive integer"))
}

fn entry(name: &str, v: &Value, field_kind: ScalarField) -> Result<Complex64, CliError> {
    let z = match v {
        Value::Number(x) => Complex64::new(x.as_f64().unwrap_or(f64::NAN), 0.0),
        Value::Array(pair) if pair.len() == 2 => match (pair[0].as_f64(), pair[1].as_f64()) {
            (Some(re), Some(im)) => Complex64::new(re, im),
            _ => return Err(schema(name, "entries must be numbers or [re, im] pairs")),
        },
        _ => return Err(schema(name, "entries must be numbers or [re, im] pairs")),
    };
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(schema(name, "non-finite entry"));
    }
    if field_kind == ScalarField::Real && z.im != 0.0 {
        return Err(schema(name, "complex entry in a real frame"));
    }
    Ok(z)
}

fn matrix(
    doc: &serde_json::Map<String, Value>,
    name: &str,
    rows: usize,
    cols: usize,
    field_kind: ScalarField,
) -> Result<DMatrix<Complex64>, CliError> {
    let data = field(doc, name)?
        .as_array()
        .ok_or_else(|| schema(name, "expected an array of rows"))?;
    if data.len() != rows {
        return Err(schema(name, format!("expected {rows} rows, found {}", data.len())));
    }
    let mut flat = Vec::with_capacity(rows * cols);
    for (i, row) in data.iter().enumerate() {
        let row = row
            .as_array()
            .ok_or_else(|| schema(name, format!("row {} is not an array", i + 1)))?;
        if row.len() != cols {
            return Err(schema(
                name,
                format!("row {} has {} entries, expected {cols}", i + 1, row.len()),
            ));
        }
        for v in row {
            flat.push(entry(name, v, field_kind)?);
        }
    }
    Ok(DMatrix::from_row_slice(rows, cols, &flat))
}

/// Parses `{p, N, ambient_dim, scalar_field, U_matrix, V_matrix}` where
/// `U_matrix` is `N × ambient_dim` (row `n` is the functional `f_n`) and
/// `V_matrix` is `ambient_dim × N` (column `n` is `τ_n`).
pub fn parse_frame_str(text: &str) -> Result<Frame, CliError> {
    let value: Value =
        serde_json::from_str(text).map_err(|e| CliError::Parse(format!("frame file: {e}")))?;
    let doc = value
        .as_object()
        .ok_or_else(|| CliError::Parse("frame file: expected a JSON object".into()))?;
    let p = field(doc, "p")?
        .as_f64()
        .ok_or_else(|| schema("p", "expected a number"))?;
    if !(p.is_finite() && p >= 1.0) {
        return Err(schema("p", format!("{p} is invalid, require 1 <= p < inf")));
    }
    let n = as_count(doc, "N")?;
    let dim = as_count(doc, "ambient_dim")?;
    let field_kind = match field(doc, "scalar_field")?.as_str() {
        Some("real") | Some("R") => ScalarField::Real,
        Some("complex") | Some("C") => ScalarField::Complex,
        _ => return Err(schema("scalar_field", "expected \"real\" or \"complex\"")),
    };
    let u = matrix(doc, "U_matrix", n, dim, field_kind)?;
    let v = matrix(doc, "V_matrix", dim, n, field_kind)?;
    Ok(linear_frame(&u, &v, p)?)
}

pub fn parse_frame_file(path: &Path) -> Result<Frame, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Parse(format!("cannot read {}: {e}", path.display())))?;
    parse_frame_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::Point;

    #[test]
    fn dim_one_doubling_file() {
        let f = parse_frame_str(
            r#"{"p": 2, "N": 1, "ambient_dim": 1, "scalar_field": "real", "U_matrix": [[2]], "V_matrix": [[1]]}"#,
        )
        .unwrap();
        let x = Point::real_scalar(1.5);
        assert_eq!(f.frame_map(&x).unwrap(), Point::real_scalar(3.0));
    }

    #[test]
    fn complex_entries() {
        let f = parse_frame_str(
            r#"{"p": 1, "N": 1, "ambient_dim": 1, "scalar_field": "complex", "U_matrix": [[[0, 1]]], "V_matrix": [[[0, -1]]]}"#,
        )
        .unwrap();
        let x = Point::complex_scalar(Complex64::new(2.0, 3.0));
        assert!(f.frame_map(&x).unwrap().max_abs_diff(&x) < 1e-15);
    }

    #[test]
    fn missing_p_is_named() {
        let err = parse_frame_str(
            r#"{"N": 1, "ambient_dim": 1, "scalar_field": "real", "U_matrix": [[2]], "V_matrix": [[1]]}"#,
        )
        .unwrap_err();
        assert!(matches!(&err, CliError::Parse(m) if m.contains("`p`")), "{err}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn small_p_is_rejected() {
        let err = parse_frame_str(
            r#"{"p": 0.5, "N": 1, "ambient_dim": 1, "scalar_field": "real", "U_matrix": [[2]], "V_matrix": [[1]]}"#,
        )
        .unwrap_err();
        assert!(matches!(&err, CliError::Parse(m) if m.contains("`p`")));
    }

    #[test]
    fn shape_errors_name_the_matrix() {
        let err = parse_frame_str(
            r#"{"p": 1, "N": 2, "ambient_dim": 1, "scalar_field": "real", "U_matrix": [[2]], "V_matrix": [[1, 0]]}"#,
        )
        .unwrap_err();
        assert!(matches!(&err, CliError::Parse(m) if m.contains("U_matrix")));
    }

    #[test]
    fn singular_file_is_a_precondition_error() {
        let err = parse_frame_str(
            r#"{"p": 1, "N": 1, "ambient_dim": 1, "scalar_field": "real", "U_matrix": [[1]], "V_matrix": [[0]]}"#,
        )
        .unwrap_err();
        assert_eq!(err.exit_code(), 3);
    }
}
