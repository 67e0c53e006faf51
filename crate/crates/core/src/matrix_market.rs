//! Matrix Market reader for dense storage.
//!
//! Supports `coordinate` and `array` layouts with `real`, `integer` or
//! `complex` fields and `general`, `symmetric`, `hermitian` or
//! `skew-symmetric` symmetry. `pattern` matrices are rejected since they
//! carry no values.

use std::path::Path;

use thiserror::Error;

use crate::densela::{DenseMatrix, DenseVector, Scalar};

#[derive(Debug, Error)]
pub enum MatrixMarketError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("unsupported Matrix Market {what} '{value}'")]
    Unsupported { what: &'static str, value: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Layout {
    Coordinate,
    Array,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Field {
    Real,
    Complex,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
    Hermitian,
    Skew,
}

fn parse_err(line: usize, message: impl Into<String>) -> MatrixMarketError {
    MatrixMarketError::Parse {
        line,
        message: message.into(),
    }
}

fn parse_header(line: &str) -> Result<(Layout, Field, Symmetry), MatrixMarketError> {
    let tokens: Vec<String> = line.split_whitespace().map(|t| t.to_ascii_lowercase()).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" {
        return Err(parse_err(
            1,
            "expected '%%MatrixMarket matrix <layout> <field> <symmetry>'",
        ));
    }
    if tokens[1] != "matrix" {
        return Err(MatrixMarketError::Unsupported {
            what: "object",
            value: tokens[1].clone(),
        });
    }
    let layout = match tokens[2].as_str() {
        "coordinate" => Layout::Coordinate,
        "array" => Layout::Array,
        other => {
            return Err(MatrixMarketError::Unsupported {
                what: "format",
                value: other.to_string(),
            })
        }
    };
    let field = match tokens[3].as_str() {
        "real" | "integer" | "double" => Field::Real,
        "complex" => Field::Complex,
        other => {
            return Err(MatrixMarketError::Unsupported {
                what: "field",
                value: other.to_string(),
            })
        }
    };
    let symmetry = match tokens[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "hermitian" => Symmetry::Hermitian,
        "skew-symmetric" => Symmetry::Skew,
        other => {
            return Err(MatrixMarketError::Unsupported {
                what: "symmetry",
                value: other.to_string(),
            })
        }
    };
    Ok((layout, field, symmetry))
}

fn parse_number(token: &str, line: usize) -> Result<f64, MatrixMarketError> {
    let v: f64 = token
        .parse()
        .map_err(|_| parse_err(line, format!("invalid number '{token}'")))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(parse_err(line, format!("non-finite value '{token}'")))
    }
}

fn parse_index(token: &str, line: usize, bound: usize) -> Result<usize, MatrixMarketError> {
    let v: usize = token
        .parse()
        .map_err(|_| parse_err(line, format!("invalid index '{token}'")))?;
    if v == 0 || v > bound {
        return Err(parse_err(line, format!("index {v} outside 1..={bound}")));
    }
    Ok(v - 1)
}

fn parse_value(tokens: &[&str], field: Field, line: usize) -> Result<Scalar, MatrixMarketError> {
    let want = match field {
        Field::Real => 1,
        Field::Complex => 2,
    };
    if tokens.len() != want {
        return Err(parse_err(
            line,
            format!("expected {want} value(s), found {}", tokens.len()),
        ));
    }
    let re = parse_number(tokens[0], line)?;
    let im = if want == 2 { parse_number(tokens[1], line)? } else { 0.0 };
    Ok(Scalar::new(re, im))
}

/// Value stored at the mirrored position `(j, i)` for an entry at `(i, j)`.
fn mirrored(v: Scalar, symmetry: Symmetry) -> Option<Scalar> {
    match symmetry {
        Symmetry::General => None,
        Symmetry::Symmetric => Some(v),
        Symmetry::Hermitian => Some(v.conj()),
        Symmetry::Skew => Some(-v),
    }
}

/// Parses Matrix Market text into a dense matrix.
pub fn parse_matrix_market(text: &str) -> Result<DenseMatrix, MatrixMarketError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let (layout, field, symmetry) = parse_header(header)?;
    let mut data = lines.filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('%')
    });

    let (size_line, size) = data.next().ok_or_else(|| parse_err(2, "missing size line"))?;
    let dims: Vec<&str> = size.split_whitespace().collect();
    let parse_dim = |t: &str| {
        t.parse::<usize>()
            .map_err(|_| parse_err(size_line, format!("invalid dimension '{t}'")))
    };
    let expected_dims = if layout == Layout::Coordinate { 3 } else { 2 };
    if dims.len() != expected_dims {
        return Err(parse_err(size_line, format!("expected {expected_dims} size fields")));
    }
    let rows = parse_dim(dims[0])?;
    let cols = parse_dim(dims[1])?;
    if rows == 0 || cols == 0 {
        return Err(parse_err(size_line, "matrix dimensions must be positive"));
    }
    if symmetry != Symmetry::General && rows != cols {
        return Err(parse_err(size_line, "symmetric storage requires a square matrix"));
    }
    let mut m = DenseMatrix::zeros(rows, cols);

    match layout {
        Layout::Coordinate => {
            let nnz = parse_dim(dims[2])?;
            let mut seen = 0;
            for (line, content) in data {
                let tokens: Vec<&str> = content.split_whitespace().collect();
                if tokens.len() < 2 {
                    return Err(parse_err(line, "expected 'row col value'"));
                }
                if seen == nnz {
                    return Err(parse_err(line, format!("more than the declared {nnz} entries")));
                }
                let i = parse_index(tokens[0], line, rows)?;
                let j = parse_index(tokens[1], line, cols)?;
                let v = parse_value(&tokens[2..], field, line)?;
                m[(i, j)] += v;
                if i != j {
                    if let Some(w) = mirrored(v, symmetry) {
                        m[(j, i)] += w;
                    }
                }
                seen += 1;
            }
            if seen != nnz {
                return Err(parse_err(
                    text.lines().count(),
                    format!("declared {nnz} entries, found {seen}"),
                ));
            }
        }
        Layout::Array => {
            // Column-major; symmetric storage lists the lower triangle only
            // (strictly lower for skew-symmetric).
            let positions: Vec<(usize, usize)> = (0..cols)
                .flat_map(|j| {
                    let start = match symmetry {
                        Symmetry::General => 0,
                        Symmetry::Skew => j + 1,
                        _ => j,
                    };
                    (start..rows).map(move |i| (i, j))
                })
                .collect();
            let mut it = positions.iter();
            for (line, content) in data {
                let tokens: Vec<&str> = content.split_whitespace().collect();
                let v = parse_value(&tokens, field, line)?;
                let &(i, j) = it
                    .next()
                    .ok_or_else(|| parse_err(line, format!("more than the expected {} values", positions.len())))?;
                m[(i, j)] = v;
                if i != j {
                    if let Some(w) = mirrored(v, symmetry) {
                        m[(j, i)] = w;
                    }
                }
            }
            if it.next().is_some() {
                return Err(parse_err(
                    text.lines().count(),
                    format!("expected {} values", positions.len()),
                ));
            }
        }
    }
    Ok(m)
}

fn read(path: &Path) -> Result<String, MatrixMarketError> {
    std::fs::read_to_string(path).map_err(|source| MatrixMarketError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn load_matrix_market(path: &Path) -> Result<DenseMatrix, MatrixMarketError> {
    parse_matrix_market(&read(path)?)
}

/// Parses a vector: either a Matrix Market file with one column, or plain
/// text with one entry per line (`re` or `re im`); `%` and `#` start comments.
pub fn parse_vector(text: &str) -> Result<DenseVector, MatrixMarketError> {
    if text.trim_start().starts_with("%%MatrixMarket") {
        let m = parse_matrix_market(text)?;
        if m.cols() != 1 {
            return Err(parse_err(
                2,
                format!("vector file must have one column, found {}", m.cols()),
            ));
        }
        return Ok(m.column_vector(0));
    }
    let mut values = Vec::new();
    for (i, l) in text.lines().enumerate() {
        let t = l.trim();
        if t.is_empty() || t.starts_with('%') || t.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = t.split_whitespace().collect();
        let field = if tokens.len() == 2 { Field::Complex } else { Field::Real };
        values.push(parse_value(&tokens, field, i + 1)?);
    }
    if values.is_empty() {
        return Err(parse_err(1, "vector file has no entries"));
    }
    Ok(DenseVector::from_vec_unchecked(values))
}

pub fn load_vector(path: &Path) -> Result<DenseVector, MatrixMarketError> {
    parse_vector(&read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn real(v: f64) -> Scalar {
        Scalar::new(v, 0.0)
    }

    #[test]
    fn array_identity() {
        let m = parse_matrix_market("%%MatrixMarket matrix array real general\n2 2\n1\n0\n0\n1\n").unwrap();
        assert_eq!(m, DenseMatrix::identity(2));
    }

    #[test]
    fn symmetric_coordinate_expands() {
        let text = "%%MatrixMarket matrix coordinate real symmetric\n% comment\n2 2 1\n2 1 5\n";
        let m = parse_matrix_market(text).unwrap();
        assert_eq!(m[(1, 0)], real(5.0));
        assert_eq!(m[(0, 1)], real(5.0));
        assert_eq!(m[(0, 0)], real(0.0));
    }

    #[test]
    fn empty_coordinate_is_zero() {
        let m = parse_matrix_market("%%MatrixMarket matrix coordinate real general\n3 3 0\n").unwrap();
        assert_eq!(m, DenseMatrix::zeros(3, 3));
    }

    #[test]
    fn complex_and_hermitian() {
        let text = "%%MatrixMarket matrix coordinate complex hermitian\n2 2 2\n1 1 2 0\n2 1 1 3\n";
        let m = parse_matrix_market(text).unwrap();
        assert_eq!(m[(1, 0)], Scalar::new(1.0, 3.0));
        assert_eq!(m[(0, 1)], Scalar::new(1.0, -3.0));
    }

    #[test]
    fn skew_array_and_integer_field() {
        let text = "%%MatrixMarket matrix array integer skew-symmetric\n2 2\n4\n";
        let m = parse_matrix_market(text).unwrap();
        assert_eq!(m[(1, 0)], real(4.0));
        assert_eq!(m[(0, 1)], real(-4.0));
    }

    #[test]
    fn pattern_rejected() {
        let err = parse_matrix_market("%%MatrixMarket matrix coordinate pattern general\n2 2 1\n1 1\n").unwrap_err();
        assert!(matches!(err, MatrixMarketError::Unsupported { what: "field", .. }));
    }

    #[test]
    fn errors_carry_line_numbers() {
        let text = "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n3 1 2.0\n";
        match parse_matrix_market(text).unwrap_err() {
            MatrixMarketError::Parse { line, .. } => assert_eq!(line, 4),
            other => panic!("unexpected {other:?}"),
        }
        let text = "%%MatrixMarket matrix array real general\n2 2\n1\nx\n";
        assert!(matches!(
            parse_matrix_market(text).unwrap_err(),
            MatrixMarketError::Parse { line: 4, .. }
        ));
        assert!(matches!(
            parse_matrix_market("%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n").unwrap_err(),
            MatrixMarketError::Parse { .. }
        ));
    }

    #[test]
    fn vectors_plain_and_market() {
        let v = parse_vector("# rhs\n1\n-2.5\n0 1\n").unwrap();
        assert_eq!(v.as_slice(), &[real(1.0), real(-2.5), Scalar::new(0.0, 1.0)]);
        let v = parse_vector("%%MatrixMarket matrix array real general\n2 1\n3\n4\n").unwrap();
        assert_eq!(v, DenseVector::from_real(&[3.0, 4.0]));
        assert!(parse_vector("%%MatrixMarket matrix array real general\n1 2\n3\n4\n").is_err());
        assert!(parse_vector("\n").is_err());
    }
}
