//! Matrix Market reading and writing for dense complex matrices.
//!
//! Reads `array` and `coordinate` layouts with `real`, `integer`, `complex`
//! or `pattern` fields and any symmetry; always writes
//! `array complex general`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use pencil_core::{c64, CMatrix};

use crate::output::write_atomic;

#[derive(Debug, thiserror::Error)]
pub enum MtxError {
    #[error("{}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: line {line}: {message}", path.display())]
    Parse { path: PathBuf, line: usize, message: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Layout {
    Array,
    Coordinate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Field {
    Real,
    Integer,
    Complex,
    Pattern,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
    SkewSymmetric,
    Hermitian,
}

struct Header {
    layout: Layout,
    field: Field,
    symmetry: Symmetry,
}

fn parse_header(line: &str) -> Result<Header, String> {
    let words: Vec<String> = line.split_whitespace().map(str::to_ascii_lowercase).collect();
    if words.len() != 5 || words[0] != "%%matrixmarket" || words[1] != "matrix" {
        return Err(format!("expected '%%MatrixMarket matrix <layout> <field> <symmetry>', got '{line}'"));
    }
    let layout = match words[2].as_str() {
        "array" => Layout::Array,
        "coordinate" => Layout::Coordinate,
        other => return Err(format!("unknown layout '{other}'")),
    };
    let field = match words[3].as_str() {
        "real" | "double" => Field::Real,
        "integer" => Field::Integer,
        "complex" => Field::Complex,
        "pattern" => Field::Pattern,
        other => return Err(format!("unknown field '{other}'")),
    };
    let symmetry = match words[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "skew-symmetric" => Symmetry::SkewSymmetric,
        "hermitian" => Symmetry::Hermitian,
        other => return Err(format!("unknown symmetry '{other}'")),
    };
    if layout == Layout::Array && field == Field::Pattern {
        return Err("pattern field requires coordinate layout".into());
    }
    if symmetry == Symmetry::Hermitian && field != Field::Complex {
        return Err("hermitian symmetry requires complex field".into());
    }
    Ok(Header { layout, field, symmetry })
}

fn parse_number(token: &str) -> Result<f64, String> {
    token.parse::<f64>().map_err(|_| format!("invalid number '{token}'"))
}

fn parse_index(token: &str, bound: usize) -> Result<usize, String> {
    let i: usize = token.parse().map_err(|_| format!("invalid index '{token}'"))?;
    if i == 0 || i > bound {
        return Err(format!("index {i} outside 1..={bound}"));
    }
    Ok(i - 1)
}

fn parse_value(tokens: &[&str], field: Field) -> Result<c64, String> {
    let want = match field {
        Field::Complex => 2,
        Field::Real | Field::Integer => 1,
        Field::Pattern => 0,
    };
    if tokens.len() != want {
        return Err(format!("expected {want} value token(s), found {}", tokens.len()));
    }
    Ok(match field {
        Field::Complex => c64::new(parse_number(tokens[0])?, parse_number(tokens[1])?),
        Field::Real | Field::Integer => c64::new(parse_number(tokens[0])?, 0.0),
        Field::Pattern => c64::new(1.0, 0.0),
    })
}

fn mirrored(z: c64, symmetry: Symmetry) -> c64 {
    match symmetry {
        Symmetry::General | Symmetry::Symmetric => z,
        Symmetry::SkewSymmetric => -z,
        Symmetry::Hermitian => z.conj(),
    }
}

/// Parses Matrix Market text; `path` is used only in error messages.
pub fn parse_matrix(text: &str, path: &Path) -> Result<CMatrix, MtxError> {
    let fail = |line: usize, message: String| MtxError::Parse { path: path.to_path_buf(), line, message };
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, first) = lines.next().ok_or_else(|| fail(1, "empty file".into()))?;
    let header = parse_header(first.trim()).map_err(|m| fail(1, m))?;
    let mut body = lines.filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('%')
    });

    let (size_no, size_line) = body.next().ok_or_else(|| fail(1, "missing size line".into()))?;
    let dims: Vec<&str> = size_line.split_whitespace().collect();
    let want_dims = if header.layout == Layout::Array { 2 } else { 3 };
    if dims.len() != want_dims {
        return Err(fail(size_no, format!("expected {want_dims} size fields, found {}", dims.len())));
    }
    let parse_dim = |t: &str| t.parse::<usize>().map_err(|_| fail(size_no, format!("invalid size '{t}'")));
    let rows = parse_dim(dims[0])?;
    let cols = parse_dim(dims[1])?;
    if header.symmetry != Symmetry::General && rows != cols {
        return Err(fail(size_no, format!("{rows}x{cols} matrix cannot be {:?}", header.symmetry)));
    }
    let mut m = CMatrix::zeros(rows, cols);

    match header.layout {
        Layout::Array => {
            // Column-major; symmetric variants store the lower triangle only.
            let mut slots = Vec::new();
            for j in 0..cols {
                let start = match header.symmetry {
                    Symmetry::General => 0,
                    Symmetry::Symmetric | Symmetry::Hermitian => j,
                    Symmetry::SkewSymmetric => j + 1,
                };
                slots.extend((start..rows).map(|i| (i, j)));
            }
            let mut count = 0;
            for (no, line) in body {
                let tokens: Vec<&str> = line.split_whitespace().collect();
                let z = parse_value(&tokens, header.field).map_err(|msg| fail(no, msg))?;
                let &(i, j) = slots
                    .get(count)
                    .ok_or_else(|| fail(no, format!("more than {} entries", slots.len())))?;
                m[(i, j)] = z;
                if i != j && header.symmetry != Symmetry::General {
                    m[(j, i)] = mirrored(z, header.symmetry);
                }
                count += 1;
            }
            if count != slots.len() {
                return Err(fail(size_no, format!("expected {} entries, found {count}", slots.len())));
            }
        }
        Layout::Coordinate => {
            let nnz = dims[2]
                .parse::<usize>()
                .map_err(|_| fail(size_no, format!("invalid entry count '{}'", dims[2])))?;
            let mut count = 0;
            for (no, line) in body {
                let tokens: Vec<&str> = line.split_whitespace().collect();
                if tokens.len() < 2 {
                    return Err(fail(no, "expected row and column indices".into()));
                }
                let i = parse_index(tokens[0], rows).map_err(|msg| fail(no, msg))?;
                let j = parse_index(tokens[1], cols).map_err(|msg| fail(no, msg))?;
                let z = parse_value(&tokens[2..], header.field).map_err(|msg| fail(no, msg))?;
                m[(i, j)] += z;
                if i != j && header.symmetry != Symmetry::General {
                    m[(j, i)] += mirrored(z, header.symmetry);
                }
                count += 1;
            }
            if count != nnz {
                return Err(fail(size_no, format!("expected {nnz} entries, found {count}")));
            }
        }
    }
    Ok(m)
}

pub fn read_matrix(path: &Path) -> Result<CMatrix, MtxError> {
    let text = std::fs::read_to_string(path).map_err(|source| MtxError::Io { path: path.to_path_buf(), source })?;
    parse_matrix(&text, path)
}

/// `array complex general` text; `{:e}` formatting round-trips every `f64`.
pub fn format_matrix(m: &CMatrix) -> String {
    let mut out = String::with_capacity(48 * m.nrows() * m.ncols() + 64);
    out.push_str("%%MatrixMarket matrix array complex general\n");
    let _ = writeln!(out, "{} {}", m.nrows(), m.ncols());
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let z = m[(i, j)];
            let _ = writeln!(out, "{:e} {:e}", z.re, z.im);
        }
    }
    out
}

pub fn write_matrix(path: &Path, m: &CMatrix) -> Result<(), MtxError> {
    write_atomic(path, format_matrix(m).as_bytes()).map_err(|source| MtxError::Io { path: path.to_path_buf(), source })
}
