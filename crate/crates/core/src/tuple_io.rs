//! JSON tuple files:
//! `{"n": int, "N": int, "unitary": bool, "matrices": [[[re, im], …], …]}`
//! where each matrix is a row-major list of `N²` `[re, im]` pairs. Nested
//! row lists (`N` rows of `N` pairs) are accepted on input.

use std::fmt::Write as _;
use std::path::Path;

use serde::Deserialize;

use crate::error::{QexError, Result};
use crate::expanders::GroupPresentation;
use crate::linalg::{c64, ComplexMatrix, MatrixTuple};

#[derive(Deserialize)]
#[serde(untagged)]
enum MatrixRepr {
    Flat(Vec<[f64; 2]>),
    Rows(Vec<Vec<[f64; 2]>>),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TupleFile {
    n: usize,
    #[serde(rename = "N")]
    dim: usize,
    unitary: bool,
    matrices: Vec<MatrixRepr>,
}

/// Parses a tuple document; with `"unitary": true` every member is checked
/// against the default unitarity tolerance.
pub fn tuple_from_json(text: &str) -> Result<MatrixTuple> {
    let file: TupleFile = serde_json::from_str(text)
        .map_err(|e| QexError::Parse(format!("line {} column {}: {e}", e.line(), e.column())))?;
    if file.n == 0 || file.dim == 0 {
        return Err(QexError::Parse("fields n and N must be positive".into()));
    }
    if file.matrices.len() != file.n {
        return Err(QexError::Parse(format!(
            "field n = {} but matrices has {} entries",
            file.n,
            file.matrices.len()
        )));
    }
    let dim = file.dim;
    let mut members = Vec::with_capacity(file.n);
    for (index, repr) in file.matrices.into_iter().enumerate() {
        let flat: Vec<[f64; 2]> = match repr {
            MatrixRepr::Flat(v) => v,
            MatrixRepr::Rows(rows) => {
                if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
                    return Err(QexError::Parse(format!(
                        "matrices[{index}]: expected {dim} rows of {dim} entries"
                    )));
                }
                rows.into_iter().flatten().collect()
            }
        };
        if flat.len() != dim * dim {
            return Err(QexError::Parse(format!(
                "matrices[{index}]: expected {} entries, found {}",
                dim * dim,
                flat.len()
            )));
        }
        let entries: Vec<c64> = flat.iter().map(|&[re, im]| c64::new(re, im)).collect();
        let m = ComplexMatrix::from_row_major(dim, &entries)
            .map_err(|e| QexError::Parse(format!("matrices[{index}]: {e}")))?;
        members.push(m);
    }
    if file.unitary {
        MatrixTuple::unitary(members)
    } else {
        MatrixTuple::new(members)
    }
}

fn push_float(out: &mut String, x: f64) {
    // 17 significant digits round-trip every f64.
    write!(out, "{x:.16e}").expect("write to string");
}

/// Serializes a tuple with full double precision.
pub fn tuple_to_json(t: &MatrixTuple) -> String {
    let mut out = String::new();
    write!(
        out,
        "{{\"n\": {}, \"N\": {}, \"unitary\": {}, \"matrices\": [",
        t.n(),
        t.dim(),
        t.is_unitary()
    )
    .expect("write to string");
    for (j, m) in t.iter().enumerate() {
        if j > 0 {
            out.push(',');
        }
        out.push_str("\n  [");
        for (k, z) in m.row_major().into_iter().enumerate() {
            if k > 0 {
                out.push_str(", ");
            }
            out.push('[');
            push_float(&mut out, z.re);
            out.push_str(", ");
            push_float(&mut out, z.im);
            out.push(']');
        }
        out.push(']');
    }
    out.push_str("\n]}\n");
    out
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| {
        QexError::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })
}

pub fn read_tuple_file(path: &Path) -> Result<MatrixTuple> {
    let text = read_text(path)?;
    tuple_from_json(&text).map_err(|e| match e {
        QexError::Parse(msg) => QexError::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn write_tuple_file(path: &Path, t: &MatrixTuple) -> Result<()> {
    std::fs::write(path, tuple_to_json(t))?;
    Ok(())
}

/// Single matrix written as a one-member tuple.
pub fn write_matrix_file(path: &Path, m: &ComplexMatrix) -> Result<()> {
    write_tuple_file(path, &MatrixTuple::new(vec![m.clone()])?)
}

pub fn read_group_file(path: &Path) -> Result<GroupPresentation> {
    let text = read_text(path)?;
    GroupPresentation::from_json(&text).map_err(|e| match e {
        QexError::Parse(msg) => QexError::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })
}
