//! Matrix Market coordinate files (`real`, `general` or `symmetric`).

use std::fmt::Write as _;
use std::path::Path;

use super::CsrMatrix;
use crate::error::{AmgError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
}

pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<CsrMatrix> {
    let text = std::fs::read_to_string(path)?;
    parse_matrix_market(&text)
}

/// Parses Matrix Market text. Symmetric files store the lower triangle and
/// are expanded to full storage.
pub fn parse_matrix_market(text: &str) -> Result<CsrMatrix> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));

    let (lno, header) = lines
        .next()
        .ok_or_else(|| AmgError::parse(1, "empty file"))?;
    let tokens: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" {
        return Err(AmgError::parse(lno, "expected '%%MatrixMarket matrix coordinate real <symmetry>'"));
    }
    if tokens[1] != "matrix" || tokens[2] != "coordinate" {
        return Err(AmgError::parse(lno, "only 'matrix coordinate' files are supported"));
    }
    if tokens[3] != "real" {
        return Err(AmgError::parse(lno, format!("unsupported field '{}'", tokens[3])));
    }
    let symmetry = match tokens[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        other => return Err(AmgError::parse(lno, format!("unsupported symmetry '{other}'"))),
    };

    let mut data = lines.filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('%')
    });

    let (lno, size_line) = data
        .next()
        .ok_or_else(|| AmgError::parse(lno + 1, "missing size line"))?;
    let dims: Vec<usize> = size_line
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| AmgError::parse(lno, format!("bad size line: {e}")))?;
    if dims.len() != 3 {
        return Err(AmgError::parse(lno, "size line must hold 'rows cols entries'"));
    }
    let (n_rows, n_cols, n_entries) = (dims[0], dims[1], dims[2]);
    if symmetry == Symmetry::Symmetric && n_rows != n_cols {
        return Err(AmgError::parse(lno, "symmetric file must be square"));
    }

    let mut trip = Vec::with_capacity(n_entries * 2);
    let mut read = 0usize;
    for (lno, line) in data {
        if read == n_entries {
            return Err(AmgError::parse(lno, "more entries than declared"));
        }
        let mut it = line.split_whitespace();
        let mut index = |name: &str, bound: usize| -> Result<usize> {
            let tok = it
                .next()
                .ok_or_else(|| AmgError::parse(lno, format!("missing {name} index")))?;
            let v: usize = tok
                .parse()
                .map_err(|_| AmgError::parse(lno, format!("bad {name} index '{tok}'")))?;
            if v == 0 {
                return Err(AmgError::parse(lno, format!("{name} index 0: indices are 1-based")));
            }
            if v > bound {
                return Err(AmgError::parse(lno, format!("{name} index {v} exceeds {bound}")));
            }
            Ok(v - 1)
        };
        let r = index("row", n_rows)?;
        let c = index("column", n_cols)?;
        let tok = it
            .next()
            .ok_or_else(|| AmgError::parse(lno, "missing value"))?;
        let v: f64 = tok
            .parse()
            .map_err(|_| AmgError::parse(lno, format!("bad value '{tok}'")))?;
        if it.next().is_some() {
            return Err(AmgError::parse(lno, "trailing tokens"));
        }
        match symmetry {
            Symmetry::General => trip.push((r, c, v)),
            Symmetry::Symmetric => {
                if r < c {
                    return Err(AmgError::parse(lno, "symmetric file entry above the diagonal"));
                }
                trip.push((r, c, v));
                if r != c {
                    trip.push((c, r, v));
                }
            }
        }
        read += 1;
    }
    if read != n_entries {
        return Err(AmgError::parse(
            text.lines().count(),
            format!("declared {n_entries} entries, found {read}"),
        ));
    }
    CsrMatrix::from_triplets(n_rows, n_cols, &trip)
}

/// Formats a matrix as a `general` coordinate file. Values use the shortest
/// decimal form that parses back to the same bits.
pub fn format_matrix_market(a: &CsrMatrix) -> String {
    let mut s = String::with_capacity(32 * a.nnz() + 64);
    s.push_str("%%MatrixMarket matrix coordinate real general\n");
    let _ = writeln!(s, "{} {} {}", a.n_rows(), a.n_cols(), a.nnz());
    for r in 0..a.n_rows() {
        let (cols, vals) = a.row(r);
        for (&c, &v) in cols.iter().zip(vals) {
            let _ = writeln!(s, "{} {} {:e}", r + 1, c + 1, v);
        }
    }
    s
}

pub fn write_matrix_market(a: &CsrMatrix, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, format_matrix_market(a))?;
    Ok(())
}
