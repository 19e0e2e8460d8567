//! Plain-text covariance matrix files: first line `n_modes`, then `2n` rows of
//! `2n` whitespace-separated decimals. Lines starting with `#` are comments.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;

use super::{check_physical, symmetrize, CovarianceMatrix, SYMMETRY_TOL};
use crate::error::{Error, Result};

/// Formats with 17 significant digits so that a re-read is bit-identical.
pub fn write_cm_text(cm: &CovarianceMatrix) -> String {
    let mut out = String::new();
    let m = cm.matrix();
    writeln!(out, "{}", cm.n_modes()).unwrap();
    for r in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|c| format!("{:.16e}", m[(r, c)])).collect();
        writeln!(out, "{}", row.join(" ")).unwrap();
    }
    out
}

/// Parses the text format. Without `force`, asymmetric (beyond 1e-8) or
/// unphysical matrices are rejected; with it they are symmetrised and accepted
/// with a warning.
pub fn parse_cm_text(text: &str, force: bool) -> Result<CovarianceMatrix> {
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header = lines.next().ok_or_else(|| Error::validation("empty covariance matrix file"))?;
    let n_modes: usize = header
        .parse()
        .map_err(|_| Error::validation(format!("first line must be n_modes, got {header:?}")))?;
    if n_modes == 0 {
        return Err(Error::validation("n_modes must be positive"));
    }
    let dim = 2 * n_modes;
    let mut entries = Vec::with_capacity(dim * dim);
    for (r, line) in lines.by_ref().take(dim).enumerate() {
        let row: Vec<f64> = line
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>()
                    .map_err(|_| Error::validation(format!("row {}: bad number {tok:?}", r + 1)))
            })
            .collect::<Result<_>>()?;
        if row.len() != dim {
            return Err(Error::validation(format!(
                "row {} has {} entries, expected {dim}",
                r + 1,
                row.len()
            )));
        }
        entries.extend(row);
    }
    if entries.len() != dim * dim {
        return Err(Error::validation(format!(
            "expected {dim} rows, found {}",
            entries.len() / dim
        )));
    }
    if lines.next().is_some() {
        return Err(Error::validation(format!("trailing data after {dim} rows")));
    }

    let m = DMatrix::from_row_slice(dim, dim, &entries);
    let cm = if force {
        let asym = (&m - m.transpose()).amax();
        if asym > SYMMETRY_TOL * m.amax().max(1.0) {
            log::warn!("forcing asymmetric covariance matrix (max asymmetry {asym:.3e})");
        }
        CovarianceMatrix::new(symmetrize(m))?
    } else {
        CovarianceMatrix::new(m)?
    };
    if !check_physical(&cm) {
        if force {
            log::warn!("accepting unphysical covariance matrix (--force)");
        } else {
            return Err(Error::validation(
                "covariance matrix violates the uncertainty principle (use --force to override)",
            ));
        }
    }
    Ok(cm)
}

pub fn read_cm_file(path: &Path, force: bool) -> Result<CovarianceMatrix> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| Error::Io { path: path.display().to_string(), source })?;
    parse_cm_text(&text, force)
}

pub fn write_cm_file(path: &Path, cm: &CovarianceMatrix) -> Result<()> {
    std::fs::write(path, write_cm_text(cm))
        .map_err(|source| Error::Io { path: path.display().to_string(), source })
}
