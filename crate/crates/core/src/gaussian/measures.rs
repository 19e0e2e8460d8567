use nalgebra::{Cholesky, Schur};

use super::{check_mode_set, symplectic_form, CovarianceMatrix, SymplecticSpectrum, TOL};
use crate::error::{Error, Result};

/// Real parts of the `Ω v` spectrum larger than this (relative) mean the
/// matrix is not a covariance matrix in any useful sense.
const DEGENERACY_TOL: f64 = 1e-7;

/// Symplectic eigenvalues from the spectrum of `iΩv`.
///
/// With `v = L Lᵀ`, `Lᵀ Ω L` is similar to `Ω v` and antisymmetric, so its
/// eigenvalues are `±iσ` with `σ` its singular values; an SVD gives them
/// without any convergence issues. Non-positive-definite input falls back to a
/// Schur decomposition of `Ω v`, which reports why it is not a state.
pub fn symplectic_eigenvalues(cm: &CovarianceMatrix) -> Result<SymplecticSpectrum> {
    let n = cm.n_modes();
    let omega = symplectic_form(n);
    let mut moduli: Vec<f64> = match Cholesky::new(cm.matrix().clone()) {
        Some(chol) => {
            let l = chol.l();
            (l.transpose() * &omega * l).singular_values().iter().copied().collect()
        }
        None => {
            let eig = Schur::try_new(&omega * cm.matrix(), f64::EPSILON, 10_000)
                .ok_or_else(|| Error::numerical("Schur decomposition did not converge"))?
                .complex_eigenvalues();
            let scale = eig.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
            if let Some(z) = eig.iter().find(|z| z.re.abs() > DEGENERACY_TOL * scale) {
                return Err(Error::numerical(format!(
                    "symplectic spectrum is not purely imaginary (eigenvalue {:.6e}{:+.6e}i); \
                     matrix is not positive definite",
                    z.re, z.im
                )));
            }
            eig.iter().map(|z| z.im.abs()).collect()
        }
    };
    let scale = moduli.iter().copied().fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    moduli.sort_by(f64::total_cmp);
    let values: Vec<f64> = moduli.chunks_exact(2).map(|p| 0.5 * (p[0] + p[1])).collect();
    if let Some(p) = moduli.chunks_exact(2).find(|p| (p[1] - p[0]).abs() > DEGENERACY_TOL * scale) {
        return Err(Error::numerical(format!(
            "unpaired symplectic moduli {:.6e} and {:.6e}",
            p[0], p[1]
        )));
    }
    Ok(SymplecticSpectrum { values })
}

/// Bona-fide condition: every symplectic eigenvalue at least 1/2 (within [`TOL`]).
pub fn check_physical(cm: &CovarianceMatrix) -> bool {
    check_physical_tol(cm, TOL)
}

pub(crate) fn check_physical_tol(cm: &CovarianceMatrix, tol: f64) -> bool {
    match symplectic_eigenvalues(cm) {
        Ok(spec) => spec.min() >= 0.5 - tol,
        Err(_) => false,
    }
}

pub(crate) fn require_physical(cm: &CovarianceMatrix) -> Result<()> {
    let spec = symplectic_eigenvalues(cm)
        .map_err(|e| Error::validation(format!("unphysical covariance matrix: {e}")))?;
    if spec.min() < 0.5 - TOL {
        return Err(Error::validation(format!(
            "unphysical covariance matrix: smallest symplectic eigenvalue {:.12} < 1/2",
            spec.min()
        )));
    }
    Ok(())
}

/// Partial transposition of the listed modes: flips the sign of their momenta.
pub fn partial_transpose(cm: &CovarianceMatrix, modes: &[usize]) -> Result<CovarianceMatrix> {
    check_mode_set(modes, cm.n_modes())?;
    let mut m = cm.matrix().clone();
    for &k in modes {
        let p = 2 * k + 1;
        for j in 0..m.ncols() {
            if j != p {
                m[(p, j)] = -m[(p, j)];
                m[(j, p)] = -m[(j, p)];
            }
        }
    }
    Ok(CovarianceMatrix { entries: m })
}

fn validate_partition(cm: &CovarianceMatrix, partition: &[usize]) -> Result<()> {
    check_mode_set(partition, cm.n_modes())?;
    if partition.len() == cm.n_modes() {
        return Err(Error::validation("partition must be a proper subset of the modes"));
    }
    Ok(())
}

/// Logarithmic negativity across `partition` vs. the rest (natural log):
/// `Σ_k max(0, -ln 2ν̃_k)` over the partially transposed spectrum.
pub fn log_negativity(cm: &CovarianceMatrix, partition: &[usize]) -> Result<f64> {
    validate_partition(cm, partition)?;
    require_physical(cm)?;
    log_negativity_unchecked(cm, partition)
}

/// Same as [`log_negativity`] without the physicality gate, for trajectories
/// whose physicality is checked separately.
pub(crate) fn log_negativity_unchecked(cm: &CovarianceMatrix, partition: &[usize]) -> Result<f64> {
    let pt = partial_transpose(cm, partition)?;
    let spec = symplectic_eigenvalues(&pt)?;
    Ok(spec.values.iter().map(|&nu| (-(2.0 * nu).ln()).max(0.0)).sum())
}

/// Simon's criterion for two-mode states: separable iff ν̃₋ ≥ 1/2.
pub fn ppt_separable(cm: &CovarianceMatrix) -> Result<bool> {
    if cm.n_modes() != 2 {
        return Err(Error::validation("PPT test expects a two-mode state"));
    }
    require_physical(cm)?;
    let pt = partial_transpose(cm, &[1])?;
    Ok(symplectic_eigenvalues(&pt)?.min() >= 0.5 - TOL)
}

/// Mean excitation number of a single mode: `(v_qq + v_pp)/2 - 1/2`.
pub fn mean_occupation(cm: &CovarianceMatrix) -> Result<f64> {
    if cm.n_modes() != 1 {
        return Err(Error::validation("mean occupation expects a single-mode state"));
    }
    require_physical(cm)?;
    let m = cm.matrix();
    Ok((0.5 * (m[(0, 0)] + m[(1, 1)]) - 0.5).max(0.0))
}

/// Closed form for two modes, `ν±² = (Δ ± √(Δ² − 4 det v))/2` with
/// `Δ = det α₁ + det α₂ + 2 det γ`. Used as an independent check.
pub fn two_mode_spectrum_closed_form(cm: &CovarianceMatrix) -> Option<(f64, f64)> {
    if cm.n_modes() != 2 {
        return None;
    }
    let delta = cm.block(0, 0).determinant() + cm.block(1, 1).determinant()
        + 2.0 * cm.block(0, 1).determinant();
    let det = cm.matrix().determinant();
    let disc = (delta * delta - 4.0 * det).max(0.0).sqrt();
    Some((((delta - disc) / 2.0).max(0.0).sqrt(), ((delta + disc) / 2.0).sqrt()))
}

#[cfg(test)]
fn omega_v(cm: &CovarianceMatrix) -> nalgebra::DMatrix<f64> {
    symplectic_form(cm.n_modes()) * cm.matrix()
}
