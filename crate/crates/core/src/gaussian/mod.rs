//! Gaussian states at the covariance-matrix level.
//!
//! Quadratures are ordered mode by mode, `(q_1, p_1, q_2, p_2, ...)`, in units
//! where the vacuum variance is 1/2. Mode indices in this API are 0-based.

mod discord;
mod io;
mod measures;
mod states;

pub use discord::{entropy_function, gaussian_discord, DiscordOptions, DiscordReport};
pub use io::{read_cm_file, parse_cm_text, write_cm_file, write_cm_text};
pub use measures::{
    check_physical, log_negativity, mean_occupation, partial_transpose, ppt_separable,
    symplectic_eigenvalues, two_mode_spectrum_closed_form,
};
pub use states::{
    random_physical, squeezed_thermal_pair, squeezed_vacuum, thermal, two_mode_squeezed_vacuum,
    vacuum,
};

use nalgebra::{DMatrix, Matrix2};

use crate::error::{Error, Result};

/// Tolerance used for physicality, separability and clamping of measures.
pub const TOL: f64 = 1e-9;

/// Relative asymmetry accepted on construction.
pub const SYMMETRY_TOL: f64 = 1e-8;

/// Symmetric `2n x 2n` matrix of quadrature second moments.
///
/// Construction checks shape and symmetry (and symmetrises away the residual);
/// physicality is a separate question answered by [`check_physical`], so that
/// unphysical matrices can still be represented and rejected where it matters.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    entries: DMatrix<f64>,
}

impl CovarianceMatrix {
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        let (rows, cols) = entries.shape();
        if rows != cols || rows == 0 || rows % 2 != 0 {
            return Err(Error::validation(format!(
                "covariance matrix must be square with even nonzero size, got {rows}x{cols}"
            )));
        }
        if entries.iter().any(|x| !x.is_finite()) {
            return Err(Error::validation("covariance matrix has non-finite entries"));
        }
        let scale = entries.amax().max(1.0);
        let asym = (&entries - entries.transpose()).amax();
        if asym > SYMMETRY_TOL * scale {
            return Err(Error::validation(format!(
                "covariance matrix is not symmetric (max |v_ij - v_ji| = {asym:.3e})"
            )));
        }
        if let Some(i) = (0..rows).find(|&i| entries[(i, i)] <= 0.0) {
            return Err(Error::validation(format!(
                "diagonal entry {i} is not positive ({:.6e})",
                entries[(i, i)]
            )));
        }
        Ok(Self { entries: symmetrize(entries) })
    }

    /// Builds from row-major entries.
    pub fn from_rows(n_modes: usize, rows: &[f64]) -> Result<Self> {
        let dim = 2 * n_modes;
        if rows.len() != dim * dim {
            return Err(Error::validation(format!(
                "expected {} entries for {n_modes} modes, got {}",
                dim * dim,
                rows.len()
            )));
        }
        Self::new(DMatrix::from_row_slice(dim, dim, rows))
    }

    /// Block-diagonal direct sum of states, modes in argument order.
    pub fn direct_sum(parts: &[&CovarianceMatrix]) -> Result<Self> {
        let dim: usize = parts.iter().map(|p| p.dim()).sum();
        if dim == 0 {
            return Err(Error::validation("direct sum of zero states"));
        }
        let mut m = DMatrix::zeros(dim, dim);
        let mut offset = 0;
        for p in parts {
            let d = p.dim();
            m.view_mut((offset, offset), (d, d)).copy_from(&p.entries);
            offset += d;
        }
        Self::new(m)
    }

    pub fn n_modes(&self) -> usize {
        self.entries.nrows() / 2
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.entries
    }

    /// The 2x2 block coupling mode `i` (rows) to mode `j` (columns).
    pub fn block(&self, i: usize, j: usize) -> Matrix2<f64> {
        let b = self.entries.fixed_view::<2, 2>(2 * i, 2 * j);
        Matrix2::new(b[(0, 0)], b[(0, 1)], b[(1, 0)], b[(1, 1)])
    }

    /// Quadrature reorder/select: output mode `k` is input mode `order[k]`.
    pub fn permute_modes(&self, order: &[usize]) -> Result<Self> {
        let n = self.n_modes();
        check_mode_set(order, n)?;
        let dim = 2 * order.len();
        let idx: Vec<usize> = order.iter().flat_map(|&m| [2 * m, 2 * m + 1]).collect();
        let m = DMatrix::from_fn(dim, dim, |r, c| self.entries[(idx[r], idx[c])]);
        Ok(Self { entries: m })
    }
}

pub(crate) fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    let t = m.transpose();
    (m + t) * 0.5
}

fn check_mode_set(modes: &[usize], n_modes: usize) -> Result<()> {
    if modes.is_empty() {
        return Err(Error::validation("mode set is empty"));
    }
    let mut seen = vec![false; n_modes];
    for &m in modes {
        if m >= n_modes {
            return Err(Error::validation(format!(
                "mode index {m} out of range for {n_modes} modes"
            )));
        }
        if std::mem::replace(&mut seen[m], true) {
            return Err(Error::validation(format!("mode index {m} repeated")));
        }
    }
    Ok(())
}

/// Symplectic eigenvalues, ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticSpectrum {
    pub values: Vec<f64>,
}

impl SymplecticSpectrum {
    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        *self.values.last().expect("spectrum is never empty")
    }
}

/// Per-mode phase-space rotation angles in radians.
#[derive(Debug, Clone, PartialEq)]
pub struct RotationAngles {
    pub angles: Vec<f64>,
}

impl RotationAngles {
    pub fn new(angles: Vec<f64>) -> Result<Self> {
        if angles.iter().any(|a| !a.is_finite()) {
            return Err(Error::validation("rotation angles must be finite"));
        }
        Ok(Self { angles })
    }

    pub fn zeros(n_modes: usize) -> Self {
        Self { angles: vec![0.0; n_modes] }
    }

    /// Angles reduced to `[0, 2pi)`.
    pub fn canonical(&self) -> Self {
        let tau = std::f64::consts::TAU;
        Self { angles: self.angles.iter().map(|a| a.rem_euclid(tau)).collect() }
    }

    /// `R = ⊕ [[cos, sin], [-sin, cos]]`.
    pub fn matrix(&self) -> DMatrix<f64> {
        let dim = 2 * self.angles.len();
        let mut r = DMatrix::zeros(dim, dim);
        for (k, &theta) in self.angles.iter().enumerate() {
            let (s, c) = theta.sin_cos();
            r[(2 * k, 2 * k)] = c;
            r[(2 * k, 2 * k + 1)] = s;
            r[(2 * k + 1, 2 * k)] = -s;
            r[(2 * k + 1, 2 * k + 1)] = c;
        }
        r
    }
}

/// Standard symplectic form `⊕ [[0, 1], [-1, 0]]`.
pub fn symplectic_form(n_modes: usize) -> DMatrix<f64> {
    let mut om = DMatrix::zeros(2 * n_modes, 2 * n_modes);
    for k in 0..n_modes {
        om[(2 * k, 2 * k + 1)] = 1.0;
        om[(2 * k + 1, 2 * k)] = -1.0;
    }
    om
}

/// `R v R^T` with one angle per mode.
pub fn rotate_local(cm: &CovarianceMatrix, angles: &RotationAngles) -> Result<CovarianceMatrix> {
    if angles.angles.len() != cm.n_modes() {
        return Err(Error::validation(format!(
            "{} rotation angles for {} modes",
            angles.angles.len(),
            cm.n_modes()
        )));
    }
    let r = angles.matrix();
    let rotated = &r * cm.matrix() * r.transpose();
    Ok(CovarianceMatrix { entries: symmetrize(rotated) })
}

/// Gaussian partial trace: principal submatrix on `keep` (in the given order).
pub fn reduce(cm: &CovarianceMatrix, keep: &[usize]) -> Result<CovarianceMatrix> {
    cm.permute_modes(keep)
}

/// Zeroes every inter-mode block, leaving the product of the single-mode reductions.
pub fn strip_correlations(cm: &CovarianceMatrix) -> CovarianceMatrix {
    let mut m = cm.matrix().clone();
    let n = cm.n_modes();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                m.view_mut((2 * i, 2 * j), (2, 2)).fill(0.0);
            }
        }
    }
    CovarianceMatrix { entries: m }
}
