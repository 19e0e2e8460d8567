use nalgebra::DMatrix;
use rand::Rng;

use super::{CovarianceMatrix, RotationAngles};

/// `n`-mode vacuum, `½·I`.
pub fn vacuum(n_modes: usize) -> CovarianceMatrix {
    CovarianceMatrix::new(DMatrix::identity(2 * n_modes, 2 * n_modes) * 0.5)
        .expect("vacuum is a valid covariance matrix")
}

/// Single-mode thermal state with mean occupation `nbar`.
pub fn thermal(nbar: f64) -> CovarianceMatrix {
    let v = nbar.max(0.0) + 0.5;
    CovarianceMatrix::new(DMatrix::from_diagonal_element(2, 2, v))
        .expect("thermal state is a valid covariance matrix")
}

/// Single-mode squeezed vacuum: `diag(e^{-2r}, e^{2r})/2` rotated by `phase`.
pub fn squeezed_vacuum(r: f64, phase: f64) -> CovarianceMatrix {
    let base = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
        0.5 * (-2.0 * r).exp(),
        0.5 * (2.0 * r).exp(),
    ]));
    let rot = RotationAngles { angles: vec![phase] }.matrix();
    let m = &rot * base * rot.transpose();
    CovarianceMatrix::new(super::symmetrize(m)).expect("squeezed vacuum is valid")
}

/// Symmetric squeezed-thermal pair `[[a I, c Z], [c Z, a I]]` with
/// `a = nbar + 1/2` and `Z = diag(1, -1)`.
pub fn squeezed_thermal_pair(nbar: f64, c: f64) -> CovarianceMatrix {
    let a = nbar + 0.5;
    #[rustfmt::skip]
    let rows = [
        a,   0.0, c,   0.0,
        0.0, a,   0.0, -c,
        c,   0.0, a,   0.0,
        0.0, -c,  0.0, a,
    ];
    CovarianceMatrix::from_rows(2, &rows).expect("squeezed thermal pair is symmetric")
}

/// Two-mode squeezed vacuum with squeezing `r`.
pub fn two_mode_squeezed_vacuum(r: f64) -> CovarianceMatrix {
    let a = (2.0 * r).cosh() / 2.0;
    let c = (2.0 * r).sinh() / 2.0;
    squeezed_thermal_pair(a - 0.5, c)
}

/// Random physical `n`-mode state: `S diag(ν) Sᵀ` with random symplectic `S`
/// (local squeezers, rotations, beam splitters, two-mode squeezers) and
/// symplectic eigenvalues `ν ≥ 1/2`.
pub fn random_physical<R: Rng + ?Sized>(rng: &mut R, n_modes: usize) -> CovarianceMatrix {
    let dim = 2 * n_modes;
    let mut diag = DMatrix::zeros(dim, dim);
    for k in 0..n_modes {
        // Mix of near-pure and mixed modes.
        let nu = if rng.random_bool(0.25) { 0.5 } else { 0.5 + rng.random_range(0.0..2.0f64).powi(2) };
        diag[(2 * k, 2 * k)] = nu;
        diag[(2 * k + 1, 2 * k + 1)] = nu;
    }
    let mut s = DMatrix::identity(dim, dim);
    for _ in 0..(n_modes + 1) {
        for k in 0..n_modes {
            s = local_gate(dim, k, rng.random_range(0.0..std::f64::consts::TAU), rng.random_range(-0.5..0.5))
                * s;
        }
        if n_modes > 1 {
            let i = rng.random_range(0..n_modes);
            let mut j = rng.random_range(0..n_modes - 1);
            if j >= i {
                j += 1;
            }
            s = two_mode_gate(dim, i, j, rng.random_range(0.0..std::f64::consts::TAU), rng.random_range(-0.6..0.6))
                * s;
        }
    }
    let v = &s * diag * s.transpose();
    CovarianceMatrix::new(super::symmetrize(v)).expect("random state is symmetric")
}

fn local_gate(dim: usize, k: usize, theta: f64, r: f64) -> DMatrix<f64> {
    let (sn, cs) = theta.sin_cos();
    let mut g = DMatrix::identity(dim, dim);
    let (er, emr) = (r.exp(), (-r).exp());
    g[(2 * k, 2 * k)] = cs * er;
    g[(2 * k, 2 * k + 1)] = sn * er;
    g[(2 * k + 1, 2 * k)] = -sn * emr;
    g[(2 * k + 1, 2 * k + 1)] = cs * emr;
    g
}

/// Beam splitter with angle `theta` followed by two-mode squeezing `r`.
fn two_mode_gate(dim: usize, i: usize, j: usize, theta: f64, r: f64) -> DMatrix<f64> {
    let (sn, cs) = theta.sin_cos();
    let mut bs = DMatrix::identity(dim, dim);
    for q in 0..2 {
        let (a, b) = (2 * i + q, 2 * j + q);
        bs[(a, a)] = cs;
        bs[(a, b)] = sn;
        bs[(b, a)] = -sn;
        bs[(b, b)] = cs;
    }
    let (ch, sh) = (r.cosh(), r.sinh());
    let mut tms = DMatrix::identity(dim, dim);
    for q in 0..2 {
        let sign = if q == 0 { 1.0 } else { -1.0 };
        let (a, b) = (2 * i + q, 2 * j + q);
        tms[(a, a)] = ch;
        tms[(b, b)] = ch;
        tms[(a, b)] = sign * sh;
        tms[(b, a)] = sign * sh;
    }
    tms * bs
}
