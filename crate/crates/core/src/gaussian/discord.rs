//! Two-mode Gaussian discord.
//!
//! `D = f(x₂) − f(m₋) − f(m₊) + inf f(x_ε)` with every argument expressed in
//! the `f`-convention (vacuum = 1): `x₂ = 2√det α₂`, `m± = 2μ±` and
//! `x_ε = 2√det ε`, where `ε = α₁ − γ(α₂ + v₀)⁻¹γᵀ` is the conditional state of
//! the unmeasured mode after a Gaussian measurement with seed `v₀` on the
//! measured one. `f` is increasing, so the infimum is taken over `det ε`.

use nalgebra::{Matrix2, SymmetricEigen, Vector2};

use super::measures::require_physical;
use super::{symplectic_eigenvalues, CovarianceMatrix, TOL};
use crate::error::{Error, Result};

/// Controls for the infimum search over single-mode rotated squeezed seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscordOptions {
    /// Squeezing range searched beyond the point where the seed matches the
    /// measured mode's own width, `½ ln(2√det α₂)`.
    pub s_max: f64,
    pub coarse_s: usize,
    pub coarse_phi: usize,
    /// Width at which each golden-section search stops.
    pub resolution: f64,
    /// Iteration cap for each golden-section search.
    pub max_refinements: usize,
    /// Also evaluate the `s → ∞` (homodyne) limit exactly.
    pub include_homodyne_limit: bool,
}

impl Default for DiscordOptions {
    fn default() -> Self {
        Self {
            s_max: 5.0,
            coarse_s: 41,
            coarse_phi: 48,
            resolution: 1e-10,
            max_refinements: 100,
            include_homodyne_limit: true,
        }
    }
}

/// Discord value plus where the infimum was found.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscordReport {
    pub discord: f64,
    pub min_det_epsilon: f64,
    /// Optimal seed, expressed in the frame where the measured mode's block is
    /// proportional to the identity. Squeezing is `f64::INFINITY` for the homodyne limit.
    pub seed_squeezing: f64,
    pub seed_angle: f64,
}

/// `f(x) = ((x+1)/2) ln((x+1)/2) − ((x−1)/2) ln((x−1)/2)`, zero for `x ≤ 1`.
pub fn entropy_function(x: f64) -> f64 {
    if x <= 1.0 {
        return 0.0;
    }
    let plus = 0.5 * (x + 1.0);
    let minus = 0.5 * (x - 1.0);
    plus * plus.ln() - minus * minus.ln()
}

/// Gaussian discord with the measurement on `measured_mode` (0 or 1).
pub fn gaussian_discord(
    cm: &CovarianceMatrix,
    measured_mode: usize,
    opts: &DiscordOptions,
) -> Result<DiscordReport> {
    if cm.n_modes() != 2 {
        return Err(Error::validation("discord expects a two-mode state"));
    }
    if measured_mode > 1 {
        return Err(Error::validation(format!("measured mode {measured_mode} not in {{0, 1}}")));
    }
    require_physical(cm)?;
    let v = if measured_mode == 1 { cm.clone() } else { cm.permute_modes(&[1, 0])? };
    discord_measuring_second(&v, opts)
}

fn discord_measuring_second(v: &CovarianceMatrix, opts: &DiscordOptions) -> Result<DiscordReport> {
    let alpha1 = v.block(0, 0);
    let alpha2 = v.block(1, 1);
    let gamma = v.block(0, 1);
    let spec = symplectic_eigenvalues(v)?;

    // A local symplectic on the measured mode maps pure seeds onto pure seeds,
    // so the infimum can be searched with α₂ brought to b·I. This keeps the
    // optimal-angle valley wide when α₂ is strongly squeezed.
    let s2 = normalizing_symplectic(&alpha2)?;
    let b = alpha2.determinant().max(0.0).sqrt();
    let search = SchurSearch { alpha1, alpha2: Matrix2::identity() * b, gamma: gamma * s2.transpose() };
    let (min_det, s_opt, phi_opt) = search.infimum(opts)?;

    // The conditional state is itself a state: det ε ≥ 1/4.
    if min_det < 0.25 * (1.0 - 1e-6) {
        return Err(Error::numerical(format!(
            "infimum det ε = {min_det:.12e} below the vacuum bound (seed s = {s_opt}, φ = {phi_opt})"
        )));
    }

    let x2 = 2.0 * alpha2.determinant().max(0.0).sqrt();
    let x_eps = 2.0 * min_det.max(0.0).sqrt();
    let d = entropy_function(x2) - entropy_function(2.0 * spec.values[0])
        - entropy_function(2.0 * spec.values[1])
        + entropy_function(x_eps);
    let discord = if d >= 0.0 {
        d
    } else if d >= -TOL {
        0.0
    } else {
        return Err(Error::numerical(format!(
            "negative discord {d:.3e} (det ε = {min_det:.12e}, x₂ = {x2}, μ = {:?})",
            spec.values
        )));
    };
    Ok(DiscordReport { discord, min_det_epsilon: min_det, seed_squeezing: s_opt, seed_angle: phi_opt })
}

/// `S = (det α)^{1/4} α^{-1/2}`, symplectic (unit determinant) with `S α Sᵀ = √det α · I`.
fn normalizing_symplectic(alpha: &Matrix2<f64>) -> Result<Matrix2<f64>> {
    let eig = SymmetricEigen::new(*alpha);
    if eig.eigenvalues.iter().any(|&l| !(l > 0.0)) {
        return Err(Error::numerical("measured-mode block is not positive definite"));
    }
    let inv_sqrt = eig.eigenvectors
        * Matrix2::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.sqrt()))
        * eig.eigenvectors.transpose();
    Ok(inv_sqrt * alpha.determinant().sqrt().sqrt())
}

/// Minimum of `f` on `[a, c]`, assuming a single basin there.
fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut c: f64, opts: &DiscordOptions) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut x1, mut x2) = (c - g * (c - a), a + g * (c - a));
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..opts.max_refinements {
        if c - a < opts.resolution {
            break;
        }
        if f1 < f2 {
            (c, x2, f2) = (x2, x1, f1);
            x1 = c - g * (c - a);
            f1 = f(x1);
        } else {
            (a, x1, f1) = (x1, x2, f2);
            x2 = a + g * (c - a);
            f2 = f(x2);
        }
    }
    if f1 < f2 { (f1, x1) } else { (f2, x2) }
}

struct SchurSearch {
    alpha1: Matrix2<f64>,
    alpha2: Matrix2<f64>,
    gamma: Matrix2<f64>,
}

impl SchurSearch {
    /// `det ε` for the seed `½ R(φ) diag(e^{-2s}, e^{2s}) R(φ)ᵀ`.
    fn det_eps(&self, s: f64, phi: f64) -> f64 {
        let (sn, cs) = phi.sin_cos();
        let (a, b) = (0.5 * (-2.0 * s).exp(), 0.5 * (2.0 * s).exp());
        let v0 = Matrix2::new(
            a * cs * cs + b * sn * sn,
            (b - a) * cs * sn,
            (b - a) * cs * sn,
            a * sn * sn + b * cs * cs,
        );
        let m = self.alpha2 + v0;
        let det_m = m.determinant();
        let inv = Matrix2::new(m[(1, 1)], -m[(0, 1)], -m[(1, 0)], m[(0, 0)]) / det_m;
        (self.alpha1 - self.gamma * inv * self.gamma.transpose()).determinant()
    }

    /// Homodyne limit: only the quadrature along `(cos φ, −sin φ)` is kept.
    fn det_eps_homodyne(&self, phi: f64) -> f64 {
        let (sn, cs) = phi.sin_cos();
        let u = Vector2::new(cs, -sn);
        let w = (u.transpose() * self.alpha2 * u)[(0, 0)];
        let gu = self.gamma * u;
        (self.alpha1 - gu * gu.transpose() / w).determinant()
    }

    /// Best angle for fixed `s`: coarse scan over `[0, π)`, then golden section
    /// inside the bracket around the best grid point.
    fn best_angle(&self, s: f64, opts: &DiscordOptions) -> (f64, f64) {
        let np = opts.coarse_phi.max(3);
        let dp = std::f64::consts::PI / np as f64;
        let mut best = (f64::INFINITY, 0.0);
        for j in 0..np {
            let phi = j as f64 * dp;
            let d = self.det_eps(s, phi);
            if d < best.0 {
                best = (d, phi);
            }
        }
        if s == 0.0 {
            return best;
        }
        let found = golden_section(|phi| self.det_eps(s, phi), best.1 - dp, best.1 + dp, opts);
        if found.0 < best.0 { found } else { best }
    }

    fn infimum(&self, opts: &DiscordOptions) -> Result<(f64, f64, f64)> {
        let pi = std::f64::consts::PI;
        let ns = opts.coarse_s.max(3);
        let s_max = opts.s_max + 0.5 * (2.0 * self.alpha2[(0, 0)]).max(1.0).ln();
        let ds = s_max / (ns - 1) as f64;

        // det ε minimised over the angle is a function of s alone; search it
        // the same way, so narrow angular valleys at large s are never missed.
        let mut best = (f64::INFINITY, 0.0);
        for i in 0..ns {
            let s = i as f64 * ds;
            let d = self.best_angle(s, opts).0;
            if d < best.0 {
                best = (d, s);
            }
        }
        let lo = (best.1 - ds).max(0.0);
        let hi = (best.1 + ds).min(s_max);
        let (d_s, s_best) = golden_section(|s| self.best_angle(s, opts).0, lo, hi, opts);
        let s_best = if d_s < best.0 { s_best } else { best.1 };
        let (d_best, p_best) = self.best_angle(s_best, opts);
        let mut result = (d_best, s_best, p_best.rem_euclid(pi));

        if opts.include_homodyne_limit {
            let (d_h, p_h) = self.homodyne_infimum(opts.coarse_phi.max(3), opts)?;
            if d_h < result.0 {
                result = (d_h, f64::INFINITY, p_h);
            }
        }
        if !result.0.is_finite() {
            return Err(Error::numerical(format!(
                "discord infimum search produced non-finite det ε (best seed s = {}, φ = {})",
                result.1, result.2
            )));
        }
        Ok(result)
    }

    fn homodyne_infimum(&self, np: usize, opts: &DiscordOptions) -> Result<(f64, f64)> {
        let pi = std::f64::consts::PI;
        let h = pi / np as f64;
        let (mut d_best, mut p_best) = (f64::INFINITY, 0.0);
        for j in 0..np {
            let phi = j as f64 * h;
            let d = self.det_eps_homodyne(phi);
            if d < d_best {
                (d_best, p_best) = (d, phi);
            }
        }
        let found = golden_section(|phi| self.det_eps_homodyne(phi), p_best - h, p_best + h, opts);
        if found.0 < d_best {
            (d_best, p_best) = found;
        }
        Ok((d_best, p_best.rem_euclid(pi)))
    }
}
