//! Covariance dynamics `dV/dt = K V + V Kᵀ + D` and its fixed point.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{log_negativity, reduce, symplectic_eigenvalues, CovarianceMatrix};
use crate::model::{max_real_eigenvalue, stability, DiffusionMatrix, DriftMatrix};

/// Relative Frobenius distance to the steady state that ends the dynamical window.
pub const WINDOW_TOL: f64 = 1e-4;

/// Physicality slack for states produced by the integrator.
pub const TRAJECTORY_PHYSICAL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorConfig {
    /// Final time in seconds.
    pub t_end: f64,
    /// Largest step the adaptive controller may take.
    pub dt_max: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Keep every `record_stride`-th accepted step (the last step is always kept).
    pub record_stride: usize,
    /// Disables adaptivity: every step has this size (the last one is truncated).
    pub fixed_step: Option<f64>,
    /// End at the first step whose state is within [`WINDOW_TOL`] of the steady state.
    pub stop_at_steady_state: bool,
    pub max_steps: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            t_end: 1e-3,
            dt_max: 1e-5,
            rel_tol: 1e-8,
            abs_tol: 1e-10,
            record_stride: 1,
            fixed_step: None,
            stop_at_steady_state: false,
            max_steps: 10_000_000,
        }
    }
}

impl IntegratorConfig {
    /// `t_end = 10/γ_m`, the default horizon for a given mechanical damping.
    pub fn for_damping(mech_damping: f64) -> Self {
        let t_end = 10.0 / mech_damping;
        Self { t_end, dt_max: t_end / 100.0, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return Err(Error::validation(format!("t_end must be positive, got {}", self.t_end)));
        }
        if !(self.dt_max > 0.0) {
            return Err(Error::validation(format!("dt_max must be positive, got {}", self.dt_max)));
        }
        for (name, v) in [("rel_tol", self.rel_tol), ("abs_tol", self.abs_tol)] {
            if !(v > 0.0 && v <= 1e-2) {
                return Err(Error::validation(format!("{name} must lie in (0, 1e-2], got {v}")));
            }
        }
        if self.record_stride == 0 {
            return Err(Error::validation("record_stride must be at least 1"));
        }
        if let Some(h) = self.fixed_step {
            if !(h.is_finite() && h > 0.0) {
                return Err(Error::validation(format!("fixed_step must be positive, got {h}")));
            }
        }
        Ok(())
    }
}

/// Recorded covariance matrices with their times.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<CovarianceMatrix>,
    /// End of the dynamical window: steady-state attainment, or the last time.
    pub window_end: f64,
    pub steady_state: Option<CovarianceMatrix>,
    pub warnings: Vec<String>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> Option<&CovarianceMatrix> {
        self.states.last()
    }
}

// Dormand–Prince 5(4) tableau; the system is autonomous so the nodes are not needed.
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

fn lyapunov_rhs(k: &DMatrix<f64>, d: &DMatrix<f64>, v: &DMatrix<f64>) -> DMatrix<f64> {
    let kv = k * v;
    let t = kv.transpose();
    kv + t + d
}

/// One DP5 step: returns the 5th-order state and the embedded error estimate.
fn dp_step(k: &DMatrix<f64>, d: &DMatrix<f64>, v: &DMatrix<f64>, h: f64) -> (DMatrix<f64>, DMatrix<f64>) {
    let mut stages: Vec<DMatrix<f64>> = Vec::with_capacity(7);
    for (i, row) in A.iter().enumerate() {
        let mut y = v.clone();
        for (j, &a) in row.iter().enumerate().take(i) {
            if a != 0.0 {
                y += &stages[j] * (h * a);
            }
        }
        stages.push(lyapunov_rhs(k, d, &y));
    }
    let mut next = v.clone();
    let mut err = DMatrix::zeros(v.nrows(), v.ncols());
    for i in 0..7 {
        if B5[i] != 0.0 {
            next += &stages[i] * (h * B5[i]);
        }
        err += &stages[i] * (h * (B5[i] - B4[i]));
    }
    (next, err)
}

fn error_norm(err: &DMatrix<f64>, v: &DMatrix<f64>, next: &DMatrix<f64>, cfg: &IntegratorConfig) -> f64 {
    let n = err.len() as f64;
    let sum: f64 = err
        .iter()
        .zip(v.iter().zip(next.iter()))
        .map(|(e, (a, b))| {
            let scale = cfg.abs_tol + cfg.rel_tol * a.abs().max(b.abs());
            (e / scale).powi(2)
        })
        .sum();
    (sum / n).sqrt()
}

fn symmetrized(m: DMatrix<f64>) -> DMatrix<f64> {
    let t = m.transpose();
    (m + t) * 0.5
}

fn check_dims(v0: &CovarianceMatrix, k: &DriftMatrix, d: &DiffusionMatrix) -> Result<()> {
    if k.dim() != v0.dim() || d.dim() != v0.dim() {
        return Err(Error::validation(format!(
            "dimension mismatch: V is {0}x{0}, K is {1}x{1}, D is {2}x{2}",
            v0.dim(),
            k.dim(),
            d.dim()
        )));
    }
    Ok(())
}

fn to_state(m: DMatrix<f64>, t: f64) -> Result<CovarianceMatrix> {
    CovarianceMatrix::new(m).map_err(|e| Error::numerical(format!("integrated state at t = {t:.6e} s invalid: {e}")))
}

/// Integrates the covariance equation from `v0` over `[0, cfg.t_end]`.
///
/// Adaptive steps start at `1e-3/‖K‖` so that transients on the fastest
/// timescale are resolved, and never exceed `dt_max`.
pub fn evolve(v0: &CovarianceMatrix, k: &DriftMatrix, d: &DiffusionMatrix, cfg: &IntegratorConfig) -> Result<Trajectory> {
    cfg.validate()?;
    check_dims(v0, k, d)?;
    if !crate::gaussian::check_physical(v0) {
        return Err(Error::validation("initial covariance matrix is unphysical"));
    }
    let km = k.matrix();
    let dm = d.matrix();

    let mut warnings = Vec::new();
    let v_ss = if stability(k) {
        match steady_state(k, d) {
            Ok(s) => Some(s),
            Err(e) => {
                let msg = format!("no usable steady state ({e}); window runs to t_end");
                log::warn!("{msg}");
                warnings.push(msg);
                None
            }
        }
    } else {
        let msg = format!(
            "drift matrix is not Hurwitz (max Re eig = {:.6e}); no steady state, transient only",
            max_real_eigenvalue(k)
        );
        log::warn!("{msg}");
        warnings.push(msg);
        None
    };
    let ss_norm = v_ss.as_ref().map(|s| s.matrix().norm());
    let reached = |v: &DMatrix<f64>| match (&v_ss, ss_norm) {
        (Some(s), Some(n)) => (v - s.matrix()).norm() <= WINDOW_TOL * n,
        _ => false,
    };

    let mut times = vec![0.0];
    let mut states = vec![v0.clone()];
    let mut window_end = None;

    let mut t = 0.0;
    let mut v = v0.matrix().clone();
    let k_scale = km.amax().max(f64::MIN_POSITIVE);
    let mut h = match cfg.fixed_step {
        Some(h) => h,
        None => (1e-3 / k_scale).min(cfg.dt_max),
    };
    let mut accepted = 0usize;
    let mut steps = 0usize;

    while t < cfg.t_end {
        steps += 1;
        if steps > cfg.max_steps {
            return Err(Error::Stiffness { t, h });
        }
        let remaining = cfg.t_end - t;
        let last = h >= remaining;
        let h_try = if last { remaining } else { h };
        let (next, err) = dp_step(km, dm, &v, h_try);

        let accept = match cfg.fixed_step {
            Some(_) => true,
            None => {
                let e = error_norm(&err, &v, &next, cfg);
                if !e.is_finite() {
                    return Err(Error::numerical(format!("non-finite state at t = {t:.6e} s")));
                }
                let factor = if e == 0.0 { 5.0 } else { (0.9 * e.powf(-0.2)).clamp(0.2, 5.0) };
                let ok = e <= 1.0;
                h = (h_try * factor).min(cfg.dt_max);
                if !ok && h <= 16.0 * f64::EPSILON * t.max(f64::MIN_POSITIVE) {
                    return Err(Error::Stiffness { t, h });
                }
                ok
            }
        };
        if !accept {
            continue;
        }

        t = if last { cfg.t_end } else { t + h_try };
        v = symmetrized(next);
        accepted += 1;
        let done = reached(&v);
        if cfg.stop_at_steady_state && done && window_end.is_none() {
            window_end = Some(t);
            times.push(t);
            states.push(to_state(v.clone(), t)?);
            break;
        }
        if done && window_end.is_none() {
            window_end = Some(t);
        }
        if accepted.is_multiple_of(cfg.record_stride) || t >= cfg.t_end {
            times.push(t);
            states.push(to_state(v.clone(), t)?);
        }
    }

    for (t, s) in times.iter().zip(&states) {
        let nu = symplectic_eigenvalues(s)?.min();
        if nu < 0.5 - TRAJECTORY_PHYSICAL_TOL {
            let msg = format!("state at t = {t:.6e} s has symplectic eigenvalue {nu:.9} < 1/2");
            log::warn!("{msg}");
            warnings.push(msg);
        }
    }

    let window_end = window_end.unwrap_or(*times.last().expect("trajectory holds v0"));
    Ok(Trajectory { times, states, window_end, steady_state: v_ss, warnings })
}

/// Index of `(i, j)`, `i ≤ j`, in the row-major upper triangle of an `n x n` matrix.
fn vech_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i <= j);
    i * n - i * (i + 1) / 2 + j
}

/// Solves `K V + V Kᵀ + D = 0` as a linear system over the independent entries of V.
pub fn steady_state(k: &DriftMatrix, d: &DiffusionMatrix) -> Result<CovarianceMatrix> {
    if k.dim() != d.dim() {
        return Err(Error::validation(format!("K is {0}x{0} but D is {1}x{1}", k.dim(), d.dim())));
    }
    if !stability(k) {
        return Err(Error::NoSteadyState { max_real_part: max_real_eigenvalue(k) });
    }
    let n = k.dim();
    let km = k.matrix();
    let dm = d.matrix();
    let m = n * (n + 1) / 2;
    let idx = |a: usize, b: usize| if a <= b { vech_index(n, a, b) } else { vech_index(n, b, a) };

    let mut a = DMatrix::<f64>::zeros(m, m);
    let mut rhs = DVector::<f64>::zeros(m);
    for i in 0..n {
        for j in i..n {
            let row = vech_index(n, i, j);
            // (KV)_ij + (VKᵀ)_ij = Σ_l K_il V_lj + V_il K_jl
            for l in 0..n {
                a[(row, idx(l, j))] += km[(i, l)];
                a[(row, idx(i, l))] += km[(j, l)];
            }
            rhs[row] = -dm[(i, j)];
        }
    }
    let lu = a.clone().lu();
    let mut x = lu.solve(&rhs).ok_or_else(|| Error::numerical("singular Lyapunov system"))?;
    // One round of iterative refinement.
    let r = &rhs - &a * &x;
    if let Some(dx) = lu.solve(&r) {
        x += dx;
    }

    let v = DMatrix::from_fn(n, n, |r, c| x[idx(r, c)]);
    let residual = (km * &v + &v * km.transpose() + dm).norm();
    let d_norm = dm.norm();
    if residual > 1e-10 * d_norm {
        return Err(Error::numerical(format!(
            "steady-state residual {residual:.3e} exceeds 1e-10 * ||D|| = {:.3e}",
            1e-10 * d_norm
        )));
    }
    CovarianceMatrix::new(v).map_err(|e| Error::numerical(format!("steady state is not a covariance matrix: {e}")))
}

/// Two disjoint groups of modes; entanglement is computed on their joint reduction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bipartition {
    pub side_a: Vec<usize>,
    pub side_b: Vec<usize>,
}

impl Bipartition {
    pub fn new(side_a: Vec<usize>, side_b: Vec<usize>) -> Self {
        Self { side_a, side_b }
    }

    /// Log-negativity between the two sides, tracing out every other mode.
    pub fn log_negativity(&self, cm: &CovarianceMatrix) -> Result<f64> {
        if self.side_a.is_empty() || self.side_b.is_empty() {
            return Err(Error::validation("both sides of a bipartition need at least one mode"));
        }
        let keep: Vec<usize> = self.side_a.iter().chain(&self.side_b).copied().collect();
        let reduced = reduce(cm, &keep)?;
        let partition: Vec<usize> = (self.side_a.len()..keep.len()).collect();
        log_negativity(&reduced, &partition)
    }
}

/// Maximum of `values` over samples with `times ≤ window_end`, earliest argmax on ties.
pub fn max_over_window(times: &[f64], values: &[f64], window_end: f64) -> Result<(f64, f64)> {
    if times.is_empty() {
        return Err(Error::validation("empty trajectory"));
    }
    if times.len() != values.len() {
        return Err(Error::validation(format!("{} times but {} values", times.len(), values.len())));
    }
    let mut best = (values[0], times[0]);
    for (&t, &v) in times.iter().zip(values).skip(1) {
        if t > window_end {
            break;
        }
        if v > best.0 {
            best = (v, t);
        }
    }
    Ok(best)
}

/// Largest log-negativity across `partition` within the trajectory's dynamical window.
pub fn max_measure_over_window(traj: &Trajectory, partition: &Bipartition) -> Result<(f64, f64)> {
    if traj.is_empty() {
        return Err(Error::validation("empty trajectory"));
    }
    let values: Vec<f64> = traj
        .states
        .iter()
        .zip(&traj.times)
        .take_while(|(_, &t)| t <= traj.window_end)
        .map(|(s, _)| partition.log_negativity(s))
        .collect::<Result<_>>()?;
    max_over_window(&traj.times[..values.len()], &values, traj.window_end)
}
