//! Linearised optomechanics of one cavity–mirror unit.
//!
//! Fluctuation ordering inside a unit is `(Q, P, x, y)`: dimensionless mirror
//! position and momentum, then the cavity amplitude and phase quadratures. A
//! composed pair uses the global ordering `(Q₁, P₁, Q₂, P₂, x₁, y₁, x₂, y₂)`, so
//! "mirrors vs fields" is the split between modes `{0, 1}` and `{2, 3}`.

use nalgebra::{Complex, DMatrix, Schur};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const HBAR: f64 = 1.054_571_817e-34;
pub const K_B: f64 = 1.380_649e-23;
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

const TWO_PI: f64 = std::f64::consts::TAU;

/// How the effective cavity–laser detuning Δ is obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Detuning {
    /// Δ given directly (rad/s).
    Explicit(f64),
    /// Bare detuning δ = ω_C − ω_L (rad/s); Δ follows from the mirror's mean
    /// displacement, solved self-consistently with the intracavity field.
    SelfConsistent { bare: f64 },
}

/// Mechanical noise strength in the diffusion matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiffusionForm {
    /// `γ_m (2n̄ + 1)`, valid at any temperature.
    #[default]
    Quantum,
    /// `2 γ_m k_B T / (ħ ω_m)`, the high-temperature Brownian limit.
    HighTemperature,
}

/// Physical constants of one cavity–mirror unit, SI units with angular frequencies in rad/s.
#[derive(Debug, Clone, PartialEq)]
pub struct OptomechParams {
    pub mass: f64,
    pub mech_frequency: f64,
    pub mech_damping: f64,
    pub cavity_decay: f64,
    pub cavity_length: f64,
    pub pump_power: f64,
    pub wavelength: f64,
    pub detuning: Detuning,
    pub bath_temperature: f64,
    pub diffusion_form: DiffusionForm,
}

impl OptomechParams {
    /// The experimental operating point used throughout: 145 ng mirror at
    /// 947 kHz, 25 mm cavity with κ/2π = 215 kHz, γ/2π = 140 Hz, 11 mW at
    /// 1064 nm, Δ = ω_m, bath at 0.4 K.
    pub fn table1() -> Self {
        let mech_frequency = TWO_PI * 947e3;
        Self {
            mass: 145e-12,
            mech_frequency,
            mech_damping: TWO_PI * 140.0,
            cavity_decay: TWO_PI * 215e3,
            cavity_length: 25e-3,
            pump_power: 11e-3,
            wavelength: 1064e-9,
            detuning: Detuning::Explicit(mech_frequency),
            bath_temperature: 0.4,
            diffusion_form: DiffusionForm::Quantum,
        }
    }

    pub fn with_temperature(mut self, t: f64) -> Self {
        self.bath_temperature = t;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("mass", self.mass),
            ("mech_frequency", self.mech_frequency),
            ("mech_damping", self.mech_damping),
            ("cavity_decay", self.cavity_decay),
            ("cavity_length", self.cavity_length),
            ("wavelength", self.wavelength),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::validation(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.pump_power.is_finite() && self.pump_power >= 0.0) {
            return Err(Error::validation(format!("pump_power must be >= 0, got {}", self.pump_power)));
        }
        if !(self.bath_temperature.is_finite() && self.bath_temperature >= 0.0) {
            return Err(Error::validation(format!(
                "bath temperature must be >= 0, got {}",
                self.bath_temperature
            )));
        }
        if self.mech_damping >= self.mech_frequency {
            return Err(Error::validation(format!(
                "mechanical damping {} rad/s is not small against the frequency {} rad/s",
                self.mech_damping, self.mech_frequency
            )));
        }
        let d = match self.detuning {
            Detuning::Explicit(d) => d,
            Detuning::SelfConsistent { bare } => bare,
        };
        if !d.is_finite() {
            return Err(Error::validation("detuning must be finite"));
        }
        Ok(())
    }

    /// ω_L = 2πc/λ.
    pub fn laser_frequency(&self) -> f64 {
        TWO_PI * SPEED_OF_LIGHT / self.wavelength
    }

    /// ω_C, taken as ω_L plus the configured detuning.
    pub fn cavity_frequency(&self) -> f64 {
        let d = match self.detuning {
            Detuning::Explicit(d) => d,
            Detuning::SelfConsistent { bare } => bare,
        };
        self.laser_frequency() + d
    }

    /// Radiation-pressure rate χ = ω_C / L.
    pub fn chi(&self) -> f64 {
        self.cavity_frequency() / self.cavity_length
    }

    /// Single-photon coupling g = χ √(ħ / 2 m ω_m).
    pub fn coupling(&self) -> f64 {
        self.chi() * (HBAR / (2.0 * self.mass * self.mech_frequency)).sqrt()
    }

    pub fn thermal_occupation(&self) -> f64 {
        thermal_occupation(self.bath_temperature, self.mech_frequency)
    }
}

/// Pump amplitude ℰ = √(2κ𝒫 / ħω_L), in s⁻¹.
pub fn drive_amplitude(params: &OptomechParams) -> Result<f64> {
    params.validate()?;
    Ok((2.0 * params.cavity_decay * params.pump_power / (HBAR * params.laser_frequency())).sqrt())
}

/// Mean intracavity amplitude and effective detuning.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyField {
    pub amplitude: Complex<f64>,
    pub detuning: f64,
}

/// `c_s = ℰ / (κ + iΔ)`; in self-consistent mode Δ = δ − ħχ²|c_s|²/(mω_m²) is
/// solved jointly (a cubic in |c_s|²) and the stable root with the smallest
/// amplitude is returned.
pub fn steady_field(params: &OptomechParams) -> Result<SteadyField> {
    let e = drive_amplitude(params)?;
    let kappa = params.cavity_decay;
    match params.detuning {
        Detuning::Explicit(delta) => Ok(field_at(e, kappa, delta)),
        Detuning::SelfConsistent { bare } => self_consistent_field(params, e, bare),
    }
}

fn field_at(e: f64, kappa: f64, delta: f64) -> SteadyField {
    SteadyField { amplitude: Complex::new(e, 0.0) / Complex::new(kappa, delta), detuning: delta }
}

/// Detuning shift per unit intracavity photon number, ħχ²/(mω_m²).
fn shift_per_photon(params: &OptomechParams) -> f64 {
    HBAR * params.chi().powi(2) / (params.mass * params.mech_frequency.powi(2))
}

fn self_consistent_field(params: &OptomechParams, e: f64, bare: f64) -> Result<SteadyField> {
    let kappa = params.cavity_decay;
    if e == 0.0 {
        return Ok(field_at(0.0, kappa, bare));
    }
    let beta = shift_per_photon(params);
    // With y = β|c_s|²/κ: y³ − 2d y² + (1 + d²) y − q = 0, d = δ/κ, q = βℰ²/κ³.
    let d = bare / kappa;
    let q = beta * e * e / kappa.powi(3);
    let roots = positive_real_cubic_roots(-2.0 * d, 1.0 + d * d, -q);
    let photon_numbers: Vec<f64> = roots.iter().map(|y| y * kappa / beta).collect();

    let mut candidates: Vec<(f64, SteadyField)> = roots
        .iter()
        .zip(&photon_numbers)
        .map(|(&y, &n)| (n, field_at(e, kappa, bare - kappa * y)))
        .filter(|(_, field)| stability(&kernel_for(params, field)))
        .collect();
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0));
    match candidates.first() {
        Some((_, field)) => {
            if candidates.len() > 1 {
                log::info!(
                    "bistable steady field ({} stable branches); taking the smallest amplitude",
                    candidates.len()
                );
            }
            Ok(*field)
        }
        None => Err(Error::Multistability { roots: photon_numbers }),
    }
}

/// Nonnegative real roots of the monic cubic `y³ + a y² + b y + c`, Newton-polished.
fn positive_real_cubic_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    let companion = DMatrix::from_row_slice(3, 3, &[0.0, 0.0, -c, 1.0, 0.0, -b, 0.0, 1.0, -a]);
    let eig = match Schur::try_new(companion, f64::EPSILON, 10_000) {
        Some(s) => s.complex_eigenvalues(),
        None => return Vec::new(),
    };
    let scale = eig.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let p = |y: f64| ((y + a) * y + b) * y + c;
    let dp = |y: f64| (3.0 * y + 2.0 * a) * y + b;
    let mut roots: Vec<f64> = eig
        .iter()
        .filter(|z| z.im.abs() <= 1e-6 * scale)
        .map(|z| {
            let mut y = z.re;
            for _ in 0..50 {
                let slope = dp(y);
                if slope == 0.0 {
                    break;
                }
                let step = p(y) / slope;
                y -= step;
                if step.abs() <= 1e-16 * y.abs().max(1e-300) {
                    break;
                }
            }
            y
        })
        .filter(|&y| y >= 0.0)
        .collect();
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|x, y| (*x - *y).abs() <= 1e-12 * y.abs().max(1.0));
    roots
}

/// Linearised drift matrix K.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftMatrix {
    entries: DMatrix<f64>,
}

impl DriftMatrix {
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        if !entries.is_square() || !entries.nrows().is_multiple_of(2) || entries.nrows() == 0 {
            return Err(Error::validation(format!(
                "drift matrix must be square of even size, got {:?}",
                entries.shape()
            )));
        }
        if entries.iter().any(|x| !x.is_finite()) {
            return Err(Error::validation("drift matrix has non-finite entries"));
        }
        Ok(Self { entries })
    }

    /// The single-unit kernel built entry by entry from its physical ingredients.
    pub fn kernel(
        mech_frequency: f64,
        mech_damping: f64,
        cavity_decay: f64,
        detuning: f64,
        coupling: f64,
        amplitude: Complex<f64>,
    ) -> Self {
        let (wm, gm, k, d) = (mech_frequency, mech_damping, cavity_decay, detuning);
        let re = 2.0 * coupling * amplitude.re;
        let im = 2.0 * coupling * amplitude.im;
        #[rustfmt::skip]
        let rows = [
            0.0, wm,  0.0, 0.0,
            -wm, -gm, re,  im,
            -im, 0.0, -k,  d,
            re,  0.0, -d,  -k,
        ];
        Self { entries: DMatrix::from_row_slice(4, 4, &rows) }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { entries: DMatrix::zeros(dim, dim) }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }
}

/// Diagonal noise-strength matrix D.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffusionMatrix {
    entries: DMatrix<f64>,
}

impl DiffusionMatrix {
    /// Diagonal with nonnegative entries.
    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        if diag.iter().any(|&x| !(x.is_finite() && x >= 0.0)) {
            return Err(Error::validation(format!("diffusion entries must be finite and >= 0: {diag:?}")));
        }
        Ok(Self { entries: DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(diag)) })
    }

    /// General symmetric positive-semidefinite diffusion.
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::validation("diffusion matrix must be square"));
        }
        if (&entries - entries.transpose()).amax() > 1e-12 * entries.amax().max(1.0) {
            return Err(Error::validation("diffusion matrix must be symmetric"));
        }
        Ok(Self { entries })
    }

    pub fn zeros(dim: usize) -> Self {
        Self { entries: DMatrix::zeros(dim, dim) }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }
}

fn kernel_for(params: &OptomechParams, field: &SteadyField) -> DriftMatrix {
    DriftMatrix::kernel(
        params.mech_frequency,
        params.mech_damping,
        params.cavity_decay,
        field.detuning,
        params.coupling(),
        field.amplitude,
    )
}

/// K for one unit, at the steady field of `params`.
pub fn drift_matrix(params: &OptomechParams) -> Result<DriftMatrix> {
    let field = steady_field(params)?;
    Ok(kernel_for(params, &field))
}

/// `D = diag(0, D_m, κ, κ)`.
pub fn diffusion_matrix(params: &OptomechParams) -> Result<DiffusionMatrix> {
    params.validate()?;
    let gm = params.mech_damping;
    let d_m = match params.diffusion_form {
        DiffusionForm::Quantum => gm * (2.0 * params.thermal_occupation() + 1.0),
        DiffusionForm::HighTemperature => {
            2.0 * gm * K_B * params.bath_temperature / (HBAR * params.mech_frequency)
        }
    };
    let k = params.cavity_decay;
    DiffusionMatrix::from_diagonal(&[0.0, d_m, k, k])
}

/// Bose occupation `1/(exp(ħω/k_B T) − 1)`; zero at `T ≤ 0`.
pub fn thermal_occupation(temperature: f64, frequency: f64) -> f64 {
    if temperature <= 0.0 {
        return 0.0;
    }
    1.0 / (HBAR * frequency / (K_B * temperature)).exp_m1()
}

/// Largest real part in the spectrum of K.
pub fn max_real_eigenvalue(k: &DriftMatrix) -> f64 {
    match Schur::try_new(k.matrix().clone(), f64::EPSILON, 10_000) {
        Some(s) => s.complex_eigenvalues().iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max),
        None => f64::NAN,
    }
}

/// Hurwitz test: every eigenvalue of K strictly in the left half-plane.
pub fn stability(k: &DriftMatrix) -> bool {
    let scale = k.matrix().amax().max(f64::MIN_POSITIVE);
    // Purely imaginary spectra come back with O(ε‖K‖) real parts.
    max_real_eigenvalue(k) < -1e-12 * scale
}

/// Global ordering of a composed pair, as indices into `unit1 ⊕ unit2`.
const PAIR_ORDER: [usize; 8] = [0, 1, 4, 5, 2, 3, 6, 7];

fn compose_blocks(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let mut block = DMatrix::zeros(8, 8);
    block.view_mut((0, 0), (4, 4)).copy_from(a);
    block.view_mut((4, 4), (4, 4)).copy_from(b);
    DMatrix::from_fn(8, 8, |r, c| block[(PAIR_ORDER[r], PAIR_ORDER[c])])
}

/// Two non-interacting units as one 8x8 system in the global mode order.
pub fn compose_pair(
    a: (&DriftMatrix, &DiffusionMatrix),
    b: (&DriftMatrix, &DiffusionMatrix),
) -> Result<(DriftMatrix, DiffusionMatrix)> {
    for (name, dim) in [("K1", a.0.dim()), ("D1", a.1.dim()), ("K2", b.0.dim()), ("D2", b.1.dim())] {
        if dim != 4 {
            return Err(Error::validation(format!("{name} must be 4x4, got {dim}x{dim}")));
        }
    }
    Ok((
        DriftMatrix { entries: compose_blocks(a.0.matrix(), b.0.matrix()) },
        DiffusionMatrix { entries: compose_blocks(a.1.matrix(), b.1.matrix()) },
    ))
}

/// Drift and diffusion for a pair of units.
pub fn pair_dynamics(p1: &OptomechParams, p2: &OptomechParams) -> Result<(DriftMatrix, DiffusionMatrix)> {
    let (k1, d1) = (drift_matrix(p1)?, diffusion_matrix(p1)?);
    let (k2, d2) = (drift_matrix(p2)?, diffusion_matrix(p2)?);
    compose_pair((&k1, &d1), (&k2, &d2))
}

/// Parameter file: flat keys with units in their names. Every key is optional
/// and falls back to the `table1` value.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsFile {
    pub mass_ng: Option<f64>,
    pub mech_freq_khz_over_2pi: Option<f64>,
    /// Overrides `mech_freq_khz_over_2pi` when the frequency is meant as angular.
    pub mech_freq_rad_per_s: Option<f64>,
    pub mech_damping_hz_over_2pi: Option<f64>,
    pub cavity_decay_khz_over_2pi: Option<f64>,
    pub cavity_length_mm: Option<f64>,
    pub pump_power_mw: Option<f64>,
    pub wavelength_nm: Option<f64>,
    /// Explicit Δ in units of ω_m (default 1).
    pub detuning_over_mech_freq: Option<f64>,
    pub detuning_khz_over_2pi: Option<f64>,
    /// Switches to self-consistent detuning with this bare δ.
    pub bare_detuning_khz_over_2pi: Option<f64>,
    #[serde(rename = "bath_temp_K")]
    pub bath_temp_k: Option<f64>,
    pub diffusion_form: Option<DiffusionForm>,
}

impl ParamsFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::validation(format!("parameter file: {}", e.message())))
    }

    pub fn to_params(&self) -> Result<OptomechParams> {
        let base = OptomechParams::table1();
        let mech_frequency = match (self.mech_freq_rad_per_s, self.mech_freq_khz_over_2pi) {
            (Some(w), _) => w,
            (None, Some(f)) => TWO_PI * f * 1e3,
            (None, None) => base.mech_frequency,
        };
        let explicit = [
            self.detuning_over_mech_freq.is_some(),
            self.detuning_khz_over_2pi.is_some(),
            self.bare_detuning_khz_over_2pi.is_some(),
        ];
        if explicit.iter().filter(|&&x| x).count() > 1 {
            return Err(Error::validation(
                "set at most one of detuning_over_mech_freq, detuning_khz_over_2pi, bare_detuning_khz_over_2pi",
            ));
        }
        let detuning = if let Some(f) = self.bare_detuning_khz_over_2pi {
            Detuning::SelfConsistent { bare: TWO_PI * f * 1e3 }
        } else if let Some(f) = self.detuning_khz_over_2pi {
            Detuning::Explicit(TWO_PI * f * 1e3)
        } else {
            Detuning::Explicit(self.detuning_over_mech_freq.unwrap_or(1.0) * mech_frequency)
        };
        let params = OptomechParams {
            mass: self.mass_ng.map_or(base.mass, |x| x * 1e-12),
            mech_frequency,
            mech_damping: self.mech_damping_hz_over_2pi.map_or(base.mech_damping, |x| TWO_PI * x),
            cavity_decay: self.cavity_decay_khz_over_2pi.map_or(base.cavity_decay, |x| TWO_PI * x * 1e3),
            cavity_length: self.cavity_length_mm.map_or(base.cavity_length, |x| x * 1e-3),
            pump_power: self.pump_power_mw.map_or(base.pump_power, |x| x * 1e-3),
            wavelength: self.wavelength_nm.map_or(base.wavelength, |x| x * 1e-9),
            detuning,
            bath_temperature: self.bath_temp_k.unwrap_or(base.bath_temperature),
            diffusion_form: self.diffusion_form.unwrap_or_default(),
        };
        params.validate()?;
        Ok(params)
    }
}

/// Human-readable echo of the SI values actually used.
pub fn describe(params: &OptomechParams) -> Vec<String> {
    let mut lines = vec![
        format!("mass = {:.6e} kg", params.mass),
        format!("mech_frequency = {:.6e} rad/s", params.mech_frequency),
        format!("mech_damping = {:.6e} rad/s", params.mech_damping),
        format!("cavity_decay = {:.6e} rad/s", params.cavity_decay),
        format!("cavity_length = {:.6e} m", params.cavity_length),
        format!("pump_power = {:.6e} W", params.pump_power),
        format!("wavelength = {:.6e} m (omega_L = {:.6e} rad/s)", params.wavelength, params.laser_frequency()),
        match params.detuning {
            Detuning::Explicit(d) => format!("detuning (explicit) = {d:.6e} rad/s"),
            Detuning::SelfConsistent { bare } => format!("bare detuning (self-consistent) = {bare:.6e} rad/s"),
        },
        format!("bath_temperature = {:.6e} K (nbar = {:.6e})", params.bath_temperature, params.thermal_occupation()),
        format!("diffusion_form = {:?}", params.diffusion_form),
        format!("coupling g = {:.6e} rad/s", params.coupling()),
    ];
    if let Ok(e) = drive_amplitude(params) {
        lines.push(format!("drive amplitude = {e:.6e} 1/s"));
    }
    lines
}
