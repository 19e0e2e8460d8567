//! Activation experiments: state preparation, runs, sweeps and demon sampling.
//!
//! Composed states use the mode order `(M₁, M₂, F₁, F₂)`.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::dynamics::{evolve, max_over_window, Bipartition, IntegratorConfig, Trajectory};
use crate::error::{Error, Result};
use crate::gaussian::{
    gaussian_discord, read_cm_file, reduce, rotate_local, squeezed_thermal_pair, squeezed_vacuum,
    strip_correlations, symplectic_eigenvalues, thermal, vacuum, CovarianceMatrix, DiscordOptions,
    RotationAngles,
};
use crate::model::{diffusion_matrix, drift_matrix, pair_dynamics, OptomechParams, ParamsFile};

/// Environment variable that fixes the worker-thread count for sweeps and sampling.
pub const THREADS_ENV: &str = "OPTOMECH_THREADS";

/// Default integrator tolerances for window scans.
pub const SCAN_REL_TOL: f64 = 1e-10;
pub const SCAN_ABS_TOL: f64 = 1e-12;

/// Quantities recorded along an activation run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Measure {
    EPair1,
    EPair2,
    EMirrorsVsFields,
    DMech,
    NuMin,
}

impl Measure {
    pub const ALL: [Measure; 5] =
        [Measure::EPair1, Measure::EPair2, Measure::EMirrorsVsFields, Measure::DMech, Measure::NuMin];

    pub fn column(self) -> &'static str {
        match self {
            Measure::EPair1 => "E_pair1",
            Measure::EPair2 => "E_pair2",
            Measure::EMirrorsVsFields => "E_mirrors_vs_fields",
            Measure::DMech => "D_mech",
            Measure::NuMin => "nu_min",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.column() == name)
            .ok_or_else(|| Error::validation(format!("unknown measure {name:?}")))
    }

    /// Value of the measure on a composed four-mode state.
    pub fn evaluate(self, state: &CovarianceMatrix) -> Result<f64> {
        match self {
            Measure::EPair1 => pair_partition(0).log_negativity(state),
            Measure::EPair2 => pair_partition(1).log_negativity(state),
            Measure::EMirrorsVsFields => mirrors_vs_fields().log_negativity(state),
            Measure::DMech => {
                let mech = reduce(state, &[0, 1])?;
                Ok(gaussian_discord(&mech, 1, &DiscordOptions::default())?.discord)
            }
            Measure::NuMin => Ok(symplectic_eigenvalues(state)?.min()),
        }
    }
}

/// Mirror `i` against its own field.
pub fn pair_partition(unit: usize) -> Bipartition {
    Bipartition::new(vec![unit], vec![2 + unit])
}

/// Both mirrors against both fields.
pub fn mirrors_vs_fields() -> Bipartition {
    Bipartition::new(vec![0, 1], vec![2, 3])
}

/// Mechanical initial state.
#[derive(Debug, Clone, PartialEq)]
pub enum MechState {
    /// Each mirror thermal at this temperature, or at its own bath when `None`.
    Thermal(Option<f64>),
    /// Externally supplied two-mode covariance matrix.
    Explicit { path: PathBuf, cm: CovarianceMatrix },
    SeparableDiscorded { target_nbar: f64, strength: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct MechInit {
    pub state: MechState,
    /// Replace the state by the product of its single-mode reductions.
    pub strip_correlations: bool,
}

/// Fluctuation state of each cavity field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OptInit {
    /// Coherent drive: fluctuations are vacuum.
    Coherent,
    Squeezed { r: f64, phase: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Demon {
    Angles(f64, f64),
    Sample { count: usize, seed: u64 },
}

/// A fully resolved experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub unit1: OptomechParams,
    pub unit2: OptomechParams,
    pub mech_init: MechInit,
    pub opt_init: OptInit,
    pub demon: Option<Demon>,
    pub integrator: IntegratorConfig,
    pub measures: Vec<Measure>,
    pub sweep_temperatures: Vec<f64>,
    pub sweep_squeezing: Vec<f64>,
    /// Number of uniform time samples per squeezing value in the heatmap.
    pub heatmap_samples: usize,
    /// SHA-256 of the configuration source.
    pub config_hash: String,
}

pub const DEFAULT_TEMPERATURES: [f64; 12] =
    [1e-6, 1e-5, 1e-4, 1e-3, 5e-3, 1e-2, 2e-2, 4e-2, 0.1, 0.2, 0.4, 1.0];

impl Default for Scenario {
    fn default() -> Self {
        let unit = OptomechParams::table1();
        let mut s = Self {
            integrator: scan_integrator(&unit),
            unit1: unit.clone(),
            unit2: unit,
            mech_init: MechInit {
                state: MechState::SeparableDiscorded { target_nbar: 12.0, strength: 1.0 },
                strip_correlations: false,
            },
            opt_init: OptInit::Coherent,
            demon: None,
            measures: Measure::ALL.to_vec(),
            sweep_temperatures: DEFAULT_TEMPERATURES.to_vec(),
            sweep_squeezing: (0..=12).map(|i| 0.25 * i as f64).collect(),
            heatmap_samples: 200,
            config_hash: String::new(),
        };
        s.config_hash = digest(format!("{s:?}").as_bytes());
        s
    }
}

/// Window-scan integrator for a unit: horizon 10/γ_m, stop at steady state.
pub fn scan_integrator(unit: &OptomechParams) -> IntegratorConfig {
    IntegratorConfig {
        rel_tol: SCAN_REL_TOL,
        abs_tol: SCAN_ABS_TOL,
        stop_at_steady_state: true,
        ..IntegratorConfig::for_damping(unit.mech_damping)
    }
}

pub fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    #[serde(rename = "bath_temp_K")]
    bath_temp_k: Option<f64>,
    #[serde(default)]
    unit1: ParamsFile,
    #[serde(default)]
    unit2: ParamsFile,
    #[serde(default)]
    mech_init: MechInitFile,
    #[serde(default)]
    opt_init: OptInitFile,
    demon: Option<DemonFile>,
    #[serde(default)]
    integrator: IntegratorFile,
    #[serde(default)]
    outputs: OutputsFile,
    #[serde(default)]
    sweep: SweepFile,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct MechInitFile {
    kind: Option<String>,
    target_nbar: Option<f64>,
    strength: Option<f64>,
    #[serde(rename = "temperature_K")]
    temperature_k: Option<f64>,
    path: Option<PathBuf>,
    #[serde(default)]
    strip_correlations: bool,
    #[serde(default)]
    force: bool,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct OptInitFile {
    kind: Option<String>,
    r: Option<f64>,
    phase: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct DemonFile {
    angles: Option<Vec<f64>>,
    count: Option<usize>,
    seed: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct IntegratorFile {
    t_end_s: Option<f64>,
    dt_max_s: Option<f64>,
    rel_tol: Option<f64>,
    abs_tol: Option<f64>,
    record_stride: Option<usize>,
    stop_at_steady_state: Option<bool>,
    max_steps: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutputsFile {
    measures: Option<Vec<String>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepFile {
    #[serde(rename = "temperatures_K")]
    temperatures_k: Option<Vec<f64>>,
    squeezing: Option<Vec<f64>>,
    heatmap_samples: Option<usize>,
}

fn missing(section: &str, key: &str) -> Error {
    Error::validation(format!("[{section}] requires key `{key}`"))
}

impl Scenario {
    /// Parses a scenario file; relative `mech_init.path` values resolve against `base_dir`.
    pub fn from_toml(text: &str, base_dir: &Path) -> Result<Self> {
        Self::from_toml_forced(text, base_dir, false)
    }

    /// As [`Scenario::from_toml`]; `force` accepts marginally unphysical
    /// imported matrices regardless of `mech_init.force`.
    pub fn from_toml_forced(text: &str, base_dir: &Path, force: bool) -> Result<Self> {
        let file: ScenarioFile =
            toml::from_str(text).map_err(|e| Error::validation(format!("scenario file: {e}")))?;
        let mut unit1 = file.unit1.to_params()?;
        let mut unit2 = file.unit2.to_params()?;
        if let Some(t) = file.bath_temp_k {
            unit1.bath_temperature = t;
            unit2.bath_temperature = t;
            unit1.validate()?;
        }

        let m = file.mech_init;
        let state = match m.kind.as_deref().unwrap_or("separable_discorded") {
            "thermal" => MechState::Thermal(m.temperature_k),
            "file" => {
                let rel = m.path.ok_or_else(|| missing("mech_init", "path"))?;
                let path = if rel.is_absolute() { rel } else { base_dir.join(rel) };
                let cm = read_cm_file(&path, m.force || force)?;
                if cm.n_modes() != 2 {
                    return Err(Error::validation(format!(
                        "mech_init.path: expected a two-mode matrix, got {} modes",
                        cm.n_modes()
                    )));
                }
                MechState::Explicit { path, cm }
            }
            "separable_discorded" => MechState::SeparableDiscorded {
                target_nbar: m.target_nbar.unwrap_or(12.0),
                strength: m.strength.unwrap_or(1.0),
            },
            other => {
                return Err(Error::validation(format!(
                    "mech_init.kind: unknown value {other:?} (thermal, file, separable_discorded)"
                )))
            }
        };
        let mech_init = MechInit { state, strip_correlations: m.strip_correlations };

        let o = file.opt_init;
        let opt_init = match o.kind.as_deref().unwrap_or("coherent") {
            "coherent" | "vacuum" => OptInit::Coherent,
            "squeezed" => OptInit::Squeezed {
                r: o.r.ok_or_else(|| missing("opt_init", "r"))?,
                phase: o.phase.unwrap_or(0.0),
            },
            other => {
                return Err(Error::validation(format!(
                    "opt_init.kind: unknown value {other:?} (coherent, squeezed)"
                )))
            }
        };

        let demon = match file.demon {
            None => None,
            Some(DemonFile { angles: Some(a), count: None, seed: None }) => {
                if a.len() != 2 {
                    return Err(Error::validation("demon.angles must hold two angles"));
                }
                Some(Demon::Angles(a[0], a[1]))
            }
            Some(DemonFile { angles: None, count, seed: Some(seed) }) => {
                Some(Demon::Sample { count: count.unwrap_or(1000), seed })
            }
            Some(_) => {
                return Err(Error::validation(
                    "demon: give either `angles = [t1, t2]` or `seed` (with optional `count`)",
                ))
            }
        };

        let i = file.integrator;
        let base = scan_integrator(&unit1);
        let t_end = i.t_end_s.unwrap_or(base.t_end);
        let integrator = IntegratorConfig {
            t_end,
            dt_max: i.dt_max_s.unwrap_or(t_end / 100.0),
            rel_tol: i.rel_tol.unwrap_or(base.rel_tol),
            abs_tol: i.abs_tol.unwrap_or(base.abs_tol),
            record_stride: i.record_stride.unwrap_or(base.record_stride),
            fixed_step: None,
            stop_at_steady_state: i.stop_at_steady_state.unwrap_or(base.stop_at_steady_state),
            max_steps: i.max_steps.unwrap_or(base.max_steps),
        };
        integrator.validate()?;

        let measures = match file.outputs.measures {
            Some(names) => names.iter().map(|n| Measure::parse(n)).collect::<Result<_>>()?,
            None => Measure::ALL.to_vec(),
        };

        let defaults = Scenario::default();
        let scenario = Scenario {
            unit1,
            unit2,
            mech_init,
            opt_init,
            demon,
            integrator,
            measures,
            sweep_temperatures: file.sweep.temperatures_k.unwrap_or(defaults.sweep_temperatures),
            sweep_squeezing: file.sweep.squeezing.unwrap_or(defaults.sweep_squeezing),
            heatmap_samples: file.sweep.heatmap_samples.unwrap_or(defaults.heatmap_samples),
            config_hash: digest(text.as_bytes()),
        };
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::load_forced(path, false)
    }

    pub fn load_forced(path: &Path, force: bool) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| Error::Io { path: path.display().to_string(), source })?;
        Self::from_toml_forced(&text, path.parent().unwrap_or(Path::new(".")), force)
    }

    pub fn validate(&self) -> Result<()> {
        self.unit1.validate()?;
        self.unit2.validate()?;
        self.integrator.validate()?;
        if let OptInit::Squeezed { r, phase } = self.opt_init {
            if !(r.is_finite() && r >= 0.0) || !phase.is_finite() {
                return Err(Error::validation(format!("opt_init: squeezing r must be >= 0, got {r}")));
            }
        }
        if let MechState::Thermal(Some(t)) = self.mech_init.state {
            if !(t.is_finite() && t >= 0.0) {
                return Err(Error::validation(format!("mech_init.temperature_K must be >= 0, got {t}")));
            }
        }
        match self.demon {
            Some(Demon::Sample { count: 0, .. }) => {
                return Err(Error::validation("demon.count must be at least 1"))
            }
            Some(Demon::Angles(a, b)) if !(a.is_finite() && b.is_finite()) => {
                return Err(Error::validation("demon angles must be finite"))
            }
            _ => {}
        }
        if self.heatmap_samples < 2 {
            return Err(Error::validation("sweep.heatmap_samples must be at least 2"));
        }
        Ok(())
    }

    pub fn with_mech_init(mut self, state: MechState, strip: bool) -> Self {
        self.mech_init = MechInit { state, strip_correlations: strip };
        self
    }

    pub fn with_bath_temperature(mut self, t: f64) -> Self {
        self.unit1.bath_temperature = t;
        self.unit2.bath_temperature = t;
        self
    }
}

/// Symmetric squeezed-thermal pair with local occupation `target_nbar` whose
/// partially transposed spectrum sits at `1/2 + (1 − strength)·n̄`.
pub fn prepare_separable_discorded(target_nbar: f64, strength: f64) -> Result<CovarianceMatrix> {
    if !(target_nbar.is_finite() && target_nbar >= 0.0) {
        return Err(Error::validation(format!("target occupation must be >= 0, got {target_nbar}")));
    }
    if !strength.is_finite() || !(0.0..=1.0).contains(&strength) {
        return Err(Error::Infeasible {
            reason: format!("correlation strength {strength} outside [0, 1]; above 1 the state is entangled"),
            max_strength: 1.0,
        });
    }
    if target_nbar == 0.0 && strength > 0.0 {
        return Err(Error::Infeasible {
            reason: "a separable pair with zero occupation is the vacuum and carries no correlations".into(),
            max_strength: 0.0,
        });
    }
    Ok(squeezed_thermal_pair(target_nbar, strength * target_nbar))
}

/// Block-diagonal four-mode state `mech ⊕ opt ⊕ opt` in order `(M₁, M₂, F₁, F₂)`.
pub fn assemble_initial(mech: &CovarianceMatrix, opt: &OptInit) -> Result<CovarianceMatrix> {
    if mech.n_modes() != 2 {
        return Err(Error::validation("mechanical state must have two modes"));
    }
    crate::gaussian::check_physical(mech)
        .then_some(())
        .ok_or_else(|| Error::validation("mechanical state is unphysical"))?;
    let field = optical_state(opt)?;
    CovarianceMatrix::direct_sum(&[mech, &field, &field])
}

fn optical_state(opt: &OptInit) -> Result<CovarianceMatrix> {
    match *opt {
        OptInit::Coherent => Ok(vacuum(1)),
        OptInit::Squeezed { r, phase } => {
            if !(r.is_finite() && r >= 0.0) {
                return Err(Error::validation(format!("squeezing r must be >= 0, got {r}")));
            }
            Ok(squeezed_vacuum(r, phase))
        }
    }
}

/// Mechanical initial state of a scenario, before any demon rotation.
pub fn mechanical_initial(scn: &Scenario) -> Result<CovarianceMatrix> {
    let cm = match &scn.mech_init.state {
        MechState::Thermal(t) => {
            let n1 = crate::model::thermal_occupation(t.unwrap_or(scn.unit1.bath_temperature), scn.unit1.mech_frequency);
            let n2 = crate::model::thermal_occupation(t.unwrap_or(scn.unit2.bath_temperature), scn.unit2.mech_frequency);
            CovarianceMatrix::direct_sum(&[&thermal(n1), &thermal(n2)])?
        }
        MechState::Explicit { cm, .. } => cm.clone(),
        MechState::SeparableDiscorded { target_nbar, strength } => {
            prepare_separable_discorded(*target_nbar, *strength)?
        }
    };
    Ok(if scn.mech_init.strip_correlations { strip_correlations(&cm) } else { cm })
}

/// Initial composed state with the mechanical block rotated by `angles`.
pub fn initial_state(scn: &Scenario, angles: Option<(f64, f64)>) -> Result<CovarianceMatrix> {
    let mut mech = mechanical_initial(scn)?;
    if let Some((a, b)) = angles {
        mech = rotate_local(&mech, &RotationAngles::new(vec![a, b])?)?;
    }
    assemble_initial(&mech, &scn.opt_init)
}

/// Evolves the pair from the scenario's initial state, applying fixed demon angles if configured.
pub fn run_activation(scn: &Scenario) -> Result<Trajectory> {
    let angles = match scn.demon {
        Some(Demon::Angles(a, b)) => Some((a, b)),
        _ => None,
    };
    run_activation_rotated(scn, angles)
}

pub fn run_activation_rotated(scn: &Scenario, angles: Option<(f64, f64)>) -> Result<Trajectory> {
    scn.validate()?;
    let v0 = initial_state(scn, angles)?;
    let (k, d) = pair_dynamics(&scn.unit1, &scn.unit2)?;
    evolve(&v0, &k, &d, &scn.integrator)
}

/// Per-time values of the chosen measures.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureSeries {
    pub times: Vec<f64>,
    pub columns: Vec<(Measure, Vec<f64>)>,
    pub window_end: f64,
}

impl MeasureSeries {
    pub fn column(&self, m: Measure) -> Option<&[f64]> {
        self.columns.iter().find(|(c, _)| *c == m).map(|(_, v)| v.as_slice())
    }

    /// Maximum and argmax of a column within the dynamical window.
    pub fn window_max(&self, m: Measure) -> Result<(f64, f64)> {
        let values = self.column(m).ok_or_else(|| Error::validation(format!("{} not recorded", m.column())))?;
        max_over_window(&self.times, values, self.window_end)
    }
}

pub fn measure_series(traj: &Trajectory, measures: &[Measure]) -> Result<MeasureSeries> {
    let columns = measures
        .iter()
        .map(|&m| Ok((m, traj.states.iter().map(|s| m.evaluate(s)).collect::<Result<Vec<_>>>()?)))
        .collect::<Result<_>>()?;
    Ok(MeasureSeries { times: traj.times.clone(), columns, window_end: traj.window_end })
}

/// Maximum of one measure over the window of a trajectory.
pub fn window_max(traj: &Trajectory, m: Measure) -> Result<(f64, f64)> {
    let mut values = Vec::with_capacity(traj.len());
    for (s, &t) in traj.states.iter().zip(&traj.times) {
        if t > traj.window_end {
            break;
        }
        values.push(m.evaluate(s)?);
    }
    max_over_window(&traj.times[..values.len()], &values, traj.window_end)
}

/// One value per axis point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub axis_name: String,
    pub axis: Vec<f64>,
    pub e_max: Vec<f64>,
    pub t_star: Vec<f64>,
    pub seed: Option<u64>,
    pub config_hash: String,
}

/// Demon-sampling outcome, one row per rotation.
#[derive(Debug, Clone, PartialEq)]
pub struct DemonResult {
    pub angles: Vec<(f64, f64)>,
    pub e_max: Vec<f64>,
    pub t_star: Vec<f64>,
    pub seed: u64,
    pub config_hash: String,
}

impl DemonResult {
    pub fn min_e_max(&self) -> f64 {
        self.e_max.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Runs `f` on a pool sized by [`THREADS_ENV`] when set, else on the global pool.
pub fn with_thread_pool<T: Send>(f: impl FnOnce() -> T + Send) -> Result<T> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => {
            let n: usize = v
                .trim()
                .parse()
                .map_err(|_| Error::validation(format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?;
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::validation(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
        Err(_) => Ok(f()),
    }
}

/// Uniform angles on `[0, 2π)²` for sample `index`, from its own stream of the seeded generator.
pub fn demon_angles(seed: u64, index: usize) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let tau = std::f64::consts::TAU;
    (rng.random_range(0.0..tau), rng.random_range(0.0..tau))
}

/// Max-window E(mirrors:fields) for `n` random demon rotations.
pub fn demon_sample(scn: &Scenario, n: usize, seed: u64) -> Result<DemonResult> {
    if n == 0 {
        return Err(Error::validation("sample count must be at least 1"));
    }
    let angles: Vec<(f64, f64)> = (0..n).map(|i| demon_angles(seed, i)).collect();
    demon_sample_angles(scn, &angles, seed)
}

/// Same as [`demon_sample`] with the rotations given explicitly.
pub fn demon_sample_angles(scn: &Scenario, angles: &[(f64, f64)], seed: u64) -> Result<DemonResult> {
    scn.validate()?;
    let rows: Vec<(f64, f64)> = with_thread_pool(|| {
        angles
            .par_iter()
            .map(|&a| {
                let traj = run_activation_rotated(scn, Some(a))?;
                window_max(&traj, Measure::EMirrorsVsFields)
            })
            .collect::<Result<Vec<_>>>()
    })??;
    Ok(DemonResult {
        angles: angles.to_vec(),
        e_max: rows.iter().map(|r| r.0).collect(),
        t_star: rows.iter().map(|r| r.1).collect(),
        seed,
        config_hash: scn.config_hash.clone(),
    })
}

fn unit_run(unit: &OptomechParams, v0: &CovarianceMatrix, cfg: &IntegratorConfig) -> Result<Trajectory> {
    let (k, d) = (drift_matrix(unit)?, diffusion_matrix(unit)?);
    evolve(v0, &k, &d, cfg)
}

/// Max-window E(mirror:field) of unit 1 with mirror and bath at each temperature, coherent optics.
pub fn temperature_sweep(scn: &Scenario, temperatures: &[f64]) -> Result<SweepResult> {
    if temperatures.is_empty() {
        return Err(Error::validation("temperature list is empty"));
    }
    if let Some(t) = temperatures.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
        return Err(Error::validation(format!("temperatures must be positive, got {t}")));
    }
    let rows: Vec<(f64, f64)> = with_thread_pool(|| {
        temperatures
            .par_iter()
            .map(|&t| {
                let unit = scn.unit1.clone().with_temperature(t);
                let v0 = CovarianceMatrix::direct_sum(&[&thermal(unit.thermal_occupation()), &vacuum(1)])?;
                let traj = unit_run(&unit, &v0, &scn.integrator)?;
                crate::dynamics::max_measure_over_window(&traj, &Bipartition::new(vec![0], vec![1]))
            })
            .collect::<Result<Vec<_>>>()
    })??;
    Ok(SweepResult {
        axis_name: "T_K".into(),
        axis: temperatures.to_vec(),
        e_max: rows.iter().map(|r| r.0).collect(),
        t_star: rows.iter().map(|r| r.1).collect(),
        seed: None,
        config_hash: scn.config_hash.clone(),
    })
}

/// Squeezing sweep plus the `(t, r)` entanglement grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SqueezingResult {
    pub sweep: SweepResult,
    /// Uniform sample times shared by all rows of `grid`.
    pub times: Vec<f64>,
    /// `grid[i][j]`: E(mirror:field) at `times[j]` for squeezing `axis[i]`.
    pub grid: Vec<Vec<f64>>,
}

fn squeezed_unit_initial(unit: &OptomechParams, r: f64, phase: f64) -> Result<CovarianceMatrix> {
    CovarianceMatrix::direct_sum(&[&thermal(unit.thermal_occupation()), &squeezed_vacuum(r, phase)])
}

/// Unit 1 with a thermal mirror at its bath and the field squeezed by each `r`.
pub fn squeezing_sweep(scn: &Scenario, rs: &[f64]) -> Result<SqueezingResult> {
    if rs.is_empty() {
        return Err(Error::validation("squeezing list is empty"));
    }
    if let Some(r) = rs.iter().find(|r| !(r.is_finite() && **r >= 0.0)) {
        return Err(Error::validation(format!("squeezing values must be >= 0, got {r}")));
    }
    let phase = match scn.opt_init {
        OptInit::Squeezed { phase, .. } => phase,
        OptInit::Coherent => 0.0,
    };
    let unit = &scn.unit1;
    let partition = Bipartition::new(vec![0], vec![1]);
    let windows: Vec<(f64, f64, f64)> = with_thread_pool(|| {
        rs.par_iter()
            .map(|&r| {
                let traj = unit_run(unit, &squeezed_unit_initial(unit, r, phase)?, &scn.integrator)?;
                let (e, t) = crate::dynamics::max_measure_over_window(&traj, &partition)?;
                Ok((e, t, traj.window_end))
            })
            .collect::<Result<Vec<_>>>()
    })??;

    let horizon = windows.iter().map(|w| w.2).fold(0.0, f64::max);
    let n = scn.heatmap_samples;
    let times: Vec<f64> = (0..n).map(|j| horizon * j as f64 / (n - 1) as f64).collect();
    let grid: Vec<Vec<f64>> = with_thread_pool(|| {
        rs.par_iter()
            .map(|&r| sample_on_grid(unit, &squeezed_unit_initial(unit, r, phase)?, &scn.integrator, &times, &partition))
            .collect::<Result<Vec<_>>>()
    })??;

    Ok(SqueezingResult {
        sweep: SweepResult {
            axis_name: "r".into(),
            axis: rs.to_vec(),
            e_max: windows.iter().map(|w| w.0).collect(),
            t_star: windows.iter().map(|w| w.1).collect(),
            seed: None,
            config_hash: scn.config_hash.clone(),
        },
        times,
        grid,
    })
}

/// Log-negativity at the given increasing times, integrating interval by interval.
fn sample_on_grid(
    unit: &OptomechParams,
    v0: &CovarianceMatrix,
    cfg: &IntegratorConfig,
    times: &[f64],
    partition: &Bipartition,
) -> Result<Vec<f64>> {
    let (k, d) = (drift_matrix(unit)?, diffusion_matrix(unit)?);
    let mut state = v0.clone();
    let mut t = 0.0;
    let mut out = Vec::with_capacity(times.len());
    for &target in times {
        if target > t {
            let step = IntegratorConfig {
                t_end: target - t,
                dt_max: cfg.dt_max.min(target - t),
                record_stride: usize::MAX,
                stop_at_steady_state: false,
                ..cfg.clone()
            };
            state = evolve(&state, &k, &d, &step)?.states.pop().expect("trajectory is nonempty");
            t = target;
        }
        out.push(partition.log_negativity(&state)?);
    }
    Ok(out)
}

/// Crossing point of a threshold: the axis value between the last point with
/// `value > zero_tol` and the first with `value ≤ zero_tol` (geometric mean),
/// provided the sign pattern is monotone. `None` otherwise.
pub fn threshold_crossing(axis: &[f64], values: &[f64], zero_tol: f64) -> Option<f64> {
    let positive: Vec<bool> = values.iter().map(|&v| v > zero_tol).collect();
    let first_zero = positive.iter().position(|p| !p)?;
    if first_zero == 0 || positive[first_zero..].iter().any(|&p| p) {
        return None;
    }
    Some((axis[first_zero - 1] * axis[first_zero]).sqrt())
}
