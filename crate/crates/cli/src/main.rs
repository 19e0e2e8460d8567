mod plot;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::{info, warn};
use optomech_core::dynamics::steady_state;
use optomech_core::gaussian::{gaussian_discord, log_negativity, read_cm_file, write_cm_text, DiscordOptions};
use optomech_core::model::{describe, pair_dynamics};
use optomech_core::protocol::{
    demon_sample, mechanical_initial, measure_series, run_activation, squeezing_sweep, temperature_sweep,
    window_max, Demon, Measure, Scenario,
};
use optomech_core::report::{self, write_text};
use optomech_core::{Error, Result};

use plot::{Heatmap, LinePlot, Series};

/// Discord-activated optomechanical entanglement: Gaussian covariance-matrix simulations.
#[derive(Parser, Debug)]
#[command(name = "optomech", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Scenario file (TOML). Defaults: the reference parameter set with detuning = mechanical frequency.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output file; stdout when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Seed for demon sampling.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,

    /// Also write an SVG next to the output file.
    #[arg(long, global = true)]
    plot: bool,

    /// Accept marginally unphysical imported covariance matrices.
    #[arg(long, global = true)]
    force: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Algebraic steady state of the composed pair, as a matrix file.
    SteadyState,
    /// Time series of the configured measures along the activation run.
    Evolve,
    /// Max-window mirror-field entanglement of unit 1 against temperature.
    SweepTemperature,
    /// Activation run and its correlation-stripped control, side by side.
    Activate,
    /// Max-window entanglement under random local rotations of the mechanical state.
    DemonSample {
        /// Number of rotations (default: `[demon] count`, else 1000).
        #[arg(short = 'n', long = "count")]
        count: Option<usize>,
    },
    /// Max-window entanglement against input field squeezing, plus the (t, r) grid.
    SweepSqueezing,
    /// Gaussian discord of a two-mode matrix file.
    Discord {
        #[arg(long, value_name = "PATH")]
        cm: PathBuf,
        /// Measured mode, 1 or 2.
        #[arg(long, default_value_t = 2)]
        measured_mode: usize,
    },
    /// Log negativity of a matrix file across a bipartition.
    Logneg {
        #[arg(long, value_name = "PATH")]
        cm: PathBuf,
        /// Modes on one side, 1-based and comma separated.
        #[arg(long, value_delimiter = ',', default_value = "2")]
        partition: Vec<usize>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 2 } else { 3 })
        }
    }
}

fn run(cli: &Cli) -> Result<()> {
    if cli.plot && cli.out.is_none() {
        return Err(Error::validation("--plot needs --out (the SVG is written next to it)"));
    }
    if cli.seed.is_some() && !matches!(cli.command, Command::DemonSample { .. }) {
        warn!("--seed is only used by demon-sample");
    }
    match &cli.command {
        Command::Discord { cm, measured_mode } => {
            if !(1..=2).contains(measured_mode) {
                return Err(Error::validation(format!("--measured-mode must be 1 or 2, got {measured_mode}")));
            }
            let v = read_cm_file(cm, cli.force)?;
            let r = gaussian_discord(&v, measured_mode - 1, &DiscordOptions::default())?;
            emit(cli.out.as_deref(), &format!("{}\n", r.discord))
        }
        Command::Logneg { cm, partition } => {
            let v = read_cm_file(cm, cli.force)?;
            let modes = partition
                .iter()
                .map(|&m| {
                    if m == 0 || m > v.n_modes() {
                        Err(Error::validation(format!("--partition: mode {m} outside 1..={}", v.n_modes())))
                    } else {
                        Ok(m - 1)
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            emit(cli.out.as_deref(), &format!("{}\n", log_negativity(&v, &modes)?))
        }
        command => {
            let scn = load_scenario(cli)?;
            match command {
                Command::SteadyState => steady_state_cmd(&scn, cli),
                Command::Evolve => evolve_cmd(&scn, cli),
                Command::SweepTemperature => sweep_temperature_cmd(&scn, cli),
                Command::Activate => activate_cmd(&scn, cli),
                Command::DemonSample { count } => demon_cmd(&scn, cli, *count),
                Command::SweepSqueezing => sweep_squeezing_cmd(&scn, cli),
                Command::Discord { .. } | Command::Logneg { .. } => unreachable!(),
            }
        }
    }
}

fn load_scenario(cli: &Cli) -> Result<Scenario> {
    let scn = match &cli.config {
        Some(path) => Scenario::load_forced(path, cli.force)?,
        None => Scenario::default(),
    };
    for (name, unit) in [("unit1", &scn.unit1), ("unit2", &scn.unit2)] {
        for line in describe(unit) {
            info!("{name}: {line}");
        }
    }
    Ok(scn)
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => {
            write_text(path, text)?;
            info!("wrote {}", path.display());
            Ok(())
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// `<out stem><suffix>.<ext>` in the output directory.
fn sibling(out: &Path, suffix: &str, ext: &str) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "out".into());
    out.with_file_name(format!("{stem}{suffix}.{ext}"))
}

fn emit_plot(cli: &Cli, suffix: &str, svg: impl FnOnce() -> String) -> Result<()> {
    if let (true, Some(out)) = (cli.plot, cli.out.as_deref()) {
        let path = sibling(out, suffix, "svg");
        write_text(&path, &svg())?;
        info!("wrote {}", path.display());
    }
    Ok(())
}

fn steady_state_cmd(scn: &Scenario, cli: &Cli) -> Result<()> {
    let (k, d) = pair_dynamics(&scn.unit1, &scn.unit2)?;
    let v = steady_state(&k, &d)?;
    for m in &scn.measures {
        info!("steady state {} = {:e}", m.column(), m.evaluate(&v)?);
    }
    emit(cli.out.as_deref(), &write_cm_text(&v))
}

fn evolve_cmd(scn: &Scenario, cli: &Cli) -> Result<()> {
    let traj = run_activation(scn)?;
    for w in &traj.warnings {
        warn!("{w}");
    }
    let series = measure_series(&traj, &scn.measures)?;
    emit(cli.out.as_deref(), &report::trajectory_csv(&series, &scn.config_hash))?;
    emit_plot(cli, "", || {
        plot::line_plot(&LinePlot {
            title: "Activation run".into(),
            x_label: "t (s)".into(),
            y_label: "value".into(),
            log_x: false,
            series: series
                .columns
                .iter()
                .map(|(m, c)| Series { label: m.column().into(), xs: series.times.clone(), ys: c.clone() })
                .collect(),
        })
    })
}

fn sweep_temperature_cmd(scn: &Scenario, cli: &Cli) -> Result<()> {
    let result = temperature_sweep(scn, &scn.sweep_temperatures)?;
    emit(cli.out.as_deref(), &report::sweep_csv(&result))?;
    emit_plot(cli, "", || {
        plot::line_plot(&LinePlot {
            title: "Max-window mirror-field entanglement".into(),
            x_label: "T (K)".into(),
            y_label: "E_max".into(),
            log_x: true,
            series: vec![Series { label: "E_max".into(), xs: result.axis.clone(), ys: result.e_max.clone() }],
        })
    })
}

fn activate_cmd(scn: &Scenario, cli: &Cli) -> Result<()> {
    let mut control_scn = scn.clone();
    control_scn.mech_init.strip_correlations = !scn.mech_init.strip_correlations;
    let (main_label, control_label) =
        if scn.mech_init.strip_correlations { ("stripped", "correlated") } else { ("correlated", "stripped") };

    let run = run_activation(scn)?;
    let mut control = run_activation(&control_scn)?;
    // Both runs are judged on the window of the configured one.
    control.window_end = run.window_end;

    let mut csv = report::metadata(&scn.config_hash, None);
    csv.push_str("init,E_max,t_star_s,window_end_s,D_mech_initial\n");
    let mut curves = Vec::new();
    for (label, s, traj) in [(main_label, scn, &run), (control_label, &control_scn, &control)] {
        let (e, t) = window_max(traj, Measure::EMirrorsVsFields)?;
        let d0 = gaussian_discord(&mechanical_initial(s)?, 1, &DiscordOptions::default())?.discord;
        csv.push_str(&format!("{label},{e:e},{t:e},{:e},{d0:e}\n", traj.window_end));
        info!("{label}: max-window E(mirrors:fields) = {e:e} at t = {t:e} s");
        let n = traj.times.iter().take_while(|&&t| t <= run.window_end).count();
        let ys = traj.states[..n]
            .iter()
            .map(|v| Measure::EMirrorsVsFields.evaluate(v))
            .collect::<Result<Vec<_>>>()?;
        curves.push(Series { label: format!("{label} init"), xs: traj.times[..n].to_vec(), ys });
    }
    emit(cli.out.as_deref(), &csv)?;
    emit_plot(cli, "", || {
        plot::line_plot(&LinePlot {
            title: "E(mirrors:fields) over the dynamical window".into(),
            x_label: "t (s)".into(),
            y_label: "E".into(),
            log_x: false,
            series: curves,
        })
    })
}

fn demon_cmd(scn: &Scenario, cli: &Cli, count: Option<usize>) -> Result<()> {
    let configured = match scn.demon {
        Some(Demon::Sample { count, seed }) => Some((count, seed)),
        _ => None,
    };
    let seed = cli
        .seed
        .or(configured.map(|c| c.1))
        .ok_or_else(|| Error::validation("demon-sample requires --seed (or `seed` under [demon])"))?;
    let n = count.or(configured.map(|c| c.0)).unwrap_or(1000);
    let result = demon_sample(scn, n, seed)?;
    info!("min over {n} rotations of max-window E = {:e}", result.min_e_max());
    emit(cli.out.as_deref(), &report::demon_csv(&result))?;
    emit_plot(cli, "", || {
        plot::line_plot(&LinePlot {
            title: "Max-window E under random local rotations".into(),
            x_label: "sample".into(),
            y_label: "E_max".into(),
            log_x: false,
            series: vec![Series {
                label: "E_max".into(),
                xs: (0..result.e_max.len()).map(|i| i as f64).collect(),
                ys: result.e_max.clone(),
            }],
        })
    })
}

fn sweep_squeezing_cmd(scn: &Scenario, cli: &Cli) -> Result<()> {
    let result = squeezing_sweep(scn, &scn.sweep_squeezing)?;
    emit(cli.out.as_deref(), &report::sweep_csv(&result.sweep))?;
    match cli.out.as_deref() {
        Some(out) => emit(Some(&sibling(out, "_heatmap", "csv")), &report::heatmap_csv(&result))?,
        None => info!("heatmap grid not written (needs --out)"),
    }
    emit_plot(cli, "", || {
        plot::line_plot(&LinePlot {
            title: "Max-window mirror-field entanglement".into(),
            x_label: "r".into(),
            y_label: "E_max".into(),
            log_x: false,
            series: vec![Series { label: "E_max".into(), xs: result.sweep.axis.clone(), ys: result.sweep.e_max.clone() }],
        })
    })?;
    emit_plot(cli, "_heatmap", || {
        plot::heatmap(&Heatmap {
            title: "E(mirror:field) over time and squeezing".into(),
            x_label: "t (s)".into(),
            y_label: "r".into(),
            xs: result.times.clone(),
            ys: result.sweep.axis.clone(),
            values: result.grid.clone(),
        })
    })
}
