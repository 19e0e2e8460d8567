//! CSV tables. Every file starts with `#` lines carrying the tool version and
//! the configuration digest; numbers use the shortest round-trip form.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::protocol::{DemonResult, MeasureSeries, SqueezingResult, SweepResult};

pub const TOOL_VERSION: &str = concat!("optomech ", env!("CARGO_PKG_VERSION"));

pub fn metadata(config_hash: &str, seed: Option<u64>) -> String {
    let mut out = format!("# {TOOL_VERSION}\n# config_sha256 = {config_hash}\n");
    if let Some(seed) = seed {
        writeln!(out, "# seed = {seed}").unwrap();
    }
    out
}

fn row(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v:e}")).collect::<Vec<_>>().join(",")
}

/// `t_s` then one column per recorded measure.
pub fn trajectory_csv(series: &MeasureSeries, config_hash: &str) -> String {
    let mut out = metadata(config_hash, None);
    writeln!(out, "# window_end_s = {:e}", series.window_end).unwrap();
    let names: Vec<&str> = series.columns.iter().map(|(m, _)| m.column()).collect();
    writeln!(out, "t_s,{}", names.join(",")).unwrap();
    for (i, t) in series.times.iter().enumerate() {
        let mut values = vec![*t];
        values.extend(series.columns.iter().map(|(_, c)| c[i]));
        writeln!(out, "{}", row(&values)).unwrap();
    }
    out
}

/// `<axis>,E_max,t_star_s`, one row per axis point.
pub fn sweep_csv(result: &SweepResult) -> String {
    let mut out = metadata(&result.config_hash, result.seed);
    writeln!(out, "{},E_max,t_star_s", result.axis_name).unwrap();
    for i in 0..result.axis.len() {
        writeln!(out, "{}", row(&[result.axis[i], result.e_max[i], result.t_star[i]])).unwrap();
    }
    out
}

/// `sample,theta1,theta2,E_max,t_star_s`.
pub fn demon_csv(result: &DemonResult) -> String {
    let mut out = metadata(&result.config_hash, Some(result.seed));
    writeln!(out, "sample,theta1,theta2,E_max,t_star_s").unwrap();
    for (i, (a, b)) in result.angles.iter().enumerate() {
        writeln!(out, "{i},{}", row(&[*a, *b, result.e_max[i], result.t_star[i]])).unwrap();
    }
    out
}

/// Long-form `(r, t)` grid: `r,t_s,E`.
pub fn heatmap_csv(result: &SqueezingResult) -> String {
    let mut out = metadata(&result.sweep.config_hash, None);
    writeln!(out, "r,t_s,E").unwrap();
    for (r, values) in result.sweep.axis.iter().zip(&result.grid) {
        for (t, e) in result.times.iter().zip(values) {
            writeln!(out, "{}", row(&[*r, *t, *e])).unwrap();
        }
    }
    out
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| Error::Io { path: path.display().to_string(), source })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_schema() {
        let r = SweepResult {
            axis_name: "T_K".into(),
            axis: vec![0.01, 0.4],
            e_max: vec![0.5, 0.0],
            t_star: vec![1e-6, 0.0],
            seed: None,
            config_hash: "abc".into(),
        };
        let csv = sweep_csv(&r);
        let lines: Vec<&str> = csv.lines().collect();
        assert!(lines[0].starts_with("# optomech "));
        assert_eq!(lines[1], "# config_sha256 = abc");
        assert_eq!(lines[2], "T_K,E_max,t_star_s");
        assert_eq!(lines[3], "1e-2,5e-1,1e-6");
        assert_eq!(lines.len(), 5);
        let back: Vec<f64> = lines[3].split(',').map(|x| x.parse().unwrap()).collect();
        assert_eq!(back, vec![0.01, 0.5, 1e-6]);
    }
}
