//! File artifacts of a run: trajectory CSV, error CSV, summary TOML.
//!
//! Numbers are written with Rust's shortest round-trip formatting, so
//! parsing a column back with `str::parse::<f64>` reproduces the exact
//! bits that were simulated.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use simform::{ErrorSeries, Trajectory};

use crate::error::{RunError, RunResult};
use crate::pipeline::RunOutcome;

/// Renders a trajectory as CSV with header
/// `t,x1,y1,...,xn,yn,u_x1,u_y1,...,u_xn,u_yn`.
pub fn trajectory_csv(trajectory: &Trajectory) -> String {
    assert!(!trajectory.states.is_empty(), "empty trajectory");
    let n = trajectory.states[0].len() / 2;
    let mut out = String::from("t");
    for i in 1..=n {
        write!(out, ",x{i},y{i}").unwrap();
    }
    for i in 1..=n {
        write!(out, ",u_x{i},u_y{i}").unwrap();
    }
    out.push('\n');
    for ((t, state), input) in trajectory
        .times
        .iter()
        .zip(&trajectory.states)
        .zip(&trajectory.inputs)
    {
        write!(out, "{t}").unwrap();
        for v in state.iter().chain(input.iter()) {
            write!(out, ",{v}").unwrap();
        }
        out.push('\n');
    }
    out
}

/// Renders an error series as CSV with header `t,error`.
pub fn error_csv(series: &ErrorSeries) -> String {
    let mut out = String::from("t,error\n");
    for (t, e) in series.times.iter().zip(&series.errors) {
        writeln!(out, "{t},{e}").unwrap();
    }
    out
}

/// Parses a trajectory CSV produced by [`trajectory_csv`] back into
/// numeric rows, header excluded.
pub fn parse_csv_rows(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .skip(1)
        .map(|line| {
            line.split(',')
                .map(|field| field.parse().expect("numeric CSV field"))
                .collect()
        })
        .collect()
}

/// Writes the three artifacts of a run into `dir`, named after the
/// scenario: `<name>_trajectory.csv`, `<name>_error.csv`,
/// `<name>_summary.toml`. Returns the paths written.
pub fn write_artifacts(dir: &Path, outcome: &RunOutcome) -> RunResult<Vec<PathBuf>> {
    let io_err = |path: &Path| {
        let path = path.display().to_string();
        move |source: std::io::Error| RunError::Io { path, source }
    };
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let files = [
        (
            format!("{}_trajectory.csv", outcome.name),
            trajectory_csv(&outcome.trajectory),
        ),
        (
            format!("{}_error.csv", outcome.name),
            error_csv(&outcome.errors),
        ),
        (
            format!("{}_summary.toml", outcome.name),
            outcome.summary.to_toml(),
        ),
    ];
    let mut written = Vec::new();
    for (file, contents) in files {
        let path = dir.join(file);
        std::fs::write(&path, contents).map_err(io_err(&path))?;
        written.push(path);
    }
    Ok(written)
}
