use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use simform_cli::pipeline::{check, execute, Overrides};
use simform_cli::scenario::load_scenario;
use simform_cli::{export, RunError};

/// Environment variable naming the default output directory for run
/// artifacts; the `--out` flag takes precedence.
const OUT_DIR_VAR: &str = "SIMFORM_OUT_DIR";

#[derive(Parser)]
#[command(
    name = "simform",
    version,
    about = "Synthesize, certify, and simulate similar-formation controllers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one or more scenario files end to end and export artifacts.
    Run {
        /// Scenario files (TOML).
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// Output directory for CSV and summary files.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the random-start seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the integration step.
        #[arg(long)]
        dt: Option<f64>,
        /// Override the simulation horizon.
        #[arg(long)]
        horizon: Option<f64>,
        /// Run multiple scenario files in parallel.
        #[arg(long)]
        batch: bool,
    },
    /// Validate and certify a scenario without simulating it.
    Check {
        /// Scenario file (TOML).
        file: PathBuf,
    },
    /// Print the version.
    Version,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run {
            files,
            out,
            seed,
            dt,
            horizon,
            batch,
        } => {
            let out_dir = out
                .or_else(|| std::env::var_os(OUT_DIR_VAR).map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from("."));
            let overrides = Overrides { seed, dt, horizon };
            run_files(&files, &out_dir, &overrides, batch)
        }
        Command::Check { file } => check_file(&file),
        Command::Version => {
            println!("simform {}", env!("CARGO_PKG_VERSION"));
            0
        }
    };
    ExitCode::from(code as u8)
}

fn run_files(files: &[PathBuf], out_dir: &Path, overrides: &Overrides, batch: bool) -> i32 {
    let reports: Vec<(String, i32)> = if batch && files.len() > 1 {
        std::thread::scope(|scope| {
            let handles: Vec<_> = files
                .iter()
                .map(|file| scope.spawn(move || run_one(file, out_dir, overrides)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("run thread panicked"))
                .collect()
        })
    } else {
        files
            .iter()
            .map(|file| run_one(file, out_dir, overrides))
            .collect()
    };
    let mut worst = 0;
    for (text, code) in reports {
        if code == 0 {
            println!("{text}");
        } else {
            eprintln!("{text}");
        }
        worst = worst.max(code);
    }
    worst
}

/// Runs one scenario file; returns its report text and exit code.
fn run_one(file: &Path, out_dir: &Path, overrides: &Overrides) -> (String, i32) {
    let outcome = load_scenario(file).and_then(|scenario| execute(&scenario, overrides));
    let outcome = match outcome {
        Ok(outcome) => outcome,
        Err(e) => return failure(file, &e),
    };
    let written = match export::write_artifacts(out_dir, &outcome) {
        Ok(written) => written,
        Err(e) => return failure(file, &e),
    };
    let mut text = String::new();
    for warning in &outcome.warnings {
        text.push_str(&format!("{}: warning: {warning}\n", file.display()));
    }
    let s = &outcome.summary;
    text.push_str(&format!(
        "{name}: certified, {converged}, final error {err:.3e} after {samples} samples \
         ({mode} leaders, {wall:.2}s)",
        name = outcome.name,
        converged = if s.converged {
            "converged"
        } else {
            "not converged"
        },
        err = s.final_tracking_error,
        samples = s.samples,
        mode = s.leader_mode,
        wall = s.wall_time_seconds,
    ));
    for path in written {
        text.push_str(&format!("\n  wrote {}", path.display()));
    }
    (text, 0)
}

fn check_file(file: &Path) -> i32 {
    let built = match load_scenario(file).and_then(|scenario| check(&scenario)) {
        Ok(built) => built,
        Err(e) => {
            let (text, code) = failure(file, &e);
            eprintln!("{text}");
            return code;
        }
    };
    for warning in &built.warnings {
        println!("{}: warning: {warning}", file.display());
    }
    let r = &built.report;
    println!(
        "{}: certified localizable (kernel dimension {}, eigenvalue real parts in \
         [{}, {}])",
        file.display(),
        r.null_space_dim,
        r.min_real_part,
        r.ff_eigenvalues
            .iter()
            .map(|ev| ev.re)
            .fold(f64::NEG_INFINITY, f64::max),
    );
    0
}

fn failure(file: &Path, e: &RunError) -> (String, i32) {
    (format!("{}: error: {e}", file.display()), e.exit_code())
}
