//! Command-line front end: run scenarios, sweep parameters, list the
//! built-in presets, and validate scenario documents.
//!
//! Data goes to stdout (or the file named by `--out` / the scenario's own
//! `output.path`); everything else — progress notes, file names, errors —
//! goes to stderr, so piping the CSV always works.

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use switched_cavity::scenario::{
    parse_scenario, preset, preset_summary, run_scenario, scenario_hash, sweep, write_csv,
    write_csv_to, Scenario, ScenarioError, PRESET_NAMES,
};

#[derive(Parser)]
#[command(
    name = "switched-cavity",
    version,
    about = "Spontaneous-emission dynamics of emitters in ultrafast-switched microcavities"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario (a preset name or a TOML file) and emit CSV.
    Run {
        /// Preset name (see `presets`) or path to a scenario file.
        scenario: String,
        /// Output file; defaults to the scenario's own `output.path`,
        /// falling back to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the solver's relative tolerance.
        #[arg(long)]
        rtol: Option<f64>,
        /// Override the solver's absolute tolerance.
        #[arg(long)]
        atol: Option<f64>,
    },
    /// Run one scenario once per value of a swept parameter.
    Sweep {
        /// Preset name or path to a scenario file.
        scenario: String,
        /// Dotted parameter name, e.g. `switch.tau_sw_ps` or `loss.s0`.
        #[arg(long)]
        axis: String,
        /// Comma-separated values to sweep over, in output order.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        /// Directory for the per-value CSV files (created if needed).
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        /// Override the solver's relative tolerance.
        #[arg(long)]
        rtol: Option<f64>,
        /// Override the solver's absolute tolerance.
        #[arg(long)]
        atol: Option<f64>,
    },
    /// List the built-in scenarios.
    Presets,
    /// Parse and validate a scenario file without running it.
    Validate {
        /// Path to a scenario TOML file.
        file: PathBuf,
    },
}

/// Resolves a scenario argument: preset names win, anything else is read as
/// a file. Returns the preset name alongside so outputs can be tagged.
fn load_scenario(spec: &str) -> Result<(Scenario, Option<&str>), ScenarioError> {
    if let Some(s) = preset(spec) {
        let name = PRESET_NAMES
            .into_iter()
            .find(|n| *n == spec)
            .expect("preset() only answers to listed names");
        return Ok((s, Some(name)));
    }
    if !std::path::Path::new(spec).exists() {
        return Err(ScenarioError::Validation(format!(
            "no preset or scenario file named {spec:?} (presets: {})",
            PRESET_NAMES.join(", ")
        )));
    }
    let text = fs::read_to_string(spec)?;
    Ok((parse_scenario(&text)?, None))
}

fn apply_overrides(s: &mut Scenario, rtol: Option<f64>, atol: Option<f64>) {
    if let Some(r) = rtol {
        s.grid.rtol = r;
    }
    if let Some(a) = atol {
        s.grid.atol = a;
    }
}

fn cmd_run(
    spec: &str,
    out: Option<PathBuf>,
    rtol: Option<f64>,
    atol: Option<f64>,
) -> Result<(), ScenarioError> {
    let (mut s, name) = load_scenario(spec)?;
    apply_overrides(&mut s, rtol, atol);
    let mut ts = run_scenario(&s)?;
    if let Some(n) = name {
        ts.metadata.insert(0, ("preset".into(), n.into()));
    }
    match out.or_else(|| s.outputs.path.clone()) {
        Some(path) => {
            write_csv(&ts, &path)?;
            eprintln!("wrote {}", path.display());
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            let done = write_csv_to(&ts, &mut lock).and_then(|()| lock.flush());
            if let Err(e) = done {
                // A closed pipe (e.g. `... | head`) is a normal way for a
                // reader to stop early, not a failure.
                if e.kind() != io::ErrorKind::BrokenPipe {
                    return Err(e.into());
                }
            }
        }
    }
    Ok(())
}

fn cmd_sweep(
    spec: &str,
    axis: &str,
    values: &[f64],
    out_dir: &PathBuf,
    rtol: Option<f64>,
    atol: Option<f64>,
) -> Result<(), ScenarioError> {
    let (mut s, name) = load_scenario(spec)?;
    apply_overrides(&mut s, rtol, atol);
    let series = sweep(&s, axis, values)?;
    fs::create_dir_all(out_dir)?;
    let slug = axis.replace('.', "_");
    for (i, (v, mut ts)) in values.iter().zip(series).enumerate() {
        if let Some(n) = name {
            ts.metadata.insert(0, ("preset".into(), n.into()));
        }
        let path = out_dir.join(format!("{slug}_{i:03}.csv"));
        write_csv(&ts, &path)?;
        println!("{axis}={v:e} -> {}", path.display());
    }
    Ok(())
}

fn cmd_presets() {
    for name in PRESET_NAMES {
        let summary = preset_summary(name).expect("every listed preset has a summary");
        println!("{name:<14} {summary}");
    }
}

fn cmd_validate(file: &PathBuf) -> Result<(), ScenarioError> {
    let text = fs::read_to_string(file)?;
    let s = parse_scenario(&text)?;
    println!(
        "OK: {} is a valid scenario (hash {})",
        file.display(),
        scenario_hash(&s)
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run {
            scenario,
            out,
            rtol,
            atol,
        } => cmd_run(scenario, out.clone(), *rtol, *atol),
        Command::Sweep {
            scenario,
            axis,
            values,
            out_dir,
            rtol,
            atol,
        } => cmd_sweep(scenario, axis, values, out_dir, *rtol, *atol),
        Command::Presets => {
            cmd_presets();
            Ok(())
        }
        Command::Validate { file } => cmd_validate(file),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
