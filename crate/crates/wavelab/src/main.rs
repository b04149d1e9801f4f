//! Command-line entry point for the experiment harness.
//!
//! Every subcommand reads the same line-based configuration (defaults when no
//! file is given), applies `--set section.key=value` overrides, and writes
//! deterministic CSV output into the configured directory.  Exit codes: 0 on
//! success, 2 when a run gate (depth, hyperbolicity, non-resonance) rejects
//! the configuration, 3 on a numerical abort, 1 otherwise.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use wavelab::csvout::emit_csv;
use wavelab::experiments::{
    coeff_dump, dispersion_table, resonance_scan, run_convergence, run_residual, run_simulate,
    COEFF_HEADER, CONVERGENCE_HEADER, DISPERSION_HEADER, RESIDUAL_HEADER, SCAN_HEADER,
    SIMULATE_HEADER,
};
use wavelab::{load_config, ExperimentConfig, HarnessError};

#[derive(Parser)]
#[command(name = "wavelab", about = "Modulation/water-wave experiment harness")]
struct Cli {
    /// Configuration file (defaults are used when omitted).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override a configuration entry, e.g. `--set params.mu=2`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    sets: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate frequency, group velocity, and symbols over a wavenumber range.
    DispersionTable,
    /// Scan for exact second/third-harmonic resonances over parameter grids.
    ResonanceScan,
    /// Integrate the modulation system and write reconstructed surface snapshots.
    Simulate,
    /// Measure the consistency residual of both reconstruction orders.
    Residual,
    /// Run the convergence study of the modulation approximation.
    Convergence,
    /// Dump amplitude norms of the full coefficient hierarchy.
    CoeffDump,
}

fn build_config(cli: &Cli) -> Result<ExperimentConfig, HarnessError> {
    let mut cfg = match &cli.config {
        Some(path) => load_config(path)?,
        None => ExperimentConfig::default(),
    };
    for s in &cli.sets {
        let (key, value) = s.split_once('=').ok_or_else(|| HarnessError::Parse {
            line: 0,
            message: format!("override `{s}` is not of the form key=value"),
        })?;
        cfg.set(key.trim(), value.trim())?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<(), HarnessError> {
    let cfg = build_config(cli)?;
    let dir = Path::new(&cfg.out_dir);
    match cli.command {
        Command::DispersionTable => {
            let rows = dispersion_table(&cfg)?;
            let path = dir.join("dispersion_table.csv");
            emit_csv(&path, &DISPERSION_HEADER, &rows)?;
            println!("wrote {} rows to {}", rows.len(), path.display());
        }
        Command::ResonanceScan => {
            let rows = resonance_scan(&cfg)?;
            let path = dir.join("resonance_scan.csv");
            emit_csv(&path, &SCAN_HEADER, &rows)?;
            println!("wrote {} rows to {}", rows.len(), path.display());
        }
        Command::Simulate => {
            let report = run_simulate(&cfg)?;
            let path = dir.join("simulate.csv");
            emit_csv(&path, &SIMULATE_HEADER, &report.rows)?;
            println!(
                "wrote {} snapshots and {} to {}",
                report.stems.len(),
                path.file_name().unwrap().to_string_lossy(),
                dir.display()
            );
        }
        Command::Residual => {
            let report = run_residual(&cfg)?;
            let path = dir.join("residual.csv");
            emit_csv(&path, &RESIDUAL_HEADER, &report.rows)?;
            for (tag, fit) in &report.slopes {
                println!("{tag} residual slope {:.3}", fit.slope);
            }
            println!("wrote {}", path.display());
        }
        Command::Convergence => {
            let report = run_convergence(&cfg)?;
            let path = dir.join("convergence.csv");
            emit_csv(&path, &CONVERGENCE_HEADER, &report.rows)?;
            for (eps, sup) in &report.sup_errors {
                println!("eps {eps:.6}: sup error {sup:.6e}");
            }
            println!("convergence slope {:.3}", report.slope.slope);
            println!("wrote {}", path.display());
        }
        Command::CoeffDump => {
            let rows = coeff_dump(&cfg)?;
            let path = dir.join("coeff_dump.csv");
            emit_csv(&path, &COEFF_HEADER, &rows)?;
            println!("wrote {} rows to {}", rows.len(), path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
