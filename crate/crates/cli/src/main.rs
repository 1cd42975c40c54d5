//! `hmm` — experiment CLI for the high-contrast Helmholtz solver.
//!
//! Every experiment subcommand reads an optional flat key-value config file,
//! applies `--set key=value` overrides, writes CSVs into `--out`, and prints
//! the written files and a short summary. On failure a machine-readable
//! error line goes to stderr and the exit code is nonzero.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hmm_experiments::config::{ExperimentConfig, ExperimentKind};
use hmm_experiments::experiments;
use hmm_experiments::RunError;

#[derive(Parser)]
#[command(name = "hmm", version, about = "High-contrast Helmholtz multiscale experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Flat key-value config file (see README for the grammar).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for CSV files.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Override a config key, e.g. --set k=34 (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Args)]
struct DumpMeshArgs {
    /// Box as x_min,y_min,x_max,y_max.
    #[arg(long, value_name = "BOX", default_value = "0.25,0.25,0.75,0.75")]
    domain: String,
    /// Subdivision (squares per side).
    #[arg(long, short)]
    n: usize,
    /// Optional inner box to tag, same format.
    #[arg(long, value_name = "BOX")]
    inner: Option<String>,
    /// Output file.
    #[arg(long, default_value = "mesh.csv")]
    out_file: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Effective-permeability sweep over k with the eigen-series oracle.
    MueffSweep(ExperimentArgs),
    /// H1k error vs the homogenized reference across refinement levels and k.
    Resolution(ExperimentArgs),
    /// Convergence history and EOC vs the homogenized reference.
    Eoc(ExperimentArgs),
    /// L2 error of macroscopic part and reconstruction vs the heterogeneous
    /// reference.
    Reconstruction(ExperimentArgs),
    /// Band-gap vs transmission field dumps and diagnostics.
    Bandgap(ExperimentArgs),
    /// Plane-wave manufactured-solution convergence.
    Manufactured(ExperimentArgs),
    /// Write a structured mesh as CSV (debugging/plotting).
    DumpMesh(DumpMeshArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::MueffSweep(a) => run_experiment(ExperimentKind::MueffSweep, a),
        Command::Resolution(a) => run_experiment(ExperimentKind::Resolution, a),
        Command::Eoc(a) => run_experiment(ExperimentKind::Eoc, a),
        Command::Reconstruction(a) => run_experiment(ExperimentKind::Reconstruction, a),
        Command::Bandgap(a) => run_experiment(ExperimentKind::Bandgap, a),
        Command::Manufactured(a) => run_experiment(ExperimentKind::Manufactured, a),
        Command::DumpMesh(a) => dump_mesh(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{{\"error\":\"{}\",\"message\":\"{}\"}}", e.kind(), escape(&e.to_string()));
            ExitCode::FAILURE
        }
    }
}

fn run_experiment(kind: ExperimentKind, args: ExperimentArgs) -> Result<(), RunError> {
    let mut overrides = args.overrides.clone();
    // The subcommand pins the experiment kind.
    overrides.push(format!("experiment={}", kind.name()));
    let cfg = ExperimentConfig::load(args.config.as_deref(), &overrides)?;
    let out = experiments::run(&cfg, &args.out)?;
    for line in &out.summary {
        println!("{line}");
    }
    for f in &out.files {
        println!("wrote {}", f.display());
    }
    Ok(())
}

fn dump_mesh(args: DumpMeshArgs) -> Result<(), RunError> {
    use helmholtz_hmm::geometry::AxisBox;
    use helmholtz_hmm::mesh::structured_mesh;

    let parse_box = |s: &str| -> Result<AxisBox, RunError> {
        let parts: Vec<f64> = s
            .split(',')
            .map(|p| p.trim().parse())
            .collect::<Result<_, _>>()
            .map_err(|_| {
                RunError::Config(hmm_experiments::config::ConfigError(format!(
                    "invalid box '{s}'"
                )))
            })?;
        if parts.len() != 4 || parts[0] >= parts[2] || parts[1] >= parts[3] {
            return Err(RunError::Config(hmm_experiments::config::ConfigError(format!(
                "invalid box '{s}'"
            ))));
        }
        Ok(AxisBox::new(parts[0], parts[1], parts[2], parts[3]))
    };

    let domain = parse_box(&args.domain)?;
    let inner = args.inner.as_deref().map(parse_box).transpose()?;
    let mesh = structured_mesh(domain, args.n, inner)?;
    if let Some(parent) = args.out_file.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let mut out = std::io::BufWriter::new(std::fs::File::create(&args.out_file)?);
    mesh.dump_csv(&mut out)?;
    println!(
        "wrote {} ({} vertices, {} triangles, h_max {:.6})",
        args.out_file.display(),
        mesh.n_vertices(),
        mesh.n_triangles(),
        mesh.h_max()
    );
    Ok(())
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}
