//! The experiment runners behind the CLI subcommands.
//!
//! Each runner consumes a validated [`ExperimentConfig`], writes its CSV
//! outputs under the chosen directory, and returns the structured results
//! so tests can assert on them directly.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use helmholtz_hmm::cell::{CellProblem, CellSolution};
use helmholtz_hmm::effective::solve_effective_given;
use helmholtz_hmm::fem::FieldP1;
use helmholtz_hmm::mesh::structured_mesh;

use crate::config::ExperimentConfig;
use crate::RunError;

pub mod bandgap;
pub mod eoc_study;
pub mod manufactured;
pub mod mueff;
pub mod reconstruction;
pub mod resolution;

pub use bandgap::run_bandgap;
pub use eoc_study::run_eoc;
pub use manufactured::run_manufactured;
pub use mueff::run_mueff_sweep;
pub use reconstruction::run_reconstruction;
pub use resolution::run_resolution;

/// Files written plus one-line findings, printed by the CLI.
pub struct RunOutput {
    pub files: Vec<PathBuf>,
    pub summary: Vec<String>,
}

pub fn run(cfg: &ExperimentConfig, out_dir: &Path) -> Result<RunOutput, RunError> {
    use crate::config::ExperimentKind::*;
    match cfg.kind {
        MueffSweep => run_mueff_sweep(cfg, out_dir).map(|r| r.output),
        Resolution => run_resolution(cfg, out_dir).map(|r| r.output),
        Eoc => run_eoc(cfg, out_dir).map(|r| r.output),
        Reconstruction => run_reconstruction(cfg, out_dir).map(|r| r.output),
        Bandgap => run_bandgap(cfg, out_dir).map(|r| r.output),
        Manufactured => run_manufactured(cfg, out_dir).map(|r| r.output),
    }
}

/// Homogenized reference: effective parameters from the reference cell mesh
/// applied on the reference macro mesh.
pub fn reference_solution(cfg: &ExperimentConfig, k: f64) -> Result<FieldP1, RunError> {
    let cell_problem = CellProblem::new(cfg.cell_config(cfg.n_ref_cell))?;
    let cell = cell_problem.solve(k)?;
    reference_solution_with(cfg, k, &cell)
}

/// Same, reusing an existing reference cell solution.
pub fn reference_solution_with(
    cfg: &ExperimentConfig,
    k: f64,
    cell: &CellSolution,
) -> Result<FieldP1, RunError> {
    let problem = cfg.macro_problem(k, cfg.n_ref_macro, cfg.n_ref_cell);
    let mesh = Arc::new(structured_mesh(problem.domain, problem.n_macro, Some(problem.scatterer))?);
    Ok(solve_effective_given(&problem, &mesh, cell)?)
}

/// L2 norm of the nodal difference of two fields on the same mesh.
pub fn same_mesh_l2_diff(a: &FieldP1, b: &FieldP1) -> Result<f64, RunError> {
    if a.coeffs().len() != b.coeffs().len() {
        return Err(RunError::Core(helmholtz_hmm::Error::DomainMismatch));
    }
    let diff: Vec<_> = a.coeffs().iter().zip(b.coeffs()).map(|(x, y)| x - y).collect();
    let field = FieldP1::new(Arc::clone(a.mesh()), diff)?;
    Ok(field.norm_l2(None))
}
