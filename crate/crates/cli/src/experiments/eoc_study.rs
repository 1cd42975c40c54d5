//! Convergence history of the macroscopic part against the homogenized
//! reference, with EOC columns (the convergence-table experiment).

use std::path::Path;

use helmholtz_hmm::cell::CellProblem;
use helmholtz_hmm::effective::solve_effective_given;
use helmholtz_hmm::fem::cross_mesh_error;

use super::{reference_solution, RunOutput};
use crate::config::ExperimentConfig;
use crate::csvout::{fmt_f64, CsvWriter};
use crate::eoc::compute_eoc;
use crate::RunError;

pub struct EocRow {
    pub n: usize,
    pub h_max: f64,
    /// The sqrt(2)/n mesh label the published tables use.
    pub h_label: f64,
    pub err_l2: f64,
    pub err_h1k: f64,
    pub eoc_l2: Option<f64>,
    pub eoc_h1k: Option<f64>,
}

pub struct EocResult {
    pub rows: Vec<EocRow>,
    pub output: RunOutput,
}

pub fn run_eoc(cfg: &ExperimentConfig, out_dir: &Path) -> Result<EocResult, RunError> {
    let k = cfg.k;
    let mut rows: Vec<EocRow> = Vec::with_capacity(cfg.n_macro_list.len());

    if !cfg.n_macro_list.is_empty() {
        let u_ref = reference_solution(cfg, k)?;
        for &n in &cfg.n_macro_list {
            let n_cell = n * cfg.cell_ratio;
            let cell_problem = CellProblem::new(cfg.cell_config(n_cell))?;
            let cell = cell_problem.solve(k)?;
            let problem = cfg.macro_problem(k, n, n_cell);
            let mesh = problem.macro_mesh()?;
            let u_h = solve_effective_given(&problem, &mesh, &cell)?;
            let (err_l2, err_h1k) = cross_mesh_error(&u_h, &u_ref, k)?;
            rows.push(EocRow {
                n,
                h_max: mesh.h_max(),
                h_label: 2f64.sqrt() / n as f64,
                err_l2,
                err_h1k,
                eoc_l2: None,
                eoc_h1k: None,
            });
        }
        let hs: Vec<f64> = rows.iter().map(|r| r.h_max).collect();
        let l2: Vec<(f64, f64)> = hs.iter().zip(&rows).map(|(&h, r)| (h, r.err_l2)).collect();
        let h1: Vec<(f64, f64)> = hs.iter().zip(&rows).map(|(&h, r)| (h, r.err_h1k)).collect();
        for (i, rate) in compute_eoc(&l2)?.into_iter().enumerate() {
            rows[i + 1].eoc_l2 = Some(rate);
        }
        for (i, rate) in compute_eoc(&h1)?.into_iter().enumerate() {
            rows[i + 1].eoc_h1k = Some(rate);
        }
    }

    let mut csv = CsvWriter::create(
        &out_dir.join("eoc.csv"),
        &[
            ("config_hash", cfg.hash()),
            ("experiment", "eoc".into()),
            ("k", fmt_f64(k)),
            ("cell_ratio", cfg.cell_ratio.to_string()),
            ("n_ref_macro", cfg.n_ref_macro.to_string()),
            ("n_ref_cell", cfg.n_ref_cell.to_string()),
            ("solver_residual", "1e-10".into()),
        ],
        &["n", "h_max", "h_label", "err_l2", "err_h1k", "eoc_l2", "eoc_h1k"],
    )?;
    for r in &rows {
        csv.row(&[
            r.n.to_string(),
            fmt_f64(r.h_max),
            fmt_f64(r.h_label),
            fmt_f64(r.err_l2),
            fmt_f64(r.err_h1k),
            r.eoc_l2.map(fmt_f64).unwrap_or_default(),
            r.eoc_h1k.map(fmt_f64).unwrap_or_default(),
        ])?;
    }
    let path = csv.finish()?;

    let summary = match rows.last() {
        Some(last) => vec![format!(
            "finest level n={}: err_l2={:.6}, err_h1k={:.6}, eoc_l2={:.3}, eoc_h1k={:.3}",
            last.n,
            last.err_l2,
            last.err_h1k,
            last.eoc_l2.unwrap_or(f64::NAN),
            last.eoc_h1k.unwrap_or(f64::NAN)
        )],
        None => vec!["no levels configured".into()],
    };
    Ok(EocResult { rows, output: RunOutput { files: vec![path], summary } })
}
