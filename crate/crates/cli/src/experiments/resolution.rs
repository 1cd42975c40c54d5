//! Resolution-condition study: H1k error against the homogenized reference
//! over simultaneously refined macro/cell meshes at several wavenumbers,
//! with two derived per-wavenumber thresholds (first level below half the
//! coarsest error, and the onset of steady decay).

use std::path::Path;

use helmholtz_hmm::cell::CellProblem;
use helmholtz_hmm::effective::solve_effective_given;
use helmholtz_hmm::fem::{cross_mesh_error, FieldP1};
use rayon::prelude::*;

use super::{reference_solution, RunOutput};
use crate::config::ExperimentConfig;
use crate::csvout::{fmt_f64, CsvWriter};
use crate::eoc::{compute_eoc, decay_onset, half_value_threshold};
use crate::RunError;

/// Minimal consecutive EOC counted as "decaying" for the onset threshold.
pub const ONSET_MIN_RATE: f64 = 0.5;

pub struct ResolutionRow {
    pub k: f64,
    pub n: usize,
    pub entities: usize,
    pub h_max: f64,
    pub err_h1k: f64,
    pub eoc: Option<f64>,
    pub below_half: bool,
}

pub struct KThresholds {
    pub k: f64,
    /// Entity count of the first level with error below half the coarsest.
    pub half_entities: Option<usize>,
    /// Entity count of the level from which EOC stays >= ONSET_MIN_RATE.
    pub onset_entities: Option<usize>,
}

pub struct ResolutionResult {
    pub rows: Vec<ResolutionRow>,
    pub thresholds: Vec<KThresholds>,
    pub output: RunOutput,
}

pub fn run_resolution(cfg: &ExperimentConfig, out_dir: &Path) -> Result<ResolutionResult, RunError> {
    let references: Vec<(f64, FieldP1)> = cfg
        .k_list
        .iter()
        .map(|&k| Ok((k, reference_solution(cfg, k)?)))
        .collect::<Result<_, RunError>>()?;

    // errors[ki][level]
    let mut errors: Vec<Vec<(usize, f64, f64)>> = vec![Vec::new(); cfg.k_list.len()];
    for &n in &cfg.n_macro_list {
        let n_cell = n * cfg.cell_ratio;
        let cell_problem = CellProblem::new(cfg.cell_config(n_cell))?;
        let (w1, w2) = cell_problem.solve_correctors()?;
        let per_k: Vec<(f64, f64)> = references
            .par_iter()
            .map(|(k, u_ref)| {
                let cell = cell_problem.solve_at(*k, w1.clone(), w2.clone())?;
                let problem = cfg.macro_problem(*k, n, n_cell);
                let mesh = problem.macro_mesh()?;
                let u_h = solve_effective_given(&problem, &mesh, &cell)?;
                let (_, err_h1k) = cross_mesh_error(&u_h, u_ref, *k)?;
                Ok((mesh.h_max(), err_h1k))
            })
            .collect::<Result<_, RunError>>()?;
        for (ki, &(h, e)) in per_k.iter().enumerate() {
            errors[ki].push((n, h, e));
        }
    }

    let mut rows = Vec::new();
    let mut thresholds = Vec::new();
    for (ki, &k) in cfg.k_list.iter().enumerate() {
        let series = &errors[ki];
        let he: Vec<(f64, f64)> = series.iter().map(|&(_, h, e)| (h, e)).collect();
        let eocs = compute_eoc(&he)?;
        let just_errors: Vec<f64> = series.iter().map(|&(_, _, e)| e).collect();
        let half = half_value_threshold(&just_errors);
        let onset = decay_onset(&he, ONSET_MIN_RATE)?;
        let entity_of = |idx: usize| 2 * series[idx].0 * series[idx].0;
        thresholds.push(KThresholds {
            k,
            half_entities: half.map(entity_of),
            onset_entities: onset.map(entity_of),
        });
        for (li, &(n, h, e)) in series.iter().enumerate() {
            rows.push(ResolutionRow {
                k,
                n,
                entities: 2 * n * n,
                h_max: h,
                err_h1k: e,
                eoc: (li > 0).then(|| eocs[li - 1]),
                below_half: half.is_some_and(|t| li >= t),
            });
        }
    }

    let threshold_text = thresholds
        .iter()
        .map(|t| {
            format!(
                "k={}:half={} onset={}",
                t.k,
                t.half_entities.map_or("-".into(), |e| e.to_string()),
                t.onset_entities.map_or("-".into(), |e| e.to_string()),
            )
        })
        .collect::<Vec<_>>()
        .join("; ");

    let mut csv = CsvWriter::create(
        &out_dir.join("resolution.csv"),
        &[
            ("config_hash", cfg.hash()),
            ("experiment", "resolution".into()),
            ("cell_ratio", cfg.cell_ratio.to_string()),
            ("n_ref_macro", cfg.n_ref_macro.to_string()),
            ("n_ref_cell", cfg.n_ref_cell.to_string()),
            ("onset_min_rate", fmt_f64(ONSET_MIN_RATE)),
            ("thresholds", threshold_text.clone()),
            ("solver_residual", "1e-10".into()),
        ],
        &["k", "n", "entities", "h_max", "err_h1k", "eoc", "below_half"],
    )?;
    for r in &rows {
        csv.row(&[
            fmt_f64(r.k),
            r.n.to_string(),
            r.entities.to_string(),
            fmt_f64(r.h_max),
            fmt_f64(r.err_h1k),
            r.eoc.map(fmt_f64).unwrap_or_default(),
            (r.below_half as u8).to_string(),
        ])?;
    }
    let path = csv.finish()?;

    Ok(ResolutionResult {
        rows,
        thresholds,
        output: RunOutput { files: vec![path], summary: vec![threshold_text] },
    })
}
