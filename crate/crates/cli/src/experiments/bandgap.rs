//! Band-gap field study: solves the effective problem at a band-gap
//! wavenumber and a transmission wavenumber, dumps the macroscopic field
//! and the reconstruction (full fields and a horizontal line cut), and
//! reports the decay-ratio and inclusion-amplitude diagnostics.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use helmholtz_hmm::effective::{
    line_sample, solve_effective, InclusionLayout, ReconstructionScaling,
};
use helmholtz_hmm::fem::FieldP1;
use helmholtz_hmm::mesh::structured_mesh;
use helmholtz_hmm::Complex64;

use super::RunOutput;
use crate::config::ExperimentConfig;
use crate::csvout::{fmt_f64, CsvWriter};
use crate::RunError;

pub struct BandgapCase {
    pub k: f64,
    pub mu_eff: Complex64,
    pub decay_ratio: f64,
    /// max |u0| over fine-mesh vertices inside the inclusions.
    pub max_u0_inclusions: f64,
    pub max_u_h: f64,
}

pub struct BandgapResult {
    pub cases: Vec<BandgapCase>,
    pub scaling: ReconstructionScaling,
    pub output: RunOutput,
}

pub fn run_bandgap(cfg: &ExperimentConfig, out_dir: &Path) -> Result<BandgapResult, RunError> {
    let n_macro = cfg.n_macro_list.last().copied().unwrap_or(64);
    let n_cell = n_macro * cfg.cell_ratio;
    let scaling = ReconstructionScaling::Unscaled;
    let eval_mesh = Arc::new(structured_mesh(cfg.domain, cfg.n_fine, None)?);
    let layout = InclusionLayout::new(&cfg.scatterer, cfg.delta, Some(cfg.inclusion));

    let mut cases = Vec::new();
    let mut files = Vec::new();
    for &k in &cfg.k_list {
        let problem = cfg.macro_problem(k, n_macro, n_cell);
        let solution = solve_effective(&problem)?;
        let u0 = solution.reconstruct(&eval_mesh, scaling)?;

        let mut max_u0 = 0.0f64;
        for (v, &p) in eval_mesh.vertices().iter().enumerate() {
            if layout.cell_coords(p).is_some() {
                max_u0 = max_u0.max(u0.coeffs()[v].norm());
            }
        }

        let tag = format!("k{}", k.round() as i64);
        files.push(dump_field(cfg, out_dir, &format!("uh_{tag}.csv"), &solution.u_h, k)?);
        files.push(dump_field(cfg, out_dir, &format!("u0_{tag}.csv"), &u0, k)?);
        files.push(dump_line(cfg, out_dir, &format!("line_uh_{tag}.csv"), &solution.u_h, k)?);
        files.push(dump_line(cfg, out_dir, &format!("line_u0_{tag}.csv"), &u0, k)?);

        cases.push(BandgapCase {
            k,
            mu_eff: solution.cell.mu_eff,
            decay_ratio: solution.decay_ratio(),
            max_u0_inclusions: max_u0,
            max_u_h: solution.u_h.max_abs(None),
        });
    }

    let mut csv = CsvWriter::create(
        &out_dir.join("bandgap_summary.csv"),
        &[
            ("config_hash", cfg.hash()),
            ("experiment", "bandgap".into()),
            ("n_macro", n_macro.to_string()),
            ("n_cell", n_cell.to_string()),
            ("n_fine", cfg.n_fine.to_string()),
            ("reconstruction_scaling", scaling.label().into()),
            ("incident_amplitude", fmt_f64(cfg.incident_amplitude.norm())),
            ("solver_residual", "1e-10".into()),
        ],
        &["k", "mu_re", "mu_im", "decay_ratio", "max_u0_inclusions", "max_u_h"],
    )?;
    for c in &cases {
        csv.row(&[
            fmt_f64(c.k),
            fmt_f64(c.mu_eff.re),
            fmt_f64(c.mu_eff.im),
            fmt_f64(c.decay_ratio),
            fmt_f64(c.max_u0_inclusions),
            fmt_f64(c.max_u_h),
        ])?;
    }
    files.push(csv.finish()?);

    let summary = cases
        .iter()
        .map(|c| {
            format!(
                "k={}: mu_eff={:.4}{:+.4}i, decay_ratio={:.4}, max|u0| in inclusions={:.3}",
                c.k, c.mu_eff.re, c.mu_eff.im, c.decay_ratio, c.max_u0_inclusions
            )
        })
        .collect();
    Ok(BandgapResult { cases, scaling, output: RunOutput { files, summary } })
}

fn dump_field(
    cfg: &ExperimentConfig,
    out_dir: &Path,
    name: &str,
    field: &FieldP1,
    k: f64,
) -> Result<std::path::PathBuf, RunError> {
    let path = out_dir.join(name);
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let mut out = BufWriter::new(File::create(&path)?);
    writeln!(out, "# config_hash={} k={} kind=field", cfg.hash(), fmt_f64(k))?;
    field.dump_csv(&mut out)?;
    out.flush()?;
    Ok(path)
}

fn dump_line(
    cfg: &ExperimentConfig,
    out_dir: &Path,
    name: &str,
    field: &FieldP1,
    k: f64,
) -> Result<std::path::PathBuf, RunError> {
    let samples = line_sample(field, cfg.y_line, cfg.n_samples)?;
    let mut csv = CsvWriter::create(
        &out_dir.join(name),
        &[
            ("config_hash", cfg.hash()),
            ("k", fmt_f64(k)),
            ("y_line", fmt_f64(cfg.y_line)),
        ],
        &["x", "re", "im", "abs"],
    )?;
    for (x, v) in &samples {
        csv.row(&[fmt_f64(*x), fmt_f64(v.re), fmt_f64(v.im), fmt_f64(v.norm())])?;
    }
    Ok(csv.finish()?)
}
