//! Macroscopic effective scattering solve and the zeroth-order fine-scale
//! reconstruction.
//!
//! The effective problem uses the cell solution's parameters inside the
//! scatterer (a_eff, mu_eff) and vacuum outside, with the impedance
//! condition on the outer boundary. The reconstruction augments the
//! macroscopic field inside each fine-scale inclusion with the resonant
//! corrector: u0(x) = u_H(x) (1 + s k^2 w(x/delta mod Y)), where s is 1
//! (two-scale limit normalization) or delta (selectable).

use std::sync::Arc;

use num_complex::Complex64;

use crate::cell::{CellConfig, CellProblem, CellSolution};
use crate::error::{Error, Result};
use crate::fem::{
    assemble_boundary_source, assemble_helmholtz, CoefficientField, FieldP1, PlaneWave,
    RegionCoefficient,
};
use crate::geometry::{AxisBox, Point2};
use crate::mesh::{structured_mesh, Mesh2D};
use crate::sparse::solve_direct;

/// Region tag of the free-space part G \ Omega.
pub const TAG_EXTERIOR: u8 = 0;
/// Region tag of the scatterer Omega.
pub const TAG_SCATTERER: u8 = 1;

/// Scaling of the corrector term in the reconstruction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReconstructionScaling {
    /// u_H (1 + k^2 w), the two-scale limit normalization (default).
    Unscaled,
    /// u_H (1 + delta k^2 w).
    DeltaScaled,
}

impl ReconstructionScaling {
    pub fn label(&self) -> &'static str {
        match self {
            ReconstructionScaling::Unscaled => "unscaled",
            ReconstructionScaling::DeltaScaled => "delta_scaled",
        }
    }
}

/// The macroscopic scattering setup: domain, scatterer, incident wave,
/// cell data, and the fine-scale period delta.
#[derive(Debug, Clone)]
pub struct MacroProblem {
    /// Truncated computational domain G.
    pub domain: AxisBox,
    /// Scatterer Omega, strictly inside G.
    pub scatterer: AxisBox,
    pub k: f64,
    pub incident_direction: [f64; 2],
    pub incident_amplitude: Complex64,
    /// Macro mesh subdivision of G.
    pub n_macro: usize,
    pub cell: CellConfig,
    /// Fine-scale period (reconstruction and reference comparisons only).
    pub delta: f64,
}

impl MacroProblem {
    pub fn validate(&self) -> Result<()> {
        self.cell.validate()?;
        if self.n_macro == 0 {
            return Err(Error::InvalidSubdivision);
        }
        if !self.domain.contains_box_strictly(&self.scatterer) || self.delta <= 0.0 {
            return Err(Error::DomainMismatch);
        }
        Ok(())
    }

    pub fn incident(&self) -> PlaneWave {
        PlaneWave {
            direction: self.incident_direction,
            amplitude: self.incident_amplitude,
            k: self.k,
        }
    }

    /// Macro mesh of G resolving the scatterer interface.
    pub fn macro_mesh(&self) -> Result<Arc<Mesh2D>> {
        Ok(Arc::new(structured_mesh(self.domain, self.n_macro, Some(self.scatterer))?))
    }
}

/// Macroscopic solution together with the cell data that produced it.
#[derive(Debug, Clone)]
pub struct HmmSolution {
    pub problem: MacroProblem,
    pub u_h: FieldP1,
    pub cell: CellSolution,
}

/// Solves the effective problem on the given macro mesh with the given
/// cell solution's parameters.
pub fn solve_effective_given(
    problem: &MacroProblem,
    mesh: &Arc<Mesh2D>,
    cell: &CellSolution,
) -> Result<FieldP1> {
    problem.validate()?;
    let a = cell.a_eff;
    let scatterer_coeff = RegionCoefficient {
        a: [
            [Complex64::new(a[0][0], 0.0), Complex64::new(a[0][1], 0.0)],
            [Complex64::new(a[1][0], 0.0), Complex64::new(a[1][1], 0.0)],
        ],
        mu: cell.mu_eff,
    };
    let coeff = CoefficientField::new()
        .with(TAG_EXTERIOR, RegionCoefficient::vacuum())
        .with(TAG_SCATTERER, scatterer_coeff);
    let system = assemble_helmholtz(mesh, &coeff, problem.k)?;
    let wave = problem.incident();
    let rhs = assemble_boundary_source(mesh, |p, n| wave.impedance_data(p, n));
    let x = solve_direct(&system, &rhs)?;
    FieldP1::new(Arc::clone(mesh), x)
}

/// Full pipeline: cell solves at the problem's wavenumber, then the
/// effective macro solve.
pub fn solve_effective(problem: &MacroProblem) -> Result<HmmSolution> {
    problem.validate()?;
    let cell_problem = CellProblem::new(problem.cell.clone())?;
    let cell = cell_problem.solve(problem.k)?;
    let mesh = problem.macro_mesh()?;
    let u_h = solve_effective_given(problem, &mesh, &cell)?;
    Ok(HmmSolution { problem: problem.clone(), u_h, cell })
}

impl HmmSolution {
    /// Evaluates the zeroth-order reconstruction at the vertices of
    /// `eval_mesh` (which must cover the same domain G).
    pub fn reconstruct(
        &self,
        eval_mesh: &Arc<Mesh2D>,
        scaling: ReconstructionScaling,
    ) -> Result<FieldP1> {
        let gb = self.problem.domain;
        let eb = eval_mesh.bbox();
        let tol = 1e-12 * gb.width().max(gb.height());
        if (gb.x_min - eb.x_min).abs() > tol
            || (gb.y_min - eb.y_min).abs() > tol
            || (gb.x_max - eb.x_max).abs() > tol
            || (gb.y_max - eb.y_max).abs() > tol
        {
            return Err(Error::DomainMismatch);
        }
        let layout = InclusionLayout::new(
            &self.problem.scatterer,
            self.problem.delta,
            self.problem.cell.inclusion,
        );
        let s = match scaling {
            ReconstructionScaling::Unscaled => 1.0,
            ReconstructionScaling::DeltaScaled => self.problem.delta,
        };
        let k2 = self.problem.k * self.problem.k;
        let mut coeffs = Vec::with_capacity(eval_mesh.n_vertices());
        for &p in eval_mesh.vertices() {
            let u = self.u_h.evaluate_at(p)?;
            let corrected = match layout.cell_coords(p) {
                Some(y) => {
                    let w = self.cell.w.evaluate_at(y)?;
                    u * (Complex64::new(1.0, 0.0) + s * k2 * w)
                }
                None => u,
            };
            coeffs.push(corrected);
        }
        FieldP1::new(Arc::clone(eval_mesh), coeffs)
    }

    /// Gradient corrector u_{h,1}(x, y) = sum_j d_j u_H(x) w_j(y),
    /// kept for energy diagnostics (it does not enter the reconstruction).
    pub fn gradient_corrector(&self, x: Point2, y: Point2) -> Result<Complex64> {
        let grad = self.u_h.gradient_at(x)?;
        let w1 = self.cell.w1.evaluate_at(y)?;
        let w2 = self.cell.w2.evaluate_at(y)?;
        Ok(grad[0] * w1 + grad[1] * w2)
    }

    /// Band-gap diagnostic: L2 mass in the centered quarter-area core of
    /// the scatterer relative to the L2 mass outside the scatterer.
    /// Decay inside the scatterer pushes this ratio down. Core membership
    /// is decided per element by its barycenter (exact when the core edges
    /// lie on mesh lines, i.e. n_macro divisible by 8 for the standard
    /// geometry).
    pub fn decay_ratio(&self) -> f64 {
        let omega = self.problem.scatterer;
        let quarter = omega.width().min(omega.height()) / 4.0;
        let c = omega.center();
        let core = AxisBox::new(c.x - quarter, c.y - quarter, c.x + quarter, c.y + quarter);
        let mesh = self.u_h.mesh();
        let mut core_sq = 0.0;
        for t in 0..mesh.n_triangles() {
            if core.contains(mesh.barycenter(t)) {
                core_sq += element_l2_sq(&self.u_h, t);
            }
        }
        let outside = self.u_h.norm_l2(Some(TAG_EXTERIOR));
        core_sq.sqrt() / outside.max(f64::MIN_POSITIVE)
    }
}

fn element_l2_sq(field: &FieldP1, t: usize) -> f64 {
    let mesh = field.mesh();
    let [a, b, c] = mesh.triangles()[t];
    let (ca, cb, cc) = (field.coeffs()[a], field.coeffs()[b], field.coeffs()[c]);
    let area = mesh.triangle_area(t);
    let quad = ca.norm_sqr() + cb.norm_sqr() + cc.norm_sqr()
        + (ca * cb.conj() + cb * cc.conj() + cc * ca.conj()).re;
    area / 6.0 * quad
}

/// The fine-scale inclusion lattice D_delta: one scaled copy of D in every
/// delta-cell that fits entirely inside the scatterer.
#[derive(Debug, Clone)]
pub struct InclusionLayout {
    delta: f64,
    d: Option<AxisBox>,
    jx: (i64, i64),
    jy: (i64, i64),
}

impl InclusionLayout {
    pub fn new(omega: &AxisBox, delta: f64, d: Option<AxisBox>) -> Self {
        let tol = 1e-9 * delta;
        let jx = (
            ((omega.x_min - tol) / delta).ceil() as i64,
            ((omega.x_max + tol) / delta).floor() as i64 - 1,
        );
        let jy = (
            ((omega.y_min - tol) / delta).ceil() as i64,
            ((omega.y_max + tol) / delta).floor() as i64 - 1,
        );
        Self { delta, d, jx, jy }
    }

    pub fn count(&self) -> usize {
        if self.d.is_none() || self.jx.1 < self.jx.0 || self.jy.1 < self.jy.0 {
            return 0;
        }
        ((self.jx.1 - self.jx.0 + 1) * (self.jy.1 - self.jy.0 + 1)) as usize
    }

    /// The inclusion boxes delta (j + D), row-major.
    pub fn boxes(&self) -> Vec<AxisBox> {
        let Some(d) = self.d else { return Vec::new() };
        if self.count() == 0 {
            return Vec::new();
        }
        let mut out = Vec::with_capacity(self.count());
        for jy in self.jy.0..=self.jy.1 {
            for jx in self.jx.0..=self.jx.1 {
                out.push(AxisBox::new(
                    self.delta * (jx as f64 + d.x_min),
                    self.delta * (jy as f64 + d.y_min),
                    self.delta * (jx as f64 + d.x_max),
                    self.delta * (jy as f64 + d.y_max),
                ));
            }
        }
        out
    }

    /// Maps a point inside an inclusion to its cell coordinate y in Y;
    /// `None` outside the inclusions.
    pub fn cell_coords(&self, p: Point2) -> Option<Point2> {
        let d = self.d?;
        let jx = (p.x / self.delta).floor();
        let jy = (p.y / self.delta).floor();
        let (ix, iy) = (jx as i64, jy as i64);
        if ix < self.jx.0 || ix > self.jx.1 || iy < self.jy.0 || iy > self.jy.1 {
            return None;
        }
        let y = Point2::new(p.x / self.delta - jx, p.y / self.delta - jy);
        d.contains_interior(y).then_some(y)
    }
}

/// The scaled inclusion boxes delta (j + D) for all cells fitting in the
/// scatterer.
pub fn build_inclusion_layout(omega: &AxisBox, delta: f64, d: &AxisBox) -> Vec<AxisBox> {
    InclusionLayout::new(omega, delta, Some(*d)).boxes()
}

/// Uniform samples of a field along the horizontal line y = y_line.
pub fn line_sample(
    field: &FieldP1,
    y_line: f64,
    n_samples: usize,
) -> Result<Vec<(f64, Complex64)>> {
    let bbox = field.mesh().bbox();
    let mut out = Vec::with_capacity(n_samples);
    for i in 0..n_samples {
        let x = if n_samples == 1 {
            bbox.x_min
        } else {
            bbox.x_min + i as f64 * bbox.width() / (n_samples - 1) as f64
        };
        let p = Point2::new(x, y_line);
        out.push((x, field.evaluate_at(p)?));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::error_vs_analytic;

    fn z(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn section_problem(k: f64, n_macro: usize, n_cell: usize) -> MacroProblem {
        MacroProblem {
            domain: AxisBox::new(0.25, 0.25, 0.75, 0.75),
            scatterer: AxisBox::new(0.375, 0.375, 0.625, 0.625),
            k,
            incident_direction: [-1.0, 0.0],
            incident_amplitude: z(1.0, 0.0),
            n_macro,
            cell: CellConfig {
                eps_e_inv: 10.0,
                eps_i_inv: z(10.0, -0.01),
                inclusion: Some(AxisBox::new(0.25, 0.25, 0.75, 0.75)),
                n_cell,
            },
            delta: 1.0 / 32.0,
        }
    }

    #[test]
    fn trivial_scatterer_recovers_plane_wave() {
        // With an empty inclusion and eps_e_inv = 1 the effective problem is
        // free space and the plane wave solves it exactly.
        let mut problem = section_problem(12.0, 16, 8);
        problem.cell.eps_e_inv = 1.0;
        problem.cell.inclusion = None;
        let wave = problem.incident();
        let mut prev: Option<f64> = None;
        for n in [16usize, 32, 64] {
            problem.n_macro = n;
            let sol = solve_effective(&problem).unwrap();
            let (_, h1k) =
                error_vs_analytic(&sol.u_h, |p| wave.value(p), |p| wave.gradient(p), problem.k);
            let rel = h1k / wave.amplitude.norm();
            if let Some(p) = prev {
                assert!(rel < 0.75 * p, "no decay: {rel} vs {p}");
            }
            prev = Some(rel);
        }
    }

    #[test]
    fn inclusion_layout_counts() {
        let omega = AxisBox::new(0.375, 0.375, 0.625, 0.625);
        let d = AxisBox::new(0.25, 0.25, 0.75, 0.75);
        let delta = 1.0 / 32.0;
        let boxes = build_inclusion_layout(&omega, delta, &d);
        assert_eq!(boxes.len(), 64);
        for b in &boxes {
            assert!((b.width() - delta / 2.0).abs() < 1e-15);
            assert!(omega.contains_box(b, 1e-12));
        }

        // Period larger than the scatterer: no full cell fits.
        let none = build_inclusion_layout(&omega, 0.5, &d);
        assert!(none.is_empty());
    }

    #[test]
    fn layout_cell_coords_roundtrip() {
        let omega = AxisBox::new(0.375, 0.375, 0.625, 0.625);
        let d = AxisBox::new(0.25, 0.25, 0.75, 0.75);
        let delta = 1.0 / 32.0;
        let layout = InclusionLayout::new(&omega, delta, Some(d));
        // Center of cell j = (12, 12): y should be the cell center.
        let p = Point2::new(delta * 12.5, delta * 12.5);
        let y = layout.cell_coords(p).unwrap();
        assert!((y.x - 0.5).abs() < 1e-12 && (y.y - 0.5).abs() < 1e-12);
        // A point in the matrix part of the same cell.
        let p = Point2::new(delta * 12.1, delta * 12.1);
        assert!(layout.cell_coords(p).is_none());
        // A point outside the scatterer.
        assert!(layout.cell_coords(Point2::new(0.3, 0.3)).is_none());
    }

    #[test]
    fn reconstruction_identity_without_corrector() {
        // Empty inclusion: w = 0, reconstruction equals u_H on any mesh.
        let mut problem = section_problem(20.0, 16, 8);
        problem.cell.inclusion = None;
        let sol = solve_effective(&problem).unwrap();
        let eval = Arc::new(structured_mesh(problem.domain, 64, None).unwrap());
        let rec = sol.reconstruct(&eval, ReconstructionScaling::Unscaled).unwrap();
        for (v, &p) in eval.vertices().iter().enumerate() {
            let expect = sol.u_h.evaluate_at(p).unwrap();
            assert!((rec.coeffs()[v] - expect).norm() < 1e-14);
        }
    }

    #[test]
    fn reconstruction_matches_u_h_outside_scatterer() {
        let problem = section_problem(29.0, 16, 32);
        let sol = solve_effective(&problem).unwrap();
        let eval = Arc::new(structured_mesh(problem.domain, 128, None).unwrap());
        let rec = sol.reconstruct(&eval, ReconstructionScaling::Unscaled).unwrap();
        let omega = problem.scatterer;
        let mut outside = 0;
        for (v, &p) in eval.vertices().iter().enumerate() {
            if !omega.contains(p) {
                let expect = sol.u_h.evaluate_at(p).unwrap();
                assert!((rec.coeffs()[v] - expect).norm() == 0.0);
                outside += 1;
            }
        }
        assert!(outside > 0);
    }

    #[test]
    fn reconstruction_is_linear_in_u_h() {
        let problem = section_problem(29.0, 16, 32);
        let sol = solve_effective(&problem).unwrap();
        let eval = Arc::new(structured_mesh(problem.domain, 64, None).unwrap());
        let rec = sol.reconstruct(&eval, ReconstructionScaling::Unscaled).unwrap();

        let c = z(-1.3, 0.7);
        let mut scaled = sol.clone();
        scaled.u_h = sol.u_h.scaled(c);
        let rec_scaled = scaled.reconstruct(&eval, ReconstructionScaling::Unscaled).unwrap();
        for v in 0..eval.n_vertices() {
            assert!((rec_scaled.coeffs()[v] - c * rec.coeffs()[v]).norm() < 1e-12);
        }
    }

    #[test]
    fn line_sample_basics() {
        let mesh = Arc::new(structured_mesh(AxisBox::unit(), 4, None).unwrap());
        let f = FieldP1::interpolate(Arc::clone(&mesh), |_| z(3.0, -2.0));
        let samples = line_sample(&f, 0.5, 5).unwrap();
        assert_eq!(samples.len(), 5);
        for (_, v) in &samples {
            assert!((*v - z(3.0, -2.0)).norm() < 1e-13);
        }
        let two = line_sample(&f, 0.25, 2).unwrap();
        assert_eq!(two[0].0, 0.0);
        assert_eq!(two[1].0, 1.0);
        assert!(line_sample(&f, 2.0, 3).is_err());
    }

    #[test]
    fn incident_line_sample_is_plane_wave() {
        let k = 29.0;
        let g = AxisBox::new(0.25, 0.25, 0.75, 0.75);
        let mesh = Arc::new(structured_mesh(g, 64, None).unwrap());
        let wave = PlaneWave::incoming(k);
        let f = FieldP1::interpolate(Arc::clone(&mesh), |p| wave.value(p));
        let samples = line_sample(&f, 0.546875, 9).unwrap();
        for (x, v) in samples {
            // Nodal samples on mesh lines reproduce exp(-i k x) exactly.
            if (x * 64.0 / 0.5).fract() == 0.0 {
                let expect = z(0.0, -k * x).exp();
                assert!((v - expect).norm() < 1e-12);
            }
        }
    }
}
