//! Direct fine-scale solve of the heterogeneous scattering problem.
//!
//! The coefficient has three regions: 1 outside the scatterer, eps_e^{-1}
//! in the matrix part of the scatterer, and delta^2 eps_i^{-1} inside the
//! fine-scale inclusions (the high-contrast scaling that keeps the optical
//! diameter of the inclusions constant). The fine mesh must resolve every
//! inclusion boundary exactly.

use std::sync::Arc;

use num_complex::Complex64;

use crate::effective::{InclusionLayout, MacroProblem, TAG_EXTERIOR, TAG_SCATTERER};
use crate::error::{Error, Result};
use crate::fem::{
    assemble_boundary_source, assemble_helmholtz, CoefficientField, FieldP1, RegionCoefficient,
};
use crate::mesh::{structured_mesh, Mesh2D};
use crate::sparse::solve_direct;

/// Region tag of the fine-scale inclusions D_delta.
pub const TAG_FINE_INCLUSION: u8 = 2;

/// The heterogeneous setup: the macroscopic problem data plus the fine
/// subdivision of G.
#[derive(Debug, Clone)]
pub struct HeterogeneousProblem {
    pub macro_problem: MacroProblem,
    /// Fine mesh subdivision of G; must place every inclusion edge on a
    /// grid line.
    pub n_fine: usize,
}

impl HeterogeneousProblem {
    /// Builds the three-region fine mesh (exterior 0, matrix 1,
    /// inclusions 2). Fails with [`Error::UnresolvedInclusions`] if an
    /// inclusion edge misses the grid.
    pub fn fine_mesh(&self) -> Result<Arc<Mesh2D>> {
        let p = &self.macro_problem;
        p.validate()?;
        if self.n_fine == 0 {
            return Err(Error::InvalidSubdivision);
        }
        let g = p.domain;
        let layout = InclusionLayout::new(&p.scatterer, p.delta, p.cell.inclusion);
        let n = self.n_fine as f64;
        for b in layout.boxes() {
            for (coord, min, extent) in [
                (b.x_min, g.x_min, g.width()),
                (b.x_max, g.x_min, g.width()),
                (b.y_min, g.y_min, g.height()),
                (b.y_max, g.y_min, g.height()),
            ] {
                let t = (coord - min) / extent * n;
                if (t - t.round()).abs() > 1e-9 {
                    return Err(Error::UnresolvedInclusions);
                }
            }
        }
        let base = structured_mesh(g, self.n_fine, Some(p.scatterer))?;
        let mesh = base.retag(|bary, tag| {
            if tag == TAG_SCATTERER && layout.cell_coords(bary).is_some() {
                TAG_FINE_INCLUSION
            } else {
                tag
            }
        });
        Ok(Arc::new(mesh))
    }

    fn coefficients(&self) -> CoefficientField {
        let p = &self.macro_problem;
        let one = Complex64::new(1.0, 0.0);
        let delta_sq = p.delta * p.delta;
        CoefficientField::new()
            .with(TAG_EXTERIOR, RegionCoefficient::vacuum())
            .with(TAG_SCATTERER, RegionCoefficient::isotropic(
                Complex64::new(p.cell.eps_e_inv, 0.0),
                one,
            ))
            .with(TAG_FINE_INCLUSION, RegionCoefficient::isotropic(
                delta_sq * p.cell.eps_i_inv,
                one,
            ))
    }
}

/// Solves the heterogeneous problem directly on the fine mesh.
pub fn solve_heterogeneous(problem: &HeterogeneousProblem) -> Result<FieldP1> {
    let mesh = problem.fine_mesh()?;
    let coeff = problem.coefficients();
    let system = assemble_helmholtz(&mesh, &coeff, problem.macro_problem.k)?;
    let wave = problem.macro_problem.incident();
    let rhs = assemble_boundary_source(&mesh, |p, n| wave.impedance_data(p, n));
    let x = solve_direct(&system, &rhs)?;
    FieldP1::new(Arc::clone(&mesh), x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cell::CellConfig;
    use crate::fem::cross_mesh_error;
    use crate::geometry::AxisBox;

    fn z(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn section_problem(k: f64, delta: f64, n_fine: usize) -> HeterogeneousProblem {
        HeterogeneousProblem {
            macro_problem: MacroProblem {
                domain: AxisBox::new(0.25, 0.25, 0.75, 0.75),
                scatterer: AxisBox::new(0.375, 0.375, 0.625, 0.625),
                k,
                incident_direction: [-1.0, 0.0],
                incident_amplitude: z(1.0, 0.0),
                n_macro: 8,
                cell: CellConfig {
                    eps_e_inv: 10.0,
                    eps_i_inv: z(10.0, -0.01),
                    inclusion: Some(AxisBox::new(0.25, 0.25, 0.75, 0.75)),
                    n_cell: 8,
                },
                delta,
            },
            n_fine,
        }
    }

    #[test]
    fn inclusion_area_is_exact_on_resolving_mesh() {
        let problem = section_problem(29.0, 1.0 / 32.0, 128);
        let mesh = problem.fine_mesh().unwrap();
        // 64 inclusions of side delta/2.
        let expect = 64.0 * (1.0 / 64.0) * (1.0 / 64.0);
        assert!((mesh.tag_area(TAG_FINE_INCLUSION) - expect).abs() < 1e-14);
        // Scatterer + inclusions together cover Omega.
        let omega_area = 0.25 * 0.25;
        let total = mesh.tag_area(TAG_SCATTERER) + mesh.tag_area(TAG_FINE_INCLUSION);
        assert!((total - omega_area).abs() < 1e-14);
    }

    #[test]
    fn unresolving_mesh_rejected() {
        // n_fine = 96 puts grid lines at multiples of 0.5/96; inclusion
        // edges sit at odd multiples of 1/128.
        let problem = section_problem(29.0, 1.0 / 32.0, 96);
        assert_eq!(problem.fine_mesh().unwrap_err(), Error::UnresolvedInclusions);
    }

    #[test]
    fn complex_entries_only_from_inclusions() {
        let problem = section_problem(12.0, 1.0 / 32.0, 64);
        let mesh = problem.fine_mesh().unwrap();
        let coeff = problem.coefficients();
        let stiff = crate::fem::assemble_stiffness(&mesh, &coeff).unwrap();
        assert!(stiff.symmetry_defect() < 1e-12);

        // Vertices incident only to non-inclusion triangles get purely real
        // stiffness rows.
        let mut touches_inclusion = vec![false; mesh.n_vertices()];
        for t in 0..mesh.n_triangles() {
            if mesh.region_tags()[t] == TAG_FINE_INCLUSION {
                for &v in &mesh.triangles()[t] {
                    touches_inclusion[v] = true;
                }
            }
        }
        for r in 0..mesh.n_vertices() {
            if !touches_inclusion[r] {
                for idx in stiff.row_offsets()[r]..stiff.row_offsets()[r + 1] {
                    assert_eq!(stiff.values()[idx].im, 0.0);
                }
            }
        }
    }

    #[test]
    fn empty_layout_equals_two_region_solve() {
        // delta too large for any full cell: coefficient is eps_e^{-1} on
        // all of Omega.
        let problem = section_problem(15.0, 0.5, 32);
        let u = solve_heterogeneous(&problem).unwrap();

        let mesh = Arc::new(
            structured_mesh(problem.macro_problem.domain, 32, Some(problem.macro_problem.scatterer))
                .unwrap(),
        );
        let coeff = CoefficientField::new()
            .with(TAG_EXTERIOR, RegionCoefficient::vacuum())
            .with(TAG_SCATTERER, RegionCoefficient::isotropic(z(10.0, 0.0), z(1.0, 0.0)));
        let system = assemble_helmholtz(&mesh, &coeff, 15.0).unwrap();
        let wave = problem.macro_problem.incident();
        let rhs = assemble_boundary_source(&mesh, |p, n| wave.impedance_data(p, n));
        let x = solve_direct(&system, &rhs).unwrap();
        for (a, b) in u.coeffs().iter().zip(&x) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn self_convergence_under_refinement() {
        // No exact solution: consecutive-level differences must shrink.
        // The coarsest level must already resolve the inclusion resonance
        // (several elements across each delta/2 inclusion).
        let k = 29.0;
        let delta = 1.0 / 32.0;
        let coarse = solve_heterogeneous(&section_problem(k, delta, 128)).unwrap();
        let mid = solve_heterogeneous(&section_problem(k, delta, 256)).unwrap();
        let fine = solve_heterogeneous(&section_problem(k, delta, 512)).unwrap();
        let (_, d1) = cross_mesh_error(&coarse, &mid, k).unwrap();
        let (_, d2) = cross_mesh_error(&mid, &fine, k).unwrap();
        assert!(d2 < d1, "not Cauchy: {d2} >= {d1}");
    }
}
