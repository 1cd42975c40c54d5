//! Unit-cell problems on Y = (0,1)^2 and the effective parameters they
//! define.
//!
//! Two problems live on the cell: the periodic corrector problems on the
//! matrix part Y* (driven by the unit vectors, defining the effective
//! diffusion matrix) and the resonant Dirichlet problem on the inclusion D
//! (driven by the constant source, defining the frequency-dependent
//! effective permeability mu_eff = 1 + k^2 integral_D w).
//!
//! The corrector space is the zero-mean periodic space on Y*; the mean is
//! enforced with one Lagrange multiplier so no node is pinned. The resonant
//! problem eliminates the boundary of D (homogeneous Dirichlet) and extends
//! by zero, matching H^1_0(D).
//!
//! For a square inclusion the permeability has a closed eigen-series form
//! (the Dirichlet eigenpairs of the square are known); it serves as an
//! independent oracle for the finite-element path.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fem::FieldP1;
use crate::geometry::AxisBox;
use crate::mesh::{periodic_wrap, structured_mesh, Mesh2D, PeriodicMesh};
use crate::sparse::{CsrComplexMatrix, Factorized, TripletBuffer};

/// Matrix region of the cell (Y*).
pub const TAG_MATRIX: u8 = 0;
/// Inclusion region of the cell (D).
pub const TAG_INCLUSION: u8 = 1;

/// Material and discretization data of the unit cell.
#[derive(Debug, Clone)]
pub struct CellConfig {
    /// Inverse permittivity of the matrix Y* (positive).
    pub eps_e_inv: f64,
    /// Inverse permittivity of the inclusion D; Re > 0 and Im < 0
    /// (equivalently Im(eps_i) > 0, slight dissipation).
    pub eps_i_inv: Complex64,
    /// Inclusion box, strictly inside Y; `None` for an empty inclusion.
    pub inclusion: Option<AxisBox>,
    /// Cell mesh subdivision (squares per side of Y).
    pub n_cell: usize,
}

impl CellConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_cell == 0 {
            return Err(Error::InvalidSubdivision);
        }
        if let Some(d) = &self.inclusion {
            if !AxisBox::unit().contains_box_strictly(d) {
                return Err(Error::DomainMismatch);
            }
        }
        Ok(())
    }

    pub fn eps_i(&self) -> Complex64 {
        Complex64::new(1.0, 0.0) / self.eps_i_inv
    }
}

/// Both correctors, the resonant solution, and the derived effective
/// parameters at one wavenumber.
#[derive(Debug, Clone)]
pub struct CellSolution {
    /// Periodic zero-mean correctors on Y* (extended by zero into D).
    pub w1: FieldP1,
    pub w2: FieldP1,
    /// Resonant corrector on D (extended by zero onto Y*).
    pub w: FieldP1,
    /// Effective diffusion matrix (real symmetric positive definite).
    pub a_eff: [[f64; 2]; 2],
    /// Effective permeability 1 + k^2 integral_D w.
    pub mu_eff: Complex64,
    pub k: f64,
}

/// Discretized unit cell with the DOF maps of both subproblems.
///
/// The corrector matrix does not depend on the wavenumber, so one
/// `CellProblem` serves a whole frequency sweep.
pub struct CellProblem {
    config: CellConfig,
    mesh: Arc<Mesh2D>,
    periodic: PeriodicMesh,
    /// Periodic DOF -> compact Y* index (DOFs of vertices touching Y*).
    ystar_index: Vec<Option<usize>>,
    n_ystar: usize,
    /// Per-Y*-DOF integral of the basis function over Y*.
    ystar_weights: Vec<f64>,
    /// Vertex -> compact index of D-interior DOFs.
    d_index: Vec<Option<usize>>,
    n_d: usize,
}

impl CellProblem {
    pub fn new(config: CellConfig) -> Result<Self> {
        config.validate()?;
        let mesh = Arc::new(structured_mesh(AxisBox::unit(), config.n_cell, config.inclusion)?);
        let periodic = periodic_wrap(&mesh)?;

        let mut touches_ystar = vec![false; periodic.n_dofs()];
        for t in 0..mesh.n_triangles() {
            if mesh.region_tags()[t] == TAG_MATRIX {
                for &v in &mesh.triangles()[t] {
                    touches_ystar[periodic.dof_of_vertex(v)] = true;
                }
            }
        }
        let mut ystar_index = vec![None; periodic.n_dofs()];
        let mut n_ystar = 0;
        for (dof, &touch) in touches_ystar.iter().enumerate() {
            if touch {
                ystar_index[dof] = Some(n_ystar);
                n_ystar += 1;
            }
        }

        let mut ystar_weights = vec![0.0; n_ystar];
        for t in 0..mesh.n_triangles() {
            if mesh.region_tags()[t] == TAG_MATRIX {
                let third = mesh.triangle_area(t) / 3.0;
                for &v in &mesh.triangles()[t] {
                    let idx = ystar_index[periodic.dof_of_vertex(v)].expect("Y* vertex indexed");
                    ystar_weights[idx] += third;
                }
            }
        }

        // D-interior vertices: incident to inclusion triangles only.
        let mut touches_matrix = vec![false; mesh.n_vertices()];
        let mut touches_inclusion = vec![false; mesh.n_vertices()];
        for t in 0..mesh.n_triangles() {
            for &v in &mesh.triangles()[t] {
                if mesh.region_tags()[t] == TAG_MATRIX {
                    touches_matrix[v] = true;
                } else {
                    touches_inclusion[v] = true;
                }
            }
        }
        let mut d_index = vec![None; mesh.n_vertices()];
        let mut n_d = 0;
        for v in 0..mesh.n_vertices() {
            if touches_inclusion[v] && !touches_matrix[v] {
                d_index[v] = Some(n_d);
                n_d += 1;
            }
        }

        Ok(Self { config, mesh, periodic, ystar_index, n_ystar, ystar_weights, d_index, n_d })
    }

    pub fn config(&self) -> &CellConfig {
        &self.config
    }

    pub fn mesh(&self) -> &Arc<Mesh2D> {
        &self.mesh
    }

    pub fn periodic(&self) -> &PeriodicMesh {
        &self.periodic
    }

    /// Number of inclusion triangles (the resolution measure used when
    /// reporting cell solves).
    pub fn n_inclusion_triangles(&self) -> usize {
        self.mesh.region_tags().iter().filter(|&&t| t == TAG_INCLUSION).count()
    }

    fn ystar_dof_of_vertex(&self, v: usize) -> Option<usize> {
        self.ystar_index[self.periodic.dof_of_vertex(v)]
    }

    /// Assembles the periodic Y* stiffness (eps_e^{-1} grad . grad) over
    /// Y*-DOFs, bordered by the zero-mean constraint.
    fn corrector_system(&self) -> Result<CsrComplexMatrix> {
        let mut buf = TripletBuffer::with_capacity(9 * self.mesh.n_triangles());
        let eps = Complex64::new(self.config.eps_e_inv, 0.0);
        for t in 0..self.mesh.n_triangles() {
            if self.mesh.region_tags()[t] != TAG_MATRIX {
                continue;
            }
            let (grads, two_area) = self.mesh.p1_gradients(t);
            let area = 0.5 * two_area;
            let tri = self.mesh.triangles()[t];
            let idx = tri.map(|v| self.ystar_dof_of_vertex(v));
            for i in 0..3 {
                for j in 0..3 {
                    let (Some(ri), Some(cj)) = (idx[i], idx[j]) else { continue };
                    let val =
                        eps * (grads[i][0] * grads[j][0] + grads[i][1] * grads[j][1]) * area;
                    buf.push(ri, cj, val);
                }
            }
        }
        let a = CsrComplexMatrix::finalize(&buf, self.n_ystar, self.n_ystar)?;
        a.augment_with_mean_constraint(&self.ystar_weights)
    }

    fn corrector_rhs(&self, axis: usize) -> Vec<Complex64> {
        let mut rhs = vec![Complex64::new(0.0, 0.0); self.n_ystar + 1];
        for t in 0..self.mesh.n_triangles() {
            if self.mesh.region_tags()[t] != TAG_MATRIX {
                continue;
            }
            let (grads, two_area) = self.mesh.p1_gradients(t);
            let area = 0.5 * two_area;
            let tri = self.mesh.triangles()[t];
            for i in 0..3 {
                if let Some(ri) = self.ystar_dof_of_vertex(tri[i]) {
                    rhs[ri] -= Complex64::new(self.config.eps_e_inv * grads[i][axis] * area, 0.0);
                }
            }
        }
        rhs
    }

    fn scatter_ystar(&self, reduced: &[Complex64]) -> Result<FieldP1> {
        let coeffs: Vec<Complex64> = (0..self.mesh.n_vertices())
            .map(|v| match self.ystar_dof_of_vertex(v) {
                Some(i) => reduced[i],
                None => Complex64::new(0.0, 0.0),
            })
            .collect();
        FieldP1::new(Arc::clone(&self.mesh), coeffs)
    }

    /// Solves the periodic corrector problem driven by unit vector `axis`
    /// (0 or 1). The solution is real up to rounding and has zero mean
    /// over Y*.
    pub fn solve_corrector(&self, axis: usize) -> Result<FieldP1> {
        assert!(axis < 2, "axis must be 0 or 1");
        let (w1, w2) = self.solve_correctors()?;
        Ok(if axis == 0 { w1 } else { w2 })
    }

    /// Solves both corrector problems with a shared factorization.
    pub fn solve_correctors(&self) -> Result<(FieldP1, FieldP1)> {
        if self.n_ystar == 0 {
            let zero = FieldP1::zeros(Arc::clone(&self.mesh));
            return Ok((zero.clone(), zero));
        }
        let system = self.corrector_system()?;
        let factor = Factorized::new(&system)?;
        let mut out = Vec::with_capacity(2);
        for axis in 0..2 {
            let sol = factor.solve(&self.corrector_rhs(axis))?;
            let imag_max = sol[..self.n_ystar].iter().map(|z| z.im.abs()).fold(0.0, f64::max);
            debug_assert!(imag_max < 1e-10, "corrector imaginary part {imag_max}");
            out.push(self.scatter_ystar(&sol[..self.n_ystar])?);
        }
        let w2 = out.pop().expect("two solves");
        let w1 = out.pop().expect("two solves");
        Ok((w1, w2))
    }

    /// Solves the resonant inclusion problem at wavenumber `k`:
    /// eps_i^{-1} (grad w, grad psi)_D - k^2 (w, psi)_D = (1, psi)_D
    /// with zero trace on the inclusion boundary.
    pub fn solve_resonant(&self, k: f64) -> Result<FieldP1> {
        if self.n_d == 0 {
            return Ok(FieldP1::zeros(Arc::clone(&self.mesh)));
        }
        let mut buf = TripletBuffer::new();
        let mut rhs = vec![Complex64::new(0.0, 0.0); self.n_d];
        let k2 = k * k;
        for t in 0..self.mesh.n_triangles() {
            if self.mesh.region_tags()[t] != TAG_INCLUSION {
                continue;
            }
            let (grads, two_area) = self.mesh.p1_gradients(t);
            let area = 0.5 * two_area;
            let tri = self.mesh.triangles()[t];
            let idx = tri.map(|v| self.d_index[v]);
            for i in 0..3 {
                let Some(ri) = idx[i] else { continue };
                rhs[ri] += Complex64::new(area / 3.0, 0.0);
                for j in 0..3 {
                    let Some(cj) = idx[j] else { continue };
                    let stiff = self.config.eps_i_inv
                        * (grads[i][0] * grads[j][0] + grads[i][1] * grads[j][1])
                        * area;
                    let mass = if i == j { area / 6.0 } else { area / 12.0 };
                    buf.push(ri, cj, stiff - Complex64::new(k2 * mass, 0.0));
                }
            }
        }
        let a = CsrComplexMatrix::finalize(&buf, self.n_d, self.n_d)?;
        let sol = crate::sparse::solve_direct(&a, &rhs)?;
        let coeffs: Vec<Complex64> = (0..self.mesh.n_vertices())
            .map(|v| match self.d_index[v] {
                Some(i) => sol[i],
                None => Complex64::new(0.0, 0.0),
            })
            .collect();
        FieldP1::new(Arc::clone(&self.mesh), coeffs)
    }

    /// Effective diffusion matrix from the two correctors:
    /// (a_eff)_jk = integral_{Y*} eps_e^{-1} (e_j + grad w_j) . (e_k + grad w_k).
    ///
    /// The imaginary part must vanish (checked to 1e-10) and is discarded.
    pub fn effective_a(&self, w1: &FieldP1, w2: &FieldP1) -> Result<[[f64; 2]; 2]> {
        let fields = [w1, w2];
        let mut acc = [[Complex64::new(0.0, 0.0); 2]; 2];
        for t in 0..self.mesh.n_triangles() {
            if self.mesh.region_tags()[t] != TAG_MATRIX {
                continue;
            }
            let (grads, two_area) = self.mesh.p1_gradients(t);
            let area = 0.5 * two_area;
            let tri = self.mesh.triangles()[t];
            // e_j + grad w_j per corrector, constant on the element.
            let mut dir = [[Complex64::new(0.0, 0.0); 2]; 2];
            for j in 0..2 {
                dir[j][j] += 1.0;
                for (local, &v) in tri.iter().enumerate() {
                    let c = fields[j].coeffs()[v];
                    dir[j][0] += c * grads[local][0];
                    dir[j][1] += c * grads[local][1];
                }
            }
            for j in 0..2 {
                for kk in 0..2 {
                    acc[j][kk] += (dir[j][0] * dir[kk][0] + dir[j][1] * dir[kk][1])
                        * self.config.eps_e_inv
                        * area;
                }
            }
        }
        let mut a = [[0.0; 2]; 2];
        for j in 0..2 {
            for kk in 0..2 {
                if acc[j][kk].im.abs() > 1e-10 {
                    return Err(Error::DomainMismatch);
                }
                a[j][kk] = acc[j][kk].re;
            }
        }
        // Symmetrize the rounding-level asymmetry.
        let off = 0.5 * (a[0][1] + a[1][0]);
        a[0][1] = off;
        a[1][0] = off;
        Ok(a)
    }

    /// Effective permeability 1 + k^2 integral_D w.
    pub fn effective_mu(&self, w: &FieldP1, k: f64) -> Complex64 {
        Complex64::new(1.0, 0.0) + k * k * w.integral(Some(TAG_INCLUSION))
    }

    /// Full cell solve at one wavenumber.
    pub fn solve(&self, k: f64) -> Result<CellSolution> {
        let (w1, w2) = self.solve_correctors()?;
        self.solve_at(k, w1, w2)
    }

    /// Cell solve reusing precomputed correctors (they are k-independent).
    pub fn solve_at(&self, k: f64, w1: FieldP1, w2: FieldP1) -> Result<CellSolution> {
        let a_eff = self.effective_a(&w1, &w2)?;
        let w = self.solve_resonant(k)?;
        let mu_eff = self.effective_mu(&w, k);
        Ok(CellSolution { w1, w2, w, a_eff, mu_eff, k })
    }
}

/// Eigen-series effective permeability for a square inclusion of side L:
///
///   mu_eff = 1 + sum_{m,n odd <= M} [k^2 eps_i / (lambda_mn - k^2 eps_i)]
///                 * 64 L^2 / (m^2 n^2 pi^4),
///   lambda_mn = pi^2 (m^2 + n^2) / L^2.
///
/// Only odd index pairs contribute (even ones have zero-mean eigenfunctions).
pub fn mu_eff_eigen_oracle(config: &CellConfig, k: f64, truncation: usize) -> Result<Complex64> {
    let d = config.inclusion.as_ref().ok_or(Error::NotASquareInclusion)?;
    if !d.is_square() {
        return Err(Error::NotASquareInclusion);
    }
    let side = d.width();
    let eps_i = config.eps_i();
    let k2_eps = k * k * eps_i;
    let mut mu = Complex64::new(1.0, 0.0);
    let mut m = 1;
    while m <= truncation {
        let mut n = 1;
        while n <= truncation {
            let lambda = PI * PI * ((m * m + n * n) as f64) / (side * side);
            let coupling = 64.0 * side * side / ((m * m * n * n) as f64 * PI.powi(4));
            mu += k2_eps / (Complex64::new(lambda, 0.0) - k2_eps) * coupling;
            n += 2;
        }
        m += 2;
    }
    Ok(mu)
}

/// Upper estimate of the truncation tail of the eigen series
/// (sum of 64 L^2 k^2 |eps_i| / (lambda_mn m^2 n^2 pi^4) over neglected
/// odd pairs, evaluated up to a fixed large cutoff).
pub fn mu_eff_oracle_tail(config: &CellConfig, k: f64, truncation: usize) -> Result<f64> {
    let d = config.inclusion.as_ref().ok_or(Error::NotASquareInclusion)?;
    if !d.is_square() {
        return Err(Error::NotASquareInclusion);
    }
    let side = d.width();
    let k2_abs = k * k * config.eps_i().norm();
    let cutoff = 8 * truncation + 1;
    let mut tail = 0.0;
    let mut m = 1;
    while m <= cutoff {
        let mut n = 1;
        while n <= cutoff {
            if m > truncation || n > truncation {
                let lambda = PI * PI * ((m * m + n * n) as f64) / (side * side);
                tail +=
                    64.0 * side * side * k2_abs / (lambda * (m * m * n * n) as f64 * PI.powi(4));
            }
            n += 2;
        }
        m += 2;
    }
    Ok(tail)
}

/// A sign change of a scalar function of k, refined by bisection.
#[derive(Debug, Clone, Copy)]
pub struct SignCrossing {
    pub k: f64,
    /// `true` when the sign changes from + to - (the resonance side).
    pub downward: bool,
}

/// Locates all sign changes among precomputed grid samples `(k, f(k))` and
/// bisects each bracketing interval to the given tolerance, evaluating
/// `refine` only inside the brackets.
pub fn find_sign_crossings(
    samples: &[(f64, f64)],
    mut refine: impl FnMut(f64) -> f64,
    tol: f64,
) -> Vec<SignCrossing> {
    let mut crossings = Vec::new();
    for w in samples.windows(2) {
        let (prev_k, prev_v) = w[0];
        let (k, v) = w[1];
        if prev_v == 0.0 {
            crossings.push(SignCrossing { k: prev_k, downward: v < 0.0 });
        } else if prev_v.signum() != v.signum() && v != 0.0 {
            let (mut lo, mut hi, mut flo) = (prev_k, k, prev_v);
            while hi - lo > tol {
                let mid = 0.5 * (lo + hi);
                let fm = refine(mid);
                if fm == 0.0 {
                    lo = mid;
                    hi = mid;
                } else if fm.signum() == flo.signum() {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            crossings.push(SignCrossing { k: 0.5 * (lo + hi), downward: prev_v > 0.0 });
        }
    }
    crossings
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point2;

    fn section_config(n_cell: usize) -> CellConfig {
        CellConfig {
            eps_e_inv: 10.0,
            eps_i_inv: Complex64::new(10.0, -0.01),
            inclusion: Some(AxisBox::new(0.25, 0.25, 0.75, 0.75)),
            n_cell,
        }
    }

    #[test]
    fn empty_inclusion_gives_trivial_parameters() {
        let config = CellConfig {
            eps_e_inv: 10.0,
            eps_i_inv: Complex64::new(10.0, -0.01),
            inclusion: None,
            n_cell: 8,
        };
        let problem = CellProblem::new(config).unwrap();
        let sol = problem.solve(29.0).unwrap();
        assert!(sol.w1.max_abs(None) < 1e-10);
        assert!(sol.w2.max_abs(None) < 1e-10);
        assert!(sol.w.max_abs(None) < 1e-12);
        assert!((sol.mu_eff - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        for j in 0..2 {
            for k in 0..2 {
                let expect = if j == k { 10.0 } else { 0.0 };
                assert!((sol.a_eff[j][k] - expect).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn corrector_zero_mean_and_odd_symmetry() {
        let problem = CellProblem::new(section_config(32)).unwrap();
        let (w1, w2) = problem.solve_correctors().unwrap();

        let area_ystar = problem.mesh().tag_area(TAG_MATRIX);
        for w in [&w1, &w2] {
            let mean = w.integral(Some(TAG_MATRIX)) / area_ystar;
            assert!(mean.norm() < 1e-12, "mean {mean}");
            let imag = w.coeffs().iter().map(|z| z.im.abs()).fold(0.0, f64::max);
            assert!(imag < 1e-10);
        }

        // w1 is odd about the vertical center line: w1(x, y) = -w1(1-x, y).
        let mesh = problem.mesh();
        let mut checked = 0;
        for (v, p) in mesh.vertices().iter().enumerate() {
            if w1.coeffs()[v].norm() < 1e-14 {
                continue;
            }
            let mirrored = Point2::new(1.0 - p.x, p.y);
            if let Ok(val) = w1.evaluate_at(mirrored) {
                assert!(
                    (w1.coeffs()[v] + val).norm() < 1e-8,
                    "w1 not odd at ({}, {})",
                    p.x,
                    p.y
                );
                checked += 1;
            }
        }
        assert!(checked > 0);
    }

    #[test]
    fn effective_a_is_diagonal_isotropic_spd() {
        let problem = CellProblem::new(section_config(32)).unwrap();
        let (w1, w2) = problem.solve_correctors().unwrap();
        let a = problem.effective_a(&w1, &w2).unwrap();
        assert!((a[0][1] - a[1][0]).abs() < 1e-12);
        let trace = a[0][0] + a[1][1];
        assert!(a[0][1].abs() < 1e-8 * trace, "off-diagonal {}", a[0][1]);
        assert!((a[0][0] - a[1][1]).abs() < 1e-8 * trace);
        // SPD and bounded above by the zero-corrector competitor.
        let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
        assert!(det > 0.0 && trace > 0.0);
        let ystar_area = problem.mesh().tag_area(TAG_MATRIX);
        assert!(a[0][0] > 0.0 && a[0][0] <= 10.0 * ystar_area + 1e-12);
    }

    #[test]
    fn corrector_energy_decreases_under_refinement() {
        // Galerkin optimality: cell energy non-increasing as the mesh refines.
        let mut prev: Option<f64> = None;
        for n_cell in [8, 16, 32, 64] {
            let problem = CellProblem::new(section_config(n_cell)).unwrap();
            let (w1, _) = problem.solve_correctors().unwrap();
            let a = problem.effective_a(&w1, &w1).unwrap();
            // a[0][0] is the energy of e_1 + grad w_1.
            if let Some(p) = prev {
                assert!(a[0][0] <= p + 1e-12, "energy grew: {} > {}", a[0][0], p);
            }
            prev = Some(a[0][0]);
        }
    }

    #[test]
    fn resonant_solution_small_k_limit() {
        // Far below the first resonance mu_eff is close to 1 and matches the
        // eigen-series oracle.
        let problem = CellProblem::new(section_config(64)).unwrap();
        let k = 1.0;
        let w = problem.solve_resonant(k).unwrap();
        let mu = problem.effective_mu(&w, k);
        let oracle = mu_eff_eigen_oracle(problem.config(), k, 41).unwrap();
        assert!((mu - oracle).norm() / oracle.norm() < 1e-3);
        assert!((mu - Complex64::new(1.0, 0.0)).norm() < 0.01);
    }

    #[test]
    fn resonant_zero_trace_on_inclusion_boundary() {
        let problem = CellProblem::new(section_config(16)).unwrap();
        let w = problem.solve_resonant(20.0).unwrap();
        let mesh = problem.mesh();
        for (v, p) in mesh.vertices().iter().enumerate() {
            let on_d_boundary = ((p.x == 0.25 || p.x == 0.75) && (0.25..=0.75).contains(&p.y))
                || ((p.y == 0.25 || p.y == 0.75) && (0.25..=0.75).contains(&p.x));
            if on_d_boundary {
                assert!(w.coeffs()[v].norm() == 0.0);
            }
        }
    }

    #[test]
    fn oracle_resonances_near_expected_wavenumbers() {
        // First nonzero-mean eigenvalues of the square of side 1/2:
        // lambda_11 = 8 pi^2 -> k ~ 28.1, lambda_13 = 40 pi^2 -> k ~ 62.8.
        let config = section_config(8);
        let eps_re = config.eps_i().re;
        let k11 = (8.0 * PI * PI / eps_re).sqrt();
        let k13 = (40.0 * PI * PI / eps_re).sqrt();
        assert!((k11 - 28.1).abs() < 0.05, "k11 = {k11}");
        assert!((k13 - 62.8).abs() < 0.05, "k13 = {k13}");

        let f = |k: f64| mu_eff_eigen_oracle(&config, k, 41).unwrap().re;
        let samples: Vec<(f64, f64)> =
            (0..=106).map(|i| 15.0 + 0.5 * i as f64).map(|k| (k, f(k))).collect();
        let crossings = find_sign_crossings(&samples, f, 1e-3);
        let downward: Vec<f64> = crossings.iter().filter(|c| c.downward).map(|c| c.k).collect();
        assert_eq!(downward.len(), 2, "crossings: {crossings:?}");
        assert!((downward[0] - k11).abs() < 0.3);
        assert!((downward[1] - k13).abs() < 0.3);
    }

    #[test]
    fn oracle_tail_is_small_at_default_truncation() {
        let config = section_config(8);
        let tail = mu_eff_oracle_tail(&config, 68.0, 41).unwrap();
        assert!(tail < 1e-3, "tail {tail}");
    }

    #[test]
    fn non_square_inclusion_rejected_by_oracle() {
        let config = CellConfig {
            eps_e_inv: 10.0,
            eps_i_inv: Complex64::new(10.0, -0.01),
            inclusion: Some(AxisBox::new(0.25, 0.25, 0.75, 0.625)),
            n_cell: 8,
        };
        assert_eq!(
            mu_eff_eigen_oracle(&config, 20.0, 41).unwrap_err(),
            Error::NotASquareInclusion
        );
    }

    #[test]
    fn mu_eff_negative_real_part_at_k29() {
        let problem = CellProblem::new(section_config(64)).unwrap();
        let sol = problem.solve(29.0).unwrap();
        assert!(sol.mu_eff.re < 0.0, "mu_eff = {}", sol.mu_eff);
        assert!(sol.mu_eff.im > 0.0);
    }

    #[test]
    fn resonant_energy_bound_behavior() {
        // || w ||_{1,k,D} <= C / k: k * norm stays bounded across
        // non-resonant wavenumbers.
        let problem = CellProblem::new(section_config(32)).unwrap();
        let mut values = Vec::new();
        for k in [15.0, 20.0, 25.0, 34.0, 48.0, 60.0] {
            let w = problem.solve_resonant(k).unwrap();
            let norm = w.norm_h1k(k);
            values.push(k * norm);
        }
        let max = values.iter().cloned().fold(0.0, f64::max);
        let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(max / min < 50.0, "k * ||w||_1k spread too wide: {values:?}");
    }
}
