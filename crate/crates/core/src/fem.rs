//! P1 finite elements for Helmholtz-type sesquilinear forms.
//!
//! Coefficients are constant per region tag, so every element integral is a
//! polynomial of degree at most two and is integrated exactly: the stiffness
//! term by the constant-gradient product, the mass term by the exact P1 mass
//! matrix, and the impedance boundary term by the exact edge mass matrix.
//! Boundary data is integrated with a 2-point Gauss rule per edge.

use std::io::{self, Write};
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::mesh::Mesh2D;
use crate::sparse::{CsrComplexMatrix, TripletBuffer};

/// Material data of one region: symmetric 2x2 diffusion matrix and scalar
/// mass coefficient.
#[derive(Debug, Clone, Copy)]
pub struct RegionCoefficient {
    pub a: [[Complex64; 2]; 2],
    pub mu: Complex64,
}

impl RegionCoefficient {
    pub fn isotropic(a: Complex64, mu: Complex64) -> Self {
        let zero = Complex64::new(0.0, 0.0);
        Self { a: [[a, zero], [zero, a]], mu }
    }

    /// Free space: a = Id, mu = 1.
    pub fn vacuum() -> Self {
        Self::isotropic(Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0))
    }
}

/// Region-tag-indexed coefficients.
#[derive(Debug, Clone, Default)]
pub struct CoefficientField {
    by_tag: Vec<Option<RegionCoefficient>>,
}

impl CoefficientField {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, tag: u8, coeff: RegionCoefficient) -> Self {
        let idx = tag as usize;
        if self.by_tag.len() <= idx {
            self.by_tag.resize(idx + 1, None);
        }
        self.by_tag[idx] = Some(coeff);
        self
    }

    pub fn get(&self, tag: u8) -> Result<&RegionCoefficient> {
        self.by_tag
            .get(tag as usize)
            .and_then(|c| c.as_ref())
            .ok_or(Error::MissingRegionCoefficient { tag })
    }
}

/// Complex nodal P1 field tied to a mesh (one coefficient per vertex).
#[derive(Debug, Clone)]
pub struct FieldP1 {
    mesh: Arc<Mesh2D>,
    coeffs: Vec<Complex64>,
}

impl FieldP1 {
    pub fn new(mesh: Arc<Mesh2D>, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != mesh.n_vertices() {
            return Err(Error::DimensionMismatch { expected: mesh.n_vertices(), got: coeffs.len() });
        }
        Ok(Self { mesh, coeffs })
    }

    pub fn zeros(mesh: Arc<Mesh2D>) -> Self {
        let n = mesh.n_vertices();
        Self { mesh, coeffs: vec![Complex64::new(0.0, 0.0); n] }
    }

    /// Nodal interpolation of a function.
    pub fn interpolate(mesh: Arc<Mesh2D>, f: impl Fn(Point2) -> Complex64) -> Self {
        let coeffs = mesh.vertices().iter().map(|&p| f(p)).collect();
        Self { mesh, coeffs }
    }

    pub fn mesh(&self) -> &Arc<Mesh2D> {
        &self.mesh
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn scaled(&self, c: Complex64) -> FieldP1 {
        FieldP1 { mesh: Arc::clone(&self.mesh), coeffs: self.coeffs.iter().map(|&v| c * v).collect() }
    }

    /// Barycentric interpolation at one point.
    pub fn evaluate_at(&self, p: Point2) -> Result<Complex64> {
        let (t, l) = self.mesh.locate(p)?;
        let [a, b, c] = self.mesh.triangles()[t];
        Ok(l[0] * self.coeffs[a] + l[1] * self.coeffs[b] + l[2] * self.coeffs[c])
    }

    pub fn evaluate(&self, points: &[Point2]) -> Result<Vec<Complex64>> {
        points.iter().map(|&p| self.evaluate_at(p)).collect()
    }

    /// Piecewise-constant gradient at a point (the value of the containing
    /// element).
    pub fn gradient_at(&self, p: Point2) -> Result<[Complex64; 2]> {
        let (t, _) = self.mesh.locate(p)?;
        Ok(self.element_gradient(t))
    }

    /// L2 norm over the whole mesh or one region tag.
    pub fn norm_l2(&self, region: Option<u8>) -> f64 {
        let mut acc = 0.0;
        for t in 0..self.mesh.n_triangles() {
            if let Some(tag) = region {
                if self.mesh.region_tags()[t] != tag {
                    continue;
                }
            }
            acc += self.element_l2_sq(t);
        }
        acc.sqrt()
    }

    /// L2 norm of the gradient over the whole mesh or one region tag.
    pub fn norm_grad(&self, region: Option<u8>) -> f64 {
        let mut acc = 0.0;
        for t in 0..self.mesh.n_triangles() {
            if let Some(tag) = region {
                if self.mesh.region_tags()[t] != tag {
                    continue;
                }
            }
            let g = self.element_gradient(t);
            let area = self.mesh.triangle_area(t);
            acc += (g[0].norm_sqr() + g[1].norm_sqr()) * area;
        }
        acc.sqrt()
    }

    /// Wavenumber-weighted H1 norm: (|grad v|^2 + k^2 |v|^2)^{1/2}.
    pub fn norm_h1k(&self, k: f64) -> f64 {
        let g = self.norm_grad(None);
        let l = self.norm_l2(None);
        (g * g + k * k * l * l).sqrt()
    }

    /// Exact integral of the P1 field over a region (or everything).
    pub fn integral(&self, region: Option<u8>) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for t in 0..self.mesh.n_triangles() {
            if let Some(tag) = region {
                if self.mesh.region_tags()[t] != tag {
                    continue;
                }
            }
            let [a, b, c] = self.mesh.triangles()[t];
            let area = self.mesh.triangle_area(t);
            acc += (self.coeffs[a] + self.coeffs[b] + self.coeffs[c]) * (area / 3.0);
        }
        acc
    }

    /// Largest |value| over the vertices (optionally restricted to vertices
    /// of triangles with the given tag).
    pub fn max_abs(&self, region: Option<u8>) -> f64 {
        match region {
            None => self.coeffs.iter().map(|z| z.norm()).fold(0.0, f64::max),
            Some(tag) => {
                let mut m = 0.0f64;
                for t in 0..self.mesh.n_triangles() {
                    if self.mesh.region_tags()[t] == tag {
                        for &v in &self.mesh.triangles()[t] {
                            m = m.max(self.coeffs[v].norm());
                        }
                    }
                }
                m
            }
        }
    }

    fn element_l2_sq(&self, t: usize) -> f64 {
        let [a, b, c] = self.mesh.triangles()[t];
        let (ca, cb, cc) = (self.coeffs[a], self.coeffs[b], self.coeffs[c]);
        let area = self.mesh.triangle_area(t);
        // v^H M v with the exact P1 mass matrix (area/12) * (1 + delta_ij).
        let quad = ca.norm_sqr() + cb.norm_sqr() + cc.norm_sqr()
            + (ca * cb.conj() + cb * cc.conj() + cc * ca.conj()).re;
        area / 6.0 * quad
    }

    fn element_gradient(&self, t: usize) -> [Complex64; 2] {
        let (grads, _) = self.mesh.p1_gradients(t);
        let [a, b, c] = self.mesh.triangles()[t];
        let mut g = [Complex64::new(0.0, 0.0); 2];
        for (v, gr) in [a, b, c].into_iter().zip(grads) {
            g[0] += self.coeffs[v] * gr[0];
            g[1] += self.coeffs[v] * gr[1];
        }
        g
    }

    /// Writes `x,y,re,im,abs` per vertex.
    pub fn dump_csv(&self, out: &mut dyn Write) -> io::Result<()> {
        writeln!(out, "x,y,re,im,abs")?;
        for (p, z) in self.mesh.vertices().iter().zip(&self.coeffs) {
            writeln!(out, "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}", p.x, p.y, z.re, z.im, z.norm())?;
        }
        Ok(())
    }
}

/// Exact P1 stiffness of `integral(a grad u . grad psi)` with region-wise
/// constant matrix `a`.
pub fn assemble_stiffness(mesh: &Mesh2D, coeff: &CoefficientField) -> Result<CsrComplexMatrix> {
    let n = mesh.n_vertices();
    let mut buf = TripletBuffer::with_capacity(9 * mesh.n_triangles());
    for t in 0..mesh.n_triangles() {
        let rc = coeff.get(mesh.region_tags()[t])?;
        let (grads, two_area) = mesh.p1_gradients(t);
        let area = 0.5 * two_area;
        let tri = mesh.triangles()[t];
        for i in 0..3 {
            for j in 0..3 {
                // (a grad phi_j) . grad phi_i
                let ag = [
                    rc.a[0][0] * grads[j][0] + rc.a[0][1] * grads[j][1],
                    rc.a[1][0] * grads[j][0] + rc.a[1][1] * grads[j][1],
                ];
                let val = (ag[0] * grads[i][0] + ag[1] * grads[i][1]) * area;
                buf.push(tri[i], tri[j], val);
            }
        }
    }
    CsrComplexMatrix::finalize(&buf, n, n)
}

/// Exact P1 mass of `integral(mu u psi)` with region-wise constant `mu`.
pub fn assemble_mass(mesh: &Mesh2D, coeff: &CoefficientField) -> Result<CsrComplexMatrix> {
    let n = mesh.n_vertices();
    let mut buf = TripletBuffer::with_capacity(9 * mesh.n_triangles());
    for t in 0..mesh.n_triangles() {
        let mu = coeff.get(mesh.region_tags()[t])?.mu;
        let area = mesh.triangle_area(t);
        let tri = mesh.triangles()[t];
        for i in 0..3 {
            for j in 0..3 {
                let w = if i == j { area / 6.0 } else { area / 12.0 };
                buf.push(tri[i], tri[j], mu * w);
            }
        }
    }
    CsrComplexMatrix::finalize(&buf, n, n)
}

/// Exact edge mass of `integral_boundary(u psi)`.
pub fn assemble_boundary_mass(mesh: &Mesh2D) -> Result<CsrComplexMatrix> {
    let n = mesh.n_vertices();
    let mut buf = TripletBuffer::with_capacity(4 * mesh.boundary_edges().len());
    for e in mesh.boundary_edges() {
        let [u, v] = e.vertices;
        let len = mesh.vertices()[u].dist(mesh.vertices()[v]);
        buf.push(u, u, Complex64::new(len / 3.0, 0.0));
        buf.push(v, v, Complex64::new(len / 3.0, 0.0));
        buf.push(u, v, Complex64::new(len / 6.0, 0.0));
        buf.push(v, u, Complex64::new(len / 6.0, 0.0));
    }
    CsrComplexMatrix::finalize(&buf, n, n)
}

/// Helmholtz system with impedance boundary:
/// stiffness - k^2 (mu-weighted mass) - i k (boundary mass).
pub fn assemble_helmholtz(
    mesh: &Mesh2D,
    coeff: &CoefficientField,
    k: f64,
) -> Result<CsrComplexMatrix> {
    let n = mesh.n_vertices();
    let stiff = assemble_stiffness(mesh, coeff)?;
    let mass = assemble_mass(mesh, coeff)?;
    let bdry = assemble_boundary_mass(mesh)?;
    let k2 = Complex64::new(k * k, 0.0);
    let ik = Complex64::new(0.0, k);

    let mut buf = TripletBuffer::with_capacity(stiff.nnz() + mass.nnz() + bdry.nnz());
    for (m, factor) in [(&stiff, Complex64::new(1.0, 0.0)), (&mass, -k2), (&bdry, -ik)] {
        for r in 0..n {
            for idx in m.row_offsets()[r]..m.row_offsets()[r + 1] {
                buf.push(r, m.col_indices()[idx], factor * m.values()[idx]);
            }
        }
    }
    CsrComplexMatrix::finalize(&buf, n, n)
}

/// Boundary functional `integral_boundary(g psi)` by 2-point Gauss per edge.
/// The closure receives the quadrature point and the outward unit normal.
pub fn assemble_boundary_source(
    mesh: &Mesh2D,
    g: impl Fn(Point2, [f64; 2]) -> Complex64,
) -> Vec<Complex64> {
    let mut rhs = vec![Complex64::new(0.0, 0.0); mesh.n_vertices()];
    let gauss = [0.5 - 0.5 / 3.0f64.sqrt(), 0.5 + 0.5 / 3.0f64.sqrt()];
    for e in mesh.boundary_edges() {
        let [u, v] = e.vertices;
        let (pu, pv) = (mesh.vertices()[u], mesh.vertices()[v]);
        let len = pu.dist(pv);
        for t in gauss {
            let p = Point2::new(pu.x + t * (pv.x - pu.x), pu.y + t * (pv.y - pu.y));
            let gv = g(p, e.normal);
            rhs[u] += gv * ((1.0 - t) * len * 0.5);
            rhs[v] += gv * (t * len * 0.5);
        }
    }
    rhs
}

/// Interpolates the coarse field onto the fine mesh and returns the
/// (L2, H1k) norms of the difference, measured on the fine mesh.
pub fn cross_mesh_error(coarse: &FieldP1, fine: &FieldP1, k: f64) -> Result<(f64, f64)> {
    let cb = coarse.mesh().bbox();
    let fb = fine.mesh().bbox();
    let tol = 1e-12 * cb.width().max(cb.height());
    if (cb.x_min - fb.x_min).abs() > tol
        || (cb.y_min - fb.y_min).abs() > tol
        || (cb.x_max - fb.x_max).abs() > tol
        || (cb.y_max - fb.y_max).abs() > tol
    {
        return Err(Error::DomainMismatch);
    }
    let mut diff = Vec::with_capacity(fine.mesh().n_vertices());
    for (&p, &fv) in fine.mesh().vertices().iter().zip(fine.coeffs()) {
        diff.push(fv - coarse.evaluate_at(p)?);
    }
    let d = FieldP1::new(Arc::clone(fine.mesh()), diff)?;
    Ok((d.norm_l2(None), d.norm_h1k(k)))
}

/// Degree-5 quadrature error of a P1 field against an analytic solution.
/// Returns (L2 error, H1k error).
pub fn error_vs_analytic(
    field: &FieldP1,
    u: impl Fn(Point2) -> Complex64,
    grad_u: impl Fn(Point2) -> [Complex64; 2],
    k: f64,
) -> (f64, f64) {
    // Dunavant degree-5 rule: 7 points.
    const W1: f64 = 0.225;
    const W2: f64 = 0.132394152788506;
    const W3: f64 = 0.125939180544827;
    const A2: f64 = 0.797426985353087;
    const B2: f64 = 0.101286507323456;
    const A3: f64 = 0.059715871789770;
    const B3: f64 = 0.470142064105115;
    let rule: [([f64; 3], f64); 7] = [
        ([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], W1),
        ([A2, B2, B2], W2),
        ([B2, A2, B2], W2),
        ([B2, B2, A2], W2),
        ([A3, B3, B3], W3),
        ([B3, A3, B3], W3),
        ([B3, B3, A3], W3),
    ];

    let mesh = field.mesh();
    let mut l2_sq = 0.0;
    let mut grad_sq = 0.0;
    for t in 0..mesh.n_triangles() {
        let [a, b, c] = mesh.triangles()[t];
        let [pa, pb, pc] = mesh.triangle_coords(t);
        let area = mesh.triangle_area(t);
        let gh = field.element_gradient(t);
        for (l, w) in rule {
            let p = Point2::new(
                l[0] * pa.x + l[1] * pb.x + l[2] * pc.x,
                l[0] * pa.y + l[1] * pb.y + l[2] * pc.y,
            );
            let vh = l[0] * field.coeffs()[a] + l[1] * field.coeffs()[b] + l[2] * field.coeffs()[c];
            let e = vh - u(p);
            let ge = grad_u(p);
            l2_sq += w * area * e.norm_sqr();
            grad_sq += w * area * ((gh[0] - ge[0]).norm_sqr() + (gh[1] - ge[1]).norm_sqr());
        }
    }
    (l2_sq.sqrt(), (grad_sq + k * k * l2_sq).sqrt())
}

/// Plane wave `amplitude * exp(i k d . x)` with |d| = 1.
#[derive(Debug, Clone, Copy)]
pub struct PlaneWave {
    pub direction: [f64; 2],
    pub amplitude: Complex64,
    pub k: f64,
}

impl PlaneWave {
    /// The left-going incident wave exp(-i k x_1).
    pub fn incoming(k: f64) -> Self {
        Self { direction: [-1.0, 0.0], amplitude: Complex64::new(1.0, 0.0), k }
    }

    pub fn value(&self, p: Point2) -> Complex64 {
        let phase = self.k * (self.direction[0] * p.x + self.direction[1] * p.y);
        self.amplitude * Complex64::new(0.0, phase).exp()
    }

    pub fn gradient(&self, p: Point2) -> [Complex64; 2] {
        let v = self.value(p);
        let ik = Complex64::new(0.0, self.k);
        [v * ik * self.direction[0], v * ik * self.direction[1]]
    }

    /// Impedance data g = grad(u_inc) . n - i k u_inc.
    pub fn impedance_data(&self, p: Point2, normal: [f64; 2]) -> Complex64 {
        let grad = self.gradient(p);
        let v = self.value(p);
        grad[0] * normal[0] + grad[1] * normal[1] - Complex64::new(0.0, self.k) * v
    }
}
