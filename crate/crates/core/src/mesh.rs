//! Structured, interface-resolving triangulations of axis-aligned boxes,
//! uniform refinement, and periodic identification of unit-cell meshes.
//!
//! All meshes are immutable after construction. A structured mesh subdivides
//! the box into an `n x n` grid of squares, each split into two triangles
//! along the same diagonal (lower-left to upper-right), which gives `2 n^2`
//! elements. Region interfaces must coincide with grid lines, so tagged
//! areas are resolved exactly.

use std::collections::HashMap;
use std::io::{self, Write};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{AxisBox, Point2};

/// One edge on the outer boundary together with its outward unit normal.
#[derive(Debug, Clone, Copy)]
pub struct BoundaryEdge {
    pub vertices: [usize; 2],
    pub normal: [f64; 2],
}

/// Grid metadata kept by structured meshes for O(1) point location.
#[derive(Debug, Clone, Copy)]
pub struct StructuredInfo {
    pub bbox: AxisBox,
    /// Squares per side.
    pub n: usize,
}

/// Conforming triangulation with per-triangle region tags.
///
/// Tags: 0 = exterior/matrix, 1 = scatterer/inclusion. The heterogeneous
/// solver introduces tag 2 for the fine-scale inclusions via [`Mesh2D::retag`].
#[derive(Debug, Clone)]
pub struct Mesh2D {
    vertices: Vec<Point2>,
    triangles: Vec<[usize; 3]>,
    region_tag: Vec<u8>,
    boundary_edges: Vec<BoundaryEdge>,
    h_local: Vec<f64>,
    h_max: f64,
    bbox: AxisBox,
    structured: Option<StructuredInfo>,
}

impl Mesh2D {
    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn region_tags(&self) -> &[u8] {
        &self.region_tag
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary_edges
    }

    pub fn h_local(&self) -> &[f64] {
        &self.h_local
    }

    pub fn h_max(&self) -> f64 {
        self.h_max
    }

    pub fn bbox(&self) -> AxisBox {
        self.bbox
    }

    pub fn structured_info(&self) -> Option<StructuredInfo> {
        self.structured
    }

    /// Corner coordinates of triangle `t`.
    pub fn triangle_coords(&self, t: usize) -> [Point2; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    /// Signed area of triangle `t` (positive for counterclockwise).
    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_coords(t);
        0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y))
    }

    /// Total area covered by triangles with the given tag.
    pub fn tag_area(&self, tag: u8) -> f64 {
        (0..self.n_triangles())
            .filter(|&t| self.region_tag[t] == tag)
            .map(|t| self.triangle_area(t))
            .sum()
    }

    /// Barycenter of triangle `t`.
    pub fn barycenter(&self, t: usize) -> Point2 {
        let [a, b, c] = self.triangle_coords(t);
        Point2::new((a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0)
    }

    /// Constant gradients of the three P1 hat functions on triangle `t`,
    /// together with twice the triangle area.
    pub fn p1_gradients(&self, t: usize) -> ([[f64; 2]; 3], f64) {
        let [a, b, c] = self.triangle_coords(t);
        let two_area = (b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y);
        let grads = [
            [(b.y - c.y) / two_area, (c.x - b.x) / two_area],
            [(c.y - a.y) / two_area, (a.x - c.x) / two_area],
            [(a.y - b.y) / two_area, (b.x - a.x) / two_area],
        ];
        (grads, two_area)
    }

    /// Returns a copy with region tags recomputed from each triangle's
    /// barycenter. Used to overlay finer region structure (e.g. fine-scale
    /// inclusions) on an existing interface-resolving mesh.
    pub fn retag(&self, tag_of: impl Fn(Point2, u8) -> u8) -> Mesh2D {
        let mut out = self.clone();
        for t in 0..out.n_triangles() {
            out.region_tag[t] = tag_of(out.barycenter(t), out.region_tag[t]);
        }
        out
    }

    /// Locate the triangle containing `p` and its barycentric coordinates.
    pub fn locate(&self, p: Point2) -> Result<(usize, [f64; 3])> {
        let tol = 1e-12 * self.bbox.width().max(self.bbox.height()).max(1.0);
        if p.x < self.bbox.x_min - tol
            || p.x > self.bbox.x_max + tol
            || p.y < self.bbox.y_min - tol
            || p.y > self.bbox.y_max + tol
        {
            return Err(Error::PointOutsideMesh { x: p.x, y: p.y });
        }
        if let Some(info) = self.structured {
            let n = info.n;
            let fx = (p.x - info.bbox.x_min) / info.bbox.width() * n as f64;
            let fy = (p.y - info.bbox.y_min) / info.bbox.height() * n as f64;
            let i = (fx.floor() as isize).clamp(0, n as isize - 1) as usize;
            let j = (fy.floor() as isize).clamp(0, n as isize - 1) as usize;
            let xi = fx - i as f64;
            let eta = fy - j as f64;
            let t = 2 * (j * n + i) + usize::from(eta > xi);
            let bary = self.barycentric(t, p);
            return Ok((t, clamp_bary(bary)));
        }
        // Fallback for non-structured meshes: linear scan.
        for t in 0..self.n_triangles() {
            let bary = self.barycentric(t, p);
            if bary.iter().all(|&l| l >= -tol) {
                return Ok((t, clamp_bary(bary)));
            }
        }
        Err(Error::PointOutsideMesh { x: p.x, y: p.y })
    }

    fn barycentric(&self, t: usize, p: Point2) -> [f64; 3] {
        let [a, b, c] = self.triangle_coords(t);
        let two_area = (b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y);
        let l0 = ((b.x - p.x) * (c.y - p.y) - (c.x - p.x) * (b.y - p.y)) / two_area;
        let l1 = ((c.x - p.x) * (a.y - p.y) - (a.x - p.x) * (c.y - p.y)) / two_area;
        [l0, l1, 1.0 - l0 - l1]
    }

    /// Checks conformity: every interior edge shared by exactly two triangles,
    /// every boundary edge by exactly one.
    pub fn is_conforming(&self) -> bool {
        let mut count: HashMap<(usize, usize), usize> = HashMap::new();
        for tri in &self.triangles {
            for e in 0..3 {
                let (u, v) = (tri[e], tri[(e + 1) % 3]);
                let key = (u.min(v), u.max(v));
                *count.entry(key).or_insert(0) += 1;
            }
        }
        let mut boundary = 0usize;
        for &c in count.values() {
            match c {
                1 => boundary += 1,
                2 => {}
                _ => return false,
            }
        }
        boundary == self.boundary_edges.len()
    }

    /// Writes the mesh as plain CSV rows: `v,<idx>,<x>,<y>` per vertex and
    /// `t,<idx>,<v0>,<v1>,<v2>,<tag>` per triangle.
    pub fn dump_csv(&self, out: &mut dyn Write) -> io::Result<()> {
        writeln!(out, "kind,idx,a,b,c,tag")?;
        for (i, v) in self.vertices.iter().enumerate() {
            writeln!(out, "v,{},{:.17e},{:.17e},", i, v.x, v.y)?;
        }
        for (t, tri) in self.triangles.iter().enumerate() {
            writeln!(out, "t,{},{},{},{},{}", t, tri[0], tri[1], tri[2], self.region_tag[t])?;
        }
        Ok(())
    }
}

/// Builds the `n x n` structured triangulation of `bbox`, tagging triangles
/// inside `inner` with 1 and the rest with 0.
///
/// Grid coordinates are generated as `min + i * extent / n` so identical
/// formulas yield bitwise-identical coordinates, which makes periodic
/// matching exact. Fails with [`Error::NonAlignedInterface`] if an edge of
/// `inner` misses the grid lines and [`Error::InvalidSubdivision`] if `n = 0`.
pub fn structured_mesh(bbox: AxisBox, n: usize, inner: Option<AxisBox>) -> Result<Mesh2D> {
    if n == 0 {
        return Err(Error::InvalidSubdivision);
    }
    if let Some(inner) = &inner {
        for (coord, min, extent) in [
            (inner.x_min, bbox.x_min, bbox.width()),
            (inner.x_max, bbox.x_min, bbox.width()),
            (inner.y_min, bbox.y_min, bbox.height()),
            (inner.y_max, bbox.y_min, bbox.height()),
        ] {
            let t = (coord - min) / extent * n as f64;
            if (t - t.round()).abs() > 1e-9 {
                return Err(Error::NonAlignedInterface { coordinate: coord });
            }
        }
    }

    let np = n + 1;
    let coord_x: Vec<f64> = (0..np).map(|i| bbox.x_min + i as f64 * bbox.width() / n as f64).collect();
    let coord_y: Vec<f64> = (0..np).map(|j| bbox.y_min + j as f64 * bbox.height() / n as f64).collect();

    let mut vertices = Vec::with_capacity(np * np);
    for j in 0..np {
        for i in 0..np {
            vertices.push(Point2::new(coord_x[i], coord_y[j]));
        }
    }

    let v = |i: usize, j: usize| j * np + i;
    let mut triangles = Vec::with_capacity(2 * n * n);
    let mut region_tag = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            // Diagonal from (i, j) to (i+1, j+1); both children counterclockwise.
            triangles.push([v(i, j), v(i + 1, j), v(i + 1, j + 1)]);
            triangles.push([v(i, j), v(i + 1, j + 1), v(i, j + 1)]);
            for half in 0..2 {
                let t = triangles.len() - 2 + half;
                let tri = triangles[t];
                let bary = Point2::new(
                    (vertices[tri[0]].x + vertices[tri[1]].x + vertices[tri[2]].x) / 3.0,
                    (vertices[tri[0]].y + vertices[tri[1]].y + vertices[tri[2]].y) / 3.0,
                );
                let tag = match &inner {
                    Some(b) if b.contains(bary) => 1,
                    _ => 0,
                };
                region_tag.push(tag);
            }
        }
    }

    let mut boundary_edges = Vec::with_capacity(4 * n);
    for i in 0..n {
        boundary_edges.push(BoundaryEdge { vertices: [v(i, 0), v(i + 1, 0)], normal: [0.0, -1.0] });
    }
    for j in 0..n {
        boundary_edges.push(BoundaryEdge { vertices: [v(n, j), v(n, j + 1)], normal: [1.0, 0.0] });
    }
    for i in (0..n).rev() {
        boundary_edges.push(BoundaryEdge { vertices: [v(i + 1, n), v(i, n)], normal: [0.0, 1.0] });
    }
    for j in (0..n).rev() {
        boundary_edges.push(BoundaryEdge { vertices: [v(0, j + 1), v(0, j)], normal: [-1.0, 0.0] });
    }

    let diam = (bbox.width() / n as f64).hypot(bbox.height() / n as f64);
    let h_local = vec![diam; triangles.len()];

    Ok(Mesh2D {
        vertices,
        triangles,
        region_tag,
        boundary_edges,
        h_local,
        h_max: diam,
        bbox,
        structured: Some(StructuredInfo { bbox, n }),
    })
}

/// Splits every triangle into four congruent children via edge midpoints.
/// Tags are inherited and `h_max` halves.
pub fn uniform_refine(mesh: &Mesh2D) -> Mesh2D {
    let mut vertices = mesh.vertices.to_vec();
    let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
    let mut mid = |u: usize, v: usize, vertices: &mut Vec<Point2>| -> usize {
        let key = (u.min(v), u.max(v));
        *midpoint.entry(key).or_insert_with(|| {
            let p = Point2::new(
                0.5 * (vertices[u].x + vertices[v].x),
                0.5 * (vertices[u].y + vertices[v].y),
            );
            vertices.push(p);
            vertices.len() - 1
        })
    };

    let mut triangles = Vec::with_capacity(4 * mesh.n_triangles());
    let mut region_tag = Vec::with_capacity(4 * mesh.n_triangles());
    let mut h_local = Vec::with_capacity(4 * mesh.n_triangles());
    for (t, &[a, b, c]) in mesh.triangles.iter().enumerate() {
        let ab = mid(a, b, &mut vertices);
        let bc = mid(b, c, &mut vertices);
        let ca = mid(c, a, &mut vertices);
        for child in [[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]] {
            triangles.push(child);
            region_tag.push(mesh.region_tag[t]);
            h_local.push(0.5 * mesh.h_local[t]);
        }
    }

    let mut boundary_edges = Vec::with_capacity(2 * mesh.boundary_edges.len());
    for e in &mesh.boundary_edges {
        let [u, v] = e.vertices;
        let m = mid(u, v, &mut vertices);
        boundary_edges.push(BoundaryEdge { vertices: [u, m], normal: e.normal });
        boundary_edges.push(BoundaryEdge { vertices: [m, v], normal: e.normal });
    }

    Mesh2D {
        vertices,
        triangles,
        region_tag,
        boundary_edges,
        h_local,
        h_max: 0.5 * mesh.h_max,
        bbox: mesh.bbox,
        structured: mesh.structured.map(|s| StructuredInfo { bbox: s.bbox, n: 2 * s.n }),
    }
}

/// Unit-cell mesh with opposite boundary vertices identified (torus).
#[derive(Debug, Clone)]
pub struct PeriodicMesh {
    base: Arc<Mesh2D>,
    master_of: Vec<usize>,
    dof_index: Vec<usize>,
    n_dofs: usize,
}

impl PeriodicMesh {
    pub fn base(&self) -> &Arc<Mesh2D> {
        &self.base
    }

    /// Master vertex of each vertex (identity for masters).
    pub fn master_of(&self) -> &[usize] {
        &self.master_of
    }

    /// Periodic degree of freedom owning vertex `v`.
    pub fn dof_of_vertex(&self, v: usize) -> usize {
        self.dof_index[v]
    }

    pub fn n_dofs(&self) -> usize {
        self.n_dofs
    }

    /// Expands per-DOF values to a per-vertex vector (slaves copy masters).
    pub fn scatter<T: Copy>(&self, dof_values: &[T]) -> Vec<T> {
        (0..self.base.n_vertices()).map(|v| dof_values[self.dof_index[v]]).collect()
    }
}

/// Identifies opposite boundary vertices of a unit-cell mesh by translation.
///
/// Right/top boundary vertices become slaves of their left/bottom partners;
/// the four corners collapse to a single master. Partners must match exactly
/// (structured meshes generate matching coordinates by construction).
pub fn periodic_wrap(mesh: &Arc<Mesh2D>) -> Result<PeriodicMesh> {
    let bbox = mesh.bbox();
    let n_vertices = mesh.n_vertices();
    let mut master_of: Vec<usize> = (0..n_vertices).collect();

    let mut left: HashMap<u64, usize> = HashMap::new();
    let mut bottom: HashMap<u64, usize> = HashMap::new();
    for (v, p) in mesh.vertices().iter().enumerate() {
        if p.x == bbox.x_min {
            left.insert(p.y.to_bits(), v);
        }
        if p.y == bbox.y_min {
            bottom.insert(p.x.to_bits(), v);
        }
    }
    for (v, p) in mesh.vertices().iter().enumerate() {
        if p.x == bbox.x_max {
            let partner = left
                .get(&p.y.to_bits())
                .copied()
                .ok_or(Error::NonMatchingPeriodicBoundary { x: p.x, y: p.y })?;
            master_of[v] = partner;
        }
    }
    for (v, p) in mesh.vertices().iter().enumerate() {
        if p.y == bbox.y_max {
            let partner = bottom
                .get(&p.x.to_bits())
                .copied()
                .ok_or(Error::NonMatchingPeriodicBoundary { x: p.x, y: p.y })?;
            master_of[v] = partner;
        }
    }
    // Resolve chains (top-right corner points through two identifications).
    for v in 0..n_vertices {
        let mut m = master_of[v];
        while master_of[m] != m {
            m = master_of[m];
        }
        master_of[v] = m;
    }

    let mut dof_index = vec![usize::MAX; n_vertices];
    let mut n_dofs = 0;
    for v in 0..n_vertices {
        if master_of[v] == v {
            dof_index[v] = n_dofs;
            n_dofs += 1;
        }
    }
    for v in 0..n_vertices {
        dof_index[v] = dof_index[master_of[v]];
    }

    Ok(PeriodicMesh { base: Arc::clone(mesh), master_of, dof_index, n_dofs })
}

fn clamp_bary(mut l: [f64; 3]) -> [f64; 3] {
    for li in &mut l {
        *li = li.clamp(0.0, 1.0);
    }
    l
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smallest_mesh() {
        let m = structured_mesh(AxisBox::unit(), 1, None).unwrap();
        assert_eq!(m.n_triangles(), 2);
        assert_eq!(m.n_vertices(), 4);
        assert_eq!(m.boundary_edges().len(), 4);
        assert!(m.is_conforming());
    }

    #[test]
    fn scatterer_tags_cover_quarter_area() {
        // G = (0.25, 0.75)^2 with inner box Omega = (0.375, 0.625)^2 at n = 8:
        // Omega covers a quarter of the area, so a quarter of the 128 triangles.
        let g = AxisBox::new(0.25, 0.25, 0.75, 0.75);
        let omega = AxisBox::new(0.375, 0.375, 0.625, 0.625);
        let m = structured_mesh(g, 8, Some(omega)).unwrap();
        assert_eq!(m.n_triangles(), 128);
        let tagged = m.region_tags().iter().filter(|&&t| t == 1).count();
        assert_eq!(tagged, 32);
        assert!((m.tag_area(1) - omega.area()).abs() < 1e-15);
    }

    #[test]
    fn misaligned_interface_rejected() {
        let d = AxisBox::new(0.25, 0.25, 0.75, 0.75);
        let err = structured_mesh(AxisBox::unit(), 6, Some(d)).unwrap_err();
        assert!(matches!(err, Error::NonAlignedInterface { .. }));
    }

    #[test]
    fn zero_subdivision_rejected() {
        assert_eq!(structured_mesh(AxisBox::unit(), 0, None).unwrap_err(), Error::InvalidSubdivision);
    }

    #[test]
    fn areas_sum_to_box_area() {
        let g = AxisBox::new(0.25, 0.25, 0.75, 0.75);
        let m = structured_mesh(g, 12, Some(AxisBox::new(0.375, 0.375, 0.625, 0.625))).unwrap();
        let total: f64 = (0..m.n_triangles()).map(|t| m.triangle_area(t)).sum();
        assert!((total - g.area()).abs() <= 1e-12 * g.area());
        assert!((0..m.n_triangles()).all(|t| m.triangle_area(t) > 0.0));
    }

    #[test]
    fn refine_quadruples_and_halves() {
        let m = structured_mesh(AxisBox::unit(), 1, None).unwrap();
        let r = uniform_refine(&m);
        assert_eq!(r.n_triangles(), 8);
        assert!((r.h_max() - m.h_max() / 2.0).abs() < 1e-15);
        assert!(r.is_conforming());

        let g = AxisBox::new(0.25, 0.25, 0.75, 0.75);
        let m = structured_mesh(g, 8, Some(AxisBox::new(0.375, 0.375, 0.625, 0.625))).unwrap();
        assert!((m.h_max() - 2f64.sqrt() / 16.0).abs() < 1e-15);
        let r = uniform_refine(&m);
        assert!((r.h_max() - 2f64.sqrt() / 32.0).abs() < 1e-15);
        // Tags inherited: area identical.
        assert!((r.tag_area(1) - m.tag_area(1)).abs() < 1e-15);
        // Refined structured mesh still locates points.
        let (t, _) = r.locate(Point2::new(0.5, 0.5)).unwrap();
        assert!(t < r.n_triangles());
    }

    #[test]
    fn periodic_unit_cell_dofs() {
        // n = 1: all four corners identify to one master.
        let m = Arc::new(structured_mesh(AxisBox::unit(), 1, None).unwrap());
        let p = periodic_wrap(&m).unwrap();
        assert_eq!(p.n_dofs(), 1);
        let masters: Vec<usize> = p.master_of().to_vec();
        assert!(masters.iter().all(|&m| m == masters[0]));

        // n = 4: 25 vertices, 9 slaves, 16 DOFs.
        let m = Arc::new(structured_mesh(AxisBox::unit(), 4, None).unwrap());
        let p = periodic_wrap(&m).unwrap();
        assert_eq!(m.n_vertices(), 25);
        assert_eq!(p.n_dofs(), 16);
    }

    #[test]
    fn periodic_dof_count_is_n_squared() {
        for n in 1..=9 {
            let m = Arc::new(structured_mesh(AxisBox::unit(), n, None).unwrap());
            let p = periodic_wrap(&m).unwrap();
            assert_eq!(p.n_dofs(), n * n);
        }
    }

    #[test]
    fn perturbed_boundary_vertex_fails_to_wrap() {
        let m = structured_mesh(AxisBox::unit(), 2, None).unwrap();
        let mut bad = m.clone();
        // Nudge a right-edge vertex off the grid.
        let idx = bad
            .vertices
            .iter()
            .position(|p| p.x == 1.0 && p.y == 0.5)
            .unwrap();
        bad.vertices[idx].y += 1e-9;
        let err = periodic_wrap(&Arc::new(bad)).unwrap_err();
        assert!(matches!(err, Error::NonMatchingPeriodicBoundary { .. }));
    }

    #[test]
    fn locate_and_barycentric() {
        let m = structured_mesh(AxisBox::unit(), 4, None).unwrap();
        let (t, l) = m.locate(Point2::new(0.6, 0.1)).unwrap();
        let [a, b, c] = m.triangle_coords(t);
        let x = l[0] * a.x + l[1] * b.x + l[2] * c.x;
        let y = l[0] * a.y + l[1] * b.y + l[2] * c.y;
        assert!((x - 0.6).abs() < 1e-12 && (y - 0.1).abs() < 1e-12);
        assert!(m.locate(Point2::new(1.5, 0.0)).is_err());
    }

    #[test]
    fn shape_regularity_constant() {
        // All triangles congruent: circumradius/inradius identical.
        let m = structured_mesh(AxisBox::new(0.25, 0.25, 0.75, 0.75), 8, None).unwrap();
        let ratio = |t: usize| {
            let [a, b, c] = m.triangle_coords(t);
            let (la, lb, lc) = (b.dist(c), c.dist(a), a.dist(b));
            let s = 0.5 * (la + lb + lc);
            let area = m.triangle_area(t);
            let inr = area / s;
            let circ = la * lb * lc / (4.0 * area);
            circ / inr
        };
        let r0 = ratio(0);
        assert!((0..m.n_triangles()).all(|t| (ratio(t) - r0).abs() < 1e-12));
    }
}
