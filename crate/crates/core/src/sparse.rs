//! Complex sparse matrices: triplet assembly, CSR storage, a bordered
//! mean-constraint augmentation, and a direct solver.
//!
//! The solver contract is a sparse LU with fill-reducing ordering (backed by
//! `faer`), run sequentially so repeated runs are bitwise deterministic.
//! Solutions are refined to a relative residual of 1e-10 or better.

use std::panic::{self, AssertUnwindSafe};
use std::sync::Once;

use faer::complex_native::c64;
use faer::prelude::SpSolver;
use faer::sparse::SparseColMat;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Residual contract of [`solve_direct`].
pub const SOLVE_RELATIVE_RESIDUAL: f64 = 1e-10;

/// Unordered element contributions accumulated during assembly.
#[derive(Debug, Clone, Default)]
pub struct TripletBuffer {
    entries: Vec<(usize, usize, Complex64)>,
}

impl TripletBuffer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(cap: usize) -> Self {
        Self { entries: Vec::with_capacity(cap) }
    }

    pub fn push(&mut self, row: usize, col: usize, value: Complex64) {
        self.entries.push((row, col, value));
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Merges another buffer (used by element-parallel assembly).
    pub fn append(&mut self, mut other: TripletBuffer) {
        self.entries.append(&mut other.entries);
    }
}

/// Immutable CSR matrix with complex double-precision entries.
///
/// Column indices are strictly increasing within each row and duplicate
/// contributions have been summed.
#[derive(Debug, Clone)]
pub struct CsrComplexMatrix {
    n_rows: usize,
    n_cols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<Complex64>,
}

impl CsrComplexMatrix {
    /// Compresses a triplet buffer into CSR form, summing duplicates.
    pub fn finalize(buffer: &TripletBuffer, n_rows: usize, n_cols: usize) -> Result<Self> {
        for &(r, c, _) in &buffer.entries {
            if r >= n_rows || c >= n_cols {
                return Err(Error::IndexOutOfRange { row: r, col: c, n_rows, n_cols });
            }
        }
        let mut order: Vec<usize> = (0..buffer.entries.len()).collect();
        order.sort_unstable_by_key(|&e| {
            let (r, c, _) = buffer.entries[e];
            (r, c)
        });

        let mut row_offsets = vec![0usize; n_rows + 1];
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        let mut last: Option<(usize, usize)> = None;
        for &e in &order {
            let (r, c, v) = buffer.entries[e];
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_indices.push(c);
                values.push(v);
                row_offsets[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..n_rows {
            row_offsets[r + 1] += row_offsets[r];
        }
        Ok(Self { n_rows, n_cols, row_offsets, col_indices, values })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Stored entry at (row, col), or zero.
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        let lo = self.row_offsets[row];
        let hi = self.row_offsets[row + 1];
        match self.col_indices[lo..hi].binary_search(&col) {
            Ok(k) => self.values[lo + k],
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    pub fn matvec(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        if x.len() != self.n_cols {
            return Err(Error::DimensionMismatch { expected: self.n_cols, got: x.len() });
        }
        let mut y = vec![Complex64::new(0.0, 0.0); self.n_rows];
        for r in 0..self.n_rows {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in self.row_offsets[r]..self.row_offsets[r + 1] {
                acc += self.values[k] * x[self.col_indices[k]];
            }
            y[r] = acc;
        }
        Ok(y)
    }

    pub fn transpose(&self) -> CsrComplexMatrix {
        let mut buf = TripletBuffer::with_capacity(self.nnz());
        for r in 0..self.n_rows {
            for k in self.row_offsets[r]..self.row_offsets[r + 1] {
                buf.push(self.col_indices[k], r, self.values[k]);
            }
        }
        CsrComplexMatrix::finalize(&buf, self.n_cols, self.n_rows).expect("indices in range")
    }

    /// Largest entrywise deviation from (non-conjugate) symmetry, |A - A^T|.
    pub fn symmetry_defect(&self) -> f64 {
        let t = self.transpose();
        let mut defect: f64 = 0.0;
        for r in 0..self.n_rows {
            for k in self.row_offsets[r]..self.row_offsets[r + 1] {
                let c = self.col_indices[k];
                defect = defect.max((self.values[k] - t.get(r, c)).norm());
            }
        }
        for r in 0..t.n_rows {
            for k in t.row_offsets[r]..t.row_offsets[r + 1] {
                let c = t.col_indices[k];
                defect = defect.max((t.values[k] - self.get(r, c)).norm());
            }
        }
        defect
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Borders the matrix with a weight row/column and a zero corner:
    /// `[[A, w^T], [w, 0]]`.
    ///
    /// Solving the bordered system with right-hand side `(b, 0)` picks the
    /// unique solution of the (singular) Neumann-type system whose weighted
    /// mean `w . x` vanishes. Weights are the per-DOF integrals of the basis
    /// functions.
    pub fn augment_with_mean_constraint(&self, weights: &[f64]) -> Result<CsrComplexMatrix> {
        if weights.len() != self.n_rows || self.n_rows != self.n_cols {
            return Err(Error::DimensionMismatch { expected: self.n_rows, got: weights.len() });
        }
        let n = self.n_rows;
        let mut buf = TripletBuffer::with_capacity(self.nnz() + 2 * n);
        for r in 0..n {
            for k in self.row_offsets[r]..self.row_offsets[r + 1] {
                buf.push(r, self.col_indices[k], self.values[k]);
            }
        }
        for (i, &w) in weights.iter().enumerate() {
            buf.push(i, n, Complex64::new(w, 0.0));
            buf.push(n, i, Complex64::new(w, 0.0));
        }
        CsrComplexMatrix::finalize(&buf, n + 1, n + 1)
    }
}

fn ensure_sequential_backend() {
    static INIT: Once = Once::new();
    INIT.call_once(|| {
        // Deterministic factorizations; outer experiment loops parallelize instead.
        faer::set_global_parallelism(faer::Parallelism::None);
    });
}

/// Sparse LU factorization reusable for several right-hand sides.
pub struct Factorized {
    lu: faer::sparse::linalg::solvers::Lu<usize, c64>,
    matrix: CsrComplexMatrix,
}

impl Factorized {
    pub fn new(a: &CsrComplexMatrix) -> Result<Self> {
        if a.n_rows != a.n_cols {
            return Err(Error::DimensionMismatch { expected: a.n_rows, got: a.n_cols });
        }
        ensure_sequential_backend();
        let triplets: Vec<(usize, usize, c64)> = (0..a.n_rows)
            .flat_map(|r| {
                let a = &a;
                (a.row_offsets[r]..a.row_offsets[r + 1]).map(move |k| {
                    (r, a.col_indices[k], c64::new(a.values[k].re, a.values[k].im))
                })
            })
            .collect();
        let mat = SparseColMat::<usize, c64>::try_new_from_triplets(a.n_rows, a.n_cols, &triplets)
            .map_err(|_| Error::SingularMatrix)?;
        // faer panics on an exactly zero pivot instead of returning Err.
        let lu = panic::catch_unwind(AssertUnwindSafe(|| mat.sp_lu()))
            .map_err(|_| Error::SingularMatrix)?
            .map_err(|_| Error::SingularMatrix)?;
        Ok(Self { lu, matrix: a.clone() })
    }

    /// Solves to the residual contract, with one step of iterative refinement.
    pub fn solve(&self, b: &[Complex64]) -> Result<Vec<Complex64>> {
        let n = self.matrix.n_rows;
        if b.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: b.len() });
        }
        let rhs = faer::Mat::<c64>::from_fn(n, 1, |i, _| c64::new(b[i].re, b[i].im));
        let sol = self.lu.solve(&rhs);
        let mut x: Vec<Complex64> =
            (0..n).map(|i| Complex64::new(sol[(i, 0)].re, sol[(i, 0)].im)).collect();

        let norm_b = norm2(b).max(f64::MIN_POSITIVE);
        for _ in 0..2 {
            let r = self.residual(b, &x)?;
            if norm2(&r) / norm_b <= 1e-14 {
                break;
            }
            let rr = faer::Mat::<c64>::from_fn(n, 1, |i, _| c64::new(r[i].re, r[i].im));
            let dx = self.lu.solve(&rr);
            for i in 0..n {
                x[i] += Complex64::new(dx[(i, 0)].re, dx[(i, 0)].im);
            }
        }

        let rel = norm2(&self.residual(b, &x)?) / norm_b;
        if !rel.is_finite() || rel > SOLVE_RELATIVE_RESIDUAL {
            return Err(Error::SingularMatrix);
        }
        Ok(x)
    }

    fn residual(&self, b: &[Complex64], x: &[Complex64]) -> Result<Vec<Complex64>> {
        let ax = self.matrix.matvec(x)?;
        Ok(b.iter().zip(&ax).map(|(bi, axi)| bi - axi).collect())
    }
}

/// Direct sparse solve of `A x = b` with relative residual at most 1e-10.
pub fn solve_direct(a: &CsrComplexMatrix, b: &[Complex64]) -> Result<Vec<Complex64>> {
    Factorized::new(a)?.solve(b)
}

/// Relative 2-norm residual of a candidate solution (diagnostic).
pub fn relative_residual(a: &CsrComplexMatrix, x: &[Complex64], b: &[Complex64]) -> Result<f64> {
    let ax = a.matvec(x)?;
    let r: Vec<Complex64> = b.iter().zip(&ax).map(|(bi, axi)| bi - axi).collect();
    Ok(norm2(&r) / norm2(b).max(f64::MIN_POSITIVE))
}

fn norm2(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn finalize_sums_duplicates() {
        let mut buf = TripletBuffer::new();
        buf.push(0, 0, z(1.0, 0.0));
        buf.push(0, 0, z(2.0, 0.0));
        let a = CsrComplexMatrix::finalize(&buf, 1, 1).unwrap();
        assert_eq!(a.nnz(), 1);
        assert_eq!(a.get(0, 0), z(3.0, 0.0));
    }

    #[test]
    fn finalize_empty_and_out_of_range() {
        let a = CsrComplexMatrix::finalize(&TripletBuffer::new(), 2, 2).unwrap();
        assert_eq!(a.nnz(), 0);

        let mut buf = TripletBuffer::new();
        buf.push(5, 0, z(1.0, 0.0));
        let err = CsrComplexMatrix::finalize(&buf, 2, 2).unwrap_err();
        assert!(matches!(err, Error::IndexOutOfRange { row: 5, .. }));
    }

    #[test]
    fn csr_columns_strictly_increasing() {
        let mut buf = TripletBuffer::new();
        buf.push(0, 2, z(1.0, 0.0));
        buf.push(0, 0, z(1.0, 0.0));
        buf.push(0, 1, z(1.0, 0.0));
        buf.push(1, 1, z(1.0, 0.0));
        let a = CsrComplexMatrix::finalize(&buf, 2, 3).unwrap();
        for r in 0..2 {
            let cols = &a.col_indices()[a.row_offsets()[r]..a.row_offsets()[r + 1]];
            assert!(cols.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn solve_identity_and_permutation() {
        let mut buf = TripletBuffer::new();
        buf.push(0, 0, z(1.0, 0.0));
        buf.push(1, 1, z(1.0, 0.0));
        let a = CsrComplexMatrix::finalize(&buf, 2, 2).unwrap();
        let x = solve_direct(&a, &[z(1.0, 1.0), z(2.0, 0.0)]).unwrap();
        assert!((x[0] - z(1.0, 1.0)).norm() < 1e-14);
        assert!((x[1] - z(2.0, 0.0)).norm() < 1e-14);

        let mut buf = TripletBuffer::new();
        buf.push(0, 1, z(1.0, 0.0));
        buf.push(1, 0, z(1.0, 0.0));
        let a = CsrComplexMatrix::finalize(&buf, 2, 2).unwrap();
        let x = solve_direct(&a, &[z(3.0, -1.0), z(4.0, 2.0)]).unwrap();
        assert!((x[0] - z(4.0, 2.0)).norm() < 1e-14);
        assert!((x[1] - z(3.0, -1.0)).norm() < 1e-14);
    }

    #[test]
    fn singular_matrix_detected() {
        let mut buf = TripletBuffer::new();
        for (r, c) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            buf.push(r, c, z(1.0, 0.0));
        }
        let a = CsrComplexMatrix::finalize(&buf, 2, 2).unwrap();
        assert_eq!(solve_direct(&a, &[z(1.0, 0.0), z(2.0, 0.0)]).unwrap_err(), Error::SingularMatrix);
    }

    #[test]
    fn dimension_mismatch() {
        let mut buf = TripletBuffer::new();
        buf.push(0, 0, z(1.0, 0.0));
        let a = CsrComplexMatrix::finalize(&buf, 1, 1).unwrap();
        assert!(matches!(
            solve_direct(&a, &[z(1.0, 0.0), z(2.0, 0.0)]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            a.augment_with_mean_constraint(&[1.0, 2.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn mean_constraint_cures_null_space() {
        // 1x1 zero matrix with weight 1: bordered [[0,1],[1,0]] is regular.
        let a = CsrComplexMatrix::finalize(&TripletBuffer::new(), 1, 1).unwrap();
        let bordered = a.augment_with_mean_constraint(&[1.0]).unwrap();
        assert_eq!(bordered.n_rows(), 2);
        let x = solve_direct(&bordered, &[z(0.0, 0.0), z(0.0, 0.0)]).unwrap();
        assert!(x[0].norm() < 1e-14);

        // Graph Laplacian of a path (null space = constants), zero-mean RHS.
        let n = 5;
        let mut buf = TripletBuffer::new();
        for i in 0..n - 1 {
            buf.push(i, i, z(1.0, 0.0));
            buf.push(i + 1, i + 1, z(1.0, 0.0));
            buf.push(i, i + 1, z(-1.0, 0.0));
            buf.push(i + 1, i, z(-1.0, 0.0));
        }
        let a = CsrComplexMatrix::finalize(&buf, n, n).unwrap();
        let weights = vec![1.0; n];
        let bordered = a.augment_with_mean_constraint(&weights).unwrap();
        let mut rhs = vec![z(1.0, 0.0), z(-2.0, 0.0), z(0.5, 0.0), z(1.5, 0.0), z(-1.0, 0.0)];
        rhs.push(z(0.0, 0.0));
        let x = solve_direct(&bordered, &rhs).unwrap();
        let mean: Complex64 = (0..n).map(|i| x[i]).sum();
        assert!(mean.norm() < 1e-12);
    }

    #[test]
    fn residual_contract_on_random_systems() {
        // 100 random diagonally dominant complex systems, dimension <= 500.
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for trial in 0..100 {
            let n = 3 + (trial * 5) % 498;
            let mut buf = TripletBuffer::new();
            let mut diag = vec![0.0f64; n];
            for r in 0..n {
                for _ in 0..3 {
                    let c = (next() * n as f64) as usize % n;
                    if c != r {
                        let v = z(next() - 0.5, next() - 0.5);
                        buf.push(r, c, v);
                        diag[r] += v.norm();
                    }
                }
            }
            for r in 0..n {
                buf.push(r, r, z(diag[r] + 1.0, 0.5 * (next() - 0.5)));
            }
            let a = CsrComplexMatrix::finalize(&buf, n, n).unwrap();
            let b: Vec<Complex64> = (0..n).map(|_| z(next() - 0.5, next() - 0.5)).collect();
            let x = solve_direct(&a, &b).unwrap();
            let rel = relative_residual(&a, &x, &b).unwrap();
            assert!(rel <= SOLVE_RELATIVE_RESIDUAL, "trial {trial}: residual {rel}");
        }
    }
}
