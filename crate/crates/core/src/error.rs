//! Error type shared by all modules of the crate.

use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A requested inner-box interface does not lie on grid lines of the subdivision.
    NonAlignedInterface { coordinate: f64 },
    /// Mesh subdivision count must be positive.
    InvalidSubdivision,
    /// A boundary vertex has no partner on the opposite side under the period translation.
    NonMatchingPeriodicBoundary { x: f64, y: f64 },
    /// A triplet index lies outside the declared matrix dimensions.
    IndexOutOfRange {
        row: usize,
        col: usize,
        n_rows: usize,
        n_cols: usize,
    },
    /// Vector or matrix dimensions do not agree.
    DimensionMismatch { expected: usize, got: usize },
    /// The factorization detected numerical singularity.
    SingularMatrix,
    /// The mesh carries a region tag with no coefficient assigned.
    MissingRegionCoefficient { tag: u8 },
    /// A point to evaluate lies outside the mesh.
    PointOutsideMesh { x: f64, y: f64 },
    /// Two fields or meshes do not cover the same domain.
    DomainMismatch,
    /// The eigen-series permeability formula requires an axis-aligned square inclusion.
    NotASquareInclusion,
    /// The fine mesh does not resolve the inclusion boundaries.
    UnresolvedInclusions,
    /// Convergence-order input contains a non-positive error value.
    NonPositiveError,
    /// Convergence-order input mesh sizes are not strictly decreasing.
    NonMonotoneMesh,
}

impl Error {
    /// Stable identifier for machine-readable error reporting.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NonAlignedInterface { .. } => "NonAlignedInterface",
            Error::InvalidSubdivision => "InvalidSubdivision",
            Error::NonMatchingPeriodicBoundary { .. } => "NonMatchingPeriodicBoundary",
            Error::IndexOutOfRange { .. } => "IndexOutOfRange",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::SingularMatrix => "SingularMatrix",
            Error::MissingRegionCoefficient { .. } => "MissingRegionCoefficient",
            Error::PointOutsideMesh { .. } => "PointOutsideMesh",
            Error::DomainMismatch => "DomainMismatch",
            Error::NotASquareInclusion => "NotASquareInclusion",
            Error::UnresolvedInclusions => "UnresolvedInclusions",
            Error::NonPositiveError => "NonPositiveError",
            Error::NonMonotoneMesh => "NonMonotoneMesh",
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NonAlignedInterface { coordinate } => {
                write!(f, "interface coordinate {coordinate} does not lie on a grid line")
            }
            Error::InvalidSubdivision => write!(f, "subdivision count must be positive"),
            Error::NonMatchingPeriodicBoundary { x, y } => {
                write!(f, "boundary vertex ({x}, {y}) has no periodic partner")
            }
            Error::IndexOutOfRange { row, col, n_rows, n_cols } => {
                write!(f, "entry ({row}, {col}) outside {n_rows}x{n_cols} matrix")
            }
            Error::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            Error::SingularMatrix => write!(f, "matrix is numerically singular"),
            Error::MissingRegionCoefficient { tag } => {
                write!(f, "no coefficient assigned to region tag {tag}")
            }
            Error::PointOutsideMesh { x, y } => {
                write!(f, "point ({x}, {y}) lies outside the mesh")
            }
            Error::DomainMismatch => write!(f, "meshes do not cover the same domain"),
            Error::NotASquareInclusion => {
                write!(f, "eigen-series permeability requires a square inclusion")
            }
            Error::UnresolvedInclusions => {
                write!(f, "fine mesh does not resolve the inclusion boundaries")
            }
            Error::NonPositiveError => write!(f, "error values must be positive"),
            Error::NonMonotoneMesh => write!(f, "mesh sizes must be strictly decreasing"),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
