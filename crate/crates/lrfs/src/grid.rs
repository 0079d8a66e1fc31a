//! Finite state grids.
//!
//! Desk-scale filtering and density enumeration work over a finite grid of
//! cells. A [`Cell`] is an opaque index; a [`Grid`] gives the indices
//! geometry (dimension, spacing, origin) so cells can be mapped to kinematic
//! coordinates when distances or continuous reports are needed.

use std::fmt;

use thiserror::Error;

use crate::state_model::KinematicState;

/// Index of one grid cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cell(pub usize);

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Construction errors for [`Grid`].
#[derive(Debug, Error, PartialEq)]
pub enum GridError {
    #[error("grid shape must have at least one axis with at least one cell")]
    EmptyShape,
    #[error("grid spacing must be positive and finite, got {0}")]
    BadSpacing(f64),
    #[error("grid origin has {origin} coordinates but the shape has {axes} axes")]
    OriginDimensionMismatch { origin: usize, axes: usize },
    #[error("grid origin coordinate at axis {axis} is not finite")]
    NonFiniteOrigin { axis: usize },
}

/// Finite axis-aligned grid over a Euclidean state space.
///
/// Cells are indexed row-major (the last axis varies fastest) and each cell's
/// representative point is its midpoint. A 1-D `Grid::line(n)` has cells
/// centered at 0.5, 1.5, ..., n - 0.5.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    shape: Vec<usize>,
    origin: Vec<f64>,
    spacing: f64,
}

impl Grid {
    pub fn new(shape: Vec<usize>, origin: Vec<f64>, spacing: f64) -> Result<Self, GridError> {
        if shape.is_empty() || shape.iter().any(|&n| n == 0) {
            return Err(GridError::EmptyShape);
        }
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(GridError::BadSpacing(spacing));
        }
        if origin.len() != shape.len() {
            return Err(GridError::OriginDimensionMismatch {
                origin: origin.len(),
                axes: shape.len(),
            });
        }
        if let Some(axis) = origin.iter().position(|c| !c.is_finite()) {
            return Err(GridError::NonFiniteOrigin { axis });
        }
        Ok(Self { shape, origin, spacing })
    }

    /// 1-D grid of `n` unit cells starting at the coordinate origin.
    pub fn line(n: usize) -> Self {
        Self::new(vec![n], vec![0.0], 1.0).expect("line grid with n >= 1 is always valid")
    }

    /// Number of state-space axes.
    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    /// Cell count per axis.
    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    /// Grid spacing (side length of each cell, identical on every axis).
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Volume of one cell: spacing raised to the grid dimension.
    pub fn cell_volume(&self) -> f64 {
        self.spacing.powi(self.dim() as i32)
    }

    /// Total number of cells.
    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false // shape axes are validated nonzero
    }

    /// Iterates all cells in index order.
    pub fn cells(&self) -> impl Iterator<Item = Cell> {
        (0..self.len()).map(Cell)
    }

    /// True when `cell` indexes into this grid.
    pub fn contains(&self, cell: Cell) -> bool {
        cell.0 < self.len()
    }

    /// Midpoint coordinates of a cell.
    ///
    /// # Panics
    /// Panics if `cell` is out of range; callers validate membership first.
    pub fn center(&self, cell: Cell) -> KinematicState {
        assert!(self.contains(cell), "cell {cell} outside grid of {} cells", self.len());
        let mut rem = cell.0;
        let mut coords = vec![0.0; self.dim()];
        for axis in (0..self.dim()).rev() {
            let idx = rem % self.shape[axis];
            rem /= self.shape[axis];
            coords[axis] = self.origin[axis] + (idx as f64 + 0.5) * self.spacing;
        }
        KinematicState::new(coords).expect("grid centers are finite by construction")
    }
}
