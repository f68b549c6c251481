//! Uniform cell grids on the arcs.

use crate::flux::FluxParams;
use crate::network::{ArcId, BeltArc};

/// Cell layout of one arc: `n_cells` cells of width `dx` starting at `lo`.
#[derive(Debug, Clone, PartialEq)]
pub struct ArcGrid {
    pub arc_id: ArcId,
    pub lo: f64,
    pub n_cells: usize,
    pub dx: f64,
}

impl ArcGrid {
    /// Fits the closest whole number of cells to the requested width, so
    /// that `n_cells·dx` equals the arc length.
    pub fn new(arc: &BeltArc, target_dx: f64) -> Self {
        let length = arc.domain.length();
        let n_cells = ((length / target_dx).round() as usize).max(1);
        Self {
            arc_id: arc.id.clone(),
            lo: arc.domain.lo,
            n_cells,
            dx: length / n_cells as f64,
        }
    }

    pub fn center(&self, j: usize) -> f64 {
        self.lo + (j as f64 + 0.5) * self.dx
    }

    pub fn cell_centers(&self) -> Vec<f64> {
        (0..self.n_cells).map(|j| self.center(j)).collect()
    }
}

/// Grid plus the per-arc data needed during time stepping.
#[derive(Debug, Clone)]
pub(crate) struct ArcCells {
    pub grid: ArcGrid,
    pub flux: FluxParams,
    pub rho: Vec<f64>,
}

impl ArcCells {
    pub fn first(&self) -> f64 {
        self.rho[0]
    }

    pub fn last(&self) -> f64 {
        self.rho[self.rho.len() - 1]
    }

    pub fn mass(&self) -> f64 {
        self.rho.iter().sum::<f64>() * self.grid.dx
    }
}
