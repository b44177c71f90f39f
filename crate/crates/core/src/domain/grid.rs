use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::AgentId;

/// A cell index on the grid. `row` grows downwards, `col` to the right.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    pub row: usize,
    pub col: usize,
}

impl Cell {
    pub const fn new(row: usize, col: usize) -> Self {
        Cell { row, col }
    }

    /// Squared Euclidean distance between cell centers.
    pub fn dist2(self, other: Cell) -> usize {
        let dr = self.row.abs_diff(other.row);
        let dc = self.col.abs_diff(other.col);
        dr * dr + dc * dc
    }

    pub fn distance(self, other: Cell) -> f64 {
        (self.dist2(other) as f64).sqrt()
    }

    /// Within a circular range of the given radius (inclusive).
    pub fn within(self, other: Cell, radius: f64) -> bool {
        (self.dist2(other) as f64) <= radius * radius
    }

    /// Chebyshev distance at most one, excluding the cell itself.
    pub fn is_moore_neighbor(self, other: Cell) -> bool {
        self != other && self.row.abs_diff(other.row) <= 1 && self.col.abs_diff(other.col) <= 1
    }

    /// The up to eight in-bounds Moore neighbours, in row-major order.
    pub fn moore_neighbors(self, rows: usize, cols: usize) -> impl Iterator<Item = Cell> {
        let r0 = self.row.saturating_sub(1);
        let c0 = self.col.saturating_sub(1);
        let r1 = (self.row + 1).min(rows.saturating_sub(1));
        let c1 = (self.col + 1).min(cols.saturating_sub(1));
        (r0..=r1)
            .flat_map(move |r| (c0..=c1).map(move |c| Cell::new(r, c)))
            .filter(move |&c| c != self)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GridError {
    #[error("cell ({row}, {col}) is outside the {rows}x{cols} grid")]
    OutOfBounds {
        row: usize,
        col: usize,
        rows: usize,
        cols: usize,
    },
    #[error("cell ({row}, {col}) is already occupied by agent {by}")]
    Occupied { row: usize, col: usize, by: AgentId },
}

/// Bounded M x N cellular space with exclusive occupancy. Boundaries are walls.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Grid {
    rows: usize,
    cols: usize,
    cells: Vec<Option<AgentId>>,
}

impl Grid {
    pub fn new(rows: usize, cols: usize) -> Self {
        Grid {
            rows,
            cols,
            cells: vec![None; rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn capacity(&self) -> usize {
        self.cells.len()
    }

    pub fn contains(&self, cell: Cell) -> bool {
        cell.row < self.rows && cell.col < self.cols
    }

    fn index(&self, cell: Cell) -> Result<usize, GridError> {
        if self.contains(cell) {
            Ok(cell.row * self.cols + cell.col)
        } else {
            Err(GridError::OutOfBounds {
                row: cell.row,
                col: cell.col,
                rows: self.rows,
                cols: self.cols,
            })
        }
    }

    pub fn get(&self, cell: Cell) -> Option<AgentId> {
        self.index(cell).ok().and_then(|i| self.cells[i])
    }

    pub fn is_empty(&self, cell: Cell) -> bool {
        self.contains(cell) && self.get(cell).is_none()
    }

    pub fn place(&mut self, id: AgentId, cell: Cell) -> Result<(), GridError> {
        let i = self.index(cell)?;
        match self.cells[i] {
            Some(by) => Err(GridError::Occupied {
                row: cell.row,
                col: cell.col,
                by,
            }),
            None => {
                self.cells[i] = Some(id);
                Ok(())
            }
        }
    }

    /// Clears a cell, returning its previous occupant.
    pub fn vacate(&mut self, cell: Cell) -> Option<AgentId> {
        let i = self.index(cell).ok()?;
        self.cells[i].take()
    }

    /// Moves whatever occupies `from` into the empty cell `to`.
    pub fn relocate(&mut self, from: Cell, to: Cell) -> Result<(), GridError> {
        let fi = self.index(from)?;
        let ti = self.index(to)?;
        if let Some(by) = self.cells[ti] {
            return Err(GridError::Occupied {
                row: to.row,
                col: to.col,
                by,
            });
        }
        self.cells[ti] = self.cells[fi].take();
        Ok(())
    }

    /// All empty cells in row-major order.
    pub fn empty_cells(&self) -> Vec<Cell> {
        (0..self.rows)
            .flat_map(|r| (0..self.cols).map(move |c| Cell::new(r, c)))
            .filter(|&c| self.get(c).is_none())
            .collect()
    }

    pub fn occupied(&self) -> impl Iterator<Item = (Cell, AgentId)> + '_ {
        self.cells.iter().enumerate().filter_map(|(i, slot)| {
            slot.map(|id| (Cell::new(i / self.cols, i % self.cols), id))
        })
    }
}
