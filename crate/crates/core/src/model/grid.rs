use crate::error::{KelsimError, Result};

/// Uniform cell-centered mesh on `[0, L_0] x [0, L_1]` (or `[0, L_0]` in 1D).
///
/// Cells are stored with axis 0 fastest: `idx = j * nx + i`. For a 1D grid
/// the second axis is a single dummy cell and does not enter any volume.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    dim: usize,
    n_cells: [usize; 2],
    lengths: [f64; 2],
    spacing: [f64; 2],
}

pub const MIN_CELLS_PER_AXIS: usize = 4;

impl Grid {
    pub fn new(dim: usize, n_cells: &[usize], lengths: &[f64]) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(KelsimError::Config(format!(
                "grid dimension must be 1 or 2, got {dim}"
            )));
        }
        if n_cells.len() != dim || lengths.len() != dim {
            return Err(KelsimError::Config(format!(
                "expected {dim} cell counts and lengths, got {} and {}",
                n_cells.len(),
                lengths.len()
            )));
        }
        let mut n = [1usize; 2];
        let mut l = [1.0f64; 2];
        let mut h = [1.0f64; 2];
        for axis in 0..dim {
            if n_cells[axis] < MIN_CELLS_PER_AXIS {
                return Err(KelsimError::Config(format!(
                    "axis {axis} needs at least {MIN_CELLS_PER_AXIS} cells, got {}",
                    n_cells[axis]
                )));
            }
            if !(lengths[axis] > 0.0 && lengths[axis].is_finite()) {
                return Err(KelsimError::Config(format!(
                    "axis {axis} length must be positive, got {}",
                    lengths[axis]
                )));
            }
            n[axis] = n_cells[axis];
            l[axis] = lengths[axis];
            h[axis] = lengths[axis] / n_cells[axis] as f64;
        }
        Ok(Grid {
            dim,
            n_cells: n,
            lengths: l,
            spacing: h,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_cells(&self) -> &[usize] {
        &self.n_cells[..self.dim]
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths[..self.dim]
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing[..self.dim]
    }

    pub fn nx(&self) -> usize {
        self.n_cells[0]
    }

    /// Cell count along axis 1; 1 for a 1D grid.
    pub fn ny(&self) -> usize {
        self.n_cells[1]
    }

    pub fn cell_count(&self) -> usize {
        self.n_cells[0] * self.n_cells[1]
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().iter().product()
    }

    /// `|Ω|`
    pub fn volume(&self) -> f64 {
        self.lengths().iter().product()
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.n_cells[0] + i
    }

    /// Cell-center coordinates; the second entry is 0 on a 1D grid.
    pub fn center(&self, idx: usize) -> [f64; 2] {
        let i = idx % self.n_cells[0];
        let j = idx / self.n_cells[0];
        let x = (i as f64 + 0.5) * self.spacing[0];
        let y = if self.dim == 2 {
            (j as f64 + 0.5) * self.spacing[1]
        } else {
            0.0
        };
        [x, y]
    }

    /// Smallest spacing over active axes.
    pub fn min_spacing(&self) -> f64 {
        self.spacing().iter().cloned().fold(f64::INFINITY, f64::min)
    }
}

/// Real-valued grid function, one value per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    values: Vec<f64>,
}

impl Field {
    pub fn from_values(grid: &Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.cell_count() {
            return Err(KelsimError::Config(format!(
                "field has {} values but grid has {} cells",
                values.len(),
                grid.cell_count()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(KelsimError::Numeric(format!(
                "non-finite value {} at cell {pos}",
                values[pos]
            )));
        }
        Ok(Field { values })
    }

    pub fn constant(grid: &Grid, c: f64) -> Self {
        Field {
            values: vec![c; grid.cell_count()],
        }
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn from_fn(grid: &Grid, f: impl Fn([f64; 2]) -> f64) -> Result<Self> {
        let values = (0..grid.cell_count()).map(|k| f(grid.center(k))).collect();
        Self::from_values(grid, values)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn scaled(&self, c: f64) -> Field {
        Field {
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_spacing() {
        let g = Grid::new(1, &[16], &[1.0]).unwrap();
        assert_eq!(g.spacing(), &[0.0625]);
        assert_eq!(g.volume(), 1.0);
        assert_eq!(g.cell_count(), 16);
        assert_eq!(g.cell_volume(), 0.0625);
    }

    #[test]
    fn two_dimensional_cells() {
        let g = Grid::new(2, &[32, 32], &[1.0, 1.0]).unwrap();
        assert_eq!(g.cell_count(), 1024);
        assert_eq!(g.cell_volume(), 1.0 / 1024.0);
        assert_eq!(g.center(g.index(1, 2)), [1.5 / 32.0, 2.5 / 32.0]);
    }

    #[test]
    fn rejects_small_or_bad_grids() {
        assert!(Grid::new(2, &[3, 8], &[1.0, 1.0]).is_err());
        assert!(Grid::new(3, &[8, 8, 8], &[1.0, 1.0, 1.0]).is_err());
        assert!(Grid::new(1, &[8], &[0.0]).is_err());
        assert!(Grid::new(2, &[8], &[1.0]).is_err());
    }

    #[test]
    fn field_rejects_nan_and_wrong_length() {
        let g = Grid::new(1, &[4], &[1.0]).unwrap();
        assert!(Field::from_values(&g, vec![0.0; 3]).is_err());
        assert!(Field::from_values(&g, vec![0.0, f64::NAN, 0.0, 0.0]).is_err());
        assert!(Field::from_values(&g, vec![0.0, 1.0, f64::INFINITY, 0.0]).is_err());
    }
}
