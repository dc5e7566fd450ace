//! Shared domain types: parameters, mesh, grid functions, state, and initial data.

mod grid;
mod initial;
mod params;
mod state;

pub use grid::{Field, Grid};
pub use initial::{make_initial, seeded_rng, InitialData};
pub use params::ModelParams;
pub use state::{State, TOL_NEG};

/// Uniform mesh constructor; see [`Grid::new`].
pub fn make_grid(dim: usize, n_cells: &[usize], lengths: &[f64]) -> crate::Result<Grid> {
    Grid::new(dim, n_cells, lengths)
}
