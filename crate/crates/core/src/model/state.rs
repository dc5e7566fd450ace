use super::grid::{Field, Grid};
use crate::error::{KelsimError, Result};

/// Roundoff allowance below zero for the cell density.
pub const TOL_NEG: f64 = 1e-10;

/// Simulation state `(u, v)` at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub u: Field,
    pub v: Field,
    pub t: f64,
    pub step: u64,
    /// Size of the step that produced this state; 0 before the first step.
    pub last_dt: f64,
}

impl State {
    pub fn new(grid: &Grid, u: Field, v: Field) -> Result<Self> {
        let state = State {
            u,
            v,
            t: 0.0,
            step: 0,
            last_dt: 0.0,
        };
        state.check(grid)?;
        Ok(state)
    }

    pub fn check(&self, grid: &Grid) -> Result<()> {
        let n = grid.cell_count();
        if self.u.len() != n || self.v.len() != n {
            return Err(KelsimError::Config(format!(
                "state fields have {} / {} values for {n} cells",
                self.u.len(),
                self.v.len()
            )));
        }
        if !self.u.is_finite() || !self.v.is_finite() {
            return Err(KelsimError::Numeric(format!(
                "non-finite state at t = {}",
                self.t
            )));
        }
        let umin = self.u.min();
        if umin < -TOL_NEG {
            return Err(KelsimError::StateCorruption(format!(
                "u = {umin:e} below -{TOL_NEG:e} at t = {}",
                self.t
            )));
        }
        let vmin = self.v.min();
        if vmin < -TOL_NEG {
            return Err(KelsimError::StateCorruption(format!(
                "v = {vmin:e} below -{TOL_NEG:e} at t = {}",
                self.t
            )));
        }
        Ok(())
    }
}
