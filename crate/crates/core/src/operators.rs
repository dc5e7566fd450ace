//! Finite-volume spatial discretization under no-flux boundaries.
//!
//! Face convention: a face separates a low cell `i` and a high cell `j`
//! along one axis. Its flux is
//!
//! ```text
//! F = D((u_i + u_j)/2) (u_j - u_i)/h - w u_up,   w = chi (v_j - v_i)/h
//! ```
//!
//! with `u_up = u_i` if `w > 0` and `u_j` otherwise. `F` is the amount
//! flowing into the low cell (and out of the high cell) per unit face area
//! and time, i.e. the component of `D(u)∇u - chi u ∇v` along the axis.
//! Cell `i` receives `+F/h` and cell `j` receives `-F/h`, so the flux part
//! of every right-hand side telescopes to zero total mass. Boundary faces
//! carry no flux.

use crate::error::{KelsimError, Result};
use crate::model::{Field, Grid, ModelParams, State, TOL_NEG};

/// `C_D (u + 1)^(m - 1)`, with `u` in `[-TOL_NEG, 0)` treated as 0.
pub fn diffusivity(u: f64, params: &ModelParams) -> Result<f64> {
    if u < -TOL_NEG || !u.is_finite() {
        return Err(KelsimError::StateCorruption(format!(
            "diffusivity evaluated at u = {u}"
        )));
    }
    Ok(diffusivity_unchecked(u.max(0.0), params.c_d, params.m_exp - 1.0))
}

#[inline]
fn diffusivity_unchecked(u: f64, c_d: f64, power: f64) -> f64 {
    if power == 0.0 {
        c_d
    } else if power == 1.0 {
        c_d * (u + 1.0)
    } else {
        c_d * (u + 1.0).powf(power)
    }
}

/// Interior face fluxes, one vector per axis.
///
/// Along axis 0 the face between `(i, j)` and `(i + 1, j)` sits at
/// `j * (nx - 1) + i`; along axis 1 the face between `(i, j)` and
/// `(i, j + 1)` sits at `j * nx + i`.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceFluxes {
    pub axes: Vec<Vec<f64>>,
    /// Largest face diffusivity encountered.
    pub max_diffusivity: f64,
    /// Largest `|chi (v_j - v_i)/h|` encountered.
    pub max_speed: f64,
}

pub fn assemble_fluxes(state: &State, params: &ModelParams, grid: &Grid) -> Result<FaceFluxes> {
    let u = state.u.values();
    let v = state.v.values();
    if !state.u.is_finite() || !state.v.is_finite() {
        return Err(KelsimError::Numeric(format!(
            "non-finite state entering flux assembly at t = {}",
            state.t
        )));
    }
    if let Some(k) = u.iter().position(|&x| x < -TOL_NEG) {
        return Err(KelsimError::StateCorruption(format!(
            "u = {} at cell {k} below tolerance",
            u[k]
        )));
    }
    let nx = grid.nx();
    let ny = grid.ny();
    let power = params.m_exp - 1.0;
    let c_d = params.c_d;
    let chi = params.chi;
    let mut max_d = 0.0f64;
    let mut max_w = 0.0f64;

    let mut face = |ui: f64, uj: f64, vi: f64, vj: f64, inv_h: f64| -> f64 {
        let d = diffusivity_unchecked((0.5 * (ui + uj)).max(0.0), c_d, power);
        let w = chi * (vj - vi) * inv_h;
        let up = if w > 0.0 { ui } else { uj };
        max_d = max_d.max(d);
        max_w = max_w.max(w.abs());
        d * (uj - ui) * inv_h - w * up
    };

    let inv_hx = 1.0 / grid.spacing()[0];
    let mut fx = Vec::with_capacity((nx - 1) * ny);
    for j in 0..ny {
        let row = j * nx;
        for i in 0..nx - 1 {
            let k = row + i;
            fx.push(face(u[k], u[k + 1], v[k], v[k + 1], inv_hx));
        }
    }
    let mut axes = vec![fx];
    if grid.dim() == 2 {
        let inv_hy = 1.0 / grid.spacing()[1];
        let mut fy = Vec::with_capacity(nx * (ny - 1));
        for j in 0..ny - 1 {
            let row = j * nx;
            for i in 0..nx {
                let k = row + i;
                fy.push(face(u[k], u[k + nx], v[k], v[k + nx], inv_hy));
            }
        }
        axes.push(fy);
    }
    Ok(FaceFluxes {
        axes,
        max_diffusivity: max_d,
        max_speed: max_w,
    })
}

/// Conservative divergence of the face fluxes, per cell.
pub fn divergence(fluxes: &FaceFluxes, grid: &Grid) -> Vec<f64> {
    let nx = grid.nx();
    let ny = grid.ny();
    let mut out = vec![0.0; grid.cell_count()];
    let inv_hx = 1.0 / grid.spacing()[0];
    let fx = &fluxes.axes[0];
    for j in 0..ny {
        let row = j * nx;
        let frow = j * (nx - 1);
        for i in 0..nx - 1 {
            let f = fx[frow + i] * inv_hx;
            out[row + i] += f;
            out[row + i + 1] -= f;
        }
    }
    if grid.dim() == 2 {
        let inv_hy = 1.0 / grid.spacing()[1];
        let fy = &fluxes.axes[1];
        for j in 0..ny - 1 {
            let row = j * nx;
            for i in 0..nx {
                let f = fy[row + i] * inv_hy;
                out[row + i] += f;
                out[row + i + nx] -= f;
            }
        }
    }
    out
}

/// Right-hand side of the density equation from precomputed fluxes.
pub fn rhs_u_from(fluxes: &FaceFluxes, u: &Field, params: &ModelParams, grid: &Grid) -> Vec<f64> {
    let mut out = divergence(fluxes, grid);
    if params.mu != 0.0 {
        for (r, &x) in out.iter_mut().zip(u.values()) {
            *r += params.mu * (x - x * x);
        }
    }
    out
}

pub fn rhs_u(state: &State, params: &ModelParams, grid: &Grid) -> Result<Field> {
    let fluxes = assemble_fluxes(state, params, grid)?;
    Field::from_values(grid, rhs_u_from(&fluxes, &state.u, params, grid))
}

/// Neumann Laplacian via reflected ghost cells (missing neighbours add nothing).
pub fn laplacian(field: &Field, grid: &Grid) -> Vec<f64> {
    let v = field.values();
    let nx = grid.nx();
    let ny = grid.ny();
    let mut out = vec![0.0; v.len()];
    let inv_hx2 = 1.0 / (grid.spacing()[0] * grid.spacing()[0]);
    for j in 0..ny {
        let row = j * nx;
        for i in 0..nx - 1 {
            let d = (v[row + i + 1] - v[row + i]) * inv_hx2;
            out[row + i] += d;
            out[row + i + 1] -= d;
        }
    }
    if grid.dim() == 2 {
        let inv_hy2 = 1.0 / (grid.spacing()[1] * grid.spacing()[1]);
        for j in 0..ny - 1 {
            let row = j * nx;
            for i in 0..nx {
                let d = (v[row + i + nx] - v[row + i]) * inv_hy2;
                out[row + i] += d;
                out[row + i + nx] -= d;
            }
        }
    }
    out
}

/// `Δv - v + u`, discretized.
pub fn rhs_v_from(u: &Field, v: &Field, grid: &Grid) -> Vec<f64> {
    let mut out = laplacian(v, grid);
    for ((r, &vv), &uu) in out.iter_mut().zip(v.values()).zip(u.values()) {
        *r += uu - vv;
    }
    out
}

pub fn rhs_v(state: &State, grid: &Grid) -> Result<Field> {
    Field::from_values(grid, rhs_v_from(&state.u, &state.v, grid))
}
