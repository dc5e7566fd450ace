//! Norms and functionals tracked along trajectories, and empirical
//! lower-bound estimators for the Gagliardo-Nirenberg constant and the
//! maximal-regularity constant.

use rand::Rng;

use crate::error::{KelsimError, Result};
use crate::model::{make_initial, seeded_rng, Field, Grid, InitialData, State};
use crate::operators::laplacian;

/// One time sample of a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub dt: f64,
    pub mass: f64,
    /// `(p, ‖u‖_p)` for each requested exponent.
    pub lp_norms: Vec<(f64, f64)>,
    pub linf_u: f64,
    pub min_u: f64,
    pub l2_u: f64,
    pub l2_v: f64,
    /// Forward window integral `∫_t^{t+τ} ∫ u²`, filled after a run with
    /// `mu > 0` where the window fits inside the trajectory.
    pub u2_window: Option<f64>,
}

impl DiagnosticsRecord {
    pub fn from_state(state: &State, grid: &Grid, lp_exponents: &[f64]) -> Result<Self> {
        let lp_norms = lp_exponents
            .iter()
            .map(|&p| lp_norm(&state.u, p, grid).map(|n| (p, n)))
            .collect::<Result<Vec<_>>>()?;
        Ok(DiagnosticsRecord {
            t: state.t,
            dt: state.last_dt,
            mass: mass(&state.u, grid),
            lp_norms,
            linf_u: state.u.max(),
            min_u: state.u.min(),
            l2_u: lp_norm(&state.u, 2.0, grid)?,
            l2_v: lp_norm(&state.v, 2.0, grid)?,
            u2_window: None,
        })
    }
}

/// `(Σ |u|^p vol)^(1/p)`, or `max |u|` for `p = ∞`.
pub fn lp_norm(field: &Field, p: f64, grid: &Grid) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(KelsimError::Domain(format!("L^p norm needs p >= 1, got {p}")));
    }
    Ok(lp_quasi(field.values(), p, grid.cell_volume()))
}

/// `L^p` functional for any `p > 0` (a quasi-norm below 1).
fn lp_quasi(values: &[f64], p: f64, vol: f64) -> f64 {
    if p.is_infinite() {
        return values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    }
    let s: f64 = if p == 1.0 {
        values.iter().map(|v| v.abs()).sum()
    } else if p == 2.0 {
        values.iter().map(|v| v * v).sum()
    } else {
        values.iter().map(|v| v.abs().powf(p)).sum()
    };
    (s * vol).powf(1.0 / p)
}

/// `Σ u vol`, summed in cell order.
pub fn mass(field: &Field, grid: &Grid) -> f64 {
    field.values().iter().sum::<f64>() * grid.cell_volume()
}

/// `τ = min{1, T_max / 6}`; `None` means no finite existence time.
pub fn window_tau(t_max: Option<f64>) -> f64 {
    match t_max {
        Some(t) => (t / 6.0).min(1.0),
        None => 1.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowSample {
    pub t: f64,
    pub value: f64,
    /// The window ran past the last record and was cut short.
    pub truncated: bool,
}

/// Trapezoid-in-time integral of `‖u‖²_2` over `[t_k, t_k + τ]` for every
/// record start `t_k`, interpolating linearly between records.
pub fn u2_window_integral(records: &[DiagnosticsRecord], tau: f64) -> Result<Vec<WindowSample>> {
    if !(tau > 0.0) {
        return Err(KelsimError::Domain(format!("window width must be positive, got {tau}")));
    }
    if records.windows(2).any(|w| !(w[1].t >= w[0].t)) {
        return Err(KelsimError::Evaluation("records are not time-sorted".into()));
    }
    let q: Vec<f64> = records.iter().map(|r| r.l2_u * r.l2_u).collect();
    let t_last = match records.last() {
        Some(r) => r.t,
        None => return Ok(Vec::new()),
    };
    let mut out = Vec::with_capacity(records.len());
    for (k, rec) in records.iter().enumerate() {
        let end = rec.t + tau;
        let truncated = end > t_last;
        let end = end.min(t_last);
        let mut acc = 0.0;
        for i in k..records.len() - 1 {
            let (a, b) = (records[i].t, records[i + 1].t);
            if a >= end {
                break;
            }
            if b <= a {
                continue;
            }
            if b <= end {
                acc += 0.5 * (b - a) * (q[i] + q[i + 1]);
            } else {
                let s = (end - a) / (b - a);
                let q_end = q[i] + s * (q[i + 1] - q[i]);
                acc += 0.5 * (end - a) * (q[i] + q_end);
            }
        }
        out.push(WindowSample {
            t: rec.t,
            value: acc,
            truncated,
        });
    }
    Ok(out)
}

/// Interpolation exponent `a = (N/θ - N/p) / (1 - N/2 + N/θ)`.
pub fn gn_exponent(dim: usize, p: f64, theta: f64) -> Result<f64> {
    if !(theta > 0.0 && theta < p && p.is_finite()) {
        return Err(KelsimError::Domain(format!(
            "need 0 < theta < p, got theta = {theta}, p = {p}"
        )));
    }
    let n = dim as f64;
    let a = (n / theta - n / p) / (1.0 - n / 2.0 + n / theta);
    if !(a > 0.0 && a < 1.0) {
        return Err(KelsimError::Domain(format!(
            "interpolation exponent a = {a} outside (0, 1) for N = {dim}, p = {p}, theta = {theta}"
        )));
    }
    Ok(a)
}

/// `‖∇u‖_{L^q}` from face differences, each face weighted by one cell volume.
fn gradient_norm(values: &[f64], grid: &Grid, q: f64) -> f64 {
    let nx = grid.nx();
    let ny = grid.ny();
    let mut s = 0.0;
    let hx = grid.spacing()[0];
    for j in 0..ny {
        for i in 0..nx - 1 {
            let k = grid.index(i, j);
            s += ((values[k + 1] - values[k]) / hx).abs().powf(q);
        }
    }
    if grid.dim() == 2 {
        let hy = grid.spacing()[1];
        for j in 0..ny - 1 {
            for i in 0..nx {
                let k = grid.index(i, j);
                s += ((values[k + nx] - values[k]) / hy).abs().powf(q);
            }
        }
    }
    (s * grid.cell_volume()).powf(1.0 / q)
}

/// `‖u‖_p / (‖∇u‖_2^a ‖u‖_θ^(1-a) + ‖u‖_θ)`, a lower witness for `C_GN`.
pub fn gn_ratio(field: &Field, p: f64, theta: f64, grid: &Grid) -> Result<f64> {
    let a = gn_exponent(grid.dim(), p, theta)?;
    let vol = grid.cell_volume();
    let num = lp_quasi(field.values(), p, vol);
    let low = lp_quasi(field.values(), theta, vol);
    let grad = gradient_norm(field.values(), grid, 2.0);
    let den = grad.powf(a) * low.powf(1.0 - a) + low;
    if !(den > 0.0) || !den.is_finite() {
        return Err(KelsimError::Degenerate(format!(
            "Gagliardo-Nirenberg denominator is {den}"
        )));
    }
    Ok(num / den)
}

/// Seeded family of test fields for [`estimate_cgn`].
///
/// Members are generated by index, so growing any count only appends fields.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusSpec {
    pub constants: Vec<f64>,
    pub bumps: usize,
    pub noise: usize,
    /// Gaussians with width on the order of the mesh spacing.
    pub spikes: usize,
    pub seed: u64,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        CorpusSpec {
            constants: vec![1.0],
            bumps: 16,
            noise: 16,
            spikes: 8,
            seed: 1,
        }
    }
}

const STREAM_BUMP: u64 = 1 << 32;
const STREAM_SPIKE: u64 = 2 << 32;
const STREAM_NOISE: u64 = 3 << 32;
const STREAM_FORCING: u64 = 4 << 32;

impl CorpusSpec {
    pub fn members(&self, grid: &Grid) -> Result<Vec<Field>> {
        let mut out = Vec::new();
        for &c in &self.constants {
            out.push(make_initial(grid, &InitialData::Constant(c))?);
        }
        let lmin = grid.lengths().iter().cloned().fold(f64::INFINITY, f64::min);
        for k in 0..self.bumps {
            let mut rng = seeded_rng(self.seed, STREAM_BUMP + k as u64);
            let width = lmin * rng_width(&mut rng, 0.05, 0.3);
            let spec = random_gaussian(&mut rng, grid, width);
            out.push(make_initial(grid, &spec)?);
        }
        for k in 0..self.noise {
            let mut rng = seeded_rng(self.seed, STREAM_NOISE + k as u64);
            let spec = InitialData::FilteredNoise {
                seed: rng.gen(),
                amplitude: 1.0,
                cutoff: 1 + (k % 8) as u32,
            };
            out.push(make_initial(grid, &spec)?);
        }
        for k in 0..self.spikes {
            let mut rng = seeded_rng(self.seed, STREAM_SPIKE + k as u64);
            let h = grid.min_spacing();
            let width = h * rng_width(&mut rng, 0.5, 2.0);
            let spec = random_gaussian(&mut rng, grid, width);
            out.push(make_initial(grid, &spec)?);
        }
        Ok(out)
    }
}

fn rng_width(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.gen::<f64>()
}

fn random_gaussian(rng: &mut impl Rng, grid: &Grid, width: f64) -> InitialData {
    let mut center = [0.0; 2];
    for (axis, &l) in grid.lengths().iter().enumerate() {
        center[axis] = l * rng.gen::<f64>();
    }
    InitialData::Gaussian {
        amplitude: 0.5 + 1.5 * rng.gen::<f64>(),
        center,
        width,
    }
}

/// Largest [`gn_ratio`] over the corpus: a lower-bound estimate of `C_GN`.
pub fn estimate_cgn(corpus: &CorpusSpec, p: f64, theta: f64, grid: &Grid) -> Result<f64> {
    let mut best: Option<f64> = None;
    for field in corpus.members(grid)? {
        let r = gn_ratio(&field, p, theta, grid)?;
        best = Some(best.map_or(r, |b: f64| b.max(r)));
    }
    best.ok_or_else(|| KelsimError::Degenerate("empty corpus".into()))
}

/// Discrete `W^{2,γ}` norm: `‖v‖_γ + ‖∇v‖_γ + ‖Δ_h v‖_γ`.
pub fn w2_norm(field: &Field, gamma: f64, grid: &Grid) -> f64 {
    let vol = grid.cell_volume();
    let lap = laplacian(field, grid);
    lp_quasi(field.values(), gamma, vol) + gradient_norm(field.values(), grid, gamma) + lp_quasi(&lap, gamma, vol)
}

/// Ratio of the two sides of the maximal-regularity estimate for
/// `v_t - Δv + v = g`, `v(0) = 0`, with `g` piecewise constant in time:
/// `segments[k]` acts on `[k T/K, (k+1) T/K)`.
///
/// Both sides use the weight `e^{γ(s - T)}` in place of `e^{γ s}`; the
/// common factor cancels. Returns `None` when the forcing side vanishes.
pub fn maximal_regularity_ratio(
    grid: &Grid,
    gamma: f64,
    horizon: f64,
    segments: &[Field],
) -> Result<Option<f64>> {
    if !(gamma > 1.0) {
        return Err(KelsimError::Domain(format!("gamma must exceed 1, got {gamma}")));
    }
    if !(horizon > 0.0 && horizon.is_finite()) || segments.is_empty() {
        return Err(KelsimError::Domain("need a positive horizon and at least one forcing segment".into()));
    }
    let seg_len = horizon / segments.len() as f64;
    let d = grid.dim() as f64;
    let h2 = grid.min_spacing().powi(2);
    let dt_cap = (0.25 * h2 / (2.0 * d)).min(1e-3);
    let substeps = (seg_len / dt_cap).ceil().max(1.0) as usize;
    let dt = seg_len / substeps as f64;

    let vol = grid.cell_volume();
    let weight = |s: f64| (gamma * (s - horizon)).exp();

    let mut rhs_side = 0.0;
    for (k, g) in segments.iter().enumerate() {
        let a = k as f64 * seg_len;
        let b = a + seg_len;
        let gnorm = lp_quasi(g.values(), gamma, vol).powf(gamma);
        rhs_side += gnorm * (weight(b) - weight(a)) / gamma;
    }
    if !(rhs_side > 0.0) {
        return Ok(None);
    }

    let mut v = Field::zeros(grid);
    let mut lhs_side = 0.0;
    let mut prev = 0.0; // weight(0) * ‖0‖ = 0
    for (k, g) in segments.iter().enumerate() {
        for n in 0..substeps {
            let lap = laplacian(&v, grid);
            for ((x, l), &gg) in v.values_mut().iter_mut().zip(&lap).zip(g.values()) {
                *x += dt * (l - *x + gg);
            }
            if !v.is_finite() {
                return Err(KelsimError::Numeric("forced heat solve produced non-finite values".into()));
            }
            let s = (k * substeps + n + 1) as f64 * dt;
            let cur = weight(s) * w2_norm(&v, gamma, grid).powf(gamma);
            lhs_side += 0.5 * dt * (prev + cur);
            prev = cur;
        }
    }
    let ratio = lhs_side / rhs_side;
    if !ratio.is_finite() {
        return Err(KelsimError::Numeric(format!("maximal-regularity ratio is {ratio}")));
    }
    Ok(Some(ratio))
}

/// Number of piecewise-constant forcing segments per trial.
pub const FORCING_SEGMENTS: usize = 4;

/// Forcing segments of trial `trial`: smooth random fields with random sign
/// and magnitude, depending only on `(seed, trial)`.
pub fn trial_forcing(grid: &Grid, seed: u64, trial: usize) -> Result<Vec<Field>> {
    let mut rng = seeded_rng(seed, STREAM_FORCING + trial as u64);
    (0..FORCING_SEGMENTS)
        .map(|_| {
            let spec = InitialData::FilteredNoise {
                seed: rng.gen(),
                amplitude: 1.0,
                cutoff: rng.gen_range(1..=6),
            };
            let scale = (0.1 + 1.9 * rng.gen::<f64>()) * if rng.gen::<bool>() { 1.0 } else { -1.0 };
            let base = make_initial(grid, &spec)?;
            // Center so that the forcing has both signs.
            let mean = base.values().iter().sum::<f64>() / base.len() as f64;
            let vals = base.values().iter().map(|x| scale * (x - mean + 0.25)).collect();
            Field::from_values(grid, vals)
        })
        .collect()
}

/// Largest [`maximal_regularity_ratio`] over `trial_count` seeded forcings:
/// a lower-bound estimate of `lambda0`.
pub fn estimate_lambda0(gamma: f64, grid: &Grid, trial_count: usize, seed: u64, horizon: f64) -> Result<f64> {
    let mut best: Option<f64> = None;
    for trial in 0..trial_count {
        let forcing = trial_forcing(grid, seed, trial)?;
        if let Some(r) = maximal_regularity_ratio(grid, gamma, horizon, &forcing)? {
            best = Some(best.map_or(r, |b: f64| b.max(r)));
        }
    }
    best.ok_or_else(|| KelsimError::Degenerate("no trial produced a finite ratio".into()))
}
