//! Adaptive explicit time stepping with blow-up detection.

use crate::diagnostics::{u2_window_integral, window_tau, DiagnosticsRecord};
use crate::error::{KelsimError, Result};
use crate::model::{Field, Grid, ModelParams, State, TOL_NEG};
use crate::operators::{assemble_fluxes, rhs_u_from, rhs_v_from, FaceFluxes};

#[derive(Debug, Clone, PartialEq)]
pub struct StepControl {
    pub safety: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    pub t_end: f64,
    /// Blow-up fires once `max u > blowup_factor * max(1, max u0)`.
    pub blowup_factor: f64,
    /// Exponents `p` whose `L^p` norms are recorded.
    pub lp_exponents: Vec<f64>,
}

impl Default for StepControl {
    fn default() -> Self {
        StepControl {
            safety: 0.25,
            dt_min: 1e-12,
            dt_max: 1e-2,
            t_end: 1.0,
            blowup_factor: 1e6,
            lp_exponents: vec![4.0],
        }
    }
}

impl StepControl {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(KelsimError::Config(msg));
        if !(self.safety > 0.0 && self.safety <= 1.0) {
            return bad(format!("safety must lie in (0, 1], got {}", self.safety));
        }
        if !(self.dt_min > 0.0 && self.dt_min < self.dt_max && self.dt_max.is_finite()) {
            return bad(format!(
                "need 0 < dt_min < dt_max, got {} and {}",
                self.dt_min, self.dt_max
            ));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return bad(format!("t_end must be positive, got {}", self.t_end));
        }
        if !(self.blowup_factor > 0.0) {
            return bad(format!("blowup_factor must be positive, got {}", self.blowup_factor));
        }
        if let Some(p) = self.lp_exponents.iter().find(|&&p| !(p >= 1.0)) {
            return bad(format!("recorded L^p exponents must be >= 1, got {p}"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    CompletedBounded,
    NumericalBlowup { t_detect: f64 },
    Aborted { reason: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub verdict: Verdict,
    pub final_state: State,
    pub records: Vec<DiagnosticsRecord>,
}

/// Unclamped stability limit from precomputed fluxes.
fn raw_dt(fluxes: &FaceFluxes, u_max: f64, params: &ModelParams, grid: &Grid, safety: f64) -> f64 {
    let d = grid.dim() as f64;
    let h = grid.min_spacing();
    let h2 = h * h;
    let mut limit = h2 / (2.0 * d);
    if fluxes.max_diffusivity > 0.0 {
        limit = limit.min(h2 / (2.0 * d * fluxes.max_diffusivity));
    }
    if fluxes.max_speed > 0.0 {
        limit = limit.min(h / (d * fluxes.max_speed));
    }
    if params.mu > 0.0 {
        limit = limit.min(1.0 / (params.mu * (2.0 * u_max.max(0.0) + 1.0)));
    }
    safety * limit
}

/// Explicit step size for `state`, clamped to `[dt_min, dt_max]` and to
/// `t_end - t`.
///
/// A stability limit below `dt_min` is reported as a numeric error; [`run`]
/// treats the same condition as blow-up.
pub fn stable_dt(state: &State, params: &ModelParams, grid: &Grid, control: &StepControl) -> Result<f64> {
    let fluxes = assemble_fluxes(state, params, grid)?;
    let raw = raw_dt(&fluxes, state.u.max(), params, grid, control.safety);
    if raw < control.dt_min {
        return Err(KelsimError::Numeric(format!(
            "stable step {raw:e} fell below dt_min {:e}",
            control.dt_min
        )));
    }
    Ok(raw.min(control.dt_max).min(control.t_end - state.t).max(0.0))
}

fn advance(state: &State, fluxes: &FaceFluxes, params: &ModelParams, grid: &Grid, dt: f64) -> Result<State> {
    let du = rhs_u_from(fluxes, &state.u, params, grid);
    let dv = rhs_v_from(&state.u, &state.v, grid);
    let u: Vec<f64> = state.u.values().iter().zip(&du).map(|(x, r)| x + dt * r).collect();
    let v: Vec<f64> = state.v.values().iter().zip(&dv).map(|(x, r)| x + dt * r).collect();
    let next = State {
        u: Field::from_values(grid, u)?,
        v: Field::from_values(grid, v)?,
        t: state.t + dt,
        step: state.step + 1,
        last_dt: dt,
    };
    let umin = next.u.min();
    if umin < -TOL_NEG {
        return Err(KelsimError::StateCorruption(format!(
            "u = {umin:e} after step {} at t = {}",
            next.step, next.t
        )));
    }
    Ok(next)
}

/// One forward-Euler step of size `dt`.
pub fn step(state: &State, params: &ModelParams, grid: &Grid, dt: f64) -> Result<State> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(KelsimError::Domain(format!("step size must be positive, got {dt}")));
    }
    let fluxes = assemble_fluxes(state, params, grid)?;
    advance(state, &fluxes, params, grid, dt)
}

/// Integrates from `initial` to `control.t_end`, recording diagnostics every
/// `record_every` units of simulated time (plus the first and last states).
pub fn run(
    initial: &State,
    params: &ModelParams,
    grid: &Grid,
    control: &StepControl,
    record_every: f64,
) -> Result<RunOutcome> {
    params.validate()?;
    control.validate()?;
    if !(record_every > 0.0) {
        return Err(KelsimError::Config(format!(
            "record_every must be positive, got {record_every}"
        )));
    }
    initial.check(grid)?;

    let threshold = control.blowup_factor * initial.u.max().max(1.0);
    let record = |s: &State| DiagnosticsRecord::from_state(s, grid, &control.lp_exponents);
    let mut records = vec![record(initial)?];
    let mut next_record = 1u64;
    let mut state = initial.clone();
    let mut recorded_last = true;

    let verdict = loop {
        if state.t >= control.t_end {
            break Verdict::CompletedBounded;
        }
        let fluxes = match assemble_fluxes(&state, params, grid) {
            Ok(f) => f,
            Err(e) => break Verdict::Aborted { reason: e.to_string() },
        };
        let raw = raw_dt(&fluxes, state.u.max(), params, grid, control.safety);
        if !(raw >= control.dt_min) {
            break Verdict::NumericalBlowup { t_detect: state.t };
        }
        let remaining = control.t_end - state.t;
        let dt = raw.min(control.dt_max);
        let finishing = dt >= remaining;
        let dt = if finishing { remaining } else { dt };
        let mut next = match advance(&state, &fluxes, params, grid, dt) {
            Ok(s) => s,
            Err(e) => break Verdict::Aborted { reason: e.to_string() },
        };
        if finishing {
            next.t = control.t_end;
        }
        state = next;
        recorded_last = false;

        if state.u.max() > threshold {
            records.push(record(&state)?);
            recorded_last = true;
            break Verdict::NumericalBlowup { t_detect: state.t };
        }
        if state.t >= next_record as f64 * record_every * (1.0 - 1e-12) {
            records.push(record(&state)?);
            recorded_last = true;
            while next_record as f64 * record_every <= state.t * (1.0 + 1e-12) {
                next_record += 1;
            }
        }
    };
    if !recorded_last {
        records.push(record(&state)?);
    }

    if params.mu > 0.0 {
        let t_max = match verdict {
            Verdict::NumericalBlowup { t_detect } => Some(t_detect),
            _ => None,
        };
        let windows = u2_window_integral(&records, window_tau(t_max))?;
        for (rec, w) in records.iter_mut().zip(windows) {
            rec.u2_window = (!w.truncated).then_some(w.value);
        }
    }

    Ok(RunOutcome {
        verdict,
        final_state: state,
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::mass;
    use crate::model::{make_initial, InitialData};

    fn flat(grid: &Grid, u: f64, v: f64) -> State {
        State::new(grid, Field::constant(grid, u), Field::constant(grid, v)).unwrap()
    }

    #[test]
    fn stable_dt_hand_value() {
        let g = Grid::new(1, &[10], &[1.0]).unwrap();
        let p = ModelParams { dim: 1, m_exp: 1.0, c_d: 1.0, mu: 0.0, ..ModelParams::default() };
        let c = StepControl { dt_max: 1.0, t_end: 10.0, ..StepControl::default() };
        let dt = stable_dt(&flat(&g, 0.0, 0.0), &p, &g, &c).unwrap();
        assert!((dt - 0.00125).abs() < 1e-16, "{dt}");
    }

    #[test]
    fn stable_dt_clamps_to_t_end() {
        let g = Grid::new(1, &[10], &[1.0]).unwrap();
        let p = ModelParams { dim: 1, ..ModelParams::default() };
        let c = StepControl { dt_max: 1.0, t_end: 1.0, ..StepControl::default() };
        let mut s = flat(&g, 0.0, 0.0);
        s.t = 1.0 - 1e-4;
        let dt = stable_dt(&s, &p, &g, &c).unwrap();
        assert!((dt - 1e-4).abs() < 1e-15);
    }

    #[test]
    fn stable_dt_logistic_constraint() {
        // Huge cells so only the logistic limit binds.
        let g = Grid::new(1, &[4], &[400.0]).unwrap();
        let p = ModelParams { dim: 1, mu: 2.0, ..ModelParams::default() };
        let c = StepControl { dt_max: 10.0, t_end: 100.0, ..StepControl::default() };
        let dt = stable_dt(&flat(&g, 1.5, 1.5), &p, &g, &c).unwrap();
        assert!((dt - 0.25 / (2.0 * 4.0)).abs() < 1e-15);
    }

    #[test]
    fn stable_dt_collapse_is_an_error() {
        let g = Grid::new(1, &[10], &[1.0]).unwrap();
        let p = ModelParams { dim: 1, ..ModelParams::default() };
        let c = StepControl { dt_min: 0.01, dt_max: 1.0, t_end: 1.0, ..StepControl::default() };
        assert!(matches!(stable_dt(&flat(&g, 0.0, 0.0), &p, &g, &c), Err(KelsimError::Numeric(_))));
    }

    #[test]
    fn equilibrium_is_fixed() {
        let g = Grid::new(2, &[8, 8], &[1.0, 1.0]).unwrap();
        let p = ModelParams { mu: 1.0, m_exp: 1.5, ..ModelParams::default() };
        let mut s = flat(&g, 1.0, 1.0);
        for _ in 0..50 {
            s = step(&s, &p, &g, 1e-3).unwrap();
        }
        assert!(s.u.values().iter().chain(s.v.values()).all(|&x| (x - 1.0).abs() < 1e-14));
        assert_eq!(s.step, 50);
    }

    #[test]
    fn step_conserves_mass_without_logistic_term() {
        let g = Grid::new(2, &[16, 16], &[1.0, 1.0]).unwrap();
        let u = make_initial(&g, &InitialData::FilteredNoise { seed: 5, amplitude: 3.0, cutoff: 3 }).unwrap();
        let v = make_initial(&g, &InitialData::FilteredNoise { seed: 6, amplitude: 2.0, cutoff: 3 }).unwrap();
        let s = State::new(&g, u, v).unwrap();
        let p = ModelParams { m_exp: 2.0, ..ModelParams::default() };
        let c = StepControl { t_end: 1.0, ..StepControl::default() };
        let dt = stable_dt(&s, &p, &g, &c).unwrap();
        let next = step(&s, &p, &g, dt).unwrap();
        let (m0, m1) = (mass(&s.u, &g), mass(&next.u, &g));
        assert!((m1 - m0).abs() <= 1e-13 * m0);
    }

    #[test]
    fn run_records_first_and_last() {
        let g = Grid::new(1, &[8], &[1.0]).unwrap();
        let p = ModelParams { dim: 1, mu: 1.0, ..ModelParams::default() };
        let c = StepControl { t_end: 0.5, ..StepControl::default() };
        let out = run(&flat(&g, 1.0, 1.0), &p, &g, &c, 0.1).unwrap();
        assert_eq!(out.verdict, Verdict::CompletedBounded);
        assert_eq!(out.records.first().unwrap().t, 0.0);
        assert_eq!(out.records.last().unwrap().t, 0.5);
        assert_eq!(out.final_state.t, 0.5);
        assert!(out.records.len() >= 6);
    }

    #[test]
    fn negative_state_aborts() {
        let g = Grid::new(1, &[8], &[1.0]).unwrap();
        let p = ModelParams { dim: 1, ..ModelParams::default() };
        let mut s = flat(&g, 1.0, 1.0);
        s.u.values_mut()[3] = -1e-3;
        assert!(step(&s, &p, &g, 1e-4).is_err());
    }

    #[test]
    fn oversized_step_aborts_run() {
        // A step far beyond the diffusive limit overshoots below zero.
        let g = Grid::new(1, &[16], &[1.0]).unwrap();
        let p = ModelParams { dim: 1, ..ModelParams::default() };
        let u = make_initial(&g, &InitialData::Gaussian { amplitude: 1.0, center: [0.5, 0.0], width: 0.05 }).unwrap();
        let s = State::new(&g, u, Field::zeros(&g)).unwrap();
        assert!(matches!(step(&s, &p, &g, 0.5), Err(KelsimError::StateCorruption(_))));
    }
}
