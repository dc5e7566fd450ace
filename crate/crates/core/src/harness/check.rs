//! Invariant self-tests run by the `check` subcommand against a config.

use crate::diagnostics::mass;
use crate::integrator::{run, step, stable_dt, StepControl, Verdict};
use crate::model::{make_initial, InitialData, ModelParams, State};
use crate::operators::rhs_u;
use crate::theory::{find_p0, lemma_min};

use super::config::SimConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn outcome(name: &'static str, r: crate::Result<(bool, String)>) -> CheckResult {
    match r {
        Ok((passed, detail)) => CheckResult { name, passed, detail },
        Err(e) => CheckResult { name, passed: false, detail: e.to_string() },
    }
}

/// Runs every self-test; the config supplies grid and parameters.
pub fn run_checks(config: &SimConfig) -> Vec<CheckResult> {
    let grid = &config.grid;
    let conservative = ModelParams { mu: 0.0, ..config.params };
    let random_state = |seed: u64| -> crate::Result<State> {
        let u = make_initial(grid, &InitialData::FilteredNoise { seed, amplitude: 2.0, cutoff: 2 })?;
        let v = make_initial(grid, &InitialData::FilteredNoise { seed: seed + 1, amplitude: 3.0, cutoff: 2 })?;
        State::new(grid, u, v)
    };

    let mut out = Vec::new();

    out.push(outcome(
        "discrete conservation of rhs_u (mu = 0)",
        (|| {
            let mut worst = 0.0f64;
            for seed in 0..8 {
                let s = random_state(100 + 2 * seed)?;
                let r = rhs_u(&s, &conservative, grid)?;
                let total = mass(&r, grid);
                let scale = r.values().iter().map(|x| x.abs()).sum::<f64>() * grid.cell_volume();
                worst = worst.max(total.abs() / scale.max(f64::MIN_POSITIVE));
            }
            Ok((worst <= 1e-13, format!("max |Σ rhs vol| / Σ |rhs| vol = {worst:e}")))
        })(),
    ));

    out.push(outcome(
        "empty cells never lose mass",
        (|| {
            let mut s = random_state(200)?;
            let zeroed: Vec<usize> = (0..grid.cell_count()).step_by(7).collect();
            for &k in &zeroed {
                s.u.values_mut()[k] = 0.0;
            }
            let r = rhs_u(&s, &config.params, grid)?;
            let min = zeroed.iter().map(|&k| r.values()[k]).fold(f64::INFINITY, f64::min);
            Ok((min >= 0.0, format!("min rhs_u at empty cells = {min:e}")))
        })(),
    ));

    out.push(outcome(
        "single step conserves mass (mu = 0)",
        (|| {
            let s = random_state(300)?;
            let control = StepControl { t_end: 1.0, ..config.control.clone() };
            let dt = stable_dt(&s, &conservative, grid, &control)?;
            let next = step(&s, &conservative, grid, dt)?;
            let (m0, m1) = (mass(&s.u, grid), mass(&next.u, grid));
            let rel = (m1 - m0).abs() / m0;
            Ok((rel <= 1e-13, format!("relative drift {rel:e}")))
        })(),
    ));

    out.push(outcome(
        "closed-form lemma minima match numerical search",
        (|| {
            for &p in &[1.5, 2.0, 3.0, 5.0, 10.0] {
                for &chi in &[0.1, 1.0, 10.0] {
                    for &l0 in &[0.5, 1.0, 4.0] {
                        lemma_min(p, chi, l0)?;
                    }
                }
            }
            Ok((true, "45 lattice points".into()))
        })(),
    ));

    out.push(outcome(
        "p0 for the reference case",
        (|| {
            let p0 = find_p0(1.0, 1.0, 0.0, 2, 1.0, 1.0)?;
            Ok(((p0 - 4.0).abs() <= 1e-6, format!("p0 = {p0}")))
        })(),
    ));

    out.push(outcome(
        "short run is deterministic and positive",
        (|| {
            let s = config.initial_state()?;
            let dt0 = stable_dt(&s, &config.params, grid, &StepControl { t_end: f64::MAX, ..config.control.clone() })?;
            let control = StepControl {
                t_end: (20.0 * dt0).min(config.control.t_end),
                ..config.control.clone()
            };
            let every = control.t_end / 10.0;
            let a = run(&s, &config.params, grid, &control, every)?;
            let b = run(&s, &config.params, grid, &control, every)?;
            let same = a == b;
            let min_u = a.records.iter().map(|r| r.min_u).fold(f64::INFINITY, f64::min);
            let ok = same && min_u >= -1e-10 && !matches!(a.verdict, Verdict::Aborted { .. });
            Ok((ok, format!("identical = {same}, min u = {min_u:e}, verdict = {:?}", a.verdict)))
        })(),
    ));

    out
}
