//! Empirical boundedness classification and parameter sweeps.

use std::path::Path;

use rayon::prelude::*;

use super::config::{SimConfig, SweepAxis};
use super::output::{csv_writer, fmt_f64};
use crate::diagnostics::mass;
use crate::error::{KelsimError, Result};
use crate::integrator::{run, RunOutcome, Verdict};
use crate::model::ModelParams;
use crate::theory::{classify_regime, RegimeVerdict};

/// Environment variable capping sweep worker threads.
pub const THREADS_ENV: &str = "KELSIM_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Empirical {
    Bounded,
    Blowup,
    Aborted,
}

impl Empirical {
    pub fn label(&self) -> &'static str {
        match self {
            Empirical::Bounded => "Bounded",
            Empirical::Blowup => "Blowup",
            Empirical::Aborted => "Aborted",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EmpiricalClass {
    pub verdict: Empirical,
    /// Bounded but `max u` was still growing over the final window.
    pub growing: bool,
}

pub const MIN_RECORDS: usize = 10;

/// Plateau heuristic: a completed run is bounded; it is flagged as still
/// growing when `max ‖u‖_∞` over the final `plateau_window` fraction of
/// records exceeds `ratio` times the maximum over the equally long window
/// before it.
pub fn classify_empirical(outcome: &RunOutcome, plateau_window: f64, ratio: f64) -> Result<EmpiricalClass> {
    match outcome.verdict {
        Verdict::NumericalBlowup { .. } => {
            return Ok(EmpiricalClass { verdict: Empirical::Blowup, growing: false });
        }
        Verdict::Aborted { .. } => {
            return Ok(EmpiricalClass { verdict: Empirical::Aborted, growing: false });
        }
        Verdict::CompletedBounded => {}
    }
    let n = outcome.records.len();
    if n < MIN_RECORDS {
        return Err(KelsimError::Evaluation(format!(
            "need at least {MIN_RECORDS} records to judge a plateau, got {n}"
        )));
    }
    if !(plateau_window > 0.0 && plateau_window <= 0.5) {
        return Err(KelsimError::Domain(format!("plateau window {plateau_window} outside (0, 0.5]")));
    }
    let w = ((n as f64 * plateau_window).ceil() as usize).clamp(1, n / 2);
    let linf = |r: &[crate::diagnostics::DiagnosticsRecord]| r.iter().fold(0.0f64, |m, x| m.max(x.linf_u));
    let last = linf(&outcome.records[n - w..]);
    let before = linf(&outcome.records[n - 2 * w..n - w]);
    Ok(EmpiricalClass {
        verdict: Empirical::Bounded,
        growing: last > ratio * before,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub axis1: SweepAxis,
    pub axis2: SweepAxis,
    pub base: SimConfig,
    pub workers: usize,
}

impl SweepSpec {
    pub fn from_config(config: &SimConfig) -> Self {
        SweepSpec {
            axis1: config.axis1.clone(),
            axis2: config.axis2.clone(),
            base: config.clone(),
            workers: config.workers,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseCell {
    pub axis1_value: f64,
    pub axis2_value: f64,
    pub params: ModelParams,
    pub empirical: Empirical,
    pub growing: bool,
    pub theoretical: RegimeVerdict,
    /// False only when theory guarantees boundedness and the run blew up.
    pub agree: bool,
    pub t_final: f64,
    pub max_linf: f64,
    /// Abort reason or evaluation error, if any.
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub axis1: SweepAxis,
    pub axis2: SweepAxis,
    /// Row-major over `(axis1, axis2)`.
    pub cells: Vec<PhaseCell>,
}

/// Worker count after applying the `KELSIM_THREADS` cap.
pub fn effective_workers(requested: usize) -> usize {
    let cap = std::env::var(THREADS_ENV).ok().and_then(|s| s.trim().parse::<usize>().ok()).filter(|&c| c > 0);
    cap.map_or(requested, |c| requested.min(c)).max(1)
}

fn run_point(base: &SimConfig, params: ModelParams, a1: f64, a2: f64) -> PhaseCell {
    let theory_of = |u0_l1: f64| classify_regime(&params, u0_l1);
    let state = match base.initial_state() {
        Ok(s) => s,
        Err(e) => {
            return PhaseCell {
                axis1_value: a1,
                axis2_value: a2,
                params,
                empirical: Empirical::Aborted,
                growing: false,
                theoretical: theory_of(0.0),
                agree: true,
                t_final: 0.0,
                max_linf: f64::NAN,
                note: Some(e.to_string()),
            }
        }
    };
    let u0_l1 = mass(&state.u, &base.grid);
    let theoretical = theory_of(u0_l1);
    let (empirical, growing, t_final, max_linf, note) =
        match run(&state, &params, &base.grid, &base.control, base.record_every) {
            Ok(outcome) => {
                let max_linf = outcome.records.iter().fold(0.0f64, |m, r| m.max(r.linf_u));
                let t_final = outcome.final_state.t;
                let note = match &outcome.verdict {
                    Verdict::Aborted { reason } => Some(reason.clone()),
                    _ => None,
                };
                match classify_empirical(&outcome, base.plateau_window, base.plateau_ratio) {
                    Ok(c) => (c.verdict, c.growing, t_final, max_linf, note),
                    Err(e) => (Empirical::Aborted, false, t_final, max_linf, Some(e.to_string())),
                }
            }
            Err(e) => (Empirical::Aborted, false, 0.0, f64::NAN, Some(e.to_string())),
        };
    let agree = !(theoretical.status.is_bounded() && empirical == Empirical::Blowup);
    PhaseCell {
        axis1_value: a1,
        axis2_value: a2,
        params,
        empirical,
        growing,
        theoretical,
        agree,
        t_final,
        max_linf,
        note,
    }
}

/// Runs one simulation per lattice point and attaches theory verdicts.
///
/// Each run is single threaded and results are collected in lattice order,
/// so the report does not depend on the worker count.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepReport> {
    if spec.axis1.values.is_empty() || spec.axis2.values.is_empty() {
        return Err(KelsimError::Config("sweep axes must be non-empty".into()));
    }
    let mut points = Vec::with_capacity(spec.axis1.values.len() * spec.axis2.values.len());
    for &a1 in &spec.axis1.values {
        for &a2 in &spec.axis2.values {
            let mut params = spec.base.params;
            spec.axis1.param.apply(&mut params, a1);
            spec.axis2.param.apply(&mut params, a2);
            points.push((params, a1, a2));
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(effective_workers(spec.workers))
        .build()
        .map_err(|e| KelsimError::Config(format!("cannot start worker pool: {e}")))?;
    let cells = pool.install(|| {
        points
            .par_iter()
            .map(|&(params, a1, a2)| run_point(&spec.base, params, a1, a2))
            .collect::<Vec<_>>()
    });
    Ok(SweepReport {
        axis1: spec.axis1.clone(),
        axis2: spec.axis2.clone(),
        cells,
    })
}

impl SweepReport {
    pub fn disagreements(&self) -> impl Iterator<Item = &PhaseCell> {
        self.cells.iter().filter(|c| !c.agree)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv_writer(path)?;
        let io = |e: csv::Error| KelsimError::io(path, e);
        w.write_record([
            self.axis1.param.name(),
            self.axis2.param.name(),
            "empirical",
            "theoretical",
            "agree",
            "t_final",
            "max_linf",
            "growing",
        ])
        .map_err(io)?;
        for c in &self.cells {
            w.write_record([
                fmt_f64(c.axis1_value),
                fmt_f64(c.axis2_value),
                c.empirical.label().to_string(),
                c.theoretical.status.label().to_string(),
                c.agree.to_string(),
                fmt_f64(c.t_final),
                fmt_f64(c.max_linf),
                c.growing.to_string(),
            ])
            .map_err(io)?;
        }
        w.flush().map_err(|e| KelsimError::io(path, e))
    }
}
