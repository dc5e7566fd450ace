//! Acceptance suite. Each test prints one `PASS`/`FAIL` line to stderr
//! (bypassing libtest capture) and then asserts.

use std::io::Write;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use rand::Rng;

use kelsim::diagnostics::{estimate_cgn, estimate_lambda0, gn_ratio, mass, u2_window_integral, window_tau, CorpusSpec};
use kelsim::harness::{parse_config, run_sweep, Empirical, SweepSpec};
use kelsim::integrator::{run, StepControl, Verdict};
use kelsim::model::{make_grid, make_initial, seeded_rng, Field, InitialData, ModelParams, State};
use kelsim::theory::{b1_constant, critical_exponent, find_p0, h_function, lemma_min, CriticalExponent};
use kelsim::KelsimError;

fn report(id: u32, name: &str, passed: bool, detail: &str) {
    let tag = if passed { "PASS" } else { "FAIL" };
    let mut err = std::io::stderr().lock();
    let _ = writeln!(err, "[{tag}] criterion {id:>2} {name}: {detail}");
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn b1_oracle(p: f64) -> f64 {
    let a = (p / (p + 1.0)).powf(p);
    let b = ((p - 1.0) / p).powf(p + 1.0);
    a * b / (p + 1.0)
}

/// Plain golden-section minimization of `f` on `[lo, hi]`.
fn golden_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..400 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = f(x2);
        }
    }
    f(0.5 * (lo + hi))
}

#[test]
fn criterion_01_lemma_closed_form_vs_search() {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for p in [1.5, 2.0, 3.0, 5.0, 10.0] {
        for chi in [0.1f64, 1.0, 10.0] {
            for lambda0 in [0.5, 1.0, 4.0] {
                let b1 = b1_oracle(p);
                let obj = |y: f64| y + b1 * y.powf(-p) * chi.powf(p + 1.0) * lambda0;
                // The objective exceeds y, so the minimizer sits below obj(chi);
                // refine twice around the coarse minimizer for resolution.
                let mut hi = obj(chi);
                let mut lo = hi * 1e-9;
                for _ in 0..3 {
                    let n = 2000;
                    let best = (0..=n)
                        .map(|k| lo * (hi / lo).powf(k as f64 / n as f64))
                        .min_by(|a, b| obj(*a).total_cmp(&obj(*b)))
                        .unwrap();
                    lo = best / 1.05;
                    hi = best * 1.05;
                }
                let searched = golden_min(obj, lo, hi);
                let got = lemma_min(p, chi, lambda0).unwrap();
                worst = worst.max(rel(got.minimum, searched));
                worst = worst.max(rel(obj(got.minimizer), searched));
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let ok = worst <= 1e-8 && secs < 1.0;
    report(1, "lemma closed form", ok, &format!("max rel err {worst:.2e} over 45 points, {secs:.3}s"));
    assert!(ok);
}

#[test]
fn criterion_02_spot_values() {
    let a = lemma_min(2.0, 1.0, 1.0).unwrap();
    let b = lemma_min(2.0, 2.0, 1.0).unwrap();
    let b1 = b1_constant(2.0).unwrap();
    let errs = [
        (a.minimizer - 1.0 / 3.0).abs(),
        (a.minimum - 0.5).abs(),
        (b.minimizer - 2.0 / 3.0).abs(),
        (b.minimum - 1.0).abs(),
    ];
    let worst = errs.iter().cloned().fold(0.0, f64::max);
    let b1_err = (b1 - 1.0 / 54.0).abs();
    let ok = worst <= 1e-10 && b1_err <= 1e-14;
    report(2, "spot values", ok, &format!("lemma err {worst:.2e}, B1(2) err {b1_err:.2e}"));
    assert!(ok);
}

#[test]
fn criterion_03_critical_exponent() {
    let start = Instant::now();
    let three_d = ModelParams { dim: 3, chi: 1.0, mu: 0.0, ..ModelParams::default() };
    let exact = critical_exponent(&three_d) == CriticalExponent::Finite(4.0 / 3.0);

    let mut rng = seeded_rng(2024, 0);
    let mut mismatches = 0;
    let mut unconstrained = 0;
    for k in 0..1000 {
        let chi = 10f64.powf(rng.gen_range(-2.0..2.0));
        let lambda0 = 10f64.powf(rng.gen_range(-2.0..2.0));
        let s = chi * lambda0.max(1.0);
        // A quarter of the points sit exactly on the boundary mu = S.
        let mu = if k % 4 == 0 { s } else { s * rng.gen_range(0.0..2.0) };
        let params = ModelParams {
            dim: 1 + k % 3,
            chi,
            mu,
            lambda0,
            ..ModelParams::default()
        };
        let is_unc = critical_exponent(&params) == CriticalExponent::Unconstrained;
        unconstrained += is_unc as usize;
        if is_unc != (mu >= s) {
            mismatches += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let ok = exact && mismatches == 0 && secs < 1.0;
    report(
        3,
        "critical exponent",
        ok,
        &format!("N=3 exact: {exact}, scan mismatches {mismatches}/1000 ({unconstrained} unconstrained), {secs:.3}s"),
    );
    assert!(ok);
}

#[test]
fn criterion_04_find_p0() {
    let start = Instant::now();
    let p0 = find_p0(1.0, 1.0, 0.0, 2, 1.0, 1.0).unwrap();
    let h = h_function(p0, 1.0, 1.0, 0.0, 2, 1.0, 1.0).unwrap();
    let rejected = [1.0 / 3.0, 0.3, 0.1]
        .iter()
        .all(|&cd| matches!(find_p0(cd, 1.0, 0.0, 2, 1.0, 1.0), Err(KelsimError::Precondition(_))));
    let secs = start.elapsed().as_secs_f64();
    let ok = (p0 - 4.0).abs() <= 1e-6 && h > 0.0 && rejected && secs < 1.0;
    report(4, "find p0", ok, &format!("p0 = {p0:.9}, h(p0) = {h:.2e}, C_D <= 1/3 rejected: {rejected}, {secs:.3}s"));
    assert!(ok);
}

#[test]
fn criterion_05_mass_conservation() {
    let start = Instant::now();
    let grid = make_grid(2, &[64, 64], &[4.0, 4.0]).unwrap();
    let mut worst = 0.0f64;
    let mut all_bounded = true;
    for (m, seed) in [(1.0, 11), (2.0, 12)] {
        let u = make_initial(&grid, &InitialData::FilteredNoise { seed, amplitude: 2.0, cutoff: 8 }).unwrap();
        let v = make_initial(&grid, &InitialData::FilteredNoise { seed: seed + 100, amplitude: 0.5, cutoff: 8 }).unwrap();
        let state = State::new(&grid, u, v).unwrap();
        let params = ModelParams { chi: 1.0, mu: 0.0, m_exp: m, ..ModelParams::default() };
        let control = StepControl { t_end: 5.0, ..StepControl::default() };
        let out = run(&state, &params, &grid, &control, 0.1).unwrap();
        all_bounded &= out.verdict == Verdict::CompletedBounded && out.final_state.t == 5.0;
        let m0 = out.records[0].mass;
        for r in &out.records {
            worst = worst.max(rel(r.mass, m0));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let ok = all_bounded && worst <= 1e-12 && secs < 120.0;
    report(5, "mass conservation", ok, &format!("max rel drift {worst:.2e}, reached T: {all_bounded}, {secs:.1}s"));
    assert!(ok);
}

#[test]
fn criterion_06_l1_and_window_bounds() {
    let grid = make_grid(2, &[32, 32], &[4.0, 4.0]).unwrap();
    let vol = grid.volume();
    let mu = 1.0;
    let params = ModelParams { chi: 1.0, mu, m_exp: 1.0, ..ModelParams::default() };
    let control = StepControl { t_end: 5.0, ..StepControl::default() };
    let mut ok = true;
    let mut details = Vec::new();
    for (k, factor) in [0.5, 3.0].into_iter().enumerate() {
        let noise = make_initial(&grid, &InitialData::FilteredNoise { seed: 30 + k as u64, amplitude: 1.0, cutoff: 6 }).unwrap();
        let u = noise.scaled(factor * vol / mass(&noise, &grid));
        let state = State::new(&grid, u, Field::zeros(&grid)).unwrap();
        let out = run(&state, &params, &grid, &control, 0.01).unwrap();
        let m0 = out.records[0].mass;
        let k0 = m0.max(vol);
        let mass_ok = out.records.iter().all(|r| r.mass <= k0 * (1.0 + 1e-6));
        // Integrating the u equation over space gives
        // int_t^{t+tau} int u^2 = int_t^{t+tau} mass + (mass(t) - mass(t+tau))/mu,
        // hence the window is at most (tau + 1/mu) K0.
        let tau = window_tau(Some(control.t_end));
        let windows = u2_window_integral(&out.records, tau).unwrap();
        let cap = (tau + 1.0 / mu) * k0;
        let win_max = windows.iter().map(|w| w.value).fold(0.0, f64::max);
        let win_ok = !windows.is_empty() && windows.iter().all(|w| w.value.is_finite()) && win_max <= cap;
        ok &= out.verdict == Verdict::CompletedBounded && mass_ok && win_ok;
        details.push(format!(
            "mass0 = {factor}|Omega|: max mass {:.4} <= {k0:.4}: {mass_ok}, window max {win_max:.3} <= {cap:.3}: {win_ok}",
            out.records.iter().map(|r| r.mass).fold(0.0, f64::max)
        ));
    }
    report(6, "L1 and windowed L2 bounds", ok, &details.join("; "));
    assert!(ok);
}

#[test]
fn criterion_07_logistic_convergence() {
    let grid = make_grid(2, &[4, 4], &[4.0, 4.0]).unwrap();
    let params = ModelParams { chi: 1.0, mu: 1.0, m_exp: 1.0, ..ModelParams::default() };
    let u0 = 0.2;
    let exact = u0 / (u0 + (1.0 - u0) * (-1.0f64).exp());
    let state = State::new(&grid, Field::constant(&grid, u0), Field::constant(&grid, 0.3)).unwrap();
    let errors: Vec<f64> = [0.02, 0.01, 0.005, 0.0025]
        .iter()
        .map(|&dt| {
            let control = StepControl { t_end: 1.0, dt_max: dt, ..StepControl::default() };
            let out = run(&state, &params, &grid, &control, 0.5).unwrap();
            out.final_state.u.values().iter().map(|&u| (u - exact).abs()).fold(0.0, f64::max)
        })
        .collect();
    let ratios: Vec<f64> = errors.windows(2).map(|w| w[0] / w[1]).collect();
    let ok = ratios.iter().all(|r| (1.8..=2.2).contains(r));
    report(
        7,
        "logistic convergence",
        ok,
        &format!(
            "errors {}, ratios {ratios:.3?}",
            errors.iter().map(|e| format!("{e:.3e}")).collect::<Vec<_>>().join(" ")
        ),
    );
    assert!(ok);
}

const PHASE_BASE: &str = "\
dim = 2
n = 96
length = 16
chi = 1
m = 1
c_d = 1
u0 = gaussian 16 8 8 1
v0 = constant 0
t_end = 50
dt_max = 0.01
record_every = 0.5
blowup_factor = 100
";

#[test]
fn criterion_08_phase_boundary() {
    let start = Instant::now();
    let cfg = parse_config(&format!("{PHASE_BASE}mu = 0\naxis1 = m_exp: 1, 1.25, 1.5, 2\n")).unwrap();
    let u0_mass = mass(&cfg.initial_state().unwrap().u, &cfg.grid);
    let critical = 8.0 * std::f64::consts::PI;
    let report_ = run_sweep(&SweepSpec::from_config(&cfg)).unwrap();
    let mut ok = rel(u0_mass, 4.0 * critical) < 1e-6;
    let mut details = vec![format!("mass {:.4} = {:.4} x 8pi", u0_mass, u0_mass / critical)];
    for c in &report_.cells {
        let m = c.axis1_value;
        let want_ok = if m == 1.0 {
            c.empirical == Empirical::Blowup && c.t_final < 10.0
        } else {
            c.empirical == Empirical::Bounded && c.theoretical.status.is_bounded()
        };
        ok &= want_ok && c.agree;
        details.push(format!(
            "m={m}: {} (theory {}, t {:.2}, max u {:.3})",
            c.empirical.label(),
            c.theoretical.status.label(),
            c.t_final,
            c.max_linf
        ));
    }
    let secs = start.elapsed().as_secs_f64();
    ok &= report_.disagreements().count() == 0 && secs < 900.0;
    details.push(format!("{secs:.0}s"));
    report(8, "phase boundary", ok, &details.join("; "));
    assert!(ok);
}

#[test]
fn criterion_09_logistic_suppression() {
    let cfg = parse_config(&format!("{PHASE_BASE}mu = 2\n")).unwrap();
    let unconstrained = critical_exponent(&cfg.params) == CriticalExponent::Unconstrained;
    let state = cfg.initial_state().unwrap();
    let out = run(&state, &cfg.params, &cfg.grid, &cfg.control, cfg.record_every).unwrap();
    let max_u = out.records.iter().map(|r| r.linf_u).fold(0.0, f64::max);
    let ok = unconstrained && out.verdict == Verdict::CompletedBounded;
    report(
        9,
        "logistic suppression",
        ok,
        &format!("unconstrained regime: {unconstrained}, verdict {:?}, max u {max_u:.3}, final max u {:.4}", out.verdict, out.final_state.u.max()),
    );
    assert!(ok);
}

#[test]
fn criterion_10_estimators() {
    let unit = make_grid(2, &[16, 16], &[1.0, 1.0]).unwrap();
    let corpus = CorpusSpec { constants: vec![0.5, 1.0, 3.0], bumps: 0, noise: 0, spikes: 0, seed: 1 };
    let cgn = estimate_cgn(&corpus, 2.0, 1.0, &unit).unwrap();
    let cgn_ok = (cgn - 1.0).abs() <= 1e-12;

    let f = make_initial(&unit, &InitialData::FilteredNoise { seed: 5, amplitude: 1.0, cutoff: 3 }).unwrap();
    let base = gn_ratio(&f, 3.0, 0.5, &unit).unwrap();
    let scale_err = [1e-3, 0.7, 42.0, 1e4]
        .iter()
        .map(|&c| rel(gn_ratio(&f.scaled(c), 3.0, 0.5, &unit).unwrap(), base))
        .fold(0.0, f64::max);
    let scale_ok = scale_err <= 1e-12;

    let grid = make_grid(2, &[12, 12], &[1.0, 1.0]).unwrap();
    let a = estimate_lambda0(2.0, &grid, 3, 9, 0.5).unwrap();
    let b = estimate_lambda0(2.0, &grid, 3, 9, 0.5).unwrap();
    let lambda_ok = a.to_bits() == b.to_bits() && a > 0.0 && a.is_finite();

    let ok = cgn_ok && scale_ok && lambda_ok;
    report(
        10,
        "estimators",
        ok,
        &format!("C_GN(constants) = {cgn}, gn_ratio scale err {scale_err:.1e}, lambda0 = {a:.6} (repeatable: {})", a.to_bits() == b.to_bits()),
    );
    assert!(ok);
}

fn kelsim(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_kelsim"))
        .args(args)
        .env_remove("KELSIM_THREADS")
        .output()
        .unwrap()
}

fn read_dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

#[test]
fn criterion_11_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let base = "\
dim = 2
n = 24
length = 4
chi = 1
mu = 0.5
m = 1.5
u0 = noise 3 4 4
v0 = noise 4 1 4
t_end = 0.5
record_every = 0.05
";
    let sim_cfg = dir.path().join("sim.cfg");
    std::fs::write(&sim_cfg, base).unwrap();
    let mut sim_runs = Vec::new();
    for k in 0..2 {
        let out = dir.path().join(format!("sim{k}"));
        let o = kelsim(&["simulate", sim_cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        sim_runs.push(read_dir_bytes(&out));
    }
    let sim_ok = sim_runs[0] == sim_runs[1] && sim_runs[0].len() >= 3;

    let mut phases = Vec::new();
    for (k, workers) in [1, 8, 8].into_iter().enumerate() {
        let cfg = dir.path().join(format!("sweep{k}.cfg"));
        std::fs::write(
            &cfg,
            format!("{base}axis1 = m_exp: 1, 1.5, 2\naxis2 = mu: 0, 1\nworkers = {workers}\n"),
        )
        .unwrap();
        let out = dir.path().join(format!("sweep{k}"));
        let o = kelsim(&["sweep", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        phases.push(std::fs::read(out.join("phase.csv")).unwrap());
    }
    let sweep_ok = phases[0] == phases[1] && phases[1] == phases[2] && !phases[0].is_empty();
    let ok = sim_ok && sweep_ok;
    report(
        11,
        "determinism",
        ok,
        &format!(
            "simulate re-run identical over {} CSV files: {sim_ok}; phase.csv identical for workers 1/8/8: {sweep_ok}",
            sim_runs[0].len()
        ),
    );
    assert!(ok);
}
