use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use kelsim::diagnostics::{estimate_cgn, estimate_lambda0, mass};
use kelsim::harness::check::run_checks;
use kelsim::harness::{emit_snapshot, emit_timeseries, parse_config, run_sweep, SimConfig, SweepSpec};
use kelsim::integrator::{run, Verdict};
use kelsim::theory::{b1_constant, cd_threshold, classify_regime, critical_exponent, find_p0, lemma_min};
use kelsim::{KelsimError, Result};

#[derive(Parser)]
#[command(name = "kelsim", version, about = "Quasilinear Keller-Segel simulator and analysis toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and write time series and final snapshots.
    Simulate {
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run the configured parameter sweep and write phase.csv.
    Sweep {
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Print critical exponent, diffusion threshold, p0 and lemma minima.
    Theory { config: PathBuf },
    /// Run the invariant self-tests.
    Check { config: PathBuf },
    /// Estimate C_GN and lambda0 lower bounds.
    Estimate { config: PathBuf },
}

fn load(path: &Path) -> Result<SimConfig> {
    let text = fs::read_to_string(path).map_err(|e| KelsimError::io(path, e))?;
    parse_config(&text)
}

fn ensure_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| KelsimError::io(path, e))
}

fn simulate(config: &Path, out: &Path) -> Result<i32> {
    let cfg = load(config)?;
    ensure_dir(out)?;
    let state = cfg.initial_state()?;
    let outcome = run(&state, &cfg.params, &cfg.grid, &cfg.control, cfg.record_every)?;
    emit_timeseries(&outcome, &out.join("timeseries.csv"))?;
    emit_snapshot(&outcome.final_state.u, &cfg.grid, &out.join("u_final"))?;
    emit_snapshot(&outcome.final_state.v, &cfg.grid, &out.join("v_final"))?;
    let last = outcome.records.last().expect("run records at least the initial state");
    println!(
        "verdict: {:?}\nt = {}  steps = {}  mass = {}  max u = {}",
        outcome.verdict, outcome.final_state.t, outcome.final_state.step, last.mass, last.linf_u
    );
    Ok(match outcome.verdict {
        Verdict::Aborted { .. } => 3,
        _ => 0,
    })
}

fn sweep(config: &Path, out: &Path) -> Result<i32> {
    let cfg = load(config)?;
    ensure_dir(out)?;
    let report = run_sweep(&SweepSpec::from_config(&cfg))?;
    report.write_csv(&out.join("phase.csv"))?;
    for c in &report.cells {
        println!(
            "{} = {:<8} {} = {:<8} empirical = {:<8} theory = {:<18} agree = {}",
            report.axis1.param,
            c.axis1_value,
            report.axis2.param,
            c.axis2_value,
            c.empirical.label(),
            c.theoretical.status.label(),
            c.agree
        );
    }
    let bad = report.disagreements().count();
    if bad > 0 {
        println!("{bad} cell(s) where theory guarantees boundedness but the run blew up");
    }
    Ok(0)
}

fn theory(config: &Path) -> Result<i32> {
    let cfg = load(config)?;
    let p = &cfg.params;
    let u0_l1 = mass(&cfg.initial_state()?.u, &cfg.grid);
    println!("N = {}  chi = {}  mu = {}  m = {}  C_D = {}  lambda0 = {}  C_GN = {}", p.dim, p.chi, p.mu, p.m_exp, p.c_d, p.lambda0, p.c_gn);
    println!("|u0|_1 = {u0_l1}");
    println!("critical exponent m* = {}", critical_exponent(p));
    match cd_threshold(p, u0_l1) {
        Ok(t) => println!("C_D threshold = {t}"),
        Err(e) => println!("C_D threshold: {e}"),
    }
    let verdict = classify_regime(p, u0_l1);
    println!("regime: {} ({})", verdict.status.label(), verdict.detail);
    match find_p0(p.c_d, p.c_gn, u0_l1, p.dim, p.lambda0, p.chi) {
        Ok(p0) => println!("p0 = {p0}"),
        Err(e) => println!("p0: {e}"),
    }
    for &lp in &cfg.lemma_p {
        let b1 = b1_constant(lp)?;
        let m = lemma_min(lp, p.chi, p.lambda0)?;
        println!("p = {lp}: B1 = {b1}  argmin = {}  min = {}", m.minimizer, m.minimum);
    }
    Ok(0)
}

fn check(config: &Path) -> Result<i32> {
    let cfg = load(config)?;
    let results = run_checks(&cfg);
    for r in &results {
        println!("[{}] {}: {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
    }
    Ok(if results.iter().all(|r| r.passed) { 0 } else { 1 })
}

fn estimate(config: &Path) -> Result<i32> {
    let cfg = load(config)?;
    let e = &cfg.estimate;
    let cgn = estimate_cgn(&e.corpus, e.gn_p, e.gn_theta, &cfg.grid)?;
    println!("C_GN >= {cgn}  (p = {}, theta = {}, corpus lower bound)", e.gn_p, e.gn_theta);
    let l0 = estimate_lambda0(e.gamma, &cfg.grid, e.trials, e.seed, e.horizon)?;
    println!("lambda0 >= {l0}  (gamma = {}, {} trials, T = {})", e.gamma, e.trials, e.horizon);
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate { config, out } => simulate(config, out),
        Command::Sweep { config, out } => sweep(config, out),
        Command::Theory { config } => theory(config),
        Command::Check { config } => check(config),
        Command::Estimate { config } => estimate(config),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
