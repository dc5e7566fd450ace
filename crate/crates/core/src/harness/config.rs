//! Flat `key = value` configuration files.
//!
//! One assignment per line, `#` starts a comment, blank lines are ignored.
//! Every key is optional; missing keys take the defaults listed in
//! [`KEYS`]. Unknown and repeated keys are rejected.
//!
//! Initial data is written as one of
//!
//! ```text
//! u0 = constant 1.0
//! u0 = gaussian <amplitude> <cx> [<cy>] <width>
//! u0 = noise <seed> <amplitude> <passes>
//! ```
//!
//! Sweep axes are `axis1 = m_exp: 1.25, 1.5, 2.0` with the parameter name
//! one of `m_exp`, `mu`, `chi`, `c_d`.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use crate::diagnostics::CorpusSpec;
use crate::error::{KelsimError, Result};
use crate::integrator::StepControl;
use crate::model::{make_initial, Grid, InitialData, ModelParams, State};

/// Accepted keys and their defaults.
pub const KEYS: &[(&str, &str)] = &[
    ("dim", "2"),
    ("n", "64"),
    ("length", "1.0"),
    ("chi", "1.0"),
    ("mu", "0.0"),
    ("c_d", "1.0"),
    ("m", "1.0"),
    ("lambda0", "1.0"),
    ("c_gn", "1.0"),
    ("u0", "constant 1.0"),
    ("v0", "constant 0.0"),
    ("t_end", "1.0"),
    ("dt_max", "0.01"),
    ("dt_min", "1e-12"),
    ("safety", "0.25"),
    ("blowup_factor", "1e6"),
    ("record_every", "t_end / 100"),
    ("lp", "4"),
    ("plateau_window", "0.25"),
    ("plateau_ratio", "1.05"),
    ("axis1", "m_exp: <m>"),
    ("axis2", "mu: <mu>"),
    ("workers", "1"),
    ("lemma_p", "1.5, 2, 3, 5"),
    ("gamma", "2.0"),
    ("trials", "8"),
    ("seed", "1"),
    ("horizon", "1.0"),
    ("gn_p", "2.0"),
    ("gn_theta", "1.0"),
    ("corpus_constants", "1.0"),
    ("corpus_bumps", "16"),
    ("corpus_noise", "16"),
    ("corpus_spikes", "8"),
    ("corpus_seed", "1"),
];

/// Parameter that a sweep axis varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepParam {
    MExp,
    Mu,
    Chi,
    CD,
}

impl SweepParam {
    pub fn name(&self) -> &'static str {
        match self {
            SweepParam::MExp => "m_exp",
            SweepParam::Mu => "mu",
            SweepParam::Chi => "chi",
            SweepParam::CD => "c_d",
        }
    }

    pub fn apply(&self, params: &mut ModelParams, value: f64) {
        match self {
            SweepParam::MExp => params.m_exp = value,
            SweepParam::Mu => params.mu = value,
            SweepParam::Chi => params.chi = value,
            SweepParam::CD => params.c_d = value,
        }
    }

    pub fn get(&self, params: &ModelParams) -> f64 {
        match self {
            SweepParam::MExp => params.m_exp,
            SweepParam::Mu => params.mu,
            SweepParam::Chi => params.chi,
            SweepParam::CD => params.c_d,
        }
    }
}

impl FromStr for SweepParam {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "m_exp" | "m" => Ok(SweepParam::MExp),
            "mu" => Ok(SweepParam::Mu),
            "chi" => Ok(SweepParam::Chi),
            "c_d" => Ok(SweepParam::CD),
            other => Err(format!("unknown sweep parameter '{other}' (expected m_exp, mu, chi or c_d)")),
        }
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepAxis {
    pub param: SweepParam,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateConfig {
    pub gamma: f64,
    pub trials: usize,
    pub seed: u64,
    pub horizon: f64,
    pub gn_p: f64,
    pub gn_theta: f64,
    pub corpus: CorpusSpec,
}

/// Everything a `simulate`, `sweep`, `theory`, `check` or `estimate`
/// invocation needs.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub params: ModelParams,
    pub grid: Grid,
    pub control: StepControl,
    pub u0: InitialData,
    pub v0: InitialData,
    pub record_every: f64,
    pub plateau_window: f64,
    pub plateau_ratio: f64,
    pub axis1: SweepAxis,
    pub axis2: SweepAxis,
    pub workers: usize,
    pub lemma_p: Vec<f64>,
    pub estimate: EstimateConfig,
}

impl SimConfig {
    pub fn initial_state(&self) -> Result<State> {
        let u = make_initial(&self.grid, &self.u0)?;
        let v = make_initial(&self.grid, &self.v0)?;
        State::new(&self.grid, u, v)
    }
}

fn line_err(line: usize, msg: impl Into<String>) -> KelsimError {
    KelsimError::ConfigLine {
        line,
        msg: msg.into(),
    }
}

fn parse_f64(line: usize, key: &str, raw: &str) -> Result<f64> {
    let v: f64 = raw
        .trim()
        .parse()
        .map_err(|_| line_err(line, format!("{key}: '{raw}' is not a number")))?;
    if !v.is_finite() {
        return Err(line_err(line, format!("{key}: value must be finite")));
    }
    Ok(v)
}

fn parse_int<T: FromStr>(line: usize, key: &str, raw: &str) -> Result<T> {
    raw.trim()
        .parse()
        .map_err(|_| line_err(line, format!("{key}: '{raw}' is not a nonnegative integer")))
}

fn parse_list(line: usize, key: &str, raw: &str) -> Result<Vec<f64>> {
    let vals = raw
        .split(',')
        .map(|s| parse_f64(line, key, s))
        .collect::<Result<Vec<_>>>()?;
    if vals.is_empty() {
        return Err(line_err(line, format!("{key}: empty list")));
    }
    Ok(vals)
}

fn parse_initial(line: usize, key: &str, raw: &str, dim: usize) -> Result<InitialData> {
    let words: Vec<&str> = raw.split_whitespace().collect();
    let nums = |ws: &[&str]| ws.iter().map(|w| parse_f64(line, key, w)).collect::<Result<Vec<_>>>();
    let spec = match words.first().copied() {
        Some("constant") if words.len() == 2 => InitialData::Constant(parse_f64(line, key, words[1])?),
        Some("gaussian") => {
            let v = nums(&words[1..])?;
            match (dim, v.len()) {
                (1, 3) => InitialData::Gaussian {
                    amplitude: v[0],
                    center: [v[1], 0.0],
                    width: v[2],
                },
                (2, 4) => InitialData::Gaussian {
                    amplitude: v[0],
                    center: [v[1], v[2]],
                    width: v[3],
                },
                _ => {
                    return Err(line_err(
                        line,
                        format!("{key}: gaussian needs amplitude, {dim} center coordinate(s) and width"),
                    ))
                }
            }
        }
        Some("noise") if words.len() == 4 => InitialData::FilteredNoise {
            seed: parse_int(line, key, words[1])?,
            amplitude: parse_f64(line, key, words[2])?,
            cutoff: parse_int(line, key, words[3])?,
        },
        _ => {
            return Err(line_err(
                line,
                format!("{key}: expected 'constant c', 'gaussian A cx [cy] w' or 'noise seed A passes', got '{raw}'"),
            ))
        }
    };
    spec.validate().map_err(|e| line_err(line, format!("{key}: {e}")))?;
    Ok(spec)
}

fn parse_axis(line: usize, key: &str, raw: &str) -> Result<SweepAxis> {
    let (name, list) = raw
        .split_once(':')
        .ok_or_else(|| line_err(line, format!("{key}: expected '<param>: v1, v2, ...'")))?;
    let param = name.trim().parse::<SweepParam>().map_err(|e| line_err(line, e))?;
    let values = parse_list(line, key, list)?;
    if values.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(line_err(line, format!("{key}: values must be strictly increasing")));
    }
    Ok(SweepAxis { param, values })
}

fn require(line: usize, key: &str, ok: bool, what: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(line_err(line, format!("{key}: {what}")))
    }
}

/// Parses a configuration file body.
pub fn parse_config(text: &str) -> Result<SimConfig> {
    let known: HashSet<&str> = KEYS.iter().map(|(k, _)| *k).collect();
    let mut entries: Vec<(usize, String, String)> = Vec::new();
    let mut seen = HashSet::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw_line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| line_err(line, format!("expected 'key = value', got '{content}'")))?;
        let key = key.trim();
        let key = if key == "m_exp" { "m" } else { key };
        if !known.contains(key) {
            return Err(line_err(line, format!("unknown key '{key}'")));
        }
        if !seen.insert(key.to_string()) {
            return Err(line_err(line, format!("duplicate key '{key}'")));
        }
        entries.push((line, key.to_string(), value.trim().to_string()));
    }

    let lookup = |key: &str| -> (usize, String) {
        entries
            .iter()
            .find(|(_, k, _)| k == key)
            .map(|(l, _, v)| (*l, v.clone()))
            .unwrap_or_else(|| {
                let def = KEYS.iter().find(|(k, _)| *k == key).map(|(_, d)| *d).unwrap_or("");
                (0, def.to_string())
            })
    };
    let given = |key: &str| entries.iter().any(|(_, k, _)| k == key);
    let float = |key: &str| -> Result<(usize, f64)> {
        let (l, v) = lookup(key);
        Ok((l, parse_f64(l, key, &v)?))
    };

    let (l, raw) = lookup("dim");
    let dim: usize = parse_int(l, "dim", &raw)?;
    require(l, "dim", dim == 1 || dim == 2, "simulator supports dim 1 or 2")?;

    let (ln, raw) = lookup("n");
    let mut n_cells: Vec<usize> = raw
        .split(',')
        .map(|s| parse_int(ln, "n", s))
        .collect::<Result<Vec<_>>>()?;
    let (ll, raw) = lookup("length");
    let mut lengths = parse_list(ll, "length", &raw)?;
    if n_cells.len() == 1 {
        n_cells = vec![n_cells[0]; dim];
    }
    if lengths.len() == 1 {
        lengths = vec![lengths[0]; dim];
    }
    require(ln, "n", n_cells.len() == dim, "needs one count or one per axis")?;
    require(ll, "length", lengths.len() == dim, "needs one length or one per axis")?;
    let grid = Grid::new(dim, &n_cells, &lengths).map_err(|e| line_err(ln.max(ll), e.to_string()))?;

    let (l, chi) = float("chi")?;
    require(l, "chi", chi > 0.0, "chi must be positive")?;
    let (l, mu) = float("mu")?;
    require(l, "mu", mu >= 0.0, "mu must be nonnegative")?;
    let (l, c_d) = float("c_d")?;
    require(l, "c_d", c_d > 0.0, "c_d must be positive")?;
    let (_, m_exp) = float("m")?;
    let (l, lambda0) = float("lambda0")?;
    require(l, "lambda0", lambda0 > 0.0, "lambda0 must be positive")?;
    let (l, c_gn) = float("c_gn")?;
    require(l, "c_gn", c_gn > 0.0, "c_gn must be positive")?;
    let params = ModelParams {
        dim,
        chi,
        mu,
        c_d,
        m_exp,
        lambda0,
        c_gn,
    };

    let (l, raw) = lookup("u0");
    let u0 = parse_initial(l, "u0", &raw, dim)?;
    let (l, raw) = lookup("v0");
    let v0 = parse_initial(l, "v0", &raw, dim)?;

    let (l_end, t_end) = float("t_end")?;
    require(l_end, "t_end", t_end > 0.0, "t_end must be positive")?;
    let (l, dt_max) = float("dt_max")?;
    require(l, "dt_max", dt_max > 0.0, "dt_max must be positive")?;
    let (l, dt_min) = float("dt_min")?;
    require(l, "dt_min", dt_min > 0.0 && dt_min < dt_max, "need 0 < dt_min < dt_max")?;
    let (l, safety) = float("safety")?;
    require(l, "safety", safety > 0.0 && safety <= 1.0, "safety must lie in (0, 1]")?;
    let (l, blowup_factor) = float("blowup_factor")?;
    require(l, "blowup_factor", blowup_factor > 0.0, "blowup_factor must be positive")?;
    let record_every = if given("record_every") {
        let (l, r) = float("record_every")?;
        require(l, "record_every", r > 0.0, "record_every must be positive")?;
        r
    } else {
        t_end / 100.0
    };
    let (l, raw) = lookup("lp");
    let lp_exponents = parse_list(l, "lp", &raw)?;
    require(l, "lp", lp_exponents.iter().all(|&p| p >= 1.0), "exponents must be >= 1")?;
    require(l, "lp", !lp_exponents.contains(&2.0), "l2_u is always written; list only other exponents")?;
    let control = StepControl {
        safety,
        dt_min,
        dt_max,
        t_end,
        blowup_factor,
        lp_exponents,
    };

    let (l, plateau_window) = float("plateau_window")?;
    require(l, "plateau_window", plateau_window > 0.0 && plateau_window <= 0.5, "must lie in (0, 0.5]")?;
    let (l, plateau_ratio) = float("plateau_ratio")?;
    require(l, "plateau_ratio", plateau_ratio >= 1.0, "must be >= 1")?;

    let axis = |key: &str, default: SweepParam| -> Result<SweepAxis> {
        if given(key) {
            let (l, raw) = lookup(key);
            parse_axis(l, key, &raw)
        } else {
            Ok(SweepAxis {
                param: default,
                values: vec![default.get(&params)],
            })
        }
    };
    let axis1 = axis("axis1", SweepParam::MExp)?;
    let axis2 = axis("axis2", SweepParam::Mu)?;
    if axis1.param == axis2.param {
        let (l, _) = lookup("axis2");
        return Err(line_err(l, "axis1 and axis2 must vary different parameters"));
    }
    let (l, raw) = lookup("workers");
    let workers: usize = parse_int(l, "workers", &raw)?;
    require(l, "workers", workers >= 1, "workers must be >= 1")?;

    let (l, raw) = lookup("lemma_p");
    let lemma_p = parse_list(l, "lemma_p", &raw)?;
    require(l, "lemma_p", lemma_p.iter().all(|&p| p >= 1.0), "exponents must be >= 1")?;

    let (l, gamma) = float("gamma")?;
    require(l, "gamma", gamma > 1.0, "gamma must exceed 1")?;
    let (l, raw) = lookup("trials");
    let trials: usize = parse_int(l, "trials", &raw)?;
    require(l, "trials", trials >= 1, "trials must be >= 1")?;
    let (l, raw) = lookup("seed");
    let seed: u64 = parse_int(l, "seed", &raw)?;
    let (l, horizon) = float("horizon")?;
    require(l, "horizon", horizon > 0.0, "horizon must be positive")?;
    let (_, gn_p) = float("gn_p")?;
    let (l, gn_theta) = float("gn_theta")?;
    require(l, "gn_theta", gn_theta > 0.0 && gn_theta < gn_p, "need 0 < gn_theta < gn_p")?;
    let (l, raw) = lookup("corpus_constants");
    let constants = parse_list(l, "corpus_constants", &raw)?;
    require(l, "corpus_constants", constants.iter().all(|&c| c > 0.0), "constants must be positive")?;
    let count = |key: &str| -> Result<usize> {
        let (l, raw) = lookup(key);
        parse_int(l, key, &raw)
    };
    let corpus = CorpusSpec {
        constants,
        bumps: count("corpus_bumps")?,
        noise: count("corpus_noise")?,
        spikes: count("corpus_spikes")?,
        seed: {
            let (l, raw) = lookup("corpus_seed");
            parse_int(l, "corpus_seed", &raw)?
        },
    };

    Ok(SimConfig {
        params,
        grid,
        control,
        u0,
        v0,
        record_every,
        plateau_window,
        plateau_ratio,
        axis1,
        axis2,
        workers,
        lemma_p,
        estimate: EstimateConfig {
            gamma,
            trials,
            seed,
            horizon,
            gn_p,
            gn_theta,
            corpus,
        },
    })
}
