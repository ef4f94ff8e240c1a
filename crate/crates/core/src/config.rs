//! Flat `key = value` run configuration.
//!
//! ```text
//! # kinetic rectangular pulse, fixed rank 15
//! scenario = rectangular_pulse
//! scheme = bug_fixed
//! rank = 15
//! output_dir = out/bug15
//! ```

use std::collections::HashMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{invalid_arg, Result, TrtError};
use crate::mesh::{Boundary, Emission};
use crate::scenarios::{Regime, ScenarioName, ScenarioOverrides, SigmaSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    Full,
    BugFixed,
    BugAdaptive,
    Rosseland,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [
        Scheme::Full,
        Scheme::BugFixed,
        Scheme::BugAdaptive,
        Scheme::Rosseland,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Full => "full",
            Self::BugFixed => "bug_fixed",
            Self::BugAdaptive => "bug_adaptive",
            Self::Rosseland => "rosseland",
        }
    }
}

impl FromStr for Scheme {
    type Err = TrtError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| invalid_arg(format!("unknown scheme '{s}'")))
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: ScenarioName,
    pub scheme: Scheme,
    pub overrides: ScenarioOverrides,
    pub max_rank: Option<usize>,
    pub dt: Option<f64>,
    pub cfl_safety: f64,
    pub bc: Boundary,
    pub output_dir: PathBuf,
    pub history_stride: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            scenario: ScenarioName::RectangularPulse,
            scheme: Scheme::Full,
            overrides: ScenarioOverrides::default(),
            max_rank: None,
            dt: None,
            cfl_safety: 1.0,
            bc: Boundary::ZeroGhost,
            output_dir: PathBuf::from("output"),
            history_stride: 1,
        }
    }
}

const KEYS: &[&str] = &[
    "scenario",
    "scheme",
    "regime",
    "nx",
    "n_moments",
    "epsilon",
    "rank",
    "initial_rank",
    "theta_rel",
    "max_rank",
    "t_end",
    "dt",
    "cfl_safety",
    "emission",
    "bc",
    "output_dir",
    "history_stride",
    "a_rad",
    "c",
    "c_nu",
    "x_min",
    "x_max",
    "sigma_background",
    "sigma_insert",
    "sigma_insert_lo",
    "sigma_insert_hi",
    "pulse_height",
    "pulse_half_width",
];

const CUSTOM_ONLY: &[&str] = &[
    "x_min",
    "x_max",
    "sigma_background",
    "sigma_insert",
    "sigma_insert_lo",
    "sigma_insert_hi",
    "pulse_height",
    "pulse_half_width",
];

struct Entry<'a> {
    line: usize,
    value: &'a str,
}

fn line_err(line: usize, message: impl Into<String>) -> TrtError {
    TrtError::Config {
        line,
        message: message.into(),
    }
}

fn parse_num<T: FromStr>(key: &str, e: &Entry) -> Result<T> {
    e.value
        .parse::<T>()
        .map_err(|_| line_err(e.line, format!("{key}: cannot parse '{}'", e.value)))
}

fn positive_f64(key: &str, e: &Entry) -> Result<f64> {
    let v: f64 = parse_num(key, e)?;
    if !(v > 0.0 && v.is_finite()) {
        return Err(line_err(
            e.line,
            format!("{key}: must be positive, got {v}"),
        ));
    }
    Ok(v)
}

fn finite_f64(key: &str, e: &Entry) -> Result<f64> {
    let v: f64 = parse_num(key, e)?;
    if !v.is_finite() {
        return Err(line_err(e.line, format!("{key}: must be finite")));
    }
    Ok(v)
}

fn positive_usize(key: &str, e: &Entry) -> Result<usize> {
    let v: usize = parse_num(key, e)?;
    if v == 0 {
        return Err(line_err(e.line, format!("{key}: must be at least 1")));
    }
    Ok(v)
}

fn named<T: FromStr<Err = TrtError>>(key: &str, e: &Entry) -> Result<T> {
    e.value.parse::<T>().map_err(|err| match err {
        TrtError::InvalidArgument(m) => line_err(e.line, format!("{key}: {m}")),
        other => other,
    })
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut entries: HashMap<&str, Entry> = HashMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| line_err(line, format!("expected 'key = value', got '{content}'")))?;
        let key = key.trim();
        let value = value.trim();
        if !KEYS.contains(&key) {
            return Err(line_err(line, format!("unknown key '{key}'")));
        }
        if value.is_empty() {
            return Err(line_err(line, format!("{key}: missing value")));
        }
        if let Some(prev) = entries.get(key) {
            return Err(line_err(
                line,
                format!("{key}: duplicate key (first set on line {})", prev.line),
            ));
        }
        entries.insert(key, Entry { line, value });
    }

    let mut cfg = RunConfig::default();
    let get = |k: &str| entries.get(k);
    if let Some(e) = get("scenario") {
        cfg.scenario = named("scenario", e)?;
    }
    if cfg.scenario != ScenarioName::Custom {
        if let Some((k, e)) = CUSTOM_ONLY.iter().find_map(|k| get(k).map(|e| (k, e))) {
            return Err(line_err(
                e.line,
                format!("{k}: only allowed with scenario = custom"),
            ));
        }
    }
    if let Some(e) = get("scheme") {
        cfg.scheme = named("scheme", e)?;
    }
    let ov = &mut cfg.overrides;
    if let Some(e) = get("regime") {
        ov.regime = Some(named::<Regime>("regime", e)?);
    }
    if let Some(e) = get("nx") {
        ov.nx = Some(positive_usize("nx", e)?);
    }
    if let Some(e) = get("n_moments") {
        ov.n_moments = Some(positive_usize("n_moments", e)?);
    }
    if let Some(e) = get("epsilon") {
        ov.epsilon = Some(positive_f64("epsilon", e)?);
    }
    if let Some(e) = get("rank") {
        ov.rank = Some(positive_usize("rank", e)?);
    }
    if let Some(e) = get("initial_rank") {
        ov.initial_rank = Some(positive_usize("initial_rank", e)?);
    }
    if let Some(e) = get("theta_rel") {
        let v = finite_f64("theta_rel", e)?;
        if v < 0.0 {
            return Err(line_err(
                e.line,
                format!("theta_rel: must be nonnegative, got {v}"),
            ));
        }
        ov.theta_rel = Some(v);
    }
    if let Some(e) = get("t_end") {
        ov.t_end = Some(positive_f64("t_end", e)?);
    }
    if let Some(e) = get("emission") {
        ov.emission = Some(match e.value {
            "linear" => Emission::Linear,
            "stefan_boltzmann" => Emission::StefanBoltzmann,
            other => {
                return Err(line_err(
                    e.line,
                    format!("emission: unknown model '{other}'"),
                ))
            }
        });
    }
    for (key, slot) in [
        ("a_rad", &mut ov.a_rad),
        ("c", &mut ov.c),
        ("c_nu", &mut ov.c_nu),
    ] {
        if let Some(e) = get(key) {
            *slot = Some(positive_f64(key, e)?);
        }
    }
    match (get("x_min"), get("x_max")) {
        (None, None) => {}
        (Some(lo), Some(hi)) => {
            let (a, b) = (finite_f64("x_min", lo)?, finite_f64("x_max", hi)?);
            if !(b > a) {
                return Err(line_err(hi.line, "x_max: must exceed x_min"));
            }
            ov.domain = Some((a, b));
        }
        (Some(e), None) | (None, Some(e)) => {
            return Err(line_err(e.line, "x_min and x_max must be given together"));
        }
    }
    let insert_keys = ["sigma_insert", "sigma_insert_lo", "sigma_insert_hi"];
    let insert: Vec<Option<&Entry>> = insert_keys.iter().map(|k| get(k)).collect();
    let insert_spec = if insert.iter().all(|e| e.is_some()) {
        let value = positive_f64("sigma_insert", insert[0].unwrap())?;
        let lo = finite_f64("sigma_insert_lo", insert[1].unwrap())?;
        let hi = finite_f64("sigma_insert_hi", insert[2].unwrap())?;
        if !(hi >= lo) {
            return Err(line_err(
                insert[2].unwrap().line,
                "sigma_insert_hi: must be ≥ sigma_insert_lo",
            ));
        }
        Some((value, lo, hi))
    } else if let Some(e) = insert.iter().flatten().next() {
        return Err(line_err(
            e.line,
            "sigma_insert, sigma_insert_lo and sigma_insert_hi must be given together",
        ));
    } else {
        None
    };
    let background = get("sigma_background")
        .map(|e| positive_f64("sigma_background", e))
        .transpose()?;
    if background.is_some() || insert_spec.is_some() {
        ov.sigma = Some(SigmaSpec {
            background: background.unwrap_or(0.5),
            insert: insert_spec,
        });
    }
    if let Some(e) = get("pulse_height") {
        ov.pulse_height = Some(finite_f64("pulse_height", e)?);
    }
    if let Some(e) = get("pulse_half_width") {
        ov.pulse_half_width = Some(positive_f64("pulse_half_width", e)?);
    }

    if let Some(e) = get("max_rank") {
        cfg.max_rank = Some(positive_usize("max_rank", e)?);
    }
    if let Some(e) = get("dt") {
        cfg.dt = Some(positive_f64("dt", e)?);
    }
    if let Some(e) = get("cfl_safety") {
        cfg.cfl_safety = positive_f64("cfl_safety", e)?;
    }
    if let Some(e) = get("bc") {
        cfg.bc = match e.value {
            "zero_ghost" => Boundary::ZeroGhost,
            "periodic" => Boundary::Periodic,
            other => return Err(line_err(e.line, format!("bc: unknown boundary '{other}'"))),
        };
    }
    if let Some(e) = get("output_dir") {
        cfg.output_dir = PathBuf::from(e.value);
    }
    if let Some(e) = get("history_stride") {
        cfg.history_stride = positive_usize("history_stride", e)?;
    }

    // rank bounds depend on nx and n_moments, check them against the resolved scenario
    if let Err(TrtError::InvalidArgument(msg)) =
        crate::scenarios::Scenario::resolve(cfg.scenario, &cfg.overrides)
    {
        let line = ["rank", "initial_rank", "nx", "n_moments", "scenario"]
            .iter()
            .find_map(|k| get(k).map(|e| e.line))
            .unwrap_or(0);
        return Err(line_err(line, msg));
    }
    Ok(cfg)
}
