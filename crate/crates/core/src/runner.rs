//! Time loop, CSV output and multi-scheme sweeps.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::bug_adaptive::{step_bug_adaptive, TruncationConfig};
use crate::bug_fixed::step_bug_fixed;
use crate::config::{RunConfig, Scheme};
use crate::diagnostics::{
    cfl_bound, energy, l2_relative_difference, mass, relative_mass_error, rosseland_step, CflBound,
    DiagnosticsRecord,
};
use crate::error::{Result, TrtError};
use crate::full_scheme::{step_full, Workspace};
use crate::mesh::{beta_fields, scalar_flux, FullMicroState, LowRankMicroState, MacroState};
use crate::scenarios::{build_scenario, BuiltScenario};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistoryRow {
    pub record: DiagnosticsRecord,
    pub cfl_violation: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MicroSnapshot {
    Full(FullMicroState),
    LowRank(LowRankMicroState),
    None,
}

impl MicroSnapshot {
    fn norm_sq(&self, ws: &Workspace) -> f64 {
        match self {
            Self::Full(g) => g.norm_sq(&ws.grid),
            Self::LowRank(s) => s.norm_sq(&ws.grid),
            Self::None => 0.0,
        }
    }

    fn rank(&self, n_moments: usize) -> usize {
        match self {
            Self::Full(_) => n_moments,
            Self::LowRank(s) => s.rank(),
            Self::None => 0,
        }
    }

    fn is_finite(&self) -> bool {
        match self {
            Self::Full(g) => g.g.iter().all(|v| v.is_finite()),
            Self::LowRank(s) => s.is_finite(),
            Self::None => true,
        }
    }
}

/// One scheme advancing a scenario.
pub struct Simulation {
    pub scheme: Scheme,
    pub ws: Workspace,
    pub macro_state: MacroState,
    pub micro: MicroSnapshot,
    pub truncation: TruncationConfig,
    pub time: f64,
    pub steps: usize,
}

impl Simulation {
    pub fn new(built: &BuiltScenario, config: &RunConfig) -> Result<Self> {
        let ws = built.workspace(config.bc)?;
        let sc = &built.scenario;
        let micro = match config.scheme {
            Scheme::Full => MicroSnapshot::Full(built.micro.clone()),
            Scheme::BugFixed => MicroSnapshot::LowRank(initial_low_rank(built, sc.rank)?),
            Scheme::BugAdaptive => {
                MicroSnapshot::LowRank(initial_low_rank(built, sc.initial_rank)?)
            }
            Scheme::Rosseland => MicroSnapshot::None,
        };
        let max_rank = config.max_rank.unwrap_or(2 * sc.n_moments);
        let truncation = TruncationConfig::new(sc.theta_rel, max_rank)?;
        Ok(Self {
            scheme: config.scheme,
            ws,
            macro_state: built.macro_state.clone(),
            micro,
            truncation,
            time: 0.0,
            steps: 0,
        })
    }

    pub fn rank(&self) -> usize {
        self.micro.rank(self.ws.n_moments())
    }

    pub fn diagnostics(&self, m0: f64, dt: f64) -> Result<DiagnosticsRecord> {
        let p = &self.ws.params;
        let g = &self.ws.grid;
        let m = mass(&self.macro_state, p, g);
        Ok(DiagnosticsRecord {
            time: self.time,
            energy: energy(&self.macro_state, self.micro.norm_sq(&self.ws), p, g),
            mass: m,
            rel_mass_error: relative_mass_error(m, m0)?,
            rank: self.rank(),
            dt,
        })
    }

    pub fn step(&mut self, dt: f64) -> Result<()> {
        let ws = &self.ws;
        match (&self.micro, self.scheme) {
            (MicroSnapshot::Full(g), _) => {
                let (m, g) = step_full(&self.macro_state, g, ws, dt)?;
                self.macro_state = m;
                self.micro = MicroSnapshot::Full(g);
            }
            (MicroSnapshot::LowRank(s), Scheme::BugFixed) => {
                let (m, s, _) = step_bug_fixed(&self.macro_state, s, ws, dt)?;
                self.macro_state = m;
                self.micro = MicroSnapshot::LowRank(s);
            }
            (MicroSnapshot::LowRank(s), _) => {
                let (m, s, _) = step_bug_adaptive(&self.macro_state, s, ws, dt, &self.truncation)?;
                self.macro_state = m;
                self.micro = MicroSnapshot::LowRank(s);
            }
            (MicroSnapshot::None, _) => {
                let t = rosseland_step(
                    &self.macro_state.temperature,
                    &ws.params,
                    &ws.grid,
                    &ws.sigma,
                    dt,
                    ws.bc,
                )?;
                self.macro_state = MacroState::with_temperature(t);
            }
        }
        self.steps += 1;
        if !self.macro_state.is_finite() || !self.micro.is_finite() {
            return Err(TrtError::NonFinite { step: self.steps });
        }
        Ok(())
    }

    /// Largest stable explicit step of the Rosseland update at the current state.
    pub fn rosseland_stability_dt(&self) -> f64 {
        let ws = &self.ws;
        let p = &ws.params;
        let (beta_c, beta_i) = beta_fields(&self.macro_state, p.emission, ws.bc);
        let pref = 2.0 * p.a_rad * p.c / (3.0 * p.c_nu);
        let dx2 = ws.grid.dx * ws.grid.dx;
        let mut dt = f64::INFINITY;
        for i in 0..ws.grid.n_cells {
            let coeff = pref / (1.0 + 2.0 * p.a_rad * beta_c[i] / p.c_nu);
            let rate = coeff
                * (beta_i[i] / ws.sigma.at_interfaces[i]
                    + beta_i[i + 1] / ws.sigma.at_interfaces[i + 1])
                / dx2;
            if rate > 0.0 {
                dt = dt.min(1.0 / rate);
            }
        }
        dt
    }
}

fn initial_low_rank(built: &BuiltScenario, rank: usize) -> Result<LowRankMicroState> {
    let g = &built.micro.g;
    if g.iter().all(|v| *v == 0.0) {
        LowRankMicroState::zeros(g.nrows(), g.ncols(), rank)
    } else {
        LowRankMicroState::from_dense(g, rank)
    }
}

/// Results of an in-memory run; `history` holds every step.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub scheme: Scheme,
    pub cfl: CflBound,
    pub dt: f64,
    pub initial: DiagnosticsRecord,
    pub history: Vec<HistoryRow>,
    pub centers: Vec<f64>,
    pub macro_state: MacroState,
    pub phi: Vec<f64>,
    pub micro: MicroSnapshot,
}

impl RunOutput {
    pub fn max_rank(&self) -> usize {
        self.history
            .iter()
            .map(|r| r.record.rank)
            .max()
            .unwrap_or(0)
    }
}

/// Step size used by a run: the override, or the CFL bound times the safety factor.
pub fn run_dt(config: &RunConfig, cfl: &CflBound) -> f64 {
    config.dt.unwrap_or(config.cfl_safety * cfl.dt)
}

pub fn cfl_report(config: &RunConfig) -> Result<CflBound> {
    let built = build_scenario(config.scenario, &config.overrides)?;
    let ws = built.workspace(config.bc)?;
    cfl_bound(&ws.params, &ws.grid, &ws.angular, &ws.sigma)
}

fn step_count(t_end: f64, dt: f64) -> usize {
    ((t_end / dt) - 1e-9).ceil().max(1.0) as usize
}

pub fn simulate(config: &RunConfig) -> Result<RunOutput> {
    let built = build_scenario(config.scenario, &config.overrides)?;
    simulate_built(&built, config)
}

pub fn simulate_built(built: &BuiltScenario, config: &RunConfig) -> Result<RunOutput> {
    let mut sim = Simulation::new(built, config)?;
    let cfl = cfl_bound(&sim.ws.params, &sim.ws.grid, &sim.ws.angular, &sim.ws.sigma)?;
    let dt = run_dt(config, &cfl);
    let t_end = built.scenario.t_end;
    let n_steps = step_count(t_end, dt);
    let m0 = mass(&sim.macro_state, &sim.ws.params, &sim.ws.grid);
    let initial = sim.diagnostics(m0, dt)?;
    let mut history = Vec::with_capacity(n_steps);
    for k in 0..n_steps {
        let t_next = if k + 1 == n_steps {
            t_end
        } else {
            (k + 1) as f64 * dt
        };
        let h = t_next - k as f64 * dt;
        let limit = match sim.scheme {
            Scheme::Rosseland => sim.rosseland_stability_dt(),
            _ => cfl.dt,
        };
        sim.step(h)?;
        sim.time = t_next;
        history.push(HistoryRow {
            record: sim.diagnostics(m0, h)?,
            cfl_violation: h > limit * (1.0 + 1e-12),
        });
    }
    let phi = scalar_flux(&sim.macro_state, &sim.ws.params);
    Ok(RunOutput {
        scheme: sim.scheme,
        cfl,
        dt,
        initial,
        history,
        centers: built.grid.centers.clone(),
        macro_state: sim.macro_state,
        phi,
        micro: sim.micro,
    })
}

pub const HISTORY_HEADER: &str = "t,energy,mass,rel_mass_error,rank,dt,cfl_violation";
pub const PROFILES_HEADER: &str = "x,T,Phi,h";
pub const COMPARISON_HEADER: &str = "scheme_a,scheme_b,l2_rel_T,l2_rel_Phi";

pub fn history_csv(rows: &[HistoryRow], stride: usize) -> String {
    let mut out = String::from(HISTORY_HEADER);
    out.push('\n');
    let n = rows.len();
    for (k, row) in rows.iter().enumerate() {
        if (k + 1) % stride != 0 && k + 1 != n {
            continue;
        }
        let r = &row.record;
        let _ = writeln!(
            out,
            "{:?},{:?},{:?},{:?},{},{:?},{}",
            r.time,
            r.energy,
            r.mass,
            r.rel_mass_error,
            r.rank,
            r.dt,
            u8::from(row.cfl_violation)
        );
    }
    out
}

pub fn profiles_csv(output: &RunOutput) -> String {
    let mut out = String::from(PROFILES_HEADER);
    out.push('\n');
    let m = &output.macro_state;
    for i in 0..output.centers.len() {
        let _ = writeln!(
            out,
            "{:?},{:?},{:?},{:?}",
            output.centers[i], m.temperature[i], output.phi[i], m.h_meso[i]
        );
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub scheme_a: Scheme,
    pub scheme_b: Scheme,
    pub l2_rel_t: f64,
    pub l2_rel_phi: f64,
}

pub fn comparison_csv(rows: &[ComparisonRow]) -> String {
    let mut out = String::from(COMPARISON_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{:?},{:?}",
            r.scheme_a, r.scheme_b, r.l2_rel_t, r.l2_rel_phi
        );
    }
    out
}

/// Summary of a run written to disk.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub output: RunOutput,
    pub history_path: PathBuf,
    pub profiles_path: PathBuf,
}

fn write_outputs(dir: &Path, output: RunOutput, stride: usize) -> Result<RunSummary> {
    fs::create_dir_all(dir)?;
    let history_path = dir.join("history.csv");
    let profiles_path = dir.join("profiles.csv");
    fs::write(&history_path, history_csv(&output.history, stride))?;
    fs::write(&profiles_path, profiles_csv(&output))?;
    Ok(RunSummary {
        output,
        history_path,
        profiles_path,
    })
}

pub fn run_simulation(config: &RunConfig) -> Result<RunSummary> {
    let output = simulate(config)?;
    write_outputs(&config.output_dir, output, config.history_stride)
}

/// Runs several schemes on the same scenario and compares final profiles
/// pairwise, with the second scheme of each pair as reference.
pub fn sweep(
    config: &RunConfig,
    schemes: &[Scheme],
    concurrent: bool,
) -> Result<Vec<ComparisonRow>> {
    let built = build_scenario(config.scenario, &config.overrides)?;
    let ws = built.workspace(config.bc)?;
    let cfl = cfl_bound(&ws.params, &ws.grid, &ws.angular, &ws.sigma)?;
    let shared_dt = run_dt(config, &cfl);
    let configs: Vec<RunConfig> = schemes
        .iter()
        .map(|&s| RunConfig {
            scheme: s,
            dt: Some(shared_dt),
            ..config.clone()
        })
        .collect();
    let results: Vec<Result<RunOutput>> = if concurrent {
        std::thread::scope(|scope| {
            let handles: Vec<_> = configs
                .iter()
                .map(|c| scope.spawn(|| simulate_built(&built, c)))
                .collect();
            handles
                .into_iter()
                .map(|h| {
                    h.join()
                        .unwrap_or_else(|_| Err(TrtError::Internal("worker panicked".into())))
                })
                .collect()
        })
    } else {
        configs.iter().map(|c| simulate_built(&built, c)).collect()
    };
    let mut outputs = Vec::with_capacity(results.len());
    for (c, r) in configs.iter().zip(results) {
        let out = r?;
        let dir = config.output_dir.join(c.scheme.as_str());
        outputs.push(write_outputs(&dir, out, config.history_stride)?.output);
    }
    let mut rows = Vec::new();
    for i in 0..outputs.len() {
        for j in (i + 1)..outputs.len() {
            let (a, b) = (&outputs[i], &outputs[j]);
            rows.push(ComparisonRow {
                scheme_a: a.scheme,
                scheme_b: b.scheme,
                l2_rel_t: l2_relative_difference(
                    &a.macro_state.temperature,
                    &b.macro_state.temperature,
                    &built.grid,
                )?,
                l2_rel_phi: l2_relative_difference(&a.phi, &b.phi, &built.grid)?,
            });
        }
    }
    fs::create_dir_all(&config.output_dir)?;
    fs::write(
        config.output_dir.join("comparison.csv"),
        comparison_csv(&rows),
    )?;
    Ok(rows)
}
