//! Canonical test problems: a rectangular temperature pulse in a uniform
//! medium and the same pulse with a strong central absorber.

use std::fmt;
use std::str::FromStr;

use crate::angular::build_angular_operators;
use crate::error::{invalid_arg, Result, TrtError};
use crate::full_scheme::Workspace;
use crate::mesh::{
    AbsorptionField, Boundary, Emission, FullMicroState, MacroState, PhysicalParams, StaggeredGrid,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioName {
    RectangularPulse,
    Absorber,
    Custom,
}

impl FromStr for ScenarioName {
    type Err = TrtError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rectangular_pulse" => Ok(Self::RectangularPulse),
            "absorber" => Ok(Self::Absorber),
            "custom" => Ok(Self::Custom),
            other => Err(invalid_arg(format!("unknown scenario '{other}'"))),
        }
    }
}

impl fmt::Display for ScenarioName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::RectangularPulse => "rectangular_pulse",
            Self::Absorber => "absorber",
            Self::Custom => "custom",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Regime {
    #[default]
    Kinetic,
    Diffusive,
}

impl FromStr for Regime {
    type Err = TrtError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kinetic" => Ok(Self::Kinetic),
            "diffusive" => Ok(Self::Diffusive),
            other => Err(invalid_arg(format!("unknown regime '{other}'"))),
        }
    }
}

/// Piecewise constant absorption: a background value with an optional
/// insert on [lo, hi] (inclusive).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaSpec {
    pub background: f64,
    pub insert: Option<(f64, f64, f64)>,
}

impl SigmaSpec {
    pub fn at(&self, x: f64) -> f64 {
        match self.insert {
            Some((value, lo, hi)) if lo <= x && x <= hi => value,
            _ => self.background,
        }
    }
}

/// Optional replacements for scenario defaults. Domain, absorption and
/// pulse shape may only be changed for the custom scenario.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScenarioOverrides {
    pub regime: Option<Regime>,
    pub nx: Option<usize>,
    pub n_moments: Option<usize>,
    pub epsilon: Option<f64>,
    pub t_end: Option<f64>,
    pub rank: Option<usize>,
    pub initial_rank: Option<usize>,
    pub theta_rel: Option<f64>,
    pub emission: Option<Emission>,
    pub a_rad: Option<f64>,
    pub c: Option<f64>,
    pub c_nu: Option<f64>,
    pub domain: Option<(f64, f64)>,
    pub sigma: Option<SigmaSpec>,
    pub pulse_height: Option<f64>,
    pub pulse_half_width: Option<f64>,
}

impl ScenarioOverrides {
    pub fn has_shape_overrides(&self) -> bool {
        self.domain.is_some()
            || self.sigma.is_some()
            || self.pulse_height.is_some()
            || self.pulse_half_width.is_some()
    }
}

/// Resolved problem definition.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: ScenarioName,
    pub regime: Regime,
    pub domain: (f64, f64),
    pub sigma: SigmaSpec,
    /// T0(x) = pulse_height / σ(x) for |x| ≤ pulse_half_width, else 0.
    pub pulse_height: f64,
    pub pulse_half_width: f64,
    pub nx: usize,
    pub n_moments: usize,
    pub epsilon: f64,
    pub t_end: f64,
    pub rank: usize,
    pub initial_rank: usize,
    pub theta_rel: f64,
    pub emission: Emission,
    pub a_rad: f64,
    pub c: f64,
    pub c_nu: f64,
}

impl Scenario {
    pub fn defaults(name: ScenarioName, regime: Regime) -> Self {
        let sigma = match name {
            ScenarioName::Absorber => SigmaSpec {
                background: 0.5,
                insert: Some((5.0, -0.25, 0.25)),
            },
            _ => SigmaSpec {
                background: 0.5,
                insert: None,
            },
        };
        let (nx, epsilon, rank) = match regime {
            Regime::Kinetic => (501, 1.0, 15),
            Regime::Diffusive => (201, 1e-5, 1),
        };
        Self {
            name,
            regime,
            domain: (-10.0, 10.0),
            sigma,
            pulse_height: 100.0,
            pulse_half_width: 0.5,
            nx,
            n_moments: 100,
            epsilon,
            t_end: 1.5,
            rank,
            initial_rank: 1,
            theta_rel: 5e-2,
            emission: Emission::Linear,
            a_rad: 1.0,
            c: 1.0,
            c_nu: 1.0,
        }
    }

    pub fn resolve(name: ScenarioName, ov: &ScenarioOverrides) -> Result<Self> {
        if name != ScenarioName::Custom && ov.has_shape_overrides() {
            return Err(invalid_arg(format!(
                "domain, absorption and pulse shape are fixed for scenario '{name}'"
            )));
        }
        let mut s = Self::defaults(name, ov.regime.unwrap_or_default());
        macro_rules! take {
            ($($field:ident),*) => { $( if let Some(v) = ov.$field { s.$field = v; } )* };
        }
        take!(
            nx,
            n_moments,
            epsilon,
            t_end,
            rank,
            initial_rank,
            theta_rel,
            emission,
            a_rad,
            c,
            c_nu,
            domain,
            sigma,
            pulse_height,
            pulse_half_width
        );
        let cap = (s.nx + 1).min(s.n_moments);
        if ov.rank.is_none() {
            s.rank = s.rank.min(cap);
        }
        if ov.initial_rank.is_none() {
            s.initial_rank = s.initial_rank.min(cap);
        }
        s.validate()?;
        Ok(s)
    }

    fn validate(&self) -> Result<()> {
        if self.nx == 0 || self.n_moments == 0 {
            return Err(invalid_arg("nx and n_moments must be positive"));
        }
        if !(self.domain.1 > self.domain.0) {
            return Err(invalid_arg("domain must have x_max > x_min"));
        }
        let sigmas = [
            self.sigma.background,
            self.sigma.insert.map_or(1.0, |i| i.0),
        ];
        if sigmas.iter().any(|v| !(*v > 0.0)) {
            return Err(invalid_arg("absorption values must be positive"));
        }
        if !(self.t_end > 0.0) {
            return Err(invalid_arg("t_end must be positive"));
        }
        if !(self.theta_rel >= 0.0) {
            return Err(invalid_arg("theta_rel must be nonnegative"));
        }
        let cap = (self.nx + 1).min(self.n_moments);
        for (label, r) in [("rank", self.rank), ("initial_rank", self.initial_rank)] {
            if r == 0 || r > cap {
                return Err(invalid_arg(format!("{label} {r} outside [1, {cap}]")));
            }
        }
        Ok(())
    }

    pub fn initial_temperature(&self, x: f64) -> f64 {
        if x.abs() <= self.pulse_half_width {
            self.pulse_height / self.sigma.at(x)
        } else {
            0.0
        }
    }
}

/// Everything needed to start a run.
#[derive(Debug, Clone)]
pub struct BuiltScenario {
    pub scenario: Scenario,
    pub grid: StaggeredGrid,
    pub params: PhysicalParams,
    pub sigma: AbsorptionField,
    pub macro_state: MacroState,
    pub micro: FullMicroState,
}

impl BuiltScenario {
    pub fn workspace(&self, bc: Boundary) -> Result<Workspace> {
        Workspace::new(
            self.grid.clone(),
            self.params,
            self.sigma.clone(),
            build_angular_operators(self.scenario.n_moments)?,
            bc,
        )
    }
}

/// Builds the grid, material data and equilibrium initial state.
pub fn build_scenario(name: ScenarioName, overrides: &ScenarioOverrides) -> Result<BuiltScenario> {
    let scenario = Scenario::resolve(name, overrides)?;
    let grid = StaggeredGrid::new(scenario.domain.0, scenario.domain.1, scenario.nx)?;
    let params = PhysicalParams::new(
        scenario.epsilon,
        scenario.c,
        scenario.a_rad,
        scenario.c_nu,
        scenario.emission,
    )?;
    let spec = scenario.sigma;
    let sigma = AbsorptionField::from_fn(&grid, |x| spec.at(x))?;
    let temperature = grid
        .centers
        .iter()
        .map(|&x| scenario.initial_temperature(x))
        .collect();
    let macro_state = MacroState::with_temperature(temperature);
    let micro = FullMicroState::zeros(grid.n_interfaces(), scenario.n_moments);
    Ok(BuiltScenario {
        scenario,
        grid,
        params,
        sigma,
        macro_state,
        micro,
    })
}
