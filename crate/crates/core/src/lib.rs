//! Solvers for one-dimensional gray thermal radiative transfer in slab
//! geometry: a modal macro-micro P_N scheme, a fixed-rank and a
//! rank-adaptive asymptotic-preserving low-rank scheme, and the Rosseland
//! diffusion limit.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod angular;
pub mod bug_adaptive;
pub mod bug_fixed;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod full_scheme;
pub mod linalg;
pub mod mesh;
pub mod runner;
pub mod scenarios;

pub use angular::{build_angular_operators, gauss_legendre, AngularOperators, QuadratureRule};
pub use bug_adaptive::{step_bug_adaptive, AugmentedFactors, TruncationConfig};
pub use bug_fixed::{step_bug_fixed, BugStepReport};
pub use config::{parse_config, RunConfig, Scheme};
pub use diagnostics::{CflBound, DiagnosticsRecord};
pub use error::{Result, TrtError};
pub use full_scheme::{step_full, Workspace};
pub use mesh::{
    AbsorptionField, Boundary, DiffKind, Emission, FullMicroState, LowRankMicroState, MacroState,
    PhysicalParams, StaggeredGrid,
};
pub use scenarios::{
    build_scenario, BuiltScenario, Regime, Scenario, ScenarioName, ScenarioOverrides,
};
