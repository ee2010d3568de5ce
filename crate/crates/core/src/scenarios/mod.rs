//! Decision loops for the multi-task, multi-objective and constrained
//! problems, and the ways the environmental variable can be handled.

mod constrained;
mod discretize;
mod environment;
mod multitask;
mod pareto;
mod run;

pub use constrained::{constrained_select, constrained_step, ConstrainedState};
pub use discretize::{discretize_design_space, grid_resolution, DesignGrid, DEFAULT_GRID_CAP};
pub use environment::{empirical_env, env_sample, noisy_simulator_select, simulator_env_select};
pub use multitask::{mt_recommend, mt_select, Pick, RecommendationRule};
pub use pareto::{
    eps_dominated, estimate_pareto, estimate_pareto_with, mo_select, mo_terminated, nondominated, weakly_dominated,
    ParetoState, StrictOrder,
};
pub use run::{
    run_scenario, EnvironmentMode, InputMode, Problem, RecommendTarget, Scenario, ScenarioConfig, Selector, Trace,
    TraceRecord,
};
