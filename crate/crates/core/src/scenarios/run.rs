use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::baselines::{bovo_select, bqoucb_select, rs_select, us_select_from_std};
use crate::error::{Error, Result};
use crate::gp::{beta, fit_hyperparameters, BetaSchedule, GpPosterior, GridPosterior, KernelSpec, Observation, PointwiseBounds};
use crate::metrics::{constrained_regret, ground_truth, hypervolume_gap, regret, GroundTruth};
use crate::risk::{EnvDistribution, RiskBoundTable};
use crate::scenarios::constrained::{constrained_select, constrained_step, ConstrainedState};
use crate::scenarios::environment::{empirical_env, env_sample, weighted_std_argmax};
use crate::scenarios::multitask::{mt_recommend, mt_select, Pick, RecommendationRule};
use crate::scenarios::pareto::{estimate_pareto_with, mo_select, ParetoState, StrictOrder};
use crate::Scalar;

/// Random stream offsets derived from the run seed.
const ENV_STREAM: u64 = 0;
const NOISE_STREAM: u64 = 1;
const BASELINE_STREAM: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputMode {
    /// The GP models `f(x, w)` on the joint space.
    Joint,
    /// The GP models `f(x̃ + ξ)` and the columns are input perturbations.
    NoisyInput,
}

/// A finite problem instance: design grid, column grid with its true
/// distribution, and the oracle tabulated on every (design, column) pair.
#[derive(Debug, Clone)]
pub struct Problem<T> {
    design: Vec<Vec<T>>,
    distribution: EnvDistribution<T>,
    lattice: Vec<Vec<T>>,
    values: Vec<T>,
    input_mode: InputMode,
}

impl<T: Scalar> Problem<T> {
    /// `values[i · |Ω| + j] = f(x_i, w_j)`.
    pub fn joint(design: Vec<Vec<T>>, env: EnvDistribution<T>, values: Vec<T>) -> Result<Self> {
        let lattice = design
            .iter()
            .flat_map(|x| env.support().iter().map(move |w| [x.as_slice(), w.as_slice()].concat()))
            .collect();
        Self::build(design, env, lattice, values, InputMode::Joint)
    }

    /// `values[i · |Δ| + j] = f(x_i + ξ_j)`.
    pub fn noisy_input(design: Vec<Vec<T>>, noise: EnvDistribution<T>, values: Vec<T>) -> Result<Self> {
        let mut lattice = Vec::with_capacity(design.len() * noise.len());
        for x in &design {
            for xi in noise.support() {
                if xi.len() != x.len() {
                    return Err(Error::invalid("perturbation and design dimensions differ"));
                }
                lattice.push(x.iter().zip(xi).map(|(&a, &b)| a + b).collect());
            }
        }
        Self::build(design, noise, lattice, values, InputMode::NoisyInput)
    }

    fn build(
        design: Vec<Vec<T>>,
        distribution: EnvDistribution<T>,
        lattice: Vec<Vec<T>>,
        values: Vec<T>,
        input_mode: InputMode,
    ) -> Result<Self> {
        if design.is_empty() {
            return Err(Error::invalid("empty design grid"));
        }
        if values.len() != design.len() * distribution.len() {
            return Err(Error::invalid(format!(
                "expected {} oracle values, got {}",
                design.len() * distribution.len(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("oracle values must be finite"));
        }
        Ok(Self {
            design,
            distribution,
            lattice,
            values,
            input_mode,
        })
    }

    pub fn design(&self) -> &[Vec<T>] {
        &self.design
    }

    pub fn distribution(&self) -> &EnvDistribution<T> {
        &self.distribution
    }

    pub fn lattice(&self) -> &[Vec<T>] {
        &self.lattice
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn input_mode(&self) -> InputMode {
        self.input_mode
    }

    pub fn n_design(&self) -> usize {
        self.design.len()
    }

    pub fn n_env(&self) -> usize {
        self.distribution.len()
    }

    pub fn value(&self, design: usize, env: usize) -> T {
        self.values[design * self.n_env() + env]
    }

    /// Dimension of the GP input.
    pub fn input_dim(&self) -> usize {
        self.lattice[0].len()
    }

    pub fn ground_truth(&self, alpha: T, threshold: Option<T>, reference: Option<(T, T)>) -> Result<GroundTruth<T>> {
        ground_truth(&self.values, &self.distribution, alpha, threshold, reference)
    }

    fn observation(&self, design: usize, env: usize, y: T, step: usize) -> Observation<T> {
        match self.input_mode {
            InputMode::Joint => Observation::new(
                self.design[design].clone(),
                self.distribution.support()[env].clone(),
                y,
                step,
            ),
            InputMode::NoisyInput => {
                Observation::new(self.lattice[design * self.n_env() + env].clone(), Vec::new(), y, step)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    MultiTask,
    MultiObjective,
    Constrained,
}

/// Rule choosing the next design point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selector {
    /// The scenario's own acquisition rule.
    Proposed,
    Random,
    Uncertainty,
    /// Maximize the F1 upper bound.
    MeanUcb,
    /// Maximize the F2 upper bound.
    VarianceUcb,
}

/// Objective whose lower bound ranks past selections for the recommendation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RecommendTarget {
    #[default]
    G,
    F1,
    F2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EnvironmentMode {
    /// `w ~ p` with `p` known.
    #[default]
    SampledKnown,
    /// `w ~ p`, bounds computed with the empirical distribution of observed `w`.
    SampledEmpirical,
    /// `w` chosen where the posterior is most uncertain.
    Simulator,
}

#[derive(Debug, Clone)]
pub struct ScenarioConfig<T> {
    pub scenario: Scenario,
    pub selector: Selector,
    pub recommend_target: RecommendTarget,
    pub alpha: T,
    pub epsilon: (T, T),
    pub threshold: Option<T>,
    pub environment: EnvironmentMode,
    pub budget: usize,
    pub rule: RecommendationRule,
    pub kernel: KernelSpec<T>,
    pub noise_variance: T,
    pub beta: BetaSchedule<T>,
    /// Refit kernel hyperparameters every this many observations (0 disables).
    pub refit_interval: usize,
    pub strict_order: StrictOrder,
    /// Hypervolume reference override.
    pub reference: Option<(T, T)>,
}

impl<T: Scalar> ScenarioConfig<T> {
    /// Defaults for the given scenario: α = 0.5, ε = (0.1, 0.1), σ² = 1e-4,
    /// B = 2, δ = 0.1 with divisor 3.
    pub fn new(scenario: Scenario, kernel: KernelSpec<T>, budget: usize) -> Self {
        Self {
            scenario,
            selector: Selector::Proposed,
            recommend_target: RecommendTarget::G,
            alpha: T::lit(0.5),
            epsilon: (T::lit(0.1), T::lit(0.1)),
            threshold: None,
            environment: EnvironmentMode::SampledKnown,
            budget,
            rule: RecommendationRule::PerStepBounds,
            kernel,
            noise_variance: T::lit(1e-4),
            beta: BetaSchedule::new(T::lit(2.0), T::lit(0.1), 3).expect("valid default schedule"),
            refit_interval: 0,
            strict_order: StrictOrder::AllCoordinates,
            reference: None,
        }
    }

    pub fn validate(&self, problem: &Problem<T>) -> Result<()> {
        if !(self.alpha >= T::zero() && self.alpha <= T::one()) {
            return Err(Error::invalid("alpha must lie in [0, 1]"));
        }
        if !(self.epsilon.0 >= T::zero() && self.epsilon.1 >= T::zero()) {
            return Err(Error::invalid("epsilon must be nonnegative"));
        }
        if self.scenario == Scenario::Constrained {
            match self.threshold {
                Some(h) if h < T::zero() => {}
                Some(h) => return Err(Error::invalid(format!("threshold h must be negative, got {h}"))),
                None => return Err(Error::invalid("the constrained scenario needs a threshold h")),
            }
        }
        self.kernel.check_dim(problem.input_dim())?;
        if !(self.noise_variance > T::zero()) {
            return Err(Error::invalid("noise variance must be positive"));
        }
        Ok(())
    }
}

/// State after one step, as seen by the scenario logic.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord<T> {
    pub step: usize,
    pub design: usize,
    pub env: usize,
    pub x: Vec<T>,
    pub w: Vec<T>,
    pub y: T,
    /// Confidence multiplier used for the selection at this step.
    pub beta: T,
    pub recommendation: Option<usize>,
    pub regret: Option<T>,
    pub hv_gap: Option<T>,
    /// `(|Π̂|, |M|, |U|)` for the multi-objective scenario.
    pub set_sizes: Option<(usize, usize, usize)>,
    pub terminated: bool,
    /// Whether `f` lies inside the updated pointwise bounds everywhere.
    pub contained: bool,
    /// Whether the exact F1 and F2 lie inside the updated objective bounds.
    pub lifted_contained: bool,
}

#[derive(Debug, Clone)]
pub struct Trace<T> {
    pub records: Vec<TraceRecord<T>>,
    pub initial_contained: bool,
    pub initial_lifted_contained: bool,
    pub terminated: bool,
    pub final_pareto: Option<ParetoState<T>>,
    pub final_constrained: Option<ConstrainedState<T>>,
    pub truth: GroundTruth<T>,
    /// Wall-clock duration of each step in milliseconds.
    pub elapsed_ms: Vec<f64>,
}

impl<T: Scalar> Trace<T> {
    /// Pointwise containment at the start and after every step.
    pub fn contained_throughout(&self) -> bool {
        self.initial_contained && self.records.iter().all(|r| r.contained)
    }

    pub fn lifted_contained_throughout(&self) -> bool {
        self.initial_lifted_contained && self.records.iter().all(|r| r.lifted_contained)
    }

    pub fn final_recommendation(&self) -> Option<usize> {
        self.records.last().and_then(|r| r.recommendation)
    }
}

struct Bounds<T> {
    table: RiskBoundTable<T>,
    pointwise: PointwiseBounds<T>,
    beta: T,
}

enum State<T> {
    None,
    Pareto(ParetoState<T>),
    Constrained(ConstrainedState<T>),
}

impl<T: Scalar> State<T> {
    fn terminated(&self) -> bool {
        match self {
            State::None => false,
            State::Pareto(s) => s.terminated,
            State::Constrained(s) => s.terminated,
        }
    }
}

struct Runner<'a, T: Scalar> {
    config: &'a ScenarioConfig<T>,
    problem: &'a Problem<T>,
    truth: GroundTruth<T>,
    model: GpPosterior<T>,
    grid: GridPosterior<T>,
    observed_env: Vec<usize>,
}

impl<T: Scalar> Runner<'_, T> {
    fn bound_distribution(&self) -> Result<EnvDistribution<T>> {
        let p = self.problem.distribution();
        match self.config.environment {
            EnvironmentMode::SampledEmpirical if self.observed_env.is_empty() => {
                EnvDistribution::uniform(p.support().to_vec())
            }
            EnvironmentMode::SampledEmpirical => empirical_env(p.support(), &self.observed_env),
            _ => Ok(p.clone()),
        }
    }

    fn bounds(&mut self, step: usize) -> Result<Bounds<T>> {
        self.grid.sync(&self.model);
        let b = beta(&self.model, &self.config.beta);
        let pointwise = PointwiseBounds::from_parts(
            self.problem.n_design(),
            self.problem.n_env(),
            self.grid.mean(),
            &self.grid.variance(),
            b,
        )?;
        let p = self.bound_distribution()?;
        let table = RiskBoundTable::compute(step, &pointwise, &p)?.with_scalarization(self.config.alpha)?;
        Ok(Bounds {
            table,
            pointwise,
            beta: b,
        })
    }

    fn state(&self, table: &RiskBoundTable<T>) -> Result<State<T>> {
        Ok(match self.config.scenario {
            Scenario::MultiTask => State::None,
            Scenario::MultiObjective => {
                State::Pareto(estimate_pareto_with(table, self.config.epsilon, self.config.strict_order)?)
            }
            Scenario::Constrained => {
                let h = self.config.threshold.expect("validated");
                State::Constrained(constrained_step(table, h, self.config.epsilon)?)
            }
        })
    }

    fn containment(&self, b: &Bounds<T>) -> (bool, bool) {
        let pointwise = b.pointwise.contains(self.problem.values());
        let lifted = (0..self.problem.n_design()).all(|x| {
            b.table.f1()[x].contains(self.truth.f1[x]) && b.table.f2()[x].contains(self.truth.f2[x])
        });
        (pointwise, lifted)
    }

    fn target_lower(&self, table: &RiskBoundTable<T>) -> Vec<T> {
        match self.config.recommend_target {
            RecommendTarget::G => table.g().expect("scalarized").iter().map(|i| i.lower).collect(),
            RecommendTarget::F1 => table.f1().iter().map(|i| i.lower).collect(),
            RecommendTarget::F2 => table.f2().iter().map(|i| i.lower).collect(),
        }
    }

    fn select_design(&self, b: &Bounds<T>, state: &State<T>, rng: &mut ChaCha8Rng) -> Result<usize> {
        match self.config.selector {
            Selector::Proposed => match state {
                State::None => mt_select(&b.table),
                State::Pareto(s) => mo_select(s, &b.table),
                State::Constrained(s) => constrained_select(s, &b.table),
            },
            Selector::Random => rs_select(self.problem.n_design(), rng),
            Selector::Uncertainty => {
                let p = self.bound_distribution()?;
                us_select_from_std(&self.grid.std_dev(), self.problem.n_design(), p.weights())
            }
            Selector::MeanUcb => bqoucb_select(&b.table),
            Selector::VarianceUcb => bovo_select(&b.table),
        }
    }

    fn select_env(&self, design: usize, rng: &mut ChaCha8Rng) -> Result<usize> {
        let p = self.problem.distribution();
        match self.config.environment {
            EnvironmentMode::SampledKnown | EnvironmentMode::SampledEmpirical => Ok(env_sample(p, rng)),
            EnvironmentMode::Simulator => {
                let m = self.problem.n_env();
                let sd = self.grid.std_dev();
                let row = &sd[design * m..(design + 1) * m];
                let weights = match self.problem.input_mode() {
                    InputMode::Joint => None,
                    InputMode::NoisyInput => Some(p.weights()),
                };
                weighted_std_argmax(row, weights)
            }
        }
    }

    fn maybe_refit(&mut self) -> Result<()> {
        let every = self.config.refit_interval;
        let n = self.model.len();
        if every == 0 || n < 2 || !n.is_multiple_of(every) {
            return Ok(());
        }
        let outcome = fit_hyperparameters(self.model.observations(), self.model.kernel(), self.config.noise_variance)?;
        if let Some(w) = &outcome.warning {
            log::warn!("{w}");
        }
        self.model.set_kernel(outcome.kernel)
    }
}

/// Runs one seeded scenario until the budget is spent or, for the proposed
/// multi-objective and constrained rules, until termination.
pub fn run_scenario<T: Scalar>(config: &ScenarioConfig<T>, problem: &Problem<T>, seed: u64) -> Result<Trace<T>> {
    config.validate(problem)?;
    let truth = problem.ground_truth(config.alpha, config.threshold, config.reference)?;
    let mut runner = Runner {
        config,
        problem,
        truth,
        model: GpPosterior::new(config.kernel.clone(), config.noise_variance)?,
        grid: GridPosterior::new(problem.lattice().to_vec()),
        observed_env: Vec::new(),
    };
    let mut env_rng = stream(seed, ENV_STREAM);
    let mut noise_rng = stream(seed, NOISE_STREAM);
    let mut baseline_rng = stream(seed, BASELINE_STREAM);

    let mut current = runner.bounds(0)?;
    let (initial_contained, initial_lifted_contained) = runner.containment(&current);
    let mut state = runner.state(&current.table)?;
    let stops = config.selector == Selector::Proposed && config.scenario != Scenario::MultiTask;
    let mut terminated = stops && state.terminated();

    let mut picks: Vec<Pick<T>> = Vec::new();
    let mut records = Vec::with_capacity(config.budget);
    let mut elapsed_ms = Vec::with_capacity(config.budget);
    let noise_sd = config.noise_variance.sqrt();

    for step in 1..=config.budget {
        if terminated {
            break;
        }
        let started = Instant::now();
        let result: Result<()> = (|| {
            let design = runner.select_design(&current, &state, &mut baseline_rng)?;
            picks.push(Pick {
                design,
                lower_at_selection: runner.target_lower(&current.table)[design],
            });
            let env = runner.select_env(design, &mut env_rng)?;
            let z: f64 = noise_rng.sample(StandardNormal);
            let y = problem.value(design, env) + noise_sd * T::lit(z);
            runner.model.update(problem.observation(design, env, y, step))?;
            runner.observed_env.push(env);
            runner.maybe_refit()?;

            let selected_beta = current.beta;
            current = runner.bounds(step)?;
            state = runner.state(&current.table)?;
            let (contained, lifted_contained) = runner.containment(&current);
            terminated = stops && state.terminated();

            let (recommendation, regret_value, hv_gap, set_sizes) = match &state {
                State::None => {
                    let lower = runner.target_lower(&current.table);
                    let rec = mt_recommend(&picks, config.rule, &lower)?;
                    (Some(rec), Some(regret(&runner.truth, rec)), None, None)
                }
                State::Pareto(s) => (
                    None,
                    None,
                    Some(hypervolume_gap(&runner.truth, &s.pareto_hat)?),
                    Some((s.pareto_hat.len(), s.potential.len(), s.uncertain.len())),
                ),
                State::Constrained(s) => (
                    s.recommendation,
                    constrained_regret(&runner.truth, s.recommendation),
                    None,
                    None,
                ),
            };
            let obs = problem.observation(design, env, y, step);
            let x = match problem.input_mode() {
                InputMode::Joint => obs.x,
                InputMode::NoisyInput => problem.design()[design].clone(),
            };
            records.push(TraceRecord {
                step,
                design,
                env,
                x,
                w: problem.distribution().support()[env].clone(),
                y,
                beta: selected_beta,
                recommendation,
                regret: regret_value,
                hv_gap,
                set_sizes,
                terminated,
                contained,
                lifted_contained,
            });
            Ok(())
        })();
        result.map_err(|e| e.at_step(step))?;
        elapsed_ms.push(started.elapsed().as_secs_f64() * 1e3);
    }

    let (final_pareto, final_constrained) = match state {
        State::None => (None, None),
        State::Pareto(s) => (Some(s), None),
        State::Constrained(s) => (None, Some(s)),
    };
    Ok(Trace {
        records,
        initial_contained,
        initial_lifted_contained,
        terminated,
        final_pareto,
        final_constrained,
        truth: runner.truth,
        elapsed_ms,
    })
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}
