//! Inverse planning over grid-world gameshow scenarios.
//!
//! The pipeline turns a linguistic scenario (via an LLM translation client or
//! offline fixtures) into a structured scenario record, samples a concrete
//! grid-world map conditioned on that record, compiles the map to a planning
//! problem in a small PDDL subset, and infers a posterior distribution over
//! candidate goal trophies by inverting a Boltzmann-rational agent model whose
//! cost oracle is A* search.
//!
//! Modules follow the pipeline order:
//!
//! - [`pddl`]: parse, ground, and evaluate the PDDL subset
//! - [`worldgen`]: scenario records and conditioned map sampling
//! - [`planner`]: world simulation, A* optimal costs, Q-values
//! - [`infer`]: goal prior, Boltzmann policy, observation likelihoods, posterior
//! - [`translate`]: LLM translation client with rejection sampling and fixtures
//! - [`eval`]: stimulus corpus, human data ingestion, correlation reports

pub mod eval;
pub mod infer;
pub mod pddl;
pub mod planner;
pub mod translate;
pub mod worldgen;

#[doc(hidden)]
pub mod testutil;

/// Floating-point scalar used by the probability layer: f32 or f64.
///
/// Plan costs stay exact integers throughout; only probabilities, Q-values,
/// and statistics are generic over this trait.
pub trait Real:
    num_traits::Float + num_traits::FromPrimitive + std::iter::Sum + std::fmt::Debug + std::fmt::Display
{
}
impl Real for f32 {}
impl Real for f64 {}

/// Default scalar for the concrete aliases below.
pub type DefaultReal = f64;

/// Inference configuration at the default scalar.
pub type Config = infer::InferenceConfig<DefaultReal>;
/// Normalized goal distribution at the default scalar.
pub type Posterior = infer::GoalDistribution<DefaultReal>;
/// Per-state action distribution at the default scalar.
pub type Policy = infer::PolicyDistribution<DefaultReal>;
