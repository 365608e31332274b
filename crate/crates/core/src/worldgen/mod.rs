//! Scenario records and the conditioned generative model over grid-world maps.
//!
//! A [`ScenarioIr`] is the structured record the translation step emits:
//! agents, goal trophies, rooms and their locks, key colors, and the observed
//! behavior. [`sample_map`] rejection-samples concrete maps from a restricted
//! generative model until the validator accepts, and [`compile_to_problem`]
//! turns an accepted map into a grounded planning problem.

mod compile;
pub mod domains;
mod ir;
mod sampler;
mod validate;

pub use compile::compile_to_problem;
pub use ir::{
    canonical_color, parse_scenario_ir, DirectionWalk, DynamicsVariant, Observation,
    ObservationType, ScenarioIr, SpatialConstraint,
};
pub use sampler::{sample_map, sample_map_with, DoorSpec, KeySpec, MapSample, SamplerOptions};
pub use validate::validate_map;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum WorldgenError {
    /// Missing or mistyped field in a scenario record.
    #[error("schema error: {0}")]
    Schema(String),
    /// Well-formed record that violates a scenario invariant.
    #[error("consistency error: {0}")]
    Consistency(String),
    /// The sampler could not satisfy the record's conditions.
    #[error("sampling exhausted after {attempts} attempts; last violations: {last}")]
    SamplingExhausted { attempts: u32, last: String },
    /// Map references objects or signatures the domain does not declare.
    #[error("compile error: {0}")]
    Compile(String),
}
