//! World simulation and optimal-cost planning over compiled problems.
//!
//! [`World`] holds everything static: grid geometry, object indices, room
//! gating, ground actions with compiled preconditions, and goal conditions.
//! [`WorldState`] is the small dynamic part that A* search and policy
//! enumeration push around. Costs are exact integers; `q_value` reports the
//! negated remaining cost and `None` stands in for negative infinity.

mod search;
mod state;
mod world;

pub use search::{
    nav_costs, optimal_cost, q_value, successors, successors_for_goal, uniform_cost, PlanResult,
};
pub use state::{ActionKind, Cell, Direction, GroundAction, WorldState};
pub use world::{CompiledCondition, GoalSpec, World, WorldOptions};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum PlanError {
    #[error("action {0} is not applicable in this state")]
    InapplicableAction(String),
    #[error("problem has no usable agent of type `agent`")]
    NoAgent,
    #[error("malformed problem: {0}")]
    BadProblem(String),
    #[error("unsupported action schema `{0}`")]
    UnsupportedSchema(String),
}


#[cfg(test)]
mod parity_tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::pddl::eval_formula;
    use crate::testutil::{build, colorsame_two_rooms, small_sampler};

    /// The compiled fast path must agree with the reference evaluator on the
    /// expanded fact view, for every ground action over random states.
    #[test]
    fn compiled_preconditions_match_the_reference_evaluator() {
        let built = build(&colorsame_two_rooms(), 11, small_sampler(9));
        let world = &built.world;
        let grounded = crate::pddl::ground_actions(&built.domain, &built.problem);
        let mut rng = ChaCha8Rng::seed_from_u64(99);

        for _ in 0..300 {
            let mut state = world.initial_state();
            state.agent = Cell::new(rng.gen_range(0..9), rng.gen_range(0..9));
            let keys = world.keys.len() as u32;
            let split: u32 = rng.gen_range(0..1 << keys);
            let gone: u32 = rng.gen_range(0..1 << keys);
            state.inventory = split & !gone;
            state.key_on_map = !split & !gone & ((1 << keys) - 1);
            state.locked = rng.gen_range(0..1 << world.doors.len() as u32);
            let fact_view = world.to_fact_state(&state);

            let mut checked = 0;
            for grounded_schema in &grounded {
                let kind = match grounded_schema.schema.as_str() {
                    "pickup" => ActionKind::Pickup(
                        world.key_index(&grounded_schema.args[1]).unwrap(),
                    ),
                    "unlock" => ActionKind::Unlock {
                        key: world.key_index(&grounded_schema.args[1]).unwrap(),
                        door: world.door_index(&grounded_schema.args[2]).unwrap(),
                    },
                    "take" => ActionKind::Take(
                        world.trophy_index(&grounded_schema.args[1]).unwrap(),
                    ),
                    _ => continue,
                };
                let def = world
                    .ground
                    .iter()
                    .find(|d| d.kind == kind)
                    .expect("every grounded schema was compiled");
                let schema = built.domain.action(&grounded_schema.schema).unwrap();
                let binding = grounded_schema.binding(&built.domain);
                let reference =
                    eval_formula(&fact_view, &schema.precondition, &binding).unwrap();
                let compiled = world.eval_cond(&def.pre, &state);
                assert_eq!(
                    compiled, reference,
                    "disagreement on {} {:?} in state {state:?}",
                    grounded_schema.schema, grounded_schema.args
                );
                checked += 1;
            }
            assert!(checked >= grounded.len());
        }
    }
}
