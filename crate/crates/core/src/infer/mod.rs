//! Exact Bayesian goal inference over a compiled world.
//!
//! The goal prior weights each trophy by the inverse cost of the shortest
//! plan reaching it. The agent model is a Boltzmann-rational policy, a
//! softmax with inverse temperature `beta` over Q-values supplied by the A*
//! cost oracle. Observations are either low-level action sequences (a
//! product of per-step policy probabilities) or state conditions scored by
//! exact forward enumeration over a macro-action graph. The posterior is the
//! normalized product of prior and likelihood; no sampling anywhere.

mod brute;
mod distributions;
mod engine;
mod subgoal;

pub use distributions::{GoalDistribution, PolicyDistribution};
pub use engine::{Engine, InferenceConfig, ObservationTrace};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum InferError {
    #[error("no goal is reachable from the initial state")]
    AllGoalsUnreachable,
    #[error("goal `{0}` is unreachable from this state")]
    GoalUnreachableFromState(String),
    #[error("policy undefined: state already satisfies goal `{0}`")]
    TerminalState(String),
    #[error("observed action `{0}` is not applicable at step {1}")]
    InapplicableSequence(String, usize),
    #[error("macro enumeration exceeded the subgoal horizon with {0} mass in flight")]
    HorizonExceeded(f64),
    #[error("all joint masses are zero and no epsilon floor is set")]
    ZeroEvidence,
    #[error("state space too large for exhaustive enumeration (limit {0})")]
    StateSpaceTooLarge(usize),
    #[error("goal `{0}` costs zero from the start state; prior 1/C is undefined")]
    ZeroCostGoal(String),
    #[error(transparent)]
    Plan(#[from] crate::planner::PlanError),
    #[error("invalid configuration: {0}")]
    BadConfig(String),
}

#[cfg(test)]
mod tests {
    use std::collections::{BTreeMap, BTreeSet};

    use approx::assert_relative_eq;

    use super::*;
    use crate::pddl::{Expr, Formula, GroundFluent, ProblemInstance, Term};
    use crate::planner::{ActionKind, Direction, GroundAction, World, WorldOptions};
    use crate::testutil::{
        build, colordiff_shared_room, colorsame_two_rooms, generic_two_rooms, small_sampler,
        spatial_walk_south,
    };
    use crate::worldgen::{domains, DynamicsVariant, SamplerOptions};

    fn engine(json: &str, seed: u64, sampler: SamplerOptions) -> Engine<f64> {
        Engine::new(build(json, seed, sampler).world, InferenceConfig::default()).unwrap()
    }

    fn engine_with(
        json: &str,
        seed: u64,
        sampler: SamplerOptions,
        config: InferenceConfig<f64>,
    ) -> Engine<f64> {
        Engine::new(build(json, seed, sampler).world, config).unwrap()
    }

    fn mv(dir: Direction) -> GroundAction {
        GroundAction {
            kind: ActionKind::Move(dir),
            cost: 1,
        }
    }

    /// A 3x1 corridor with the goal at the east end and the agent in the
    /// middle: exactly two applicable actions with Q = -1 and Q = -3.
    fn corridor_world(unit_cost: u32) -> World {
        let domain = domains::domain_for(DynamicsVariant::Spatial);
        let mut objects = BTreeMap::new();
        objects.insert("alice".to_string(), "agent".to_string());
        objects.insert("gold".to_string(), "trophy".to_string());
        let mut fluents = BTreeMap::new();
        for (name, x) in [("alice", 1i64), ("gold", 2)] {
            fluents.insert(GroundFluent::new("xloc", &[name]), x);
            fluents.insert(GroundFluent::new("yloc", &[name]), 0);
        }
        let eq = |fl: &str| {
            Formula::NumEq(
                Expr::Fluent(fl.into(), vec![Term::Object("alice".into())]),
                Expr::Fluent(fl.into(), vec![Term::Object("gold".into())]),
            )
        };
        let problem = ProblemInstance {
            objects,
            initial_facts: BTreeSet::new(),
            initial_fluents: fluents,
            goal_candidates: vec![("gold".into(), Formula::And(vec![eq("xloc"), eq("yloc")]))],
        };
        World::new(
            &domain,
            &problem,
            WorldOptions {
                width: 3,
                height: 1,
                unit_cost,
                prune_surplus_keys: false,
            },
        )
        .unwrap()
    }

    #[test]
    fn single_reachable_goal_takes_all_prior_mass() {
        let world = corridor_world(1);
        let engine = Engine::<f64>::new(world, InferenceConfig::default()).unwrap();
        let prior = engine.goal_prior().unwrap();
        assert_eq!(prior.get("gold"), 1.0);
    }

    #[test]
    fn prior_normalizes_inverse_costs() {
        // Costs 2 (gold) and 4 (bronze... via spatial constraints 2E and 4W).
        let scenario = serde_json::json!({
            "agent": ["Alice"],
            "goals": ["gold", "silver"],
            "locations": {}, "obstacles": {}, "keys": [],
            "max_obstacle": 0, "keys_per_door": 0, "len_key": 0, "goal_count": 2,
            "observation_type": "action_sequence",
            "observation": [],
            "spatial_constraints": [
                {"target": "gold", "anchor": "Alice", "direction": "E", "steps": 2},
                {"target": "silver", "anchor": "Alice", "direction": "W", "steps": 4}
            ],
            "dynamics_variant": "spatial"
        })
        .to_string();
        let engine = engine(&scenario, 1, SamplerOptions::default());
        let prior = engine.goal_prior().unwrap();
        assert_relative_eq!(prior.get("gold"), 2.0 / 3.0, max_relative = 1e-12);
        assert_relative_eq!(prior.get("silver"), 1.0 / 3.0, max_relative = 1e-12);
    }

    #[test]
    fn unreachable_goal_gets_zero_prior_mass() {
        // Different-color rule, single yellow key, yellow lock on gold's
        // room: gold is dynamically unreachable.
        let scenario = serde_json::json!({
            "agent": ["Alice"],
            "goals": ["gold", "silver", "bronze"],
            "locations": {"gold": "Room A"},
            "obstacles": {"Room A": ["Y"]},
            "keys": ["y"],
            "max_obstacle": 1, "keys_per_door": 1, "len_key": 1, "goal_count": 3,
            "observation_type": "has_objects",
            "observation": "",
            "dynamics_variant": "color_different"
        })
        .to_string();
        let engine = engine(&scenario, 8, small_sampler(9));
        let prior = engine.goal_prior().unwrap();
        assert_eq!(prior.get("gold"), 0.0);
        assert!(prior.get("silver") > 0.0);
        assert!(prior.get("bronze") > 0.0);
        assert_relative_eq!(prior.total(), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn policy_approaches_uniform_as_beta_vanishes() {
        let world = corridor_world(1);
        let engine =
            Engine::<f64>::new(world, InferenceConfig::with_beta(1e-9)).unwrap();
        let policy = engine.policy(&engine.initial_state(), 0).unwrap();
        assert_eq!(policy.len(), 2);
        for (_, p) in policy.iter() {
            assert_relative_eq!(p, 0.5, max_relative = 1e-6);
        }
    }

    #[test]
    fn policy_matches_the_two_action_softmax() {
        let world = corridor_world(1);
        let engine = Engine::<f64>::new(world, InferenceConfig::with_beta(1.0)).unwrap();
        let policy = engine.policy(&engine.initial_state(), 0).unwrap();
        let expected_east = (2.0f64).exp() / ((2.0f64).exp() + 1.0);
        assert_relative_eq!(policy.prob(&mv(Direction::East)), expected_east, max_relative = 1e-12);
        assert_relative_eq!(policy.prob(&mv(Direction::West)), 1.0 - expected_east, max_relative = 1e-12);
        assert_relative_eq!(policy.prob(&mv(Direction::East)), 0.8808, max_relative = 1e-4);
        assert_relative_eq!(policy.prob(&mv(Direction::West)), 0.1192, max_relative = 1e-3);
        assert_relative_eq!(policy.total(), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn high_beta_policy_is_near_deterministic() {
        let world = corridor_world(1);
        let engine = Engine::<f64>::new(world, InferenceConfig::with_beta(10.0)).unwrap();
        let policy = engine.policy(&engine.initial_state(), 0).unwrap();
        assert!(policy.prob(&mv(Direction::East)) >= 0.9999);
    }

    #[test]
    fn empty_sequence_has_unit_likelihood() {
        let engine = engine(&spatial_walk_south(), 1, SamplerOptions::default());
        for goal in 0..3 {
            assert_eq!(engine.action_sequence_likelihood(&[], goal).unwrap(), 1.0);
        }
    }

    #[test]
    fn single_step_likelihood_equals_policy_probability() {
        let world = corridor_world(1);
        let engine = Engine::<f64>::new(world, InferenceConfig::with_beta(1.0)).unwrap();
        let like = engine
            .action_sequence_likelihood(&[mv(Direction::East)], 0)
            .unwrap();
        assert_relative_eq!(like, 0.8808, max_relative = 1e-4);
    }

    #[test]
    fn walking_past_silver_favors_bronze_over_silver() {
        let engine = engine(&spatial_walk_south(), 1, SamplerOptions::default());
        let world = engine.world().clone();
        let silver = world.goal_index("silver").unwrap();
        let bronze = world.goal_index("bronze").unwrap();
        let obs = vec![mv(Direction::South); 4];
        let gold = world.goal_index("gold").unwrap();
        let like_silver = engine.action_sequence_likelihood(&obs, silver).unwrap();
        let like_bronze = engine.action_sequence_likelihood(&obs, bronze).unwrap();
        let like_gold = engine.action_sequence_likelihood(&obs, gold).unwrap();
        assert!(
            like_bronze > like_silver,
            "bronze {like_bronze} vs silver {like_silver}"
        );
        // The fourth step walks off silver's cell: every move there shares
        // the same Q, so that step contributes a uniform 1/4.
        assert!(like_silver > like_gold);
        let approach: f64 = engine
            .action_sequence_likelihood(&obs[..3], silver)
            .unwrap();
        assert_relative_eq!(like_silver, approach * 0.25, max_relative = 1e-12);
    }

    #[test]
    fn sequence_likelihood_factorizes_over_segments() {
        let engine = engine(&spatial_walk_south(), 1, SamplerOptions::default());
        let bronze = engine.world().goal_index("bronze").unwrap();
        let obs = vec![mv(Direction::South); 4];
        let whole = engine.action_sequence_likelihood(&obs, bronze).unwrap();

        let mut mid = engine.initial_state();
        mid.agent.y += 2;
        let first = engine.action_sequence_likelihood(&obs[..2], bronze).unwrap();
        let second = engine
            .action_sequence_likelihood_from(mid, &obs[2..], bronze)
            .unwrap();
        assert_relative_eq!(whole, first * second, max_relative = 1e-12);
    }

    #[test]
    fn inapplicable_observation_is_an_error() {
        let world = corridor_world(1);
        let engine = Engine::<f64>::new(world, InferenceConfig::default()).unwrap();
        // North is off the 3x1 corridor.
        let err = engine
            .action_sequence_likelihood(&[mv(Direction::North)], 0)
            .unwrap_err();
        assert!(matches!(err, InferError::InapplicableSequence(_, 0)));
    }

    #[test]
    fn trivially_true_condition_has_unit_likelihood() {
        let engine = engine(&colorsame_two_rooms(), 3, small_sampler(9));
        for goal in 0..3 {
            let p = engine
                .subgoal_condition_likelihood(&Formula::truth(), goal)
                .unwrap();
            assert_eq!(p, 1.0, "goal {goal}");
        }
    }

    #[test]
    fn wrong_color_key_condition_floors_for_red_door_goal() {
        let engine = engine(&colorsame_two_rooms(), 3, small_sampler(9));
        let silver = engine.world().goal_index("silver").unwrap();
        let condition = crate::pddl::parse_formula(
            "(exists (?k - key) (and (has Alice ?k) (iscolor ?k yellow)))",
            &domains::domain_for(DynamicsVariant::ColorSame),
        )
        .unwrap();
        let p = engine.subgoal_condition_likelihood(&condition, silver).unwrap();
        assert!(p <= 1e-6, "agents after silver never need yellow: {p}");
    }

    #[test]
    fn surplus_pickup_condition_floors_for_doorless_goal() {
        let engine = engine(&generic_two_rooms(), 5, small_sampler(9));
        let bronze = engine.world().goal_index("bronze").unwrap();
        let condition = crate::pddl::parse_formula(
            "(exists (?k - key) (has Alice ?k))",
            &domains::domain_for(DynamicsVariant::Generic),
        )
        .unwrap();
        let p = engine.subgoal_condition_likelihood(&condition, bronze).unwrap();
        assert!(p <= 1e-6, "pruning forbids surplus pickups: {p}");
    }

    #[test]
    fn posterior_with_empty_observation_equals_the_prior() {
        for (fixture, sampler) in [
            (spatial_walk_south(), SamplerOptions::default()),
            (colorsame_two_rooms(), small_sampler(9)),
        ] {
            let engine = engine(&fixture, 2, sampler);
            let prior = engine.goal_prior().unwrap();
            let posterior = engine.posterior(&ObservationTrace::empty()).unwrap();
            for (label, p) in prior.iter() {
                assert_eq!(p, posterior.get(label), "{label}");
            }
        }
    }

    #[test]
    fn walking_south_past_silver_makes_bronze_the_argmax() {
        let engine = engine(&spatial_walk_south(), 1, SamplerOptions::default());
        let obs = ObservationTrace::LowLevelActions(vec![mv(Direction::South); 4]);
        let posterior = engine.posterior(&obs).unwrap();
        assert_eq!(posterior.argmax(), Some("bronze"));
        assert_relative_eq!(posterior.total(), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn shared_yellow_room_pushes_mass_to_bronze() {
        let built = build(&colordiff_shared_room(), 6, small_sampler(9));
        let condition = crate::pddl::parse_formula(
            "(exists (?k - key) (and (has Alice ?k) (iscolor ?k yellow)))",
            &built.domain,
        )
        .unwrap();
        let engine = Engine::<f64>::new(built.world, InferenceConfig::default()).unwrap();
        let posterior = engine
            .posterior(&ObservationTrace::SubgoalCondition(condition))
            .unwrap();
        assert_eq!(posterior.argmax(), Some("bronze"));
        assert!(posterior.get("bronze") > posterior.get("gold"));
        assert!(posterior.get("bronze") > posterior.get("silver"));
        let gap: f64 = posterior.get("gold") - posterior.get("silver");
        assert!(gap.abs() <= 0.05);
    }

    #[test]
    fn brute_force_agrees_on_action_sequences() {
        let engine = engine(&spatial_walk_south(), 1, SamplerOptions::default());
        let obs = ObservationTrace::LowLevelActions(vec![mv(Direction::South); 4]);
        let exact = engine.posterior(&obs).unwrap();
        let brute = engine.brute_force_posterior(&obs, 60).unwrap();
        assert!(exact.total_variation(&brute) <= 1e-6);
    }

    #[test]
    fn brute_force_on_single_goal_is_degenerate() {
        let world = corridor_world(1);
        let engine = Engine::<f64>::new(world, InferenceConfig::default()).unwrap();
        let obs = ObservationTrace::LowLevelActions(vec![mv(Direction::West)]);
        let brute = engine.brute_force_posterior(&obs, 30).unwrap();
        assert_eq!(brute.get("gold"), 1.0);
    }

    #[test]
    fn observation_impossible_for_every_goal_degrades_to_the_prior() {
        // No agent pursuing any goal ever holds a green key (there is none),
        // so the floor leaves every likelihood equal and the posterior falls
        // back to the prior.
        let engine = engine(&colorsame_two_rooms(), 3, small_sampler(9));
        let condition = crate::pddl::parse_formula(
            "(exists (?k - key) (and (has Alice ?k) (iscolor ?k green)))",
            &domains::domain_for(DynamicsVariant::ColorSame),
        )
        .unwrap();
        let prior = engine.goal_prior().unwrap();
        let obs = ObservationTrace::SubgoalCondition(condition);
        let posterior = engine.posterior(&obs).unwrap();
        assert!(prior.total_variation(&posterior) <= 1e-12);
        let brute = engine.brute_force_posterior(&obs, 60).unwrap();
        assert!(posterior.total_variation(&brute) <= 1e-6);
    }

    #[test]
    fn zero_epsilon_with_impossible_evidence_errors() {
        let built = build(&colorsame_two_rooms(), 3, small_sampler(9));
        let condition = crate::pddl::parse_formula(
            "(exists (?k - key) (and (has Alice ?k) (iscolor ?k green)))",
            &built.domain,
        )
        .unwrap();
        let config = InferenceConfig {
            epsilon_floor: 0.0,
            ..InferenceConfig::default()
        };
        let engine = Engine::<f64>::new(built.world, config).unwrap();
        let err = engine
            .posterior(&ObservationTrace::SubgoalCondition(condition))
            .unwrap_err();
        assert!(matches!(err, InferError::ZeroEvidence));
    }

    #[test]
    fn posterior_mass_rises_with_beta_on_optimal_observations() {
        let mut last = 0.0;
        for beta in [0.5, 1.0, 2.0, 4.0] {
            let engine = engine_with(
                &spatial_walk_south(),
                1,
                SamplerOptions::default(),
                InferenceConfig::with_beta(beta),
            );
            let obs = ObservationTrace::LowLevelActions(vec![mv(Direction::South); 4]);
            let p = engine.posterior(&obs).unwrap().get("bronze");
            assert!(p >= last, "beta {beta}: {p} < {last}");
            last = p;
        }
    }

    #[test]
    fn cost_scaling_with_matched_beta_preserves_the_posterior() {
        let built = build(&spatial_walk_south(), 1, SamplerOptions::default());
        let obs = |world: &World| {
            ObservationTrace::LowLevelActions(vec![
                GroundAction {
                    kind: ActionKind::Move(Direction::South),
                    cost: world.options.unit_cost,
                };
                4
            ])
        };
        let base = Engine::new(built.world.clone(), InferenceConfig::with_beta(2.0)).unwrap();
        let reference = base.posterior(&obs(&built.world)).unwrap();

        let mut scaled_world = built.world.clone();
        scaled_world.options.unit_cost = 3;
        let scaled = Engine::new(scaled_world.clone(), InferenceConfig::with_beta(2.0 / 3.0)).unwrap();
        let scaled_posterior = scaled.posterior(&obs(&scaled_world)).unwrap();
        assert!(reference.total_variation(&scaled_posterior) <= 1e-12);

        let prior_a = base.goal_prior().unwrap();
        let prior_b = scaled.goal_prior().unwrap();
        assert!(prior_a.total_variation(&prior_b) <= 1e-12);
    }

    #[test]
    fn f32_policies_normalize_too() {
        let world = corridor_world(1);
        let engine = Engine::<f32>::new(world, InferenceConfig::with_beta(1.0f32)).unwrap();
        let policy = engine.policy(&engine.initial_state(), 0).unwrap();
        assert!((policy.total() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn epsilon_floor_must_stay_below_uniform_mass() {
        let world = corridor_world(1);
        let config = InferenceConfig {
            epsilon_floor: 1.5,
            ..InferenceConfig::<f64>::default()
        };
        assert!(matches!(
            Engine::new(world, config),
            Err(InferError::BadConfig(_))
        ));
    }
}

#[cfg(test)]
mod crosscheck_tests {
    use super::*;
    use crate::pddl::parse_formula;
    use crate::testutil::{build, small_sampler};
    use crate::worldgen::{domains, DynamicsVariant};

    fn shrunken(json: &str, seed: u64) -> Engine<f64> {
        Engine::new(
            build(json, seed, small_sampler(5)).world,
            InferenceConfig::default(),
        )
        .unwrap()
    }

    #[test]
    fn macro_graph_matches_low_level_rollouts_on_color_same_5x5() {
        let engine = shrunken(&crate::testutil::colorsame_two_rooms(), 17);
        let condition = parse_formula(
            "(exists (?k - key) (and (has Alice ?k) (iscolor ?k yellow)))",
            &domains::domain_for(DynamicsVariant::ColorSame),
        )
        .unwrap();
        let obs = ObservationTrace::SubgoalCondition(condition);
        let exact = engine.posterior(&obs).unwrap();
        let brute = engine.brute_force_posterior(&obs, 80).unwrap();
        let tv = exact.total_variation(&brute);
        eprintln!("color_same 5x5 tv = {tv}");
        eprintln!("macro: {:?}", exact.iter().collect::<Vec<_>>());
        eprintln!("low  : {:?}", brute.iter().collect::<Vec<_>>());
        assert!(tv <= 0.02, "tv {tv}");
    }

    #[test]
    fn macro_graph_matches_low_level_rollouts_on_generic_5x5() {
        let engine = shrunken(&crate::testutil::generic_two_rooms(), 23);
        let condition = parse_formula(
            "(exists (?k - key) (has Alice ?k))",
            &domains::domain_for(DynamicsVariant::Generic),
        )
        .unwrap();
        let obs = ObservationTrace::SubgoalCondition(condition);
        let exact = engine.posterior(&obs).unwrap();
        let brute = engine.brute_force_posterior(&obs, 80).unwrap();
        let tv = exact.total_variation(&brute);
        eprintln!("generic 5x5 tv = {tv}");
        eprintln!("macro: {:?}", exact.iter().collect::<Vec<_>>());
        eprintln!("low  : {:?}", brute.iter().collect::<Vec<_>>());
        assert!(tv <= 0.02, "tv {tv}");
    }
}
