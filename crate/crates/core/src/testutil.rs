//! Shared scenario fixtures and world builders for the test suites.

use crate::pddl::{DomainAst, ProblemInstance};
use crate::planner::{World, WorldOptions};
use crate::worldgen::{
    compile_to_problem, domains, parse_scenario_ir, sample_map_with, DynamicsVariant, MapSample,
    SamplerOptions, ScenarioIr,
};

pub struct Built {
    pub ir: ScenarioIr,
    pub domain: DomainAst,
    pub map: MapSample,
    pub problem: ProblemInstance,
    pub world: World,
}

pub fn small_sampler(grid: u16) -> SamplerOptions {
    SamplerOptions {
        grid,
        min_dist: 1,
        max_dist: 2,
        max_attempts: 1000,
    }
}

pub fn build(scenario_json: &str, seed: u64, sampler: SamplerOptions) -> Built {
    let ir = parse_scenario_ir(scenario_json).expect("fixture record parses");
    let domain = domains::domain_for(ir.dynamics_variant);
    let map = sample_map_with(&ir, seed, sampler).expect("fixture samples");
    let problem = compile_to_problem(&ir, &map, &domain).expect("fixture compiles");
    let world = World::new(
        &domain,
        &problem,
        WorldOptions {
            width: map.width,
            height: map.height,
            unit_cost: 1,
            prune_surplus_keys: ir.dynamics_variant != DynamicsVariant::Spatial,
        },
    )
    .expect("world builds");
    Built {
        ir,
        domain,
        map,
        problem,
        world,
    }
}

/// The walked-past-silver scene: gold 2 East, silver 3 South, bronze 5 South,
/// and Alice observed walking 4 steps South.
pub fn spatial_walk_south() -> String {
    serde_json::json!({
        "agent": ["Alice"],
        "goals": ["gold", "silver", "bronze"],
        "locations": {},
        "obstacles": {},
        "keys": [],
        "max_obstacle": 0,
        "keys_per_door": 0,
        "len_key": 0,
        "goal_count": 3,
        "observation_type": "action_sequence",
        "observation": [{"direction": "S", "steps": 4}],
        "spatial_constraints": [
            {"target": "gold", "anchor": "Alice", "direction": "E", "steps": 2},
            {"target": "silver", "anchor": "Alice", "direction": "S", "steps": 3},
            {"target": "bronze", "anchor": "Alice", "direction": "S", "steps": 5}
        ],
        "dynamics_variant": "spatial"
    })
    .to_string()
}

/// Gold and silver both behind one yellow-locked room, bronze behind a
/// red-locked room, different-color rule, yellow key observed.
pub fn colordiff_shared_room() -> String {
    serde_json::json!({
        "agent": ["Alice"],
        "goals": ["gold", "silver", "bronze"],
        "locations": {"gold": "Room A", "silver": "Room A", "bronze": "Room B"},
        "obstacles": {"Room A": ["Y"], "Room B": ["R"]},
        "keys": ["y", "r"],
        "max_obstacle": 1,
        "keys_per_door": 1,
        "len_key": 2,
        "goal_count": 3,
        "observation_type": "has_objects",
        "observation": "(exists (?k - key) (and (has Alice ?k) (iscolor ?k yellow)))",
        "dynamics_variant": "color_different"
    })
    .to_string()
}

/// Same-color rule: gold behind yellow, silver behind red, bronze open;
/// one yellow key and one red key on the course.
pub fn colorsame_two_rooms() -> String {
    serde_json::json!({
        "agent": ["Alice"],
        "goals": ["gold", "silver", "bronze"],
        "locations": {"gold": "Room A", "silver": "Room B"},
        "obstacles": {"Room A": ["Y"], "Room B": ["R"]},
        "keys": ["y", "r"],
        "max_obstacle": 1,
        "keys_per_door": 1,
        "len_key": 2,
        "goal_count": 3,
        "observation_type": "has_objects",
        "observation": "(exists (?k - key) (and (has Alice ?k) (iscolor ?k yellow)))",
        "dynamics_variant": "color_same"
    })
    .to_string()
}

/// Generic keys: gold behind two locks, silver behind one, bronze open,
/// three interchangeable keys; Alice observed holding at least one key.
pub fn generic_two_rooms() -> String {
    serde_json::json!({
        "agent": ["Alice"],
        "goals": ["gold", "silver", "bronze"],
        "locations": {"gold": "Room A", "silver": "Room B"},
        "obstacles": {"Room A": ["any", "any"], "Room B": ["any"]},
        "keys": ["any", "any", "any"],
        "max_obstacle": 2,
        "keys_per_door": 1,
        "len_key": 3,
        "goal_count": 3,
        "observation_type": "has_objects",
        "observation": "(exists (?k - key) (has Alice ?k))",
        "dynamics_variant": "generic"
    })
    .to_string()
}
