use std::collections::BTreeMap;

use serde_json::Value;

use crate::planner::Direction;

use super::WorldgenError;

/// Which rule set governs keys and doors in a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum DynamicsVariant {
    Generic,
    ColorSame,
    ColorDifferent,
    Spatial,
}

impl DynamicsVariant {
    pub fn as_str(self) -> &'static str {
        match self {
            DynamicsVariant::Generic => "generic",
            DynamicsVariant::ColorSame => "color_same",
            DynamicsVariant::ColorDifferent => "color_different",
            DynamicsVariant::Spatial => "spatial",
        }
    }

}

impl std::str::FromStr for DynamicsVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "generic" => Ok(DynamicsVariant::Generic),
            "color_same" => Ok(DynamicsVariant::ColorSame),
            "color_different" => Ok(DynamicsVariant::ColorDifferent),
            "spatial" => Ok(DynamicsVariant::Spatial),
            other => Err(format!("unknown dynamics variant `{other}`")),
        }
    }
}

impl std::fmt::Display for DynamicsVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObservationType {
    HasObjects,
    ActionSequence,
}

/// The observed behavior attached to a scenario.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Observation {
    /// A state condition, kept as formula source text until a domain is known.
    Condition(String),
    /// A low-level walk, e.g. "4 steps South".
    Walks(Vec<DirectionWalk>),
    /// No conditioning information ("it's unclear what she would do next").
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DirectionWalk {
    pub direction: Direction,
    pub steps: u32,
}

/// Exact relative placement, e.g. "3 steps South of Alice".
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpatialConstraint {
    pub target: String,
    pub anchor: String,
    pub direction: Direction,
    pub steps: u32,
}

/// The structured scenario record produced by translation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScenarioIr {
    pub agents: Vec<String>,
    pub goals: Vec<String>,
    /// Trophy to room label; empty for the spatial variant.
    pub locations: BTreeMap<String, String>,
    /// Room label to lock colors on its door (`"any"` for colorless locks).
    pub obstacles: BTreeMap<String, Vec<String>>,
    /// Key colors placed on the course (`"any"` for colorless keys).
    pub keys: Vec<String>,
    pub max_obstacle: u32,
    pub keys_per_door: u32,
    pub len_key: u32,
    pub goal_count: u32,
    pub observation_type: ObservationType,
    pub observation: Observation,
    pub spatial_constraints: Vec<SpatialConstraint>,
    pub dynamics_variant: DynamicsVariant,
}

/// Canonicalize a color token: single letters expand to full names, full
/// names pass through lowercased. `"any"` marks a colorless key or lock.
pub fn canonical_color(token: &str) -> Result<String, WorldgenError> {
    let t = token.to_ascii_lowercase();
    let full = match t.as_str() {
        "g" | "green" => "green",
        "y" | "yellow" => "yellow",
        "r" | "red" => "red",
        "b" | "blue" => "blue",
        "p" | "purple" => "purple",
        "o" | "orange" => "orange",
        "any" => "any",
        other => {
            return Err(WorldgenError::Schema(format!(
                "unknown color token `{other}`"
            )))
        }
    };
    Ok(full.to_string())
}

fn get<'a>(obj: &'a serde_json::Map<String, Value>, field: &str) -> Result<&'a Value, WorldgenError> {
    obj.get(field)
        .ok_or_else(|| WorldgenError::Schema(format!("missing field `{field}`")))
}

fn as_str_list(value: &Value, field: &str) -> Result<Vec<String>, WorldgenError> {
    value
        .as_array()
        .ok_or_else(|| WorldgenError::Schema(format!("field `{field}` must be an array")))?
        .iter()
        .map(|v| {
            v.as_str()
                .map(str::to_string)
                .ok_or_else(|| WorldgenError::Schema(format!("field `{field}` must hold strings")))
        })
        .collect()
}

fn as_count(value: &Value, field: &str) -> Result<u32, WorldgenError> {
    value
        .as_u64()
        .map(|n| n as u32)
        .ok_or_else(|| WorldgenError::Schema(format!("field `{field}` must be a nonnegative integer")))
}

fn parse_direction(s: &str) -> Result<Direction, WorldgenError> {
    let c = s.chars().next().unwrap_or(' ');
    Direction::from_letter(c)
        .filter(|_| s.len() == 1 || matches!(s.to_ascii_lowercase().as_str(), "north" | "south" | "east" | "west"))
        .ok_or_else(|| WorldgenError::Schema(format!("unknown direction `{s}`")))
}

/// Parse and validate a scenario record from JSON text.
pub fn parse_scenario_ir(text: &str) -> Result<ScenarioIr, WorldgenError> {
    let value: Value = serde_json::from_str(text)
        .map_err(|e| WorldgenError::Schema(format!("invalid JSON: {e}")))?;
    let obj = value
        .as_object()
        .ok_or_else(|| WorldgenError::Schema("record must be a JSON object".into()))?;

    let agents = as_str_list(get(obj, "agent")?, "agent")?;
    let goals = as_str_list(get(obj, "goals")?, "goals")?;

    let mut locations = BTreeMap::new();
    if let Some(value) = obj.get("locations") {
        if !value.is_null() {
            let map = value.as_object().ok_or_else(|| {
                WorldgenError::Schema("field `locations` must be an object".into())
            })?;
            for (trophy, room) in map {
                let room = room.as_str().ok_or_else(|| {
                    WorldgenError::Schema("field `locations` must map to room labels".into())
                })?;
                locations.insert(trophy.clone(), room.to_string());
            }
        }
    }

    let mut obstacles = BTreeMap::new();
    if let Some(value) = obj.get("obstacles") {
        if !value.is_null() {
            let map = value.as_object().ok_or_else(|| {
                WorldgenError::Schema("field `obstacles` must be an object".into())
            })?;
            for (room, locks) in map {
                let locks = as_str_list(locks, "obstacles")?
                    .iter()
                    .map(|c| canonical_color(c))
                    .collect::<Result<Vec<_>, _>>()?;
                obstacles.insert(room.clone(), locks);
            }
        }
    }

    let keys = match obj.get("keys") {
        Some(v) if !v.is_null() => as_str_list(v, "keys")?
            .iter()
            .map(|c| canonical_color(c))
            .collect::<Result<Vec<_>, _>>()?,
        _ => Vec::new(),
    };

    let max_obstacle = as_count(get(obj, "max_obstacle")?, "max_obstacle")?;
    let keys_per_door = as_count(get(obj, "keys_per_door")?, "keys_per_door")?;
    let len_key = as_count(get(obj, "len_key")?, "len_key")?;
    let goal_count = as_count(get(obj, "goal_count")?, "goal_count")?;

    let observation_type = match get(obj, "observation_type")?.as_str() {
        Some("has_objects") => ObservationType::HasObjects,
        Some("action_sequence") => ObservationType::ActionSequence,
        Some(other) => {
            return Err(WorldgenError::Schema(format!(
                "unknown observation_type `{other}`"
            )))
        }
        None => {
            return Err(WorldgenError::Schema(
                "field `observation_type` must be a string".into(),
            ))
        }
    };

    let observation = match obj.get("observation") {
        None | Some(Value::Null) => Observation::Empty,
        Some(Value::String(s)) if s.trim().is_empty() => Observation::Empty,
        Some(Value::String(s)) => Observation::Condition(s.clone()),
        Some(Value::Array(items)) => {
            let mut walks = Vec::new();
            for item in items {
                let step = item.as_object().ok_or_else(|| {
                    WorldgenError::Schema(
                        "field `observation` must hold {direction, steps} objects".into(),
                    )
                })?;
                let direction = parse_direction(
                    get(step, "direction")?
                        .as_str()
                        .ok_or_else(|| WorldgenError::Schema("`direction` must be a string".into()))?,
                )?;
                let steps = as_count(get(step, "steps")?, "steps")?;
                walks.push(DirectionWalk { direction, steps });
            }
            Observation::Walks(walks)
        }
        Some(_) => {
            return Err(WorldgenError::Schema(
                "field `observation` must be a formula string or a walk array".into(),
            ))
        }
    };

    let spatial_constraints = match obj.get("spatial_constraints") {
        None | Some(Value::Null) => Vec::new(),
        Some(Value::Array(items)) => {
            let mut out = Vec::new();
            for item in items {
                let c = item.as_object().ok_or_else(|| {
                    WorldgenError::Schema("`spatial_constraints` must hold objects".into())
                })?;
                out.push(SpatialConstraint {
                    target: get(c, "target")?
                        .as_str()
                        .ok_or_else(|| WorldgenError::Schema("`target` must be a string".into()))?
                        .to_string(),
                    anchor: get(c, "anchor")?
                        .as_str()
                        .ok_or_else(|| WorldgenError::Schema("`anchor` must be a string".into()))?
                        .to_string(),
                    direction: parse_direction(
                        get(c, "direction")?
                            .as_str()
                            .ok_or_else(|| WorldgenError::Schema("`direction` must be a string".into()))?,
                    )?,
                    steps: as_count(get(c, "steps")?, "steps")?,
                });
            }
            out
        }
        Some(_) => {
            return Err(WorldgenError::Schema(
                "field `spatial_constraints` must be an array".into(),
            ))
        }
    };

    let dynamics_variant = match obj.get("dynamics_variant") {
        Some(Value::String(s)) => s
            .parse::<DynamicsVariant>()
            .map_err(|_| WorldgenError::Schema(format!("unknown dynamics_variant `{s}`")))?,
        Some(_) => {
            return Err(WorldgenError::Schema(
                "field `dynamics_variant` must be a string".into(),
            ))
        }
        // Older records omit the variant; infer the closest rule set.
        None => {
            if !spatial_constraints.is_empty() {
                DynamicsVariant::Spatial
            } else if obstacles.values().flatten().all(|c| c == "any") {
                DynamicsVariant::Generic
            } else {
                DynamicsVariant::ColorSame
            }
        }
    };

    let ir = ScenarioIr {
        agents,
        goals,
        locations,
        obstacles,
        keys,
        max_obstacle,
        keys_per_door,
        len_key,
        goal_count,
        observation_type,
        observation,
        spatial_constraints,
        dynamics_variant,
    };
    check_invariants(&ir)?;
    Ok(ir)
}

fn check_invariants(ir: &ScenarioIr) -> Result<(), WorldgenError> {
    use WorldgenError::Consistency;
    if ir.agents.is_empty() {
        return Err(Consistency("scenario declares no agents".into()));
    }
    if ir.goals.is_empty() {
        return Err(Consistency("scenario declares no goals".into()));
    }
    if ir.goal_count as usize != ir.goals.len() {
        return Err(Consistency(format!(
            "goal_count is {} but {} goals are listed",
            ir.goal_count,
            ir.goals.len()
        )));
    }
    if ir.len_key as usize != ir.keys.len() {
        return Err(Consistency(format!(
            "len_key is {} but {} keys are listed",
            ir.len_key,
            ir.keys.len()
        )));
    }
    for trophy in ir.locations.keys() {
        if !ir.goals.contains(trophy) {
            return Err(Consistency(format!(
                "locations names unknown trophy `{trophy}`"
            )));
        }
    }
    let colored_locks = ir
        .obstacles
        .values()
        .flatten()
        .any(|c| c != "any");
    if ir.dynamics_variant == DynamicsVariant::Generic && colored_locks {
        return Err(Consistency(
            "generic dynamics cannot carry colored locks".into(),
        ));
    }
    match ir.dynamics_variant {
        DynamicsVariant::Spatial => {
            if ir.obstacles.values().any(|l| !l.is_empty()) {
                return Err(Consistency("spatial scenarios have no locked rooms".into()));
            }
            if ir.spatial_constraints.is_empty() {
                return Err(Consistency(
                    "spatial scenarios need spatial_constraints".into(),
                ));
            }
        }
        _ => {
            if !ir.spatial_constraints.is_empty() {
                return Err(Consistency(
                    "spatial_constraints are only valid for the spatial variant".into(),
                ));
            }
        }
    }
    match (&ir.observation_type, &ir.observation) {
        (ObservationType::HasObjects, Observation::Walks(_)) => {
            return Err(Consistency(
                "observation_type has_objects requires a condition formula".into(),
            ))
        }
        (ObservationType::ActionSequence, Observation::Condition(_)) => {
            return Err(Consistency(
                "observation_type action_sequence requires a walk list".into(),
            ))
        }
        _ => {}
    }
    for c in &ir.spatial_constraints {
        if c.steps == 0 {
            return Err(Consistency(format!(
                "constraint on `{}` must have steps >= 1",
                c.target
            )));
        }
    }
    // Constraint graph must be acyclic and anchored at the agent.
    if !ir.spatial_constraints.is_empty() {
        let mut placed: Vec<&str> = ir.agents.iter().map(String::as_str).collect();
        let mut remaining: Vec<&SpatialConstraint> = ir.spatial_constraints.iter().collect();
        while !remaining.is_empty() {
            let before = remaining.len();
            remaining.retain(|c| {
                if placed.contains(&c.anchor.as_str()) {
                    placed.push(c.target.as_str());
                    false
                } else {
                    true
                }
            });
            if remaining.len() == before {
                return Err(Consistency(format!(
                    "spatial constraints are cyclic or unanchored (stuck at `{}`)",
                    remaining[0].target
                )));
            }
        }
        for goal in &ir.goals {
            if !placed.contains(&goal.as_str()) {
                return Err(Consistency(format!(
                    "trophy `{goal}` has no spatial constraint"
                )));
            }
        }
    }
    Ok(())
}
