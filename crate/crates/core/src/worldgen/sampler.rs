use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::planner::{Cell, Direction};

use super::ir::{DynamicsVariant, ScenarioIr};
use super::validate::validate_map;
use super::WorldgenError;

/// A concrete grid-world consistent with a scenario record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MapSample {
    pub width: u16,
    pub height: u16,
    pub agent_start: Cell,
    pub trophy_cells: BTreeMap<String, Cell>,
    /// One entry per locked room door; multi-lock doors carry several colors.
    pub doors: Vec<DoorSpec>,
    pub key_cells: Vec<KeySpec>,
    /// Interior cell to room label.
    pub room_membership: BTreeMap<Cell, String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DoorSpec {
    pub id: String,
    pub cell: Cell,
    pub room: String,
    pub locks: Vec<String>,
    pub locked: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeySpec {
    pub id: String,
    pub cell: Cell,
    pub color: String,
}

/// Knobs for the restricted generative model.
#[derive(Debug, Clone, Copy)]
pub struct SamplerOptions {
    pub grid: u16,
    /// Sampled distance range from the agent to doors and keys.
    pub min_dist: u16,
    pub max_dist: u16,
    pub max_attempts: u32,
}

impl Default for SamplerOptions {
    fn default() -> Self {
        SamplerOptions {
            grid: 10,
            min_dist: 2,
            max_dist: 4,
            max_attempts: 1000,
        }
    }
}

pub fn sample_map(ir: &ScenarioIr, seed: u64) -> Result<MapSample, WorldgenError> {
    sample_map_with(ir, seed, SamplerOptions::default())
}

/// Rejection-sample maps until the validator accepts one. Deterministic for
/// a fixed `(ir, seed, options)` triple.
pub fn sample_map_with(
    ir: &ScenarioIr,
    seed: u64,
    options: SamplerOptions,
) -> Result<MapSample, WorldgenError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut last = String::from("no candidate produced");
    for _ in 0..options.max_attempts {
        let candidate = match build_candidate(ir, &mut rng, &options) {
            Ok(c) => c,
            Err(reason) => {
                last = reason;
                continue;
            }
        };
        let violations = validate_map(ir, &candidate);
        if violations.is_empty() {
            return Ok(candidate);
        }
        last = violations.join("; ");
    }
    Err(WorldgenError::SamplingExhausted {
        attempts: options.max_attempts,
        last,
    })
}

pub(crate) fn room_slug(label: &str) -> String {
    label
        .to_ascii_lowercase()
        .chars()
        .map(|c| if c.is_alphanumeric() { c } else { '_' })
        .collect()
}

fn build_candidate(
    ir: &ScenarioIr,
    rng: &mut ChaCha8Rng,
    options: &SamplerOptions,
) -> Result<MapSample, String> {
    if ir.dynamics_variant == DynamicsVariant::Spatial {
        return build_spatial(ir);
    }

    let grid = options.grid;
    let start = Cell::new(grid as i16 / 2, grid as i16 / 2);
    let mut used: Vec<Cell> = vec![start];
    let mut map = MapSample {
        width: grid,
        height: grid,
        agent_start: start,
        trophy_cells: BTreeMap::new(),
        doors: Vec::new(),
        key_cells: Vec::new(),
        room_membership: BTreeMap::new(),
    };

    // Locked rooms each claim one direction away from the agent.
    let rooms: Vec<(&String, &Vec<String>)> = ir
        .obstacles
        .iter()
        .filter(|(_, locks)| !locks.is_empty())
        .collect();
    if rooms.len() > 4 {
        return Err("more than four locked rooms".into());
    }
    let mut dirs = Direction::ALL.to_vec();
    dirs.shuffle(rng);
    for ((label, locks), dir) in rooms.iter().zip(dirs) {
        let dist = rng.gen_range(options.min_dist..=options.max_dist) as i16;
        let door_cell = offset(start, dir, dist);
        let mut interiors = candidate_interiors(door_cell, dir);
        let members: Vec<&String> = ir
            .goals
            .iter()
            .filter(|g| ir.locations.get(*g) == Some(label))
            .collect();
        if members.len() > interiors.len() {
            return Err(format!("room `{label}` holds too many trophies"));
        }
        if !in_bounds(door_cell, grid) || used.contains(&door_cell) {
            return Err("door placement collision".into());
        }
        used.push(door_cell);
        for trophy in &members {
            let cell = interiors.remove(0);
            if !in_bounds(cell, grid) || used.contains(&cell) {
                return Err("room interior collision".into());
            }
            used.push(cell);
            map.trophy_cells.insert((*trophy).clone(), cell);
            map.room_membership.insert(cell, (*label).clone());
        }
        map.doors.push(DoorSpec {
            id: format!("door_{}", room_slug(label)),
            cell: door_cell,
            room: (*label).clone(),
            locks: (*locks).clone(),
            locked: true,
        });
    }

    // Open trophies and keys scatter over free corridor cells.
    let roomed: Vec<&String> = ir
        .locations
        .iter()
        .filter(|(_, room)| {
            ir.obstacles
                .get(*room)
                .map(|locks| !locks.is_empty())
                .unwrap_or(false)
        })
        .map(|(t, _)| t)
        .collect();
    for goal in &ir.goals {
        if roomed.contains(&goal) {
            continue;
        }
        let cell = scatter(start, rng, options, grid, &used)?;
        used.push(cell);
        map.trophy_cells.insert(goal.clone(), cell);
    }
    for (i, color) in ir.keys.iter().enumerate() {
        let cell = scatter(start, rng, options, grid, &used)?;
        used.push(cell);
        map.key_cells.push(KeySpec {
            id: format!("key{}", i + 1),
            cell,
            color: color.clone(),
        });
    }
    Ok(map)
}

fn candidate_interiors(door: Cell, dir: Direction) -> Vec<Cell> {
    let (dx, dy) = dir.delta();
    let behind = Cell::new(door.x + dx, door.y + dy);
    let side_a = Cell::new(door.x + dy, door.y + dx);
    let side_b = Cell::new(door.x - dy, door.y - dx);
    vec![behind, side_a, side_b]
}

fn offset(from: Cell, dir: Direction, steps: i16) -> Cell {
    let (dx, dy) = dir.delta();
    Cell::new(from.x + dx * steps, from.y + dy * steps)
}

fn in_bounds(cell: Cell, grid: u16) -> bool {
    cell.x >= 0 && cell.y >= 0 && (cell.x as u16) < grid && (cell.y as u16) < grid
}

fn scatter(
    start: Cell,
    rng: &mut ChaCha8Rng,
    options: &SamplerOptions,
    grid: u16,
    used: &[Cell],
) -> Result<Cell, String> {
    for _ in 0..32 {
        let dir = *Direction::ALL.choose(rng).expect("nonempty");
        let dist = rng.gen_range(options.min_dist..=options.max_dist) as i16;
        let mut cell = offset(start, dir, dist);
        // A sideways nudge keeps scattered objects off each other's lanes.
        let nudge = rng.gen_range(-1i16..=1);
        let (dx, dy) = dir.delta();
        cell = Cell::new(cell.x + dy * nudge, cell.y + dx * nudge);
        if in_bounds(cell, grid) && !used.contains(&cell) {
            return Ok(cell);
        }
    }
    Err("no free cell for object placement".into())
}

/// Spatial scenarios are fully determined: resolve the constraint graph from
/// the agent outward and size the grid to fit with a one-cell margin.
fn build_spatial(ir: &ScenarioIr) -> Result<MapSample, String> {
    let agent = ir.agents[0].as_str();
    let mut offsets: BTreeMap<String, (i16, i16)> = BTreeMap::new();
    offsets.insert(agent.to_string(), (0, 0));
    let mut remaining: Vec<_> = ir.spatial_constraints.iter().collect();
    while !remaining.is_empty() {
        let before = remaining.len();
        remaining.retain(|c| {
            if let Some(&(ax, ay)) = offsets.get(&c.anchor) {
                let (dx, dy) = c.direction.delta();
                offsets.insert(
                    c.target.clone(),
                    (ax + dx * c.steps as i16, ay + dy * c.steps as i16),
                );
                false
            } else {
                true
            }
        });
        if remaining.len() == before {
            return Err("unanchored spatial constraint".into());
        }
    }

    let xs: Vec<i16> = offsets.values().map(|(x, _)| *x).collect();
    let ys: Vec<i16> = offsets.values().map(|(_, y)| *y).collect();
    let (min_x, max_x) = (*xs.iter().min().unwrap(), *xs.iter().max().unwrap());
    let (min_y, max_y) = (*ys.iter().min().unwrap(), *ys.iter().max().unwrap());
    let span_x = (max_x - min_x) as u16 + 3;
    let span_y = (max_y - min_y) as u16 + 3;
    let grid = span_x.max(span_y).max(10);

    let free_x = (grid as i16 - 2) - (max_x - min_x) - 1;
    let free_y = (grid as i16 - 2) - (max_y - min_y) - 1;
    let start = Cell::new(1 - min_x + free_x / 2, 1 - min_y + free_y / 2);

    let mut map = MapSample {
        width: grid,
        height: grid,
        agent_start: start,
        trophy_cells: BTreeMap::new(),
        doors: Vec::new(),
        key_cells: Vec::new(),
        room_membership: BTreeMap::new(),
    };
    for goal in &ir.goals {
        let (dx, dy) = offsets
            .get(goal)
            .copied()
            .ok_or_else(|| format!("trophy `{goal}` is unconstrained"))?;
        map.trophy_cells
            .insert(goal.clone(), Cell::new(start.x + dx, start.y + dy));
    }
    Ok(map)
}
