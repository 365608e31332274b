use std::collections::{BTreeMap, HashSet, VecDeque};

use crate::planner::{Cell, Direction};

use super::ir::{DynamicsVariant, ScenarioIr};
use super::sampler::MapSample;

/// Check every condition the record imposes on a map. Returns one message
/// per violation; an empty list means the map is accepted.
///
/// Reachability here is geometric (all doors treated as unlocked): whether a
/// goal is dynamically reachable under the key-color rules is a question for
/// the planner, and shows up as zero prior mass rather than a sampler reject.
pub fn validate_map(ir: &ScenarioIr, map: &MapSample) -> Vec<String> {
    let mut violations = Vec::new();
    let grid = |cell: Cell| {
        cell.x >= 0 && cell.y >= 0 && (cell.x as u16) < map.width && (cell.y as u16) < map.height
    };

    for (name, cell) in &map.trophy_cells {
        if !grid(*cell) {
            violations.push(format!("trophy `{name}` placed out of bounds"));
        }
    }
    for door in &map.doors {
        if !grid(door.cell) {
            violations.push(format!("door `{}` placed out of bounds", door.id));
        }
    }
    for key in &map.key_cells {
        if !grid(key.cell) {
            violations.push(format!("key `{}` placed out of bounds", key.id));
        }
    }
    if !grid(map.agent_start) {
        violations.push("agent start out of bounds".into());
    }

    for goal in &ir.goals {
        if !map.trophy_cells.contains_key(goal) {
            violations.push(format!("trophy `{goal}` missing from map"));
        }
    }

    // Door lock lists must mirror the record's obstacles, within the per-door
    // lock budget.
    for (room, locks) in &ir.obstacles {
        if locks.is_empty() {
            continue;
        }
        match map.doors.iter().find(|d| &d.room == room) {
            None => violations.push(format!("room `{room}` has no door")),
            Some(door) => {
                let mut want = locks.clone();
                let mut got = door.locks.clone();
                want.sort();
                got.sort();
                if want != got {
                    violations.push(format!(
                        "door of `{room}` carries locks {got:?}, record says {want:?}"
                    ));
                }
                if door.locks.len() > ir.max_obstacle as usize {
                    violations.push(format!(
                        "door of `{room}` exceeds max_obstacle={}",
                        ir.max_obstacle
                    ));
                }
            }
        }
    }
    for door in &map.doors {
        let declared = ir.obstacles.get(&door.room).map(Vec::len).unwrap_or(0);
        if declared == 0 {
            violations.push(format!(
                "door `{}` guards undeclared room `{}`",
                door.id, door.room
            ));
        }
    }

    // Key colors must match the declaration as a multiset.
    let mut want: Vec<&str> = ir.keys.iter().map(String::as_str).collect();
    let mut got: Vec<&str> = map.key_cells.iter().map(|k| k.color.as_str()).collect();
    want.sort();
    got.sort();
    if want != got {
        for color in &ir.keys {
            if !map.key_cells.iter().any(|k| &k.color == color) {
                violations.push(format!("declared `{color}` key missing from map"));
            }
        }
        if map.key_cells.len() != ir.keys.len() {
            violations.push(format!(
                "map places {} keys, record declares {}",
                map.key_cells.len(),
                ir.keys.len()
            ));
        }
    }

    // Trophies behind doors exactly when the record says so.
    for goal in &ir.goals {
        let Some(cell) = map.trophy_cells.get(goal) else {
            continue;
        };
        let in_room = map.room_membership.get(cell);
        let declared_room = ir.locations.get(goal).filter(|room| {
            ir.obstacles
                .get(*room)
                .map(|locks| !locks.is_empty())
                .unwrap_or(false)
        });
        match (declared_room, in_room) {
            (Some(want), Some(got)) if want != got => {
                violations.push(format!(
                    "trophy `{goal}` placed in `{got}`, record says `{want}`"
                ));
            }
            (Some(want), None) => {
                violations.push(format!("trophy `{goal}` not placed inside `{want}`"));
            }
            (None, Some(_)) => {
                violations.push(format!("trophy `{goal}` placed behind a door"));
            }
            _ => {}
        }
    }

    // Solid-object collisions: door cells are exclusive; keys and the agent
    // keep their own cells.
    let mut occupied: BTreeMap<Cell, &str> = BTreeMap::new();
    for door in &map.doors {
        if let Some(prev) = occupied.insert(door.cell, "door") {
            violations.push(format!("door `{}` collides with a {prev}", door.id));
        }
    }
    for key in &map.key_cells {
        if let Some(prev) = occupied.insert(key.cell, "key") {
            violations.push(format!("key `{}` collides with a {prev}", key.id));
        }
    }
    for (name, cell) in &map.trophy_cells {
        if let Some(prev) = occupied.get(cell) {
            violations.push(format!("trophy `{name}` collides with a {prev}"));
        }
    }
    if occupied.contains_key(&map.agent_start)
        || map.trophy_cells.values().any(|c| *c == map.agent_start)
    {
        violations.push("agent start collides with a placed object".into());
    }

    // In spatial scenarios the constraint offsets hold exactly.
    if ir.dynamics_variant == DynamicsVariant::Spatial {
        for c in &ir.spatial_constraints {
            let anchor = if ir.agents.contains(&c.anchor) {
                Some(map.agent_start)
            } else {
                map.trophy_cells.get(&c.anchor).copied()
            };
            let target = map.trophy_cells.get(&c.target).copied();
            match (anchor, target) {
                (Some(a), Some(t)) => {
                    let (dx, dy) = c.direction.delta();
                    let expect = Cell::new(a.x + dx * c.steps as i16, a.y + dy * c.steps as i16);
                    if t != expect {
                        violations.push(format!(
                            "trophy `{}` is not exactly {} steps {} of `{}`",
                            c.target, c.steps, c.direction, c.anchor
                        ));
                    }
                }
                _ => violations.push(format!("constraint on `{}` references missing objects", c.target)),
            }
        }
    }

    // Every goal must be geometrically reachable once doors open.
    let reachable = reachable_cells(map);
    for (name, cell) in &map.trophy_cells {
        if !reachable.contains(cell) {
            violations.push(format!("trophy `{name}` is walled off"));
        }
    }

    violations
}

/// Breadth-first reach set from the agent start with every door unlocked.
/// Room interiors still gate on entering through their door cell.
fn reachable_cells(map: &MapSample) -> HashSet<Cell> {
    let room_of = |cell: Cell| map.room_membership.get(&cell);
    let is_door_of = |cell: Cell, room: &str| {
        map.doors
            .iter()
            .any(|d| d.cell == cell && d.room == room)
    };
    let mut seen = HashSet::new();
    let mut queue = VecDeque::new();
    seen.insert(map.agent_start);
    queue.push_back(map.agent_start);
    while let Some(cell) = queue.pop_front() {
        for dir in Direction::ALL {
            let next = cell.step(dir);
            if next.x < 0
                || next.y < 0
                || next.x as u16 >= map.width
                || next.y as u16 >= map.height
                || seen.contains(&next)
            {
                continue;
            }
            let ok = match (room_of(cell), room_of(next)) {
                (None, None) => true,
                (Some(a), Some(b)) => a == b,
                (None, Some(r)) => is_door_of(cell, r),
                (Some(r), None) => is_door_of(next, r),
            };
            if ok {
                seen.insert(next);
                queue.push_back(next);
            }
        }
    }
    seen
}
