use std::collections::{BTreeMap, BTreeSet};

use crate::pddl::{DomainAst, Expr, Formula, GroundAtom, GroundFluent, ProblemInstance, Term};
use crate::planner::Cell;

use super::ir::ScenarioIr;
use super::sampler::{room_slug, MapSample};
use super::WorldgenError;

/// Compile an accepted map into a grounded problem: objects and initial
/// facts encode the map, and each goal label becomes an agent/trophy
/// co-location formula.
pub fn compile_to_problem(
    ir: &ScenarioIr,
    map: &MapSample,
    domain: &DomainAst,
) -> Result<ProblemInstance, WorldgenError> {
    let [agent] = ir.agents.as_slice() else {
        return Err(WorldgenError::Compile(format!(
            "expected exactly one agent, got {}",
            ir.agents.len()
        )));
    };

    let require_type = |ty: &str| -> Result<(), WorldgenError> {
        if domain.type_hierarchy.contains_key(ty) {
            Ok(())
        } else {
            Err(WorldgenError::Compile(format!(
                "domain `{}` lacks type `{ty}`",
                domain.name
            )))
        }
    };
    let require_pred = |name: &str| -> Result<(), WorldgenError> {
        if domain.predicate(name).is_some() {
            Ok(())
        } else {
            Err(WorldgenError::Compile(format!(
                "domain `{}` lacks predicate `{name}`",
                domain.name
            )))
        }
    };
    require_type("agent")?;
    require_type("trophy")?;
    if domain.fluent("xloc").is_none() || domain.fluent("yloc").is_none() {
        return Err(WorldgenError::Compile(format!(
            "domain `{}` lacks xloc/yloc fluents",
            domain.name
        )));
    }

    let mut objects: BTreeMap<String, String> = BTreeMap::new();
    let mut facts: BTreeSet<GroundAtom> = BTreeSet::new();
    let mut fluents: BTreeMap<GroundFluent, i64> = BTreeMap::new();

    let place = |name: &str, cell: Cell, fluents: &mut BTreeMap<GroundFluent, i64>| {
        fluents.insert(GroundFluent::new("xloc", &[name]), cell.x as i64);
        fluents.insert(GroundFluent::new("yloc", &[name]), cell.y as i64);
    };

    objects.insert(agent.clone(), "agent".into());
    place(agent, map.agent_start, &mut fluents);

    for goal in &ir.goals {
        let cell = map.trophy_cells.get(goal).ok_or_else(|| {
            WorldgenError::Compile(format!("map lacks a cell for trophy `{goal}`"))
        })?;
        objects.insert(goal.clone(), "trophy".into());
        place(goal, *cell, &mut fluents);
    }

    let mut colors: BTreeSet<String> = BTreeSet::new();

    if !map.key_cells.is_empty() {
        require_type("key")?;
        require_pred("onmap")?;
        require_pred("has")?;
        for key in &map.key_cells {
            objects.insert(key.id.clone(), "key".into());
            place(&key.id, key.cell, &mut fluents);
            facts.insert(GroundAtom::new("onmap", &[&key.id]));
            if key.color != "any" {
                colors.insert(key.color.clone());
                facts.insert(GroundAtom::new("iscolor", &[&key.id, &key.color]));
            }
        }
    }

    if !map.doors.is_empty() {
        require_type("door")?;
        require_type("room")?;
        require_pred("locked")?;
        require_pred("guards")?;
        require_pred("inroom")?;
        for door in &map.doors {
            let room = room_slug(&door.room);
            objects.insert(room.clone(), "room".into());
            for (i, lock) in door.locks.iter().enumerate() {
                let entity = format!("{}_{}", door.id, i + 1);
                objects.insert(entity.clone(), "door".into());
                place(&entity, door.cell, &mut fluents);
                if door.locked {
                    facts.insert(GroundAtom::new("locked", &[&entity]));
                }
                facts.insert(GroundAtom::new("guards", &[&entity, &room]));
                if lock != "any" {
                    colors.insert(lock.clone());
                    facts.insert(GroundAtom::new("iscolor", &[&entity, lock]));
                }
            }
        }
        for (cell, label) in &map.room_membership {
            let room = room_slug(label);
            for (trophy, tcell) in &map.trophy_cells {
                if tcell == cell {
                    facts.insert(GroundAtom::new("inroom", &[trophy, &room]));
                }
            }
        }
    }

    if !colors.is_empty() {
        require_type("color")?;
        require_pred("iscolor")?;
        for color in &colors {
            objects.insert(color.clone(), "color".into());
        }
    }

    let goal_candidates = ir
        .goals
        .iter()
        .map(|goal| {
            let eq = |fluent: &str| {
                Formula::NumEq(
                    Expr::Fluent(fluent.into(), vec![Term::Object(agent.clone())]),
                    Expr::Fluent(fluent.into(), vec![Term::Object(goal.clone())]),
                )
            };
            (goal.clone(), Formula::And(vec![eq("xloc"), eq("yloc")]))
        })
        .collect();

    let problem = ProblemInstance {
        objects,
        initial_facts: facts,
        initial_fluents: fluents,
        goal_candidates,
    };
    problem
        .validate(domain)
        .map_err(|e| WorldgenError::Compile(e.to_string()))?;
    Ok(problem)
}
