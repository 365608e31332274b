use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, VecDeque};

use super::state::{ActionKind, Cell, Direction, GroundAction, WorldState};
use super::world::World;
use super::PlanError;

/// Outcome of an optimal-cost query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PlanResult {
    Reached { cost: u32, actions: Vec<GroundAction> },
    Unreachable,
}

impl PlanResult {
    pub fn cost(&self) -> Option<u32> {
        match self {
            PlanResult::Reached { cost, .. } => Some(*cost),
            PlanResult::Unreachable => None,
        }
    }

    pub fn is_reached(&self) -> bool {
        matches!(self, PlanResult::Reached { .. })
    }
}

/// Exactly the applicable ground actions in `state` with their successor
/// states, in deterministic action order. Absorbing states (trophy taken)
/// have no successors.
pub fn successors(world: &World, state: &WorldState) -> Vec<(GroundAction, WorldState)> {
    let mut out = Vec::new();
    if state.taken.is_some() {
        return out;
    }
    let cost = world.options.unit_cost;
    for dir in Direction::ALL {
        let to = state.agent.step(dir);
        if world.move_ok(state, state.agent, to) {
            let mut next = state.clone();
            next.agent = to;
            out.push((
                GroundAction {
                    kind: ActionKind::Move(dir),
                    cost,
                },
                next,
            ));
        }
    }
    for def in &world.ground {
        if world.eval_cond(&def.pre, state) {
            let next = world.apply_ops(state, &def.ops);
            out.push((
                GroundAction {
                    kind: def.kind,
                    cost,
                },
                next,
            ));
        }
    }
    out.sort_by_key(|(a, _)| a.kind);
    out
}

/// Applicable actions for an agent pursuing `goal`: mechanical successors
/// minus states pruned by the surplus-key rule.
pub fn successors_for_goal(
    world: &World,
    state: &WorldState,
    goal: usize,
) -> Vec<(GroundAction, WorldState)> {
    successors(world, state)
        .into_iter()
        .filter(|(_, s)| world.state_valid_for_goal(s, goal))
        .collect()
}

/// A* with a Manhattan-distance heuristic to the goal's target cell
/// (admissible and consistent under uniform action costs; zero when the goal
/// has no co-location shape). Ties break on lower path cost, then insertion
/// order, which together with ordered successors pins down a unique plan.
pub fn optimal_cost(world: &World, start: &WorldState, goal: usize) -> PlanResult {
    let h = |s: &WorldState| -> u32 {
        match world.goals()[goal].target {
            Some(target) => s.agent.manhattan(target) * world.options.unit_cost,
            None => 0,
        }
    };

    if world.goal_satisfied(start, goal) {
        return PlanResult::Reached {
            cost: 0,
            actions: Vec::new(),
        };
    }

    let mut best: HashMap<WorldState, u32> = HashMap::new();
    let mut parent: HashMap<WorldState, (WorldState, GroundAction)> = HashMap::new();
    let mut heap: BinaryHeap<Reverse<(u32, u32, u64)>> = BinaryHeap::new();
    let mut by_seq: HashMap<u64, WorldState> = HashMap::new();
    let mut seq: u64 = 0;

    best.insert(start.clone(), 0);
    by_seq.insert(seq, start.clone());
    heap.push(Reverse((h(start), 0, seq)));
    seq += 1;

    while let Some(Reverse((_, g, id))) = heap.pop() {
        let state = by_seq.remove(&id).expect("queued state");
        if best.get(&state).copied() != Some(g) {
            continue; // stale entry
        }
        if world.goal_satisfied(&state, goal) {
            let mut actions = Vec::new();
            let mut cur = state;
            while let Some((prev, act)) = parent.get(&cur) {
                actions.push(*act);
                cur = prev.clone();
            }
            actions.reverse();
            return PlanResult::Reached { cost: g, actions };
        }
        for (action, next) in successors_for_goal(world, &state, goal) {
            let ng = g + action.cost;
            if best.get(&next).is_none_or(|&old| ng < old) {
                best.insert(next.clone(), ng);
                parent.insert(next.clone(), (state.clone(), action));
                by_seq.insert(seq, next.clone());
                heap.push(Reverse((ng + h(&next), ng, seq)));
                seq += 1;
            }
        }
    }
    PlanResult::Unreachable
}

/// Q-value of taking `action` in `state` while pursuing `goal`: the negated
/// total cost `-(cost(action) + C(goal, result))`, or `None` for negative
/// infinity when the goal is unreachable afterwards.
pub fn q_value(
    world: &World,
    state: &WorldState,
    action: &GroundAction,
    goal: usize,
) -> Result<Option<i64>, PlanError> {
    let next = successors(world, state)
        .into_iter()
        .find(|(a, _)| a == action)
        .map(|(_, s)| s)
        .ok_or_else(|| PlanError::InapplicableAction(world.describe_action(action)))?;
    if !world.state_valid_for_goal(&next, goal) {
        return Ok(None);
    }
    Ok(optimal_cost(world, &next, goal)
        .cost()
        .map(|c| -((action.cost + c) as i64)))
}

/// Uniform-cost search over the same transition system. Kept free of the A*
/// machinery so it can serve as an independent cost oracle in tests.
pub fn uniform_cost(world: &World, start: &WorldState, goal: usize) -> Option<u32> {
    if world.goal_satisfied(start, goal) {
        return Some(0);
    }
    let mut dist: HashMap<WorldState, u32> = HashMap::new();
    let mut heap: BinaryHeap<Reverse<(u32, u64)>> = BinaryHeap::new();
    let mut by_seq: HashMap<u64, WorldState> = HashMap::new();
    dist.insert(start.clone(), 0);
    by_seq.insert(0, start.clone());
    heap.push(Reverse((0, 0)));
    let mut seq = 1u64;
    while let Some(Reverse((d, id))) = heap.pop() {
        let state = by_seq.remove(&id).expect("queued state");
        if dist.get(&state).copied() != Some(d) {
            continue;
        }
        if world.goal_satisfied(&state, goal) {
            return Some(d);
        }
        for (action, next) in successors(world, &state) {
            if !world.state_valid_for_goal(&next, goal) {
                continue;
            }
            let nd = d + action.cost;
            if dist.get(&next).is_none_or(|&old| nd < old) {
                dist.insert(next.clone(), nd);
                by_seq.insert(seq, next.clone());
                heap.push(Reverse((nd, seq)));
                seq += 1;
            }
        }
    }
    None
}

/// Pure-navigation distances from the agent's cell under the current lock
/// and room configuration: breadth-first over move transitions only.
pub fn nav_costs(world: &World, state: &WorldState) -> HashMap<Cell, u32> {
    let mut dist = HashMap::new();
    let mut queue = VecDeque::new();
    dist.insert(state.agent, 0u32);
    queue.push_back(state.agent);
    while let Some(cell) = queue.pop_front() {
        let d = dist[&cell];
        for dir in Direction::ALL {
            let to = cell.step(dir);
            if world.move_ok(state, cell, to) && !dist.contains_key(&to) {
                dist.insert(to, d + world.options.unit_cost);
                queue.push_back(to);
            }
        }
    }
    dist
}
