use std::collections::HashMap;

use crate::pddl::Formula;
use crate::planner::{nav_costs, Direction, WorldState};
use crate::Real;

use super::distributions::softmax;
use super::engine::Engine;
use super::InferError;

/// One macro decision: perform the next key/lock interaction, or head
/// straight for the goal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum MacroMove {
    Pickup(u8),
    Unlock(u8, u8),
    Terminate,
}

impl<R: Real> Engine<R> {
    /// Probability that an agent following the Boltzmann policy toward `goal`
    /// passes through a state satisfying `condition` within the configured
    /// macro horizon.
    ///
    /// The enumeration walks a macro-action graph whose nodes are interaction
    /// points (pickups, unlocks, goal arrival) and whose edge costs are
    /// optimal navigation distances; the policy equation applies unchanged to
    /// the macro Q-values. Conditions over inventory and lock atoms change
    /// only at interactions, so checking at macro nodes is exact for them.
    pub fn subgoal_condition_likelihood(
        &self,
        condition: &Formula,
        goal: usize,
    ) -> Result<R, InferError> {
        let world = self.world();
        let compiled = world.compile_condition(condition)?;
        let start = world.initial_state();
        let floor = self.config().epsilon_floor;

        if world.eval_condition(&compiled, &start) {
            return Ok(R::one());
        }

        let mut frontier: HashMap<WorldState, R> = HashMap::new();
        frontier.insert(start, R::one());
        let mut hit = R::zero();

        for _ in 0..self.config().subgoal_horizon {
            if frontier.is_empty() {
                break;
            }
            let mut next_frontier: HashMap<WorldState, R> = HashMap::new();
            let mut states: Vec<(WorldState, R)> = frontier.into_iter().collect();
            states.sort_by(|(a, _), (b, _)| a.cmp(b));
            for (state, mass) in states {
                let options = self.macro_options(&state, goal);
                if options.is_empty() {
                    continue; // dead end: the goal fell out of reach
                }
                let scored = softmax(options, self.config().beta);
                for ((mv, next), p) in scored {
                    if p <= R::zero() {
                        continue;
                    }
                    let share = mass * p;
                    if world.eval_condition(&compiled, &next) {
                        hit = hit + share;
                    } else if mv != MacroMove::Terminate {
                        *next_frontier.entry(next).or_insert_with(R::zero) =
                            next_frontier.get(&next).copied().unwrap_or_else(R::zero) + share;
                    }
                }
            }
            frontier = next_frontier;
        }

        let residual: R = frontier.values().copied().sum();
        let tolerance = R::from_f64(1e-9).expect("scalar");
        if residual > tolerance {
            return Err(InferError::HorizonExceeded(
                residual.to_f64().unwrap_or(f64::NAN),
            ));
        }
        Ok(hit.max(floor))
    }

    /// Enumerate the macro moves available to an agent pursuing `goal`,
    /// scored by macro Q-value: `-(navigation + action + remaining cost)`.
    /// Moves whose result violates the surplus-key rule, or from which the
    /// goal becomes unreachable, are excluded.
    fn macro_options(
        &self,
        state: &WorldState,
        goal: usize,
    ) -> Vec<((MacroMove, WorldState), Option<i64>)> {
        let world = self.world();
        let nav = nav_costs(world, state);
        let unit = world.options.unit_cost;
        let mut options = Vec::new();

        for key in state.keys_on_map() {
            let at = world.keys[key as usize].cell;
            let Some(&d) = nav.get(&at) else { continue };
            let mut next = state.clone();
            next.agent = at;
            next.inventory |= 1 << key;
            next.key_on_map &= !(1 << key);
            if !world.state_valid_for_goal(&next, goal) {
                continue;
            }
            let q = self
                .cost_to_goal(&next, goal)
                .map(|c| -((d + unit + c) as i64));
            options.push(((MacroMove::Pickup(key), next), q));
        }

        for door in 0..world.doors.len() as u8 {
            if !state.is_locked(door) {
                continue;
            }
            for key in state.held_keys() {
                if world.can_unlock[key as usize] & (1 << door) == 0 {
                    continue;
                }
                let door_cell = world.doors[door as usize].cell;
                let spot = Direction::ALL
                    .iter()
                    .filter_map(|dir| {
                        let c = door_cell.step(*dir);
                        nav.get(&c).map(|d| (*d, c))
                    })
                    .min();
                let Some((d, at)) = spot else { continue };
                let mut next = state.clone();
                next.agent = at;
                next.inventory &= !(1 << key);
                next.locked &= !(1 << door);
                if !world.state_valid_for_goal(&next, goal) {
                    continue;
                }
                let q = self
                    .cost_to_goal(&next, goal)
                    .map(|c| -((d + unit + c) as i64));
                options.push(((MacroMove::Unlock(door, key), next), q));
            }
        }

        if let Some(target) = world.goals()[goal].target {
            if let Some(&d) = nav.get(&target) {
                let mut next = state.clone();
                next.agent = target;
                if world.state_valid_for_goal(&next, goal)
                    && world.goal_satisfied(&next, goal)
                {
                    options.push(((MacroMove::Terminate, next), Some(-(d as i64))));
                }
            }
        }

        options.retain(|(_, q)| q.is_some());
        options
    }
}
