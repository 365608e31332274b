use std::collections::{HashMap, HashSet};

use crate::planner::{successors, CompiledCondition, GroundAction, WorldState};
use crate::Real;

use super::distributions::GoalDistribution;
use super::engine::{Engine, ObservationTrace};
use super::InferError;

const STATE_LIMIT: usize = 100_000;

impl<R: Real> Engine<R> {
    /// Test oracle: the posterior computed by exhaustively enumerating
    /// low-level policy rollouts to `horizon` steps and summing path
    /// probabilities consistent with the observation. Slower than
    /// [`Engine::posterior`] and independent of its likelihood code paths.
    pub fn brute_force_posterior(
        &self,
        obs: &ObservationTrace,
        horizon: u32,
    ) -> Result<GoalDistribution<R>, InferError> {
        let prior = self.prior_weights()?;
        if prior.iter().all(|(_, w)| *w <= R::zero()) {
            return Err(InferError::AllGoalsUnreachable);
        }
        let mut weights = Vec::new();
        for (i, (label, w)) in prior.into_iter().enumerate() {
            let joint = if w <= R::zero() {
                R::zero()
            } else {
                let likelihood = match obs {
                    ObservationTrace::LowLevelActions(seq) => {
                        self.enumerate_sequence_likelihood(seq, i)?
                    }
                    ObservationTrace::SubgoalCondition(f) => {
                        let compiled = self.world().compile_condition(f)?;
                        self.enumerate_hitting_probability(&compiled, i, horizon)?
                    }
                };
                w * likelihood
            };
            weights.push((label, joint));
        }
        GoalDistribution::normalize(weights)
    }

    /// Push the full probability mass step by step, keeping only rollouts
    /// whose actions match the observation.
    fn enumerate_sequence_likelihood(
        &self,
        actions: &[GroundAction],
        goal: usize,
    ) -> Result<R, InferError> {
        let world = self.world();
        let mut states: HashMap<WorldState, R> = HashMap::new();
        states.insert(world.initial_state(), R::one());
        for action in actions {
            let mut next_states: HashMap<WorldState, R> = HashMap::new();
            for (state, mass) in &states {
                let policy = match self.policy(state, goal) {
                    Ok(p) => p,
                    Err(InferError::GoalUnreachableFromState(_))
                    | Err(InferError::TerminalState(_)) => continue,
                    Err(e) => return Err(e),
                };
                let sucs = successors(world, state);
                for (a, p) in policy.iter() {
                    if a != action || p <= R::zero() {
                        continue;
                    }
                    let next = sucs
                        .iter()
                        .find(|(b, _)| b == a)
                        .map(|(_, s)| s.clone())
                        .expect("policy actions are applicable");
                    let slot = next_states.entry(next).or_insert_with(R::zero);
                    *slot = *slot + *mass * p;
                }
            }
            states = next_states;
            if states.len() > STATE_LIMIT {
                return Err(InferError::StateSpaceTooLarge(STATE_LIMIT));
            }
        }
        let total: R = states.values().copied().sum();
        if total <= R::zero() {
            return Ok(self.config().epsilon_floor.powi(actions.len() as i32));
        }
        Ok(total)
    }

    /// Forward-enumerate the Markov chain the policy induces, absorbing mass
    /// the first time a state satisfies the condition (hit) or the goal
    /// (miss). Residual mass past the horizon counts as a miss.
    pub fn enumerate_hitting_probability(
        &self,
        condition: &CompiledCondition,
        goal: usize,
        horizon: u32,
    ) -> Result<R, InferError> {
        let world = self.world();
        let start = world.initial_state();
        if world.eval_condition(condition, &start) {
            return Ok(R::one());
        }
        let mut frontier: HashMap<WorldState, R> = HashMap::new();
        frontier.insert(start, R::one());
        let mut hit = R::zero();
        let mut seen: HashSet<WorldState> = HashSet::new();

        for _ in 0..horizon {
            if frontier.is_empty() {
                break;
            }
            let mut next_frontier: HashMap<WorldState, R> = HashMap::new();
            for (state, mass) in &frontier {
                if world.goal_satisfied(state, goal) {
                    continue; // miss: agent stopped at the goal
                }
                let policy = match self.policy(state, goal) {
                    Ok(p) => p,
                    Err(InferError::GoalUnreachableFromState(_))
                    | Err(InferError::TerminalState(_)) => continue,
                    Err(e) => return Err(e),
                };
                let sucs = successors(world, state);
                for (a, p) in policy.iter() {
                    if p <= R::zero() {
                        continue;
                    }
                    let next = sucs
                        .iter()
                        .find(|(b, _)| b == a)
                        .map(|(_, s)| s.clone())
                        .expect("policy actions are applicable");
                    let share = *mass * p;
                    if world.eval_condition(condition, &next) {
                        hit = hit + share;
                    } else {
                        seen.insert(next.clone());
                        if seen.len() > STATE_LIMIT {
                            return Err(InferError::StateSpaceTooLarge(STATE_LIMIT));
                        }
                        let slot = next_frontier.entry(next).or_insert_with(R::zero);
                        *slot = *slot + share;
                    }
                }
            }
            frontier = next_frontier;
        }
        Ok(hit.max(self.config().epsilon_floor))
    }
}
