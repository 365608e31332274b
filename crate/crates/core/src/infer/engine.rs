use std::cell::RefCell;
use std::collections::HashMap;

use crate::pddl::Formula;
use crate::planner::{
    optimal_cost, successors, successors_for_goal, GroundAction, World, WorldState,
};
use crate::Real;

use super::distributions::{softmax, GoalDistribution, PolicyDistribution};
use super::InferError;

/// Inference parameters.
#[derive(Debug, Clone, Copy)]
pub struct InferenceConfig<R: Real> {
    /// Rationality (inverse temperature) of the Boltzmann policy.
    pub beta: R,
    /// Floor applied to impossible observations so that contradictory
    /// evidence degrades to the prior instead of erroring.
    pub epsilon_floor: R,
    /// Macro-step budget for subgoal-condition enumeration.
    pub subgoal_horizon: u32,
}

impl<R: Real> Default for InferenceConfig<R> {
    fn default() -> Self {
        InferenceConfig {
            beta: R::from_f64(2.0).expect("scalar"),
            epsilon_floor: R::from_f64(1e-6).expect("scalar"),
            subgoal_horizon: 8,
        }
    }
}

impl<R: Real> InferenceConfig<R> {
    pub fn with_beta(beta: R) -> Self {
        InferenceConfig {
            beta,
            ..Default::default()
        }
    }

    fn validate(&self, goal_count: usize) -> Result<(), InferError> {
        if self.beta <= R::zero() {
            return Err(InferError::BadConfig("beta must be positive".into()));
        }
        if self.epsilon_floor < R::zero() {
            return Err(InferError::BadConfig(
                "epsilon_floor must be nonnegative".into(),
            ));
        }
        let bound = R::one() / R::from_usize(goal_count.max(1)).expect("scalar");
        if self.epsilon_floor >= bound {
            return Err(InferError::BadConfig(format!(
                "epsilon_floor must stay below 1/{goal_count}"
            )));
        }
        Ok(())
    }
}

/// The observed evidence a posterior conditions on.
#[derive(Debug, Clone)]
pub enum ObservationTrace {
    /// Step-by-step actions, applicable in order from the initial state.
    LowLevelActions(Vec<GroundAction>),
    /// A state condition the agent passes through while pursuing its goal.
    SubgoalCondition(Formula),
}

impl ObservationTrace {
    /// An empty action sequence: conditions on nothing.
    pub fn empty() -> Self {
        ObservationTrace::LowLevelActions(Vec::new())
    }
}

/// Inference engine bound to one world. Optimal costs are memoized per goal
/// behind a `RefCell`; clone the engine to query from multiple threads.
pub struct Engine<R: Real> {
    world: World,
    config: InferenceConfig<R>,
    cache: RefCell<Vec<HashMap<WorldState, Option<u32>>>>,
}

impl<R: Real> Engine<R> {
    pub fn new(world: World, config: InferenceConfig<R>) -> Result<Self, InferError> {
        config.validate(world.goals().len())?;
        let goals = world.goals().len();
        Ok(Engine {
            world,
            config,
            cache: RefCell::new(vec![HashMap::new(); goals]),
        })
    }

    pub fn world(&self) -> &World {
        &self.world
    }

    pub fn config(&self) -> &InferenceConfig<R> {
        &self.config
    }

    pub fn initial_state(&self) -> WorldState {
        self.world.initial_state()
    }

    pub fn goal_labels(&self) -> Vec<String> {
        self.world.goals().iter().map(|g| g.label.clone()).collect()
    }

    /// Memoized optimal cost from `state` to goal `g`; `None` is unreachable.
    pub fn cost_to_goal(&self, state: &WorldState, goal: usize) -> Option<u32> {
        if let Some(hit) = self.cache.borrow()[goal].get(state) {
            return *hit;
        }
        let cost = optimal_cost(&self.world, state, goal).cost();
        self.cache.borrow_mut()[goal].insert(state.clone(), cost);
        cost
    }

    /// Unnormalized prior weights `1/C(g, s0)`, zero for unreachable goals.
    pub(super) fn prior_weights(&self) -> Result<Vec<(String, R)>, InferError> {
        let start = self.world.initial_state();
        let mut weights = Vec::new();
        for (i, goal) in self.world.goals().iter().enumerate() {
            let w = match self.cost_to_goal(&start, i) {
                Some(0) => return Err(InferError::ZeroCostGoal(goal.label.clone())),
                Some(c) => R::one() / R::from_u32(c).expect("cost fits"),
                None => R::zero(),
            };
            weights.push((goal.label.clone(), w));
        }
        Ok(weights)
    }

    /// Prior over goals: mass proportional to `1/C(g, s0)`, with zero mass on
    /// unreachable goals.
    pub fn goal_prior(&self) -> Result<GoalDistribution<R>, InferError> {
        GoalDistribution::normalize(self.prior_weights()?)
            .map_err(|_| InferError::AllGoalsUnreachable)
    }

    /// Boltzmann policy at `state` for goal `g`: softmax of `beta * Q` over
    /// the actions applicable to an agent pursuing that goal. States where a
    /// trophy has been taken are absorbing and carry no policy.
    pub fn policy(
        &self,
        state: &WorldState,
        goal: usize,
    ) -> Result<PolicyDistribution<R>, InferError> {
        let label = || self.world.goals()[goal].label.clone();
        let sucs = successors_for_goal(&self.world, state, goal);
        if sucs.is_empty() && state.taken.is_some() {
            return Err(InferError::TerminalState(label()));
        }
        let mut entries = Vec::new();
        let mut any_finite = false;
        for (action, next) in sucs {
            let q = self
                .cost_to_goal(&next, goal)
                .map(|c| -((action.cost + c) as i64));
            any_finite |= q.is_some();
            entries.push((action, q));
        }
        if !any_finite {
            return Err(InferError::GoalUnreachableFromState(label()));
        }
        Ok(PolicyDistribution::new(softmax(entries, self.config.beta)))
    }

    /// Likelihood of an observed action sequence under goal `g`: the product
    /// of per-step policy probabilities along the replayed trajectory. A step
    /// with zero policy mass zeroes the product, which the epsilon floor
    /// replaces with `epsilon^t`. Walking over (or away from) the goal cell
    /// is not absorbing; inefficient detours are punished by the softmax,
    /// not by fiat.
    pub fn action_sequence_likelihood(
        &self,
        actions: &[GroundAction],
        goal: usize,
    ) -> Result<R, InferError> {
        self.action_sequence_likelihood_from(self.world.initial_state(), actions, goal)
    }

    /// Same as [`Engine::action_sequence_likelihood`], replayed from an
    /// arbitrary start state. The likelihood of a concatenated sequence is
    /// the product of its segments' likelihoods evaluated from the
    /// intermediate states (absent epsilon flooring).
    pub fn action_sequence_likelihood_from(
        &self,
        start: WorldState,
        actions: &[GroundAction],
        goal: usize,
    ) -> Result<R, InferError> {
        let mut state = start;
        let mut product = R::one();
        let mut impossible = false;
        for (i, action) in actions.iter().enumerate() {
            let next = successors(&self.world, &state)
                .into_iter()
                .find(|(a, _)| a == action)
                .map(|(_, s)| s)
                .ok_or_else(|| {
                    InferError::InapplicableSequence(self.world.describe_action(action), i)
                })?;
            if !impossible {
                match self.policy(&state, goal) {
                    Ok(policy) => {
                        let p = policy.prob(action);
                        if p <= R::zero() {
                            impossible = true;
                        } else {
                            product = product * p;
                        }
                    }
                    Err(InferError::GoalUnreachableFromState(_))
                    | Err(InferError::TerminalState(_)) => impossible = true,
                    Err(e) => return Err(e),
                }
            }
            state = next;
        }
        if impossible {
            return Ok(self.config.epsilon_floor.powi(actions.len() as i32));
        }
        Ok(product)
    }

    /// Exact posterior over goals: prior times observation likelihood,
    /// normalized once over the unnormalized joint weights (so an empty
    /// observation reproduces the prior bit for bit).
    pub fn posterior(&self, obs: &ObservationTrace) -> Result<GoalDistribution<R>, InferError> {
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
                        self.action_sequence_likelihood(seq, i)?
                    }
                    ObservationTrace::SubgoalCondition(f) => {
                        self.subgoal_condition_likelihood(f, i)?
                    }
                };
                w * likelihood
            };
            weights.push((label, joint));
        }
        GoalDistribution::normalize(weights)
    }
}

impl<R: Real> Clone for Engine<R> {
    fn clone(&self) -> Self {
        Engine {
            world: self.world.clone(),
            config: self.config,
            cache: RefCell::new(self.cache.borrow().clone()),
        }
    }
}
