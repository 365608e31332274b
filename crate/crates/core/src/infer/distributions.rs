use std::collections::BTreeMap;

use crate::planner::GroundAction;
use crate::Real;

use super::InferError;

/// Normalized probability map over trophy hypotheses.
#[derive(Debug, Clone, PartialEq)]
pub struct GoalDistribution<R: Real> {
    mass: BTreeMap<String, R>,
}

impl<R: Real> GoalDistribution<R> {
    /// Normalize nonnegative weights into a distribution. Fails with
    /// `ZeroEvidence` when every weight is zero.
    pub fn normalize(weights: Vec<(String, R)>) -> Result<Self, InferError> {
        let total: R = weights.iter().map(|(_, w)| *w).sum();
        if total <= R::zero() {
            return Err(InferError::ZeroEvidence);
        }
        Ok(GoalDistribution {
            mass: weights
                .into_iter()
                .map(|(label, w)| (label, w / total))
                .collect(),
        })
    }

    pub fn get(&self, label: &str) -> R {
        self.mass.get(label).copied().unwrap_or_else(R::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, R)> {
        self.mass.iter().map(|(l, p)| (l.as_str(), *p))
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    pub fn total(&self) -> R {
        self.mass.values().copied().sum()
    }

    /// Label with the greatest mass (ties break to the lexicographically
    /// first label, which `BTreeMap` iteration order provides).
    pub fn argmax(&self) -> Option<&str> {
        self.mass
            .iter()
            .fold(None::<(&str, R)>, |best, (l, p)| match best {
                Some((_, bp)) if bp >= *p => best,
                _ => Some((l.as_str(), *p)),
            })
            .map(|(l, _)| l)
    }

    /// Total variation distance to another distribution over the same labels.
    pub fn total_variation(&self, other: &GoalDistribution<R>) -> R {
        let two = R::from_f64(2.0).expect("scalar");
        let mut sum = R::zero();
        for (label, p) in &self.mass {
            sum = sum + (*p - other.get(label)).abs();
        }
        for (label, q) in &other.mass {
            if !self.mass.contains_key(label) {
                sum = sum + q.abs();
            }
        }
        sum / two
    }
}

/// Per-state distribution over applicable actions. Actions with a Q-value of
/// negative infinity carry exactly zero mass.
#[derive(Debug, Clone)]
pub struct PolicyDistribution<R: Real> {
    entries: Vec<(GroundAction, R)>,
}

impl<R: Real> PolicyDistribution<R> {
    pub(crate) fn new(entries: Vec<(GroundAction, R)>) -> Self {
        PolicyDistribution { entries }
    }

    pub fn prob(&self, action: &GroundAction) -> R {
        self.entries
            .iter()
            .find(|(a, _)| a == action)
            .map(|(_, p)| *p)
            .unwrap_or_else(R::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&GroundAction, R)> {
        self.entries.iter().map(|(a, p)| (a, *p))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total(&self) -> R {
        self.entries.iter().map(|(_, p)| *p).sum()
    }
}

/// Numerically stabilized softmax of `beta * q` over entries with finite Q;
/// `None` stands for negative infinity and yields exactly zero mass.
pub(crate) fn softmax<R: Real, T>(items: Vec<(T, Option<i64>)>, beta: R) -> Vec<(T, R)> {
    let max_q = items.iter().filter_map(|(_, q)| *q).max();
    let Some(max_q) = max_q else {
        return items.into_iter().map(|(t, _)| (t, R::zero())).collect();
    };
    let weights: Vec<R> = items
        .iter()
        .map(|(_, q)| match q {
            Some(q) => (beta * R::from_i64(q - max_q).expect("q fits")).exp(),
            None => R::zero(),
        })
        .collect();
    let total: R = weights.iter().copied().sum();
    items
        .into_iter()
        .zip(weights)
        .map(|((t, _), w)| (t, w / total))
        .collect()
}
