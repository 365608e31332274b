//! A small typed-STRIPS subset of PDDL: typed objects, boolean atoms,
//! integer fluents with `+`/`-`/`=`, `exists` in preconditions, and
//! conjunctive effects (literals plus fluent assignments).
//!
//! The canonical operator shape this subset covers:
//!
//! ```text
//! (:action unlock
//!  :parameters (?a - agent ?k - key ?d - door)
//!  :precondition (and (has ?a ?k) (locked ?d)
//!                     (exists (?c - color) (and (iscolor ?k ?c) (iscolor ?d ?c)))
//!                     (or (and (= (xloc ?a) (xloc ?d)) (= (- (yloc ?a) 1) (yloc ?d)))
//!                         (and (= (xloc ?a) (xloc ?d)) (= (+ (yloc ?a) 1) (yloc ?d)))
//!                         (and (= (- (xloc ?a) 1) (xloc ?d)) (= (yloc ?a) (yloc ?d)))
//!                         (and (= (+ (xloc ?a) 1) (xloc ?d)) (= (yloc ?a) (yloc ?d)))))
//!  :effect (and (not (has ?a ?k)) (not (locked ?d))))
//! ```

mod ast;
mod eval;
mod ground;
mod lexer;
mod parser;
mod printer;

pub use ast::{
    ActionSchema, DomainAst, Expr, FluentSignature, Formula, GroundAtom, GroundFluent,
    PredicateSignature, ProblemInstance, Term,
};
pub use eval::{apply_effect, eval_formula, Binding, EvalError, EvalState, FactState};
pub use ground::{ground_actions, GroundedSchema};
pub use parser::{parse_domain, parse_formula, parse_operator};
pub use printer::{print_domain, print_formula};

use thiserror::Error;

/// Errors raised while parsing or validating PDDL text.
#[derive(Debug, Error)]
pub enum PddlError {
    /// Malformed s-expression text; positions are 1-based.
    #[error("syntax error at {line}:{col}: {message}")]
    Syntax { line: u32, col: u32, message: String },
    /// Well-formed text that violates the subset's declaration rules.
    #[error("semantic error: {0}")]
    Semantic(String),
}

impl PddlError {
    pub fn is_semantic(&self) -> bool {
        matches!(self, PddlError::Semantic(_))
    }
}


#[cfg(test)]
mod proptests {
    use std::collections::{BTreeMap, BTreeSet};

    use proptest::prelude::*;

    use super::*;
    use crate::worldgen::domains;

    fn domain() -> DomainAst {
        parse_domain(domains::COLOR_SAME).unwrap()
    }

    fn atom_pool() -> Vec<GroundAtom> {
        vec![
            GroundAtom::new("has", &["Alice", "key1"]),
            GroundAtom::new("has", &["Alice", "key2"]),
            GroundAtom::new("onmap", &["key1"]),
            GroundAtom::new("onmap", &["key2"]),
            GroundAtom::new("locked", &["doora"]),
            GroundAtom::new("locked", &["doorb"]),
            GroundAtom::new("iscolor", &["key1", "red"]),
            GroundAtom::new("iscolor", &["doora", "red"]),
            GroundAtom::new("taken", &["gold"]),
        ]
    }

    fn objects() -> BTreeMap<String, String> {
        [
            ("Alice", "agent"),
            ("key1", "key"),
            ("key2", "key"),
            ("doora", "door"),
            ("doorb", "door"),
            ("red", "color"),
            ("gold", "trophy"),
        ]
        .into_iter()
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .collect()
    }

    fn state_from_mask(mask: u16) -> FactState {
        let pool = atom_pool();
        let facts: BTreeSet<GroundAtom> = pool
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, a)| a.clone())
            .collect();
        let mut fluents = BTreeMap::new();
        for (name, x, y) in [
            ("Alice", 2, 2),
            ("key1", 1, 2),
            ("key2", 3, 2),
            ("doora", 2, 1),
            ("doorb", 2, 3),
            ("gold", 4, 4),
        ] {
            fluents.insert(GroundFluent::new("xloc", &[name]), x);
            fluents.insert(GroundFluent::new("yloc", &[name]), y);
        }
        FactState::new(&domain(), &objects(), facts, fluents)
    }

    proptest! {
        /// Applying the same effect to the same state twice yields identical
        /// results, and never mutates the input.
        #[test]
        fn apply_effect_is_pure(mask in 0u16..512, key in 0usize..2, door in 0usize..2) {
            let domain = domain();
            let unlock = domain.action("unlock").unwrap();
            let state = state_from_mask(mask);
            let before = state.clone();
            let binding = Binding::of(&[
                ("?a", "Alice"),
                ("?k", ["key1", "key2"][key]),
                ("?d", ["doora", "doorb"][door]),
            ]);
            let once = apply_effect(&state, &unlock.effect, &binding).unwrap();
            let twice = apply_effect(&state, &unlock.effect, &binding).unwrap();
            prop_assert_eq!(&once, &twice);
            prop_assert_eq!(state, before);
        }

        /// Atoms outside an effect's literal set never change (frame
        /// property), and the effect's own literals land as written.
        #[test]
        fn effects_only_touch_their_own_literals(mask in 0u16..512) {
            let domain = domain();
            let unlock = domain.action("unlock").unwrap();
            let state = state_from_mask(mask);
            let binding = Binding::of(&[("?a", "Alice"), ("?k", "key1"), ("?d", "doora")]);
            let next = apply_effect(&state, &unlock.effect, &binding).unwrap();

            let touched = [
                GroundAtom::new("has", &["Alice", "key1"]),
                GroundAtom::new("locked", &["doora"]),
            ];
            for atom in atom_pool() {
                let args: Vec<&str> = atom.args.iter().map(String::as_str).collect();
                if touched.contains(&atom) {
                    prop_assert!(!next.holds(&atom.pred, &args), "deleted literal {atom}");
                } else {
                    prop_assert_eq!(
                        state.holds(&atom.pred, &args),
                        next.holds(&atom.pred, &args),
                        "frame violation on {}", atom
                    );
                }
            }
        }

        /// Grounding size is the product of per-parameter object counts.
        #[test]
        fn grounding_count_is_the_type_product(keys in 1usize..5, doors in 1usize..4) {
            let domain = domain();
            let mut objects = BTreeMap::new();
            objects.insert("Alice".to_string(), "agent".to_string());
            objects.insert("gold".to_string(), "trophy".to_string());
            for i in 0..keys {
                objects.insert(format!("key{i}"), "key".to_string());
            }
            for i in 0..doors {
                objects.insert(format!("door{i}"), "door".to_string());
            }
            let problem = ProblemInstance {
                objects,
                initial_facts: BTreeSet::new(),
                initial_fluents: BTreeMap::new(),
                goal_candidates: vec![("gold".into(), Formula::truth())],
            };
            let grounded = ground_actions(&domain, &problem);
            let unlocks = grounded.iter().filter(|g| g.schema == "unlock").count();
            let pickups = grounded.iter().filter(|g| g.schema == "pickup").count();
            prop_assert_eq!(unlocks, keys * doors);
            prop_assert_eq!(pickups, keys);
        }
    }
}
