use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

/// A parsed planning domain: type hierarchy, signatures, and action schemas.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DomainAst {
    pub name: String,
    /// Type name to parent type. Roots map to `"object"`.
    pub type_hierarchy: BTreeMap<String, String>,
    pub predicates: Vec<PredicateSignature>,
    pub fluents: Vec<FluentSignature>,
    pub actions: Vec<ActionSchema>,
}

impl DomainAst {
    pub fn predicate(&self, name: &str) -> Option<&PredicateSignature> {
        self.predicates.iter().find(|p| p.name == name)
    }

    pub fn fluent(&self, name: &str) -> Option<&FluentSignature> {
        self.fluents.iter().find(|f| f.name == name)
    }

    pub fn action(&self, name: &str) -> Option<&ActionSchema> {
        self.actions.iter().find(|a| a.name == name)
    }

    /// True when `ty` equals `ancestor` or derives from it transitively.
    pub fn is_subtype(&self, ty: &str, ancestor: &str) -> bool {
        if ty == ancestor {
            return true;
        }
        let mut cur = ty;
        while let Some(parent) = self.type_hierarchy.get(cur) {
            if parent == ancestor {
                return true;
            }
            if parent == cur {
                break;
            }
            cur = parent;
        }
        ancestor == "object" && self.type_hierarchy.contains_key(ty)
    }

    /// Replace the schema with the same name, or append if new.
    pub fn replace_action(&mut self, schema: ActionSchema) {
        match self.actions.iter_mut().find(|a| a.name == schema.name) {
            Some(slot) => *slot = schema,
            None => self.actions.push(schema),
        }
    }
}

/// Boolean predicate signature, e.g. `(has ?a - agent ?k - key)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredicateSignature {
    pub name: String,
    /// Parameter variables with their declared types.
    pub params: Vec<(String, String)>,
}

/// Integer fluent signature, e.g. `(xloc ?o - object)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FluentSignature {
    pub name: String,
    pub params: Vec<(String, String)>,
}

/// An action schema with typed parameters, precondition, and effect.
///
/// The effect is restricted to a conjunction of literals and fluent
/// assignments; the parser normalizes single literals into a one-element
/// conjunction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionSchema {
    pub name: String,
    pub parameters: Vec<(String, String)>,
    pub precondition: Formula,
    pub effect: Formula,
}

/// A variable (`?x`) or object constant in argument position.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(String),
    Object(String),
}

impl Term {
    pub fn name(&self) -> &str {
        match self {
            Term::Var(v) | Term::Object(v) => v,
        }
    }
}

/// Integer-valued expression over fluents and constants.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Fluent(String, Vec<Term>),
    Const(i64),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
}

/// Recursive formula node.
///
/// `Assign` is only legal inside effects; `Exists` only inside preconditions
/// and standalone condition formulas. `ObjEq` is PDDL `:equality` over plain
/// terms, kept separate from the numeric comparison.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Formula {
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Not(Box<Formula>),
    Exists {
        var: String,
        ty: String,
        body: Box<Formula>,
    },
    Atom {
        pred: String,
        args: Vec<Term>,
    },
    NumEq(Expr, Expr),
    ObjEq(Term, Term),
    Assign {
        fluent: String,
        args: Vec<Term>,
        value: Expr,
    },
}

impl Formula {
    /// Empty conjunction: vacuously true.
    pub fn truth() -> Formula {
        Formula::And(Vec::new())
    }

    /// Conjuncts of an `And`, or the formula itself as a single conjunct.
    pub fn conjuncts(&self) -> &[Formula] {
        match self {
            Formula::And(items) => items,
            _ => std::slice::from_ref(self),
        }
    }
}

/// A ground boolean atom, e.g. `(has Alice key1)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GroundAtom {
    pub pred: String,
    pub args: Vec<String>,
}

impl GroundAtom {
    pub fn new(pred: &str, args: &[&str]) -> Self {
        GroundAtom {
            pred: pred.to_string(),
            args: args.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl std::fmt::Display for GroundAtom {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}", self.pred)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        write!(f, ")")
    }
}

/// A ground fluent term, e.g. `(xloc Alice)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GroundFluent {
    pub fluent: String,
    pub args: Vec<String>,
}

impl GroundFluent {
    pub fn new(fluent: &str, args: &[&str]) -> Self {
        GroundFluent {
            fluent: fluent.to_string(),
            args: args.iter().map(|s| s.to_string()).collect(),
        }
    }
}

/// A grounded problem: typed objects, initial state, and the candidate goal
/// formulas (one per trophy).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProblemInstance {
    /// Object name to its declared type.
    pub objects: BTreeMap<String, String>,
    pub initial_facts: BTreeSet<GroundAtom>,
    pub initial_fluents: BTreeMap<GroundFluent, i64>,
    /// `(trophy label, ground goal formula)` pairs.
    pub goal_candidates: Vec<(String, Formula)>,
}

impl ProblemInstance {
    pub fn objects_of_type<'a>(&'a self, domain: &'a DomainAst, ty: &'a str) -> Vec<&'a str> {
        self.objects
            .iter()
            .filter(|(_, t)| domain.is_subtype(t, ty) || t.as_str() == ty)
            .map(|(name, _)| name.as_str())
            .collect()
    }

    /// Check that every ground atom and fluent uses declared objects with
    /// signature-consistent arity and types, and that each trophy appears in
    /// exactly one goal candidate.
    pub fn validate(&self, domain: &DomainAst) -> Result<(), super::PddlError> {
        use super::PddlError::Semantic;
        for atom in &self.initial_facts {
            let sig = domain
                .predicate(&atom.pred)
                .ok_or_else(|| Semantic(format!("undeclared predicate `{}`", atom.pred)))?;
            if sig.params.len() != atom.args.len() {
                return Err(Semantic(format!(
                    "predicate `{}` expects {} args, got {}",
                    atom.pred,
                    sig.params.len(),
                    atom.args.len()
                )));
            }
            for (arg, (_, ty)) in atom.args.iter().zip(&sig.params) {
                let actual = self
                    .objects
                    .get(arg)
                    .ok_or_else(|| Semantic(format!("undeclared object `{arg}` in {atom}")))?;
                if !domain.is_subtype(actual, ty) {
                    return Err(Semantic(format!(
                        "object `{arg}` of type `{actual}` used where `{ty}` expected in {atom}"
                    )));
                }
            }
        }
        for fluent in self.initial_fluents.keys() {
            let sig = domain
                .fluent(&fluent.fluent)
                .ok_or_else(|| Semantic(format!("undeclared fluent `{}`", fluent.fluent)))?;
            if sig.params.len() != fluent.args.len() {
                return Err(Semantic(format!(
                    "fluent `{}` expects {} args, got {}",
                    fluent.fluent,
                    sig.params.len(),
                    fluent.args.len()
                )));
            }
            for arg in &fluent.args {
                if !self.objects.contains_key(arg) {
                    return Err(Semantic(format!(
                        "undeclared object `{arg}` in fluent `{}`",
                        fluent.fluent
                    )));
                }
            }
        }
        let trophies: Vec<&String> = self
            .objects
            .iter()
            .filter(|(_, t)| domain.is_subtype(t, "trophy"))
            .map(|(n, _)| n)
            .collect();
        for t in &trophies {
            let n = self
                .goal_candidates
                .iter()
                .filter(|(label, _)| label == *t)
                .count();
            if n != 1 {
                return Err(Semantic(format!(
                    "trophy `{t}` appears in {n} goal candidates, expected exactly 1"
                )));
            }
        }
        Ok(())
    }
}
