use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use super::ast::*;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("unknown fluent `{0}`")]
    UnknownFluent(String),
    #[error("illegal effect: {0}")]
    IllegalEffect(String),
}

/// Variable-to-object binding used while evaluating formulas.
#[derive(Debug, Clone, Default)]
pub struct Binding(Vec<(String, String)>);

impl Binding {
    pub fn new() -> Self {
        Binding(Vec::new())
    }

    pub fn of(pairs: &[(&str, &str)]) -> Self {
        Binding(
            pairs
                .iter()
                .map(|(v, o)| (v.to_string(), o.to_string()))
                .collect(),
        )
    }

    pub fn push(&mut self, var: &str, object: &str) {
        self.0.push((var.to_string(), object.to_string()));
    }

    pub fn pop(&mut self) {
        self.0.pop();
    }

    pub fn lookup(&self, var: &str) -> Option<&str> {
        self.0
            .iter()
            .rev()
            .find(|(v, _)| v == var)
            .map(|(_, o)| o.as_str())
    }
}

/// Read access to a world state, as needed by formula evaluation.
pub trait EvalState {
    fn holds(&self, pred: &str, args: &[&str]) -> bool;
    fn fluent_value(&self, fluent: &str, args: &[&str]) -> Option<i64>;
    fn objects_of_type(&self, ty: &str) -> Vec<&str>;
}

/// Write access for effect application.
pub trait EffectSink {
    fn set_atom(&mut self, pred: &str, args: &[&str], value: bool) -> Result<(), EvalError>;
    fn set_fluent(&mut self, fluent: &str, args: &[&str], value: i64) -> Result<(), EvalError>;
}

fn resolve<'a>(term: &'a Term, binding: &'a Binding) -> Result<&'a str, EvalError> {
    match term {
        Term::Object(name) => Ok(name),
        Term::Var(var) => binding
            .lookup(var)
            .ok_or_else(|| EvalError::UnboundVariable(var.clone())),
    }
}

fn resolve_args<'a>(args: &'a [Term], binding: &'a Binding) -> Result<Vec<&'a str>, EvalError> {
    args.iter().map(|t| resolve(t, binding)).collect()
}

/// Standard satisfaction semantics: `exists` iterates objects of the
/// quantified type, arithmetic runs over integer fluents.
pub fn eval_formula<S: EvalState>(
    state: &S,
    formula: &Formula,
    binding: &Binding,
) -> Result<bool, EvalError> {
    let mut binding = binding.clone();
    eval_node(state, formula, &mut binding)
}

fn eval_node<S: EvalState>(
    state: &S,
    formula: &Formula,
    binding: &mut Binding,
) -> Result<bool, EvalError> {
    match formula {
        Formula::And(items) => {
            for item in items {
                if !eval_node(state, item, binding)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        Formula::Or(items) => {
            for item in items {
                if eval_node(state, item, binding)? {
                    return Ok(true);
                }
            }
            Ok(false)
        }
        Formula::Not(inner) => Ok(!eval_node(state, inner, binding)?),
        Formula::Exists { var, ty, body } => {
            let candidates: Vec<String> = state
                .objects_of_type(ty)
                .into_iter()
                .map(str::to_string)
                .collect();
            for obj in candidates {
                binding.push(var, &obj);
                let holds = eval_node(state, body, binding)?;
                binding.pop();
                if holds {
                    return Ok(true);
                }
            }
            Ok(false)
        }
        Formula::Atom { pred, args } => {
            let resolved = resolve_args(args, binding)?;
            Ok(state.holds(pred, &resolved))
        }
        Formula::NumEq(a, b) => Ok(eval_expr(state, a, binding)? == eval_expr(state, b, binding)?),
        Formula::ObjEq(a, b) => Ok(resolve(a, binding)? == resolve(b, binding)?),
        Formula::Assign { .. } => Err(EvalError::IllegalEffect(
            "assignment evaluated as a condition".into(),
        )),
    }
}

pub(crate) fn eval_expr<S: EvalState>(
    state: &S,
    expr: &Expr,
    binding: &Binding,
) -> Result<i64, EvalError> {
    match expr {
        Expr::Const(n) => Ok(*n),
        Expr::Add(a, b) => Ok(eval_expr(state, a, binding)? + eval_expr(state, b, binding)?),
        Expr::Sub(a, b) => Ok(eval_expr(state, a, binding)? - eval_expr(state, b, binding)?),
        Expr::Fluent(name, args) => {
            let resolved = resolve_args(args, binding)?;
            state
                .fluent_value(name, &resolved)
                .ok_or_else(|| EvalError::UnknownFluent(format!("({name} {})", resolved.join(" "))))
        }
    }
}

/// Apply an effect conjunction to a state, returning the successor. The input
/// state is untouched; assignment right-hand sides read the pre-state, and
/// deletes land before adds.
pub fn apply_effect<S>(state: &S, effect: &Formula, binding: &Binding) -> Result<S, EvalError>
where
    S: EvalState + EffectSink + Clone,
{
    let conjuncts = match effect {
        Formula::And(items) => items.as_slice(),
        Formula::Atom { .. } | Formula::Not(_) | Formula::Assign { .. } => {
            std::slice::from_ref(effect)
        }
        _ => {
            return Err(EvalError::IllegalEffect(
                "effect must be a conjunction of literals and assignments".into(),
            ))
        }
    };

    let mut adds: Vec<(String, Vec<String>)> = Vec::new();
    let mut dels: Vec<(String, Vec<String>)> = Vec::new();
    let mut sets: Vec<(String, Vec<String>, i64)> = Vec::new();
    for item in conjuncts {
        match item {
            Formula::Atom { pred, args } => {
                let resolved = resolve_args(args, binding)?;
                adds.push((pred.clone(), resolved.iter().map(|s| s.to_string()).collect()));
            }
            Formula::Not(inner) => match inner.as_ref() {
                Formula::Atom { pred, args } => {
                    let resolved = resolve_args(args, binding)?;
                    dels.push((pred.clone(), resolved.iter().map(|s| s.to_string()).collect()));
                }
                _ => {
                    return Err(EvalError::IllegalEffect(
                        "effect negation must apply to an atom".into(),
                    ))
                }
            },
            Formula::Assign { fluent, args, value } => {
                let resolved = resolve_args(args, binding)?;
                let v = eval_expr(state, value, binding)?;
                sets.push((
                    fluent.clone(),
                    resolved.iter().map(|s| s.to_string()).collect(),
                    v,
                ));
            }
            other => {
                return Err(EvalError::IllegalEffect(format!(
                    "effect contains a non-literal node: {}",
                    super::printer::print_formula(other)
                )))
            }
        }
    }

    let mut next = state.clone();
    for (pred, args) in &dels {
        let refs: Vec<&str> = args.iter().map(String::as_str).collect();
        next.set_atom(pred, &refs, false)?;
    }
    for (pred, args) in &adds {
        let refs: Vec<&str> = args.iter().map(String::as_str).collect();
        next.set_atom(pred, &refs, true)?;
    }
    for (fluent, args, v) in &sets {
        let refs: Vec<&str> = args.iter().map(String::as_str).collect();
        next.set_fluent(fluent, &refs, *v)?;
    }
    Ok(next)
}

/// Plain fact-set state backed by the problem's atoms and fluents. Used for
/// probes, validation, and as the reference implementation in tests.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactState {
    pub facts: BTreeSet<GroundAtom>,
    pub fluents: BTreeMap<GroundFluent, i64>,
    by_type: BTreeMap<String, Vec<String>>,
}

impl FactState {
    pub fn new(
        domain: &DomainAst,
        objects: &BTreeMap<String, String>,
        facts: BTreeSet<GroundAtom>,
        fluents: BTreeMap<GroundFluent, i64>,
    ) -> Self {
        let mut by_type: BTreeMap<String, Vec<String>> = BTreeMap::new();
        let mut types: Vec<&str> = domain.type_hierarchy.keys().map(String::as_str).collect();
        types.push("object");
        for ty in types {
            let mut members: Vec<String> = objects
                .iter()
                .filter(|(_, t)| domain.is_subtype(t, ty))
                .map(|(name, _)| name.clone())
                .collect();
            members.sort();
            by_type.insert(ty.to_string(), members);
        }
        FactState {
            facts,
            fluents,
            by_type,
        }
    }

    pub fn from_problem(domain: &DomainAst, problem: &ProblemInstance) -> Self {
        FactState::new(
            domain,
            &problem.objects,
            problem.initial_facts.clone(),
            problem.initial_fluents.clone(),
        )
    }
}

impl EvalState for FactState {
    fn holds(&self, pred: &str, args: &[&str]) -> bool {
        self.facts.contains(&GroundAtom::new(pred, args))
    }

    fn fluent_value(&self, fluent: &str, args: &[&str]) -> Option<i64> {
        self.fluents.get(&GroundFluent::new(fluent, args)).copied()
    }

    fn objects_of_type(&self, ty: &str) -> Vec<&str> {
        self.by_type
            .get(ty)
            .map(|v| v.iter().map(String::as_str).collect())
            .unwrap_or_default()
    }
}

impl EffectSink for FactState {
    fn set_atom(&mut self, pred: &str, args: &[&str], value: bool) -> Result<(), EvalError> {
        let atom = GroundAtom::new(pred, args);
        if value {
            self.facts.insert(atom);
        } else {
            self.facts.remove(&atom);
        }
        Ok(())
    }

    fn set_fluent(&mut self, fluent: &str, args: &[&str], value: i64) -> Result<(), EvalError> {
        self.fluents.insert(GroundFluent::new(fluent, args), value);
        Ok(())
    }
}
