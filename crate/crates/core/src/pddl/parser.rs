use std::collections::BTreeMap;

use super::ast::*;
use super::lexer::{err_at, parse_sexpr, Sexpr};
use super::PddlError;

/// Parse a `(define (domain ...))` form into a validated [`DomainAst`].
pub fn parse_domain(text: &str) -> Result<DomainAst, PddlError> {
    let root = parse_sexpr(text)?;
    let items = root
        .as_list()
        .ok_or_else(|| err_at(root.pos(), "expected `(define ...)`"))?;
    expect_head(&root, "define")?;

    let mut name = None;
    let mut type_hierarchy = BTreeMap::new();
    let mut predicates = Vec::new();
    let mut fluents = Vec::new();
    let mut action_forms = Vec::new();

    for item in &items[1..] {
        let head = item
            .head()
            .ok_or_else(|| err_at(item.pos(), "expected a tagged list"))?;
        let list = item.as_list().unwrap();
        match head.as_str() {
            "domain" => {
                let sym = list
                    .get(1)
                    .and_then(|s| s.as_sym())
                    .ok_or_else(|| err_at(item.pos(), "expected `(domain NAME)`"))?;
                name = Some(sym.to_string());
            }
            ":requirements" => {}
            ":types" => {
                let symbols = flat_symbols(&list[1..])?;
                for (ty, parent) in typed_pairs(&symbols, item.pos())? {
                    type_hierarchy.insert(ty, parent.unwrap_or_else(|| "object".into()));
                }
            }
            ":predicates" => {
                for p in &list[1..] {
                    let (pname, params) = parse_signature(p)?;
                    predicates.push(PredicateSignature { name: pname, params });
                }
            }
            ":functions" => {
                for f in &list[1..] {
                    let (fname, params) = parse_signature(f)?;
                    fluents.push(FluentSignature { name: fname, params });
                }
            }
            ":action" => action_forms.push(item),
            other => {
                return Err(err_at(item.pos(), format!("unrecognized section `{other}`")));
            }
        }
    }

    let mut domain = DomainAst {
        name: name.ok_or(PddlError::Semantic("missing `(domain NAME)`".into()))?,
        type_hierarchy,
        predicates,
        fluents,
        actions: Vec::new(),
    };

    // Actions parse against the finished signatures.
    for form in action_forms {
        let schema = parse_action(form, &domain)?;
        domain.actions.push(schema);
    }
    Ok(domain)
}

/// Parse a standalone `(:action ...)` fragment against an existing domain's
/// signatures, as produced by the operator-translation path.
pub fn parse_operator(text: &str, domain: &DomainAst) -> Result<ActionSchema, PddlError> {
    let root = parse_sexpr(text)?;
    if root.head().as_deref() != Some(":action") {
        return Err(err_at(root.pos(), "expected `(:action ...)`"));
    }
    parse_action(&root, domain)
}

/// Parse a condition formula (no assignments) against a domain's signatures.
/// Free variables are rejected; objects are resolved later at evaluation.
pub fn parse_formula(text: &str, domain: &DomainAst) -> Result<Formula, PddlError> {
    let root = parse_sexpr(text)?;
    let mut scope = Vec::new();
    let f = parse_formula_node(&root, domain, &mut scope, false)?;
    Ok(f)
}

fn expect_head(expr: &Sexpr, head: &str) -> Result<(), PddlError> {
    if expr.head().as_deref() == Some(head) {
        Ok(())
    } else {
        Err(err_at(expr.pos(), format!("expected `({head} ...)`")))
    }
}

fn flat_symbols(items: &[Sexpr]) -> Result<Vec<String>, PddlError> {
    items
        .iter()
        .map(|s| {
            s.as_sym()
                .map(str::to_string)
                .ok_or_else(|| err_at(s.pos(), "expected a symbol"))
        })
        .collect()
}

/// Split a typed list `a b - t c d - u e` into `(name, Some(type))` pairs;
/// trailing names without a type get `None`.
fn typed_pairs(
    symbols: &[String],
    pos: (u32, u32),
) -> Result<Vec<(String, Option<String>)>, PddlError> {
    let mut out: Vec<(String, Option<String>)> = Vec::new();
    let mut group = Vec::new();
    let mut i = 0;
    while i < symbols.len() {
        if symbols[i] == "-" {
            let ty = symbols
                .get(i + 1)
                .ok_or_else(|| err_at(pos, "`-` must be followed by a type"))?;
            if group.is_empty() {
                return Err(err_at(pos, "`-` with no preceding names"));
            }
            for name in group.drain(..) {
                out.push((name, Some(ty.clone())));
            }
            i += 2;
        } else {
            group.push(symbols[i].clone());
            i += 1;
        }
    }
    for name in group {
        out.push((name, None));
    }
    Ok(out)
}

fn parse_signature(expr: &Sexpr) -> Result<(String, Vec<(String, String)>), PddlError> {
    let items = expr
        .as_list()
        .ok_or_else(|| err_at(expr.pos(), "expected `(name ?params...)`"))?;
    let name = items
        .first()
        .and_then(|s| s.as_sym())
        .ok_or_else(|| err_at(expr.pos(), "expected signature name"))?;
    let symbols = flat_symbols(&items[1..])?;
    let params = typed_pairs(&symbols, expr.pos())?
        .into_iter()
        .map(|(v, ty)| (v, ty.unwrap_or_else(|| "object".into())))
        .collect();
    Ok((name.to_string(), params))
}

fn parse_action(expr: &Sexpr, domain: &DomainAst) -> Result<ActionSchema, PddlError> {
    let items = expr.as_list().unwrap();
    let name = items
        .get(1)
        .and_then(|s| s.as_sym())
        .ok_or_else(|| err_at(expr.pos(), "action has no name"))?
        .to_string();

    let mut parameters: Vec<(String, String)> = Vec::new();
    let mut precondition = Formula::truth();
    let mut effect = Formula::truth();
    let mut i = 2;
    while i < items.len() {
        let key = items[i]
            .as_sym()
            .map(|s| s.to_ascii_lowercase())
            .ok_or_else(|| err_at(items[i].pos(), "expected `:parameters`, `:precondition`, or `:effect`"))?;
        let value = items
            .get(i + 1)
            .ok_or_else(|| err_at(items[i].pos(), format!("`{key}` has no value")))?;
        match key.as_str() {
            ":parameters" => {
                let list = value
                    .as_list()
                    .ok_or_else(|| err_at(value.pos(), "expected parameter list"))?;
                let symbols = flat_symbols(list)?;
                for (var, ty) in typed_pairs(&symbols, value.pos())? {
                    let ty = ty.ok_or_else(|| {
                        PddlError::Semantic(format!("parameter `{var}` of `{name}` has no type"))
                    })?;
                    if !var.starts_with('?') {
                        return Err(err_at(value.pos(), format!("parameter `{var}` must start with `?`")));
                    }
                    parameters.push((var, ty));
                }
            }
            ":precondition" => {
                let mut scope = parameters.clone();
                precondition = parse_formula_node(value, domain, &mut scope, false)?;
            }
            ":effect" => {
                let mut scope = parameters.clone();
                let raw = parse_formula_node(value, domain, &mut scope, true)?;
                effect = normalize_effect(raw)?;
            }
            other => return Err(err_at(items[i].pos(), format!("unrecognized key `{other}`"))),
        }
        i += 2;
    }

    for (_, ty) in &parameters {
        if ty != "object" && !domain.type_hierarchy.contains_key(ty) {
            return Err(PddlError::Semantic(format!(
                "action `{name}` uses undeclared type `{ty}`"
            )));
        }
    }
    Ok(ActionSchema {
        name,
        parameters,
        precondition,
        effect,
    })
}

fn lookup_var<'a>(scope: &'a [(String, String)], var: &str) -> Option<&'a str> {
    scope
        .iter()
        .rev()
        .find(|(v, _)| v == var)
        .map(|(_, ty)| ty.as_str())
}

fn parse_formula_node(
    expr: &Sexpr,
    domain: &DomainAst,
    scope: &mut Vec<(String, String)>,
    in_effect: bool,
) -> Result<Formula, PddlError> {
    let items = expr
        .as_list()
        .ok_or_else(|| err_at(expr.pos(), "expected a formula list"))?;
    let head = expr
        .head()
        .ok_or_else(|| err_at(expr.pos(), "empty formula"))?;
    match head.as_str() {
        "and" | "or" => {
            let mut parts = Vec::new();
            for item in &items[1..] {
                parts.push(parse_formula_node(item, domain, scope, in_effect)?);
            }
            Ok(if head == "and" {
                Formula::And(parts)
            } else {
                Formula::Or(parts)
            })
        }
        "not" => {
            let inner = items
                .get(1)
                .ok_or_else(|| err_at(expr.pos(), "`not` needs one operand"))?;
            Ok(Formula::Not(Box::new(parse_formula_node(
                inner, domain, scope, in_effect,
            )?)))
        }
        "exists" => {
            if in_effect {
                return Err(PddlError::Semantic(
                    "`exists` is not allowed inside effects".into(),
                ));
            }
            let binder = items
                .get(1)
                .and_then(|s| s.as_list())
                .ok_or_else(|| err_at(expr.pos(), "expected `(exists (?v - type) body)`"))?;
            let symbols = flat_symbols(binder)?;
            let pairs = typed_pairs(&symbols, expr.pos())?;
            let [(var, Some(ty))] = pairs.as_slice() else {
                return Err(err_at(expr.pos(), "`exists` binds exactly one typed variable"));
            };
            if ty != "object" && !domain.type_hierarchy.contains_key(ty) {
                return Err(PddlError::Semantic(format!(
                    "`exists` over undeclared type `{ty}`"
                )));
            }
            let body = items
                .get(2)
                .ok_or_else(|| err_at(expr.pos(), "`exists` needs a body"))?;
            scope.push((var.clone(), ty.clone()));
            let parsed = parse_formula_node(body, domain, scope, in_effect)?;
            scope.pop();
            Ok(Formula::Exists {
                var: var.clone(),
                ty: ty.clone(),
                body: Box::new(parsed),
            })
        }
        "=" => {
            let (lhs, rhs) = two_operands(expr, items)?;
            let l = parse_operand(lhs, domain, scope)?;
            let r = parse_operand(rhs, domain, scope)?;
            match (l, r) {
                (Operand::Expr(a), Operand::Expr(b)) => Ok(Formula::NumEq(a, b)),
                (Operand::Term(a), Operand::Term(b)) => Ok(Formula::ObjEq(a, b)),
                _ => Err(PddlError::Semantic(
                    "`=` cannot compare an object with a number".into(),
                )),
            }
        }
        "assign" => {
            if !in_effect {
                return Err(PddlError::Semantic(
                    "`assign` is only allowed inside effects".into(),
                ));
            }
            let (target, value) = two_operands(expr, items)?;
            let Operand::Expr(Expr::Fluent(fluent, args)) = parse_operand(target, domain, scope)?
            else {
                return Err(PddlError::Semantic(
                    "`assign` target must be a fluent term".into(),
                ));
            };
            let Operand::Expr(value) = parse_operand(value, domain, scope)? else {
                return Err(PddlError::Semantic(
                    "`assign` value must be an integer expression".into(),
                ));
            };
            Ok(Formula::Assign { fluent, args, value })
        }
        "+" | "-" => Err(PddlError::Semantic(format!(
            "arithmetic `{head}` may only appear inside `=` or `assign`"
        ))),
        pred => {
            let sig = domain.predicate(pred).ok_or_else(|| {
                PddlError::Semantic(format!("undeclared predicate `{pred}`"))
            })?;
            let arity = sig.params.len();
            if items.len() - 1 != arity {
                return Err(PddlError::Semantic(format!(
                    "predicate `{pred}` expects {arity} args, got {}",
                    items.len() - 1
                )));
            }
            let mut args = Vec::new();
            for item in &items[1..] {
                args.push(parse_term(item, scope)?);
            }
            Ok(Formula::Atom {
                pred: pred.to_string(),
                args,
            })
        }
    }
}

fn two_operands<'a>(
    expr: &Sexpr,
    items: &'a [Sexpr],
) -> Result<(&'a Sexpr, &'a Sexpr), PddlError> {
    match items {
        [_, a, b] => Ok((a, b)),
        _ => Err(err_at(expr.pos(), "expected exactly two operands")),
    }
}

enum Operand {
    Term(Term),
    Expr(Expr),
}

fn parse_term(expr: &Sexpr, scope: &[(String, String)]) -> Result<Term, PddlError> {
    let sym = expr
        .as_sym()
        .ok_or_else(|| err_at(expr.pos(), "expected a variable or object name"))?;
    if let Some(var) = sym.strip_prefix('?') {
        if lookup_var(scope, sym).is_none() {
            return Err(PddlError::Semantic(format!("unbound variable `?{var}`")));
        }
        Ok(Term::Var(sym.to_string()))
    } else {
        Ok(Term::Object(sym.to_string()))
    }
}

fn parse_operand(
    expr: &Sexpr,
    domain: &DomainAst,
    scope: &[(String, String)],
) -> Result<Operand, PddlError> {
    match expr {
        Sexpr::Sym(s, ..) => {
            if let Ok(n) = s.parse::<i64>() {
                Ok(Operand::Expr(Expr::Const(n)))
            } else {
                Ok(Operand::Term(parse_term(expr, scope)?))
            }
        }
        Sexpr::List(items, ..) => {
            let head = expr
                .head()
                .ok_or_else(|| err_at(expr.pos(), "empty operand"))?;
            match head.as_str() {
                "+" | "-" => {
                    let (a, b) = two_operands(expr, items)?;
                    let Operand::Expr(a) = parse_operand(a, domain, scope)? else {
                        return Err(PddlError::Semantic("arithmetic over non-numeric operand".into()));
                    };
                    let Operand::Expr(b) = parse_operand(b, domain, scope)? else {
                        return Err(PddlError::Semantic("arithmetic over non-numeric operand".into()));
                    };
                    Ok(Operand::Expr(if head == "+" {
                        Expr::Add(Box::new(a), Box::new(b))
                    } else {
                        Expr::Sub(Box::new(a), Box::new(b))
                    }))
                }
                name => {
                    let sig = domain.fluent(name).ok_or_else(|| {
                        PddlError::Semantic(format!("undeclared fluent `{name}`"))
                    })?;
                    if items.len() - 1 != sig.params.len() {
                        return Err(PddlError::Semantic(format!(
                            "fluent `{name}` expects {} args, got {}",
                            sig.params.len(),
                            items.len() - 1
                        )));
                    }
                    let mut args = Vec::new();
                    for item in &items[1..] {
                        args.push(parse_term(item, scope)?);
                    }
                    Ok(Operand::Expr(Expr::Fluent(name.to_string(), args)))
                }
            }
        }
    }
}

/// Effects must be a conjunction of literals and assignments. Nested `and`s
/// are flattened; a single literal becomes a one-element conjunction.
fn normalize_effect(f: Formula) -> Result<Formula, PddlError> {
    let mut flat = Vec::new();
    flatten_effect(f, &mut flat)?;
    Ok(Formula::And(flat))
}

fn flatten_effect(f: Formula, out: &mut Vec<Formula>) -> Result<(), PddlError> {
    match f {
        Formula::And(items) => {
            for item in items {
                flatten_effect(item, out)?;
            }
            Ok(())
        }
        Formula::Atom { .. } | Formula::Assign { .. } => {
            out.push(f);
            Ok(())
        }
        Formula::Not(inner) => match *inner {
            Formula::Atom { .. } => {
                out.push(Formula::Not(inner));
                Ok(())
            }
            _ => Err(PddlError::Semantic(
                "effect negation must apply to an atom".into(),
            )),
        },
        Formula::Or(_) | Formula::Exists { .. } => Err(PddlError::Semantic(
            "effect must be a conjunction of literals and assignments".into(),
        )),
        Formula::NumEq(..) | Formula::ObjEq(..) => Err(PddlError::Semantic(
            "equality is not a valid effect".into(),
        )),
    }
}
