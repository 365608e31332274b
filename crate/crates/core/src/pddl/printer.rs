use std::fmt::Write;

use super::ast::*;

/// Render a domain back to canonical subset text. Parsing the output yields
/// an AST equal to the input.
pub fn print_domain(domain: &DomainAst) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "(define (domain {})", domain.name);
    if !domain.type_hierarchy.is_empty() {
        let types: Vec<String> = domain
            .type_hierarchy
            .iter()
            .map(|(ty, parent)| format!("{ty} - {parent}"))
            .collect();
        let _ = writeln!(out, "  (:types {})", types.join(" "));
    }
    if !domain.predicates.is_empty() {
        let preds: Vec<String> = domain
            .predicates
            .iter()
            .map(|p| print_signature(&p.name, &p.params))
            .collect();
        let _ = writeln!(out, "  (:predicates {})", preds.join(" "));
    }
    if !domain.fluents.is_empty() {
        let fls: Vec<String> = domain
            .fluents
            .iter()
            .map(|f| print_signature(&f.name, &f.params))
            .collect();
        let _ = writeln!(out, "  (:functions {})", fls.join(" "));
    }
    for action in &domain.actions {
        out.push_str(&print_action(action));
    }
    out.push_str(")\n");
    out
}

fn print_signature(name: &str, params: &[(String, String)]) -> String {
    let mut s = format!("({name}");
    for (var, ty) in params {
        let _ = write!(s, " {var} - {ty}");
    }
    s.push(')');
    s
}

pub(crate) fn print_action(action: &ActionSchema) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "  (:action {}", action.name);
    let _ = writeln!(
        out,
        "   :parameters ({})",
        action
            .parameters
            .iter()
            .map(|(v, t)| format!("{v} - {t}"))
            .collect::<Vec<_>>()
            .join(" ")
    );
    let _ = writeln!(out, "   :precondition {}", print_formula(&action.precondition));
    let _ = writeln!(out, "   :effect {})", print_formula(&action.effect));
    out
}

pub fn print_formula(f: &Formula) -> String {
    match f {
        Formula::And(items) => print_nary("and", items),
        Formula::Or(items) => print_nary("or", items),
        Formula::Not(inner) => format!("(not {})", print_formula(inner)),
        Formula::Exists { var, ty, body } => {
            format!("(exists ({var} - {ty}) {})", print_formula(body))
        }
        Formula::Atom { pred, args } => print_call(pred, args),
        Formula::NumEq(a, b) => format!("(= {} {})", print_expr(a), print_expr(b)),
        Formula::ObjEq(a, b) => format!("(= {} {})", a.name(), b.name()),
        Formula::Assign { fluent, args, value } => {
            format!("(assign {} {})", print_call(fluent, args), print_expr(value))
        }
    }
}

fn print_nary(op: &str, items: &[Formula]) -> String {
    let mut s = format!("({op}");
    for item in items {
        s.push(' ');
        s.push_str(&print_formula(item));
    }
    s.push(')');
    s
}

fn print_call(name: &str, args: &[Term]) -> String {
    let mut s = format!("({name}");
    for a in args {
        s.push(' ');
        s.push_str(a.name());
    }
    s.push(')');
    s
}

pub(crate) fn print_expr(e: &Expr) -> String {
    match e {
        Expr::Fluent(name, args) => print_call(name, args),
        Expr::Const(n) => n.to_string(),
        Expr::Add(a, b) => format!("(+ {} {})", print_expr(a), print_expr(b)),
        Expr::Sub(a, b) => format!("(- {} {})", print_expr(a), print_expr(b)),
    }
}
