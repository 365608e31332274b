use super::ast::{DomainAst, ProblemInstance};
use super::eval::Binding;

/// One type-consistent instantiation of an action schema.
#[derive(Debug, Clone)]
pub struct GroundedSchema {
    pub schema: String,
    /// Objects in schema parameter order.
    pub args: Vec<String>,
}

impl GroundedSchema {
    pub fn binding(&self, domain: &DomainAst) -> Binding {
        let schema = domain.action(&self.schema).expect("schema exists");
        let mut b = Binding::new();
        for ((var, _), obj) in schema.parameters.iter().zip(&self.args) {
            b.push(var, obj);
        }
        b
    }
}

/// Enumerate every type-consistent substitution of every schema, in schema
/// order then lexicographic object order per parameter position. Preconditions
/// are not checked here; applicability is a per-state question.
pub fn ground_actions(domain: &DomainAst, problem: &ProblemInstance) -> Vec<GroundedSchema> {
    let mut out = Vec::new();
    for schema in &domain.actions {
        let candidates: Vec<Vec<&str>> = schema
            .parameters
            .iter()
            .map(|(_, ty)| problem.objects_of_type(domain, ty))
            .collect();
        let mut stack: Vec<Vec<String>> = vec![Vec::new()];
        for options in &candidates {
            let mut next = Vec::new();
            for prefix in &stack {
                for obj in options {
                    let mut row = prefix.clone();
                    row.push(obj.to_string());
                    next.push(row);
                }
            }
            stack = next;
        }
        for args in stack {
            if args.len() == schema.parameters.len() {
                out.push(GroundedSchema {
                    schema: schema.name.clone(),
                    args,
                });
            }
        }
    }
    out
}
