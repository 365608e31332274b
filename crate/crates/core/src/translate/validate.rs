use std::collections::{BTreeMap, BTreeSet};

use crate::pddl::{
    eval_formula, parse_formula, parse_operator, Binding, DomainAst, FactState, GroundAtom,
    GroundFluent, PddlError,
};
use crate::worldgen::{
    compile_to_problem, parse_scenario_ir, sample_map_with, DynamicsVariant, Observation,
    SamplerOptions,
};

use super::prompt::TargetKind;

/// Everything the validator needs to judge a translation: the variant's base
/// domain, the rule set, and the colors the stimulus mentions (for operator
/// probes).
pub struct ValidationContext<'a> {
    pub domain: &'a DomainAst,
    pub variant: DynamicsVariant,
    pub mentioned_colors: Vec<String>,
    pub probe_seed: u64,
    pub sampler: SamplerOptions,
}

impl<'a> ValidationContext<'a> {
    pub fn new(domain: &'a DomainAst, variant: DynamicsVariant) -> Self {
        ValidationContext {
            domain,
            variant,
            mentioned_colors: vec!["red".into(), "yellow".into(), "green".into()],
            probe_seed: 0,
            sampler: SamplerOptions::default(),
        }
    }
}

/// Three-stage verdict on a candidate translation. Accepted only when the
/// text parses, satisfies the record/schema invariants, and actually runs
/// (samples a valid map, or grounds to an applicable operator instance).
#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub syntactic_pass: bool,
    pub semantic_pass: bool,
    pub executable_pass: bool,
    pub failures: Vec<String>,
}

impl ValidationReport {
    pub fn accepted(&self) -> bool {
        self.syntactic_pass && self.semantic_pass && self.executable_pass
    }

    fn fail(mut self, message: String) -> Self {
        self.failures.push(message);
        self
    }
}

pub fn validate_translation(
    raw: &str,
    target: TargetKind,
    context: &ValidationContext,
) -> ValidationReport {
    match target {
        TargetKind::ScenarioIr => validate_scenario(raw, context),
        TargetKind::OperatorDefinition => validate_operator(raw, context),
    }
}

fn validate_scenario(raw: &str, context: &ValidationContext) -> ValidationReport {
    let mut report = ValidationReport::default();

    // Syntactic: well-formed JSON object.
    match serde_json::from_str::<serde_json::Value>(raw) {
        Ok(v) if v.is_object() => report.syntactic_pass = true,
        Ok(_) => return report.fail("not a JSON object".into()),
        Err(e) => return report.fail(format!("invalid JSON: {e}")),
    }

    // Semantic: schema fields and record invariants, including a parseable
    // observation formula.
    let ir = match parse_scenario_ir(raw) {
        Ok(ir) => ir,
        Err(e) => return report.fail(e.to_string()),
    };
    if let Observation::Condition(src) = &ir.observation {
        if let Err(e) = parse_formula(src, context.domain) {
            return report.fail(format!("observation formula: {e}"));
        }
    }
    report.semantic_pass = true;

    // Executable: the record conditions a satisfiable map that compiles.
    let map = match sample_map_with(&ir, context.probe_seed, context.sampler) {
        Ok(map) => map,
        Err(e) => return report.fail(e.to_string()),
    };
    if let Err(e) = compile_to_problem(&ir, &map, context.domain) {
        return report.fail(e.to_string());
    }
    report.executable_pass = true;
    report
}

fn validate_operator(raw: &str, context: &ValidationContext) -> ValidationReport {
    let mut report = ValidationReport::default();

    let schema = match parse_operator(raw, context.domain) {
        Ok(schema) => {
            report.syntactic_pass = true;
            report.semantic_pass = true;
            schema
        }
        Err(e @ PddlError::Syntax { .. }) => {
            return report.fail(e.to_string());
        }
        Err(e) => {
            report.syntactic_pass = true;
            return report.fail(e.to_string());
        }
    };

    // Executable: ground the operator on single-key probe states, one per
    // (key color, door color) pair the variant's rule allows. The operator
    // must be applicable on at least one probe.
    let pairs: Vec<(Option<String>, Option<String>)> = match context.variant {
        DynamicsVariant::ColorSame => context
            .mentioned_colors
            .iter()
            .map(|c| (Some(c.clone()), Some(c.clone())))
            .collect(),
        DynamicsVariant::ColorDifferent => {
            let mut out = Vec::new();
            for a in &context.mentioned_colors {
                for b in &context.mentioned_colors {
                    if a != b {
                        out.push((Some(a.clone()), Some(b.clone())));
                    }
                }
            }
            out
        }
        _ => vec![(None, None)],
    };

    let applicable = pairs
        .iter()
        .any(|(key_color, door_color)| probe_applicable(&schema, context, key_color, door_color));
    if !applicable {
        return report.fail(format!(
            "no applicable instance on any {} probe state",
            context.variant
        ));
    }
    report.executable_pass = true;
    report
}

/// A fixed 3x3 probe: the agent at (1,1) holds one key and stands adjacent
/// to one locked door at (1,0).
fn probe_applicable(
    schema: &crate::pddl::ActionSchema,
    context: &ValidationContext,
    key_color: &Option<String>,
    door_color: &Option<String>,
) -> bool {
    let mut objects: BTreeMap<String, String> = BTreeMap::new();
    objects.insert("alice".into(), "agent".into());
    objects.insert("k0".into(), "key".into());
    objects.insert("d0".into(), "door".into());
    for color in [key_color, door_color].into_iter().flatten() {
        objects.insert(color.clone(), "color".into());
    }

    let mut facts: BTreeSet<GroundAtom> = BTreeSet::new();
    facts.insert(GroundAtom::new("has", &["alice", "k0"]));
    facts.insert(GroundAtom::new("locked", &["d0"]));
    if let Some(c) = key_color {
        facts.insert(GroundAtom::new("iscolor", &["k0", c]));
    }
    if let Some(c) = door_color {
        facts.insert(GroundAtom::new("iscolor", &["d0", c]));
    }

    let mut fluents: BTreeMap<GroundFluent, i64> = BTreeMap::new();
    for (name, x, y) in [("alice", 1, 1), ("d0", 1, 0), ("k0", 0, 2)] {
        fluents.insert(GroundFluent::new("xloc", &[name]), x);
        fluents.insert(GroundFluent::new("yloc", &[name]), y);
    }

    let probe = FactState::new(context.domain, &objects, facts, fluents);
    let mut binding = Binding::new();
    for (var, ty) in &schema.parameters {
        let obj = match ty.as_str() {
            "agent" => "alice",
            "key" => "k0",
            "door" => "d0",
            _ => continue,
        };
        binding.push(var, obj);
    }
    eval_formula(&probe, &schema.precondition, &binding).unwrap_or(false)
}
