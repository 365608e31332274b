use std::collections::BTreeMap;

use crate::infer::{Engine, GoalDistribution, InferenceConfig, ObservationTrace};
use crate::pddl::{parse_formula, parse_operator, DomainAst, ProblemInstance};
use crate::planner::{ActionKind, GroundAction, World, WorldOptions};
use crate::translate::{
    builtin_few_shot, pick_examples, translate_with_rejection, ChatTransport, TargetKind,
    TranslateError, TranslationRequest, ValidationContext,
};
use crate::worldgen::{
    compile_to_problem, domains, parse_scenario_ir, sample_map_with, DynamicsVariant, MapSample,
    Observation, SamplerOptions, ScenarioIr,
};

use super::corpus::StimulusRecord;
use super::EvalError;

/// Effective parameters for a model run over stimuli.
#[derive(Debug, Clone, Copy)]
pub struct RunConfig {
    pub beta: f64,
    pub epsilon_floor: f64,
    pub subgoal_horizon: u32,
    pub seed: u64,
    pub sampler: SamplerOptions,
    pub temperature: f64,
    pub max_rejections: u32,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            beta: 2.0,
            epsilon_floor: 1e-6,
            subgoal_horizon: 8,
            seed: 0,
            sampler: SamplerOptions::default(),
            temperature: 1.2,
            max_rejections: 10,
        }
    }
}

impl RunConfig {
    pub fn inference(&self) -> InferenceConfig<f64> {
        InferenceConfig {
            beta: self.beta,
            epsilon_floor: self.epsilon_floor,
            subgoal_horizon: self.subgoal_horizon,
        }
    }
}

/// Stable per-stimulus seed: FNV-1a of the id folded into the master seed.
pub fn stimulus_seed(master: u64, id: &str) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in id.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h ^ master
}

/// Everything produced on the way to a posterior for one stimulus.
pub struct StimulusOutcome {
    pub id: String,
    pub attempts: u32,
    pub ir: ScenarioIr,
    pub map: MapSample,
    pub domain: DomainAst,
    pub problem: ProblemInstance,
    pub world: World,
    pub observation: ObservationTrace,
    pub posterior: GoalDistribution<f64>,
}

/// Translate (via the given transport), sample one valid map, compile, and
/// run exact inference for a single stimulus.
pub fn run_stimulus(
    stimulus: &StimulusRecord,
    transport: &dyn ChatTransport,
    config: &RunConfig,
) -> Result<StimulusOutcome, EvalError> {
    run_stimulus_inner(stimulus, transport, config).map_err(|e| e.in_stimulus(&stimulus.id))
}

fn run_stimulus_inner(
    stimulus: &StimulusRecord,
    transport: &dyn ChatTransport,
    config: &RunConfig,
) -> Result<StimulusOutcome, EvalError> {
    let mut domain = domains::domain_for(stimulus.variant);
    let seed = stimulus_seed(config.seed, &stimulus.id);
    let pool = builtin_few_shot();

    // World-configuration translation, rejection sampled.
    let request = TranslationRequest {
        stimulus_id: Some(stimulus.fixture_ref.clone()),
        stimulus_text: stimulus.text.clone(),
        few_shot: pick_examples(&pool, stimulus.variant, TargetKind::ScenarioIr, seed),
        temperature: config.temperature,
        max_rejections: config.max_rejections,
        target: TargetKind::ScenarioIr,
    };
    let mut context = ValidationContext::new(&domain, stimulus.variant);
    context.probe_seed = seed;
    context.sampler = config.sampler;
    let accepted = translate_with_rejection(&request, transport, &context)?;
    let ir = parse_scenario_ir(&accepted.code)?;

    // Optional operator translation: the dynamics sentence may override the
    // unlock operator. Skipped when the transport has nothing for it.
    if stimulus.variant != DynamicsVariant::Spatial {
        let op_request = TranslationRequest {
            stimulus_id: Some(stimulus.fixture_ref.clone()),
            stimulus_text: stimulus.text.clone(),
            few_shot: pick_examples(&pool, stimulus.variant, TargetKind::OperatorDefinition, seed),
            temperature: config.temperature,
            max_rejections: config.max_rejections,
            target: TargetKind::OperatorDefinition,
        };
        let mut op_context = ValidationContext::new(&domain, stimulus.variant);
        op_context.probe_seed = seed;
        op_context.sampler = config.sampler;
        op_context.mentioned_colors = mentioned_colors(&ir);
        match translate_with_rejection(&op_request, transport, &op_context) {
            Ok(op) => {
                let schema = parse_operator(&op.code, &domain)?;
                domain.replace_action(schema);
            }
            Err(TranslateError::FixtureMissing(_)) => {}
            Err(e) => return Err(e.into()),
        }
    }

    let map = sample_map_with(&ir, seed, config.sampler)?;
    let problem = compile_to_problem(&ir, &map, &domain)?;
    let world = World::new(
        &domain,
        &problem,
        WorldOptions {
            width: map.width,
            height: map.height,
            unit_cost: 1,
            prune_surplus_keys: stimulus.variant != DynamicsVariant::Spatial,
        },
    )?;
    let observation = observation_trace(&ir, &domain, &world)?;
    let engine = Engine::new(world.clone(), config.inference())?;
    let posterior = engine.posterior(&observation)?;

    Ok(StimulusOutcome {
        id: stimulus.id.clone(),
        attempts: accepted.attempts,
        ir,
        map,
        domain,
        problem,
        world,
        observation,
        posterior,
    })
}

fn mentioned_colors(ir: &ScenarioIr) -> Vec<String> {
    let mut colors: Vec<String> = ir
        .keys
        .iter()
        .chain(ir.obstacles.values().flatten())
        .filter(|c| c.as_str() != "any")
        .cloned()
        .collect();
    colors.sort();
    colors.dedup();
    if colors.is_empty() {
        colors = vec!["red".into(), "yellow".into(), "green".into()];
    }
    colors
}

/// Convert a scenario's observation into the evidence the engine consumes.
pub fn observation_trace(
    ir: &ScenarioIr,
    domain: &DomainAst,
    world: &World,
) -> Result<ObservationTrace, EvalError> {
    Ok(match &ir.observation {
        Observation::Empty => ObservationTrace::empty(),
        Observation::Condition(src) => {
            ObservationTrace::SubgoalCondition(parse_formula(src, domain)?)
        }
        Observation::Walks(walks) => {
            let mut actions = Vec::new();
            for walk in walks {
                for _ in 0..walk.steps {
                    actions.push(GroundAction {
                        kind: ActionKind::Move(walk.direction),
                        cost: world.options.unit_cost,
                    });
                }
            }
            ObservationTrace::LowLevelActions(actions)
        }
    })
}

/// Posterior probability per (stimulus id, trophy label).
pub type JudgmentMap = BTreeMap<(String, String), f64>;

/// Run the full corpus through the model: one valid sample per stimulus, one
/// exact posterior each. Returns the flat (stimulus, trophy) probability map
/// along with each stimulus's full outcome.
pub fn model_judgments(
    corpus: &[StimulusRecord],
    transport: &dyn ChatTransport,
    config: &RunConfig,
) -> Result<(JudgmentMap, Vec<StimulusOutcome>), EvalError> {
    let mut values = BTreeMap::new();
    let mut outcomes = Vec::new();
    for stimulus in corpus {
        let outcome = run_stimulus(stimulus, transport, config)?;
        for (trophy, p) in outcome.posterior.iter() {
            values.insert((stimulus.id.clone(), trophy.to_string()), p);
        }
        outcomes.push(outcome);
    }
    Ok((values, outcomes))
}

/// Built-in zero-shot prompt for the direct-rating baseline, mirroring the
/// instructions shown to participants. `{stimulus}` is replaced per run.
pub const BASELINE_PROMPT_TEMPLATE: &str = include_str!("baseline_prompt.txt");

#[derive(Debug)]
pub struct BaselineOutcome {
    /// Mean rating per (stimulus, trophy).
    pub means: BTreeMap<(String, String), f64>,
    /// Raw accepted samples per stimulus, for audit logs.
    pub raw: BTreeMap<String, Vec<String>>,
}

/// Query an LLM directly for ratings, rejecting malformed answers and
/// resampling until `samples` well-formed ones are in hand (budget: 5x).
pub fn llm_baseline_judgments(
    corpus: &[StimulusRecord],
    transport: &dyn ChatTransport,
    samples: u32,
    template: &str,
    temperature: f64,
) -> Result<BaselineOutcome, EvalError> {
    let mut means = BTreeMap::new();
    let mut raw_log = BTreeMap::new();
    for stimulus in corpus {
        let prompt = template.replace("{stimulus}", stimulus.text.trim());
        let request = TranslationRequest {
            stimulus_id: Some(stimulus.fixture_ref.clone()),
            stimulus_text: stimulus.text.clone(),
            few_shot: Vec::new(),
            temperature,
            max_rejections: 1,
            target: TargetKind::ScenarioIr,
        };
        let mut accepted: Vec<Vec<(String, u8)>> = Vec::new();
        let mut raws = Vec::new();
        let budget = samples.saturating_mul(5).max(1);
        let mut attempts = 0;
        while accepted.len() < samples as usize && attempts < budget {
            attempts += 1;
            let raw = transport
                .complete(&request, &prompt)
                .map_err(|e| EvalError::from(e).in_stimulus(&stimulus.id))?;
            if let Some(ratings) = parse_ratings(&raw, &stimulus.goals) {
                accepted.push(ratings);
                raws.push(raw);
            }
        }
        if accepted.len() < samples as usize {
            return Err(EvalError::SampleBudgetExhausted(stimulus.id.clone()));
        }
        for goal in &stimulus.goals {
            let total: f64 = accepted
                .iter()
                .flat_map(|r| r.iter().filter(|(g, _)| g == goal))
                .map(|(_, v)| *v as f64)
                .sum();
            means.insert(
                (stimulus.id.clone(), goal.clone()),
                total / accepted.len() as f64,
            );
        }
        raw_log.insert(stimulus.id.clone(), raws);
    }
    Ok(BaselineOutcome {
        means,
        raw: raw_log,
    })
}

/// Extract `<Goal> Trophy: <n>` ratings, one line per goal, 1-7 each.
/// Returns `None` when any goal is missing or out of range.
fn parse_ratings(text: &str, goals: &[String]) -> Option<Vec<(String, u8)>> {
    let mut out = Vec::new();
    for goal in goals {
        let needle = format!("{} trophy:", goal.to_ascii_lowercase());
        let rating = text.lines().find_map(|line| {
            let lower = line.trim().to_ascii_lowercase();
            let rest = lower.strip_prefix(&needle)?;
            let digits: String = rest
                .trim_start()
                .chars()
                .take_while(|c| c.is_ascii_digit())
                .collect();
            digits.parse::<u8>().ok()
        })?;
        if !(1..=7).contains(&rating) {
            return None;
        }
        out.push((goal.clone(), rating));
    }
    Some(out)
}
