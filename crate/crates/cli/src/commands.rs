use std::cell::RefCell;
use std::collections::BTreeMap;
use std::path::PathBuf;

use invplan_core::eval::{
    correlation_report, emit_plot_data, exclude_low_agreement, llm_baseline_judgments, load_corpus,
    load_human_csv, model_judgments, run_stimulus, EvalError, RunConfig, Scope, StimulusRecord,
    BASELINE_PROMPT_TEMPLATE,
};
use invplan_core::planner::{optimal_cost, PlanResult};
use invplan_core::translate::{
    ChatTransport, FixtureTransport, HttpTransport, TargetKind, TranslateError, TranslationRequest,
};
use invplan_core::worldgen::{parse_scenario_ir, DynamicsVariant, WorldgenError};

use crate::manifest::{write_atomic, RunManifest};
use crate::{BaselineArgs, EvalArgs, InferArgs, PipelineOpts, PlanArgs, SampleMapArgs};

pub fn exit_code(err: &EvalError) -> u8 {
    match err {
        EvalError::InStimulus { source, .. } => exit_code(source),
        EvalError::Schema(_) | EvalError::Range { .. } | EvalError::Pddl(_) => 2,
        EvalError::InsufficientPairs(_) => 2,
        EvalError::Worldgen(w) => match w {
            WorldgenError::Schema(_) | WorldgenError::Consistency(_) => 2,
            WorldgenError::SamplingExhausted { .. } | WorldgenError::Compile(_) => 3,
        },
        EvalError::Infer(_) | EvalError::Plan(_) => 3,
        EvalError::Translate(_) | EvalError::SampleBudgetExhausted(_) => 4,
        EvalError::Io(_) | EvalError::Json(_) => 5,
    }
}

impl PipelineOpts {
    fn run_config(&self) -> RunConfig {
        RunConfig {
            beta: self.beta,
            epsilon_floor: self.epsilon_floor,
            subgoal_horizon: self.subgoal_horizon,
            seed: self.seed,
            temperature: self.temperature,
            max_rejections: self.max_rejections,
            ..RunConfig::default()
        }
    }

    fn config_json(&self, command: &str) -> serde_json::Value {
        serde_json::json!({
            "command": command,
            "beta": self.beta,
            "epsilon_floor": self.epsilon_floor,
            "subgoal_horizon": self.subgoal_horizon,
            "seed": self.seed,
            "live": self.live,
            "llm_model": self.llm_model,
            "temperature": self.temperature,
            "max_rejections": self.max_rejections,
            "corpus": self.corpus.display().to_string(),
            "fixtures": self.fixtures.display().to_string(),
        })
    }

    fn transport(&self) -> Result<Box<dyn ChatTransport>, EvalError> {
        if self.live {
            let transport = HttpTransport::from_env(&self.api_base, &self.llm_model)?;
            Ok(Box::new(transport))
        } else {
            Ok(Box::new(FixtureTransport::new(&self.fixtures)))
        }
    }

    fn baseline_transport(&self) -> Result<Box<dyn ChatTransport>, EvalError> {
        if self.live {
            let transport = HttpTransport::from_env(&self.api_base, &self.llm_model)?;
            Ok(Box::new(transport))
        } else {
            Ok(Box::new(FixtureTransport::with_filename(
                &self.fixtures,
                "baseline.txt",
            )))
        }
    }
}

/// Wraps a transport so every prompt and raw completion lands in the run
/// directory for audit.
struct AuditingTransport {
    inner: Box<dyn ChatTransport>,
    dir: PathBuf,
    counter: RefCell<u32>,
}

impl AuditingTransport {
    fn new(inner: Box<dyn ChatTransport>, dir: PathBuf) -> Self {
        AuditingTransport {
            inner,
            dir,
            counter: RefCell::new(0),
        }
    }
}

impl ChatTransport for AuditingTransport {
    fn complete(
        &self,
        request: &TranslationRequest,
        prompt: &str,
    ) -> Result<String, TranslateError> {
        let n = {
            let mut c = self.counter.borrow_mut();
            *c += 1;
            *c
        };
        let id = request.stimulus_id.as_deref().unwrap_or("adhoc");
        let _ = std::fs::create_dir_all(&self.dir);
        let _ = std::fs::write(self.dir.join(format!("{id}_{n:03}_prompt.txt")), prompt);
        let result = self.inner.complete(request, prompt);
        if let Ok(raw) = &result {
            let _ = std::fs::write(self.dir.join(format!("{id}_{n:03}_completion.txt")), raw);
        }
        result
    }
}

fn find_stimulus(corpus: &[StimulusRecord], id: &str) -> Result<StimulusRecord, EvalError> {
    corpus
        .iter()
        .find(|s| s.id == id)
        .cloned()
        .ok_or_else(|| EvalError::Schema(format!("stimulus `{id}` is not in the corpus")))
}

/// Transport for `--scenario`: serves the given record text for the
/// world-configuration request and nothing else.
struct ScenarioOnlyTransport {
    text: String,
}

impl ChatTransport for ScenarioOnlyTransport {
    fn complete(
        &self,
        request: &TranslationRequest,
        _prompt: &str,
    ) -> Result<String, TranslateError> {
        match request.target {
            TargetKind::ScenarioIr => Ok(self.text.clone()),
            TargetKind::OperatorDefinition => Err(TranslateError::FixtureMissing(
                "scenario-only input".into(),
            )),
        }
    }
}

pub fn infer(args: InferArgs) -> Result<(), EvalError> {
    let opts = &args.common;
    let mut manifest = RunManifest::start(&opts.out, "infer", opts.seed, opts.config_json("infer"))?;

    let (stimulus, transport): (StimulusRecord, Box<dyn ChatTransport>) =
        match (&args.stimulus, &args.scenario) {
            (Some(id), None) => {
                manifest.hash_input(&opts.corpus);
                let corpus = load_corpus(&opts.corpus)?;
                let stimulus = find_stimulus(&corpus, id)?;
                manifest.hash_input(&opts.fixtures.join(&stimulus.fixture_ref).join("scenario.json"));
                (stimulus, opts.transport()?)
            }
            (None, Some(path)) => {
                manifest.hash_input(path);
                let text = std::fs::read_to_string(path)?;
                let ir = parse_scenario_ir(&text)?;
                let id = path
                    .file_stem()
                    .map(|s| s.to_string_lossy().to_string())
                    .unwrap_or_else(|| "scenario".into());
                let stimulus = StimulusRecord {
                    id: id.clone(),
                    variant: ir.dynamics_variant,
                    text: String::new(),
                    goals: ir.goals.clone(),
                    fixture_ref: id,
                };
                (stimulus, Box::new(ScenarioOnlyTransport { text }))
            }
            _ => {
                return Err(EvalError::Schema(
                    "pass exactly one of --stimulus or --scenario".into(),
                ))
            }
        };

    let audited = AuditingTransport::new(transport, opts.out.join("audit"));
    let outcome = run_stimulus(&stimulus, &audited, &opts.run_config())?;

    for (goal, p) in outcome.posterior.iter() {
        println!("{goal} {p}");
    }

    let record = serde_json::json!({
        "stimulus": stimulus.id,
        "config": opts.config_json("infer"),
        "attempts": outcome.attempts,
        "posterior": outcome.posterior.iter().collect::<BTreeMap<&str, f64>>(),
    });
    let json_path = opts.out.join(format!("posterior_{}.json", stimulus.id));
    write_atomic(&json_path, serde_json::to_string_pretty(&record)?.as_bytes())?;
    manifest.record_output(&json_path);

    let mut csv = String::from("stimulus,trophy,probability\n");
    for (goal, p) in outcome.posterior.iter() {
        csv.push_str(&format!("{},{goal},{p}\n", stimulus.id));
    }
    let csv_path = opts.out.join(format!("posterior_{}.csv", stimulus.id));
    write_atomic(&csv_path, csv.as_bytes())?;
    manifest.record_output(&csv_path);

    manifest.finish()?;
    Ok(())
}

pub fn eval(args: EvalArgs) -> Result<(), EvalError> {
    let opts = &args.common;
    let mut config = opts.config_json("eval");
    config["bootstrap_samples"] = serde_json::json!(args.bootstrap_samples);
    config["human"] = serde_json::json!(args.human.display().to_string());
    let mut manifest = RunManifest::start(&opts.out, "eval", opts.seed, config)?;
    manifest.hash_input(&opts.corpus);
    manifest.hash_input(&args.human);

    let corpus = load_corpus(&opts.corpus)?;
    let transport = AuditingTransport::new(opts.transport()?, opts.out.join("audit"));
    let (values, _outcomes) = model_judgments(&corpus, &transport, &opts.run_config())?;

    let mut model_csv = String::from("stimulus,trophy,probability\n");
    for ((stimulus, trophy), p) in &values {
        model_csv.push_str(&format!("{stimulus},{trophy},{p}\n"));
    }
    let model_path = opts.out.join("model_values.csv");
    write_atomic(&model_path, model_csv.as_bytes())?;
    manifest.record_output(&model_path);

    let mut human = load_human_csv(&args.human, &corpus)?;
    if let Some(threshold) = args.exclude_below {
        human = exclude_low_agreement(&human, threshold);
    }

    let scopes = [
        Scope::Overall,
        Scope::Variant(DynamicsVariant::Generic),
        Scope::Variant(DynamicsVariant::ColorSame),
        Scope::Variant(DynamicsVariant::ColorDifferent),
        Scope::Variant(DynamicsVariant::Spatial),
    ];
    for scope in scopes {
        let label = scope.label();
        let report_path = opts.out.join(format!("report_{label}.json"));
        match correlation_report(
            &values,
            &human,
            &corpus,
            scope,
            args.bootstrap_samples,
            opts.seed,
        ) {
            Ok(report) => {
                println!(
                    "{label}: R={:.4} CI=({:.4}, {:.4}) n={}",
                    report.pearson_r, report.ci_low, report.ci_high, report.n_pairs
                );
                write_atomic(
                    &report_path,
                    serde_json::to_string_pretty(&report)?.as_bytes(),
                )?;
                manifest.record_output(&report_path);
                let scatter_path = opts.out.join(format!("scatter_{label}.csv"));
                write_atomic(&scatter_path, emit_plot_data(&report).as_bytes())?;
                manifest.record_output(&scatter_path);
            }
            Err(EvalError::InsufficientPairs(n)) => {
                println!("{label}: insufficient pairs ({n})");
                let stub = serde_json::json!({"scope": label, "error": "insufficient pairs", "n_pairs": n});
                write_atomic(&report_path, serde_json::to_string_pretty(&stub)?.as_bytes())?;
                manifest.record_output(&report_path);
            }
            Err(e) => return Err(e),
        }
    }

    manifest.finish()?;
    Ok(())
}

pub fn baseline(args: BaselineArgs) -> Result<(), EvalError> {
    let opts = &args.common;
    let mut config = opts.config_json("baseline");
    config["samples"] = serde_json::json!(args.samples);
    let mut manifest = RunManifest::start(&opts.out, "baseline", opts.seed, config)?;
    manifest.hash_input(&opts.corpus);

    let corpus = load_corpus(&opts.corpus)?;
    let template = match &args.template {
        Some(path) => {
            manifest.hash_input(path);
            std::fs::read_to_string(path)?
        }
        None => BASELINE_PROMPT_TEMPLATE.to_string(),
    };
    let transport = opts.baseline_transport()?;
    let outcome = llm_baseline_judgments(&corpus, &*transport, args.samples, &template, 1.0)?;

    let mut csv = String::from("stimulus,trophy,mean_rating\n");
    for ((stimulus, trophy), mean) in &outcome.means {
        csv.push_str(&format!("{stimulus},{trophy},{mean}\n"));
    }
    let means_path = opts.out.join("baseline_means.csv");
    write_atomic(&means_path, csv.as_bytes())?;
    manifest.record_output(&means_path);

    for (stimulus, raws) in &outcome.raw {
        for (i, raw) in raws.iter().enumerate() {
            let path = opts
                .out
                .join("baseline_raw")
                .join(format!("{stimulus}_{:03}.txt", i + 1));
            write_atomic(&path, raw.as_bytes())?;
        }
    }
    println!("wrote {} mean ratings", outcome.means.len());

    manifest.finish()?;
    Ok(())
}

pub fn plan(args: PlanArgs) -> Result<(), EvalError> {
    let opts = &args.common;
    let manifest_config = opts.config_json("plan");
    let mut manifest = RunManifest::start(&opts.out, "plan", opts.seed, manifest_config)?;
    manifest.hash_input(&opts.corpus);

    let corpus = load_corpus(&opts.corpus)?;
    let stimulus = find_stimulus(&corpus, &args.stimulus)?;
    let transport = opts.transport()?;
    let outcome = run_stimulus(&stimulus, &*transport, &opts.run_config())?;
    let world = &outcome.world;
    let goal = world.goal_index(&args.goal).ok_or_else(|| {
        EvalError::Schema(format!("`{}` is not a goal of `{}`", args.goal, stimulus.id))
    })?;

    match optimal_cost(world, &world.initial_state(), goal) {
        PlanResult::Reached { cost, actions } => {
            for action in &actions {
                println!("{}", world.describe_action(action));
            }
            println!("total cost: {cost}");
        }
        PlanResult::Unreachable => println!("UNREACHABLE"),
    }
    manifest.finish()?;
    Ok(())
}

pub fn sample_map(args: SampleMapArgs) -> Result<(), EvalError> {
    let opts = &args.common;
    let manifest_config = opts.config_json("sample-map");
    let mut manifest = RunManifest::start(&opts.out, "sample-map", opts.seed, manifest_config)?;
    manifest.hash_input(&opts.corpus);

    let corpus = load_corpus(&opts.corpus)?;
    let stimulus = find_stimulus(&corpus, &args.stimulus)?;
    let transport = opts.transport()?;
    let outcome = run_stimulus(&stimulus, &*transport, &opts.run_config())?;
    let map = &outcome.map;

    let mut grid = vec![vec!['.'; map.width as usize]; map.height as usize];
    for door in &map.doors {
        grid[door.cell.y as usize][door.cell.x as usize] = if door.locked { 'D' } else { 'd' };
    }
    for key in &map.key_cells {
        grid[key.cell.y as usize][key.cell.x as usize] = 'k';
    }
    for (name, cell) in &map.trophy_cells {
        let letter = name.chars().next().unwrap_or('?').to_ascii_uppercase();
        grid[cell.y as usize][cell.x as usize] = letter;
    }
    grid[map.agent_start.y as usize][map.agent_start.x as usize] = 'A';
    for row in &grid {
        println!("{}", row.iter().collect::<String>());
    }
    manifest.finish()?;
    Ok(())
}
