//! Acceptance suite: the project's exit criteria, one test per criterion.
//! Each prints a `ACCEPTANCE <n> <name>: PASS` line on success, with every
//! tolerance pinned in code.

use std::path::PathBuf;
use std::time::Instant;

use invplan_core::eval::{
    correlation_report, load_corpus, load_human_csv, model_judgments, run_stimulus, stimulus_seed,
    Scope,
};
use invplan_core::eval::{RunConfig, StimulusRecord};
use invplan_core::infer::{Engine, InferenceConfig, ObservationTrace};
use invplan_core::pddl::parse_formula;
use invplan_core::planner::{optimal_cost, uniform_cost, ActionKind, PlanResult};
use invplan_core::testutil::{
    build, colordiff_shared_room, colorsame_two_rooms, generic_two_rooms, small_sampler,
    spatial_walk_south, Built,
};
use invplan_core::translate::{
    validate_translation, FixtureStore, FixtureTransport, TargetKind, ValidationContext,
};
use invplan_core::worldgen::{domains, parse_scenario_ir, DynamicsVariant};

fn repo_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../..")
        .canonicalize()
        .unwrap()
}

fn shipped_corpus() -> Vec<StimulusRecord> {
    load_corpus(&repo_root().join("data/corpus.json")).unwrap()
}

fn fixture_transport() -> FixtureTransport {
    FixtureTransport::new(repo_root().join("fixtures"))
}

fn engine_for(built: Built, beta: f64) -> Engine<f64> {
    Engine::new(
        built.world,
        InferenceConfig {
            beta,
            ..InferenceConfig::default()
        },
    )
    .unwrap()
}

/// Criterion 1: on three designated small fixtures (grids <= 7x7) the exact
/// posterior matches the brute-force rollout enumeration within total
/// variation 1e-6, in under 30 seconds total.
#[test]
fn acceptance_01_exactness_oracle() {
    let clock = Instant::now();
    let tolerance = 1e-6;

    // (a) 5x5 spatial scene, two-step observation.
    let mini_spatial = serde_json::json!({
        "agent": ["Alice"], "goals": ["gold", "silver", "bronze"],
        "locations": {}, "obstacles": {}, "keys": [],
        "max_obstacle": 0, "keys_per_door": 0, "len_key": 0, "goal_count": 3,
        "observation_type": "action_sequence",
        "observation": [{"direction": "S", "steps": 2}],
        "spatial_constraints": [
            {"target": "gold", "anchor": "Alice", "direction": "E", "steps": 1},
            {"target": "silver", "anchor": "Alice", "direction": "S", "steps": 2},
            {"target": "bronze", "anchor": "silver", "direction": "E", "steps": 2}
        ],
        "dynamics_variant": "spatial"
    })
    .to_string();
    let engine = engine_for(build(&mini_spatial, 3, small_sampler(5)), 2.0);
    let obs = engine
        .world()
        .goals()
        .first()
        .map(|_| {
            ObservationTrace::LowLevelActions(vec![
                invplan_core::planner::GroundAction {
                    kind: ActionKind::Move(invplan_core::planner::Direction::South),
                    cost: 1,
                };
                2
            ])
        })
        .unwrap();
    let tv = engine
        .posterior(&obs)
        .unwrap()
        .total_variation(&engine.brute_force_posterior(&obs, 60).unwrap());
    assert!(tv <= tolerance, "spatial 5x5 tv {tv}");

    // (b) 7x7 spatial scene from the walked-past-gold shape, three steps.
    let engine = engine_for(build(&spatial_walk_south(), 5, small_sampler(7)), 2.0);
    let obs = ObservationTrace::LowLevelActions(vec![
        invplan_core::planner::GroundAction {
            kind: ActionKind::Move(invplan_core::planner::Direction::South),
            cost: 1,
        };
        4
    ]);
    let tv = engine
        .posterior(&obs)
        .unwrap()
        .total_variation(&engine.brute_force_posterior(&obs, 60).unwrap());
    assert!(tv <= tolerance, "spatial 7x7 tv {tv}");

    // (c) 5x5 key scene with an observed prefix of the optimal gold plan,
    // through and including the first pickup.
    let built = build(&colorsame_two_rooms(), 17, small_sampler(5));
    let world = built.world.clone();
    let gold = world.goal_index("gold").unwrap();
    let PlanResult::Reached { actions, .. } = optimal_cost(&world, &world.initial_state(), gold)
    else {
        panic!("gold reachable");
    };
    let prefix_len = actions
        .iter()
        .position(|a| matches!(a.kind, ActionKind::Pickup(_)))
        .unwrap()
        + 1;
    let obs = ObservationTrace::LowLevelActions(actions[..prefix_len].to_vec());
    let engine = engine_for(built, 2.0);
    let tv = engine
        .posterior(&obs)
        .unwrap()
        .total_variation(&engine.brute_force_posterior(&obs, 60).unwrap());
    assert!(tv <= tolerance, "key 5x5 tv {tv}");

    let elapsed = clock.elapsed();
    assert!(elapsed.as_secs() < 30, "took {elapsed:?}");
    println!("ACCEPTANCE 1 exactness-oracle: PASS ({elapsed:?})");
}

/// Criterion 2: the walked-past-silver spatial stimulus puts its argmax on
/// bronze for every beta in {0.5, 1, 2, 4}, each run under a second.
#[test]
fn acceptance_02_spatial_reference_example() {
    let corpus = shipped_corpus();
    let stimulus = corpus.iter().find(|s| s.id == "spatial_04").unwrap();
    let transport = fixture_transport();
    for beta in [0.5, 1.0, 2.0, 4.0] {
        let clock = Instant::now();
        let config = RunConfig {
            beta,
            ..RunConfig::default()
        };
        let outcome = run_stimulus(stimulus, &transport, &config).unwrap();
        assert_eq!(
            outcome.posterior.argmax(),
            Some("bronze"),
            "beta {beta}: {:?}",
            outcome.posterior.iter().collect::<Vec<_>>()
        );
        let elapsed = clock.elapsed();
        assert!(elapsed.as_secs_f64() < 1.0, "beta {beta} took {elapsed:?}");
    }
    println!("ACCEPTANCE 2 spatial-reference-example: PASS");
}

/// Criterion 3: the shared-yellow-room scene gives bronze strictly maximal
/// mass, with gold and silver within 0.05 of each other at default config.
#[test]
fn acceptance_03_color_different_reference_example() {
    let corpus = shipped_corpus();
    let stimulus = corpus.iter().find(|s| s.id == "colordiff_01").unwrap();
    let outcome = run_stimulus(stimulus, &fixture_transport(), &RunConfig::default()).unwrap();
    let p = &outcome.posterior;
    assert!(p.get("bronze") > p.get("gold"));
    assert!(p.get("bronze") > p.get("silver"));
    let gap: f64 = p.get("gold") - p.get("silver");
    assert!(gap.abs() <= 0.05, "|gold - silver| = {}", gap.abs());
    println!("ACCEPTANCE 3 color-different-reference-example: PASS");
}

/// Criterion 4: on every shipped fixture the prior equals the normalized
/// inverse of independently recomputed optimal costs to 1e-12, with zero
/// mass on unreachable goals.
#[test]
fn acceptance_04_prior_law() {
    let corpus = shipped_corpus();
    let transport = fixture_transport();
    let config = RunConfig::default();
    let mut saw_unreachable = false;
    for stimulus in &corpus {
        let outcome = run_stimulus(stimulus, &transport, &config).unwrap();
        let world = &outcome.world;
        let engine = Engine::<f64>::new(world.clone(), config.inference()).unwrap();
        let prior = engine.goal_prior().unwrap();

        // Independent route: uniform-cost search, no heuristic, no cache.
        let costs: Vec<Option<u32>> = (0..world.goals().len())
            .map(|g| uniform_cost(world, &world.initial_state(), g))
            .collect();
        let weights: Vec<f64> = costs
            .iter()
            .map(|c| c.map(|c| 1.0 / c as f64).unwrap_or(0.0))
            .collect();
        let total: f64 = weights.iter().sum();
        for (goal, weight) in world.goals().iter().zip(&weights) {
            let expected = weight / total;
            let actual = prior.get(&goal.label);
            assert!(
                (actual - expected).abs() <= 1e-12,
                "{} {}: prior {actual} vs 1/C {expected}",
                stimulus.id,
                goal.label
            );
            if *weight == 0.0 {
                saw_unreachable = true;
                assert_eq!(actual, 0.0);
            }
        }
    }
    assert!(saw_unreachable, "corpus exercises an unreachable goal");
    println!("ACCEPTANCE 4 prior-law: PASS");
}

/// Criterion 5: A* equals uniform-cost search exactly on 20 seeded random
/// maps for every goal, in under 60 seconds.
#[test]
fn acceptance_05_planner_optimality() {
    let clock = Instant::now();
    let fixtures = [
        colorsame_two_rooms(),
        colordiff_shared_room(),
        generic_two_rooms(),
        spatial_walk_south(),
    ];
    let mut maps = 0;
    let mut seed = 100;
    while maps < 20 {
        let fixture = &fixtures[maps % fixtures.len()];
        seed += 1;
        let built = build(fixture, seed, small_sampler(9));
        for goal in 0..built.world.goals().len() {
            let a = optimal_cost(&built.world, &built.world.initial_state(), goal).cost();
            let u = uniform_cost(&built.world, &built.world.initial_state(), goal);
            assert_eq!(a, u, "seed {seed} goal {goal}");
        }
        maps += 1;
    }
    let elapsed = clock.elapsed();
    assert!(elapsed.as_secs() < 60, "took {elapsed:?}");
    println!("ACCEPTANCE 5 planner-optimality: PASS ({maps} maps, {elapsed:?})");
}

/// Criterion 6: every posterior over the 18-stimulus corpus sums to one
/// within 1e-9, with the whole corpus inferred offline in under 60 seconds.
#[test]
fn acceptance_06_normalization_suite() {
    let clock = Instant::now();
    let corpus = shipped_corpus();
    assert_eq!(corpus.len(), 18);
    let (values, outcomes) =
        model_judgments(&corpus, &fixture_transport(), &RunConfig::default()).unwrap();
    assert_eq!(values.len(), 54);
    for outcome in &outcomes {
        let total: f64 = outcome.posterior.iter().map(|(_, p)| p).sum();
        assert!((total - 1.0).abs() <= 1e-9, "{}: {total}", outcome.id);
    }
    let elapsed = clock.elapsed();
    assert!(elapsed.as_secs() < 60, "took {elapsed:?}");
    println!("ACCEPTANCE 6 normalization-suite: PASS ({elapsed:?})");
}

/// Criterion 7: on every spatial fixture, for each goal toward which all
/// observed steps make strict optimal progress, posterior mass is
/// nondecreasing in beta across {0.5, 1, 2, 4}.
#[test]
fn acceptance_07_beta_monotonicity() {
    let corpus = shipped_corpus();
    let transport = fixture_transport();
    let mut checked_goals = 0;
    for stimulus in corpus.iter().filter(|s| s.variant == DynamicsVariant::Spatial) {
        let base = run_stimulus(stimulus, &transport, &RunConfig::default()).unwrap();
        let world = &base.world;
        let ObservationTrace::LowLevelActions(steps) = &base.observation else {
            panic!("spatial fixtures observe action sequences");
        };

        // Goals for which every observed step strictly reduces the optimal
        // remaining cost.
        let mut progress_goals = Vec::new();
        'goals: for (g, goal) in world.goals().iter().enumerate() {
            let mut state = world.initial_state();
            for action in steps {
                let before = match optimal_cost(world, &state, g) {
                    PlanResult::Reached { cost, .. } => cost,
                    PlanResult::Unreachable => continue 'goals,
                };
                state = invplan_core::planner::successors(world, &state)
                    .into_iter()
                    .find(|(a, _)| a == action)
                    .map(|(_, s)| s)
                    .expect("observed step applicable");
                let after = match optimal_cost(world, &state, g) {
                    PlanResult::Reached { cost, .. } => cost,
                    PlanResult::Unreachable => continue 'goals,
                };
                if after >= before {
                    continue 'goals;
                }
            }
            progress_goals.push(goal.label.clone());
        }

        for label in &progress_goals {
            let mut last = 0.0;
            for beta in [0.5, 1.0, 2.0, 4.0] {
                let config = RunConfig {
                    beta,
                    ..RunConfig::default()
                };
                let outcome = run_stimulus(stimulus, &transport, &config).unwrap();
                let p = outcome.posterior.get(label);
                assert!(
                    p >= last,
                    "{} {label}: mass {p} fell below {last} at beta {beta}",
                    stimulus.id
                );
                last = p;
            }
            checked_goals += 1;
        }
    }
    assert!(checked_goals >= 4, "monotonicity exercised on real goals");
    println!("ACCEPTANCE 7 beta-monotonicity: PASS ({checked_goals} goal curves)");
}

/// Criterion 8: all 18 shipped fixtures pass translation validation and
/// compile end to end with zero network access.
#[test]
fn acceptance_08_translation_robustness() {
    let corpus = shipped_corpus();
    let root = repo_root();
    let ids: Vec<String> = corpus.iter().map(|s| s.id.clone()).collect();
    let store = FixtureStore::load(&root.join("fixtures"), &ids).unwrap();
    let transport = fixture_transport();
    for stimulus in &corpus {
        let domain = domains::domain_for(stimulus.variant);
        let mut context = ValidationContext::new(&domain, stimulus.variant);
        context.probe_seed = stimulus_seed(0, &stimulus.id);

        let scenario = store.scenario(&stimulus.id).unwrap();
        let report = validate_translation(scenario, TargetKind::ScenarioIr, &context);
        assert!(report.accepted(), "{}: {:?}", stimulus.id, report.failures);

        if let Some(operator) = store.operator(&stimulus.id) {
            let ir = parse_scenario_ir(scenario).unwrap();
            let mut colors: Vec<String> = ir
                .keys
                .iter()
                .chain(ir.obstacles.values().flatten())
                .filter(|c| c.as_str() != "any")
                .cloned()
                .collect();
            colors.sort();
            colors.dedup();
            context.mentioned_colors = colors;
            let report = validate_translation(operator, TargetKind::OperatorDefinition, &context);
            assert!(report.accepted(), "{} operator: {:?}", stimulus.id, report.failures);
        }

        // End to end: translation, sampling, compilation, inference.
        let outcome = run_stimulus(stimulus, &transport, &RunConfig::default()).unwrap();
        assert_eq!(outcome.attempts, 1, "fixtures accept on the first attempt");
    }
    println!("ACCEPTANCE 8 translation-robustness: PASS (18 fixtures)");
}

/// Criterion 9: Pearson R on the synthetic 54-pair dataset matches a direct
/// raw-moment computation to 1e-12, and bootstrap CIs with 1000 resamples
/// are seed-deterministic.
#[test]
fn acceptance_09_harness_fidelity() {
    let root = repo_root();
    let corpus = shipped_corpus();
    let (values, _) =
        model_judgments(&corpus, &fixture_transport(), &RunConfig::default()).unwrap();
    let human = load_human_csv(&root.join("data/human_synthetic.csv"), &corpus).unwrap();

    let report = correlation_report(&values, &human, &corpus, Scope::Overall, 1000, 7).unwrap();
    assert_eq!(report.n_pairs, 54);

    let xs: Vec<f64> = report.paired_values.iter().map(|p| p.model_value).collect();
    let ys: Vec<f64> = report.paired_values.iter().map(|p| p.human_mean).collect();
    let n = xs.len() as f64;
    let (sx, sy): (f64, f64) = (xs.iter().sum(), ys.iter().sum());
    let sxy: f64 = xs.iter().zip(&ys).map(|(a, b)| a * b).sum();
    let sxx: f64 = xs.iter().map(|a| a * a).sum();
    let syy: f64 = ys.iter().map(|b| b * b).sum();
    let direct = (n * sxy - sx * sy) / ((n * sxx - sx * sx).sqrt() * (n * syy - sy * sy).sqrt());
    assert!(
        (report.pearson_r - direct).abs() <= 1e-12,
        "pearson {} vs direct {direct}",
        report.pearson_r
    );

    let again = correlation_report(&values, &human, &corpus, Scope::Overall, 1000, 7).unwrap();
    assert_eq!(report.ci_low, again.ci_low);
    assert_eq!(report.ci_high, again.ci_high);
    assert!(report.ci_low <= report.pearson_r && report.pearson_r <= report.ci_high);
    println!(
        "ACCEPTANCE 9 harness-fidelity: PASS (R={:.4}, CI=({:.4}, {:.4}))",
        report.pearson_r, report.ci_low, report.ci_high
    );
}

/// Criterion 10: the macro-graph subgoal likelihood agrees with full
/// low-level rollout enumeration within total variation 0.02 on two
/// shrunken 5x5 key-variant fixtures.
#[test]
fn acceptance_10_subgoal_cross_check() {
    let cases = [
        (
            colorsame_two_rooms(),
            17u64,
            "(exists (?k - key) (and (has Alice ?k) (iscolor ?k yellow)))",
            DynamicsVariant::ColorSame,
        ),
        (
            generic_two_rooms(),
            23,
            "(exists (?k - key) (has Alice ?k))",
            DynamicsVariant::Generic,
        ),
    ];
    for (fixture, seed, condition, variant) in cases {
        let engine = engine_for(build(&fixture, seed, small_sampler(5)), 2.0);
        let condition = parse_formula(condition, &domains::domain_for(variant)).unwrap();
        let obs = ObservationTrace::SubgoalCondition(condition);
        let exact = engine.posterior(&obs).unwrap();
        let brute = engine.brute_force_posterior(&obs, 80).unwrap();
        let tv = exact.total_variation(&brute);
        assert!(tv <= 0.02, "{variant:?} tv {tv}");
    }
    println!("ACCEPTANCE 10 subgoal-cross-check: PASS");
}
