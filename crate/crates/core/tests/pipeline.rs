//! End-to-end runs over the shipped corpus and fixtures, fully offline.

use std::collections::BTreeSet;
use std::path::PathBuf;

use invplan_core::eval::{load_corpus, load_human_csv, model_judgments, run_stimulus, RunConfig};
use invplan_core::translate::{FixtureStore, FixtureTransport};
use invplan_core::worldgen::DynamicsVariant;

fn repo_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../..")
        .canonicalize()
        .unwrap()
}

#[test]
fn shipped_corpus_has_18_stimuli_across_4_variants() {
    let corpus = load_corpus(&repo_root().join("data/corpus.json")).unwrap();
    assert_eq!(corpus.len(), 18);
    let variants: BTreeSet<DynamicsVariant> = corpus.iter().map(|s| s.variant).collect();
    assert_eq!(variants.len(), 4);
    for s in &corpus {
        assert_eq!(s.goals, vec!["gold", "silver", "bronze"]);
    }
}

#[test]
fn fixture_store_covers_every_corpus_stimulus() {
    let root = repo_root();
    let corpus = load_corpus(&root.join("data/corpus.json")).unwrap();
    let ids: Vec<String> = corpus.iter().map(|s| s.id.clone()).collect();
    let store = FixtureStore::load(&root.join("fixtures"), &ids).unwrap();
    assert_eq!(store.ids().count(), 18);
    for s in &corpus {
        assert!(store.scenario(&s.id).is_some(), "{}", s.id);
        let has_operator = store.operator(&s.id).is_some();
        match s.variant {
            DynamicsVariant::ColorSame | DynamicsVariant::ColorDifferent => {
                assert!(has_operator, "{} ships an operator override", s.id)
            }
            _ => assert!(!has_operator, "{} has no operator override", s.id),
        }
    }
}

#[test]
fn every_stimulus_infers_offline_with_normalized_posteriors() {
    let root = repo_root();
    let corpus = load_corpus(&root.join("data/corpus.json")).unwrap();
    let transport = FixtureTransport::new(root.join("fixtures"));
    let config = RunConfig {
        seed: 7,
        ..RunConfig::default()
    };
    let (values, outcomes) = model_judgments(&corpus, &transport, &config).unwrap();
    assert_eq!(values.len(), 54);
    for outcome in &outcomes {
        let total: f64 = outcome.posterior.iter().map(|(_, p)| p).sum();
        assert!(
            (total - 1.0).abs() <= 1e-9,
            "{} sums to {total}",
            outcome.id
        );
    }
}

#[test]
fn reference_spatial_stimulus_points_at_bronze() {
    let root = repo_root();
    let corpus = load_corpus(&root.join("data/corpus.json")).unwrap();
    let stimulus = corpus.iter().find(|s| s.id == "spatial_04").unwrap();
    let transport = FixtureTransport::new(root.join("fixtures"));
    let outcome = run_stimulus(stimulus, &transport, &RunConfig::default()).unwrap();
    assert_eq!(outcome.posterior.argmax(), Some("bronze"));
}

#[test]
fn synthetic_human_file_loads_and_covers_the_corpus() {
    let root = repo_root();
    let corpus = load_corpus(&root.join("data/corpus.json")).unwrap();
    let judgments = load_human_csv(&root.join("data/human_synthetic.csv"), &corpus).unwrap();
    assert_eq!(judgments.rows.len(), 14 * 18 * 3);
    let means = judgments.means();
    assert_eq!(means.len(), 54);
}
