use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::worldgen::DynamicsVariant;

use super::prompt::{FewShotExample, TargetKind};

/// One held-out paired example, tagged by variant and translation target.
#[derive(Debug, Clone)]
pub struct FewShotEntry {
    pub variant: DynamicsVariant,
    pub target: TargetKind,
    pub example: FewShotExample,
}

/// The built-in pool of held-out paired language/code examples. None of
/// these appear in the stimulus corpus.
pub fn builtin_few_shot() -> Vec<FewShotEntry> {
    let raw: serde_json::Value =
        serde_json::from_str(include_str!("fewshot.json")).expect("built-in pool parses");
    raw.as_array()
        .expect("array")
        .iter()
        .map(|item| {
            let variant = item["variant"]
                .as_str()
                .expect("variant")
                .parse::<DynamicsVariant>()
                .expect("known variant");
            let target = match item["target"].as_str().expect("target") {
                "scenario" => TargetKind::ScenarioIr,
                "operator" => TargetKind::OperatorDefinition,
                other => panic!("unknown target `{other}`"),
            };
            FewShotEntry {
                variant,
                target,
                example: FewShotExample {
                    input: item["input"].as_str().expect("input").to_string(),
                    output: item["output"].as_str().expect("output").to_string(),
                },
            }
        })
        .collect()
}

/// Randomly draw 2-3 examples matching the variant and target, seeded for
/// reproducibility. Falls back to any-variant examples of the right target
/// when the pool is thin.
pub fn pick_examples(
    pool: &[FewShotEntry],
    variant: DynamicsVariant,
    target: TargetKind,
    seed: u64,
) -> Vec<FewShotExample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut matching: Vec<&FewShotEntry> = pool
        .iter()
        .filter(|e| e.target == target && e.variant == variant)
        .collect();
    if matching.len() < 2 {
        matching = pool.iter().filter(|e| e.target == target).collect();
    }
    let count = rng.gen_range(2..=3usize).min(matching.len());
    matching.shuffle(&mut rng);
    matching
        .into_iter()
        .take(count)
        .map(|e| e.example.clone())
        .collect()
}
