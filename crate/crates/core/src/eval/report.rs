use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::worldgen::DynamicsVariant;

use super::corpus::StimulusRecord;
use super::human::HumanJudgments;
use super::stats::{bootstrap_pearson_ci, pearson};
use super::EvalError;

/// Which stimuli a report covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scope {
    Overall,
    Variant(DynamicsVariant),
}

impl Scope {
    pub fn label(&self) -> String {
        match self {
            Scope::Overall => "overall".into(),
            Scope::Variant(v) => v.as_str().into(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairedValue {
    pub stimulus: String,
    pub trophy: String,
    pub variant: String,
    pub model_value: f64,
    pub human_mean: f64,
}

/// Pearson correlation between model values and mean human ratings over the
/// scoped (stimulus, trophy) pairs, with a seeded percentile-bootstrap
/// confidence interval.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub scope: String,
    pub pearson_r: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n_pairs: usize,
    pub bootstrap_samples: u32,
    pub seed: u64,
    pub paired_values: Vec<PairedValue>,
}

pub fn correlation_report(
    model_values: &BTreeMap<(String, String), f64>,
    human: &HumanJudgments,
    corpus: &[StimulusRecord],
    scope: Scope,
    bootstrap_samples: u32,
    seed: u64,
) -> Result<CorrelationReport, EvalError> {
    let human_means = human.means();
    let mut paired = Vec::new();
    for stimulus in corpus {
        if let Scope::Variant(v) = scope {
            if stimulus.variant != v {
                continue;
            }
        }
        for trophy in &stimulus.goals {
            let key = (stimulus.id.clone(), trophy.clone());
            let (Some(model), Some(humanv)) = (model_values.get(&key), human_means.get(&key))
            else {
                continue;
            };
            paired.push(PairedValue {
                stimulus: stimulus.id.clone(),
                trophy: trophy.clone(),
                variant: stimulus.variant.as_str().into(),
                model_value: *model,
                human_mean: *humanv,
            });
        }
    }
    if paired.len() < 3 {
        return Err(EvalError::InsufficientPairs(paired.len()));
    }
    paired.sort_by(|a, b| (&a.stimulus, &a.trophy).cmp(&(&b.stimulus, &b.trophy)));

    let xs: Vec<f64> = paired.iter().map(|p| p.model_value).collect();
    let ys: Vec<f64> = paired.iter().map(|p| p.human_mean).collect();
    let r = pearson(&xs, &ys)
        .ok_or_else(|| EvalError::Schema("degenerate pairs: zero variance".into()))?;
    let pairs: Vec<(f64, f64)> = xs.iter().copied().zip(ys.iter().copied()).collect();
    let (ci_low, ci_high) = bootstrap_pearson_ci(&pairs, bootstrap_samples, seed, 0.05)
        .ok_or_else(|| EvalError::Schema("bootstrap failed on degenerate pairs".into()))?;

    Ok(CorrelationReport {
        scope: scope.label(),
        pearson_r: r,
        ci_low,
        ci_high,
        n_pairs: paired.len(),
        bootstrap_samples,
        seed,
        paired_values: paired,
    })
}

/// Scatter CSV: one row per (stimulus, trophy) pair in byte-deterministic
/// order.
pub fn emit_plot_data(report: &CorrelationReport) -> String {
    let mut out = String::from("stimulus,trophy,variant,model_value,human_mean\n");
    for p in &report.paired_values {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            p.stimulus, p.trophy, p.variant, p.model_value, p.human_mean
        ));
    }
    out
}
