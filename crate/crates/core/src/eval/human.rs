use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use super::corpus::StimulusRecord;
use super::EvalError;

/// Per-participant Likert ratings, one row per (participant, stimulus,
/// trophy) triple.
#[derive(Debug, Clone, Default)]
pub struct HumanJudgments {
    pub rows: Vec<HumanRow>,
}

#[derive(Debug, Clone)]
pub struct HumanRow {
    pub participant: String,
    pub stimulus: String,
    pub trophy: String,
    pub rating: u8,
}

impl HumanJudgments {
    /// Mean rating per (stimulus, trophy) pair.
    pub fn means(&self) -> BTreeMap<(String, String), f64> {
        let mut sums: BTreeMap<(String, String), (f64, usize)> = BTreeMap::new();
        for row in &self.rows {
            let slot = sums
                .entry((row.stimulus.clone(), row.trophy.clone()))
                .or_insert((0.0, 0));
            slot.0 += row.rating as f64;
            slot.1 += 1;
        }
        sums.into_iter()
            .map(|(k, (sum, n))| (k, sum / n as f64))
            .collect()
    }
}

/// Load and validate a human-judgment CSV with the header
/// `participant_id,stimulus_id,trophy,rating`. Ratings are 1-7, and every
/// (participant, stimulus) pair must cover all of that stimulus's trophies.
pub fn load_human_csv(path: &Path, corpus: &[StimulusRecord]) -> Result<HumanJudgments, EvalError> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| EvalError::Schema(format!("cannot read csv: {e}")))?;
    let headers = reader
        .headers()
        .map_err(|e| EvalError::Schema(e.to_string()))?
        .clone();
    let expected = ["participant_id", "stimulus_id", "trophy", "rating"];
    let actual: Vec<&str> = headers.iter().collect();
    if actual != expected {
        return Err(EvalError::Schema(format!(
            "expected header {expected:?}, got {actual:?}"
        )));
    }

    let goals_of: BTreeMap<&str, &[String]> = corpus
        .iter()
        .map(|s| (s.id.as_str(), s.goals.as_slice()))
        .collect();

    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row_no = i + 2; // header is row 1
        let record = record.map_err(|e| EvalError::Schema(format!("row {row_no}: {e}")))?;
        let [participant, stimulus, trophy, rating] = [0, 1, 2, 3].map(|j| {
            record
                .get(j)
                .map(str::trim)
                .unwrap_or_default()
                .to_string()
        });
        let rating: i64 = rating.parse().map_err(|_| EvalError::Range {
            row: row_no,
            message: format!("rating `{rating}` is not an integer"),
        })?;
        if !(1..=7).contains(&rating) {
            return Err(EvalError::Range {
                row: row_no,
                message: format!("rating {rating} outside the 1-7 scale"),
            });
        }
        let Some(goals) = goals_of.get(stimulus.as_str()) else {
            return Err(EvalError::Schema(format!(
                "row {row_no}: unknown stimulus `{stimulus}`"
            )));
        };
        if !goals.contains(&trophy) {
            return Err(EvalError::Schema(format!(
                "row {row_no}: `{trophy}` is not a trophy of `{stimulus}`"
            )));
        }
        rows.push(HumanRow {
            participant,
            stimulus,
            trophy,
            rating: rating as u8,
        });
    }

    // Coverage: each (participant, stimulus) pair rates every trophy once.
    let mut seen: BTreeMap<(String, String), BTreeSet<String>> = BTreeMap::new();
    for row in &rows {
        let covered = seen
            .entry((row.participant.clone(), row.stimulus.clone()))
            .or_default();
        if !covered.insert(row.trophy.clone()) {
            return Err(EvalError::Schema(format!(
                "participant `{}` rated `{}` twice for `{}`",
                row.participant, row.trophy, row.stimulus
            )));
        }
    }
    for ((participant, stimulus), covered) in &seen {
        let goals = goals_of[stimulus.as_str()];
        if covered.len() != goals.len() {
            return Err(EvalError::Schema(format!(
                "participant `{participant}` covers {}/{} trophies of `{stimulus}`",
                covered.len(),
                goals.len()
            )));
        }
    }
    Ok(HumanJudgments { rows })
}

/// Optional preprocessing: drop participants whose most-probable-goal picks
/// agree with the consensus pick on fewer than `threshold` of their stimuli.
pub fn exclude_low_agreement(
    judgments: &HumanJudgments,
    threshold: f64,
) -> HumanJudgments {
    let means = judgments.means();
    let mut consensus: BTreeMap<&str, (&str, f64)> = BTreeMap::new();
    for ((stimulus, trophy), mean) in &means {
        let entry = consensus.entry(stimulus.as_str()).or_insert((trophy, *mean));
        if *mean > entry.1 {
            *entry = (trophy, *mean);
        }
    }

    let mut per_participant: BTreeMap<&str, BTreeMap<&str, (&str, u8)>> = BTreeMap::new();
    for row in &judgments.rows {
        let stimuli = per_participant.entry(&row.participant).or_default();
        let entry = stimuli
            .entry(&row.stimulus)
            .or_insert((&row.trophy, row.rating));
        if row.rating > entry.1 {
            *entry = (&row.trophy, row.rating);
        }
    }

    let keep: BTreeSet<&str> = per_participant
        .iter()
        .filter(|(_, stimuli)| {
            let total = stimuli.len().max(1);
            let agree = stimuli
                .iter()
                .filter(|(stimulus, (pick, _))| {
                    consensus
                        .get(*stimulus)
                        .map(|(best, _)| best == pick)
                        .unwrap_or(false)
                })
                .count();
            agree as f64 / total as f64 >= threshold
        })
        .map(|(p, _)| *p)
        .collect();

    HumanJudgments {
        rows: judgments
            .rows
            .iter()
            .filter(|r| keep.contains(r.participant.as_str()))
            .cloned()
            .collect(),
    }
}
