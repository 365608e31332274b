use std::collections::BTreeSet;
use std::path::Path;

use serde_json::Value;

use crate::worldgen::DynamicsVariant;

use super::EvalError;

/// One corpus entry: the stimulus text shown to participants plus the
/// bookkeeping needed to run it through the model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StimulusRecord {
    pub id: String,
    pub variant: DynamicsVariant,
    pub text: String,
    /// Trophy labels in presentation order.
    pub goals: Vec<String>,
    /// Directory name inside the fixtures root.
    pub fixture_ref: String,
}

/// Load a corpus file: a JSON array of stimulus records.
pub fn load_corpus(path: &Path) -> Result<Vec<StimulusRecord>, EvalError> {
    let text = std::fs::read_to_string(path)?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| EvalError::Schema(format!("invalid JSON: {e}")))?;
    let items = value
        .as_array()
        .ok_or_else(|| EvalError::Schema("corpus must be a JSON array".into()))?;
    if items.is_empty() {
        return Err(EvalError::Schema("corpus is empty".into()));
    }

    let mut records = Vec::new();
    let mut ids = BTreeSet::new();
    for (i, item) in items.iter().enumerate() {
        let obj = item
            .as_object()
            .ok_or_else(|| EvalError::Schema(format!("entry {i} is not an object")))?;
        let field = |name: &str| -> Result<&str, EvalError> {
            obj.get(name)
                .and_then(Value::as_str)
                .ok_or_else(|| EvalError::Schema(format!("entry {i}: missing string field `{name}`")))
        };
        let id = field("id")?.to_string();
        if !ids.insert(id.clone()) {
            return Err(EvalError::Schema(format!("duplicate stimulus id `{id}`")));
        }
        let variant_label = field("variant")?;
        let variant = variant_label.parse::<DynamicsVariant>().map_err(|_| {
            EvalError::Schema(format!("entry {i}: unknown variant `{variant_label}`"))
        })?;
        let goals = obj
            .get("goals")
            .and_then(Value::as_array)
            .ok_or_else(|| EvalError::Schema(format!("entry {i}: missing array field `goals`")))?
            .iter()
            .map(|g| {
                g.as_str()
                    .map(str::to_string)
                    .ok_or_else(|| EvalError::Schema(format!("entry {i}: goals must be strings")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        if goals.is_empty() {
            return Err(EvalError::Schema(format!("entry {i}: goals are empty")));
        }
        let fixture_ref = obj
            .get("fixture_ref")
            .and_then(Value::as_str)
            .unwrap_or(&id)
            .to_string();
        records.push(StimulusRecord {
            id,
            variant,
            text: field("text")?.to_string(),
            goals,
            fixture_ref,
        });
    }
    Ok(records)
}
