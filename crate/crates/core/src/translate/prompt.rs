use super::TranslateError;

/// What the translation should produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TargetKind {
    /// A world-configuration record (JSON).
    ScenarioIr,
    /// A single `(:action ...)` operator definition (PDDL).
    OperatorDefinition,
}

/// One paired language/code example for few-shot prompting.
#[derive(Debug, Clone)]
pub struct FewShotExample {
    pub input: String,
    pub output: String,
}

#[derive(Debug, Clone)]
pub struct TranslationRequest {
    /// Stimulus id, used by the fixture transport to key canned responses.
    pub stimulus_id: Option<String>,
    pub stimulus_text: String,
    pub few_shot: Vec<FewShotExample>,
    pub temperature: f64,
    pub max_rejections: u32,
    pub target: TargetKind,
}

impl TranslationRequest {
    pub fn new(stimulus_text: impl Into<String>, target: TargetKind) -> Self {
        TranslationRequest {
            stimulus_id: None,
            stimulus_text: stimulus_text.into(),
            few_shot: Vec::new(),
            temperature: 1.2,
            max_rejections: 10,
            target,
        }
    }
}

/// Concatenate the few-shot input/output blocks and close with the new
/// stimulus as an open input. Exactly 2 or 3 examples are accepted.
pub fn build_prompt(request: &TranslationRequest) -> Result<String, TranslateError> {
    if !(2..=3).contains(&request.few_shot.len()) {
        return Err(TranslateError::InvalidRequest(format!(
            "expected 2 or 3 few-shot examples, got {}",
            request.few_shot.len()
        )));
    }
    if request.temperature <= 0.0 {
        return Err(TranslateError::InvalidRequest(
            "temperature must be positive".into(),
        ));
    }
    let mut prompt = String::new();
    for example in &request.few_shot {
        prompt.push_str("Input:\n");
        prompt.push_str(example.input.trim_end());
        prompt.push_str("\n\noutput:\n");
        prompt.push_str(example.output.trim_end());
        prompt.push_str("\n\n");
    }
    prompt.push_str("Input:\n");
    prompt.push_str(request.stimulus_text.trim_end());
    prompt.push_str("\n\noutput:\n");
    Ok(prompt)
}
