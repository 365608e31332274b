//! Language-to-code translation via a chat-completion LLM, with few-shot
//! prompts, rejection sampling against syntactic/semantic/executability
//! checks, and a fixture transport for fully offline runs.

mod fewshot;
mod prompt;
mod transport;
mod validate;

pub use fewshot::{builtin_few_shot, pick_examples, FewShotEntry};
pub use prompt::{build_prompt, FewShotExample, TargetKind, TranslationRequest};
pub use transport::{ChatTransport, FixtureStore, FixtureTransport, HttpTransport, StaticTransport};
pub use validate::{validate_translation, ValidationContext, ValidationReport};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum TranslateError {
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("authentication failed: {0}")]
    Auth(String),
    #[error("rate limited after {0} retries")]
    RateLimited(u32),
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("no fixture for stimulus `{0}`")]
    FixtureMissing(String),
    #[error("all {attempts} translation attempts failed validation")]
    RejectionBudgetExhausted {
        attempts: u32,
        reports: Vec<ValidationReport>,
    },
}

/// An accepted translation and how many attempts it took.
#[derive(Debug, Clone)]
pub struct AcceptedTranslation {
    pub code: String,
    pub attempts: u32,
    pub prompt: String,
}

/// Sample translations until one passes validation or the budget runs out.
pub fn translate_with_rejection(
    request: &TranslationRequest,
    transport: &dyn ChatTransport,
    context: &ValidationContext,
) -> Result<AcceptedTranslation, TranslateError> {
    if request.max_rejections < 1 {
        return Err(TranslateError::InvalidRequest(
            "max_rejections must be at least 1".into(),
        ));
    }
    let prompt = build_prompt(request)?;
    let mut reports = Vec::new();
    for attempt in 1..=request.max_rejections {
        let raw = transport.complete(request, &prompt)?;
        let report = validate_translation(&raw, request.target, context);
        if report.accepted() {
            return Ok(AcceptedTranslation {
                code: raw,
                attempts: attempt,
                prompt,
            });
        }
        reports.push(report);
    }
    Err(TranslateError::RejectionBudgetExhausted {
        attempts: request.max_rejections,
        reports,
    })
}
