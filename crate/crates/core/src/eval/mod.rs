//! The stimulus corpus, human-judgment ingestion, model and LLM-baseline
//! protocols, and the correlation statistics used to compare them.

mod corpus;
mod human;
mod judgments;
mod report;
pub mod stats;

pub use corpus::{load_corpus, StimulusRecord};
pub use human::{exclude_low_agreement, load_human_csv, HumanJudgments, HumanRow};
pub use judgments::{
    llm_baseline_judgments, model_judgments, observation_trace, run_stimulus, stimulus_seed,
    BaselineOutcome, RunConfig, StimulusOutcome, BASELINE_PROMPT_TEMPLATE,
};
pub use report::{correlation_report, emit_plot_data, CorrelationReport, PairedValue, Scope};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("schema error: {0}")]
    Schema(String),
    #[error("row {row}: {message}")]
    Range { row: usize, message: String },
    #[error("fewer than 3 paired values in scope ({0})")]
    InsufficientPairs(usize),
    #[error("stimulus `{0}`: sample budget exhausted before enough well-formed answers")]
    SampleBudgetExhausted(String),
    #[error("stimulus `{id}`: {source}")]
    InStimulus {
        id: String,
        #[source]
        source: Box<EvalError>,
    },
    #[error(transparent)]
    Translate(#[from] crate::translate::TranslateError),
    #[error(transparent)]
    Worldgen(#[from] crate::worldgen::WorldgenError),
    #[error(transparent)]
    Infer(#[from] crate::infer::InferError),
    #[error(transparent)]
    Plan(#[from] crate::planner::PlanError),
    #[error(transparent)]
    Pddl(#[from] crate::pddl::PddlError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

impl EvalError {
    pub fn in_stimulus(self, id: &str) -> EvalError {
        EvalError::InStimulus {
            id: id.to_string(),
            source: Box::new(self),
        }
    }
}
