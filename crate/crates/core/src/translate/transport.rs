use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde_json::json;

use super::prompt::{TargetKind, TranslationRequest};
use super::TranslateError;

/// A chat-completion endpoint: one prompt in, one sampled completion out.
pub trait ChatTransport {
    fn complete(&self, request: &TranslationRequest, prompt: &str)
        -> Result<String, TranslateError>;
}

/// OpenAI-compatible chat-completions client with exponential-backoff
/// retries on transient failures.
pub struct HttpTransport {
    client: reqwest::blocking::Client,
    pub base_url: String,
    pub model: String,
    pub api_key: String,
    pub max_retries: u32,
}

impl HttpTransport {
    /// Reads the API key from `INVPLAN_API_KEY`, falling back to
    /// `OPENAI_API_KEY`.
    pub fn from_env(base_url: &str, model: &str) -> Result<Self, TranslateError> {
        let api_key = std::env::var("INVPLAN_API_KEY")
            .or_else(|_| std::env::var("OPENAI_API_KEY"))
            .map_err(|_| {
                TranslateError::Auth(
                    "no API key: set INVPLAN_API_KEY or OPENAI_API_KEY".into(),
                )
            })?;
        Ok(HttpTransport::new(base_url, model, &api_key))
    }

    pub fn new(base_url: &str, model: &str, api_key: &str) -> Self {
        HttpTransport {
            client: reqwest::blocking::Client::new(),
            base_url: base_url.trim_end_matches('/').to_string(),
            model: model.to_string(),
            api_key: api_key.to_string(),
            max_retries: 3,
        }
    }
}

impl ChatTransport for HttpTransport {
    fn complete(
        &self,
        request: &TranslationRequest,
        prompt: &str,
    ) -> Result<String, TranslateError> {
        let url = format!("{}/chat/completions", self.base_url);
        let body = json!({
            "model": self.model,
            "temperature": request.temperature,
            "messages": [{"role": "user", "content": prompt}],
        });
        let mut delay = Duration::from_millis(500);
        let mut rate_limited = 0;
        for attempt in 0..=self.max_retries {
            let response = self
                .client
                .post(&url)
                .bearer_auth(&self.api_key)
                .json(&body)
                .send();
            match response {
                Ok(resp) => {
                    let status = resp.status();
                    if status.as_u16() == 401 || status.as_u16() == 403 {
                        return Err(TranslateError::Auth(format!("HTTP {status}")));
                    }
                    if status.as_u16() == 429 {
                        rate_limited += 1;
                        if attempt == self.max_retries {
                            return Err(TranslateError::RateLimited(rate_limited));
                        }
                    } else if status.is_server_error() {
                        if attempt == self.max_retries {
                            return Err(TranslateError::Transport(format!("HTTP {status}")));
                        }
                    } else if !status.is_success() {
                        return Err(TranslateError::Transport(format!("HTTP {status}")));
                    } else {
                        let value: serde_json::Value = resp
                            .json()
                            .map_err(|e| TranslateError::Transport(e.to_string()))?;
                        let content = value["choices"][0]["message"]["content"]
                            .as_str()
                            .ok_or_else(|| {
                                TranslateError::Transport("malformed completion payload".into())
                            })?;
                        return Ok(content.to_string());
                    }
                }
                Err(e) => {
                    if attempt == self.max_retries {
                        return Err(TranslateError::Transport(e.to_string()));
                    }
                }
            }
            std::thread::sleep(delay);
            delay *= 2;
        }
        Err(TranslateError::Transport("retries exhausted".into()))
    }
}

/// Canned responses read from a fixtures directory, keyed by stimulus id:
/// `<root>/<id>/scenario.json`, `<root>/<id>/operator.pddl`, or an arbitrary
/// per-call filename. Byte-deterministic and network-free.
pub struct FixtureTransport {
    root: PathBuf,
    filename: Option<String>,
}

impl FixtureTransport {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        FixtureTransport {
            root: root.into(),
            filename: None,
        }
    }

    /// Serve a fixed filename under each stimulus directory instead of the
    /// target-derived one (used for baseline transcripts).
    pub fn with_filename(root: impl Into<PathBuf>, filename: &str) -> Self {
        FixtureTransport {
            root: root.into(),
            filename: Some(filename.to_string()),
        }
    }

    fn path_for(&self, id: &str, target: TargetKind) -> PathBuf {
        let name = match &self.filename {
            Some(f) => f.as_str(),
            None => match target {
                TargetKind::ScenarioIr => "scenario.json",
                TargetKind::OperatorDefinition => "operator.pddl",
            },
        };
        self.root.join(id).join(name)
    }
}

impl ChatTransport for FixtureTransport {
    fn complete(
        &self,
        request: &TranslationRequest,
        _prompt: &str,
    ) -> Result<String, TranslateError> {
        let id = request
            .stimulus_id
            .as_deref()
            .ok_or_else(|| TranslateError::FixtureMissing("<no stimulus id>".into()))?;
        let path = self.path_for(id, request.target);
        std::fs::read_to_string(&path)
            .map_err(|_| TranslateError::FixtureMissing(format!("{id} ({})", path.display())))
    }
}

/// In-memory transport for tests: yields scripted responses in order,
/// repeating the last one.
pub struct StaticTransport {
    responses: std::cell::RefCell<Vec<String>>,
}

impl StaticTransport {
    pub fn new(responses: Vec<String>) -> Self {
        StaticTransport {
            responses: std::cell::RefCell::new(responses),
        }
    }
}

impl ChatTransport for StaticTransport {
    fn complete(
        &self,
        _request: &TranslationRequest,
        _prompt: &str,
    ) -> Result<String, TranslateError> {
        let mut responses = self.responses.borrow_mut();
        if responses.len() > 1 {
            Ok(responses.remove(0))
        } else {
            responses
                .first()
                .cloned()
                .ok_or_else(|| TranslateError::Transport("no scripted response".into()))
        }
    }
}

/// The full offline fixture set: scenario record text plus optional operator
/// override per stimulus id.
#[derive(Debug, Clone)]
pub struct FixtureStore {
    entries: BTreeMap<String, (String, Option<String>)>,
}

impl FixtureStore {
    /// Load fixtures for the given ids, requiring a scenario record for each.
    pub fn load(root: &Path, ids: &[String]) -> Result<Self, TranslateError> {
        let mut entries = BTreeMap::new();
        for id in ids {
            let scenario = std::fs::read_to_string(root.join(id).join("scenario.json"))
                .map_err(|_| TranslateError::FixtureMissing(id.clone()))?;
            let operator = std::fs::read_to_string(root.join(id).join("operator.pddl")).ok();
            entries.insert(id.clone(), (scenario, operator));
        }
        Ok(FixtureStore { entries })
    }

    pub fn scenario(&self, id: &str) -> Option<&str> {
        self.entries.get(id).map(|(s, _)| s.as_str())
    }

    pub fn operator(&self, id: &str) -> Option<&str> {
        self.entries.get(id).and_then(|(_, o)| o.as_deref())
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }
}
