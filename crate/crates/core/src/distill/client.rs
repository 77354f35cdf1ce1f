//! Completion endpoint contract, a seeded mock and an HTTP transport.

use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::{env, fs, thread};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::prompts::{EXTRACTION_SYSTEM_PROMPT, TYPE_SYSTEM_PROMPT};
use crate::error::{Error, Result};

pub const URL_VAR: &str = "TERMKIT_LLM_URL";
pub const KEY_VAR: &str = "TERMKIT_LLM_KEY";
pub const MODEL_VAR: &str = "TERMKIT_LLM_MODEL";
pub const DEFAULT_MODEL: &str = "gpt-4o";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LlmRequest {
    pub system: String,
    pub user: String,
    pub temperature: f64,
    pub max_tokens: u32,
}

impl LlmRequest {
    pub fn new(system: impl Into<String>, user: impl Into<String>) -> Self {
        LlmRequest {
            system: system.into(),
            user: user.into(),
            temperature: 0.0,
            max_tokens: 1024,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LlmResponse {
    pub text: String,
    pub status: u16,
}

pub trait CompletionClient: Send + Sync {
    fn complete(&self, request: &LlmRequest) -> Result<LlmResponse>;
}

impl<C: CompletionClient + ?Sized> CompletionClient for &C {
    fn complete(&self, request: &LlmRequest) -> Result<LlmResponse> {
        (**self).complete(request)
    }
}

impl<C: CompletionClient + ?Sized> CompletionClient for Box<C> {
    fn complete(&self, request: &LlmRequest) -> Result<LlmResponse> {
        (**self).complete(request)
    }
}

/// Deterministic stand-in for a remote endpoint. Each response depends only
/// on the seed and the prompt pair, never on call order.
///
/// Seeds starting with `fail` make every request a transport error; seeds
/// starting with `garble` answer classification prompts without an answer
/// object.
#[derive(Debug, Clone)]
pub struct MockClient {
    seed: String,
}

impl MockClient {
    pub fn new(seed: impl Into<String>) -> Self {
        MockClient { seed: seed.into() }
    }

    fn digest(&self, request: &LlmRequest) -> [u8; 32] {
        let mut h = Sha256::new();
        h.update(self.seed.as_bytes());
        h.update([0]);
        h.update(request.system.as_bytes());
        h.update([0]);
        h.update(request.user.as_bytes());
        h.finalize().into()
    }

    fn classify(&self, user: &str, digest: &[u8; 32]) -> String {
        let type_name = user
            .split_once("of the type ")
            .and_then(|(_, rest)| rest.split_once(", would you consider it"))
            .map_or("unknown", |(t, _)| t);
        if self.seed.starts_with("garble") {
            return format!("Expressions of the type {type_name} are hard to judge.");
        }
        let answer = digest[0] & 1;
        let reason = if answer == 1 {
            "usually designate domain concepts"
        } else {
            "usually name entities rather than concepts"
        };
        format!("Expressions of the type {type_name} {reason}.\n{{\"answer\": {answer}}}")
    }

    fn extract(user: &str, digest: &[u8; 32]) -> String {
        let text = user
            .split_once("\nThe abstract: ")
            .map(|(_, rest)| rest)
            .and_then(|rest| rest.rsplit_once("\n\n## Return list of extracted terms:"))
            .map_or("", |(a, _)| a);
        let words: Vec<&str> = text
            .split_whitespace()
            .map(|w| w.trim_matches(|c: char| !c.is_alphanumeric() && c != '-'))
            .collect();
        let mut terms = Vec::new();
        let mut i = 0;
        while i < words.len() {
            let byte = digest[i % 32].wrapping_add((i / 32) as u8);
            let usable = |w: &str| w.chars().count() >= 4 && w.chars().all(|c| c.is_alphanumeric() || c == '-');
            if byte.is_multiple_of(3) && usable(words[i]) {
                if byte & 8 != 0 && i + 1 < words.len() && usable(words[i + 1]) {
                    terms.push(format!("{} {}", words[i], words[i + 1]));
                    i += 2;
                    continue;
                }
                terms.push(words[i].to_string());
            }
            i += 1;
        }
        terms.join(", ")
    }
}

impl CompletionClient for MockClient {
    fn complete(&self, request: &LlmRequest) -> Result<LlmResponse> {
        if self.seed.starts_with("fail") {
            return Err(Error::Endpoint(format!("mock endpoint `{}` refused the request", self.seed)));
        }
        let digest = self.digest(request);
        let text = if request.system == TYPE_SYSTEM_PROMPT {
            self.classify(&request.user, &digest)
        } else if request.system == EXTRACTION_SYSTEM_PROMPT {
            Self::extract(&request.user, &digest)
        } else {
            String::new()
        };
        Ok(LlmResponse { text, status: 200 })
    }
}

/// OpenAI-compatible chat-completions transport.
#[cfg(feature = "http")]
pub struct HttpClient {
    agent: ureq::Agent,
    url: String,
    key: Option<String>,
    model: String,
}

#[cfg(feature = "http")]
impl HttpClient {
    pub fn new(config: &EndpointConfig) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(std::time::Duration::from_secs(config.timeout_secs)))
            .build()
            .into();
        HttpClient {
            agent,
            url: config.url.clone(),
            key: config.key.clone(),
            model: config.model.clone(),
        }
    }
}

#[cfg(feature = "http")]
impl CompletionClient for HttpClient {
    fn complete(&self, request: &LlmRequest) -> Result<LlmResponse> {
        let body = serde_json::json!({
            "model": self.model,
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
            "messages": [
                {"role": "system", "content": request.system},
                {"role": "user", "content": request.user},
            ],
        });
        let mut call = self.agent.post(&self.url);
        if let Some(key) = &self.key {
            call = call.header("Authorization", &format!("Bearer {key}"));
        }
        let mut response = call
            .send_json(&body)
            .map_err(|e| Error::Endpoint(format!("{}: {e}", self.url)))?;
        let status = response.status().as_u16();
        let value: serde_json::Value = response
            .body_mut()
            .read_json()
            .map_err(|e| Error::Endpoint(format!("{}: unreadable response: {e}", self.url)))?;
        let text = value["choices"][0]["message"]["content"]
            .as_str()
            .ok_or_else(|| Error::Endpoint(format!("{}: response lacks a message content", self.url)))?;
        Ok(LlmResponse {
            text: text.to_string(),
            status,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EndpointConfig {
    pub url: String,
    #[serde(default, skip_serializing)]
    pub key: Option<String>,
    #[serde(default = "default_model")]
    pub model: String,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
}

fn default_model() -> String {
    DEFAULT_MODEL.to_string()
}

fn default_timeout() -> u64 {
    60
}

impl EndpointConfig {
    pub fn new(url: impl Into<String>) -> Self {
        EndpointConfig {
            url: url.into(),
            key: None,
            model: default_model(),
            timeout_secs: default_timeout(),
        }
    }

    /// Resolves the endpoint from, in order of precedence, the explicit
    /// flag, the environment, and a JSON config file. A bare `mock:` takes
    /// `seed` as its seed.
    pub fn resolve(flag: Option<&str>, config_file: Option<&Path>, seed: u64) -> Result<Self> {
        let mut config = match config_file {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                serde_json::from_str::<FileConfig>(&text)?.into_config()
            }
            None => EndpointConfig::new(""),
        };
        if let Some(url) = flag.map(str::to_string).or_else(|| env::var(URL_VAR).ok()) {
            config.url = url;
        }
        if let Ok(key) = env::var(KEY_VAR) {
            config.key = Some(key);
        }
        if let Ok(model) = env::var(MODEL_VAR) {
            config.model = model;
        }
        if config.url.trim().is_empty() {
            return Err(Error::InvalidArgument(format!(
                "no endpoint configured; pass --endpoint or set {URL_VAR}"
            )));
        }
        if config.url == "mock:" {
            config.url = format!("mock:{seed}");
        }
        Ok(config)
    }

    pub fn mock_seed(&self) -> Option<&str> {
        self.url.strip_prefix("mock:")
    }

    pub fn connect(&self) -> Result<Box<dyn CompletionClient>> {
        if let Some(seed) = self.mock_seed() {
            return Ok(Box::new(MockClient::new(seed)));
        }
        #[cfg(feature = "http")]
        {
            if self.url.starts_with("http://") || self.url.starts_with("https://") {
                return Ok(Box::new(HttpClient::new(self)));
            }
        }
        Err(Error::InvalidArgument(format!("unsupported endpoint `{}`", self.url)))
    }
}

#[derive(Deserialize)]
struct FileConfig {
    #[serde(default)]
    url: String,
    key: Option<String>,
    #[serde(default = "default_model")]
    model: String,
    #[serde(default = "default_timeout")]
    timeout_secs: u64,
}

impl FileConfig {
    fn into_config(self) -> EndpointConfig {
        EndpointConfig {
            url: self.url,
            key: self.key,
            model: self.model,
            timeout_secs: self.timeout_secs,
        }
    }
}

/// Applies `f` to every item with at most `max_inflight` calls running at
/// once. Results come back in input order.
pub fn map_bounded<T, R, F>(items: &[T], max_inflight: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync,
{
    let workers = max_inflight.max(1).min(items.len());
    if workers <= 1 {
        return items.iter().map(f).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<R>>> = items.iter().map(|_| Mutex::new(None)).collect();
    thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= items.len() {
                    break;
                }
                let result = f(&items[i]);
                *slots[i].lock().expect("slot lock") = Some(result);
            });
        }
    });
    slots
        .into_iter()
        .map(|slot| slot.into_inner().expect("slot lock").expect("every slot filled"))
        .collect()
}

pub fn complete_all(
    client: &dyn CompletionClient,
    requests: &[LlmRequest],
    max_inflight: usize,
) -> Vec<Result<LlmResponse>> {
    map_bounded(requests, max_inflight, |r| client.complete(r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distill::prompts::{render_extraction_prompt, render_type_prompt};

    #[test]
    fn mock_is_deterministic() {
        let client = MockClient::new("7");
        let (system, user) = render_extraction_prompt("Wind turbine blades convert kinetic energy.", "Energy");
        let req = LlmRequest::new(system, user);
        let a = client.complete(&req).unwrap();
        assert_eq!(a, client.complete(&req).unwrap());
        assert_eq!(a.status, 200);
    }

    #[test]
    fn mock_classification_carries_answer() {
        let (system, user) = render_type_prompt("disease");
        let text = MockClient::new("1").complete(&LlmRequest::new(system.clone(), user.clone())).unwrap().text;
        assert!(text.contains("type disease"));
        assert!(text.ends_with("{\"answer\": 0}") || text.ends_with("{\"answer\": 1}"));
        let garbled = MockClient::new("garble").complete(&LlmRequest::new(system, user)).unwrap().text;
        assert!(!garbled.contains("answer"));
    }

    #[test]
    fn failing_mock() {
        let err = MockClient::new("fail").complete(&LlmRequest::new("s", "u")).unwrap_err();
        assert!(err.is_endpoint_failure());
    }

    #[test]
    fn bounded_map_keeps_order() {
        let items: Vec<u32> = (0..50).collect();
        for inflight in [0, 1, 3, 64] {
            let out = map_bounded(&items, inflight, |x| x * 2);
            assert_eq!(out, items.iter().map(|x| x * 2).collect::<Vec<_>>());
        }
    }

    #[test]
    fn resolve_mock_seed() {
        let config = EndpointConfig::resolve(Some("mock:"), None, 42).unwrap();
        assert_eq!(config.mock_seed(), Some("42"));
        assert!(config.connect().is_ok());
        assert!(EndpointConfig::new("ftp://x").connect().is_err());
    }
}
