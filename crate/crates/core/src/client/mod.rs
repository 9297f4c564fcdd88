//! Model backends: three HTTP provider styles plus offline replay and mock.
//!
//! Credentials are read from environment variables when a [`Client`] is
//! built and are never logged or serialized.

mod http;
pub mod image;
mod limiter;
pub mod observation;
mod replay;

use std::path::PathBuf;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::prompt::PromptSpec;

pub use image::{ImageError, ImageRef, MediaType};
pub use limiter::TokenBucket;
pub use observation::{parse_observation, LabelOrNa, Observation, ParseError, NA};
pub use replay::ReplayStore;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Backend {
    OpenaiStyle,
    AnthropicStyle,
    GoogleStyle,
    Replay,
    Mock,
}

impl Backend {
    /// The environment variable holding this backend's API key.
    pub fn credential_var(self) -> Option<&'static str> {
        match self {
            Backend::OpenaiStyle => Some("OPENAI_API_KEY"),
            Backend::AnthropicStyle => Some("ANTHROPIC_API_KEY"),
            Backend::GoogleStyle => Some("GOOGLE_API_KEY"),
            Backend::Replay | Backend::Mock => None,
        }
    }

    pub fn is_http(self) -> bool {
        self.credential_var().is_some()
    }
}

impl std::fmt::Display for Backend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Backend::OpenaiStyle => "openai-style",
            Backend::AnthropicStyle => "anthropic-style",
            Backend::GoogleStyle => "google-style",
            Backend::Replay => "replay",
            Backend::Mock => "mock",
        })
    }
}

impl std::str::FromStr for Backend {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        serde_json::from_value(serde_json::Value::String(s.to_owned())).map_err(|_| format!("unknown backend {s:?}"))
    }
}

fn default_temperature() -> f64 {
    0.7
}
fn default_top_p() -> f64 {
    1.0
}
fn default_max_output_tokens() -> u32 {
    1024
}
fn default_timeout_secs() -> u64 {
    60
}
fn default_max_retries() -> u32 {
    3
}
fn default_backoff_base_ms() -> u64 {
    500
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub backend: Backend,
    pub model_name: String,
    #[serde(default = "default_temperature")]
    pub temperature: f64,
    #[serde(default = "default_top_p")]
    pub top_p: f64,
    #[serde(default = "default_max_output_tokens")]
    pub max_output_tokens: u32,
    /// Overrides the provider's public endpoint.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub endpoint_url: Option<String>,
    #[serde(default = "default_timeout_secs")]
    pub timeout_secs: u64,
    #[serde(default = "default_max_retries")]
    pub max_retries: u32,
    #[serde(default = "default_backoff_base_ms")]
    pub backoff_base_ms: u64,
    /// Overrides the name of the environment variable holding the API key.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub api_key_env: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replay_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mock_reply: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub requests_per_minute: Option<u32>,
}

impl ModelConfig {
    pub fn new(backend: Backend, model_name: impl Into<String>) -> Self {
        Self {
            backend,
            model_name: model_name.into(),
            temperature: default_temperature(),
            top_p: default_top_p(),
            max_output_tokens: default_max_output_tokens(),
            endpoint_url: None,
            timeout_secs: default_timeout_secs(),
            max_retries: default_max_retries(),
            backoff_base_ms: default_backoff_base_ms(),
            api_key_env: None,
            replay_dir: None,
            mock_reply: None,
            requests_per_minute: None,
        }
    }

    pub fn validate(&self) -> Result<(), ClientError> {
        let bad = |msg: String| Err(ClientError::InvalidConfig(msg));
        if self.model_name.trim().is_empty() {
            return bad("model_name is empty".into());
        }
        if !(0.0..=2.0).contains(&self.temperature) {
            return bad(format!("temperature {} outside [0, 2]", self.temperature));
        }
        if !(self.top_p > 0.0 && self.top_p <= 1.0) {
            return bad(format!("top_p {} outside (0, 1]", self.top_p));
        }
        if self.max_output_tokens == 0 {
            return bad("max_output_tokens must be at least 1".into());
        }
        if self.requests_per_minute == Some(0) {
            return bad("requests_per_minute must be at least 1".into());
        }
        match self.backend {
            Backend::Replay if self.replay_dir.is_none() => bad("replay backend needs replay_dir".into()),
            Backend::Mock if self.mock_reply.is_none() => bad("mock backend needs mock_reply".into()),
            _ => Ok(()),
        }
    }

    /// Identifies the model and decoding parameters behind a reply.
    pub fn fingerprint(&self) -> String {
        format!(
            "{}:{}:t={}:p={}:n={}",
            self.backend, self.model_name, self.temperature, self.top_p, self.max_output_tokens
        )
    }
}

#[derive(Debug, Error)]
pub enum ClientError {
    #[error("invalid model config: {0}")]
    InvalidConfig(String),
    #[error("environment variable {0} is not set")]
    MissingCredential(String),
    #[error("authentication rejected (HTTP {status})")]
    AuthError { status: u16 },
    #[error("rate limited after {attempts} attempts")]
    RateLimited { attempts: u32 },
    #[error("timed out after {attempts} attempts")]
    Timeout { attempts: u32 },
    #[error("HTTP {status} after {attempts} attempts")]
    Http { status: u16, attempts: u32 },
    #[error("transport error: {0}")]
    Transport(String),
    #[error("malformed provider response: {0}")]
    MalformedResponse(String),
    #[error("no recorded reply at {0}")]
    ReplayMiss(PathBuf),
    #[error("cannot record reply: {0}")]
    Record(#[from] std::io::Error),
}

/// An API key. Debug output is redacted.
pub(crate) struct Secret(pub(crate) String);

impl std::fmt::Debug for Secret {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("Secret(..)")
    }
}

#[derive(Debug)]
pub struct Client {
    config: ModelConfig,
    key: Option<Secret>,
    agent: Option<ureq::Agent>,
    replay: Option<ReplayStore>,
    recorder: Option<ReplayStore>,
    limiter: Option<TokenBucket>,
}

impl Client {
    /// Validates `config` and, for HTTP backends, reads the API key from the environment.
    pub fn new(config: ModelConfig) -> Result<Self, ClientError> {
        config.validate()?;
        let key = match config.backend.credential_var() {
            Some(default_var) => {
                let var = config.api_key_env.as_deref().unwrap_or(default_var);
                let key = std::env::var(var)
                    .ok()
                    .filter(|k| !k.is_empty())
                    .ok_or_else(|| ClientError::MissingCredential(var.to_owned()))?;
                Some(Secret(key))
            }
            None => None,
        };
        let agent = config.backend.is_http().then(|| {
            ureq::Agent::config_builder()
                .http_status_as_error(false)
                .timeout_global(Some(Duration::from_secs(config.timeout_secs)))
                .build()
                .into()
        });
        let replay = match config.backend {
            Backend::Replay => config.replay_dir.clone().map(ReplayStore::new),
            _ => None,
        };
        let limiter = config.requests_per_minute.map(TokenBucket::per_minute);
        Ok(Self {
            config,
            key,
            agent,
            replay,
            recorder: None,
            limiter,
        })
    }

    /// Saves every live reply under `dir` in the replay layout.
    pub fn recording_to(mut self, dir: impl Into<PathBuf>) -> Self {
        self.recorder = Some(ReplayStore::new(dir));
        self
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    /// Returns the raw reply for `sample` (0 for the first) of this prompt and image.
    pub fn send(&self, prompt: &PromptSpec, image: &ImageRef, sample: usize) -> Result<String, ClientError> {
        let c = &self.config;
        let reply = match c.backend {
            Backend::Mock => c.mock_reply.clone().unwrap_or_default(),
            Backend::Replay => {
                let store = self.replay.as_ref().expect("validated replay config");
                return store
                    .get(&c.model_name, &prompt.fingerprint, &image.content_hash, sample)
                    .ok_or_else(|| {
                        ClientError::ReplayMiss(store.path(&c.model_name, &prompt.fingerprint, &image.content_hash, sample))
                    });
            }
            _ => {
                let key = self.key.as_ref().expect("HTTP backends hold a key");
                let request = http::build_request(c, key, &prompt.text, image);
                http::post(self.agent.as_ref().expect("HTTP agent"), self.limiter.as_ref(), c, &request)?
            }
        };
        if let Some(store) = &self.recorder {
            let path = store.put(&c.model_name, &prompt.fingerprint, &image.content_hash, sample, &reply)?;
            log::info!("recorded reply to {}", path.display());
        }
        Ok(reply)
    }

    /// [`Client::send`] followed by [`parse_observation`], stamping the model fingerprint.
    pub fn observe(&self, prompt: &PromptSpec, image: &ImageRef, sample: usize) -> Result<Observation, ObserveError> {
        let raw = self.send(prompt, image, sample)?;
        let mut obs = parse_observation(&raw).map_err(|error| ObserveError::Parse { error, raw })?;
        obs.model_fingerprint = self.config.fingerprint();
        Ok(obs)
    }
}

#[derive(Debug, Error)]
pub enum ObserveError {
    #[error(transparent)]
    Send(#[from] ClientError),
    #[error("{error}")]
    Parse { error: ParseError, raw: String },
}

/// One-shot [`Client::send`] for the first sample.
pub fn send(prompt: &PromptSpec, image: &ImageRef, config: &ModelConfig) -> Result<String, ClientError> {
    Client::new(config.clone())?.send(prompt, image, 0)
}
