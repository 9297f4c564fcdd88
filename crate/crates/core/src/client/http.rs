//! Provider request shapes and the retrying POST loop.

use std::time::Duration;

use serde_json::{json, Value};

use super::{Backend, ClientError, ModelConfig, Secret};
use crate::client::image::ImageRef;
use crate::client::limiter::TokenBucket;

pub(crate) struct Request {
    pub url: String,
    pub headers: Vec<(&'static str, String)>,
    pub body: Value,
}

const ANTHROPIC_VERSION: &str = "2023-06-01";

pub(crate) fn default_endpoint(backend: Backend, model: &str) -> Option<String> {
    match backend {
        Backend::OpenaiStyle => Some("https://api.openai.com/v1/chat/completions".into()),
        Backend::AnthropicStyle => Some("https://api.anthropic.com/v1/messages".into()),
        Backend::GoogleStyle => Some(format!(
            "https://generativelanguage.googleapis.com/v1beta/models/{model}:generateContent"
        )),
        Backend::Replay | Backend::Mock => None,
    }
}

pub(crate) fn build_request(config: &ModelConfig, key: &Secret, prompt: &str, image: &ImageRef) -> Request {
    let url = config
        .endpoint_url
        .clone()
        .or_else(|| default_endpoint(config.backend, &config.model_name))
        .unwrap_or_default();
    let mime = image.media_type.mime();
    let data = image.base64();
    let (headers, body) = match config.backend {
        Backend::OpenaiStyle => (
            vec![("Authorization", format!("Bearer {}", key.0))],
            json!({
                "model": config.model_name,
                "temperature": config.temperature,
                "top_p": config.top_p,
                "max_tokens": config.max_output_tokens,
                "messages": [{
                    "role": "user",
                    "content": [
                        {"type": "text", "text": prompt},
                        {"type": "image_url", "image_url": {"url": format!("data:{mime};base64,{data}")}},
                    ],
                }],
            }),
        ),
        Backend::AnthropicStyle => (
            vec![("x-api-key", key.0.clone()), ("anthropic-version", ANTHROPIC_VERSION.into())],
            json!({
                "model": config.model_name,
                "temperature": config.temperature,
                "top_p": config.top_p,
                "max_tokens": config.max_output_tokens,
                "messages": [{
                    "role": "user",
                    "content": [
                        {"type": "image", "source": {"type": "base64", "media_type": mime, "data": data}},
                        {"type": "text", "text": prompt},
                    ],
                }],
            }),
        ),
        Backend::GoogleStyle => (
            vec![("x-goog-api-key", key.0.clone())],
            json!({
                "contents": [{
                    "role": "user",
                    "parts": [
                        {"text": prompt},
                        {"inline_data": {"mime_type": mime, "data": data}},
                    ],
                }],
                "generationConfig": {
                    "temperature": config.temperature,
                    "topP": config.top_p,
                    "maxOutputTokens": config.max_output_tokens,
                },
            }),
        ),
        Backend::Replay | Backend::Mock => unreachable!("offline backends build no requests"),
    };
    Request { url, headers, body }
}

fn join_texts<'a>(parts: impl Iterator<Item = &'a Value>) -> Option<String> {
    let texts: Vec<&str> = parts.filter_map(|p| p.get("text").and_then(Value::as_str)).collect();
    (!texts.is_empty()).then(|| texts.concat())
}

/// The reply text from a provider response body.
pub(crate) fn extract_text(backend: Backend, body: &Value) -> Option<String> {
    match backend {
        Backend::OpenaiStyle => body
            .pointer("/choices/0/message/content")
            .and_then(Value::as_str)
            .map(str::to_owned),
        Backend::AnthropicStyle => join_texts(body.get("content")?.as_array()?.iter()),
        Backend::GoogleStyle => join_texts(body.pointer("/candidates/0/content/parts")?.as_array()?.iter()),
        Backend::Replay | Backend::Mock => None,
    }
}

fn backoff(config: &ModelConfig, retry: u32) -> Duration {
    Duration::from_millis(config.backoff_base_ms.saturating_mul(1 << retry.min(16)))
}

pub(crate) fn post(
    agent: &ureq::Agent,
    limiter: Option<&TokenBucket>,
    config: &ModelConfig,
    request: &Request,
) -> Result<String, ClientError> {
    let payload = request.body.to_string();
    let attempts = config.max_retries + 1;
    let mut last = ClientError::Transport("no attempt made".into());
    for attempt in 0..attempts {
        if attempt > 0 {
            let wait = backoff(config, attempt - 1);
            log::warn!(
                "{}: {last}; retry {attempt}/{} in {wait:?}",
                config.backend,
                config.max_retries
            );
            std::thread::sleep(wait);
        }
        if let Some(l) = limiter {
            l.acquire();
        }
        log::debug!("{}: POST {} (attempt {})", config.backend, request.url, attempt + 1);
        let mut call = agent.post(&request.url).header("content-type", "application/json");
        for (name, value) in &request.headers {
            call = call.header(*name, value);
        }
        let response = match call.send(payload.as_str()) {
            Ok(r) => r,
            Err(ureq::Error::Timeout(_)) => {
                last = ClientError::Timeout { attempts: attempt + 1 };
                continue;
            }
            Err(e) => {
                last = ClientError::Transport(e.to_string());
                continue;
            }
        };
        let status = response.status().as_u16();
        let text = response.into_body().read_to_string().unwrap_or_default();
        match status {
            200..=299 => {
                let body: Value = serde_json::from_str(&text).map_err(|e| ClientError::MalformedResponse(e.to_string()))?;
                return extract_text(config.backend, &body)
                    .ok_or_else(|| ClientError::MalformedResponse("no reply text in response body".into()));
            }
            401 | 403 => return Err(ClientError::AuthError { status }),
            429 => last = ClientError::RateLimited { attempts: attempt + 1 },
            500..=599 => {
                last = ClientError::Http {
                    status,
                    attempts: attempt + 1,
                }
            }
            _ => {
                return Err(ClientError::Http {
                    status,
                    attempts: attempt + 1,
                })
            }
        }
    }
    Err(last)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extracts_each_provider_shape() {
        let openai = json!({"choices": [{"message": {"content": "hi"}}]});
        assert_eq!(extract_text(Backend::OpenaiStyle, &openai).as_deref(), Some("hi"));
        let anthropic = json!({"content": [{"type": "text", "text": "a"}, {"type": "text", "text": "b"}]});
        assert_eq!(extract_text(Backend::AnthropicStyle, &anthropic).as_deref(), Some("ab"));
        let google = json!({"candidates": [{"content": {"parts": [{"text": "g"}]}}]});
        assert_eq!(extract_text(Backend::GoogleStyle, &google).as_deref(), Some("g"));
        assert_eq!(extract_text(Backend::GoogleStyle, &json!({})), None);
    }

    #[test]
    fn request_shapes_inline_the_image() {
        let image = ImageRef::from_bytes(vec![0xff, 0xd8, 0xff, 0x00]).unwrap();
        let key = Secret("k".into());
        for backend in [Backend::OpenaiStyle, Backend::AnthropicStyle, Backend::GoogleStyle] {
            let config = ModelConfig::new(backend, "m");
            let r = build_request(&config, &key, "prompt", &image);
            let body = r.body.to_string();
            assert!(body.contains(&image.base64()), "{backend}");
            assert!(body.contains("image/jpeg"), "{backend}");
            assert!(body.contains("0.7"), "{backend}");
            assert!(!body.contains("\"k\""), "{backend}");
        }
        let r = build_request(&ModelConfig::new(Backend::GoogleStyle, "gemini-x"), &key, "p", &image);
        assert!(r.url.ends_with("/models/gemini-x:generateContent"));
    }

    #[test]
    fn backoff_doubles() {
        let mut config = ModelConfig::new(Backend::OpenaiStyle, "m");
        config.backoff_base_ms = 100;
        assert_eq!(backoff(&config, 0), Duration::from_millis(100));
        assert_eq!(backoff(&config, 2), Duration::from_millis(400));
    }
}
