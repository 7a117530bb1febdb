//! Chat-completion wire contract shared by the mutation and elicitation
//! stages.

use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub model_id: String,
    pub system: String,
    pub user: String,
    pub temperature: f64,
    pub max_tokens: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EndpointError {
    /// Rate limits, 5xx, timeouts, dropped connections.
    #[error("transient: {0}")]
    Transient(String),
    /// Server-side content filtering; never retried.
    #[error("permanent refusal: {0}")]
    PermanentRefusal(String),
    #[error("fatal: {0}")]
    Fatal(String),
}

pub trait ChatEndpoint: Send + Sync {
    fn complete(&self, request: &ChatRequest) -> Result<String, EndpointError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Backoff {
    pub initial_s: f64,
    pub multiplier: f64,
    pub cap_s: f64,
}

impl Default for Backoff {
    fn default() -> Self {
        Backoff {
            initial_s: 30.0,
            multiplier: 2.0,
            cap_s: 300.0,
        }
    }
}

impl Backoff {
    pub const NONE: Backoff = Backoff {
        initial_s: 0.0,
        multiplier: 1.0,
        cap_s: 0.0,
    };

    /// Delay before retry number `attempt` (0-based).
    pub fn delay(&self, attempt: u32) -> Duration {
        let s = self.initial_s * self.multiplier.powi(attempt as i32);
        Duration::from_secs_f64(s.min(self.cap_s).max(0.0))
    }
}

/// Calls `endpoint`, retrying transient failures up to `retry_limit` times.
pub fn complete_with_retry(
    endpoint: &dyn ChatEndpoint,
    request: &ChatRequest,
    retry_limit: u32,
    backoff: &Backoff,
) -> Result<String, EndpointError> {
    let mut attempt = 0;
    loop {
        match endpoint.complete(request) {
            Err(EndpointError::Transient(_)) if attempt < retry_limit => {
                thread::sleep(backoff.delay(attempt));
                attempt += 1;
            }
            other => return other,
        }
    }
}

const REFUSAL_MARKERS: &[&str] = &[
    "content_filter",
    "content filter",
    "content management policy",
    "safety system",
    "responsible ai",
];

fn looks_like_refusal(text: &str) -> bool {
    let lower = text.to_ascii_lowercase();
    REFUSAL_MARKERS.iter().any(|m| lower.contains(m))
}

/// OpenAI-compatible `POST {base}/chat/completions` client.
pub struct HttpEndpoint {
    url: String,
    api_key: Option<String>,
    agent: ureq::Agent,
}

impl HttpEndpoint {
    pub fn new(base_url: &str, api_key: Option<String>, timeout: Duration) -> HttpEndpoint {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .into();
        let base = base_url.trim_end_matches('/');
        let url = if base.ends_with("/chat/completions") {
            base.to_string()
        } else {
            format!("{base}/chat/completions")
        };
        HttpEndpoint { url, api_key, agent }
    }
}

pub fn classify_transport(err: ureq::Error) -> EndpointError {
    match err {
        ureq::Error::Timeout(_)
        | ureq::Error::Io(_)
        | ureq::Error::ConnectionFailed
        | ureq::Error::HostNotFound
        | ureq::Error::Protocol(_) => EndpointError::Transient(err.to_string()),
        other => EndpointError::Fatal(other.to_string()),
    }
}

pub fn classify_status(status: u16, body: &str) -> Option<EndpointError> {
    match status {
        200..=299 => None,
        408 | 409 | 425 | 429 | 500..=599 => Some(EndpointError::Transient(format!("HTTP {status}"))),
        _ if looks_like_refusal(body) => Some(EndpointError::PermanentRefusal(format!("HTTP {status}"))),
        _ => Some(EndpointError::Fatal(format!("HTTP {status}: {}", truncate(body, 200)))),
    }
}

fn truncate(s: &str, n: usize) -> &str {
    match s.char_indices().nth(n) {
        Some((i, _)) => &s[..i],
        None => s,
    }
}

/// Pulls the completion text out of a chat-completions response body.
pub fn parse_chat_response(body: &Value) -> Result<String, EndpointError> {
    let choice = &body["choices"][0];
    if choice["finish_reason"].as_str() == Some("content_filter") {
        return Err(EndpointError::PermanentRefusal("finish_reason=content_filter".into()));
    }
    match choice["message"]["content"].as_str() {
        Some(text) => Ok(text.to_string()),
        None => Err(EndpointError::Transient("response carries no completion text".into())),
    }
}

impl ChatEndpoint for HttpEndpoint {
    fn complete(&self, request: &ChatRequest) -> Result<String, EndpointError> {
        let payload = json!({
            "model": request.model_id,
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
            "messages": [
                {"role": "system", "content": request.system},
                {"role": "user", "content": request.user},
            ],
        });
        let mut req = self.agent.post(&self.url);
        if let Some(key) = &self.api_key {
            req = req.header("Authorization", format!("Bearer {key}"));
        }
        let mut resp = req.send_json(&payload).map_err(classify_transport)?;
        let status = resp.status().as_u16();
        let text = resp
            .body_mut()
            .read_to_string()
            .map_err(classify_transport)?;
        if let Some(err) = classify_status(status, &text) {
            return Err(err);
        }
        let body: Value = serde_json::from_str(&text)
            .map_err(|e| EndpointError::Transient(format!("undecodable response: {e}")))?;
        parse_chat_response(&body)
    }
}


#[cfg(test)]
mod tests {
    use super::*;

    fn req() -> ChatRequest {
        ChatRequest {
            model_id: "m".into(),
            system: "sys".into(),
            user: "usr".into(),
            temperature: 0.0,
            max_tokens: 64,
        }
    }

    fn ok_body(text: &str) -> String {
        json!({"choices": [{"message": {"content": text}, "finish_reason": "stop"}]}).to_string()
    }

    #[test]
    fn backoff_schedule_doubles_and_caps() {
        let b = Backoff::default();
        let secs: Vec<f64> = (0..6).map(|a| b.delay(a).as_secs_f64()).collect();
        assert_eq!(secs, vec![30.0, 60.0, 120.0, 240.0, 300.0, 300.0]);
    }

    #[test]
    fn http_round_trip_and_transient_retry() {
        let (addr, h) = mock::serve(vec![
            (429, "{}".into()),
            (503, "{}".into()),
            (200, ok_body("{\"a\":1}")),
        ]);
        let ep = HttpEndpoint::new(&addr, Some("k".into()), Duration::from_secs(5));
        let out = complete_with_retry(&ep, &req(), 5, &Backoff::NONE).unwrap();
        assert_eq!(out, "{\"a\":1}");
        let seen = h.join().unwrap();
        assert_eq!(seen.len(), 3);
        let sent: Value = serde_json::from_str(&seen[2]).unwrap();
        assert_eq!(sent["temperature"], 0.0);
        assert_eq!(sent["messages"][0]["content"], "sys");
        assert_eq!(sent["messages"][1]["content"], "usr");
    }

    #[test]
    fn retry_limit_is_respected() {
        let (addr, h) = mock::serve(vec![(500, "{}".into()), (500, "{}".into())]);
        let ep = HttpEndpoint::new(&addr, None, Duration::from_secs(5));
        let err = complete_with_retry(&ep, &req(), 1, &Backoff::NONE).unwrap_err();
        assert!(matches!(err, EndpointError::Transient(_)));
        assert_eq!(h.join().unwrap().len(), 2);
    }

    #[test]
    fn content_filter_is_permanent() {
        let body = json!({"choices": [{"message": {"content": null}, "finish_reason": "content_filter"}]});
        assert!(matches!(parse_chat_response(&body), Err(EndpointError::PermanentRefusal(_))));
        assert!(matches!(
            classify_status(400, "{\"error\":{\"code\":\"content_filter\"}}"),
            Some(EndpointError::PermanentRefusal(_))
        ));
        assert!(matches!(classify_status(401, "bad key"), Some(EndpointError::Fatal(_))));
    }
}
