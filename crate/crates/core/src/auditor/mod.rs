//! Offline reference auditor: a deterministic stand-in for model endpoints.
//!
//! The auditor sees provenance, which real endpoints never do. It answers
//! trace prompts according to its mode and mutation prompts with canned,
//! rule-based edits.

pub mod endpoint;
pub mod mutator;
pub mod oracle;

use serde::{Deserialize, Serialize};

use crate::model::Severity;

pub use endpoint::AuditorEndpoint;
pub use mutator::canned_mutation;
pub use oracle::oracle_trace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MalformedKind {
    TagPrefixed,
    Truncated,
    BadEscape,
}

impl MalformedKind {
    pub const ALL: [MalformedKind; 3] = [MalformedKind::TagPrefixed, MalformedKind::Truncated, MalformedKind::BadEscape];
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum AuditorMode {
    Oracle,
    Random { p_flag: f64, seed: u64 },
    Silent,
    Malformed { kind: MalformedKind },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScorePolicy {
    pub base: f64,
    pub subtle_penalty: f64,
    pub normal_penalty: f64,
    pub heavy_penalty: f64,
    /// Javadoc-score penalty for the documentation-removal variants.
    pub removal_penalty: f64,
}

impl Default for ScorePolicy {
    fn default() -> Self {
        ScorePolicy {
            base: 0.85,
            subtle_penalty: 0.10,
            normal_penalty: 0.20,
            heavy_penalty: 0.35,
            removal_penalty: 0.30,
        }
    }
}

impl ScorePolicy {
    pub fn penalty(&self, severity: Severity) -> f64 {
        match severity {
            Severity::Subtle => self.subtle_penalty,
            Severity::Normal => self.normal_penalty,
            Severity::Heavy => self.heavy_penalty,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuditorProfile {
    pub mode: AuditorMode,
    pub policy: ScorePolicy,
    pub delay_ms: u64,
}

impl AuditorProfile {
    pub fn new(mode: AuditorMode) -> AuditorProfile {
        AuditorProfile {
            mode,
            policy: ScorePolicy::default(),
            delay_ms: 0,
        }
    }

    /// Parses `auditor:<mode>[?key=value&…]`.
    ///
    /// Modes: `oracle`, `silent`, `random` (`p`, `seed`), `malformed`
    /// (`kind` = tag-prefixed | truncated | bad-escape). Every mode accepts
    /// `delay_ms`.
    pub fn from_locator(locator: &str) -> Result<AuditorProfile, String> {
        let rest = locator
            .strip_prefix("auditor:")
            .ok_or_else(|| format!("`{locator}` is not an auditor locator"))?;
        let (mode, query) = rest.split_once('?').unwrap_or((rest, ""));
        let mut params = std::collections::BTreeMap::new();
        for pair in query.split('&').filter(|s| !s.is_empty()) {
            let (k, v) = pair.split_once('=').ok_or_else(|| format!("bad parameter `{pair}`"))?;
            params.insert(k.to_string(), v.to_string());
        }
        let num = |k: &str, default: f64| -> Result<f64, String> {
            params
                .get(k)
                .map_or(Ok(default), |v| v.parse().map_err(|_| format!("bad value for `{k}`")))
        };
        let mode = match mode {
            "oracle" | "mutator" => AuditorMode::Oracle,
            "silent" => AuditorMode::Silent,
            "random" => {
                let p_flag = num("p", 0.5)?;
                if !(0.0..=1.0).contains(&p_flag) {
                    return Err(format!("p={p_flag} is outside [0, 1]"));
                }
                AuditorMode::Random {
                    p_flag,
                    seed: num("seed", 0.0)? as u64,
                }
            }
            "malformed" => {
                let kind = match params.get("kind").map(String::as_str) {
                    Some("tag-prefixed") | None => MalformedKind::TagPrefixed,
                    Some("truncated") => MalformedKind::Truncated,
                    Some("bad-escape") => MalformedKind::BadEscape,
                    Some(other) => return Err(format!("unknown malformed kind `{other}`")),
                };
                AuditorMode::Malformed { kind }
            }
            other => return Err(format!("unknown auditor mode `{other}`")),
        };
        let mut profile = AuditorProfile::new(mode);
        profile.delay_ms = num("delay_ms", 0.0)? as u64;
        Ok(profile)
    }
}
