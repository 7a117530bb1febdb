//! Blind elicitation over the (model × variant × sample) matrix.

pub mod prompt;
pub mod run;
pub mod store;

pub use prompt::{render_blind_prompt, scan_leaks, BlindPrompt, LeakAbort, SYSTEM_PROMPT};
pub use run::{run_matrix, EndpointProfile, RunError, RunOptions, RunSummary};
pub use store::{FailureCause, FailureRecord, RunKey, StoreError, StoredTrace, TraceStore};
