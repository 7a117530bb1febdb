//! The structured reasoning trace: schema, repair, validation and conflict
//! signals.

pub mod repair;
pub mod schema;
pub mod signals;
pub mod validate;

pub use repair::repair_raw_output;
pub use schema::*;
pub use signals::{derive_signals, Signal, SignalTexts, SignalVector};
pub use validate::{validate_trace, TraceKey};
