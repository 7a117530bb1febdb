pub mod auditor;
pub mod config;
pub mod corpus;
pub mod endpoint;
pub mod harness;
pub mod jsonl;
pub mod metrics;
pub mod model;
pub mod perturb;
pub mod stages;
pub mod trace;
