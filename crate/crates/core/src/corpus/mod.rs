//! Candidate ingestion and base-sample curation.

pub mod curate;
pub mod extract;
pub mod javadoc;
pub mod lex;
pub mod measure;
pub mod signature;

use std::path::Path;

pub use curate::{curate, CurationRule, CurationVerdict, Measured};
pub use javadoc::{check_javadoc_rules, DocViolation};
pub use measure::{classify_triviality, count_executable_lines, Triviality};

use crate::jsonl;
use crate::model::ArtifactBundle;

/// Loads candidates from a source directory or a record-per-line archive.
pub fn load_candidates(path: &Path) -> Result<Vec<ArtifactBundle>, jsonl::JsonlError> {
    if path.is_dir() {
        extract::extract_candidates(path).map_err(|e| jsonl::JsonlError::Io {
            path: path.to_path_buf(),
            source: e,
        })
    } else {
        jsonl::read_all(path)
    }
}
