//! Domain vocabulary shared by every stage: artifacts, variants, severity
//! tiers, contradiction strategies, fault categories and the bundle itself.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// One of the four artifacts in a bundle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Artifact {
    Javadoc,
    Signature,
    Mut,
    TestPrefix,
}

impl Artifact {
    pub const ALL: [Artifact; 4] = [
        Artifact::Javadoc,
        Artifact::Signature,
        Artifact::Mut,
        Artifact::TestPrefix,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Artifact::Javadoc => "JAVADOC",
            Artifact::Signature => "SIGNATURE",
            Artifact::Mut => "MUT",
            Artifact::TestPrefix => "TEST_PREFIX",
        }
    }

    /// Lower-case key used in the trace wire format.
    pub fn key(self) -> &'static str {
        match self {
            Artifact::Javadoc => "javadoc",
            Artifact::Signature => "signature",
            Artifact::Mut => "mut",
            Artifact::TestPrefix => "test_prefix",
        }
    }

    /// Case-insensitive lookup with the alias table models tend to use.
    pub fn from_alias(name: &str) -> Option<Artifact> {
        let norm: String = name
            .trim()
            .chars()
            .filter(|c| !matches!(c, '_' | '-' | ' ' | '@'))
            .collect::<String>()
            .to_ascii_lowercase();
        match norm.as_str() {
            "javadoc" | "docstring" | "doc" | "docs" | "documentation" | "comment" => {
                Some(Artifact::Javadoc)
            }
            "signature" | "sig" | "methodsignature" | "declaration" => Some(Artifact::Signature),
            "mut" | "method" | "methodundertest" | "implementation" | "code" | "body"
            | "methodbody" => Some(Artifact::Mut),
            "testprefix" | "test" | "prefix" | "testsetup" | "testcode" => {
                Some(Artifact::TestPrefix)
            }
            _ => None,
        }
    }
}

impl fmt::Display for Artifact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Dataset variant. `Base` is the clean bundle; the rest are perturbations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Variant {
    Base,
    DocDescRemoved,
    DocReturnRemoved,
    DocDescReturnRemoved,
    DocBug,
    MutBug,
    Contradiction,
}

impl Variant {
    pub const ALL: [Variant; 7] = [
        Variant::Base,
        Variant::DocDescRemoved,
        Variant::DocReturnRemoved,
        Variant::DocDescReturnRemoved,
        Variant::DocBug,
        Variant::MutBug,
        Variant::Contradiction,
    ];

    pub const MUTATION_FAMILIES: [Variant; 3] =
        [Variant::DocBug, Variant::MutBug, Variant::Contradiction];

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Base => "BASE",
            Variant::DocDescRemoved => "DOC_DESC_REMOVED",
            Variant::DocReturnRemoved => "DOC_RETURN_REMOVED",
            Variant::DocDescReturnRemoved => "DOC_DESC_RETURN_REMOVED",
            Variant::DocBug => "DOC_BUG",
            Variant::MutBug => "MUT_BUG",
            Variant::Contradiction => "CONTRADICTION",
        }
    }

    pub fn is_mutation(self) -> bool {
        matches!(
            self,
            Variant::DocBug | Variant::MutBug | Variant::Contradiction
        )
    }

    pub fn is_removal(self) -> bool {
        matches!(
            self,
            Variant::DocDescRemoved | Variant::DocReturnRemoved | Variant::DocDescReturnRemoved
        )
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Variant::ALL
            .into_iter()
            .find(|v| v.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown variant `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Severity {
    Heavy,
    Normal,
    Subtle,
}

impl Severity {
    pub const ALL: [Severity; 3] = [Severity::Heavy, Severity::Normal, Severity::Subtle];

    pub fn as_str(self) -> &'static str {
        match self {
            Severity::Heavy => "HEAVY",
            Severity::Normal => "NORMAL",
            Severity::Subtle => "SUBTLE",
        }
    }
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which side a contradiction mutates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Strategy {
    MutOnly,
    DocstringOnly,
    Both,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::MutOnly, Strategy::DocstringOnly, Strategy::Both];

    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::MutOnly => "MUT_ONLY",
            Strategy::DocstringOnly => "DOCSTRING_ONLY",
            Strategy::Both => "BOTH",
        }
    }

    pub fn mutates(self, artifact: Artifact) -> bool {
        match self {
            Strategy::MutOnly => artifact == Artifact::Mut,
            Strategy::DocstringOnly => artifact == Artifact::Javadoc,
            Strategy::Both => matches!(artifact, Artifact::Mut | Artifact::Javadoc),
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FaultCategory {
    // implementation faults
    Logic,
    NullCheck,
    Boundary,
    ApiMisuse,
    // documentation faults
    WrongBehavior,
    WrongReturn,
    WrongParams,
    MissingInfo,
}

impl FaultCategory {
    pub const ALL: [FaultCategory; 8] = [
        FaultCategory::Logic,
        FaultCategory::NullCheck,
        FaultCategory::Boundary,
        FaultCategory::ApiMisuse,
        FaultCategory::WrongBehavior,
        FaultCategory::WrongReturn,
        FaultCategory::WrongParams,
        FaultCategory::MissingInfo,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FaultCategory::Logic => "LOGIC",
            FaultCategory::NullCheck => "NULL_CHECK",
            FaultCategory::Boundary => "BOUNDARY",
            FaultCategory::ApiMisuse => "API_MISUSE",
            FaultCategory::WrongBehavior => "WRONG_BEHAVIOR",
            FaultCategory::WrongReturn => "WRONG_RETURN",
            FaultCategory::WrongParams => "WRONG_PARAMS",
            FaultCategory::MissingInfo => "MISSING_INFO",
        }
    }

    pub fn is_code_fault(self) -> bool {
        matches!(
            self,
            FaultCategory::Logic
                | FaultCategory::NullCheck
                | FaultCategory::Boundary
                | FaultCategory::ApiMisuse
        )
    }
}

impl fmt::Display for FaultCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FaultCategory {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().replace(['-', ' '], "_");
        FaultCategory::ALL
            .into_iter()
            .find(|c| c.as_str().eq_ignore_ascii_case(&norm))
            .ok_or_else(|| format!("unknown fault category `{s}`"))
    }
}

/// Where a candidate bundle came from.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Origin {
    pub path: String,
    pub method: String,
    #[serde(default)]
    pub offset: usize,
}

/// One sample: the method under test, its declaration, its documentation
/// and the test prefix exercising it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArtifactBundle {
    pub sample_id: String,
    pub mut_body: String,
    pub signature: String,
    pub javadoc: String,
    pub test_prefix: String,
    #[serde(default)]
    pub reference_assertion: Option<String>,
    pub origin: Origin,
}

impl ArtifactBundle {
    pub fn artifact_text(&self, artifact: Artifact) -> &str {
        match artifact {
            Artifact::Javadoc => &self.javadoc,
            Artifact::Signature => &self.signature,
            Artifact::Mut => &self.mut_body,
            Artifact::TestPrefix => &self.test_prefix,
        }
    }
}
