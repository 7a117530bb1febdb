use serde::{Deserialize, Serialize};

use super::schema::{ReasoningTrace, Verdict};
use crate::model::Artifact;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Signal {
    Pca,
    Ic,
    Ir,
    Union,
    Majority,
}

impl Signal {
    pub const ALL: [Signal; 5] = [Signal::Pca, Signal::Ic, Signal::Ir, Signal::Union, Signal::Majority];
    pub const BASE: [Signal; 3] = [Signal::Pca, Signal::Ic, Signal::Ir];

    pub fn as_str(self) -> &'static str {
        match self {
            Signal::Pca => "PCA",
            Signal::Ic => "IC",
            Signal::Ir => "IR",
            Signal::Union => "UNION",
            Signal::Majority => "MAJORITY",
        }
    }

    pub fn parse(s: &str) -> Option<Signal> {
        Signal::ALL.into_iter().find(|x| x.as_str().eq_ignore_ascii_case(s.trim()))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignalTexts {
    pub pca: String,
    pub ic: String,
    pub ir: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignalVector {
    pub pca_fires: bool,
    pub ic_fires: bool,
    pub ir_fires: bool,
    pub union_fires: bool,
    pub majority_fires: bool,
    pub signal_texts: SignalTexts,
}

impl SignalVector {
    /// Builds the aggregate fields from the three base signals.
    pub fn from_fires(pca: bool, ic: bool, ir: bool, texts: SignalTexts) -> SignalVector {
        let n = pca as u8 + ic as u8 + ir as u8;
        SignalVector {
            pca_fires: pca,
            ic_fires: ic,
            ir_fires: ir,
            union_fires: n >= 1,
            majority_fires: n >= 2,
            signal_texts: texts,
        }
    }

    pub fn fires(&self, s: Signal) -> bool {
        match s {
            Signal::Pca => self.pca_fires,
            Signal::Ic => self.ic_fires,
            Signal::Ir => self.ir_fires,
            Signal::Union => self.union_fires,
            Signal::Majority => self.majority_fires,
        }
    }

    /// Description text for a base signal; empty for aggregates.
    pub fn text(&self, s: Signal) -> &str {
        match s {
            Signal::Pca => &self.signal_texts.pca,
            Signal::Ic => &self.signal_texts.ic,
            Signal::Ir => &self.signal_texts.ir,
            Signal::Union | Signal::Majority => "",
        }
    }
}

fn involves_both(artifacts: &[Artifact]) -> bool {
    artifacts.contains(&Artifact::Javadoc) && artifacts.contains(&Artifact::Mut)
}

pub fn derive_signals(trace: &ReasoningTrace) -> SignalVector {
    let c = &trace.consistency;
    let pca = c.pairwise.javadoc_mut.verdict == Verdict::Contradictory;
    let ic_texts: Vec<&str> = c
        .identified_conflicts
        .iter()
        .filter(|k| involves_both(&k.artifacts))
        .map(|k| k.description.as_str())
        .collect();
    let ic = !ic_texts.is_empty();
    let ir = c.inconsistency.has_inconsistency && involves_both(&c.inconsistency.affected_artifacts);
    let texts = SignalTexts {
        pca: if pca { c.pairwise.javadoc_mut.rationale.clone() } else { String::new() },
        ic: ic_texts.join(" "),
        ir: if ir { c.inconsistency.description.clone() } else { String::new() },
    };
    SignalVector::from_fires(pca, ic, ir, texts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::schema::{Conflict, LabelBands};
    use crate::trace::validate::{fixtures, validate_trace};

    fn base_trace() -> ReasoningTrace {
        validate_trace(&fixtures::canonical().to_string(), &fixtures::key(), &LabelBands::default()).unwrap()
    }

    fn with(pca: bool, ic: bool, ir: bool) -> ReasoningTrace {
        let mut t = base_trace();
        let c = &mut t.consistency;
        c.pairwise.javadoc_mut.verdict = if pca { Verdict::Contradictory } else { Verdict::Consistent };
        c.identified_conflicts = if ic {
            vec![Conflict {
                artifacts: vec![Artifact::Mut, Artifact::Javadoc],
                description: "ic text".into(),
            }]
        } else {
            vec![Conflict {
                artifacts: vec![Artifact::Mut, Artifact::TestPrefix],
                description: "unrelated".into(),
            }]
        };
        c.inconsistency.has_inconsistency = true;
        c.inconsistency.affected_artifacts = if ir {
            vec![Artifact::Javadoc, Artifact::Mut]
        } else {
            vec![Artifact::Mut]
        };
        t
    }

    #[test]
    fn fixture_trace_fires_pca_and_ic_only() {
        let s = derive_signals(&base_trace());
        assert!(s.pca_fires && s.ic_fires && !s.ir_fires);
        assert!(s.union_fires && s.majority_fires);
        assert_eq!(s.signal_texts.ir, "");
        assert_eq!(s.signal_texts.ic, "the last element is skipped");
    }

    #[test]
    fn truth_table() {
        for bits in 0..8u8 {
            let (p, i, r) = (bits & 1 != 0, bits & 2 != 0, bits & 4 != 0);
            let s = derive_signals(&with(p, i, r));
            assert_eq!((s.pca_fires, s.ic_fires, s.ir_fires), (p, i, r));
            assert_eq!(s.union_fires, p || i || r);
            assert_eq!(s.majority_fires, (p && i) || (p && r) || (i && r));
            for sig in Signal::BASE {
                assert_eq!(s.fires(sig), !s.text(sig).is_empty(), "{sig:?} bits={bits}");
            }
        }
    }

    #[test]
    fn flag_without_both_artifacts_is_not_ir() {
        let mut t = with(false, false, false);
        t.consistency.inconsistency.affected_artifacts = vec![Artifact::Javadoc, Artifact::Signature];
        assert!(!derive_signals(&t).ir_fires);
        t.consistency.inconsistency.has_inconsistency = false;
        t.consistency.inconsistency.affected_artifacts = vec![Artifact::Javadoc, Artifact::Mut];
        assert!(!derive_signals(&t).ir_fires);
    }

    proptest::proptest! {
        #[test]
        fn aggregates_follow_base_signals(pca: bool, ic: bool, ir: bool) {
            let s = derive_signals(&with(pca, ic, ir));
            proptest::prop_assert_eq!([s.pca_fires, s.ic_fires, s.ir_fires], [pca, ic, ir]);
            proptest::prop_assert_eq!(s.union_fires, pca || ic || ir);
            proptest::prop_assert_eq!(s.majority_fires, (pca as u8 + ic as u8 + ir as u8) >= 2);
            proptest::prop_assert!(!s.majority_fires || s.union_fires);
            proptest::prop_assert_eq!(s.signal_texts.ic.is_empty(), !ic);
        }
    }
}
