use serde::{Deserialize, Serialize};

use super::{mean_sd, MetricError};
use crate::metrics::EvaluationRecord;
use crate::trace::Signal;

/// Fraction of `records` on which `signal` fires.
pub fn detection_rate(records: &[&EvaluationRecord], signal: Signal) -> Result<f64, MetricError> {
    if records.is_empty() {
        return Err(MetricError::EmptyGroup(format!("no records for {}", signal.as_str())));
    }
    Ok(records.iter().filter(|r| r.signals.fires(signal)).count() as f64 / records.len() as f64)
}

/// Rate difference in percentage points.
pub fn net_gain(perturbed_rate: f64, base_rate: f64) -> f64 {
    (perturbed_rate - base_rate) * 100.0
}

/// Means of a value split by a boolean outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionGap {
    pub detected_mean: Option<f64>,
    pub missed_mean: Option<f64>,
    /// Undefined when either side is empty.
    pub gap: Option<f64>,
    pub n_detected: usize,
    pub n_missed: usize,
}

pub fn partition_gap(items: impl IntoIterator<Item = (bool, f64)>) -> PartitionGap {
    let (mut hit, mut miss) = (Vec::new(), Vec::new());
    for (detected, x) in items {
        if detected { hit.push(x) } else { miss.push(x) }
    }
    let detected_mean = mean_sd(&hit).map(|m| m.0);
    let missed_mean = mean_sd(&miss).map(|m| m.0);
    PartitionGap {
        gap: detected_mean.zip(missed_mean).map(|(d, m)| d - m),
        detected_mean,
        missed_mean,
        n_detected: hit.len(),
        n_missed: miss.len(),
    }
}

/// Confidence separation between detected and missed perturbations.
/// Only mutation-family records take part.
pub fn calibration_gap(records: &[&EvaluationRecord], signal: Signal) -> PartitionGap {
    partition_gap(
        records
            .iter()
            .filter(|r| r.should_fire())
            .map(|r| (r.signals.fires(signal), r.overall_confidence)),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::record::tests::synthetic;
    use crate::model::Variant;
    use proptest::prelude::*;

    #[test]
    fn rate_examples() {
        let all: Vec<_> = (0..4).map(|i| synthetic("m", Variant::DocBug, &i.to_string(), 0.5, [true; 3])).collect();
        let none: Vec<_> = (0..4).map(|i| synthetic("m", Variant::DocBug, &i.to_string(), 0.5, [false; 3])).collect();
        let r = |v: &[EvaluationRecord], s| detection_rate(&v.iter().collect::<Vec<_>>(), s).unwrap();
        for s in Signal::ALL {
            assert_eq!(r(&all, s), 1.0);
            assert_eq!(r(&none, s), 0.0);
        }
        assert!(detection_rate(&[], Signal::Ir).is_err());
    }

    #[test]
    fn net_gain_examples() {
        assert!((net_gain(0.875, 0.11) - 76.5).abs() < 1e-9);
        assert_eq!(net_gain(0.4, 0.4), 0.0);
        assert!((net_gain(0.0, 0.39) + 39.0).abs() < 1e-9);
    }

    #[test]
    fn calibration_examples() {
        let mut v = Vec::new();
        for i in 0..6 {
            let mut r = synthetic("m", Variant::MutBug, &i.to_string(), 0.5, [i < 3; 3]);
            r.overall_confidence = if i < 3 { 0.9 } else { 0.17 };
            v.push(r);
        }
        // clean records never enter the partition
        v.push(synthetic("m", Variant::Base, "b", 0.5, [true; 3]));
        let g = calibration_gap(&v.iter().collect::<Vec<_>>(), Signal::Ir);
        assert!((g.gap.unwrap() - 0.73).abs() < 1e-12);
        assert_eq!((g.n_detected, g.n_missed), (3, 3));
        let flat = partition_gap([(true, 0.4), (false, 0.4)]);
        assert_eq!(flat.gap, Some(0.0));
        let one_sided = partition_gap([(true, 0.4)]);
        assert_eq!((one_sided.gap, one_sided.n_detected, one_sided.n_missed), (None, 1, 0));
    }

    proptest! {
        #[test]
        fn aggregate_rates_bound(fires in prop::collection::vec(prop::array::uniform3(any::<bool>()), 1..40)) {
            let v: Vec<_> = fires.iter().enumerate().map(|(i, f)| synthetic("m", Variant::DocBug, &i.to_string(), 0.5, *f)).collect();
            let refs: Vec<_> = v.iter().collect();
            let rate = |s| detection_rate(&refs, s).unwrap();
            for s in Signal::ALL {
                prop_assert!((0.0..=1.0).contains(&rate(s)));
            }
            prop_assert!(rate(Signal::Ir) <= rate(Signal::Union));
            prop_assert!(rate(Signal::Majority) <= rate(Signal::Union));
        }
    }
}
