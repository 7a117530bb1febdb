//! Kendall's τ_b between the fault label vector and the reliability ranks.

use serde::{Deserialize, Serialize};

use crate::model::Artifact;
use crate::trace::SourcePrioritization;

/// Sum of t(t−1)/2 over runs of equal adjacent values.
fn tied_pairs<T: PartialEq>(sorted: &[T]) -> u64 {
    let mut total = 0;
    let mut run = 1u64;
    for i in 1..=sorted.len() {
        if i < sorted.len() && sorted[i] == sorted[i - 1] {
            run += 1;
        } else {
            total += run * (run - 1) / 2;
            run = 1;
        }
    }
    total
}

/// Merge sort that returns the number of inversions.
fn sort_counting_swaps(v: &mut [f64]) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut swaps = sort_counting_swaps(&mut v[..mid]) + sort_counting_swaps(&mut v[mid..]);
    let mut merged = Vec::with_capacity(n);
    let (mut i, mut j) = (0, mid);
    while i < mid && j < n {
        if v[j] < v[i] {
            merged.push(v[j]);
            swaps += (mid - i) as u64;
            j += 1;
        } else {
            merged.push(v[i]);
            i += 1;
        }
    }
    merged.extend_from_slice(&v[i..mid]);
    merged.extend_from_slice(&v[j..n]);
    v.copy_from_slice(&merged);
    swaps
}

/// τ_b with tie corrections on both vectors, in O(n log n). `None` when
/// either vector is constant.
pub fn kendall_tau_b(x: &[f64], y: &[f64]) -> Option<f64> {
    assert_eq!(x.len(), y.len());
    let n = x.len() as u64;
    let n0 = n * n.saturating_sub(1) / 2;
    let mut pairs: Vec<(f64, f64)> = x.iter().copied().zip(y.iter().copied()).collect();
    pairs.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let xs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let n1 = tied_pairs(&xs);
    let n3 = tied_pairs(&pairs);
    let mut ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let swaps = sort_counting_swaps(&mut ys);
    let n2 = tied_pairs(&ys);
    let denom = ((n0 - n1) as f64 * (n0 - n2) as f64).sqrt();
    if denom == 0.0 {
        return None;
    }
    let num = n0 as f64 - n1 as f64 - n2 as f64 + n3 as f64 - 2.0 * swaps as f64;
    Some(num / denom)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ConcordanceSkip {
    /// Both JAVADOC and MUT are faulty.
    Both,
    NoFault,
}

/// τ_b between the 0/1 fault label per source and its rank number, so a
/// faulty source ranked least reliable gives a positive value.
pub fn rank_concordance(prioritization: &SourcePrioritization, faulty: &[Artifact]) -> Result<f64, ConcordanceSkip> {
    match faulty.len() {
        0 => return Err(ConcordanceSkip::NoFault),
        1 => {}
        _ => return Err(ConcordanceSkip::Both),
    }
    let labels: Vec<f64> = Artifact::ALL.iter().map(|a| f64::from(faulty.contains(a) as u8)).collect();
    let ranks: Vec<f64> = Artifact::ALL.iter().map(|&a| f64::from(prioritization.rank_of(a))).collect();
    kendall_tau_b(&labels, &ranks).ok_or(ConcordanceSkip::NoFault)
}
