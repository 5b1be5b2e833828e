//! Euclidean distance reports, k-nearest-neighbor voting and
//! threshold-based impostor rejection.

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Distances from one probe to every exemplar, plus the summary statistics
/// computed over that column of the distance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceReport {
    /// Probe-to-exemplar distances, exemplar order matching the training set.
    pub distances: Vec<f64>,
    pub column_sum: f64,
    /// Sum of the square roots of the distances.
    pub sqrt_sum: f64,
    pub mean: f64,
    pub min: f64,
    /// 0-based index attaining `min`; lowest index on ties.
    pub min_index: usize,
}

/// Outcome of classifying one probe.
#[derive(Debug, Clone, PartialEq)]
pub enum Decision {
    Identified(usize),
    Rejected,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub decision: Decision,
    /// Per-class neighbor counts among the k nearest, sorted by label.
    pub votes: Vec<(usize, usize)>,
    pub min_distance: f64,
    pub threshold_used: Option<f64>,
    /// True when the plurality vote needed a tie-break.
    pub tie_broken: bool,
}

/// Euclidean norm of x − y.
pub fn euclidean_distance(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            context: "euclidean_distance",
            expected: x.len(),
            actual: y.len(),
        });
    }
    Ok(x.iter()
        .zip(y)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt())
}

/// Distances from `probe` to every column of `exemplars`, with statistics.
pub fn distance_report(probe: &[f64], exemplars: &Matrix) -> Result<DistanceReport> {
    if probe.len() != exemplars.rows() {
        return Err(Error::LengthMismatch {
            context: "distance_report probe",
            expected: exemplars.rows(),
            actual: probe.len(),
        });
    }
    let p = exemplars.cols();
    let mut distances = Vec::with_capacity(p);
    for j in 0..p {
        distances.push(euclidean_distance(probe, exemplars.column(j))?);
    }
    let column_sum: f64 = distances.iter().sum();
    let sqrt_sum: f64 = distances.iter().map(|d| d.sqrt()).sum();
    let mean = column_sum / p as f64;
    let mut min_index = 0;
    for (i, &d) in distances.iter().enumerate() {
        if d < distances[min_index] {
            min_index = i;
        }
    }
    let min = distances[min_index];
    Ok(DistanceReport {
        distances,
        column_sum,
        sqrt_sum,
        mean,
        min,
        min_index,
    })
}

/// k-nearest-neighbor vote with deterministic tie-breaking and optional
/// rejection threshold on the minimum distance.
///
/// Ties at the k-th boundary go to the lowest exemplar index. Vote ties go
/// to the class owning the nearest neighbor among the tied classes, then to
/// the lowest label (labels are assigned in class-name order).
pub fn classify(
    probe: &[f64],
    exemplars: &Matrix,
    labels: &[usize],
    k: usize,
    threshold: Option<f64>,
) -> Result<Verdict> {
    let p = exemplars.cols();
    if labels.len() != p {
        return Err(Error::LengthMismatch {
            context: "classify labels",
            expected: p,
            actual: labels.len(),
        });
    }
    if k < 1 || k > p {
        return Err(Error::KOutOfRange { k, max: p });
    }
    let report = distance_report(probe, exemplars)?;

    let mut order: Vec<usize> = (0..p).collect();
    // stable sort keeps lowest index first among equal distances
    order.sort_by(|&a, &b| {
        report.distances[a]
            .partial_cmp(&report.distances[b])
            .expect("distances are finite")
    });
    let neighbors = &order[..k];

    let class_count = labels.iter().copied().max().unwrap_or(0) + 1;
    let mut counts = vec![0usize; class_count];
    for &i in neighbors {
        counts[labels[i]] += 1;
    }
    let top = *counts.iter().max().expect("k >= 1");
    let tied: Vec<usize> = (0..class_count).filter(|&c| counts[c] == top).collect();

    let (winner, tie_broken) = if tied.len() == 1 {
        (tied[0], false)
    } else {
        // best (nearest) neighbor per tied class; then lowest label
        let mut winner = tied[0];
        let mut best = f64::INFINITY;
        for &c in &tied {
            let class_best = neighbors
                .iter()
                .filter(|&&i| labels[i] == c)
                .map(|&i| report.distances[i])
                .fold(f64::INFINITY, f64::min);
            if class_best < best {
                best = class_best;
                winner = c;
            }
        }
        (winner, true)
    };

    let mut votes: Vec<(usize, usize)> = counts
        .iter()
        .enumerate()
        .filter(|(_, &n)| n > 0)
        .map(|(c, &n)| (c, n))
        .collect();
    votes.sort_by_key(|&(c, _)| c);

    let decision = match threshold {
        Some(t) if report.min > t => Decision::Rejected,
        _ => Decision::Identified(winner),
    };
    Ok(Verdict {
        decision,
        votes,
        min_distance: report.min,
        threshold_used: threshold,
        tie_broken,
    })
}

/// Rejection threshold from leave-one-out genuine minimum distances:
/// margin_factor times the largest observed genuine distance.
pub fn suggest_threshold(genuine_min_distances: &[f64], margin_factor: f64) -> Result<f64> {
    if genuine_min_distances.is_empty() {
        return Err(Error::EmptyInput {
            context: "suggest_threshold genuine distances",
        });
    }
    assert!(margin_factor > 0.0, "margin_factor must be positive");
    let max = genuine_min_distances
        .iter()
        .fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    Ok(margin_factor * max)
}
