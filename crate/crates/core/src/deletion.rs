//! Clustering with a deletion predictor: every label it gives is correct, but
//! it may abstain on most points.

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::geometry::{class_centroids, nearest, CenterSet, LabelAssignment, PointSet};
use crate::warning::Warning;

#[derive(Debug, Clone, PartialEq)]
pub struct DeletionOutput {
    /// One center per surviving label, ordered by label.
    pub centers: CenterSet,
    /// Label id served by each row of `centers`.
    pub center_labels: Vec<usize>,
    /// Complete labeling: given labels kept, abstentions filled by nearest center.
    pub labels: LabelAssignment,
    pub warnings: Vec<Warning>,
}

/// Centers are the exact means of the labeled points of each label; every
/// unlabeled point then takes the label of its nearest center (ties to the
/// smaller label). Labels with no surviving point get no center.
pub fn deletion_cluster(points: &PointSet, partial: &LabelAssignment, k: usize) -> Result<DeletionOutput> {
    if k == 0 {
        return Err(invalid("k", "must be >= 1"));
    }
    partial.validate(points.n(), k)?;
    let cents = class_centroids(points, partial, k)?;
    let center_labels: Vec<usize> = (0..k).filter(|&l| cents[l].is_some()).collect();
    if center_labels.is_empty() {
        return Err(Error::AllLabelsDeleted);
    }
    let mut warnings = Vec::new();
    if center_labels.len() < k {
        warnings.push(Warning::MissingLabels {
            present: center_labels.len(),
            k,
        });
    }
    let rows: Vec<Vec<f64>> = cents.into_iter().flatten().collect();
    let centers = CenterSet::from_rows(&rows)?;
    let filled: Vec<Option<usize>> = partial
        .as_slice()
        .par_iter()
        .enumerate()
        .with_min_len(1024)
        .map(|(i, l)| l.or_else(|| Some(center_labels[nearest(points.row(i), &centers).0])))
        .collect();
    Ok(DeletionOutput {
        centers,
        center_labels,
        labels: LabelAssignment::new(filled),
        warnings,
    })
}
