use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{polygon_intersection_area, Polygon};

/// Area agreement of one truth footprint with the extracted outlines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BuildingScore {
    /// Covered share of the building's area.
    pub correct: f64,
    /// Area of extracted outlines matched to this building but lying outside
    /// it, relative to the building's area.
    pub false_positive: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractionScore {
    /// `area(extracted ∩ truth) / area(truth)`, in `[0, 1]`.
    pub correct_area_fraction: f64,
    /// `area(extracted \ truth) / area(truth)`.
    pub false_positive_fraction: f64,
    /// One entry per truth footprint, in input order.
    pub per_building: Vec<BuildingScore>,
}

/// Compares extracted outlines against ground truth by overlap area.
///
/// Footprints within each set are assumed not to overlap one another. Each
/// extracted outline is matched to the truth footprint it overlaps most.
pub fn score_extraction(extracted: &[Polygon], truth: &[Polygon]) -> Result<ExtractionScore> {
    if truth.is_empty() {
        return Err(Error::Precondition("ground truth must be non-empty".into()));
    }
    let truth_area: f64 = truth.iter().map(Polygon::area).sum();
    let mut covered = vec![0.0; truth.len()];
    let mut stray = vec![0.0; truth.len()];
    let mut total_overlap = 0.0;
    let mut total_extracted = 0.0;
    for e in extracted {
        let overlaps = truth
            .iter()
            .map(|t| polygon_intersection_area(e.vertices(), t.vertices()))
            .collect::<Result<Vec<_>>>()?;
        let inside: f64 = overlaps.iter().sum();
        for (c, o) in covered.iter_mut().zip(&overlaps) {
            *c += o;
        }
        let best = overlaps
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .filter(|(_, o)| **o > 0.0)
            .map(|(i, _)| i);
        if let Some(i) = best {
            stray[i] += (e.area() - inside).max(0.0);
        }
        total_overlap += inside;
        total_extracted += e.area();
    }
    let per_building = truth
        .iter()
        .enumerate()
        .map(|(i, t)| BuildingScore {
            correct: (covered[i] / t.area()).min(1.0),
            false_positive: stray[i] / t.area(),
        })
        .collect();
    Ok(ExtractionScore {
        correct_area_fraction: (total_overlap / truth_area).min(1.0),
        false_positive_fraction: ((total_extracted - total_overlap) / truth_area).max(0.0),
        per_building,
    })
}
