use super::{VerificationRecord, VerificationSample};
use crate::climatology::ClimateDistribution;
use crate::{Error, Result};

/// Probability levels the CPF categories are centred on.
pub const RELIABILITY_CENTERS: [f64; 6] = [0.75, 0.80, 0.85, 0.90, 0.95, 0.99];

/// Category edges, midway between centres; the top category is closed at 1.
pub const RELIABILITY_EDGES: [f64; 7] = [0.725, 0.775, 0.825, 0.875, 0.925, 0.97, 1.0];

/// CPF reliability: in a calibrated system the observation falls at or below
/// the climate quantile at level `cpf` with probability `cpf`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ReliabilityDiagram {
    pub bin_centers: [f64; 6],
    pub bin_counts: [u64; 6],
    /// Non-exceedance frequency per bin, `None` for empty bins.
    pub observed_frequency: [Option<f64>; 6],
    /// Bin count over all input cases, including those below the first edge.
    pub case_share: [f64; 6],
    pub total_cases: u64,
}

fn bin_of(cpf: f64) -> Option<usize> {
    if !(cpf > RELIABILITY_EDGES[0] && cpf <= 1.0) {
        return None;
    }
    Some(RELIABILITY_EDGES[1..6].partition_point(|&e| e <= cpf))
}

/// Builds the diagram from `(cpf, observed, observation climate)` cases.
/// Cases at or below 0.725 only count towards `total_cases`.
pub fn reliability_diagram<'a>(
    cases: impl IntoIterator<Item = (f64, f64, &'a ClimateDistribution)>,
) -> Result<ReliabilityDiagram> {
    let mut counts = [0u64; 6];
    let mut below = [0u64; 6];
    let mut total = 0u64;
    for (cpf, observed, climate) in cases {
        if !(0.0..=1.0).contains(&cpf) {
            return Err(Error::LevelOutOfRange(cpf));
        }
        total += 1;
        if let Some(bin) = bin_of(cpf) {
            counts[bin] += 1;
            if observed <= climate.grid.quantile_unchecked(cpf) {
                below[bin] += 1;
            }
        }
    }
    let observed_frequency = core::array::from_fn(|i| (counts[i] > 0).then(|| below[i] as f64 / counts[i] as f64));
    let case_share = core::array::from_fn(|i| {
        if total > 0 {
            counts[i] as f64 / total as f64
        } else {
            0.0
        }
    });
    Ok(ReliabilityDiagram {
        bin_centers: RELIABILITY_CENTERS,
        bin_counts: counts,
        observed_frequency,
        case_share,
        total_cases: total,
    })
}

/// Diagram over a sample whose index values are CPF; missing values are
/// skipped.
pub fn reliability_from_sample(sample: &VerificationSample) -> Result<ReliabilityDiagram> {
    let mut cases = alloc::vec::Vec::with_capacity(sample.len());
    for record in sample.records() {
        let VerificationRecord {
            index_value, observed, ..
        } = record;
        if let Some(cpf) = *index_value {
            cases.push((cpf, *observed, sample.climate_for(record)?));
        }
    }
    reliability_diagram(cases)
}
