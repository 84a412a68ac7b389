use alloc::vec::Vec;

use super::contingency::contingency_tables;
use crate::indices::IndexKind;
use crate::{Error, Result};

/// Number of thresholds in the dense decision-threshold grid.
pub const GRID_THRESHOLDS: usize = 500;

/// ROC curve from `(0, 0)` to `(1, 1)` with FAR and H both non-decreasing.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RocCurve {
    /// `(FAR, H)` pairs.
    pub points: Vec<(f64, f64)>,
    /// Decision threshold of each point; the endpoints carry `+inf` and `-inf`.
    pub thresholds: Vec<f64>,
    /// Trapezoidal area under `points`.
    pub auc: f64,
}

/// One ROC point per threshold plus both endpoints.
pub fn roc_curve(pairs: &[(f64, bool)], thresholds: &[f64]) -> Result<RocCurve> {
    if thresholds.is_empty() {
        return Err(Error::BadConfig("no decision thresholds".into()));
    }
    if thresholds.iter().any(|t| t.is_nan()) {
        return Err(Error::NonFinite);
    }
    let events = pairs.iter().filter(|p| p.1).count();
    if events == 0 || events == pairs.len() {
        return Err(Error::DegenerateSample);
    }

    let mut sorted = thresholds.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    sorted.dedup();
    let tables = contingency_tables(pairs, &sorted)?;

    let mut points = Vec::with_capacity(sorted.len() + 2);
    let mut ths = Vec::with_capacity(sorted.len() + 2);
    points.push((0.0, 0.0));
    ths.push(f64::INFINITY);
    for (table, &t) in tables.iter().zip(&sorted) {
        // both rates defined: the sample holds events and non-events
        points.push((table.false_alarm_rate().unwrap_or(0.0), table.hit_rate().unwrap_or(0.0)));
        ths.push(t);
    }
    points.push((1.0, 1.0));
    ths.push(f64::NEG_INFINITY);

    let auc = points
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) * 0.5 * (w[0].1 + w[1].1))
        .sum();
    Ok(RocCurve {
        points,
        thresholds: ths,
        auc,
    })
}

/// `(auc_test - auc_ref) / (1 - auc_ref)`.
pub fn auc_skill_score(auc_test: f64, auc_ref: f64) -> Result<f64> {
    if auc_ref == 1.0 {
        return Err(Error::ReferencePerfect);
    }
    Ok((auc_test - auc_ref) / (1.0 - auc_ref))
}

/// 500 equally spaced thresholds spanning the index range: `[0, 1]` for CPF,
/// `[-1, 1]` for EFI, and the sample minimum to maximum for SOT and ANF.
pub fn grid500(kind: IndexKind, values: &[f64]) -> Result<Vec<f64>> {
    let (lo, hi) = match kind.bounds() {
        Some(b) => b,
        None => {
            let finite = values.iter().copied().filter(|v| v.is_finite());
            let lo = finite.clone().fold(f64::INFINITY, f64::min);
            let hi = finite.fold(f64::NEG_INFINITY, f64::max);
            if lo > hi {
                return Err(Error::EmptySample);
            }
            (lo, hi)
        }
    };
    let last = (GRID_THRESHOLDS - 1) as f64;
    Ok((0..GRID_THRESHOLDS)
        .map(|i| {
            if i == GRID_THRESHOLDS - 1 {
                hi
            } else {
                lo + (hi - lo) * i as f64 / last
            }
        })
        .collect())
}

/// Fixed thresholds used operationally to issue alerts; ANF has none.
pub fn actionable_thresholds(kind: IndexKind) -> Option<&'static [f64]> {
    match kind {
        IndexKind::Cpf => Some(&[0.85, 0.95, 0.98, 0.99, 0.999]),
        IndexKind::Efi => Some(&[0.3, 0.5, 0.6, 0.7, 0.8, 0.9]),
        IndexKind::Sot => Some(&[0.0, 1.0, 2.0, 5.0, 8.0]),
        IndexKind::Anf => None,
    }
}
