use alloc::vec::Vec;

use super::contingency::ContingencyTable;
use crate::{Error, Result};

/// Potential economic value envelope over a set of decision thresholds.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PevCurve {
    pub cost_loss_ratios: Vec<f64>,
    /// Best value over all tables at each cost/loss ratio; at most 1.
    pub values: Vec<f64>,
    /// Event frequency of the sample, where each table peaks.
    pub base_rate: f64,
}

/// Relative value of a table in the cost/loss model at ratio `alpha`:
/// `(min(a, s) - FAR a (1 - s) + H s (1 - a) - s) / (min(a, s) - s a)`.
pub fn pev_value(table: &ContingencyTable, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::LevelOutOfRange(alpha));
    }
    let (h, far, s) = match (table.hit_rate(), table.false_alarm_rate(), table.base_rate()) {
        (Some(h), Some(far), Some(s)) => (h, far, s),
        _ => return Err(Error::DegenerateSample),
    };
    let m = alpha.min(s);
    Ok((m - far * alpha * (1.0 - s) + h * s * (1.0 - alpha) - s) / (m - s * alpha))
}

/// Envelope of [`pev_value`] over `tables` (all from one sample).
pub fn pev_curve(tables: &[ContingencyTable], alphas: &[f64]) -> Result<PevCurve> {
    let first = tables.first().ok_or(Error::EmptySample)?;
    if tables
        .iter()
        .any(|t| t.total() != first.total() || t.events() != first.events())
    {
        return Err(Error::BadConfig("tables come from different samples".into()));
    }
    let base_rate = first.base_rate().ok_or(Error::EmptySample)?;
    let mut values = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        let mut best = f64::NEG_INFINITY;
        for table in tables {
            best = best.max(pev_value(table, alpha)?);
        }
        values.push(best);
    }
    Ok(PevCurve {
        cost_loss_ratios: alphas.to_vec(),
        values,
        base_rate,
    })
}

/// `n` cost/loss ratios evenly spaced in `log10` between `lo` and `hi`.
pub fn log_spaced_alphas(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && lo < hi && hi < 1.0) || n < 2 {
        return Err(Error::BadConfig("need 0 < lo < hi < 1 and at least two ratios".into()));
    }
    let (a, b) = (libm::log10(lo), libm::log10(hi));
    Ok((0..n)
        .map(|i| {
            if i == n - 1 {
                hi
            } else {
                libm::pow(10.0, a + (b - a) * i as f64 / (n - 1) as f64)
            }
        })
        .collect())
}
