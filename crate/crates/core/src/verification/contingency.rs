use alloc::vec::Vec;

use crate::{Error, Result};

/// 2x2 table of yes/no forecasts against events.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ContingencyTable {
    pub hits: u64,
    pub false_alarms: u64,
    pub misses: u64,
    pub correct_rejections: u64,
}

impl ContingencyTable {
    pub fn total(&self) -> u64 {
        self.hits + self.false_alarms + self.misses + self.correct_rejections
    }

    pub fn events(&self) -> u64 {
        self.hits + self.misses
    }

    /// `a / (a + c)`.
    pub fn hit_rate(&self) -> Option<f64> {
        ratio(self.hits, self.events())
    }

    /// `b / (b + d)`.
    pub fn false_alarm_rate(&self) -> Option<f64> {
        ratio(self.false_alarms, self.false_alarms + self.correct_rejections)
    }

    /// Event frequency `(a + c) / n`.
    pub fn base_rate(&self) -> Option<f64> {
        ratio(self.events(), self.total())
    }
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// Table for the forecast "yes iff value > threshold".
pub fn contingency(pairs: &[(f64, bool)], threshold: f64) -> Result<ContingencyTable> {
    if pairs.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut t = ContingencyTable::default();
    for &(value, event) in pairs {
        match (value > threshold, event) {
            (true, true) => t.hits += 1,
            (true, false) => t.false_alarms += 1,
            (false, true) => t.misses += 1,
            (false, false) => t.correct_rejections += 1,
        }
    }
    Ok(t)
}

/// One table per threshold, sorting the sample once.
pub fn contingency_tables(pairs: &[(f64, bool)], thresholds: &[f64]) -> Result<Vec<ContingencyTable>> {
    if pairs.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut events: Vec<f64> = pairs.iter().filter(|p| p.1).map(|p| p.0).collect();
    let mut others: Vec<f64> = pairs.iter().filter(|p| !p.1).map(|p| p.0).collect();
    events.sort_by(f64::total_cmp);
    others.sort_by(f64::total_cmp);
    Ok(thresholds
        .iter()
        .map(|&t| {
            let misses = events.partition_point(|&v| v <= t) as u64;
            let correct_rejections = others.partition_point(|&v| v <= t) as u64;
            ContingencyTable {
                hits: events.len() as u64 - misses,
                false_alarms: others.len() as u64 - correct_rejections,
                misses,
                correct_rejections,
            }
        })
        .collect())
}
