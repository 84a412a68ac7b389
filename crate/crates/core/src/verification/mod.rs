//! Verification of index fields as binary forecasts of extreme events.
//!
//! An event is an observation strictly above the `event_quantile` of the
//! local observation climate; a forecast says "yes" when the index is strictly
//! above a decision threshold.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;

use chrono::NaiveDate;

use crate::climatology::{day_of_year, ClimateDistribution};
use crate::indices::IndexField;
use crate::{Error, Result};

mod bootstrap;
mod contingency;
mod correlation;
mod histogram;
mod reliability;
mod roc;
mod value;

pub use bootstrap::{block_bootstrap_ci, block_bootstrap_sample, BootstrapConfig, BootstrapInterval};
pub use contingency::{contingency, contingency_tables, ContingencyTable};
pub use correlation::{kendall_tau, kendall_tau_fields, kendall_tau_over_dates, DatedKendall, KendallMode, KendallTau};
pub use histogram::index_histogram;
pub use reliability::{
    reliability_diagram, reliability_from_sample, ReliabilityDiagram, RELIABILITY_CENTERS, RELIABILITY_EDGES,
};
pub use roc::{actionable_thresholds, auc_skill_score, grid500, roc_curve, RocCurve, GRID_THRESHOLDS};
pub use value::{log_spaced_alphas, pev_curve, pev_value, PevCurve};

/// Observation climates keyed by location and day of year.
pub type ObsClimate = BTreeMap<(String, u16), ClimateDistribution>;

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationRecord {
    pub location: String,
    pub validity_date: NaiveDate,
    /// `None` when the index is undefined at this point.
    pub index_value: Option<f64>,
    pub observed: f64,
}

/// Index values paired with observations and the climate that defines
/// events. Immutable once built; the climate is shared between derived
/// samples.
#[derive(Debug, Clone)]
pub struct VerificationSample {
    records: Vec<VerificationRecord>,
    event_quantile: f64,
    obs_climate: Arc<ObsClimate>,
}

impl VerificationSample {
    pub fn new(records: Vec<VerificationRecord>, event_quantile: f64, obs_climate: Arc<ObsClimate>) -> Result<Self> {
        if !(event_quantile > 0.0 && event_quantile < 1.0) {
            return Err(Error::LevelOutOfRange(event_quantile));
        }
        Ok(Self {
            records,
            event_quantile,
            obs_climate,
        })
    }

    /// Pairs every field entry with the observation at the same location and
    /// date; entries without an observation are skipped.
    pub fn from_fields(
        fields: &[IndexField],
        observations: &BTreeMap<(String, NaiveDate), f64>,
        event_quantile: f64,
        obs_climate: Arc<ObsClimate>,
    ) -> Result<Self> {
        let mut records = Vec::new();
        for field in fields {
            for (location, &value) in &field.entries {
                if let Some(&observed) = observations.get(&(location.clone(), field.validity_date)) {
                    records.push(VerificationRecord {
                        location: location.clone(),
                        validity_date: field.validity_date,
                        index_value: value,
                        observed,
                    });
                }
            }
        }
        Self::new(records, event_quantile, obs_climate)
    }

    pub fn records(&self) -> &[VerificationRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn event_quantile(&self) -> f64 {
        self.event_quantile
    }

    pub fn obs_climate(&self) -> &Arc<ObsClimate> {
        &self.obs_climate
    }

    /// Records whose index value is missing; they never enter a table.
    pub fn missing_count(&self) -> usize {
        self.records.iter().filter(|r| r.index_value.is_none()).count()
    }

    pub fn climate_for(&self, record: &VerificationRecord) -> Result<&ClimateDistribution> {
        self.obs_climate
            .get(&(record.location.clone(), day_of_year(record.validity_date)))
            .ok_or_else(|| Error::MissingClimate {
                location: record.location.to_string(),
                date: record.validity_date,
            })
    }

    /// A sample over a subset of records sharing this sample's climate.
    pub fn with_records(&self, records: Vec<VerificationRecord>) -> Self {
        Self {
            records,
            event_quantile: self.event_quantile,
            obs_climate: Arc::clone(&self.obs_climate),
        }
    }
}

/// `(index value, event)` pairs for every record with a present index.
pub fn binarize(sample: &VerificationSample) -> Result<Vec<(f64, bool)>> {
    let mut pairs = Vec::with_capacity(sample.len());
    for record in sample.records() {
        let threshold = sample
            .climate_for(record)?
            .grid
            .quantile_unchecked(sample.event_quantile);
        if let Some(value) = record.index_value {
            pairs.push((value, record.observed > threshold));
        }
    }
    Ok(pairs)
}

/// Keeps only records whose observation exceeds the `condition_quantile` of
/// the observation climate. Every event survives since events sit above the
/// higher event quantile.
pub fn conditional_filter(sample: &VerificationSample, condition_quantile: f64) -> Result<VerificationSample> {
    if !(0.0..sample.event_quantile).contains(&condition_quantile) {
        return Err(Error::QuantileOrder {
            condition: condition_quantile,
            event: sample.event_quantile,
        });
    }
    let mut kept = Vec::new();
    for record in sample.records() {
        let threshold = sample.climate_for(record)?.grid.quantile_unchecked(condition_quantile);
        if record.observed > threshold {
            kept.push(record.clone());
        }
    }
    Ok(sample.with_records(kept))
}
