//! The four ensemble summary indices.
//!
//! Each compares a forecast distribution F (the ensemble, an
//! [`EmpiricalDistribution`]) with a climate distribution G (a
//! [`ClimateDistribution`] stored as a percentile grid):
//!
//! * **CPF**, crossing-point forecast: the climate probability level `G(y*)`
//!   at the point `y*` where F crosses G from below (F < G to the left,
//!   F > G to the right). Values lie in `[0, 1]` and map to return periods.
//! * **EFI**, extreme forecast index: a tail-weighted integral of
//!   `p - F(G^-1(p))` over `p` in `[0, 1]`, scaled to `[-1, 1]`.
//! * **SOT**, shift of tails: `-(G^-1(0.99) - F^-1(0.9)) / (G^-1(0.99) - G^-1(0.9))`.
//! * **ANF**, standardised ensemble-mean anomaly: `(mean F - mean G) / (sd G + k)`.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::FRAC_2_PI;
use core::fmt;
use core::str::FromStr;

use chrono::NaiveDate;

use crate::climatology::ClimateDistribution;
use crate::distributions::{EmpiricalDistribution, Univariate, GRID_SIZE};
use crate::{Error, Result};

/// Which index a value or field holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum IndexKind {
    Cpf,
    Efi,
    Sot,
    Anf,
}

impl IndexKind {
    pub const ALL: [IndexKind; 4] = [IndexKind::Cpf, IndexKind::Efi, IndexKind::Sot, IndexKind::Anf];

    pub fn as_str(self) -> &'static str {
        match self {
            IndexKind::Cpf => "cpf",
            IndexKind::Efi => "efi",
            IndexKind::Sot => "sot",
            IndexKind::Anf => "anf",
        }
    }

    /// The fixed range of bounded indices.
    pub fn bounds(self) -> Option<(f64, f64)> {
        match self {
            IndexKind::Cpf => Some((0.0, 1.0)),
            IndexKind::Efi => Some((-1.0, 1.0)),
            IndexKind::Sot | IndexKind::Anf => None,
        }
    }
}

impl fmt::Display for IndexKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for IndexKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cpf" => Ok(IndexKind::Cpf),
            "efi" => Ok(IndexKind::Efi),
            "sot" => Ok(IndexKind::Sot),
            "anf" => Ok(IndexKind::Anf),
            _ => Err(Error::BadConfig(alloc::format!("unknown index kind `{s}`"))),
        }
    }
}

/// One index value; `value` is `None` when the index is undefined
/// (SOT with a flat climate tail).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndexValue {
    pub kind: IndexKind,
    pub value: Option<f64>,
}

impl IndexValue {
    pub fn present(kind: IndexKind, value: f64) -> Self {
        Self {
            kind,
            value: Some(value),
        }
    }

    pub fn missing(kind: IndexKind) -> Self {
        Self { kind, value: None }
    }
}

/// Index values of one kind over many locations, for one validity date and
/// lead time.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexField {
    pub kind: IndexKind,
    pub validity_date: NaiveDate,
    pub lead_time_days: u32,
    pub entries: BTreeMap<String, Option<f64>>,
}

impl IndexField {
    pub fn new(kind: IndexKind, validity_date: NaiveDate, lead_time_days: u32) -> Self {
        Self {
            kind,
            validity_date,
            lead_time_days,
            entries: BTreeMap::new(),
        }
    }

    pub fn get(&self, location: &str) -> Option<IndexValue> {
        self.entries
            .get(location)
            .map(|&value| IndexValue { kind: self.kind, value })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// How the CPF scan ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrossingBranch {
    /// F crosses G from below at `y*`.
    InteriorCrossing,
    /// F >= G everywhere: no excess forecast risk, CPF = 0.
    FAlwaysAbove,
    /// F <= G everywhere: excess forecast risk up to the top, CPF = 1.
    FAlwaysBelow,
    /// F reduced to a percentile grid is identical to G, CPF = 0.
    DegenerateEqual,
    /// Only crossings from above exist (F wider than G); F <= G beyond the
    /// last one, CPF = 1.
    DownwardOnly,
}

/// A change in the sign of `F - G` between consecutive scan points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignChange {
    /// First scan point carrying the new sign.
    pub x: f64,
    pub upward: bool,
}

/// Which crossing from below defines `y*` when `F - G` changes sign more
/// than once. Both agree under the single crossing condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum CrossingRule {
    /// The most extreme crossing: `y*` is where `F < G` stops holding for
    /// good, i.e. the supremum of `{x : F(x) < G(x)}`. Non-decreasing under
    /// upward shifts of the forecast.
    #[default]
    Last,
    /// Scan upward and stop at the first transition from `F < G` to `F > G`.
    /// Sensitive to sampling noise in the lower tail of small ensembles.
    First,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossingResult {
    pub y_star: Option<f64>,
    pub cpf: f64,
    pub branch: CrossingBranch,
    /// Every sign change of `F - G` met along the scan.
    pub sign_changes: Vec<SignChange>,
}

/// Crossing-point forecast with the default [`CrossingRule::Last`].
///
/// `F - G` is evaluated on the merged, sorted support points of F (members)
/// and G (thresholds), keeping only points above `lower_bound` when given
/// (use `Some(0.0)` for precipitation so the shared point mass at zero is
/// skipped). `y*` is a point where F crosses G from below; when `F = G` on a
/// run of points just before `F > G`, `y*` is the last point of that run.
///
/// Note the CPF is reported as the probability level `G(y*)`, not as a
/// physical value.
pub fn cpf(
    forecast: &EmpiricalDistribution,
    climate: &ClimateDistribution,
    lower_bound: Option<f64>,
) -> CrossingResult {
    cpf_with_rule(forecast, climate, lower_bound, CrossingRule::Last)
}

pub fn cpf_with_rule(
    forecast: &EmpiricalDistribution,
    climate: &ClimateDistribution,
    lower_bound: Option<f64>,
    rule: CrossingRule,
) -> CrossingResult {
    let grid = &climate.grid;
    let mut points: Vec<f64> = forecast
        .values()
        .iter()
        .chain(grid.thresholds().iter())
        .copied()
        .filter(|&x| lower_bound.is_none_or(|b| x > b))
        .collect();
    points.sort_by(f64::total_cmp);
    points.dedup();

    let diffs: Vec<f64> = points.iter().map(|&x| forecast.cdf(x) - grid.cdf(x)).collect();
    let sign_changes = sign_changes(&points, &diffs);

    let fallback = |branch, cpf| CrossingResult {
        y_star: None,
        cpf,
        branch,
        sign_changes: sign_changes.clone(),
    };
    // F summarised on the climate's percentile grid is G itself
    if forecast.size() >= 2 && forecast.to_percentile_grid().is_ok_and(|g| g == *grid) {
        return fallback(CrossingBranch::DegenerateEqual, 0.0);
    }

    // index of the first positive difference that ends the chosen run of
    // negative differences
    let positive_end = match rule {
        CrossingRule::Last => diffs
            .iter()
            .rposition(|&d| d < 0.0)
            .and_then(|last_neg| (last_neg + 1..diffs.len()).find(|&i| diffs[i] > 0.0)),
        CrossingRule::First => sign_changes
            .iter()
            .find(|c| c.upward)
            .map(|c| points.partition_point(|&x| x < c.x)),
    };

    if let Some(k) = positive_end {
        let y = if k > 0 && diffs[k - 1] == 0.0 {
            points[k - 1]
        } else {
            points[k]
        };
        return CrossingResult {
            y_star: Some(y),
            cpf: grid.cdf(y),
            branch: CrossingBranch::InteriorCrossing,
            sign_changes,
        };
    }

    if diffs.iter().all(|&d| d >= 0.0) {
        fallback(CrossingBranch::FAlwaysAbove, 0.0)
    } else if diffs.iter().all(|&d| d <= 0.0) {
        fallback(CrossingBranch::FAlwaysBelow, 1.0)
    } else {
        // F > G somewhere but never again after the last F < G: F <= G
        // all the way to the top.
        fallback(CrossingBranch::DownwardOnly, 1.0)
    }
}

fn sign_changes(points: &[f64], diffs: &[f64]) -> Vec<SignChange> {
    let mut out = Vec::new();
    let mut last = 0.0_f64;
    for (&x, &d) in points.iter().zip(diffs) {
        if d == 0.0 {
            continue;
        }
        if last != 0.0 && (d > 0.0) != (last > 0.0) {
            out.push(SignChange { x, upward: d > 0.0 });
        }
        last = d;
    }
    out
}

// Antiderivatives of p / sqrt(p(1-p)) and 1 / sqrt(p(1-p)).
fn efi_weight_p(p: f64) -> f64 {
    libm::asin(libm::sqrt(p)) - libm::sqrt(p * (1.0 - p))
}

fn efi_weight_one(p: f64) -> f64 {
    2.0 * libm::asin(libm::sqrt(p))
}

/// Extreme forecast index.
///
/// `Ft(p)`, the fraction of members at or below the climate p-quantile, is
/// built from ranks alone: a member equal to a threshold sits at that
/// threshold's level (the highest one on a flat run), a member strictly
/// between two thresholds sits at the middle of that percentile cell, and
/// members outside the grid sit at 0 or 1. `Ft` is then a step function and
/// the integral is evaluated exactly piece by piece with the antiderivatives
/// of the weight. Because only ranks enter, the index is unchanged by any
/// strictly increasing transform applied to both F and G.
pub fn efi(forecast: &EmpiricalDistribution, climate: &ClimateDistribution) -> IndexValue {
    let t = climate.grid.thresholds();
    // sorted because the members are
    let member_levels: Vec<f64> = forecast.values().iter().map(|&v| rank_level(t, v)).collect();
    let mut breaks: Vec<f64> = (0..GRID_SIZE).map(|i| i as f64 / 100.0).collect();
    breaks.extend_from_slice(&member_levels);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();

    let n = forecast.size() as f64;
    let mut total = 0.0;
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        let below = member_levels.partition_point(|&l| l <= a) as f64 / n;
        total += (efi_weight_p(b) - efi_weight_p(a)) - below * (efi_weight_one(b) - efi_weight_one(a));
    }
    IndexValue::present(IndexKind::Efi, (FRAC_2_PI * total).clamp(-1.0, 1.0))
}

/// Climate probability level of `v` from its position among the thresholds.
pub(crate) fn rank_level(t: &[f64; GRID_SIZE], v: f64) -> f64 {
    let above = t.partition_point(|&x| x <= v);
    if above == 0 {
        return 0.0;
    }
    let i = above - 1;
    if v == t[i] || i == GRID_SIZE - 1 {
        i as f64 / 100.0
    } else {
        (i as f64 + 0.5) / 100.0
    }
}

/// Upper-tail shift of tails; missing when `G^-1(0.99) = G^-1(0.9)`.
pub fn sot(forecast: &EmpiricalDistribution, climate: &ClimateDistribution) -> IndexValue {
    let g99 = climate.grid.quantile_unchecked(0.99);
    let g90 = climate.grid.quantile_unchecked(0.90);
    let f90 = forecast.quantile_unchecked(0.9);
    let spread = g99 - g90;
    if spread == 0.0 {
        return IndexValue::missing(IndexKind::Sot);
    }
    IndexValue::present(IndexKind::Sot, -(g99 - f90) / spread)
}

/// Standardised ensemble-mean anomaly `(mean F - mean G) / (sd G + k)`.
/// `k` is 1 for precipitation and 0 for temperature-like variables.
pub fn anf(forecast: &EmpiricalDistribution, climate: &ClimateDistribution, k: f64) -> Result<IndexValue> {
    if !(k >= 0.0 && k.is_finite()) {
        return Err(Error::BadConfig(alloc::format!(
            "ANF stabiliser k must be >= 0, got {k}"
        )));
    }
    let (forecast_mean, _) = forecast.mean_stddev();
    let scale = climate.stddev + k;
    if scale == 0.0 {
        return Err(Error::ZeroScale);
    }
    Ok(IndexValue::present(
        IndexKind::Anf,
        (forecast_mean - climate.mean) / scale,
    ))
}

/// Parameters shared by the per-point index computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndexParams {
    /// ANF stabiliser.
    pub k: f64,
    /// Lower bound of the variable's support for the CPF scan.
    pub lower_bound: Option<f64>,
    pub crossing: CrossingRule,
}

impl Default for IndexParams {
    fn default() -> Self {
        Self {
            k: 1.0,
            lower_bound: None,
            crossing: CrossingRule::Last,
        }
    }
}

/// Computes one index at one point.
pub fn compute_index(
    kind: IndexKind,
    forecast: &EmpiricalDistribution,
    climate: &ClimateDistribution,
    params: IndexParams,
) -> Result<IndexValue> {
    Ok(match kind {
        IndexKind::Cpf => IndexValue::present(
            kind,
            cpf_with_rule(forecast, climate, params.lower_bound, params.crossing).cpf,
        ),
        IndexKind::Efi => efi(forecast, climate),
        IndexKind::Sot => sot(forecast, climate),
        IndexKind::Anf => anf(forecast, climate, params.k)?,
    })
}

/// Applies [`compute_index`] at every location. Both maps must share the
/// same key set.
pub fn compute_index_field(
    forecasts: &BTreeMap<String, EmpiricalDistribution>,
    climates: &BTreeMap<String, ClimateDistribution>,
    kind: IndexKind,
    params: IndexParams,
    validity_date: NaiveDate,
    lead_time_days: u32,
) -> Result<IndexField> {
    if let Some(loc) = forecasts
        .keys()
        .find(|k| !climates.contains_key(*k))
        .or_else(|| climates.keys().find(|k| !forecasts.contains_key(*k)))
    {
        return Err(Error::LocationMismatch(loc.clone()));
    }
    let mut field = IndexField::new(kind, validity_date, lead_time_days);
    for (loc, forecast) in forecasts {
        let value = compute_index(kind, forecast, &climates[loc], params)?;
        field.entries.insert(loc.clone(), value.value);
    }
    Ok(field)
}
