//! Synthetic truth, ensemble forecasts and reforecast archives with known
//! statistics.
//!
//! Each location carries a stationary unit-variance AR(1) signal
//! `x_t = phi x_{t-1} + sqrt(1 - phi^2) e_t`. A forecast at lead `L` starts
//! from the true state `x_{t-L}`, so its members are
//! `phi^L x_{t-L} + sqrt(1 - phi^(2L)) n`, exactly the conditional law of the
//! truth. With unit dispersion and zero bias, truth and members are therefore
//! exchangeable and the spread grows with lead time. Dispersion scales the
//! member noise and bias shifts the members, both per lead, to break
//! calibration on purpose.
//!
//! In precipitation mode every value passes through the monotone map
//! `z -> 0` if `Phi(z) < p_dry`, else the gamma quantile of
//! `(Phi(z) - p_dry) / (1 - p_dry)`, giving a point mass at zero.
//!
//! Locations are independent; there is no spatial correlation.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use chrono::{Datelike, Days, NaiveDate};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::climatology::{ArchiveRecord, ReforecastArchive};
use crate::special::{gamma_cdf, gamma_quantile, normal_cdf, normal_quantile};
use crate::{Error, Result};

/// Marginal law of the generated variable.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case", tag = "kind"))]
pub enum VariableKind {
    /// Standard normal anomalies.
    Gaussian,
    /// Precipitation-like: zero with probability `dry_probability`, otherwise
    /// gamma distributed.
    GammaPrecip {
        dry_probability: f64,
        shape: f64,
        scale: f64,
    },
}

impl VariableKind {
    /// Maps a standard normal value onto the variable's scale.
    pub fn transform(&self, z: f64) -> f64 {
        match *self {
            VariableKind::Gaussian => z,
            VariableKind::GammaPrecip {
                dry_probability,
                shape,
                scale,
            } => {
                let u = normal_cdf(z);
                if u < dry_probability {
                    0.0
                } else {
                    gamma_quantile((u - dry_probability) / (1.0 - dry_probability), shape, scale)
                }
            }
        }
    }

    /// Natural lower bound of the support, if any.
    pub fn lower_bound(&self) -> Option<f64> {
        match self {
            VariableKind::Gaussian => None,
            VariableKind::GammaPrecip { .. } => Some(0.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct ScenarioConfig {
    pub locations: usize,
    /// First validity date of the verification period.
    pub start_date: NaiveDate,
    /// Length of the verification period in days.
    pub days: u32,
    pub ensemble_size: usize,
    pub reforecast_members: usize,
    pub runs_per_week: u32,
    pub reforecast_years: u32,
    pub lead_times: Vec<u32>,
    /// AR(1) coefficient of the daily signal.
    pub persistence: f64,
    /// Member noise multiplier per lead (1 is calibrated).
    pub dispersion: Vec<f64>,
    /// Additive member bias per lead, in standard-normal units.
    pub bias: Vec<f64>,
    pub variable: VariableKind,
    /// When set, reforecast runs are only generated for validity days within
    /// this many days of the verification period (any year), which is all a
    /// climate window of that width needs.
    pub archive_margin_days: Option<u32>,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            locations: 100,
            start_date: NaiveDate::from_ymd_opt(2021, 6, 1).expect("valid date"),
            days: 90,
            ensemble_size: 50,
            reforecast_members: 10,
            runs_per_week: 2,
            reforecast_years: 20,
            lead_times: alloc::vec![1, 3, 6],
            persistence: 0.7,
            dispersion: alloc::vec![1.0; 3],
            bias: alloc::vec![0.0; 3],
            variable: VariableKind::Gaussian,
            archive_margin_days: Some(14),
            seed: 42,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::BadConfig(msg.into()));
        if self.locations == 0 || self.days == 0 {
            return bad("need at least one location and one day");
        }
        if self.ensemble_size < 2 {
            return bad("ensemble size must be at least 2");
        }
        if self.reforecast_members == 0 || self.reforecast_years == 0 {
            return bad("reforecast members and years must be positive");
        }
        if !(1..=7).contains(&self.runs_per_week) {
            return bad("runs per week must be between 1 and 7");
        }
        if self.lead_times.is_empty() || self.lead_times.contains(&0) {
            return bad("lead times must be positive and non-empty");
        }
        if self.dispersion.len() != self.lead_times.len() || self.bias.len() != self.lead_times.len() {
            return bad("dispersion and bias need one entry per lead time");
        }
        if self.dispersion.iter().any(|d| !(*d > 0.0 && d.is_finite())) || self.bias.iter().any(|b| !b.is_finite()) {
            return bad("dispersion must be positive and bias finite");
        }
        if !(self.persistence > 0.0 && self.persistence < 1.0) {
            return bad("persistence must lie in (0, 1)");
        }
        if let VariableKind::GammaPrecip {
            dry_probability,
            shape,
            scale,
        } = self.variable
        {
            if !((0.0..1.0).contains(&dry_probability) && shape > 0.0 && scale > 0.0) {
                return bad("need 0 <= dry probability < 1 and positive gamma parameters");
            }
        }
        Ok(())
    }

    /// First validity date of the reforecast and observation history.
    pub fn history_begin(&self) -> NaiveDate {
        let year = self.start_date.year() - self.reforecast_years as i32;
        self.start_date
            .with_year(year)
            .or_else(|| NaiveDate::from_ymd_opt(year, self.start_date.month(), 28))
            .expect("valid date")
    }

    /// First day of the simulated truth: the history plus room for the
    /// longest lead.
    pub fn history_start(&self) -> NaiveDate {
        let max_lead = self.lead_times.iter().copied().max().unwrap_or(0) as u64;
        self.history_begin() - Days::new(max_lead)
    }

    pub fn end_date(&self) -> NaiveDate {
        self.start_date + Days::new(self.days as u64 - 1)
    }
}

/// Ensemble members for one location, validity date and lead.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleRecord {
    pub location: String,
    pub validity_date: NaiveDate,
    pub lead_days: u32,
    pub members: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct SyntheticDataset {
    pub config: ScenarioConfig,
    pub locations: Vec<String>,
    /// Daily truth per location from [`ScenarioConfig::history_start`] on.
    pub truth: BTreeMap<String, Vec<f64>>,
    pub truth_start: NaiveDate,
    /// Verification-period forecasts sorted by (location, date, lead).
    pub forecasts: Vec<EnsembleRecord>,
    /// Reforecast archive per lead time.
    pub reforecasts: BTreeMap<u32, ReforecastArchive>,
    /// Truth before the verification period, one member per record.
    pub observation_history: ReforecastArchive,
}

impl SyntheticDataset {
    /// True value at `location` on `date`, if simulated.
    pub fn truth_at(&self, location: &str, date: NaiveDate) -> Option<f64> {
        let offset = usize::try_from((date - self.truth_start).num_days()).ok()?;
        self.truth.get(location)?.get(offset).copied()
    }

    /// Observations over the verification period keyed by (location, date).
    pub fn verification_observations(&self) -> BTreeMap<(String, NaiveDate), f64> {
        let mut out = BTreeMap::new();
        for loc in &self.locations {
            for d in 0..self.config.days as u64 {
                let date = self.config.start_date + Days::new(d);
                if let Some(v) = self.truth_at(loc, date) {
                    out.insert((loc.clone(), date), v);
                }
            }
        }
        out
    }
}

fn location_name(i: usize) -> String {
    alloc::format!("L{i:04}")
}

// Per-location streams keep locations independent of generation order.
fn stream(seed: u64, location: usize, purpose: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((location as u64) << 8) | purpose);
    rng
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Builds the dataset described by `config`.
pub fn generate(config: &ScenarioConfig) -> Result<SyntheticDataset> {
    config.validate()?;
    let truth_start = config.history_start();
    let n_days = (config.end_date() - truth_start).num_days() as usize + 1;
    let phi = config.persistence;
    let innovation = libm::sqrt(1.0 - phi * phi);
    let var = config.variable;
    let period_days: Vec<u16> = (0..config.days as u64)
        .map(|d| crate::climatology::day_of_year(config.start_date + Days::new(d)))
        .collect();
    let in_season = |date: NaiveDate| match config.archive_margin_days {
        None => true,
        Some(m) => {
            let doy = crate::climatology::day_of_year(date);
            period_days
                .iter()
                .any(|&p| crate::climatology::day_distance(p, doy) as u32 <= m)
        }
    };
    // runs spread evenly over the week, starting on Monday
    let run_weekdays: Vec<u32> = (0..config.runs_per_week)
        .map(|i| i * 7 / config.runs_per_week)
        .collect();
    let history_begin = config.history_begin();

    let locations: Vec<String> = (0..config.locations).map(location_name).collect();
    let mut truth = BTreeMap::new();
    let mut forecasts = Vec::new();
    let mut reforecast_records: Vec<Vec<ArchiveRecord>> = alloc::vec![Vec::new(); config.lead_times.len()];
    let mut obs_records = Vec::new();

    for (li, loc) in locations.iter().enumerate() {
        let mut rng = stream(config.seed, li, 0);
        let mut latent = Vec::with_capacity(n_days);
        let mut x = normal(&mut rng);
        for _ in 0..n_days {
            latent.push(x);
            x = phi * x + innovation * normal(&mut rng);
        }

        let mut members_rng = stream(config.seed, li, 1);
        for d in 0..config.days as u64 {
            let date = config.start_date + Days::new(d);
            let t = (date - truth_start).num_days() as usize;
            for (k, &lead) in config.lead_times.iter().enumerate() {
                let members = draw_members(
                    &mut members_rng,
                    latent[t - lead as usize],
                    phi,
                    lead,
                    config.dispersion[k],
                    config.bias[k],
                    config.ensemble_size,
                )
                .into_iter()
                .map(|z| var.transform(z))
                .collect();
                forecasts.push(EnsembleRecord {
                    location: loc.clone(),
                    validity_date: date,
                    lead_days: lead,
                    members,
                });
            }
        }

        let mut reforecast_rng = stream(config.seed, li, 2);
        let mut run = history_begin;
        while run < config.start_date {
            if run_weekdays.contains(&run.weekday().num_days_from_monday()) {
                let t0 = (run - truth_start).num_days() as usize;
                for (k, &lead) in config.lead_times.iter().enumerate() {
                    let validity = run + Days::new(lead as u64);
                    if validity >= config.start_date || !in_season(validity) {
                        continue;
                    }
                    let members = draw_members(
                        &mut reforecast_rng,
                        latent[t0],
                        phi,
                        lead,
                        config.dispersion[k],
                        config.bias[k],
                        config.reforecast_members,
                    )
                    .into_iter()
                    .map(|z| var.transform(z))
                    .collect();
                    reforecast_records[k].push(ArchiveRecord {
                        location: loc.clone(),
                        validity_date: validity,
                        members,
                    });
                }
            }
            run = run + Days::new(1);
        }

        let mut date = history_begin;
        while date < config.start_date {
            if in_season(date) {
                let t = (date - truth_start).num_days() as usize;
                obs_records.push(ArchiveRecord {
                    location: loc.clone(),
                    validity_date: date,
                    members: alloc::vec![var.transform(latent[t])],
                });
            }
            date = date + Days::new(1);
        }

        truth.insert(loc.clone(), latent.into_iter().map(|z| var.transform(z)).collect());
    }

    let mut reforecasts = BTreeMap::new();
    for (k, records) in reforecast_records.into_iter().enumerate() {
        reforecasts.insert(
            config.lead_times[k],
            ReforecastArchive::new(records, config.reforecast_members, config.reforecast_years)?,
        );
    }
    Ok(SyntheticDataset {
        config: config.clone(),
        locations,
        truth,
        truth_start,
        forecasts,
        reforecasts,
        observation_history: ReforecastArchive::new(obs_records, 1, config.reforecast_years)?,
    })
}

fn draw_members(
    rng: &mut ChaCha8Rng,
    initial: f64,
    phi: f64,
    lead: u32,
    dispersion: f64,
    bias: f64,
    n: usize,
) -> Vec<f64> {
    let decay = libm::pow(phi, lead as f64);
    let spread = libm::sqrt(1.0 - decay * decay) * dispersion;
    (0..n).map(|_| decay * initial + bias + spread * normal(rng)).collect()
}

/// A continuous distribution with closed-form CDF for the CPF oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AnalyticDistribution {
    Normal { mean: f64, sd: f64 },
    Gamma { shape: f64, scale: f64 },
}

impl AnalyticDistribution {
    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            AnalyticDistribution::Normal { mean, sd } => normal_cdf((x - mean) / sd),
            AnalyticDistribution::Gamma { shape, scale } => gamma_cdf(x, shape, scale),
        }
    }

    pub fn quantile(&self, p: f64) -> f64 {
        match *self {
            AnalyticDistribution::Normal { mean, sd } => mean + sd * normal_quantile(p),
            AnalyticDistribution::Gamma { shape, scale } => gamma_quantile(p, shape, scale),
        }
    }

    fn valid(&self) -> bool {
        match *self {
            AnalyticDistribution::Normal { mean, sd } => mean.is_finite() && sd > 0.0 && sd.is_finite(),
            AnalyticDistribution::Gamma { shape, scale } => {
                shape > 0.0 && scale > 0.0 && shape.is_finite() && scale.is_finite()
            }
        }
    }
}

const ORACLE_STEPS: usize = 100_000;
const ORACLE_TOLERANCE: f64 = 1e-12;

/// CPF of two analytic distributions.
///
/// `F - G` is sign-scanned on a dense grid spanning both distributions
/// (differences below 1e-12 count as zero). Equal distributions give 0,
/// `F >= G` everywhere gives 0, `F <= G` everywhere gives 1, and a single
/// crossing from below is refined by bisection, returning `G(y*)`. Any other
/// sign pattern is rejected.
pub fn analytic_cpf_oracle(f: AnalyticDistribution, g: AnalyticDistribution) -> Result<f64> {
    if !f.valid() || !g.valid() {
        return Err(Error::BadConfig("invalid analytic distribution parameters".into()));
    }
    let lo = f.quantile(1e-12).min(g.quantile(1e-12));
    let hi = f.quantile(1.0 - 1e-12).max(g.quantile(1.0 - 1e-12));
    let x_at = |i: usize| lo + (hi - lo) * i as f64 / ORACLE_STEPS as f64;
    let sign = |x: f64| {
        let d = f.cdf(x) - g.cdf(x);
        if d > ORACLE_TOLERANCE {
            1
        } else if d < -ORACLE_TOLERANCE {
            -1
        } else {
            0
        }
    };

    let mut last_sign = 0;
    let mut last_x = lo;
    let mut seen_above = false;
    let mut seen_below = false;
    let mut crossings = Vec::new();
    for i in 0..=ORACLE_STEPS {
        let x = x_at(i);
        let s = sign(x);
        if s == 0 {
            continue;
        }
        seen_above |= s > 0;
        seen_below |= s < 0;
        if last_sign != 0 && s != last_sign {
            crossings.push((last_x, x, s > 0));
        }
        last_sign = s;
        last_x = x;
    }

    match (seen_above, seen_below, crossings.as_slice()) {
        (false, false, _) | (true, false, _) => Ok(0.0),
        (false, true, _) => Ok(1.0),
        (_, _, &[(mut a, mut b, true)]) => {
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if m <= a || m >= b {
                    break;
                }
                if f.cdf(m) - g.cdf(m) > 0.0 {
                    b = m;
                } else {
                    a = m;
                }
            }
            Ok(g.cdf(0.5 * (a + b)))
        }
        _ => Err(Error::NoQualifyingCrossing),
    }
}
