use alloc::vec::Vec;

use chrono::NaiveDate;

use crate::indices::IndexField;
use crate::{Error, Result};

/// Kendall tau-a with the tie counts behind it.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct KendallTau {
    pub tau: f64,
    pub n: usize,
    /// Pairs tied in the first variable.
    pub ties_a: u64,
    /// Pairs tied in the second variable.
    pub ties_b: u64,
    /// Pairs tied in both.
    pub ties_joint: u64,
}

/// Tau-a, `(concordant - discordant) / (n (n - 1) / 2)`, in `O(n log n)`
/// (Knight's merge-sort algorithm).
pub fn kendall_tau(a: &[f64], b: &[f64]) -> Result<KendallTau> {
    if a.len() != b.len() {
        return Err(Error::BadConfig("paired samples differ in length".into()));
    }
    let n = a.len();
    if n < 2 {
        return Err(Error::TooFewPoints(n));
    }
    if a.iter().chain(b).any(|v| v.is_nan()) {
        return Err(Error::NonFinite);
    }
    let mut pairs: Vec<(f64, f64)> = a.iter().copied().zip(b.iter().copied()).collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)));

    let ties_a = tied_pairs(&pairs, |p, q| p.0 == q.0);
    let ties_joint = tied_pairs(&pairs, |p, q| p.0 == q.0 && p.1 == q.1);

    let mut ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let mut buffer = ys.clone();
    let swaps = merge_count(&mut ys, &mut buffer);
    let ties_b = tied_pairs(&ys, |p, q| p == q);

    let n0 = (n as u64) * (n as u64 - 1) / 2;
    let numerator = n0 as i128 - ties_a as i128 - ties_b as i128 + ties_joint as i128 - 2 * swaps as i128;
    Ok(KendallTau {
        tau: numerator as f64 / n0 as f64,
        n,
        ties_a,
        ties_b,
        ties_joint,
    })
}

fn tied_pairs<T>(sorted: &[T], same: impl Fn(&T, &T) -> bool) -> u64 {
    let mut total = 0u64;
    let mut run = 1u64;
    for i in 1..sorted.len() {
        if same(&sorted[i - 1], &sorted[i]) {
            run += 1;
        } else {
            total += run * (run - 1) / 2;
            run = 1;
        }
    }
    total + run * (run - 1) / 2
}

// Sorts `v` and returns the number of strictly inverted pairs.
fn merge_count(v: &mut [f64], buffer: &mut [f64]) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut swaps = {
        let (left, right) = v.split_at_mut(mid);
        let (bl, br) = buffer.split_at_mut(mid);
        merge_count(left, bl) + merge_count(right, br)
    };
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if v[j] < v[i] {
            buffer[k] = v[j];
            swaps += (mid - i) as u64;
            j += 1;
        } else {
            buffer[k] = v[i];
            i += 1;
        }
        k += 1;
    }
    buffer[k..k + mid - i].copy_from_slice(&v[i..mid]);
    let k = k + mid - i;
    buffer[k..k + n - j].copy_from_slice(&v[j..n]);
    v.copy_from_slice(&buffer[..n]);
    swaps
}

/// Tau over the locations present and non-missing in both fields.
pub fn kendall_tau_fields(a: &IndexField, b: &IndexField) -> Result<KendallTau> {
    let (xs, ys) = shared_values(a, b);
    kendall_tau(&xs, &ys)
}

fn shared_values(a: &IndexField, b: &IndexField) -> (Vec<f64>, Vec<f64>) {
    a.entries
        .iter()
        .filter_map(|(loc, &x)| Some((x?, (*b.entries.get(loc)?)?)))
        .unzip()
}

/// How correlations over several validity dates are summarised.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KendallMode {
    /// Mean of the per-date values.
    #[default]
    PerDateMean,
    /// One tau over all (location, date) points together.
    Pooled,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatedKendall {
    /// Per-date tau, for dates with at least two shared points.
    pub per_date: Vec<(NaiveDate, KendallTau)>,
    /// Summary according to the requested mode.
    pub summary: f64,
}

/// Correlates fields of two kinds date by date; fields are matched on
/// validity date.
pub fn kendall_tau_over_dates(a: &[IndexField], b: &[IndexField], mode: KendallMode) -> Result<DatedKendall> {
    let mut per_date = Vec::new();
    let (mut all_x, mut all_y) = (Vec::new(), Vec::new());
    for fa in a {
        let Some(fb) = b.iter().find(|f| f.validity_date == fa.validity_date) else {
            continue;
        };
        let (xs, ys) = shared_values(fa, fb);
        if xs.len() >= 2 {
            per_date.push((fa.validity_date, kendall_tau(&xs, &ys)?));
        }
        all_x.extend(xs);
        all_y.extend(ys);
    }
    let summary = match mode {
        KendallMode::PerDateMean => {
            if per_date.is_empty() {
                return Err(Error::TooFewPoints(all_x.len()));
            }
            per_date.iter().map(|(_, t)| t.tau).sum::<f64>() / per_date.len() as f64
        }
        KendallMode::Pooled => kendall_tau(&all_x, &all_y)?.tau,
    };
    Ok(DatedKendall { per_date, summary })
}
