use alloc::vec::Vec;

use crate::{Error, Result};

/// Counts present values per bin `[e_i, e_{i+1})`, the last bin closed.
/// Values outside the edges are ignored.
pub fn index_histogram(values: impl IntoIterator<Item = Option<f64>>, edges: &[f64]) -> Result<Vec<u64>> {
    if edges.len() < 2 || edges.iter().any(|e| !e.is_finite()) || edges.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::BadBins);
    }
    let last = edges.len() - 2;
    let mut counts = alloc::vec![0u64; edges.len() - 1];
    for v in values.into_iter().flatten() {
        if !(v >= edges[0] && v <= edges[last + 1]) {
            continue;
        }
        let bin = (edges.partition_point(|&e| e <= v) - 1).min(last);
        counts[bin] += 1;
    }
    Ok(counts)
}
