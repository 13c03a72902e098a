//! The one-dimensional sample of pairwise distances and its histogram.

use std::ops::Deref;

use rayon::prelude::*;
use serde::Serialize;

use crate::dataset::DataMatrix;
use crate::error::{Error, Result};

/// Rows above this count are refused: the distance set grows as `n^2`.
pub const DEFAULT_ROW_CAP: usize = 20_000;

/// A sorted, ascending sample of finite non-negative reals.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleVector {
    values: Vec<f64>,
}

impl SampleVector {
    /// Sorts `values` and validates them.
    pub fn from_unsorted(mut values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        values.sort_unstable_by(f64::total_cmp);
        Ok(SampleVector { values })
    }

    /// Wraps values that must already be sorted ascending.
    pub fn from_sorted(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        if let Some(i) = values.windows(2).position(|w| w[1] < w[0]) {
            return Err(Error::Unsorted(i + 1));
        }
        Ok(SampleVector { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }

    pub fn min(&self) -> Option<f64> {
        self.values.first().copied()
    }

    pub fn max(&self) -> Option<f64> {
        self.values.last().copied()
    }

    /// FNV-1a over the bit patterns, as a hex string.
    pub fn checksum(&self) -> String {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for v in &self.values {
            for b in v.to_bits().to_le_bytes() {
                h ^= u64::from(b);
                h = h.wrapping_mul(0x0100_0000_01b3);
            }
        }
        format!("{h:016x}")
    }
}

impl Deref for SampleVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.values
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Metric {
    #[default]
    Euclidean,
}

impl Metric {
    fn distance(self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Metric::Euclidean => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt(),
        }
    }
}

/// All `n(n-1)/2` distances between distinct rows, sorted ascending.
pub fn pairwise_distances(data: &DataMatrix, metric: Metric) -> Result<SampleVector> {
    pairwise_distances_capped(data, metric, DEFAULT_ROW_CAP)
}

pub fn pairwise_distances_capped(
    data: &DataMatrix,
    metric: Metric,
    row_cap: usize,
) -> Result<SampleVector> {
    let n = data.n();
    if n < 2 {
        return Err(Error::TooFew {
            what: "rows to form a distance",
            required: 2,
            actual: n,
        });
    }
    if n > row_cap {
        return Err(Error::TooManyRows { rows: n, cap: row_cap });
    }
    let mut values: Vec<f64> = (0..n - 1)
        .into_par_iter()
        .flat_map_iter(|i| {
            let a = data.row(i);
            (i + 1..n).map(move |j| metric.distance(a, data.row(j)))
        })
        .collect();
    values.par_sort_unstable_by(f64::total_cmp);
    Ok(SampleVector { values })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistogramBins {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

impl HistogramBins {
    pub fn midpoints(&self) -> impl Iterator<Item = f64> + '_ {
        self.edges.windows(2).map(|w| 0.5 * (w[0] + w[1]))
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Equal-width histogram over `[min, max]`; the maximum lands in the last bin.
///
/// A zero-range sample is given a window of width 1 centred on its value.
pub fn histogram(sample: &[f64], bin_count: usize) -> Result<HistogramBins> {
    if bin_count == 0 {
        return Err(Error::invalid("bin_count", "must be at least 1"));
    }
    let (Some(&first), Some(&last)) = (sample.first(), sample.last()) else {
        return Err(Error::TooFew {
            what: "values for a histogram",
            required: 1,
            actual: 0,
        });
    };
    let (lo, hi) = sample
        .iter()
        .fold((first.min(last), first.max(last)), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 0.5, lo + 0.5) };
    let width = (hi - lo) / bin_count as f64;
    let mut edges: Vec<f64> = (0..bin_count).map(|k| lo + k as f64 * width).collect();
    edges.push(hi);
    let mut counts = vec![0u64; bin_count];
    for &v in sample {
        let k = (((v - lo) / width).floor() as usize).min(bin_count - 1);
        counts[k] += 1;
    }
    Ok(HistogramBins { edges, counts })
}
