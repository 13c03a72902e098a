//! Hartigan's dip statistic and its p-value under the uniform null.
//!
//! The statistic is `D = min_U sup_x |F_m(x) - U(x)|`, the sup-distance from
//! the empirical distribution function to the closest unimodal distribution
//! function. [`dip_statistic`] computes it with the greatest convex minorant /
//! least concave majorant iteration in linear time on a sorted sample. The
//! [`reference`] module solves the same minimisation by brute force and is
//! used to cross-check the fast path.

use rand::Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::Serialize;

use crate::distances::SampleVector;
use crate::error::{Error, Result};
use crate::rng::RandomSeed;

pub mod reference;

/// Default number of uniform-null replicates.
pub const DEFAULT_REPLICATES: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DipStatistic {
    pub dip: f64,
    /// Inclusive 0-based sample indices of the final modal interval.
    pub modal_interval: (usize, usize),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DipResult {
    pub dip: f64,
    pub p_value: f64,
    pub m: usize,
    pub replicates: usize,
    pub seed: RandomSeed,
    pub modal_interval: (usize, usize),
    pub sample_checksum: String,
}

/// Scratch buffers for [`dip_sorted_unchecked`]; reused across replicates.
#[derive(Debug, Default, Clone)]
struct DipScratch {
    mn: Vec<usize>,
    mj: Vec<usize>,
    gcm: Vec<usize>,
    lcm: Vec<usize>,
}

impl DipScratch {
    fn reset(&mut self, n: usize) {
        for v in [&mut self.mn, &mut self.mj, &mut self.gcm, &mut self.lcm] {
            v.clear();
            v.resize(n + 2, 0);
        }
    }
}

/// Dip of a sorted sample.
pub fn dip_statistic(sample: &SampleVector) -> Result<DipStatistic> {
    dip_of_sorted(sample.values())
}

/// Dip of a slice that must be sorted ascending.
pub fn dip_of_sorted(x: &[f64]) -> Result<DipStatistic> {
    if x.len() < 2 {
        return Err(Error::TooFew {
            what: "sample values for the dip",
            required: 2,
            actual: x.len(),
        });
    }
    if let Some(i) = x.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(i));
    }
    if let Some(i) = x.windows(2).position(|w| w[1] < w[0]) {
        return Err(Error::Unsorted(i + 1));
    }
    let mut scratch = DipScratch::default();
    let (dip, lo, hi) = dip_sorted_unchecked(x, &mut scratch);
    Ok(DipStatistic {
        dip,
        modal_interval: (lo, hi),
    })
}

// Works with 1-based indices into `x` (`at(i) == x[i - 1]`) and accumulates
// the dip in units of `2n * D`, dividing once at the end.
fn dip_sorted_unchecked(x: &[f64], s: &mut DipScratch) -> (f64, usize, usize) {
    let n = x.len();
    if n < 2 || x[0] == x[n - 1] {
        return (0.0, 0, n.saturating_sub(1));
    }
    let at = |i: usize| x[i - 1];
    s.reset(n);
    let DipScratch { mn, mj, gcm, lcm } = s;

    // Convex minorant: mn[j] is the previous hull vertex when the hull of
    // points 1..=j is built left to right.
    mn[1] = 1;
    for j in 2..=n {
        mn[j] = j - 1;
        loop {
            let mnj = mn[j];
            let mnmnj = mn[mnj];
            if mnj == 1
                || (at(j) - at(mnj)) * ((mnj - mnmnj) as f64)
                    < (at(mnj) - at(mnmnj)) * ((j - mnj) as f64)
            {
                break;
            }
            mn[j] = mnmnj;
        }
    }

    // Concave majorant, built right to left.
    mj[n] = n;
    for k in (1..n).rev() {
        mj[k] = k + 1;
        loop {
            let mjk = mj[k];
            let mjmjk = mj[mjk];
            if mjk == n
                || (at(k) - at(mjk)) * (mjk as f64 - mjmjk as f64)
                    < (at(mjk) - at(mjmjk)) * (k as f64 - mjk as f64)
            {
                break;
            }
            mj[k] = mjmjk;
        }
    }

    let mut low = 1usize;
    let mut high = n;
    let mut dip = 1.0f64;
    while low < high {
        // Change points of the GCM from high down to low.
        gcm[1] = high;
        let mut i = 1;
        while gcm[i] > low {
            gcm[i + 1] = mn[gcm[i]];
            i += 1;
        }
        let l_gcm = i;
        let mut ig = l_gcm;
        let mut ix = ig - 1;

        // Change points of the LCM from low up to high.
        lcm[1] = low;
        i = 1;
        while lcm[i] < high {
            lcm[i + 1] = mj[lcm[i]];
            i += 1;
        }
        let l_lcm = i;
        let mut ih = l_lcm;
        let mut iv = 2;

        // Largest vertical gap between GCM and LCM on [low, high].
        let mut d = 0.0f64;
        if l_gcm != 2 || l_lcm != 2 {
            loop {
                let gcmix = gcm[ix];
                let lcmiv = lcm[iv];
                if gcmix > lcmiv {
                    let gcmi1 = gcm[ix + 1];
                    let dx = (lcmiv as f64 - gcmi1 as f64 + 1.0)
                        - (at(lcmiv) - at(gcmi1)) * (gcmix as f64 - gcmi1 as f64)
                            / (at(gcmix) - at(gcmi1));
                    iv += 1;
                    if dx >= d {
                        d = dx;
                        ig = ix + 1;
                        ih = iv - 1;
                    }
                } else {
                    let lcmiv1 = lcm[iv - 1];
                    let dx = (at(gcmix) - at(lcmiv1)) * (lcmiv as f64 - lcmiv1 as f64)
                        / (at(lcmiv) - at(lcmiv1))
                        - (gcmix as f64 - lcmiv1 as f64 - 1.0);
                    ix -= 1;
                    if dx >= d {
                        d = dx;
                        ig = ix + 1;
                        ih = iv;
                    }
                }
                ix = ix.max(1);
                iv = iv.min(l_lcm);
                if gcm[ix] == lcm[iv] {
                    break;
                }
            }
        } else {
            d = 1.0;
        }

        if d < dip {
            break;
        }

        // Dip of the convex minorant left of the modal interval.
        let mut dip_l = 0.0f64;
        for j in ig..l_gcm {
            let mut max_t = 1.0f64;
            let (jb, je) = (gcm[j + 1], gcm[j]);
            if je - jb > 1 && at(je) != at(jb) {
                let c = (je - jb) as f64 / (at(je) - at(jb));
                for jj in jb..=je {
                    let t = (jj - jb + 1) as f64 - (at(jj) - at(jb)) * c;
                    max_t = max_t.max(t);
                }
            }
            dip_l = dip_l.max(max_t);
        }

        // Dip of the concave majorant right of it.
        let mut dip_u = 0.0f64;
        for j in ih..l_lcm {
            let mut max_t = 1.0f64;
            let (jb, je) = (lcm[j], lcm[j + 1]);
            if je - jb > 1 && at(je) != at(jb) {
                let c = (je - jb) as f64 / (at(je) - at(jb));
                for jj in jb..=je {
                    let t = (at(jj) - at(jb)) * c - (jj as f64 - jb as f64 - 1.0);
                    max_t = max_t.max(t);
                }
            }
            dip_u = dip_u.max(max_t);
        }

        dip = dip.max(dip_l.max(dip_u));

        if low == gcm[ig] && high == lcm[ih] {
            break;
        }
        low = gcm[ig];
        high = lcm[ih];
    }

    (dip / (2 * n) as f64, low - 1, high - 1)
}

/// Sorted dips of `replicates` uniform samples of size `m`.
///
/// Replicate `b` draws from `derive_substream(seed, b)`, so the distribution is
/// the same for any thread count. Build one of these to price many dips at
/// the same `(m, replicates, seed)`.
#[derive(Debug, Clone)]
pub struct DipNull {
    m: usize,
    seed: RandomSeed,
    dips: Vec<f64>,
}

impl DipNull {
    pub fn simulate(m: usize, replicates: usize, seed: RandomSeed) -> Result<Self> {
        if m < 4 {
            return Err(Error::TooFew {
                what: "sample values for a dip p-value",
                required: 4,
                actual: m,
            });
        }
        if replicates < 1 {
            return Err(Error::invalid("replicates", "must be at least 1"));
        }
        let mut dips: Vec<f64> = (0..replicates as u64)
            .into_par_iter()
            .map_init(
                || (DipScratch::default(), Vec::with_capacity(m)),
                |(scratch, buf), b| {
                    uniform_order_statistics(&mut seed.substream(b).stream(), m, buf);
                    dip_sorted_unchecked(buf, scratch).0
                },
            )
            .collect();
        dips.sort_unstable_by(f64::total_cmp);
        Ok(DipNull { m, seed, dips })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn seed(&self) -> RandomSeed {
        self.seed
    }

    pub fn replicates(&self) -> usize {
        self.dips.len()
    }

    pub fn dips(&self) -> &[f64] {
        &self.dips
    }

    /// `(1 + #{b : dip_b >= dip}) / (B + 1)`.
    pub fn p_value(&self, dip: f64) -> f64 {
        let below = self.dips.partition_point(|&d| d < dip);
        let at_least = self.dips.len() - below;
        (1 + at_least) as f64 / (self.dips.len() + 1) as f64
    }
}

// Partial sums of i.i.d. Exp(1) draws are a rescaling of the uniform order
// statistics, and the dip is scale invariant, so no division is needed.
fn uniform_order_statistics<R: Rng>(rng: &mut R, m: usize, out: &mut Vec<f64>) {
    out.clear();
    let mut acc = 0.0f64;
    for _ in 0..m {
        let e: f64 = rng.sample(Exp1);
        acc += e;
        out.push(acc);
    }
}

/// Monte Carlo p-value of `dip` for a sample of size `m`.
pub fn dip_pvalue(dip: f64, m: usize, replicates: usize, seed: RandomSeed) -> Result<f64> {
    if !(0.0..=0.25).contains(&dip) {
        return Err(Error::invalid("dip", format!("{dip} is outside [0, 0.25]")));
    }
    Ok(DipNull::simulate(m, replicates, seed)?.p_value(dip))
}

/// Dip statistic plus its p-value.
///
/// A sample whose values are all equal is a point mass, the most unimodal
/// distribution there is: it gets `dip = 0`, `p = 1` without bootstrapping.
pub fn dip_test(sample: &SampleVector, replicates: usize, seed: RandomSeed) -> Result<DipResult> {
    let m = sample.len();
    if m < 4 {
        return Err(Error::TooFew {
            what: "sample values for the dip test",
            required: 4,
            actual: m,
        });
    }
    if replicates < 1 {
        return Err(Error::invalid("replicates", "must be at least 1"));
    }
    let stat = dip_statistic(sample)?;
    let p_value = if sample[0] == sample[m - 1] {
        1.0
    } else {
        dip_pvalue(stat.dip, m, replicates, seed)?
    };
    Ok(DipResult {
        dip: stat.dip,
        p_value,
        m,
        replicates,
        seed,
        modal_interval: stat.modal_interval,
        sample_checksum: sample.checksum(),
    })
}
