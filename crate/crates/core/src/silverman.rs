//! Silverman's critical-bandwidth test for multimodality.
//!
//! A Gaussian kernel density estimate is evaluated on an equally spaced grid
//! spanning `[min - 4h, max + 4h]`. The critical bandwidth `h_crit` is the
//! smallest `h` whose estimate has at most `k` modes; with a Gaussian kernel
//! the mode count is non-increasing in `h`, so bisection finds it. The
//! p-value comes from a smoothed, variance-rescaled bootstrap at `h_crit`.
//!
//! All computations run on the sample mapped affinely onto `[0, 1]`, and
//! bandwidths are scaled back on the way out. This makes the test exactly
//! invariant to the units of the input.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::distances::SampleVector;
use crate::error::{Error, Result};
use crate::rng::RandomSeed;

pub const DEFAULT_GRID_SIZE: usize = 512;
pub const MIN_GRID_SIZE: usize = 16;
pub const DEFAULT_TOLERANCE: f64 = 1e-3;
pub const MAX_BISECTIONS: usize = 40;
pub const DEFAULT_REPLICATES: usize = 999;
/// `KdeMethod::Auto` evaluates the kernel sum directly up to this many points.
pub const DIRECT_KDE_MAX_POINTS: usize = 1024;

/// How the kernel sum is evaluated on the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum KdeMethod {
    /// Direct for small samples, binned above [`DIRECT_KDE_MAX_POINTS`].
    #[default]
    Auto,
    /// Exact `O(m * G)` sum over all points.
    Direct,
    /// Linear binning onto the grid, then a discrete convolution: `O(m + G^2)`.
    Binned,
}

impl KdeMethod {
    fn resolve(self, m: usize) -> KdeMethod {
        match self {
            KdeMethod::Auto if m <= DIRECT_KDE_MAX_POINTS => KdeMethod::Direct,
            KdeMethod::Auto => KdeMethod::Binned,
            other => other,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KdeGrid {
    pub points: Vec<f64>,
    pub density: Vec<f64>,
    pub bandwidth: f64,
}

impl KdeGrid {
    /// Trapezoidal integral of the density over the grid.
    pub fn integral(&self) -> f64 {
        self.points
            .windows(2)
            .zip(self.density.windows(2))
            .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1]))
            .sum()
    }

    pub fn modes(&self) -> usize {
        count_local_maxima(&self.density)
    }
}

/// Number of local maxima of a sequence, with runs of equal values collapsed
/// first. An end run counts when it is higher than its only neighbour; a
/// constant sequence has one maximum.
pub fn count_local_maxima(values: &[f64]) -> usize {
    let mut count = 0;
    let mut last_dir = 0i8;
    for w in values.windows(2) {
        let dir = if w[1] > w[0] {
            1
        } else if w[1] < w[0] {
            -1
        } else {
            continue;
        };
        if dir == -1 && last_dir != -1 {
            count += 1;
        }
        last_dir = dir;
    }
    if last_dir == 1 {
        count += 1;
    }
    count.max(1)
}

fn check_kde_args(sample: &[f64], h: f64, grid_size: usize) -> Result<()> {
    if sample.is_empty() {
        return Err(Error::TooFew {
            what: "sample values for a density estimate",
            required: 1,
            actual: 0,
        });
    }
    if let Some(i) = sample.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(i));
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::invalid("bandwidth", format!("{h} is not a positive finite number")));
    }
    if grid_size < MIN_GRID_SIZE {
        return Err(Error::invalid(
            "grid_size",
            format!("{grid_size} is below the minimum of {MIN_GRID_SIZE}"),
        ));
    }
    Ok(())
}

fn min_max(sample: &[f64]) -> (f64, f64) {
    sample
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}

/// Reusable buffers for density evaluation.
#[derive(Debug, Default, Clone)]
struct KdeScratch {
    density: Vec<f64>,
    weights: Vec<f64>,
    kernel: Vec<f64>,
}

impl KdeScratch {
    /// Fills `self.density` and returns the grid origin and spacing.
    fn evaluate(&mut self, sample: &[f64], h: f64, grid_size: usize, method: KdeMethod) -> (f64, f64) {
        let (min, max) = min_max(sample);
        let lo = min - 4.0 * h;
        let step = (max + 4.0 * h - lo) / (grid_size - 1) as f64;
        self.density.clear();
        self.density.resize(grid_size, 0.0);
        match method.resolve(sample.len()) {
            KdeMethod::Binned => self.binned(sample, h, lo, step),
            _ => self.direct(sample, h, lo, step),
        }
        let norm = 1.0 / (sample.len() as f64 * h * (2.0 * PI).sqrt());
        for v in &mut self.density {
            *v *= norm;
        }
        (lo, step)
    }

    // Walks outward from the grid point nearest each datum, updating the
    // Gaussian by multiplicative ratios:
    //   e(t + s) = e(t) * r,  r <- r * exp(-s^2)   with r = exp(-(t s + s^2 / 2)).
    fn direct(&mut self, sample: &[f64], h: f64, lo: f64, step: f64) {
        let g = self.density.len();
        let s = step / h;
        let q = (-s * s).exp();
        for &x in sample {
            let j0 = ((x - lo) / step).round().clamp(0.0, (g - 1) as f64) as usize;
            let t0 = (lo + j0 as f64 * step - x) / h;
            let e0 = (-0.5 * t0 * t0).exp();
            self.density[j0] += e0;

            let (mut e, mut r) = (e0, (-(t0 * s + 0.5 * s * s)).exp());
            for out in &mut self.density[j0 + 1..] {
                e *= r;
                r *= q;
                if e == 0.0 {
                    break;
                }
                *out += e;
            }
            let (mut e, mut r) = (e0, (t0 * s - 0.5 * s * s).exp());
            for out in self.density[..j0].iter_mut().rev() {
                e *= r;
                r *= q;
                if e == 0.0 {
                    break;
                }
                *out += e;
            }
        }
    }

    fn binned(&mut self, sample: &[f64], h: f64, lo: f64, step: f64) {
        let g = self.density.len();
        self.weights.clear();
        self.weights.resize(g, 0.0);
        for &x in sample {
            let pos = (x - lo) / step;
            let i = (pos.floor().max(0.0) as usize).min(g - 2);
            let frac = pos - i as f64;
            self.weights[i] += 1.0 - frac;
            self.weights[i + 1] += frac;
        }
        // kernel[t] = phi((t - (g - 1)) * step / h), unnormalised.
        self.kernel.clear();
        self.kernel.extend((0..2 * g - 1).map(|t| {
            let u = (t as f64 - (g - 1) as f64) * step / h;
            (-0.5 * u * u).exp()
        }));
        for (j, &w) in self.weights.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            let k = &self.kernel[g - 1 - j..2 * g - 1 - j];
            for (out, kv) in self.density.iter_mut().zip(k) {
                *out += w * kv;
            }
        }
    }

    fn modes(&mut self, sample: &[f64], h: f64, grid_size: usize, method: KdeMethod) -> usize {
        self.evaluate(sample, h, grid_size, method);
        count_local_maxima(&self.density)
    }
}

/// Gaussian kernel density estimate `f(x) = 1/(m h) sum phi((x - x_i) / h)` on
/// `grid_size` points spanning `[min - 4h, max + 4h]`.
pub fn kde(sample: &[f64], h: f64, grid_size: usize) -> Result<KdeGrid> {
    kde_with(sample, h, grid_size, KdeMethod::Auto)
}

pub fn kde_with(sample: &[f64], h: f64, grid_size: usize, method: KdeMethod) -> Result<KdeGrid> {
    check_kde_args(sample, h, grid_size)?;
    let mut scratch = KdeScratch::default();
    let (lo, step) = scratch.evaluate(sample, h, grid_size, method);
    Ok(KdeGrid {
        points: (0..grid_size).map(|k| lo + k as f64 * step).collect(),
        density: scratch.density,
        bandwidth: h,
    })
}

/// Number of modes of the density estimate at bandwidth `h`.
pub fn count_modes(sample: &[f64], h: f64, grid_size: usize) -> Result<usize> {
    count_modes_with(sample, h, grid_size, KdeMethod::Auto)
}

pub fn count_modes_with(sample: &[f64], h: f64, grid_size: usize, method: KdeMethod) -> Result<usize> {
    check_kde_args(sample, h, grid_size)?;
    Ok(KdeScratch::default().modes(sample, h, grid_size, method))
}

/// Settings for the critical-bandwidth bisection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandwidthSearch {
    pub null_modes: usize,
    /// Stop once the bracket's relative width `(hi - lo) / hi` is at most this.
    pub tolerance: f64,
    pub grid_size: usize,
    pub method: KdeMethod,
}

impl Default for BandwidthSearch {
    fn default() -> Self {
        BandwidthSearch {
            null_modes: 1,
            tolerance: DEFAULT_TOLERANCE,
            grid_size: DEFAULT_GRID_SIZE,
            method: KdeMethod::Auto,
        }
    }
}

impl BandwidthSearch {
    fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0 && self.tolerance < 0.1) {
            return Err(Error::invalid("tolerance", format!("{} is not in (0, 0.1)", self.tolerance)));
        }
        if self.null_modes < 1 {
            return Err(Error::invalid("null_modes", "must be at least 1"));
        }
        if self.grid_size < MIN_GRID_SIZE {
            return Err(Error::invalid("grid_size", format!("must be at least {MIN_GRID_SIZE}")));
        }
        Ok(())
    }

    /// Critical bandwidth of `sample`, in the sample's units.
    pub fn critical_bandwidth(&self, sample: &[f64]) -> Result<f64> {
        self.validate()?;
        let unit = UnitSample::new(sample)?;
        Ok(self.critical_unit(&unit.values, &mut KdeScratch::default()) * unit.range)
    }

    // Bisection on [range / 1e6, range] for data already mapped onto [0, 1].
    fn critical_unit(&self, x: &[f64], scratch: &mut KdeScratch) -> f64 {
        let mut modes = |h: f64| scratch.modes(x, h, self.grid_size, self.method);
        let (mut lo, mut hi) = (1e-6, 1.0);
        // One bandwidth equal to the range is always enough for one mode; the
        // loop only matters for null_modes > 1 callers with odd grids.
        let mut widen = 0;
        while modes(hi) > self.null_modes && widen < 20 {
            lo = hi;
            hi *= 2.0;
            widen += 1;
        }
        for _ in 0..MAX_BISECTIONS {
            if (hi - lo) / hi <= self.tolerance {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if modes(mid) > self.null_modes {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

/// Smallest bandwidth giving at most `null_modes` modes, found to relative
/// tolerance `tol`.
pub fn critical_bandwidth(sample: &[f64], null_modes: usize, tol: f64) -> Result<f64> {
    BandwidthSearch {
        null_modes,
        tolerance: tol,
        ..BandwidthSearch::default()
    }
    .critical_bandwidth(sample)
}

/// The sample mapped affinely onto `[0, 1]`.
struct UnitSample {
    values: Vec<f64>,
    range: f64,
}

impl UnitSample {
    fn new(sample: &[f64]) -> Result<Self> {
        if sample.len() < 2 {
            return Err(Error::TooFew {
                what: "sample values",
                required: 2,
                actual: sample.len(),
            });
        }
        if let Some(i) = sample.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        let (min, max) = min_max(sample);
        let range = max - min;
        if range <= 0.0 {
            return Err(Error::Degenerate);
        }
        Ok(UnitSample {
            values: sample.iter().map(|v| (v - min) / range).collect(),
            range,
        })
    }
}

/// Post-processing of the raw bootstrap p-value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Calibration {
    /// Report the bootstrap proportion as is.
    None,
    /// Map it through Hall and York's asymptotic level curve for `k = 1`.
    #[default]
    HallYork,
}

// Nominal bootstrap level -> asymptotic actual level of the test with one mode.
const HALL_YORK_NOMINAL: [f64; 27] = [
    0.0, 0.005, 0.010, 0.020, 0.030, 0.040, 0.050, 0.06, 0.07, 0.08, 0.09, 0.1, 0.11, 0.12, 0.13,
    0.14, 0.15, 0.16, 0.17, 0.18, 0.19, 0.2, 0.25, 0.30, 0.35, 0.40, 0.50,
];
const HALL_YORK_ACTUAL: [f64; 27] = [
    0.0, 0.0, 0.0, 0.002, 0.004, 0.006, 0.010, 0.012, 0.016, 0.021, 0.025, 0.032, 0.038, 0.043,
    0.050, 0.057, 0.062, 0.07, 0.079, 0.088, 0.094, 0.102, 0.149, 0.202, 0.252, 0.308, 0.423,
];

/// Natural cubic spline through `(xs, ys)`, linear beyond the last knot.
struct NaturalSpline<'a> {
    xs: &'a [f64],
    ys: &'a [f64],
    second: Vec<f64>,
}

impl<'a> NaturalSpline<'a> {
    fn new(xs: &'a [f64], ys: &'a [f64]) -> Self {
        let n = xs.len();
        let mut second = vec![0.0; n];
        // Tridiagonal solve for the interior second derivatives.
        let mut diag = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        for i in 1..n - 1 {
            let (h0, h1) = (xs[i] - xs[i - 1], xs[i + 1] - xs[i]);
            diag[i] = 2.0 * (h0 + h1);
            rhs[i] = 6.0 * ((ys[i + 1] - ys[i]) / h1 - (ys[i] - ys[i - 1]) / h0);
            if i > 1 {
                let w = h0 / diag[i - 1];
                diag[i] -= w * h0;
                rhs[i] -= w * rhs[i - 1];
            }
        }
        for i in (1..n - 1).rev() {
            let h1 = xs[i + 1] - xs[i];
            second[i] = (rhs[i] - h1 * second[i + 1]) / diag[i];
        }
        NaturalSpline { xs, ys, second }
    }

    fn eval(&self, x: f64) -> f64 {
        let (xs, ys, m) = (self.xs, self.ys, &self.second);
        let n = xs.len();
        if x >= xs[n - 1] {
            let h = xs[n - 1] - xs[n - 2];
            let slope = (ys[n - 1] - ys[n - 2]) / h + h * (m[n - 2] + 2.0 * m[n - 1]) / 6.0;
            return ys[n - 1] + slope * (x - xs[n - 1]);
        }
        let i = xs.partition_point(|&k| k <= x).clamp(1, n - 1) - 1;
        let h = xs[i + 1] - xs[i];
        let a = (xs[i + 1] - x) / h;
        let b = (x - xs[i]) / h;
        a * ys[i] + b * ys[i + 1] + ((a * a * a - a) * m[i] + (b * b * b - b) * m[i + 1]) * h * h / 6.0
    }
}

/// Hall-York calibrated p-value for a raw bootstrap proportion.
pub fn hall_york_adjust(raw: f64) -> f64 {
    if raw < 0.005 {
        return 0.0;
    }
    NaturalSpline::new(&HALL_YORK_NOMINAL, &HALL_YORK_ACTUAL)
        .eval(raw)
        .clamp(0.0, 1.0)
}

impl Calibration {
    pub fn apply(self, raw: f64) -> f64 {
        match self {
            Calibration::None => raw,
            Calibration::HallYork => hall_york_adjust(raw),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SilvermanOptions {
    pub replicates: usize,
    pub seed: RandomSeed,
    pub search: BandwidthSearch,
    pub calibration: Calibration,
}

impl Default for SilvermanOptions {
    fn default() -> Self {
        SilvermanOptions {
            replicates: DEFAULT_REPLICATES,
            seed: RandomSeed::DEFAULT,
            search: BandwidthSearch::default(),
            calibration: Calibration::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SilvermanResult {
    pub h_crit: f64,
    pub p_value: f64,
    /// Bootstrap proportion `(1 + rejections) / (B + 1)` before calibration.
    pub raw_p_value: f64,
    pub m: usize,
    pub replicates: usize,
    pub seed: RandomSeed,
    pub null_modes: usize,
    pub calibration: Calibration,
    pub sample_checksum: String,
}

/// Silverman's test on a distance sample.
pub fn silverman_test(sample: &SampleVector, opts: &SilvermanOptions) -> Result<SilvermanResult> {
    let mut result = silverman_pvalue(sample.values(), opts)?;
    result.sample_checksum = sample.checksum();
    Ok(result)
}

/// Critical bandwidth plus the smoothed-bootstrap p-value.
///
/// Replicate `b` draws `y` with replacement from the sample and sets
/// `z = mean + (y - mean + h_crit * eps) / sqrt(1 + h_crit^2 / var)` with
/// standard normal `eps`; it rejects when `z` has more than `null_modes` modes
/// at `h_crit`. Each replicate uses `derive_substream(seed, b)`.
pub fn silverman_pvalue(sample: &[f64], opts: &SilvermanOptions) -> Result<SilvermanResult> {
    let m = sample.len();
    if m < 4 {
        return Err(Error::TooFew {
            what: "sample values for the Silverman test",
            required: 4,
            actual: m,
        });
    }
    if opts.replicates < 1 {
        return Err(Error::invalid("replicates", "must be at least 1"));
    }
    opts.search.validate()?;
    let unit = UnitSample::new(sample)?;
    let x = &unit.values;
    let search = opts.search;
    let h = search.critical_unit(x, &mut KdeScratch::default());

    let mean = x.iter().sum::<f64>() / m as f64;
    let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (m - 1) as f64;
    let shrink = 1.0 / (1.0 + h * h / var).sqrt();

    let rejections: usize = (0..opts.replicates as u64)
        .into_par_iter()
        .map_init(
            || (KdeScratch::default(), Vec::with_capacity(m)),
            |(scratch, z), b| {
                let mut rng = opts.seed.substream(b).stream();
                z.clear();
                for _ in 0..m {
                    let y = x[rng.random_range(0..m)];
                    let eps: f64 = rng.sample(StandardNormal);
                    z.push(mean + shrink * (y - mean + h * eps));
                }
                usize::from(scratch.modes(z, h, search.grid_size, search.method) > search.null_modes)
            },
        )
        .sum();

    let raw = (1 + rejections) as f64 / (opts.replicates + 1) as f64;
    Ok(SilvermanResult {
        h_crit: h * unit.range,
        p_value: opts.calibration.apply(raw),
        raw_p_value: raw,
        m,
        replicates: opts.replicates,
        seed: opts.seed,
        null_modes: search.null_modes,
        calibration: opts.calibration,
        sample_checksum: String::new(),
    })
}
