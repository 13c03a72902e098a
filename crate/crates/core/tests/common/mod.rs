//! Property checks shared by the proptest suite and the acceptance run.
#![allow(dead_code)]

use clusterability::silverman::{count_modes, critical_bandwidth, kde, DEFAULT_GRID_SIZE};
use clusterability::{
    assess_clusterability, dip_of_sorted, AssessOptions, DataMatrix, RandomSeed, Significance,
    Verdict,
};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

pub const TOL: f64 = 1e-3;

/// Sorted samples with at least two distinct values, on varied scales.
pub fn sample(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    (2..=max_len, -3i32..4, -100.0f64..100.0).prop_flat_map(|(m, exp, shift)| {
        let scale = 10f64.powi(exp);
        prop::collection::vec(-1.0f64..1.0, m).prop_filter_map("needs two distinct values", move |v| {
            let mut v: Vec<f64> = v.into_iter().map(|x| shift + scale * x).collect();
            v.sort_by(f64::total_cmp);
            (v[0] < v[v.len() - 1]).then_some(v)
        })
    })
}

/// Samples of multiples of 1/1024 with magnitude below 2^20: shifting by an
/// integer and scaling by a power of two are exact on these.
pub fn dyadic_sample(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-(1i64 << 29)..(1i64 << 29), 2..=max_len).prop_filter_map("two distinct", |v| {
        let mut v: Vec<f64> = v.into_iter().map(|k| k as f64 / 1024.0).collect();
        v.sort_by(f64::total_cmp);
        (v[0] < v[v.len() - 1]).then_some(v)
    })
}

/// Two-group mixtures: a mix of unimodal and clearly bimodal samples.
pub fn mixture_sample() -> impl Strategy<Value = Vec<f64>> {
    (
        prop::collection::vec(-1.0f64..1.0, 5..40),
        prop::collection::vec(-1.0f64..1.0, 0..40),
        0.0f64..8.0,
    )
        .prop_map(|(a, b, gap)| {
            let mut v: Vec<f64> = a.into_iter().chain(b.into_iter().map(|x| x + gap)).collect();
            v.sort_by(f64::total_cmp);
            v
        })
        .prop_filter("two distinct values", |v| v[0] < v[v.len() - 1])
}

pub fn dip_bounds(x: &[f64]) -> Result<(), TestCaseError> {
    let m = x.len() as f64;
    let d = dip_of_sorted(x).unwrap().dip;
    prop_assert!(d >= 1.0 / (2.0 * m) * (1.0 - 1e-15), "dip {d} below 1/(2m) for m={m}");
    prop_assert!(d <= 0.25, "dip {d} above 1/4");
    Ok(())
}

/// Exact invariance where the affine map itself is exact.
pub fn dip_affine_exact(x: &[f64], log2_scale: i32, shift: i64) -> Result<(), TestCaseError> {
    let a = 2f64.powi(log2_scale);
    let y: Vec<f64> = x.iter().map(|v| a * v + shift as f64).collect();
    prop_assert_eq!(dip_of_sorted(x).unwrap().dip, dip_of_sorted(&y).unwrap().dip);
    Ok(())
}

/// Any positive affine map, up to rounding of the mapped values. Rounding
/// moves each value by about `eps * |v|`, which is large next to the range
/// when the sample sits far from zero, so the tolerance grows with
/// `max |v| / range`.
pub fn dip_affine_close(x: &[f64], a: f64, b: f64) -> Result<(), TestCaseError> {
    let y: Vec<f64> = x.iter().map(|v| a * v + b).collect();
    let cond = |v: &[f64]| v[0].abs().max(v[v.len() - 1].abs()) / (v[v.len() - 1] - v[0]);
    let tol = 1e-12 * cond(x).max(cond(&y)).max(1.0);
    let (dx, dy) = (dip_of_sorted(x).unwrap().dip, dip_of_sorted(&y).unwrap().dip);
    prop_assert!((dx - dy).abs() <= tol, "dip {dx} vs {dy} after x -> {a} x + {b}");
    Ok(())
}

/// `h` is given relative to the sample range; the grid resolves kernels down
/// to about range / 1000.
pub fn kde_normalised(x: &[f64], h_rel: f64) -> Result<(), TestCaseError> {
    let range = x[x.len() - 1] - x[0];
    let h = h_rel * range;
    let grid = kde(x, h, DEFAULT_GRID_SIZE).unwrap();
    prop_assert!(grid.density.iter().all(|&f| f >= 0.0));
    let total = grid.integral();
    prop_assert!((0.99..=1.01).contains(&total), "integral {total} at h = {h}");
    Ok(())
}

/// Non-increasing mode count over 24 log-spaced bandwidths in
/// `[range / 50, 10 * range]`.
pub fn modes_monotone(x: &[f64]) -> Result<(), TestCaseError> {
    let range = x[x.len() - 1] - x[0];
    let steps = 24;
    let mut prev = usize::MAX;
    for s in 0..steps {
        let h = range / 50.0 * 500f64.powf(s as f64 / (steps - 1) as f64);
        let k = count_modes(x, h, DEFAULT_GRID_SIZE).unwrap();
        prop_assert!(k <= prev, "{k} modes at h = {h} after {prev} at a smaller h");
        prev = k;
    }
    prop_assert_eq!(prev, 1);
    Ok(())
}

pub fn hcrit_scale_equivariant(x: &[f64], a: f64) -> Result<(), TestCaseError> {
    let h0 = critical_bandwidth(x, 1, TOL).unwrap();
    let y: Vec<f64> = x.iter().map(|v| a * v).collect();
    let h1 = critical_bandwidth(&y, 1, TOL).unwrap();
    prop_assert!((h1 - a * h0).abs() <= TOL * a * h0, "h_crit {h1} vs {a} * {h0}");
    Ok(())
}

pub fn hcrit_brackets(x: &[f64]) -> Result<(), TestCaseError> {
    let h = critical_bandwidth(x, 1, TOL).unwrap();
    let above = count_modes(x, h * (1.0 + 2.0 * TOL), DEFAULT_GRID_SIZE).unwrap();
    let below = count_modes(x, h * (1.0 - 2.0 * TOL), DEFAULT_GRID_SIZE).unwrap();
    prop_assert!(above <= 1, "{above} modes just above h_crit = {h}");
    prop_assert!(below > 1, "{below} modes just below h_crit = {h}");
    Ok(())
}

fn small_report(rows: &[Vec<f64>], seed: u64) -> clusterability::ClusterabilityReport {
    let data = DataMatrix::from_rows(rows).unwrap();
    let opts = AssessOptions {
        replicates: Some(49),
        seed: RandomSeed(seed),
        ..AssessOptions::default()
    };
    assess_clusterability("prop", &data, &opts).unwrap()
}

pub fn rows() -> impl Strategy<Value = Vec<Vec<f64>>> {
    (0.0f64..6.0, 2usize..4).prop_flat_map(|(gap, d)| {
        prop::collection::vec(prop::collection::vec(-1.0f64..1.0, d), 5..14).prop_map(move |mut rows| {
            let half = rows.len() / 2;
            for r in rows.iter_mut().take(half) {
                r[0] += gap;
            }
            rows
        })
    })
}

pub fn verdicts_consistent(rows: &[Vec<f64>], seed: u64) -> Result<(), TestCaseError> {
    let r = small_report(rows, seed);
    let alpha = r.alpha.alpha();
    let dip = r.dip.as_ref().unwrap().p_value;
    let silverman = r.silverman.as_ref().unwrap().p_value;
    prop_assert_eq!(r.verdict_dip == Some(Verdict::Clusterable), dip < alpha);
    prop_assert_eq!(r.verdict_silverman == Some(Verdict::Clusterable), silverman < alpha);
    prop_assert_eq!(r.m, rows.len() * (rows.len() - 1) / 2);
    Ok(())
}

pub fn verdicts_monotone_in_alpha(rows: &[Vec<f64>], seed: u64) -> Result<(), TestCaseError> {
    let r = small_report(rows, seed);
    let ps = [r.dip.unwrap().p_value, r.silverman.unwrap().p_value];
    for p in ps {
        let mut seen_clusterable = false;
        for i in 1..100 {
            let alpha = Significance::new(i as f64 / 100.0).unwrap();
            let clusterable = Verdict::from_p_value(p, alpha) == Verdict::Clusterable;
            prop_assert!(!seen_clusterable || clusterable, "verdict flipped back at alpha {}", alpha.alpha());
            seen_clusterable |= clusterable;
        }
    }
    Ok(())
}
