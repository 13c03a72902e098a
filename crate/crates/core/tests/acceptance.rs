//! End-to-end acceptance run. Prints one `criterion N: PASS|FAIL` line per
//! criterion on stderr (bypassing output capture) and fails on any FAIL.
//!
//! The criteria share one lock so that the timing checks are not measured
//! while another criterion is loading the machine.

mod common;

use std::io::Write;
use std::process::Command;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use clusterability::dip::reference::dip_reference;
use clusterability::{
    assess_clusterability, bundled_dataset, dip_of_sorted, dip_test, pairwise_distances,
    silverman_pvalue, AssessOptions, DataMatrix, Metric, RandomSeed, SampleVector,
    SilvermanOptions, Verdict,
};
use proptest::test_runner::{Config, TestRunner};
use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

static SERIAL: Mutex<()> = Mutex::new(());

const BIN: &str = env!("CARGO_BIN_EXE_clusterability");

fn announce(n: u32, ok: bool, detail: &str) {
    let line = format!("criterion {n}: {} - {detail}\n", if ok { "PASS" } else { "FAIL" });
    let _ = std::io::stderr().write_all(line.as_bytes());
}

fn verdict(v: Option<Verdict>) -> &'static str {
    match v {
        Some(Verdict::Clusterable) => "clusterable",
        Some(Verdict::Unclusterable) => "unclusterable",
        None => "missing",
    }
}

// (name, dip p, silverman p) reference values.
const TABLE: [(&str, f64, f64); 9] = [
    ("iris", 0.0000, 0.0000),
    ("swiss", 0.0000, 0.0000),
    ("faithful", 0.0000, 0.0000),
    ("rivers", 0.2772, 0.0000),
    ("trees", 0.3460, 0.3235),
    ("USJudgeRatings", 0.9938, 0.7451),
    ("USArrests", 0.9394, 0.1897),
    ("attitude", 0.9040, 0.9449),
    ("cars", 0.6604, 0.9931),
];

type Row = (&'static str, f64, f64, Option<Verdict>, Option<Verdict>);

struct RealRun {
    elapsed: Duration,
    rows: Vec<Row>,
}

fn real_data() -> &'static RealRun {
    static RUN: std::sync::OnceLock<RealRun> = std::sync::OnceLock::new();
    RUN.get_or_init(|| {
        let clock = Instant::now();
        let opts = AssessOptions {
            replicates: Some(10_000),
            seed: RandomSeed(0),
            ..AssessOptions::default()
        };
        let rows = TABLE
            .iter()
            .map(|&(name, _, _)| {
                let r = assess_clusterability(name, &bundled_dataset(name).unwrap(), &opts).unwrap();
                let (pd, ps) = (r.dip.unwrap().p_value, r.silverman.unwrap().p_value);
                (name, pd, ps, r.verdict_dip, r.verdict_silverman)
            })
            .collect();
        RealRun {
            elapsed: clock.elapsed(),
            rows,
        }
    })
}

#[test]
fn criterion_1_real_data_verdicts() {
    let _guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let run = real_data();
    let mut wrong = Vec::new();
    for (&(name, dip, silv), row) in TABLE.iter().zip(&run.rows) {
        let want = |p: f64| if p < 0.05 { Verdict::Clusterable } else { Verdict::Unclusterable };
        if row.3 != Some(want(dip)) {
            wrong.push(format!("{name} dip {}", verdict(row.3)));
        }
        if row.4 != Some(want(silv)) {
            wrong.push(format!("{name} silverman {}", verdict(row.4)));
        }
    }
    let fast = run.elapsed < Duration::from_secs(300);
    let ok = wrong.is_empty() && fast;
    announce(
        1,
        ok,
        &format!(
            "{}/18 verdicts match, {:.0}s for nine datasets at B=10000 (budget 300s){}",
            18 - wrong.len(),
            run.elapsed.as_secs_f64(),
            if wrong.is_empty() { String::new() } else { format!("; wrong: {}", wrong.join(", ")) }
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_2_real_data_p_values() {
    let _guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let run = real_data();
    let mut worst_dip: f64 = 0.0;
    let mut worst_silv: f64 = 0.0;
    let mut table = String::new();
    for (&(name, dip, silv), row) in TABLE.iter().zip(&run.rows) {
        worst_dip = worst_dip.max((row.1 - dip).abs());
        worst_silv = worst_silv.max((row.2 - silv).abs());
        table.push_str(&format!(" {name}={:.4}/{:.4}", row.1, row.2));
    }
    let ok = worst_dip <= 0.08 && worst_silv <= 0.10;
    announce(
        2,
        ok,
        &format!("max |dip diff| {worst_dip:.4} (<= 0.08), max |silverman diff| {worst_silv:.4} (<= 0.10);{table}"),
    );
    assert!(ok);
}

#[test]
fn criterion_3_simulation_power_bands() {
    let _guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let clock = Instant::now();
    let out = Command::new(BIN)
        .args(["simulate", "--preset", "all", "--runs", "100", "--replicates", "500"])
        .output()
        .unwrap();
    let elapsed = clock.elapsed();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();

    let mut misses = Vec::new();
    let mut rows = 0;
    for line in text.lines().filter(|l| !l.starts_with('#')) {
        let f: Vec<&str> = line.split('\t').collect();
        let (id, dip, silv): (&str, f64, f64) = (f[0], f[2].parse().unwrap(), f[3].parse().unwrap());
        rows += 1;
        let inside = match id {
            "b" | "e" | "f" | "g" | "h" | "i" | "j" | "k" => dip >= 0.95 && silv >= 0.95,
            "c" | "l" => dip >= 0.90 && silv >= 0.95,
            "a" | "m" | "n" => dip <= 0.02 && silv <= 0.10,
            "o" | "p" => dip <= 0.05 && silv >= 0.90,
            "q" => dip <= 0.15 && silv >= 0.90,
            // "d" has reference proportions of 1.000 and 0.997.
            "d" => dip >= 0.95 && silv >= 0.95,
            _ => false,
        };
        if !inside {
            misses.push(format!("{id} ({dip:.2}, {silv:.2})"));
        }
    }
    let fast = elapsed < Duration::from_secs(15 * 60);
    let ok = rows == 17 && misses.is_empty() && fast;
    announce(
        3,
        ok,
        &format!(
            "{rows} presets, {} outside their band, {:.0}s (budget 900s){}",
            misses.len(),
            elapsed.as_secs_f64(),
            if misses.is_empty() { String::new() } else { format!("; misses: {}", misses.join(", ")) }
        ),
    );
    let _ = std::io::stderr().write_all(text.as_bytes());
    assert!(ok);
}

#[test]
fn criterion_4_dip_oracle_equivalence() {
    let _guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let mut rng = RandomSeed(4).stream();
    let mut worst: f64 = 0.0;
    let mut bad = 0;
    for i in 0..1000 {
        let m = 2 + i % 11;
        let mut x: Vec<f64> = (0..m)
            .map(|_| match i % 4 {
                0 => rng.random::<f64>(),
                1 => rng.sample::<f64, _>(StandardNormal),
                2 => Exp1.sample(&mut rng),
                _ => rng.sample::<f64, _>(StandardNormal) + if rng.random::<bool>() { 4.0 } else { 0.0 },
            })
            .collect();
        x.sort_by(f64::total_cmp);
        let fast = dip_of_sorted(&x).unwrap().dip;
        let slow = dip_reference(&x).unwrap();
        let diff = (fast - slow).abs();
        worst = worst.max(diff);
        if diff > 1e-12 {
            bad += 1;
        }
    }
    let ok = bad == 0;
    announce(4, ok, &format!("1000 samples of size 2..=12, {bad} disagreements, max |diff| {worst:.1e} (<= 1e-12)"));
    assert!(ok);
}

#[test]
fn criterion_5_property_suites() {
    let _guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let mut failures = Vec::new();
    let mut check = |name: &str, result: Result<(), String>| {
        if let Err(e) = result {
            failures.push(format!("{name}: {e}"));
        }
    };
    fn runner(cases: u32) -> TestRunner {
        TestRunner::new(Config {
            cases,
            failure_persistence: None,
            ..Config::default()
        })
    }
    use common::*;
    fn s<T: std::fmt::Debug>(r: Result<(), proptest::test_runner::TestError<T>>) -> Result<(), String> {
        r.map_err(|e| format!("{e}"))
    }
    check(
        "dip bounds",
        s(runner(500).run(&sample(400), |x| dip_bounds(&x))),
    );
    check(
        "dip affine invariance (exact)",
        s(runner(300).run(&(dyadic_sample(200), -6i32..7, -1000i64..1000), |(x, k, b)| {
            dip_affine_exact(&x, k, b)
        })),
    );
    check(
        "dip affine invariance (general)",
        s(runner(300).run(&(sample(200), 1e-3f64..1e3, -1e3f64..1e3), |(x, a, b)| {
            dip_affine_close(&x, a, b)
        })),
    );
    check(
        "kde normalisation",
        s(runner(300).run(&(sample(100), 2e-3f64..50.0), |(x, h)| kde_normalised(&x, h))),
    );
    check(
        "mode count monotone in h",
        s(runner(300).run(&mixture_sample(), |x| modes_monotone(&x))),
    );
    check(
        "h_crit scale equivariance",
        s(runner(200).run(&(mixture_sample(), 1e-3f64..1e3), |(x, a)| hcrit_scale_equivariant(&x, a))),
    );
    check(
        "h_crit bracketing",
        s(runner(300).run(&mixture_sample(), |x| hcrit_brackets(&x))),
    );
    check(
        "verdict consistency",
        s(runner(40).run(&(rows(), proptest::num::u64::ANY), |(r, seed)| verdicts_consistent(&r, seed))),
    );
    check(
        "alpha monotonicity",
        s(runner(40).run(&(rows(), proptest::num::u64::ANY), |(r, seed)| {
            verdicts_monotone_in_alpha(&r, seed)
        })),
    );
    let ok = failures.is_empty();
    announce(
        5,
        ok,
        &if ok {
            "9 property suites hold (dip bounds, dip affine exact/general, kde normalisation, mode monotonicity, h_crit equivariance, h_crit bracketing, verdict consistency, alpha monotonicity)".to_string()
        } else {
            failures.join("; ")
        },
    );
    assert!(ok);
}

#[test]
fn criterion_6_cli_determinism() {
    let _guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("blobs.csv");
    let mut text = String::from("x,y,label\n");
    for i in 0..40 {
        let t = i as f64 * 0.7;
        let off = if i % 2 == 0 { 0.0 } else { 12.0 };
        text.push_str(&format!("{},{},g{}\n", off + t.sin(), off + t.cos(), i % 2));
    }
    std::fs::write(&csv, text).unwrap();
    let csv = csv.to_str().unwrap().to_string();

    let commands: Vec<Vec<&str>> = vec![
        vec!["test", "trees", "--replicates", "300", "--seed", "17"],
        vec!["test", "iris", "--replicates", "200", "--format", "text", "--seed", "3"],
        vec!["test", &csv, "--replicates", "200", "--tests", "silverman"],
        vec!["simulate", "--preset", "c", "--runs", "4", "--replicates", "60", "--seed", "5"],
        vec!["simulate", "--preset", "q", "--runs", "3", "--replicates", "40", "--format", "json"],
        vec!["hist", "faithful", "--bins", "30"],
        vec!["hist", &csv, "--bins", "7"],
        vec!["datasets"],
    ];
    let run = |args: &[&str], threads: &str| {
        let out = Command::new(BIN).args(args).args(["--threads", threads]).output().unwrap();
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        out.stdout
    };
    let mut mismatched = Vec::new();
    for args in &commands {
        let a = run(args, "4");
        let b = run(args, "4");
        let c = run(args, "1");
        if a != b || a != c || a.is_empty() {
            mismatched.push(args.join(" "));
        }
    }
    let ok = mismatched.is_empty();
    announce(
        6,
        ok,
        &format!(
            "{} commands byte-identical across two runs at --threads 4 and one at --threads 1{}",
            commands.len() - mismatched.len(),
            if ok { String::new() } else { format!("; differing: {}", mismatched.join(" | ")) }
        ),
    );
    assert!(ok);
}

fn r_squared(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    sxy * sxy / (sxx * syy)
}

fn median_time(reps: usize, mut f: impl FnMut()) -> f64 {
    let mut t: Vec<f64> = (0..reps)
        .map(|_| {
            let c = Instant::now();
            f();
            c.elapsed().as_secs_f64()
        })
        .collect();
    t.sort_by(f64::total_cmp);
    t[reps / 2]
}

#[test]
fn criterion_7_complexity() {
    let _guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let mut rng = RandomSeed(7).stream();

    let sizes = [10_000usize, 100_000, 1_000_000];
    let mut dip_times = Vec::new();
    for &m in &sizes {
        let x = SampleVector::from_unsorted((0..m).map(|_| rng.random::<f64>()).collect()).unwrap();
        dip_times.push(median_time(5, || {
            std::hint::black_box(dip_of_sorted(x.values()).unwrap());
        }));
    }
    let ms: Vec<f64> = sizes.iter().map(|&m| m as f64).collect();
    let dip_r2 = r_squared(&ms, &dip_times);

    let ns = [100usize, 316, 1000];
    let mut dist_times = Vec::new();
    let mut counts_ok = true;
    for &n in &ns {
        let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..5).map(|_| rng.random::<f64>()).collect()).collect();
        let data = DataMatrix::from_rows(&rows).unwrap();
        counts_ok &= pairwise_distances(&data, Metric::Euclidean).unwrap().len() == n * (n - 1) / 2;
        dist_times.push(median_time(5, || {
            std::hint::black_box(pairwise_distances(&data, Metric::Euclidean).unwrap());
        }));
    }
    let n2: Vec<f64> = ns.iter().map(|&n| (n * n) as f64).collect();
    let dist_r2 = r_squared(&n2, &dist_times);

    let ok = dip_r2 >= 0.95 && dist_r2 >= 0.95 && counts_ok;
    announce(
        7,
        ok,
        &format!(
            "dip time vs m: R^2 {dip_r2:.4} ({:.2e}s, {:.2e}s, {:.2e}s); distances time vs n^2: R^2 {dist_r2:.4} ({:.2e}s, {:.2e}s, {:.2e}s); output sizes n(n-1)/2: {counts_ok}",
            dip_times[0], dip_times[1], dip_times[2], dist_times[0], dist_times[1], dist_times[2]
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_8_null_calibration() {
    let _guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let base = RandomSeed(8);

    let trials = 1000;
    let mut dip_rejections = 0;
    for t in 0..trials {
        let mut rng = base.substream(t).stream();
        let x = SampleVector::from_unsorted((0..200).map(|_| rng.random::<f64>()).collect()).unwrap();
        let r = dip_test(&x, 500, base.substream(t).substream(1)).unwrap();
        dip_rejections += usize::from(r.p_value < 0.05);
    }
    let dip_rate = dip_rejections as f64 / trials as f64;

    let trials = 500;
    let mut silv_rejections = 0;
    for t in 0..trials {
        let seed = base.substream(10_000 + t);
        let mut rng = seed.stream();
        let x: Vec<f64> = (0..200).map(|_| rng.sample(StandardNormal)).collect();
        let opts = SilvermanOptions {
            replicates: 500,
            seed: seed.substream(1),
            ..SilvermanOptions::default()
        };
        silv_rejections += usize::from(silverman_pvalue(&x, &opts).unwrap().p_value < 0.05);
    }
    let silv_rate = silv_rejections as f64 / trials as f64;

    let ok = dip_rate <= 0.07 && silv_rate <= 0.12;
    announce(
        8,
        ok,
        &format!(
            "dip rejects {dip_rate:.3} of 1000 uniform samples (<= 0.07); silverman rejects {silv_rate:.3} of 500 normal samples (<= 0.12); m = 200, B = 500"
        ),
    );
    assert!(ok);
}
