//! Dataset to verdict: distances, then the requested tests, then `p < alpha`.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;

use crate::dataset::DataMatrix;
use crate::dip::{self, DipResult};
use crate::distances::{pairwise_distances, Metric};
use crate::error::{Error, Result};
use crate::rng::{RandomSeed, Significance};
use crate::silverman::{self, Calibration, SilvermanOptions, SilvermanResult};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TestKind {
    Dip,
    Silverman,
}

impl TestKind {
    pub const ALL: [TestKind; 2] = [TestKind::Dip, TestKind::Silverman];

    pub fn name(self) -> &'static str {
        match self {
            TestKind::Dip => "dip",
            TestKind::Silverman => "silverman",
        }
    }
}

impl fmt::Display for TestKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TestKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "dip" => Ok(TestKind::Dip),
            "silverman" => Ok(TestKind::Silverman),
            other => Err(Error::invalid("tests", format!("unknown test `{other}` (expected dip or silverman)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Clusterable,
    Unclusterable,
}

impl Verdict {
    pub fn from_p_value(p_value: f64, alpha: Significance) -> Self {
        if alpha.rejects(p_value) {
            Verdict::Clusterable
        } else {
            Verdict::Unclusterable
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Clusterable => "clusterable",
            Verdict::Unclusterable => "unclusterable",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssessOptions {
    pub tests: Vec<TestKind>,
    pub alpha: Significance,
    pub seed: RandomSeed,
    /// Replicates for every requested test; `None` uses each test's default.
    pub replicates: Option<usize>,
    pub calibration: Calibration,
    /// Record per-stage wall time in the report (makes output non-deterministic).
    pub timing: bool,
}

impl Default for AssessOptions {
    fn default() -> Self {
        AssessOptions {
            tests: TestKind::ALL.to_vec(),
            alpha: Significance::default(),
            seed: RandomSeed::DEFAULT,
            replicates: None,
            calibration: Calibration::default(),
            timing: false,
        }
    }
}

/// Wall time per stage, in seconds.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Timing {
    pub distances: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dip: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub silverman: Option<f64>,
}

/// Field order here is the JSON field order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterabilityReport {
    pub schema_version: u32,
    pub dataset_id: String,
    pub n: usize,
    pub d: usize,
    pub m: usize,
    pub alpha: Significance,
    pub seed: RandomSeed,
    pub dip: Option<DipResult>,
    pub silverman: Option<SilvermanResult>,
    pub verdict_dip: Option<Verdict>,
    pub verdict_silverman: Option<Verdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
}

impl ClusterabilityReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report fields are always serializable")
    }

    /// One `name: p=<p>, <verdict>` line per test that was run.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if let (Some(r), Some(v)) = (&self.dip, self.verdict_dip) {
            out.push_str(&format!("dip: p={}, {v}\n", r.p_value));
        }
        if let (Some(r), Some(v)) = (&self.silverman, self.verdict_silverman) {
            out.push_str(&format!("silverman: p={}, {v}\n", r.p_value));
        }
        out
    }
}

/// Runs the requested tests on the pairwise distances of `data`.
///
/// The dip test draws from `derive_substream(seed, 0)` and Silverman's test
/// from `derive_substream(seed, 1)`, so dropping one test leaves the other's
/// result unchanged.
pub fn assess_clusterability(
    dataset_id: &str,
    data: &DataMatrix,
    opts: &AssessOptions,
) -> Result<ClusterabilityReport> {
    if opts.tests.is_empty() {
        return Err(Error::invalid("tests", "at least one test must be requested"));
    }
    if data.n() < 3 {
        return Err(Error::TooFew {
            what: "rows for a clusterability assessment",
            required: 3,
            actual: data.n(),
        });
    }
    let want = |t| opts.tests.contains(&t);

    let clock = Instant::now();
    let sample = pairwise_distances(data, Metric::Euclidean)?;
    let mut timing = Timing {
        distances: clock.elapsed().as_secs_f64(),
        ..Timing::default()
    };

    let dip = if want(TestKind::Dip) {
        let clock = Instant::now();
        let b = opts.replicates.unwrap_or(dip::DEFAULT_REPLICATES);
        let r = dip::dip_test(&sample, b, opts.seed.substream(0))?;
        timing.dip = Some(clock.elapsed().as_secs_f64());
        Some(r)
    } else {
        None
    };

    let silverman = if want(TestKind::Silverman) {
        let clock = Instant::now();
        let sopts = SilvermanOptions {
            replicates: opts.replicates.unwrap_or(silverman::DEFAULT_REPLICATES),
            seed: opts.seed.substream(1),
            calibration: opts.calibration,
            ..SilvermanOptions::default()
        };
        let r = silverman::silverman_test(&sample, &sopts)?;
        timing.silverman = Some(clock.elapsed().as_secs_f64());
        Some(r)
    } else {
        None
    };

    if let (Some(a), Some(b)) = (&dip, &silverman) {
        assert_eq!(
            a.sample_checksum, b.sample_checksum,
            "both tests must see the same distance sample"
        );
    }

    Ok(ClusterabilityReport {
        schema_version: SCHEMA_VERSION,
        dataset_id: dataset_id.to_string(),
        n: data.n(),
        d: data.d(),
        m: sample.len(),
        alpha: opts.alpha,
        seed: opts.seed,
        verdict_dip: dip.as_ref().map(|r| Verdict::from_p_value(r.p_value, opts.alpha)),
        verdict_silverman: silverman
            .as_ref()
            .map(|r| Verdict::from_p_value(r.p_value, opts.alpha)),
        dip,
        silverman,
        timing: opts.timing.then_some(timing),
    })
}
