//! Gaussian-mixture generators for the seventeen benchmark families and a
//! batch harness that records how often each test calls a dataset clusterable.
//!
//! Family parameters live in a JSON preset file (`data/presets.json` is
//! bundled). Every number in it carries a provenance tag, `paper` or
//! `calibrated`.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::DataMatrix;
use crate::error::{Error, Result};
use crate::pipeline::{assess_clusterability, AssessOptions, TestKind, Verdict};
use crate::rng::{RandomSeed, Significance};
use crate::silverman::Calibration;

const BUNDLED_PRESETS: &str = include_str!("../data/presets.json");

pub const DEFAULT_RUNS: usize = 100;
pub const DEFAULT_REPLICATES: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Paper,
    Calibrated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tagged<T> {
    pub value: T,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ComponentEntry {
    mean: Tagged<Vec<f64>>,
    /// Per-axis standard deviations; the covariance is `diag(sd^2)`.
    sd: Tagged<Vec<f64>>,
    size: Tagged<usize>,
}

/// An outlier at `mean + distance_sd * sd (*) direction` of one component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutlierEntry {
    component: usize,
    direction: Tagged<Vec<f64>>,
    distance_sd: Tagged<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PresetEntry {
    id: String,
    description: String,
    components: Vec<ComponentEntry>,
    #[serde(default)]
    outliers: Vec<OutlierEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PresetFile {
    version: u32,
    presets: Vec<PresetEntry>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub mean: Vec<f64>,
    /// `d x d`, symmetric positive semidefinite.
    pub covariance: Vec<Vec<f64>>,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationSpec {
    pub id: String,
    pub description: String,
    pub d: usize,
    pub components: Vec<Component>,
    /// Fixed points appended after the Gaussian draws.
    pub outliers: Vec<Vec<f64>>,
}

impl SimulationSpec {
    pub fn total_points(&self) -> usize {
        self.components.iter().map(|c| c.size).sum::<usize>() + self.outliers.len()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |message: String| Error::InvalidSpec {
            id: self.id.clone(),
            message,
        };
        if self.d == 0 {
            return Err(bad("dimension must be positive".into()));
        }
        if self.components.is_empty() {
            return Err(bad("at least one component is required".into()));
        }
        for (k, c) in self.components.iter().enumerate() {
            if c.size == 0 {
                return Err(bad(format!("component {k} has size 0")));
            }
            if c.mean.len() != self.d {
                return Err(bad(format!("component {k} mean has length {}, expected {}", c.mean.len(), self.d)));
            }
            if c.covariance.len() != self.d || c.covariance.iter().any(|r| r.len() != self.d) {
                return Err(bad(format!("component {k} covariance is not {0}x{0}", self.d)));
            }
            let finite = c.mean.iter().chain(c.covariance.iter().flatten()).all(|v| v.is_finite());
            if !finite {
                return Err(bad(format!("component {k} has a non-finite parameter")));
            }
        }
        for (k, o) in self.outliers.iter().enumerate() {
            if o.len() != self.d || o.iter().any(|v| !v.is_finite()) {
                return Err(bad(format!("outlier {k} is not a finite {}-vector", self.d)));
            }
        }
        if self.total_points() < 4 {
            return Err(bad(format!("{} points in total; at least 4 are needed", self.total_points())));
        }
        Ok(())
    }
}

impl PresetEntry {
    fn into_spec(self) -> Result<SimulationSpec> {
        let bad = |message: String| Error::InvalidSpec {
            id: self.id.clone(),
            message,
        };
        let d = self.components.first().map_or(0, |c| c.mean.value.len());
        let mut components = Vec::with_capacity(self.components.len());
        for (k, c) in self.components.iter().enumerate() {
            if c.sd.value.len() != d {
                return Err(bad(format!("component {k} sd has length {}, expected {d}", c.sd.value.len())));
            }
            if c.sd.value.iter().any(|s| s.is_nan() || *s < 0.0) {
                return Err(bad(format!("component {k} has a negative or NaN sd")));
            }
            let covariance = (0..d)
                .map(|i| (0..d).map(|j| if i == j { c.sd.value[i].powi(2) } else { 0.0 }).collect())
                .collect();
            components.push(Component {
                mean: c.mean.value.clone(),
                covariance,
                size: c.size.value,
            });
        }
        let mut outliers = Vec::with_capacity(self.outliers.len());
        for (k, o) in self.outliers.iter().enumerate() {
            let Some(base) = self.components.get(o.component) else {
                return Err(bad(format!("outlier {k} refers to missing component {}", o.component)));
            };
            let dir = &o.direction.value;
            let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
            if dir.len() != d || norm.is_nan() || norm <= 0.0 {
                return Err(bad(format!("outlier {k} direction must be a nonzero {d}-vector")));
            }
            outliers.push(
                (0..d)
                    .map(|i| base.mean.value[i] + o.distance_sd.value * base.sd.value[i] * dir[i] / norm)
                    .collect(),
            );
        }
        let spec = SimulationSpec {
            id: self.id,
            description: self.description,
            d,
            components,
            outliers,
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// The seventeen families, in file order.
#[derive(Debug, Clone, PartialEq)]
pub struct PresetSet {
    specs: Vec<SimulationSpec>,
}

impl PresetSet {
    /// The presets shipped with the crate.
    pub fn bundled() -> Self {
        Self::from_json(BUNDLED_PRESETS).expect("bundled preset file is valid")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: PresetFile = serde_json::from_str(text).map_err(|e| Error::PresetFile(e.to_string()))?;
        if file.version != 1 {
            return Err(Error::PresetFile(format!("unsupported version {}", file.version)));
        }
        let specs = file
            .presets
            .into_iter()
            .map(PresetEntry::into_spec)
            .collect::<Result<Vec<_>>>()?;
        for (i, s) in specs.iter().enumerate() {
            if specs[..i].iter().any(|t| t.id == s.id) {
                return Err(Error::PresetFile(format!("duplicate preset id `{}`", s.id)));
            }
        }
        Ok(PresetSet { specs })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| {
            if source.kind() == std::io::ErrorKind::NotFound {
                Error::FileNotFound(path.to_path_buf())
            } else {
                Error::Io {
                    path: path.to_path_buf(),
                    source,
                }
            }
        })?;
        Self::from_json(&text)
    }

    pub fn get(&self, id: &str) -> Result<&SimulationSpec> {
        self.specs
            .iter()
            .find(|s| s.id == id)
            .ok_or_else(|| Error::UnknownPreset(id.to_string()))
    }

    pub fn specs(&self) -> &[SimulationSpec] {
        &self.specs
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.specs.iter().map(|s| s.id.as_str())
    }
}

/// Lower-triangular `L` with `L L^T = a`. Zero pivots are allowed so that
/// singular (semidefinite) covariances work.
fn cholesky(a: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let d = a.len();
    let scale = (0..d).map(|i| a[i][i].abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let eps = 1e-12 * scale;
    let mut l = vec![vec![0.0; d]; d];
    for i in 0..d {
        for j in 0..=i {
            if (a[i][j] - a[j][i]).abs() > eps {
                return None;
            }
            let s = a[i][j] - (0..j).map(|k| l[i][k] * l[j][k]).sum::<f64>();
            if i == j {
                if s < -eps {
                    return None;
                }
                l[i][i] = s.max(0.0).sqrt();
            } else if l[j][j] > 0.0 {
                l[i][j] = s / l[j][j];
            } else if s.abs() > eps {
                return None;
            }
        }
    }
    Some(l)
}

/// Draws one dataset: each component's Gaussian points, then the outliers,
/// with the row order shuffled.
pub fn generate(spec: &SimulationSpec, seed: RandomSeed) -> Result<DataMatrix> {
    spec.validate()?;
    let d = spec.d;
    let factors = spec
        .components
        .iter()
        .enumerate()
        .map(|(k, c)| {
            cholesky(&c.covariance).ok_or_else(|| Error::InvalidSpec {
                id: spec.id.clone(),
                message: format!("component {k} covariance is not symmetric positive semidefinite"),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rng = seed.stream();
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(spec.total_points());
    let mut z = vec![0.0; d];
    for (c, l) in spec.components.iter().zip(&factors) {
        for _ in 0..c.size {
            for v in z.iter_mut() {
                *v = rng.sample(StandardNormal);
            }
            rows.push(
                (0..d)
                    .map(|i| c.mean[i] + (0..=i).map(|k| l[i][k] * z[k]).sum::<f64>())
                    .collect(),
            );
        }
    }
    rows.extend(spec.outliers.iter().cloned());
    rows.shuffle(&mut rng);
    DataMatrix::from_rows(&rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchOptions {
    pub runs: usize,
    pub tests: Vec<TestKind>,
    pub alpha: Significance,
    pub seed: RandomSeed,
    pub replicates: usize,
    pub calibration: Calibration,
}

impl Default for BatchOptions {
    fn default() -> Self {
        BatchOptions {
            runs: DEFAULT_RUNS,
            tests: TestKind::ALL.to_vec(),
            alpha: Significance::default(),
            seed: RandomSeed::DEFAULT,
            replicates: DEFAULT_REPLICATES,
            calibration: Calibration::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationSummary {
    pub id: String,
    pub runs: usize,
    pub proportion_dip: Option<f64>,
    pub proportion_silverman: Option<f64>,
    pub seed: RandomSeed,
    pub replicates: usize,
}

/// Generates `runs` datasets and tests each one.
///
/// Run `r` uses `s = derive_substream(seed, r)`: the data come from
/// `derive_substream(s, 0)` and the tests from `derive_substream(s, 1)`.
pub fn run_batch(spec: &SimulationSpec, opts: &BatchOptions) -> Result<SimulationSummary> {
    if opts.runs < 1 {
        return Err(Error::invalid("runs", "must be at least 1"));
    }
    spec.validate()?;
    let verdicts = (0..opts.runs as u64)
        .into_par_iter()
        .map(|r| {
            let run = opts.seed.substream(r);
            let data = generate(spec, run.substream(0))?;
            let assess = AssessOptions {
                tests: opts.tests.clone(),
                alpha: opts.alpha,
                seed: run.substream(1),
                replicates: Some(opts.replicates),
                calibration: opts.calibration,
                timing: false,
            };
            let report = assess_clusterability(&spec.id, &data, &assess)?;
            Ok((report.verdict_dip, report.verdict_silverman))
        })
        .collect::<Result<Vec<_>>>()?;
    type Pair = (Option<Verdict>, Option<Verdict>);
    let proportion = |pick: fn(&Pair) -> Option<Verdict>| {
        let hits: Vec<Verdict> = verdicts.iter().filter_map(pick).collect();
        (!hits.is_empty()).then(|| {
            hits.iter().filter(|v| **v == Verdict::Clusterable).count() as f64 / opts.runs as f64
        })
    };
    Ok(SimulationSummary {
        id: spec.id.clone(),
        runs: opts.runs,
        proportion_dip: proportion(|v| v.0),
        proportion_silverman: proportion(|v| v.1),
        seed: opts.seed,
        replicates: opts.replicates,
    })
}

/// Tab-separated table: a `#` header line, then one row per summary.
pub fn render_table(rows: &[SimulationSummary]) -> String {
    let cell = |p: Option<f64>| p.map_or_else(|| "-".to_string(), |p| format!("{p:.3}"));
    let mut out = String::from("#id\truns\tdip\tsilverman\n");
    for r in rows {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\n",
            r.id,
            r.runs,
            cell(r.proportion_dip),
            cell(r.proportion_silverman)
        ));
    }
    out
}
