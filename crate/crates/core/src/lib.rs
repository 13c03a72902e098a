//! Clusterability assessment: multimodality tests applied to the
//! one-dimensional sample of pairwise distances of a dataset.
//!
//! A dataset is reduced to its `n(n-1)/2` euclidean distances, and the dip
//! test and Silverman's critical-bandwidth test are run on that sample. A
//! p-value below the significance level reads as *clusterable*.
//!
//! ```
//! use clusterability::{assess_clusterability, bundled_dataset, AssessOptions};
//!
//! let data = bundled_dataset("faithful").unwrap();
//! let opts = AssessOptions { replicates: Some(99), ..AssessOptions::default() };
//! let report = assess_clusterability("faithful", &data, &opts).unwrap();
//! assert!(report.dip.unwrap().p_value < 0.05);
//! ```

pub mod cli;
pub mod dataset;
pub mod dip;
pub mod distances;
pub mod error;
pub mod pipeline;
pub mod rng;
pub mod silverman;
pub mod simulation;

pub use dataset::{
    bundled_dataset, bundled_names, ingest_file, ingest_reader, load_matrix, BundledInfo,
    DataMatrix, IngestOptions, Ingested, NonNumericPolicy, BUNDLED,
};
pub use dip::{dip_of_sorted, dip_pvalue, dip_statistic, dip_test, DipNull, DipResult, DipStatistic};
pub use distances::{histogram, pairwise_distances, HistogramBins, Metric, SampleVector};
pub use error::{Error, Result};
pub use rng::{derive_substream, RandomSeed, Significance};
pub use silverman::{
    count_modes, critical_bandwidth, kde, silverman_pvalue, silverman_test, BandwidthSearch,
    Calibration, KdeGrid, KdeMethod, SilvermanOptions, SilvermanResult,
};
pub use pipeline::{
    assess_clusterability, AssessOptions, ClusterabilityReport, TestKind, Timing, Verdict,
};
pub use simulation::{
    generate, render_table, run_batch, BatchOptions, PresetSet, SimulationSpec, SimulationSummary,
};
