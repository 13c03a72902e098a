//! Command-line front end. Data goes to stdout, diagnostics to stderr.
//!
//! Exit codes: 0 success, 1 dip verdict unclusterable (only with
//! `--exit-on-unclusterable`), 2 usage, 3 data, 4 internal.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::dataset::{bundled_dataset, ingest_file, DataMatrix, IngestOptions, BUNDLED};
use crate::distances::{histogram, pairwise_distances, Metric};
use crate::error::Error;
use crate::pipeline::{assess_clusterability, AssessOptions, TestKind, Verdict};
use crate::rng::{RandomSeed, Significance};
use crate::silverman::Calibration;
use crate::simulation::{self, render_table, run_batch, BatchOptions, PresetSet};

pub const EXIT_OK: u8 = 0;
pub const EXIT_UNCLUSTERABLE: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_DATA: u8 = 3;
pub const EXIT_INTERNAL: u8 = 4;

#[derive(Debug, Parser)]
#[command(name = "clusterability", version, about = "Clusterability tests on pairwise distances")]
struct Cli {
    /// Worker threads; 0 uses every core. Never changes the output.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the dip and/or Silverman test on a dataset's pairwise distances.
    Test(TestArgs),
    /// Estimate how often each test calls the benchmark families clusterable.
    Simulate(SimulateArgs),
    /// Histogram of pairwise distances as `midpoint<TAB>count` rows.
    Hist(HistArgs),
    /// List the bundled datasets as `name<TAB>n<TAB>d`.
    Datasets,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CalibrationArg {
    HallYork,
    None,
}

impl From<CalibrationArg> for Calibration {
    fn from(c: CalibrationArg) -> Self {
        match c {
            CalibrationArg::HallYork => Calibration::HallYork,
            CalibrationArg::None => Calibration::None,
        }
    }
}

#[derive(Debug, Args)]
struct InputArgs {
    /// Bundled dataset name, or a path to a delimited text file.
    input: String,

    /// Field delimiter for file input.
    #[arg(long, default_value_t = ',')]
    delimiter: char,
}

#[derive(Debug, Args)]
struct TestArgs {
    #[command(flatten)]
    input: InputArgs,

    #[arg(long, value_delimiter = ',', default_value = "dip,silverman", value_parser = parse_test)]
    tests: Vec<TestKind>,

    #[arg(long, default_value = "0.05", value_parser = parse_alpha)]
    alpha: Significance,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Bootstrap replicates per test [default: 2000 dip, 999 silverman].
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    replicates: Option<u64>,

    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Silverman p-value calibration.
    #[arg(long, value_enum, default_value_t = CalibrationArg::HallYork)]
    calibration: CalibrationArg,

    /// Exit with status 1 when the dip verdict is unclusterable.
    #[arg(long)]
    exit_on_unclusterable: bool,

    /// Include per-stage wall times in the JSON report.
    #[arg(long)]
    timing: bool,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Family id (a..q) or `all`.
    #[arg(long, default_value = "all")]
    preset: String,

    #[arg(long, default_value_t = simulation::DEFAULT_RUNS as u64, value_parser = clap::value_parser!(u64).range(1..))]
    runs: u64,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    #[arg(long, default_value_t = simulation::DEFAULT_REPLICATES as u64, value_parser = clap::value_parser!(u64).range(1..))]
    replicates: u64,

    #[arg(long, value_delimiter = ',', default_value = "dip,silverman", value_parser = parse_test)]
    tests: Vec<TestKind>,

    #[arg(long, default_value = "0.05", value_parser = parse_alpha)]
    alpha: Significance,

    #[arg(long, value_enum, default_value_t = CalibrationArg::HallYork)]
    calibration: CalibrationArg,

    /// Preset parameter file [default: the bundled one].
    #[arg(long)]
    presets: Option<PathBuf>,

    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Debug, Args)]
struct HistArgs {
    #[command(flatten)]
    input: InputArgs,

    #[arg(long, default_value_t = 30, value_parser = clap::value_parser!(u64).range(1..))]
    bins: u64,
}

fn parse_test(s: &str) -> Result<TestKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_alpha(s: &str) -> Result<Significance, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    Significance::new(v).map_err(|e| e.to_string())
}

/// Exit status for a library error.
pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidParameter { .. } | Error::InvalidDelimiter(_) | Error::UnknownPreset(_) => EXIT_USAGE,
        Error::FileNotFound(_)
        | Error::Io { .. }
        | Error::Parse { .. }
        | Error::NonNumericColumn(_)
        | Error::MissingValue { .. }
        | Error::NoNumericColumns
        | Error::NoRows
        | Error::UnknownDataset { .. }
        | Error::TooFew { .. }
        | Error::TooManyRows { .. }
        | Error::NonFinite(_)
        | Error::Degenerate
        | Error::InvalidSpec { .. }
        | Error::PresetFile(_) => EXIT_DATA,
        Error::Unsorted(_) => EXIT_INTERNAL,
    }
}

fn load_input(input: &InputArgs, warnings: &mut Vec<String>) -> Result<DataMatrix, Error> {
    if BUNDLED.iter().any(|b| b.name == input.input) {
        return bundled_dataset(&input.input);
    }
    let opts = IngestOptions {
        delimiter: input.delimiter,
        ..IngestOptions::default()
    };
    let ingested = ingest_file(&input.input, &opts)?;
    if !ingested.dropped_columns.is_empty() {
        warnings.push(format!(
            "warning: dropped non-numeric columns: {}",
            ingested.dropped_columns.join(", ")
        ));
    }
    Ok(ingested.matrix)
}

enum Outcome {
    Done,
    Unclusterable,
}

fn run_command(cmd: Command, warnings: &mut Vec<String>) -> Result<(String, Outcome), Error> {
    let text = match cmd {
        Command::Datasets => BUNDLED
            .iter()
            .map(|b| format!("{}\t{}\t{}\n", b.name, b.n, b.d))
            .collect::<String>(),
        Command::Hist(args) => {
            let data = load_input(&args.input, warnings)?;
            let sample = pairwise_distances(&data, Metric::Euclidean)?;
            let bins = histogram(&sample, args.bins as usize)?;
            bins.midpoints()
                .zip(&bins.counts)
                .map(|(x, c)| format!("{x}\t{c}\n"))
                .collect()
        }
        Command::Test(args) => {
            let data = load_input(&args.input, warnings)?;
            let opts = AssessOptions {
                tests: args.tests,
                alpha: args.alpha,
                seed: RandomSeed(args.seed),
                replicates: args.replicates.map(|b| b as usize),
                calibration: args.calibration.into(),
                timing: args.timing,
            };
            let report = assess_clusterability(&args.input.input, &data, &opts)?;
            let body = match args.format {
                Format::Json => report.to_json() + "\n",
                Format::Text => report.to_text(),
            };
            let unclusterable = report.verdict_dip == Some(Verdict::Unclusterable);
            let outcome = if args.exit_on_unclusterable && unclusterable {
                Outcome::Unclusterable
            } else {
                Outcome::Done
            };
            return Ok((body, outcome));
        }
        Command::Simulate(args) => {
            let set = match &args.presets {
                Some(path) => PresetSet::load(path)?,
                None => PresetSet::bundled(),
            };
            let specs = if args.preset == "all" {
                set.specs().iter().collect::<Vec<_>>()
            } else {
                vec![set.get(&args.preset)?]
            };
            let opts = BatchOptions {
                runs: args.runs as usize,
                tests: args.tests,
                alpha: args.alpha,
                seed: RandomSeed(args.seed),
                replicates: args.replicates as usize,
                calibration: args.calibration.into(),
            };
            let rows = specs
                .into_iter()
                .map(|s| run_batch(s, &opts))
                .collect::<Result<Vec<_>, _>>()?;
            match args.format {
                Format::Text => render_table(&rows),
                Format::Json => serde_json::to_string_pretty(&rows).expect("summaries serialize") + "\n",
            }
        }
    };
    Ok((text, Outcome::Done))
}

fn write_out(out: &mut dyn Write, text: &str) -> Result<(), Error> {
    out.write_all(text.as_bytes())
        .and_then(|()| out.flush())
        .map_err(|source| Error::Io {
            path: PathBuf::from("<stdout>"),
            source,
        })
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            if e.use_stderr() {
                let _ = err.write_all(rendered.as_bytes());
            } else {
                let _ = out.write_all(rendered.as_bytes());
            }
            return code;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build() {
        Ok(pool) => pool,
        Err(e) => {
            let _ = writeln!(err, "error: cannot start worker threads: {e}");
            return EXIT_INTERNAL;
        }
    };
    let mut warnings = Vec::new();
    let result = pool
        .install(|| run_command(cli.command, &mut warnings))
        .and_then(|(text, outcome)| write_out(out, &text).map(|()| outcome));
    for w in &warnings {
        let _ = writeln!(err, "{w}");
    }
    match result {
        Ok(Outcome::Done) => EXIT_OK,
        Ok(Outcome::Unclusterable) => EXIT_UNCLUSTERABLE,
        Err(Error::Io { ref path, ref source }) if path.as_os_str() == "<stdout>" && source.kind() == std::io::ErrorKind::BrokenPipe => {
            EXIT_OK
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}
