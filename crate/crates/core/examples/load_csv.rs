//! Delimited text ingestion: header detection, non-numeric columns, and
//! the strict policy.
//!
//! cargo run --example load_csv -- path/to/file.csv

use clusterability::{ingest_file, ingest_reader, IngestOptions, NonNumericPolicy};

const SAMPLE: &str = "\
site;depth;ph;soil
north;1.5;6.8;loam
south;2.25;7.1;clay
east;0.75;6.2;sand
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let opts = IngestOptions {
        delimiter: ';',
        ..IngestOptions::default()
    };
    let ingested = match std::env::args().nth(1) {
        Some(path) => ingest_file(path, &IngestOptions::default())?,
        None => ingest_reader(SAMPLE.as_bytes(), &opts)?,
    };
    let m = &ingested.matrix;
    println!("{} x {}, columns {:?}", m.n(), m.d(), m.column_names());
    println!("dropped: {:?}", ingested.dropped_columns);
    for row in m.rows() {
        println!("  {row:?}");
    }

    let strict = IngestOptions {
        non_numeric_policy: NonNumericPolicy::Error,
        ..opts
    };
    if let Err(e) = ingest_reader(SAMPLE.as_bytes(), &strict) {
        println!("strict policy: {e}");
    }
    Ok(())
}
