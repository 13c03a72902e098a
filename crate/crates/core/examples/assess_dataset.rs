//! Full assessment of one dataset: bundled name or CSV path.
//!
//! cargo run --example assess_dataset -- rivers 5000

use clusterability::{assess_clusterability, bundled_dataset, load_matrix, AssessOptions, IngestOptions, BUNDLED};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let input = args.next().unwrap_or_else(|| "rivers".to_string());
    let replicates = args.next().map(|b| b.parse()).transpose()?.unwrap_or(2000);

    let data = if BUNDLED.iter().any(|b| b.name == input) {
        bundled_dataset(&input)?
    } else {
        load_matrix(&input, &IngestOptions::default())?
    };
    let opts = AssessOptions {
        replicates: Some(replicates),
        ..AssessOptions::default()
    };
    let report = assess_clusterability(&input, &data, &opts)?;

    println!("{input}: n = {}, d = {}, {} distances", report.n, report.d, report.m);
    if let Some(dip) = &report.dip {
        println!("  dip D = {:.5}, modal interval {:?}", dip.dip, dip.modal_interval);
    }
    if let Some(s) = &report.silverman {
        println!("  silverman h_crit = {:.4} (raw p {:.4})", s.h_crit, s.raw_p_value);
    }
    print!("{}", report.to_text());
    Ok(())
}
