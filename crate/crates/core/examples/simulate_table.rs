//! Proportion of simulated datasets called clusterable, per benchmark family.
//!
//! cargo run --release --example simulate_table -- 20 200 a c o q

use clusterability::{generate, render_table, run_batch, BatchOptions, PresetSet, RandomSeed};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let runs = args.next().map(|r| r.parse()).transpose()?.unwrap_or(20);
    let replicates = args.next().map(|b| b.parse()).transpose()?.unwrap_or(200);
    let wanted: Vec<String> = args.collect();

    let presets = PresetSet::bundled();
    let opts = BatchOptions {
        runs,
        replicates,
        ..BatchOptions::default()
    };
    let mut rows = Vec::new();
    for spec in presets.specs() {
        if !wanted.is_empty() && !wanted.contains(&spec.id) {
            continue;
        }
        let example = generate(spec, RandomSeed(0))?;
        eprintln!("{}: {} ({} x {})", spec.id, spec.description, example.n(), example.d());
        rows.push(run_batch(spec, &opts)?);
    }
    print!("{}", render_table(&rows));
    Ok(())
}
