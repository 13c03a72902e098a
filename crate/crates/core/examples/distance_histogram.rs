//! Histogram of pairwise distances drawn as text bars.
//!
//! cargo run --example distance_histogram -- faithful 25

use clusterability::{bundled_dataset, histogram, pairwise_distances, Metric};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let name = args.next().unwrap_or_else(|| "faithful".to_string());
    let bins = args.next().map(|b| b.parse()).transpose()?.unwrap_or(25);

    let sample = pairwise_distances(&bundled_dataset(&name)?, Metric::Euclidean)?;
    let h = histogram(&sample, bins)?;
    let peak = *h.counts.iter().max().unwrap_or(&1) as f64;
    for (mid, count) in h.midpoints().zip(&h.counts) {
        let bar = "#".repeat((60.0 * *count as f64 / peak).round() as usize);
        println!("{mid:>10.2} {count:>7} {bar}");
    }
    Ok(())
}
