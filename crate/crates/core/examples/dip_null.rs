//! Critical values of the dip under the uniform null, by sample size.

use clusterability::{DipNull, RandomSeed};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    println!("{:>6} {:>9} {:>9} {:>9}", "m", "q0.90", "q0.95", "q0.99");
    for m in [10, 30, 100, 300, 1000, 3000] {
        let null = DipNull::simulate(m, 4999, RandomSeed(0))?;
        let q = |p: f64| null.dips()[((null.replicates() as f64) * p) as usize];
        println!("{m:>6} {:>9.5} {:>9.5} {:>9.5}", q(0.90), q(0.95), q(0.99));
    }
    Ok(())
}
