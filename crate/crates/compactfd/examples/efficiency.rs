//! Cost of accuracy: wall-clock needed by the compact scheme vs the plain
//! second-order scheme to reach the same ℓ² error against the Merton
//! series solution.
//!
//! Run with `cargo run --release --example efficiency`.

use compactfd::analysis::efficiency_comparison;
use compactfd::model::{Contract, JumpDensity, ModelParams, OptionSide};
use compactfd::solver::Scheme;

fn main() -> compactfd::Result<()> {
    let contract = Contract::new(OptionSide::Put, 100.0, 100.0, 0.25)?;
    let params = ModelParams::new(
        0.15,
        0.05,
        0.10,
        JumpDensity::Merton {
            mu_j: -0.90,
            sigma_j: 0.45,
        },
    )?;
    let rows = efficiency_comparison(&params, &contract, &[2e-3, 1e-3], 2.0, 0.4)?;
    println!(
        "{:>8} {:>10} {:>6} {:>12} {:>10}",
        "scheme", "target", "N", "error", "seconds"
    );
    for row in rows {
        println!(
            "{:>8} {:>10.1e} {:>6} {:>12.4e} {:>10.3}",
            match row.scheme {
                Scheme::Compact => "compact",
                Scheme::SecondOrderFd => "fd2",
            },
            row.target,
            row.intervals,
            row.error,
            row.seconds
        );
    }
    Ok(())
}
