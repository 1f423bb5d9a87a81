//! The payoff mollifier: kernel shape, unit mass, and its effect on the
//! put payoff near the strike.
//!
//! Run with `cargo run --example smoothing`.

use compactfd::model::{Contract, OptionSide};
use compactfd::operators::GridSpec;
use compactfd::smoothing::{smooth_initial_condition, SmoothingKernel};

fn main() -> compactfd::Result<()> {
    let kernel = SmoothingKernel::build(512)?;
    println!("kernel mass (trapezoid): {:.12}", kernel.mass());
    println!("kernel values:");
    for s in [0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0] {
        println!("  φ(±{s:.1}) = {:+.8}", kernel.eval(s));
    }

    let contract = Contract::new(OptionSide::Put, 100.0, 100.0, 0.25)?;
    let grid = GridSpec::with_mesh_ratio(2.0, 128, 0.25, 0.4)?;
    let kink_node = grid.intervals / 2;
    let nodes: Vec<usize> = (kink_node - 3..=kink_node + 3).collect();
    let smoothed = smooth_initial_condition(
        &kernel,
        &|x| contract.payoff(x),
        Some(contract.kink()),
        &grid,
        &nodes,
    )?;
    println!("\nput payoff near the strike (N = {}):", grid.intervals);
    println!("{:>10} {:>12} {:>12}", "x", "payoff", "mollified");
    for (&node, &value) in nodes.iter().zip(smoothed.iter()) {
        let x = grid.node(node);
        println!("{x:>10.5} {:>12.6} {value:>12.6}", contract.payoff(x));
    }
    Ok(())
}
