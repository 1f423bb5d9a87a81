//! Price a European option under both jump-diffusion models and compare
//! against the available references.
//!
//! Run with `cargo run --release --example price`.

use compactfd::model::{
    merton_series_price, Contract, JumpDensity, ModelParams, OptionSide,
};
use compactfd::operators::GridSpec;
use compactfd::solver::{price_at, solve, SolveOptions};

fn main() -> compactfd::Result<()> {
    let intervals = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(512);
    let contract = Contract::new(OptionSide::Put, 100.0, 100.0, 0.25)?;
    let grid = GridSpec::with_mesh_ratio(2.0, intervals, contract.maturity, 0.4)?;
    let options = SolveOptions::default();

    let merton = ModelParams::new(
        0.15,
        0.05,
        0.10,
        JumpDensity::Merton {
            mu_j: -0.90,
            sigma_j: 0.45,
        },
    )?;
    let result = solve(&merton, &contract, &grid, &options)?;
    println!(
        "Merton put, N = {intervals}, M = {} steps, {:.2}s, {:.2} inner iterations/step",
        grid.steps,
        result.wall_time.as_secs_f64(),
        result.average_iterations()
    );
    println!("{:>6} {:>12} {:>12} {:>10}", "spot", "price", "series", "diff");
    for spot in [90.0, 100.0, 110.0] {
        let price = price_at(&result, &contract, spot)?;
        let reference = merton_series_price(&contract, &merton, spot, 200)?;
        println!(
            "{spot:>6} {price:>12.6} {reference:>12.6} {:>10.2e}",
            (price - reference).abs()
        );
    }

    let kou = ModelParams::new(
        0.15,
        0.05,
        0.10,
        JumpDensity::Kou {
            lambda_plus: 3.0465,
            lambda_minus: 3.0775,
            p_up: 0.3445,
        },
    )?;
    let result = solve(&kou, &contract, &grid, &options)?;
    println!(
        "\nKou put, N = {intervals}, {:.2}s, {:.2} inner iterations/step",
        result.wall_time.as_secs_f64(),
        result.average_iterations()
    );
    for spot in [90.0, 100.0, 110.0] {
        println!("{spot:>6} {:>12.6}", price_at(&result, &contract, spot)?);
    }
    Ok(())
}
