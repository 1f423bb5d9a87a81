//! Resolution characteristics: modified wavenumbers of the central and
//! compact derivative approximations against the exact line.
//!
//! Run with `cargo run --example wavenumber`.

use compactfd::analysis::wavenumber_curves;

fn main() {
    let thetas: Vec<f64> = (1..=8)
        .map(|j| j as f64 * std::f64::consts::PI / 8.0)
        .collect();
    let curve = wavenumber_curves(&thetas);
    println!(
        "{:>8} {:>8} {:>9} {:>9} | {:>8} {:>9} {:>9}",
        "theta", "exact", "central", "compact", "exact2", "central2", "compact2"
    );
    for i in 0..curve.theta.len() {
        println!(
            "{:>8.4} {:>8.4} {:>9.4} {:>9.4} | {:>8.4} {:>9.4} {:>9.4}",
            curve.theta[i],
            curve.exact_first[i],
            curve.fd_first[i],
            curve.compact_first[i],
            curve.exact_second[i],
            curve.fd_second[i],
            curve.compact_second[i],
        );
    }
    println!("\nthe compact curves hug the exact lines over a wider phase band");
}
