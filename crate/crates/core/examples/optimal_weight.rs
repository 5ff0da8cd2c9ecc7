//! Weight maximizing the recoverable `P1` threshold for several `P2`.
//!
//! `cargo run --example optimal_weight -- [delta]`

use weighted_l1::exponents::{optimal_weight, threshold_p1};

fn main() -> weighted_l1::Result<()> {
    let delta: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0.5);
    println!("{:>6} {:>8} {:>8} {:>10}", "P2", "W*", "P1*", "P1(W=1)");
    for p2 in [0.0, 0.02, 0.05, 0.1, 0.15] {
        let best = optimal_weight(delta, p2, 0.5, 0.5)?;
        let plain = threshold_p1(delta, p2, 0.5, 0.5, 1.0)?;
        println!("{p2:>6.2} {:>8.3} {:>8.4} {:>10.4}", best.w_star, best.p1_star, plain);
    }
    Ok(())
}
