//! Recoverable `P1` threshold against `W2` at fixed `(delta, P2)`, plus the
//! single-class weak threshold for reference.
//!
//! `cargo run --example threshold_curve -- [delta] [P2]`

use weighted_l1::exponents::{threshold_p1, threshold_uniform, ThresholdOptions};

fn main() -> weighted_l1::Result<()> {
    let delta: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0.75);
    let p2: f64 = std::env::args().nth(2).and_then(|s| s.parse().ok()).unwrap_or(0.1);

    let uniform = threshold_uniform(delta, &ThresholdOptions::default())?;
    println!("single-class weak threshold at delta = {delta}: {uniform:.4}");
    println!("{:>5} {:>10}", "W2", "P1");
    for i in 0..=10 {
        let w2 = 1.0 + 0.2 * i as f64;
        println!("{w2:>5.1} {:>10.4}", threshold_p1(delta, p2, 0.5, 0.5, w2)?);
    }
    Ok(())
}
