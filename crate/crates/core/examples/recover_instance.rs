//! Draws one two-class instance, solves it with uniform and with class
//! weights, and prints the outcome of each.
//!
//! `cargo run --example recover_instance -- [n] [m] [P1] [P2] [W2] [seed]`

use std::time::Instant;

use weighted_l1::model::{gaussian_instance, AmplitudeLaw, SparsityModel, WeightScheme};
use weighted_l1::recovery::{recover, RecoveryOptions};

fn arg<T: std::str::FromStr>(i: usize, default: T) -> T {
    std::env::args().nth(i).and_then(|s| s.parse().ok()).unwrap_or(default)
}

fn main() -> weighted_l1::Result<()> {
    let n: usize = arg(1, 200);
    let m: usize = arg(2, 100);
    let p1: f64 = arg(3, 0.3);
    let p2: f64 = arg(4, 0.05);
    let w2: f64 = arg(5, 2.0);
    let seed: u64 = arg(6, 7);

    let model = SparsityModel::new(n / 2, n - n / 2, p1, p2)?;
    let inst = gaussian_instance(&model, m, AmplitudeLaw::Gaussian, seed)?;
    let (k1, k2) = model.class_counts(inst.x_true.support());
    println!("n = {n}, m = {m}, |K∩K1| = {k1}, |K∩K2| = {k2}");

    for w in [1.0, w2] {
        let scheme = WeightScheme::two_valued(&model, w)?;
        let start = Instant::now();
        let r = recover(&inst, &scheme, &RecoveryOptions::default())?;
        println!(
            "W2 = {w:<4} status = {:?} success = {} err = {:.2e} iters = {} ({:.1} ms)",
            r.status,
            r.success,
            r.max_abs_error,
            r.iterations,
            start.elapsed().as_secs_f64() * 1e3
        );
    }
    Ok(())
}
