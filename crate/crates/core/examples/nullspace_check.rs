//! Compares the weighted null-space condition with direct recovery of every
//! sign pattern on one small support.
//!
//! `cargo run --example nullspace_check -- [W2] [seed]`

use weighted_l1::model::{gaussian_matrix, SparsityModel, WeightScheme};
use weighted_l1::recovery::{nullspace_witness, recover_weighted, NullspaceOptions, RecoveryOptions};

fn main() -> weighted_l1::Result<()> {
    let w2: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2.0);
    let seed: u64 = std::env::args().nth(2).and_then(|s| s.parse().ok()).unwrap_or(11);
    let (n1, n2, m) = (6, 6, 8);
    let model = SparsityModel::new(n1, n2, 0.5, 0.1)?;
    let w = WeightScheme::two_valued(&model, w2)?;
    let a = gaussian_matrix(m, n1 + n2, seed);
    let support = [0usize, 2, 4, 7];

    let witness = nullspace_witness(&a, &support, w.weights(), &NullspaceOptions::default())?;
    println!("K = {support:?}, W2 = {w2}");
    match &witness {
        None => println!("null-space condition holds"),
        Some(z) => println!("violated by z = {:?}", z.iter().map(|v| format!("{v:.3}")).collect::<Vec<_>>()),
    }

    let mut all = true;
    for pattern in 0..1u32 << support.len() {
        let mut x = vec![0.0; n1 + n2];
        for (j, &i) in support.iter().enumerate() {
            x[i] = if pattern >> j & 1 == 1 { -1.0 } else { 1.0 } * (1.0 + j as f64);
        }
        let y = &a * nalgebra::DVector::from_column_slice(&x);
        let r = recover_weighted(&a, &y, w.weights(), Some(&x), &RecoveryOptions::default())?;
        all &= r.success;
        println!("signs {pattern:04b}: success = {} (err {:.1e})", r.success, r.max_abs_error);
    }
    println!("all sign patterns recovered: {all}; condition: {}", witness.is_none());
    Ok(())
}
