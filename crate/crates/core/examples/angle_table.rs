//! Internal and external angles and union-bound terms for one support
//! `(k1, k2)` of a small two-class cross-polytope.
//!
//! `cargo run --example angle_table -- [n1] [n2] [W2] [k1] [k2] [m]`

use weighted_l1::angles::{external_angle, internal_angle, log_failure_bound, union_bound_term, AngleQuery};
use weighted_l1::model::SparsityModel;

fn arg<T: std::str::FromStr>(i: usize, default: T) -> T {
    std::env::args().nth(i).and_then(|s| s.parse().ok()).unwrap_or(default)
}

fn main() -> weighted_l1::Result<()> {
    let n1: usize = arg(1, 30);
    let n2: usize = arg(2, 30);
    let w2: f64 = arg(3, 1.5);
    let k1: usize = arg(4, 3);
    let k2: usize = arg(5, 2);
    let m: usize = arg(6, 30);
    let model = SparsityModel::new(n1, n2, 0.0, 0.0)?;

    println!("{:>3} {:>3} {:>12} {:>12} {:>12}", "t1", "t2", "ln beta", "ln gamma", "ln term");
    for t1 in (0..=n1 - k1).step_by(5) {
        for t2 in (0..=n2 - k2).step_by(7) {
            let q = AngleQuery::new(model.clone(), w2, k1, k2, t1, t2)?;
            println!(
                "{t1:>3} {t2:>3} {:>12.5} {:>12.5} {:>12.5}",
                internal_angle(&q)?,
                external_angle(&q)?,
                union_bound_term(&q)?
            );
        }
    }
    let bound = log_failure_bound(&model, w2, m, k1, k2)?;
    println!("ln P(failure) <= {bound:.4} at m = {m}");
    Ok(())
}
