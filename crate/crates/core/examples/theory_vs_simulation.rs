//! Empirical 50% crossings of the recovery rate next to the asymptotic
//! `P1` thresholds, per weight.
//!
//! `cargo run --release --example theory_vs_simulation -- [trials]`

use weighted_l1::experiments::{empirical_vs_theory, run_plan, ExperimentPlan};
use weighted_l1::exponents::ThresholdOptions;
use weighted_l1::recovery::SUCCESS_TOL;

fn main() -> weighted_l1::Result<()> {
    let trials: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(50);
    let plan = ExperimentPlan {
        n: 200,
        n1: 100,
        m: 150,
        p2: 0.1,
        p1_values: (0..=10).map(|i| 0.5 + 0.05 * i as f64).collect(),
        w2_values: vec![1.0, 2.0, 3.0],
        trials,
        seed: 3,
        success_tol: SUCCESS_TOL,
        amplitude: Default::default(),
    };
    let curve = run_plan(&plan)?;
    let report = empirical_vs_theory(&plan, &curve, &ThresholdOptions::default())?;
    println!("{:>4} {:>12} {:>10} {:>10}", "W2", "crossing", "theory", "gap");
    for r in &report.rows {
        let c = r.empirical_crossing.map_or(format!("{:?}", r.crossing_kind), |c| format!("{c:.3}"));
        let gap = r.gap.map_or("-".to_string(), |g| format!("{g:+.3}"));
        println!("{:>4} {c:>12} {:>10.3} {gap:>10}", r.w2, r.theoretical_threshold);
    }
    println!("ordering agrees: {:?}", report.ordering_agrees);
    Ok(())
}
