//! Monte Carlo recovery rate against `P1` for several weights on paired
//! instances; writes the curve as CSV and SVG.
//!
//! `cargo run --release --example phase_curves -- [trials] [out_dir]`

use std::fs;
use std::path::PathBuf;

use weighted_l1::experiments::{run_plan_detailed, write_curve_csv, ExperimentPlan};
use weighted_l1::lpsolve::SolverOptions;
use weighted_l1::plot::LinePlot;
use weighted_l1::recovery::SUCCESS_TOL;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let trials: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(50);
    let out = PathBuf::from(std::env::args().nth(2).unwrap_or_else(|| "phase_curves".into()));
    let plan = ExperimentPlan {
        n: 200,
        n1: 100,
        m: 100,
        p2: 0.05,
        p1_values: (1..=10).map(|i| 0.05 * i as f64).collect(),
        w2_values: vec![1.0, 1.5, 2.0, 2.5, 3.0],
        trials,
        seed: 2024,
        success_tol: SUCCESS_TOL,
        amplitude: Default::default(),
    };
    let outcome = run_plan_detailed(&plan, &SolverOptions::default())?;
    let curve = outcome.curve();

    print!("{:>6}", "P1");
    for w in &plan.w2_values {
        print!(" {:>8}", format!("W2={w}"));
    }
    println!();
    for (i, p1) in plan.p1_values.iter().enumerate() {
        print!("{p1:>6.2}");
        for j in 0..plan.w2_values.len() {
            print!(" {:>8.3}", curve[i * plan.w2_values.len() + j].rate);
        }
        println!();
    }

    fs::create_dir_all(&out)?;
    let mut csv = Vec::new();
    write_curve_csv(&curve, &mut csv)?;
    fs::write(out.join("curve.csv"), csv)?;
    let mut plot = LinePlot::new("Recovery rate, n = 200, m = 100, P2 = 0.05", "P1", "success rate");
    plot.y_range = Some((0.0, 1.0));
    for &w in &plan.w2_values {
        let pts = curve.iter().filter(|p| p.w2 == w).map(|p| (p.p1, p.rate)).collect();
        plot = plot.with_series(&format!("W2 = {w}"), pts);
    }
    fs::write(out.join("curve.svg"), plot.to_svg())?;
    println!("wrote {}/curve.csv and curve.svg", out.display());
    Ok(())
}
