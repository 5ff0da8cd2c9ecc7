//! Solves a small LP with free and bounded variables and prints the primal
//! and dual solutions.
//!
//! `cargo run --example lp_solve`

use nalgebra::{dmatrix, dvector};
use weighted_l1::lpsolve::{solve, LinearProgram, SolverOptions};

fn main() -> weighted_l1::Result<()> {
    // minimize  x0 + 2 x1 + 3 x2 - x3
    // s.t.      x0 + x1 + x2 + x3 = 4
    //           x0 - x1 + 2 x3    = 1
    //           x0, x1, x2 >= 0, x3 >= -1
    let lp = LinearProgram::new(
        dvector![1.0, 2.0, 3.0, -1.0],
        dmatrix![1.0, 1.0, 1.0, 1.0; 1.0, -1.0, 0.0, 2.0],
        dvector![4.0, 1.0],
        vec![0.0, 0.0, 0.0, -1.0],
    )?;
    let opts = SolverOptions { trace: true, ..Default::default() };
    let sol = solve(&lp, &opts);
    println!("status     {:?} after {} iterations", sol.status, sol.iterations);
    println!("objective  {:.10}", sol.objective);
    println!("dual       {:.10}", sol.dual_objective);
    println!("rel. gap   {:.2e}", sol.relative_gap);
    println!("x = {:?}", sol.x.iter().map(|v| format!("{v:.6}")).collect::<Vec<_>>());
    println!("y = {:?}", sol.y.iter().map(|v| format!("{v:.6}")).collect::<Vec<_>>());
    for (k, it) in sol.trace.iter().enumerate() {
        println!("{k:>3}  pobj {:>12.6}  dobj {:>12.6}  mu {:.1e}", it.primal_objective, it.dual_objective, it.mu);
    }
    Ok(())
}
