//! Weighted ℓ1 recovery and exact small-scale oracles.
//!
//! [`recover`] solves `min Σ w_i|x_i| s.t. A x = y` through the split
//! formulation `x = u − v`, `u, v ≥ 0`. [`nullspace_condition`] decides, by
//! enumerating sign orthants, whether every null-space vector `z` of `A`
//! satisfies `Σ_{K} w|z| ≤ Σ_{K̄} w|z|`, the condition under which
//! every signal supported on `K` is the unique minimizer.
//! [`recovery_oracle_bruteforce`] enumerates basic solutions of the split LP.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lpsolve::{self, LinearProgram, LpStatus, SolverOptions};
use crate::model::{weighted_l1, ProblemInstance, WeightScheme};

/// Relative ℓ∞ error below which a recovery counts as exact.
pub const SUCCESS_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecoveryOptions {
    pub solver: SolverOptions,
    pub success_tol: f64,
}

impl Default for RecoveryOptions {
    fn default() -> Self {
        RecoveryOptions {
            solver: SolverOptions::default(),
            success_tol: SUCCESS_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryResult {
    pub x_hat: Vec<f64>,
    /// Weighted norm of `x_hat`.
    pub objective: f64,
    pub status: LpStatus,
    pub success: bool,
    /// `‖x_hat − x_true‖∞`; `NaN` without ground truth.
    pub max_abs_error: f64,
    /// The optimal face of the LP looks larger than a point.
    pub nonunique: bool,
    pub iterations: usize,
}

fn check_dims(a: &DMatrix<f64>, y: &DVector<f64>, weights: &[f64]) -> Result<()> {
    if y.len() != a.nrows() {
        return Err(Error::DimensionMismatch { expected: a.nrows(), got: y.len() });
    }
    if weights.len() != a.ncols() {
        return Err(Error::DimensionMismatch { expected: a.ncols(), got: weights.len() });
    }
    if weights.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
        return Err(Error::InvalidArgument("weights must be positive and finite".into()));
    }
    Ok(())
}

/// `minimize Σ w_i (u_i + v_i)  s.t.  A (u − v) = y,  u, v ≥ 0`.
///
/// Variables are ordered `(u_0..u_{n-1}, v_0..v_{n-1})`; the signal is
/// recovered as `x = u − v` (see [`split_to_signal`]).
pub fn build_weighted_l1_lp(a: &DMatrix<f64>, y: &DVector<f64>, weights: &[f64]) -> Result<LinearProgram> {
    check_dims(a, y, weights)?;
    let (m, n) = a.shape();
    let mut e = DMatrix::zeros(m, 2 * n);
    e.columns_mut(0, n).copy_from(a);
    e.columns_mut(n, n).copy_from(&(-a));
    let c = DVector::from_iterator(2 * n, weights.iter().chain(weights.iter()).copied());
    LinearProgram::standard(c, e, y.clone())
}

pub fn split_to_signal(uv: &[f64]) -> Vec<f64> {
    let n = uv.len() / 2;
    (0..n).map(|i| uv[i] - uv[n + i]).collect()
}

fn numerical_rank(m: &DMatrix<f64>) -> usize {
    if m.ncols() == 0 || m.nrows() == 0 {
        return 0;
    }
    let sv = m.singular_values();
    let smax = sv.max();
    let tol = smax * (m.nrows().max(m.ncols()) as f64) * 1e-12;
    sv.iter().filter(|&&s| s > tol).count()
}

/// Solves the weighted problem for arbitrary positive weights; `x_true`
/// enables the success verdict.
pub fn recover_weighted(
    a: &DMatrix<f64>,
    y: &DVector<f64>,
    weights: &[f64],
    x_true: Option<&[f64]>,
    opts: &RecoveryOptions,
) -> Result<RecoveryResult> {
    let lp = build_weighted_l1_lp(a, y, weights)?;
    if let Some(t) = x_true {
        if t.len() != a.ncols() {
            return Err(Error::DimensionMismatch { expected: a.ncols(), got: t.len() });
        }
    }
    let sol = lpsolve::solve(&lp, &opts.solver);
    let x_hat = split_to_signal(&sol.x);
    let objective = weighted_l1(&x_hat, weights)?;
    let max_abs_error = match x_true {
        Some(t) => x_hat.iter().zip(t).fold(0.0, |m, (a, b)| f64::max(m, (a - b).abs())),
        None => f64::NAN,
    };
    let optimal = sol.status == LpStatus::Optimal;
    let success = optimal
        && x_true.is_some_and(|t| {
            let scale = t.iter().fold(1.0f64, |m, v| m.max(v.abs()));
            max_abs_error <= opts.success_tol * scale
        });
    let nonunique = optimal && {
        // Columns that stay basic (x_j > z_j) span the optimal face; it is a
        // single point iff they are independent.
        let basic: Vec<usize> = (0..sol.x.len()).filter(|&j| sol.x[j] > sol.z[j]).collect();
        basic.len() > a.nrows() || numerical_rank(&lp.e.select_columns(basic.iter())) < basic.len()
    };
    Ok(RecoveryResult {
        x_hat,
        objective,
        status: sol.status,
        success,
        max_abs_error,
        nonunique,
        iterations: sol.iterations,
    })
}

pub fn recover(instance: &ProblemInstance, w: &WeightScheme, opts: &RecoveryOptions) -> Result<RecoveryResult> {
    recover_weighted(&instance.a, &instance.y, w.weights(), Some(instance.x_true.values()), opts)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NullspaceOptions {
    /// Largest `n` accepted (the check solves `2^(n-1)` LPs).
    pub max_dim: usize,
    /// A normalized violation above this counts as failure.
    pub tol: f64,
    pub solver: SolverOptions,
}

impl Default for NullspaceOptions {
    fn default() -> Self {
        NullspaceOptions { max_dim: 16, tol: 1e-7, solver: SolverOptions::default() }
    }
}

/// Orthonormal bases `(row space, null space)` of `A` as columns of `n`-row
/// matrices.
pub fn orthonormal_bases(a: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
    let (m, n) = a.shape();
    let mut square = DMatrix::zeros(n.max(m), n);
    square.rows_mut(0, m).copy_from(a);
    let svd = square.svd(false, true);
    let vt = svd.v_t.expect("requested V");
    let smax = svd.singular_values.max();
    let tol = smax * (m.max(n) as f64) * 1e-12;
    let (mut row, mut null) = (Vec::new(), Vec::new());
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s > tol {
            row.push(k)
        } else {
            null.push(k)
        }
    }
    let pick = |idx: &[usize]| DMatrix::from_fn(n, idx.len(), |i, j| vt[(idx[j], i)]);
    (pick(&row), pick(&null))
}

/// Maximizes `Σ_K w|z| − Σ_K̄ w|z|` over null-space vectors in one sign
/// orthant with `‖z‖₁ ≤ 1`. Writing `z = S a` with `a ≥ 0`, membership in the
/// null space is `Rᵀ S a = 0` for an orthonormal row-space basis `R`.
fn orthant_violation(
    row_basis: &DMatrix<f64>,
    in_support: &[bool],
    weights: &[f64],
    signs: &[f64],
    opts: &NullspaceOptions,
) -> Result<(f64, Vec<f64>)> {
    let n = weights.len();
    let r = row_basis.ncols();
    let mut e = DMatrix::zeros(r + 1, n + 1);
    for i in 0..n {
        for k in 0..r {
            e[(k, i)] = row_basis[(i, k)] * signs[i];
        }
        e[(r, i)] = 1.0;
    }
    e[(r, n)] = 1.0;
    let mut d = DVector::zeros(r + 1);
    d[r] = 1.0;
    let c = DVector::from_fn(n + 1, |i, _| {
        if i == n {
            0.0
        } else if in_support[i] {
            -weights[i]
        } else {
            weights[i]
        }
    });
    let lp = LinearProgram::standard(c, e, d)?;
    let sol = lpsolve::solve(&lp, &opts.solver);
    if sol.status != LpStatus::Optimal {
        return Err(Error::Solver(format!("orthant LP ended with {:?}", sol.status)));
    }
    let z = (0..n).map(|i| signs[i] * sol.x[i]).collect();
    Ok((-sol.objective, z))
}

/// A null-space vector violating the weighted null-space condition for `K`,
/// if one exists.
pub fn nullspace_witness(
    a: &DMatrix<f64>,
    support: &[usize],
    weights: &[f64],
    opts: &NullspaceOptions,
) -> Result<Option<Vec<f64>>> {
    let n = a.ncols();
    if weights.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: weights.len() });
    }
    if n > opts.max_dim {
        return Err(Error::CapExceeded { what: "n", value: n, cap: opts.max_dim });
    }
    let mut in_support = vec![false; n];
    for &i in support {
        if i >= n {
            return Err(Error::InvalidArgument(format!("support index {i} out of range")));
        }
        in_support[i] = true;
    }
    let (row_basis, null_basis) = orthonormal_bases(a);
    if null_basis.ncols() == 0 {
        return Ok(None);
    }
    // z and −z give the same value, so the first sign is fixed.
    let orthants: Vec<u32> = (0..1u32 << (n - 1)).collect();
    let results: Vec<Result<(f64, Vec<f64>)>> = orthants
        .par_iter()
        .map(|&bits| {
            let signs: Vec<f64> = (0..n)
                .map(|i| if i > 0 && (bits >> (i - 1)) & 1 == 1 { -1.0 } else { 1.0 })
                .collect();
            orthant_violation(&row_basis, &in_support, weights, &signs, opts)
        })
        .collect();
    for r in results {
        let (value, z) = r?;
        if value > opts.tol {
            return Ok(Some(z));
        }
    }
    Ok(None)
}

/// `∀ z ∈ N(A): Σ_{i∈K} w_i|z_i| ≤ Σ_{i∉K} w_i|z_i|`, by exhaustive orthant
/// enumeration (`n ≤ opts.max_dim`).
pub fn nullspace_condition(a: &DMatrix<f64>, support: &[usize], weights: &[f64], opts: &NullspaceOptions) -> Result<bool> {
    Ok(nullspace_witness(a, support, weights, opts)?.is_none())
}

pub const BRUTEFORCE_MAX_N: usize = 8;
pub const BRUTEFORCE_MAX_M: usize = 8;

/// Advances `idx` to the next `k`-combination of `0..n` in lexicographic
/// order; returns `false` after the last one.
pub(crate) fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if idx[i] < n - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Greedy selection of linearly independent rows (modified Gram–Schmidt).
fn independent_rows(a: &DMatrix<f64>) -> Vec<usize> {
    let scale = a.amax().max(f64::MIN_POSITIVE);
    let mut basis: Vec<DVector<f64>> = Vec::new();
    let mut rows = Vec::new();
    for i in 0..a.nrows() {
        let mut v: DVector<f64> = a.row(i).transpose();
        for b in &basis {
            let p = b.dot(&v);
            v -= b * p;
        }
        let norm = v.norm();
        if norm > 1e-10 * scale * (a.ncols() as f64).sqrt() {
            basis.push(v / norm);
            rows.push(i);
        }
    }
    rows
}

/// Minimizer of `Σ w|x|` over `A x = y` found by enumerating every basic
/// solution of the split LP. Sizes are capped at `n, m ≤ 8`.
pub fn recovery_oracle_bruteforce(a: &DMatrix<f64>, y: &DVector<f64>, weights: &[f64]) -> Result<Vec<f64>> {
    check_dims(a, y, weights)?;
    let (m, n) = a.shape();
    if n > BRUTEFORCE_MAX_N {
        return Err(Error::CapExceeded { what: "n", value: n, cap: BRUTEFORCE_MAX_N });
    }
    if m > BRUTEFORCE_MAX_M {
        return Err(Error::CapExceeded { what: "m", value: m, cap: BRUTEFORCE_MAX_M });
    }
    let rows = independent_rows(a);
    let ar = a.select_rows(rows.iter());
    let yr = DVector::from_iterator(rows.len(), rows.iter().map(|&i| y[i]));
    // y must lie in range(A): check the dropped rows through a least-squares fit
    let yscale = 1.0 + y.amax();
    if rows.len() < m {
        let fit = ar.transpose().svd(true, true).solve(&a.transpose(), 1e-12).ok();
        // rows of A are combinations of the kept rows: A = C Ar, so y must be C yr
        let consistent = fit.is_some_and(|c| (c.transpose() * &yr - y).amax() <= 1e-9 * yscale);
        if !consistent {
            return Err(Error::Infeasible);
        }
    }
    let r = rows.len();
    if r == 0 {
        return Ok(vec![0.0; n]);
    }
    let col = |j: usize| -> DVector<f64> {
        if j < n {
            ar.column(j).into_owned()
        } else {
            -ar.column(j - n)
        }
    };
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut idx: Vec<usize> = (0..r).collect();
    loop {
        let paired = idx.iter().any(|&j| j >= n && idx.contains(&(j - n)));
        if !paired {
            let basis = DMatrix::from_columns(&idx.iter().map(|&j| col(j)).collect::<Vec<_>>());
            let lu = basis.clone().lu();
            if let Some(xb) = lu.solve(&yr) {
                let resid = (&basis * &xb - &yr).amax();
                if xb.iter().all(|&v| v >= -1e-10 * yscale) && resid <= 1e-9 * yscale {
                    let mut x = vec![0.0; n];
                    for (k, &j) in idx.iter().enumerate() {
                        let v = xb[k].max(0.0);
                        if j < n {
                            x[j] += v;
                        } else {
                            x[j - n] -= v;
                        }
                    }
                    let obj = weighted_l1(&x, weights)?;
                    if best.as_ref().is_none_or(|(b, _)| obj < *b - 1e-12 * (1.0 + b.abs())) {
                        best = Some((obj, x));
                    }
                }
            }
        }
        if !next_combination(&mut idx, 2 * n) {
            break;
        }
    }
    best.map(|(_, x)| x).ok_or(Error::Infeasible)
}
