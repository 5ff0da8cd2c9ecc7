//! Oracles and generators shared by the integration tests and the
//! acceptance harness.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use weighted_l1::angles::{union_bound_term, AngleQuery};
use weighted_l1::exponents::{exponent_point, AsymptoticConfig, ExponentVariant};
use weighted_l1::lpsolve::{solve, LinearProgram, LpStatus, SolverOptions};
use weighted_l1::model::{gaussian_matrix, SparsityModel, WeightScheme};
use weighted_l1::recovery::{nullspace_condition, recover_weighted, NullspaceOptions, RecoveryOptions};

/// Minimum of `cᵀx` over `E x = d, x ≥ 0` by enumerating every basis.
/// `E` must have full row rank. `None` when no basis is feasible.
pub fn bfs_minimum(c: &DVector<f64>, e: &DMatrix<f64>, d: &DVector<f64>) -> Option<f64> {
    let (m, n) = e.shape();
    let mut best: Option<f64> = None;
    let mut idx: Vec<usize> = (0..m).collect();
    loop {
        let b = e.select_columns(&idx);
        if let Some(xb) = b.clone().lu().solve(d) {
            let scale = d.amax().max(1.0);
            let residual = (&b * &xb - d).amax();
            if residual < 1e-9 * scale && xb.iter().all(|&v| v >= -1e-9 * scale) {
                let obj: f64 = idx.iter().zip(xb.iter()).map(|(&j, &v)| c[j] * v).sum();
                best = Some(best.map_or(obj, |o: f64| o.min(obj)));
            }
        }
        // next m-subset of 0..n in lexicographic order
        let mut i = m;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if idx[i] < n - m + i {
                idx[i] += 1;
                for j in i + 1..m {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// A random feasible, bounded LP with at most 8 variables, some free or
/// with nonzero lower bounds, plus its standard-form image `(c, E, d)`
/// (free columns split, bounds shifted) for the enumeration oracle.
pub struct TinyLp {
    pub lp: LinearProgram,
    pub standard: (DVector<f64>, DMatrix<f64>, DVector<f64>),
    pub offset: f64,
}

pub fn tiny_lp(rng: &mut ChaCha8Rng) -> TinyLp {
    let n = rng.random_range(2..=8);
    let m = rng.random_range(1..n);
    let gauss = |rng: &mut ChaCha8Rng| -> f64 { StandardNormal.sample(rng) };
    let e = DMatrix::from_fn(m, n, |_, _| gauss(rng));
    let lower: Vec<f64> = (0..n)
        .map(|_| match rng.random_range(0..4) {
            0 => f64::NEG_INFINITY,
            1 => gauss(rng),
            _ => 0.0,
        })
        .collect();
    // primal point above the bounds and a dual point with positive slack on
    // bounded columns (zero slack on free ones) keep the LP feasible and bounded
    let x0 = DVector::from_fn(n, |j, _| if lower[j].is_finite() { lower[j] } else { 0.0 } + rng.random_range(0.0..2.0));
    let y0 = DVector::from_fn(m, |_, _| gauss(rng));
    let s0 = DVector::from_fn(n, |j, _| if lower[j].is_finite() { rng.random_range(0.05..2.0) } else { 0.0 });
    let c = e.transpose() * &y0 + s0;
    let d = &e * &x0;

    let mut cols = Vec::new();
    let mut cost = Vec::new();
    let mut shift = DVector::zeros(m);
    let mut offset = 0.0;
    for j in 0..n {
        let col = e.column(j).into_owned();
        if lower[j].is_finite() {
            shift += &col * lower[j];
            offset += c[j] * lower[j];
            cols.push(col.clone());
            cost.push(c[j]);
        } else {
            cols.push(col.clone());
            cost.push(c[j]);
            cols.push(-col);
            cost.push(-c[j]);
        }
    }
    let es = DMatrix::from_columns(&cols);
    let standard = (DVector::from_vec(cost), es, &d - shift);
    let lp = LinearProgram::new(c, e, d, lower).expect("valid LP");
    TinyLp { lp, standard, offset }
}

/// `(relative objective error, relative duality gap)` of the interior-point
/// solution against basis enumeration. The gap is the solver's certified
/// one, measured in standard form; the objective error is independent.
pub fn check_tiny_lp(t: &TinyLp) -> (f64, f64) {
    let sol = solve(&t.lp, &SolverOptions::default());
    assert_eq!(sol.status, LpStatus::Optimal);
    let (c, e, d) = &t.standard;
    let oracle = bfs_minimum(c, e, d).expect("feasible by construction") + t.offset;
    let rel = (sol.objective - oracle).abs() / oracle.abs().max(1.0);
    assert!((sol.objective - sol.dual_objective).abs() <= 1e-6 * (1.0 + oracle.abs()));
    (rel, sol.relative_gap)
}

/// One random null-space trial: `(condition verdict, all sign patterns
/// recovered)`.
pub fn nullspace_trial(seed: u64) -> (bool, bool) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = rng.random_range(6..=10);
    let n = rng.random_range(m + 1..=12);
    let n1 = rng.random_range(1..n);
    let w2 = [1.0, 2.0, 3.0][rng.random_range(0..3)];
    let size = rng.random_range(1..=4);
    let mut support: Vec<usize> = rand::seq::index::sample(&mut rng, n, size).into_vec();
    support.sort_unstable();
    let model = SparsityModel::new(n1, n - n1, 0.5, 0.5).unwrap();
    let w = WeightScheme::two_valued(&model, w2).unwrap();
    let a = gaussian_matrix(m, n, rng.random());

    let verdict = nullspace_condition(&a, &support, w.weights(), &NullspaceOptions::default()).unwrap();
    let mut all = true;
    for pattern in 0..1u32 << size {
        let mut x = vec![0.0; n];
        for (j, &i) in support.iter().enumerate() {
            let mag: f64 = rng.random_range(0.5..2.0);
            x[i] = if pattern >> j & 1 == 1 { -mag } else { mag };
        }
        let y = &a * DVector::from_column_slice(&x);
        let r = recover_weighted(&a, &y, w.weights(), Some(&x), &RecoveryOptions::default()).unwrap();
        all &= r.success;
    }
    (verdict, all)
}

/// Largest `|ψ_total − (1/n) ln term|` over a 5×5 grid of face sizes
/// spanning the union-bound region, at `n = 1000` with `n1 = n2`.
pub fn exponent_angle_gap(delta: f64, w: f64, p1: f64, p2: f64) -> f64 {
    let n = 1000usize;
    let cfg = AsymptoticConfig::new(delta, 0.5, 0.5, p1, p2, w).unwrap();
    let model = SparsityModel::new(n / 2, n / 2, p1, p2).unwrap();
    let (a1, a2, s0) = (cfg.a1(), cfg.a2(), cfg.min_face_excess());
    let fracs = [0.1, 0.3, 0.5, 0.7, 0.9];
    let mut worst: f64 = 0.0;
    let t1_lo = (s0 - a2).max(0.0);
    for f in fracs {
        let t1p = t1_lo + f * (a1 - t1_lo);
        let t2_lo = (s0 - t1p).max(0.0);
        for g in fracs {
            let t2p = t2_lo + g * (a2 - t2_lo);
            let (t1, t2) = ((t1p * n as f64).round() as usize, (t2p * n as f64).round() as usize);
            let q = AngleQuery::typical(model.clone(), w, t1, t2).unwrap();
            let finite = union_bound_term(&q).unwrap() / n as f64;
            let e = exponent_point(t1 as f64 / n as f64, t2 as f64 / n as f64, &cfg, &ExponentVariant::ACCEPTED).unwrap();
            worst = worst.max((e.psi_total - finite).abs());
        }
    }
    worst
}
