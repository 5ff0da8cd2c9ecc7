//! Dense primal-dual interior-point solver for linear programs
//!
//! ```text
//!     minimize  cᵀx   subject to  E x = d,  x ≥ lower
//! ```
//!
//! Lower bounds may be `-∞` (free variables, split into two nonnegative
//! parts). The problem is reduced to standard form and solved with the
//! homogeneous self-dual embedding and Mehrotra predictor–corrector steps;
//! the embedding's `τ/κ` pair yields Farkas certificates for infeasible and
//! unbounded problems. Each iteration factors the `m × m` normal matrix
//! `E D Eᵀ` with a dense Cholesky.

use std::collections::HashMap;
use std::io::{self, Write};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub c: DVector<f64>,
    pub e: DMatrix<f64>,
    pub d: DVector<f64>,
    pub lower: Vec<f64>,
}

impl LinearProgram {
    pub fn new(c: DVector<f64>, e: DMatrix<f64>, d: DVector<f64>, lower: Vec<f64>) -> Result<Self> {
        if e.ncols() != c.len() {
            return Err(Error::DimensionMismatch { expected: e.ncols(), got: c.len() });
        }
        if e.nrows() != d.len() {
            return Err(Error::DimensionMismatch { expected: e.nrows(), got: d.len() });
        }
        if lower.len() != c.len() {
            return Err(Error::DimensionMismatch { expected: c.len(), got: lower.len() });
        }
        if lower.iter().any(|&l| l.is_nan() || l == f64::INFINITY) {
            return Err(Error::InvalidArgument("lower bounds must be finite or -inf".into()));
        }
        Ok(LinearProgram { c, e, d, lower })
    }

    /// All variables nonnegative.
    pub fn standard(c: DVector<f64>, e: DMatrix<f64>, d: DVector<f64>) -> Result<Self> {
        let n = c.len();
        Self::new(c, e, d, vec![0.0; n])
    }

    pub fn num_vars(&self) -> usize {
        self.c.len()
    }

    pub fn num_rows(&self) -> usize {
        self.d.len()
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        self.c.iter().zip(x).map(|(c, x)| c * x).sum()
    }

    /// Fixed-format text dump for offline inspection:
    ///
    /// ```text
    /// LP <rows> <cols>
    /// C <c_0> ... <c_{n-1}>
    /// L <lower_0> ...
    /// E <row> <e_row_0> ... <e_row_{n-1}> <d_row>     (one line per row)
    /// END
    /// ```
    ///
    /// Numbers are written with 17 significant digits (`{:.16e}`).
    pub fn write_text<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "LP {} {}", self.num_rows(), self.num_vars())?;
        write!(out, "C")?;
        for v in self.c.iter() {
            write!(out, " {v:.16e}")?;
        }
        writeln!(out)?;
        write!(out, "L")?;
        for v in &self.lower {
            write!(out, " {v:.16e}")?;
        }
        writeln!(out)?;
        for i in 0..self.num_rows() {
            write!(out, "E {i}")?;
            for j in 0..self.num_vars() {
                write!(out, " {:.16e}", self.e[(i, j)])?;
            }
            writeln!(out, " {:.16e}", self.d[i])?;
        }
        writeln!(out, "END")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Relative primal/dual residual tolerance.
    pub tol_feas: f64,
    /// Relative duality gap tolerance.
    pub tol_gap: f64,
    /// Tolerance on Farkas certificates.
    pub tol_infeas: f64,
    pub max_iter: usize,
    /// Fraction-to-boundary step rule.
    pub step_fraction: f64,
    /// Record per-iteration statistics in [`LpSolution::trace`].
    pub trace: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol_feas: 1e-8,
            tol_gap: 1e-8,
            tol_infeas: 1e-8,
            max_iter: 200,
            step_fraction: 0.995,
            trace: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterLimit,
    NumericalFailure,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterStats {
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub mu: f64,
    pub tau: f64,
    pub kappa: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    /// Primal point in the original variables.
    pub x: Vec<f64>,
    /// Equality multipliers (one per original row).
    pub y: Vec<f64>,
    /// Reduced costs `c − Eᵀy` per original variable.
    pub z: Vec<f64>,
    pub objective: f64,
    pub dual_objective: f64,
    pub status: LpStatus,
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub relative_gap: f64,
    /// The equality rows were found (numerically) linearly dependent.
    pub rank_deficient: bool,
    pub trace: Vec<IterStats>,
}

#[derive(Debug, Clone, Copy)]
enum VarMap {
    Shifted { col: usize, lower: f64 },
    Split { pos: usize, neg: usize },
}

/// `min cᵀx, E x = d, x ≥ 0` after bound shifting, free splitting and
/// removal of empty rows.
struct StandardForm {
    c: DVector<f64>,
    e: DMatrix<f64>,
    d: DVector<f64>,
    offset: f64,
    vars: Vec<VarMap>,
    rows: Vec<usize>,
}

fn to_standard_form(lp: &LinearProgram, opts: &SolverOptions) -> std::result::Result<StandardForm, LpStatus> {
    let mut vars = Vec::with_capacity(lp.num_vars());
    let mut ncols = 0;
    for &l in &lp.lower {
        if l == f64::NEG_INFINITY {
            vars.push(VarMap::Split { pos: ncols, neg: ncols + 1 });
            ncols += 2;
        } else {
            vars.push(VarMap::Shifted { col: ncols, lower: l });
            ncols += 1;
        }
    }
    let dnorm = lp.d.amax();
    let mut rows = Vec::new();
    for i in 0..lp.num_rows() {
        if lp.e.row(i).iter().any(|&v| v != 0.0) {
            rows.push(i);
        } else if lp.d[i].abs() > opts.tol_feas * (1.0 + dnorm) {
            return Err(LpStatus::Infeasible);
        }
    }
    let m = rows.len();
    let mut e = DMatrix::zeros(m, ncols);
    let mut c = DVector::zeros(ncols);
    let mut d = DVector::from_iterator(m, rows.iter().map(|&i| lp.d[i]));
    let mut offset = 0.0;
    for (j, map) in vars.iter().enumerate() {
        match *map {
            VarMap::Shifted { col, lower } => {
                c[col] = lp.c[j];
                offset += lp.c[j] * lower;
                for (r, &i) in rows.iter().enumerate() {
                    e[(r, col)] = lp.e[(i, j)];
                    d[r] -= lp.e[(i, j)] * lower;
                }
            }
            VarMap::Split { pos, neg } => {
                c[pos] = lp.c[j];
                c[neg] = -lp.c[j];
                for (r, &i) in rows.iter().enumerate() {
                    e[(r, pos)] = lp.e[(i, j)];
                    e[(r, neg)] = -lp.e[(i, j)];
                }
            }
        }
    }
    Ok(StandardForm { c, e, d, offset, vars, rows })
}

/// Columns equal up to sign share the outer product `e_j e_jᵀ`, so the normal
/// matrix only needs one representative per class.
struct NormalMatrix {
    reps: DMatrix<f64>,
    group_of: Vec<usize>,
    scaled: DMatrix<f64>,
    weights: Vec<f64>,
}

impl NormalMatrix {
    fn new(e: &DMatrix<f64>) -> Self {
        let mut index: HashMap<Vec<u64>, usize> = HashMap::new();
        let mut group_of = Vec::with_capacity(e.ncols());
        let mut rep_cols: Vec<usize> = Vec::new();
        for j in 0..e.ncols() {
            let col = e.column(j);
            let sign = col.iter().find(|v| **v != 0.0).map_or(1.0, |v| v.signum());
            let key: Vec<u64> = col.iter().map(|v| (sign * v + 0.0).to_bits()).collect();
            let next = rep_cols.len();
            let g = *index.entry(key).or_insert(next);
            if g == next {
                rep_cols.push(j);
            }
            group_of.push(g);
        }
        let reps = e.select_columns(rep_cols.iter());
        let scaled = reps.clone();
        let weights = vec![0.0; rep_cols.len()];
        NormalMatrix { reps, group_of, scaled, weights }
    }

    /// `E diag(dvec) Eᵀ`.
    fn assemble(&mut self, dvec: &[f64]) -> DMatrix<f64> {
        self.weights.iter_mut().for_each(|w| *w = 0.0);
        for (j, &g) in self.group_of.iter().enumerate() {
            self.weights[g] += dvec[j];
        }
        for (g, w) in self.weights.iter().enumerate() {
            let r = w.sqrt();
            self.scaled.column_mut(g).zip_apply(&self.reps.column(g), |s, e| *s = e * r);
        }
        &self.scaled * self.scaled.transpose()
    }
}

/// Row-major lower-triangular Cholesky factor. Pivots that collapse (rank
/// deficiency, or extreme scaling late in the iteration) are replaced by a
/// huge value, which zeroes the corresponding solution component.
struct Cholesky {
    n: usize,
    l: Vec<f64>,
    tiny_pivots: usize,
}

impl Cholesky {
    fn factor(a: &DMatrix<f64>) -> Option<Self> {
        let n = a.nrows();
        let maxdiag = (0..n).map(|i| a[(i, i)].abs()).fold(0.0, f64::max);
        let floor = 1e-24 * maxdiag.max(1e-300);
        let mut l = vec![0.0; n * n];
        let mut tiny = 0;
        for i in 0..n {
            for j in 0..=i {
                let (ri, rj) = (&l[i * n..i * n + j], &l[j * n..j * n + j]);
                let s: f64 = ri.iter().zip(rj).map(|(a, b)| a * b).sum();
                if i == j {
                    let piv = a[(i, i)] - s;
                    if !piv.is_finite() {
                        return None;
                    }
                    l[i * n + i] = if piv <= floor {
                        tiny += 1;
                        1e64
                    } else {
                        piv.sqrt()
                    };
                } else {
                    l[i * n + j] = (a[(i, j)] - s) / l[j * n + j];
                }
            }
        }
        Some(Cholesky { n, l, tiny_pivots: tiny })
    }

    fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        let n = self.n;
        let mut x = b.clone();
        for i in 0..n {
            let s: f64 = (0..i).map(|k| self.l[i * n + k] * x[k]).sum();
            x[i] = (x[i] - s) / self.l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in i + 1..n {
                s -= self.l[k * n + i] * x[k];
            }
            x[i] = s / self.l[i * n + i];
        }
        x
    }
}

struct Point {
    x: DVector<f64>,
    y: DVector<f64>,
    s: DVector<f64>,
    tau: f64,
    kappa: f64,
}

struct Direction {
    dx: DVector<f64>,
    dy: DVector<f64>,
    ds: DVector<f64>,
    dtau: f64,
    dkappa: f64,
}

/// Mehrotra's least-squares starting point (with `τ = κ = 1`).
fn starting_point(sf: &StandardForm, normal: &mut NormalMatrix) -> Option<(Point, bool)> {
    let n = sf.c.len();
    let ones = vec![1.0; n];
    let chol = Cholesky::factor(&normal.assemble(&ones))?;
    let x_ls = sf.e.tr_mul(&chol.solve(&sf.d));
    let y_ls = chol.solve(&(&sf.e * &sf.c));
    let s_ls = &sf.c - sf.e.tr_mul(&y_ls);
    let dx = (-1.5 * x_ls.min()).max(0.0);
    let ds = (-1.5 * s_ls.min()).max(0.0);
    let mut x = x_ls.add_scalar(dx);
    let mut s = s_ls.add_scalar(ds);
    let xs = x.dot(&s);
    let (sx, ss) = (x.sum(), s.sum());
    if xs > 0.0 && sx > 0.0 && ss > 0.0 {
        x.add_scalar_mut(0.5 * xs / ss);
        s.add_scalar_mut(0.5 * xs / sx);
    }
    if !(x.min() > 0.0 && s.min() > 0.0) || !x.iter().chain(s.iter()).all(|v| v.is_finite()) {
        x.fill(1.0);
        s.fill(1.0);
    }
    let y = if y_ls.iter().all(|v| v.is_finite()) { y_ls } else { DVector::zeros(sf.d.len()) };
    Some((Point { x, y, s, tau: 1.0, kappa: 1.0 }, chol.tiny_pivots > 0))
}

fn max_step(v: &DVector<f64>, dv: &DVector<f64>, t: f64, dt: f64, k: f64, dk: f64) -> f64 {
    let mut alpha = f64::INFINITY;
    for (a, b) in v.iter().zip(dv.iter()) {
        if *b < 0.0 {
            alpha = alpha.min(-a / b);
        }
    }
    if dt < 0.0 {
        alpha = alpha.min(-t / dt);
    }
    if dk < 0.0 {
        alpha = alpha.min(-k / dk);
    }
    alpha
}

struct Residuals {
    rp: DVector<f64>,
    rd: DVector<f64>,
    rg: f64,
}

fn residuals(sf: &StandardForm, p: &Point) -> Residuals {
    let rp = &sf.d * p.tau - &sf.e * &p.x;
    let rd = &sf.c * p.tau - sf.e.tr_mul(&p.y) - &p.s;
    let rg = p.kappa + sf.c.dot(&p.x) - sf.d.dot(&p.y);
    Residuals { rp, rd, rg }
}

/// Solves the embedding's Newton system for the given right-hand sides:
///
/// ```text
///   E Δx − d Δτ = ξp,   EᵀΔy + Δs − c Δτ = ξd,   dᵀΔy − cᵀΔx − Δκ = ξg,
///   S Δx + X Δs = ξxs,  κ Δτ + τ Δκ = ξτκ.
/// ```
#[allow(clippy::too_many_arguments)]
fn newton_direction(
    sf: &StandardForm,
    p: &Point,
    dvec: &DVector<f64>,
    chol: &Cholesky,
    q: &DVector<f64>,
    v: &DVector<f64>,
    xi_p: &DVector<f64>,
    xi_d: &DVector<f64>,
    xi_g: f64,
    xi_xs: &DVector<f64>,
    xi_tk: f64,
) -> Direction {
    let xinv_xi = xi_xs.component_div(&p.x);
    let w = (xi_d - &xinv_xi).component_mul(dvec);
    let rhs = xi_p + &sf.e * &w;
    let py = chol.solve(&rhs);
    let u = (sf.e.tr_mul(&py) - xi_d + &xinv_xi).component_mul(dvec);
    let denom = sf.d.dot(q) - sf.c.dot(v) + p.kappa / p.tau;
    let dtau = (xi_g - sf.d.dot(&py) + sf.c.dot(&u) + xi_tk / p.tau) / denom;
    let dy = py + q * dtau;
    let dx = u + v * dtau;
    let ds = (xi_xs - dx.component_mul(&p.s)).component_div(&p.x);
    let dkappa = (xi_tk - p.kappa * dtau) / p.tau;
    Direction { dx, dy, ds, dtau, dkappa }
}

fn trivial_solution(lp: &LinearProgram, sf: &StandardForm) -> LpSolution {
    // No equality rows survive presolve: each variable sits at its bound
    // unless its cost makes the problem unbounded.
    let unbounded = sf.c.iter().any(|&c| c < 0.0);
    let xs = DVector::zeros(sf.c.len());
    finish(
        lp,
        sf,
        &xs,
        &DVector::zeros(0),
        &sf.c.clone(),
        if unbounded { LpStatus::Unbounded } else { LpStatus::Optimal },
        0,
        (0.0, 0.0, 0.0),
        false,
        Vec::new(),
    )
}

#[allow(clippy::too_many_arguments)]
fn finish(
    lp: &LinearProgram,
    sf: &StandardForm,
    xs: &DVector<f64>,
    ys: &DVector<f64>,
    zs: &DVector<f64>,
    status: LpStatus,
    iterations: usize,
    (primal_residual, dual_residual, relative_gap): (f64, f64, f64),
    rank_deficient: bool,
    trace: Vec<IterStats>,
) -> LpSolution {
    let mut x = Vec::with_capacity(lp.num_vars());
    let mut z = Vec::with_capacity(lp.num_vars());
    for map in &sf.vars {
        match *map {
            VarMap::Shifted { col, lower } => {
                x.push(lower + xs[col]);
                z.push(zs[col]);
            }
            VarMap::Split { pos, neg } => {
                x.push(xs[pos] - xs[neg]);
                z.push(zs[pos] - zs[neg]);
            }
        }
    }
    let mut y = vec![0.0; lp.num_rows()];
    for (r, &i) in sf.rows.iter().enumerate() {
        y[i] = ys[r];
    }
    let objective = lp.objective(&x);
    let dual_objective = sf.d.dot(ys) + sf.offset;
    LpSolution {
        x,
        y,
        z,
        objective,
        dual_objective,
        status,
        iterations,
        primal_residual,
        dual_residual,
        relative_gap,
        rank_deficient,
        trace,
    }
}

/// Solves `lp`. Never panics on bad numerics; the outcome is in
/// [`LpSolution::status`].
pub fn solve(lp: &LinearProgram, opts: &SolverOptions) -> LpSolution {
    let sf = match to_standard_form(lp, opts) {
        Ok(sf) => sf,
        Err(status) => {
            return LpSolution {
                x: lp.lower.iter().map(|&l| if l.is_finite() { l } else { 0.0 }).collect(),
                y: vec![0.0; lp.num_rows()],
                z: lp.c.iter().copied().collect(),
                objective: f64::NAN,
                dual_objective: f64::NAN,
                status,
                iterations: 0,
                primal_residual: f64::INFINITY,
                dual_residual: f64::NAN,
                relative_gap: f64::NAN,
                rank_deficient: false,
                trace: Vec::new(),
            }
        }
    };
    if sf.d.is_empty() || sf.c.is_empty() {
        return trivial_solution(lp, &sf);
    }
    let n = sf.c.len();
    let mut normal = NormalMatrix::new(&sf.e);
    let failed = |sf: &StandardForm, it: usize, trace: Vec<IterStats>| {
        finish(
            lp,
            sf,
            &DVector::zeros(n),
            &DVector::zeros(sf.d.len()),
            &sf.c.clone(),
            LpStatus::NumericalFailure,
            it,
            (f64::NAN, f64::NAN, f64::NAN),
            false,
            trace,
        )
    };
    let Some((mut p, rank_deficient)) = starting_point(&sf, &mut normal) else {
        return failed(&sf, 0, Vec::new());
    };

    let dnorm = sf.d.amax();
    let cnorm = sf.c.amax();
    let mut trace = Vec::new();
    let mut status = LpStatus::IterLimit;
    let mut iterations = 0;
    let mut metrics = (f64::INFINITY, f64::INFINITY, f64::INFINITY);

    for it in 0..=opts.max_iter {
        iterations = it;
        let res = residuals(&sf, &p);
        let mu = (p.x.dot(&p.s) + p.tau * p.kappa) / (n as f64 + 1.0);

        let xt = &p.x / p.tau;
        let yt = &p.y / p.tau;
        let st = &p.s / p.tau;
        let pobj = sf.c.dot(&xt);
        let dobj = sf.d.dot(&yt);
        let rp = res.rp.amax() / p.tau / (1.0 + dnorm);
        let rd = res.rd.amax() / p.tau / (1.0 + cnorm);
        let gap = (pobj - dobj).abs().max(xt.dot(&st)) / (1.0 + pobj.abs());
        metrics = (rp, rd, gap);
        if opts.trace {
            trace.push(IterStats {
                primal_objective: pobj + sf.offset,
                dual_objective: dobj + sf.offset,
                primal_residual: rp,
                dual_residual: rd,
                mu,
                tau: p.tau,
                kappa: p.kappa,
            });
        }
        if !(rp.is_finite() && rd.is_finite() && gap.is_finite()) {
            status = LpStatus::NumericalFailure;
            break;
        }
        if rp <= opts.tol_feas && rd <= opts.tol_feas && gap <= opts.tol_gap {
            status = LpStatus::Optimal;
            break;
        }
        if p.tau < p.kappa {
            let by = sf.d.dot(&p.y);
            let ety = sf.e.tr_mul(&p.y);
            let viol = ety.iter().fold(0.0f64, |m, v| m.max(*v));
            if by > 0.0 && viol <= opts.tol_infeas * by {
                status = LpStatus::Infeasible;
                break;
            }
            let cx = sf.c.dot(&p.x);
            let ex = (&sf.e * &p.x).amax();
            if cx < 0.0 && ex <= opts.tol_infeas * (-cx) {
                status = LpStatus::Unbounded;
                break;
            }
        }
        if it == opts.max_iter {
            break;
        }

        let dvec = p.x.component_div(&p.s);
        let Some(chol) = Cholesky::factor(&normal.assemble(dvec.as_slice())) else {
            status = LpStatus::NumericalFailure;
            break;
        };
        let q = chol.solve(&(&sf.e * sf.c.component_mul(&dvec) + &sf.d));
        let v = (sf.e.tr_mul(&q) - &sf.c).component_mul(&dvec);

        // predictor
        let xs = p.x.component_mul(&p.s);
        let aff = newton_direction(
            &sf, &p, &dvec, &chol, &q, &v, &res.rp, &res.rd, res.rg, &(-&xs), -p.tau * p.kappa,
        );
        let a_aff = max_step(&p.x, &aff.dx, p.tau, aff.dtau, p.kappa, aff.dkappa)
            .min(max_step(&p.s, &aff.ds, p.tau, aff.dtau, p.kappa, aff.dkappa))
            .min(1.0);
        let mu_aff = ((&p.x + &aff.dx * a_aff).dot(&(&p.s + &aff.ds * a_aff))
            + (p.tau + a_aff * aff.dtau) * (p.kappa + a_aff * aff.dkappa))
            / (n as f64 + 1.0);
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

        // corrector
        let eta = 1.0 - sigma;
        let xi_xs = (xs + aff.dx.component_mul(&aff.ds)).map(|v| sigma * mu - v);
        let xi_tk = sigma * mu - p.tau * p.kappa - aff.dtau * aff.dkappa;
        let dir = newton_direction(
            &sf,
            &p,
            &dvec,
            &chol,
            &q,
            &v,
            &(&res.rp * eta),
            &(&res.rd * eta),
            res.rg * eta,
            &xi_xs,
            xi_tk,
        );
        let a_max = max_step(&p.x, &dir.dx, p.tau, dir.dtau, p.kappa, dir.dkappa)
            .min(max_step(&p.s, &dir.ds, p.tau, dir.dtau, p.kappa, dir.dkappa));
        let alpha = (opts.step_fraction * a_max).min(1.0);
        if !alpha.is_finite() || alpha <= 0.0 {
            status = LpStatus::NumericalFailure;
            break;
        }
        p.x += &dir.dx * alpha;
        p.y += &dir.dy * alpha;
        p.s += &dir.ds * alpha;
        p.tau += alpha * dir.dtau;
        p.kappa += alpha * dir.dkappa;
        if !(p.tau > 0.0 && p.tau.is_finite() && p.kappa.is_finite()) {
            status = LpStatus::NumericalFailure;
            break;
        }
    }

    match status {
        LpStatus::Infeasible | LpStatus::Unbounded => finish(
            lp, &sf, &p.x, &p.y, &p.s, status, iterations, metrics, rank_deficient, trace,
        ),
        LpStatus::NumericalFailure if !metrics.0.is_finite() => failed(&sf, iterations, trace),
        _ => finish(
            lp,
            &sf,
            &(&p.x / p.tau),
            &(&p.y / p.tau),
            &(&p.s / p.tau),
            status,
            iterations,
            metrics,
            rank_deficient,
            trace,
        ),
    }
}
