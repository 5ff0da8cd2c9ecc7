//! Asymptotic exponents of the union bound and the recoverability region.
//!
//! With `t_j = t_j' n`, each union-bound term behaves like
//! `exp{n (ψ_com − ψ_int − ψ_ext)}`. Weak recovery holds when
//! `ψ_total = ψ_com − ψ_int − ψ_ext` is uniformly negative over
//! `0 ≤ t_j' ≤ γ_j(1−P_j)`, `t1' + t2' > δ − (γ1P1 + γ2P2)`.
//!
//! The closed forms for `ψ_ext` and `ψ_int` come in a few readings that
//! differ in small details (the density in the stationarity equation, the
//! half-normal cumulant function, the mixture weights of the rate function,
//! the form of the quadratic penalty and what plays the role of the
//! dimension ratio `m`). [`ExponentVariant`] selects between them;
//! [`ExponentVariant::ACCEPTED`] is the reading that agrees with the
//! finite-`n` angles of [`crate::angles`], and [`psi_int_saddle`] gives the
//! same internal exponent through the variational form
//! `ψ_int = τ ln 2 − min_θ [Ω θ²/4 + t1' ln erfcx(θ/2) + t2' ln erfcx(Wθ/2)]`.

use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{binary_entropy, erf, erf_log_derivative, erfcx, half_normal_cgf, ln_erf, normal_hazard};
use std::f64::consts::{FRAC_2_SQRT_PI, LN_2};

/// Slack allowed when checking that `t'` lies in its range.
const RANGE_SLACK: f64 = 1e-12;

/// `ψ_total ≤ 0` everywhere, with equality at the dominant face size, so a
/// region containing that point has a maximum that is zero up to rounding.
/// Maxima above `−ZERO_EXPONENT_TOL` are treated as zero.
pub const ZERO_EXPONENT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticConfig {
    pub delta: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub p1: f64,
    pub p2: f64,
    /// `W2` with `W1 = 1`.
    pub w: f64,
}

impl AsymptoticConfig {
    pub fn new(delta: f64, gamma1: f64, gamma2: f64, p1: f64, p2: f64, w: f64) -> Result<Self> {
        let cfg = AsymptoticConfig { delta, gamma1, gamma2, p1, p2, w };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::Domain(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        if !unit(self.gamma1) || !unit(self.gamma2) || (self.gamma1 + self.gamma2 - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!(
                "gamma1, gamma2 must be fractions summing to 1, got {} and {}",
                self.gamma1, self.gamma2
            )));
        }
        if !unit(self.p1) || !unit(self.p2) {
            return Err(Error::Domain(format!("P1, P2 must lie in [0, 1], got {} and {}", self.p1, self.p2)));
        }
        if !(self.w > 0.0 && self.w.is_finite()) {
            return Err(Error::Domain(format!("W must be positive, got {}", self.w)));
        }
        Ok(())
    }

    pub fn with_p1(&self, p1: f64) -> Self {
        AsymptoticConfig { p1, ..*self }
    }

    pub fn with_w(&self, w: f64) -> Self {
        AsymptoticConfig { w, ..*self }
    }

    /// Expected support fraction `k/n`.
    pub fn rho(&self) -> f64 {
        self.gamma1 * self.p1 + self.gamma2 * self.p2
    }

    /// Range of `t1'`.
    pub fn a1(&self) -> f64 {
        self.gamma1 * (1.0 - self.p1)
    }

    /// Range of `t2'`.
    pub fn a2(&self) -> f64 {
        self.gamma2 * (1.0 - self.p2)
    }

    /// Support weight energy per coordinate, `γ1P1 + W²γ2P2`.
    pub fn omega(&self) -> f64 {
        self.gamma1 * self.p1 + self.w * self.w * self.gamma2 * self.p2
    }

    /// Lower end of the summation region in `t1' + t2'`.
    pub fn min_face_excess(&self) -> f64 {
        self.delta - self.rho()
    }
}

/// Density used in the stationarity equation of the external exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExtDensity {
    /// `G'(x) = (2/√π) e^{−x²}`.
    ErfDerivative,
    /// `(2/√π) e^{−x²/2}`.
    HalfVariance,
}

/// Form of the half-normal cumulant function `Λ1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HalfNormalCgf {
    /// `s²/2 + ln 2Φ(s)`.
    Cdf,
    /// `s²/2 + ln 2φ(s)`.
    Pdf,
}

/// Coefficients of `Λ1(s)` and `Λ1(Ws)` in the rate function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MixtureWeights {
    /// `t1'/τ` and `t2'/τ`.
    Convex,
    /// `t1'/τ` on both terms.
    FirstRepeated,
}

/// Penalty added to `Λ*(y)`: `(m/2Ω) y²` or `(m/2Ω) y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RatePenalty {
    Quadratic,
    Linear,
}

/// Quantity standing for `m` in the internal exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DimensionScale {
    /// `τ = t1' + t2'`.
    FaceExcess,
    /// `δ = m/n`.
    MeasurementRatio,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExponentVariant {
    pub ext_density: ExtDensity,
    pub cgf: HalfNormalCgf,
    pub mixture: MixtureWeights,
    pub penalty: RatePenalty,
    pub scale: DimensionScale,
}

impl ExponentVariant {
    pub const ACCEPTED: ExponentVariant = ExponentVariant {
        ext_density: ExtDensity::ErfDerivative,
        cgf: HalfNormalCgf::Cdf,
        mixture: MixtureWeights::Convex,
        penalty: RatePenalty::Quadratic,
        scale: DimensionScale::FaceExcess,
    };

    /// The formulas taken symbol for symbol.
    pub const LITERAL: ExponentVariant = ExponentVariant {
        ext_density: ExtDensity::HalfVariance,
        cgf: HalfNormalCgf::Pdf,
        mixture: MixtureWeights::FirstRepeated,
        penalty: RatePenalty::Linear,
        scale: DimensionScale::MeasurementRatio,
    };
}

impl Default for ExponentVariant {
    fn default() -> Self {
        Self::ACCEPTED
    }
}

/// Root and residual of a one-dimensional stationarity equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Root {
    pub value: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentPoint {
    pub t1p: f64,
    pub t2p: f64,
    pub psi_com: f64,
    pub psi_int: f64,
    pub psi_ext: f64,
    pub psi_total: f64,
    /// `x0` of the external exponent (absent when no vertex lies outside).
    pub x0: Option<Root>,
    /// `s*` of the internal exponent (absent when `t1' + t2' = 0`).
    pub s_star: Option<Root>,
}

fn check_range(t1p: f64, t2p: f64, cfg: &AsymptoticConfig) -> Result<(f64, f64)> {
    let inside = |t: f64, a: f64| t >= -RANGE_SLACK && t <= a + RANGE_SLACK;
    if !inside(t1p, cfg.a1()) || !inside(t2p, cfg.a2()) {
        return Err(Error::Domain(format!(
            "(t1', t2') = ({t1p}, {t2p}) outside [0, {}] x [0, {}]",
            cfg.a1(),
            cfg.a2()
        )));
    }
    Ok((t1p.clamp(0.0, cfg.a1()), t2p.clamp(0.0, cfg.a2())))
}

/// Exponent of `2^{t1+t2} C((1−P1)n1, t1) C((1−P2)n2, t2)`.
pub fn psi_com(t1p: f64, t2p: f64, cfg: &AsymptoticConfig) -> Result<f64> {
    let (t1p, t2p) = check_range(t1p, t2p, cfg)?;
    let part = |t: f64, a: f64| if a > 0.0 { a * binary_entropy(t / a) } else { 0.0 };
    Ok((t1p + t2p) * LN_2 + part(t1p, cfg.a1()) + part(t2p, cfg.a2()))
}

/// Finds the root of an increasing function on `(0, ∞)`, where `f → −∞` at
/// zero and `f > 0` for large arguments.
fn increasing_root_positive<F: Fn(f64) -> f64>(f: F, what: &'static str) -> Result<Root> {
    let (mut lo, mut hi) = (1.0, 1.0);
    let mut steps = 0;
    while f(lo) >= 0.0 {
        lo *= 0.5;
        steps += 1;
        if steps > 1100 {
            return Err(Error::RootBracketFailure { what, detail: format!("no negative value down to x = {lo:e}") });
        }
    }
    steps = 0;
    while f(hi) <= 0.0 {
        hi *= 2.0;
        steps += 1;
        if steps > 1100 {
            return Err(Error::RootBracketFailure { what, detail: format!("no positive value up to x = {hi:e}") });
        }
    }
    Ok(bisect_to_precision(&f, lo, hi))
}

/// Bisection down to adjacent floats; `f(lo) < 0 < f(hi)`.
fn bisect_to_precision<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64) -> Root {
    let (mut flo, mut fhi) = (f(lo), f(hi));
    for _ in 0..2100 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Root { value: mid, residual: 0.0 };
        }
        if fm < 0.0 {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
            fhi = fm;
        }
    }
    if -flo < fhi {
        Root { value: lo, residual: -flo }
    } else {
        Root { value: hi, residual: fhi }
    }
}

/// External exponent and its stationary point `x0`.
pub fn psi_ext_with(t1p: f64, t2p: f64, cfg: &AsymptoticConfig, variant: &ExponentVariant) -> Result<(f64, Option<Root>)> {
    let (t1p, t2p) = check_range(t1p, t2p, cfg)?;
    let w = cfg.w;
    let c = (t1p + cfg.gamma1 * cfg.p1) + w * w * (t2p + cfg.gamma2 * cfg.p2);
    let d1 = (cfg.a1() - t1p).max(0.0);
    let d2 = (cfg.a2() - t2p).max(0.0);
    if d1 == 0.0 && d2 == 0.0 {
        return Ok((0.0, None));
    }
    if c <= 0.0 {
        return Err(Error::Domain("external exponent needs C > 0".into()));
    }
    // q(x) = g(x) / (x G(x))
    let q = |x: f64| match variant.ext_density {
        ExtDensity::ErfDerivative => erf_log_derivative(x) / x,
        ExtDensity::HalfVariance => {
            if x < 1e-8 {
                FRAC_2_SQRT_PI / (x * x * FRAC_2_SQRT_PI)
            } else {
                FRAC_2_SQRT_PI * (-0.5 * x * x).exp() / (x * erf(x))
            }
        }
    };
    let h = |x: f64| {
        let mut v = 2.0 * c;
        if d1 > 0.0 {
            v -= d1 * q(x);
        }
        if d2 > 0.0 {
            v -= w * w * d2 * q(w * x);
        }
        v
    };
    let root = increasing_root_positive(h, "external exponent x0")?;
    let x0 = root.value;
    let mut psi = c * x0 * x0;
    if d1 > 0.0 {
        psi -= d1 * ln_erf(x0);
    }
    if d2 > 0.0 {
        psi -= d2 * ln_erf(w * x0);
    }
    Ok((psi, Some(root)))
}

pub fn psi_ext(t1p: f64, t2p: f64, cfg: &AsymptoticConfig) -> Result<f64> {
    Ok(psi_ext_with(t1p, t2p, cfg, &ExponentVariant::ACCEPTED)?.0)
}

/// Internal exponent and the root `s*`.
pub fn psi_int_with(t1p: f64, t2p: f64, cfg: &AsymptoticConfig, variant: &ExponentVariant) -> Result<(f64, Root)> {
    let (t1p, t2p) = check_range(t1p, t2p, cfg)?;
    let tau = t1p + t2p;
    if tau <= 0.0 {
        return Err(Error::Domain("internal exponent needs t1' + t2' > 0".into()));
    }
    let omega = cfg.omega();
    if omega <= 0.0 {
        return Err(Error::Domain("internal exponent needs a nonempty support".into()));
    }
    let w = cfg.w;
    let (f1, f2) = (t1p / tau, t2p / tau);
    let b = f1 + w * w * f2;
    let q = |s: f64| f1 * normal_hazard(s) + f2 * w * normal_hazard(w * s);
    let m = match variant.scale {
        DimensionScale::FaceExcess => tau,
        DimensionScale::MeasurementRatio => cfg.delta,
    };
    // −s/Q(s) = m/(mb + Ω)  ⇔  s + c Q(s) = 0 with c b < 1, increasing in s
    let coef = m / (m * b + omega);
    let f = |s: f64| s + coef * q(s);
    let mut lo = -1.0;
    let mut steps = 0;
    while f(lo) >= 0.0 {
        lo *= 2.0;
        steps += 1;
        if steps > 1100 {
            return Err(Error::RootBracketFailure { what: "internal exponent s*", detail: format!("F > 0 down to s = {lo:e}") });
        }
    }
    let root = bisect_to_precision(&f, lo, 0.0);
    let s = root.value;
    let y = b * s + q(s);
    let lambda1 = |u: f64| match variant.cgf {
        HalfNormalCgf::Cdf => half_normal_cgf(u),
        HalfNormalCgf::Pdf => (2.0 / (2.0 * std::f64::consts::PI).sqrt()).ln(),
    };
    let second = match variant.mixture {
        MixtureWeights::Convex => f2,
        MixtureWeights::FirstRepeated => f1,
    };
    let rate = s * y - f1 * lambda1(s) - second * lambda1(w * s);
    let penalty = match variant.penalty {
        RatePenalty::Quadratic => m / (2.0 * omega) * y * y,
        RatePenalty::Linear => m / (2.0 * omega) * y,
    };
    Ok(((rate + penalty + LN_2) * tau, root))
}

pub fn psi_int(t1p: f64, t2p: f64, cfg: &AsymptoticConfig) -> Result<f64> {
    Ok(psi_int_with(t1p, t2p, cfg, &ExponentVariant::ACCEPTED)?.0)
}

/// Internal exponent from its variational form
/// `τ ln 2 − min_θ [Ω θ²/4 + t1' ln erfcx(θ/2) + t2' ln erfcx(Wθ/2)]`.
pub fn psi_int_saddle(t1p: f64, t2p: f64, cfg: &AsymptoticConfig) -> Result<f64> {
    let (t1p, t2p) = check_range(t1p, t2p, cfg)?;
    let omega = cfg.omega();
    if omega <= 0.0 {
        return Err(Error::Domain("internal exponent needs a nonempty support".into()));
    }
    let w = cfg.w;
    let dl = |y: f64| 2.0 * y - FRAC_2_SQRT_PI / erfcx(y);
    let slope = |th: f64| 0.5 * omega * th + 0.5 * t1p * dl(0.5 * th) + 0.5 * w * t2p * dl(0.5 * w * th);
    if t1p + t2p <= 0.0 {
        return Ok(0.0);
    }
    let hi = 2.0 * (t1p + w * t2p) / (std::f64::consts::PI.sqrt() * omega);
    let th = bisect_to_precision(&slope, 0.0, hi.max(1e-300)).value;
    let k = 0.25 * omega * th * th + t1p * erfcx(0.5 * th).ln() + t2p * erfcx(0.5 * w * th).ln();
    Ok((t1p + t2p) * LN_2 - k)
}

/// All exponents at one point; `ψ_int` is taken as zero at `t1' + t2' = 0`.
pub fn exponent_point(t1p: f64, t2p: f64, cfg: &AsymptoticConfig, variant: &ExponentVariant) -> Result<ExponentPoint> {
    let psi_com = psi_com(t1p, t2p, cfg)?;
    let (psi_ext, x0) = psi_ext_with(t1p, t2p, cfg, variant)?;
    let (psi_int, s_star) = if t1p + t2p > 0.0 {
        let (v, r) = psi_int_with(t1p, t2p, cfg, variant)?;
        (v, Some(r))
    } else {
        (0.0, None)
    };
    Ok(ExponentPoint {
        t1p,
        t2p,
        psi_com,
        psi_int,
        psi_ext,
        psi_total: psi_com - psi_int - psi_ext,
        x0,
        s_star,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOptions {
    /// Grid points per axis over the `(t1', t2')` rectangle.
    pub grid: usize,
    /// Extra points on the line `t1' + t2' = δ − ρ`.
    pub boundary_points: usize,
    /// Polish the grid maximum with Nelder–Mead.
    pub refine: bool,
    pub variant: ExponentVariant,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { grid: 200, boundary_points: 200, refine: true, variant: ExponentVariant::ACCEPTED }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentSurface {
    pub config: AsymptoticConfig,
    pub points: Vec<ExponentPoint>,
    /// Largest `ψ_total` found (after refinement), if the region is nonempty.
    pub max: Option<ExponentPoint>,
}

impl ExponentSurface {
    pub fn max_psi(&self) -> f64 {
        self.max.map_or(f64::NEG_INFINITY, |p| p.psi_total)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "t1p,t2p,psi_com,psi_int,psi_ext,psi_total")?;
        for p in &self.points {
            writeln!(out, "{},{},{},{},{},{}", p.t1p, p.t2p, p.psi_com, p.psi_int, p.psi_ext, p.psi_total)?;
        }
        Ok(())
    }
}

/// Moves a point into the summation region.
fn project(t: [f64; 2], cfg: &AsymptoticConfig, s0: f64) -> [f64; 2] {
    let (a1, a2, s0) = (cfg.a1(), cfg.a2(), s0.max(0.0));
    let mut t1 = t[0].clamp(0.0, a1);
    let mut t2 = t[1].clamp(0.0, a2);
    let short = s0 - (t1 + t2);
    if short > 0.0 {
        let room1 = a1 - t1;
        let room2 = a2 - t2;
        let add1 = (0.5 * short).min(room1).max(short - room2).min(room1);
        t1 += add1;
        t2 = (t2 + short - add1).min(a2);
    }
    [t1, t2]
}

/// Maximizes `f` over the plane from `start` with initial step `step`.
fn nelder_mead<F: Fn([f64; 2]) -> f64>(f: F, start: [f64; 2], step: [f64; 2], iters: usize) -> ([f64; 2], f64) {
    let mut simplex = [start, [start[0] + step[0], start[1]], [start[0], start[1] + step[1]]];
    let mut vals = simplex.map(&f);
    for _ in 0..iters {
        let mut order = [0, 1, 2];
        order.sort_by(|&a, &b| vals[b].total_cmp(&vals[a]));
        simplex = order.map(|i| simplex[i]);
        vals = order.map(|i| vals[i]);
        if (vals[0] - vals[2]).abs() <= 1e-14 * (1.0 + vals[0].abs()) {
            break;
        }
        let centroid = [0.5 * (simplex[0][0] + simplex[1][0]), 0.5 * (simplex[0][1] + simplex[1][1])];
        let along = |t: f64| [centroid[0] + t * (simplex[2][0] - centroid[0]), centroid[1] + t * (simplex[2][1] - centroid[1])];
        let reflected = along(-1.0);
        let fr = f(reflected);
        if fr > vals[0] {
            let expanded = along(-2.0);
            let fe = f(expanded);
            if fe > fr {
                simplex[2] = expanded;
                vals[2] = fe;
            } else {
                simplex[2] = reflected;
                vals[2] = fr;
            }
        } else if fr > vals[1] {
            simplex[2] = reflected;
            vals[2] = fr;
        } else {
            let contracted = if fr > vals[2] { along(-0.5) } else { along(0.5) };
            let fc = f(contracted);
            if fc > vals[2].max(fr) {
                simplex[2] = contracted;
                vals[2] = fc;
            } else {
                for i in 1..3 {
                    simplex[i] = [0.5 * (simplex[0][0] + simplex[i][0]), 0.5 * (simplex[0][1] + simplex[i][1])];
                    vals[i] = f(simplex[i]);
                }
            }
        }
    }
    let best = (0..3).max_by(|&a, &b| vals[a].total_cmp(&vals[b]).then(b.cmp(&a))).unwrap();
    (simplex[best], vals[best])
}

/// Feasible-direction compass search for a maximum of `f` over the region.
/// The direction set contains the edge directions of the box and of the
/// line `t1' + t2' = const`, so it also converges on the boundary.
fn compass_polish<F: Fn([f64; 2]) -> f64, I: Fn([f64; 2]) -> bool>(
    f: F,
    feasible: I,
    start: [f64; 2],
    mut step: f64,
    min_step: f64,
) -> ([f64; 2], f64) {
    const DIRS: [[f64; 2]; 6] = [
        [1.0, 0.0],
        [-1.0, 0.0],
        [0.0, 1.0],
        [0.0, -1.0],
        [std::f64::consts::FRAC_1_SQRT_2, -std::f64::consts::FRAC_1_SQRT_2],
        [-std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2],
    ];
    let (mut x, mut fx) = (start, f(start));
    let mut evals = 0;
    while step > min_step && evals < 5000 {
        let mut moved = false;
        for d in DIRS {
            let y = [x[0] + step * d[0], x[1] + step * d[1]];
            if !feasible(y) {
                continue;
            }
            evals += 1;
            let fy = f(y);
            if fy > fx {
                x = y;
                fx = fy;
                moved = true;
                break;
            }
        }
        if !moved {
            step *= 0.5;
        }
    }
    (x, fx)
}

/// Evaluates `ψ_total` over the summation region.
pub fn exponent_surface(cfg: &AsymptoticConfig, opts: &SearchOptions) -> Result<ExponentSurface> {
    surface_above(cfg, cfg.min_face_excess(), opts)
}

/// Point where `ψ_total` reaches its maximum (zero) over the whole
/// rectangle, ignoring the lower limit on `t1' + t2'`. `None` for an empty
/// support.
pub fn dominant_point(cfg: &AsymptoticConfig, opts: &SearchOptions) -> Result<Option<ExponentPoint>> {
    Ok(surface_above(cfg, 0.0, &SearchOptions { boundary_points: 0, ..*opts })?.max)
}

fn surface_above(cfg: &AsymptoticConfig, s0: f64, opts: &SearchOptions) -> Result<ExponentSurface> {
    cfg.validate()?;
    let (a1, a2) = (cfg.a1(), cfg.a2());
    if s0 > a1 + a2 + RANGE_SLACK || cfg.omega() <= 0.0 {
        return Ok(ExponentSurface { config: *cfg, points: Vec::new(), max: None });
    }
    let axis = |a: f64| -> Vec<f64> {
        if a <= 0.0 || opts.grid < 2 {
            vec![0.0]
        } else {
            (0..opts.grid).map(|i| a * i as f64 / (opts.grid - 1) as f64).collect()
        }
    };
    let mut coords = Vec::new();
    for &t1 in &axis(a1) {
        for &t2 in &axis(a2) {
            let s = t1 + t2;
            if s > 0.0 && s >= s0 {
                coords.push((t1, t2));
            }
        }
    }
    let s0p = s0.max(0.0);
    let (lo, hi) = ((s0p - a2).max(0.0), s0p.min(a1));
    if opts.boundary_points > 1 && hi >= lo && s0p > 0.0 {
        for i in 0..opts.boundary_points {
            let t1 = lo + (hi - lo) * i as f64 / (opts.boundary_points - 1) as f64;
            coords.push((t1, (s0p - t1).clamp(0.0, a2)));
        }
    }
    let variant = opts.variant;
    let points = coords
        .par_iter()
        .map(|&(t1, t2)| exponent_point(t1, t2, cfg, &variant))
        .collect::<Result<Vec<_>>>()?;
    let mut best = points
        .iter()
        .copied()
        .reduce(|a, b| if b.psi_total > a.psi_total { b } else { a });
    if let (Some(start), true) = (best, opts.refine) {
        // points outside the region are scored at their projection minus a
        // distance penalty, which keeps the simplex from flattening
        let objective = |t: [f64; 2]| {
            let p = project(t, cfg, s0);
            if p[0] + p[1] <= 0.0 {
                return f64::NEG_INFINITY;
            }
            let off = (t[0] - p[0]).powi(2) + (t[1] - p[1]).powi(2);
            exponent_point(p[0], p[1], cfg, &variant).map_or(f64::NEG_INFINITY, |e| e.psi_total - 10.0 * off)
        };
        let step = [a1.max(1e-3) / opts.grid.max(2) as f64, a2.max(1e-3) / opts.grid.max(2) as f64];
        let (t, v) = nelder_mead(objective, [start.t1p, start.t2p], step, 400);
        let mut at = [start.t1p, start.t2p];
        if v > start.psi_total {
            at = project(t, cfg, s0);
        }
        let feasible = |t: [f64; 2]| {
            t[0] >= 0.0 && t[1] >= 0.0 && t[0] <= a1 && t[1] <= a2 && t[0] + t[1] >= s0 && t[0] + t[1] > 0.0
        };
        let value = |t: [f64; 2]| exponent_point(t[0], t[1], cfg, &variant).map_or(f64::NEG_INFINITY, |e| e.psi_total);
        let (t, _) = if feasible(at) { compass_polish(value, feasible, at, step[0].max(step[1]), 1e-11) } else { (at, 0.0) };
        let polished = exponent_point(t[0], t[1], cfg, &variant)?;
        if best.is_none_or(|b| polished.psi_total > b.psi_total) {
            best = Some(polished);
        }
    }
    Ok(ExponentSurface { config: *cfg, points, max: best })
}

/// `true` iff `ψ_total < −margin` throughout the summation region (with
/// [`ZERO_EXPONENT_TOL`] added to the margin).
pub fn recoverable(cfg: &AsymptoticConfig, margin: f64) -> Result<(bool, ExponentSurface)> {
    recoverable_with(cfg, margin, &SearchOptions::default())
}

pub fn recoverable_with(cfg: &AsymptoticConfig, margin: f64, opts: &SearchOptions) -> Result<(bool, ExponentSurface)> {
    if margin < 0.0 {
        return Err(Error::InvalidArgument(format!("margin must be nonnegative, got {margin}")));
    }
    cfg.validate()?;
    if cfg.rho() >= cfg.delta {
        return Ok((false, ExponentSurface { config: *cfg, points: Vec::new(), max: None }));
    }
    let surface = exponent_surface(cfg, opts)?;
    let ok = surface.max_psi() < -(margin + ZERO_EXPONENT_TOL);
    Ok((ok, surface))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdOptions {
    /// Absolute tolerance on the returned `P1`.
    pub tol: f64,
    pub margin: f64,
    pub search: SearchOptions,
}

impl Default for ThresholdOptions {
    fn default() -> Self {
        ThresholdOptions { tol: 1e-3, margin: 0.0, search: SearchOptions { grid: 60, ..Default::default() } }
    }
}

/// Recoverability at one `P1`. With zero margin the test asks whether the
/// dominant point (where `ψ_total = 0`) lies below the summation region,
/// which is equivalent to `max ψ_total < 0` over the region but, unlike the
/// maximum itself, changes sign transversally and so localizes the
/// threshold sharply.
fn recoverable_at(cfg: &AsymptoticConfig, margin: f64, search: &SearchOptions) -> Result<bool> {
    if cfg.rho() >= cfg.delta {
        return Ok(false);
    }
    if margin > 0.0 {
        return Ok(exponent_surface(cfg, search)?.max_psi() < -(margin + ZERO_EXPONENT_TOL));
    }
    Ok(match dominant_point(cfg, search)? {
        Some(p) => p.t1p + p.t2p < cfg.min_face_excess(),
        None => true,
    })
}

/// Supremum of the recoverable `P1` for fixed `(δ, P2, γ1, γ2, W)`, by
/// bisection on the recoverability predicate.
pub fn threshold_p1(delta: f64, p2: f64, gamma1: f64, gamma2: f64, w: f64) -> Result<f64> {
    threshold_p1_with(&AsymptoticConfig::new(delta, gamma1, gamma2, 0.0, p2, w)?, &ThresholdOptions::default())
}

/// Same as [`threshold_p1`]; `base.p1` is ignored.
pub fn threshold_p1_with(base: &AsymptoticConfig, opts: &ThresholdOptions) -> Result<f64> {
    base.validate()?;
    let at = |p1: f64| recoverable_at(&base.with_p1(p1), opts.margin, &opts.search);
    if !at(0.0)? {
        return Ok(0.0);
    }
    if at(1.0)? {
        return Ok(1.0);
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    if base.gamma1 > 0.0 {
        // beyond this P1 the support outnumbers the measurements
        let cap = (base.delta - base.gamma2 * base.p2) / base.gamma1;
        if cap < 1.0 {
            hi = cap;
        }
    }
    while hi - lo > opts.tol {
        let mid = 0.5 * (lo + hi);
        if at(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Weak threshold of plain ℓ1 for a single class: the largest `P` with
/// every support fraction below it recoverable at undersampling `δ`.
pub fn threshold_uniform(delta: f64, opts: &ThresholdOptions) -> Result<f64> {
    threshold_p1_with(&AsymptoticConfig::new(delta, 1.0, 0.0, 0.0, 0.0, 1.0)?, opts)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightOptimum {
    pub w_star: f64,
    pub p1_star: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightSearchOptions {
    pub w_min: f64,
    pub w_max: f64,
    /// Tolerance in `W`.
    pub tol: f64,
    pub threshold: ThresholdOptions,
}

impl Default for WeightSearchOptions {
    fn default() -> Self {
        WeightSearchOptions {
            w_min: 1.0,
            w_max: 10.0,
            tol: 1e-2,
            threshold: ThresholdOptions { tol: 1e-6, ..Default::default() },
        }
    }
}

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section maximization of `f` on `[a, b]`; returns `(argmax, max)`
/// including the endpoints as candidates. Values within `tie` of each other
/// count as equal and ties move right, so on a plateau the largest maximizer
/// wins.
fn golden_max<F: FnMut(f64) -> Result<f64>>(mut f: F, mut a: f64, mut b: f64, tol: f64, tie: f64) -> Result<(f64, f64)> {
    let (fa0, fb0, a0, b0) = (f(a)?, f(b)?, a, b);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    while b - a > tol {
        if fc > fd + tie {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d)?;
        }
    }
    let mut best = if fc > fd + tie { (c, fc) } else { (d, fd) };
    if fa0 > best.1 + tie {
        best = (a0, fa0);
    }
    if fb0 >= best.1 - tie {
        best = (b0, fb0);
    }
    Ok(best)
}

/// `W` maximizing the recoverable `P1` threshold, by golden-section search
/// over `[1, W_max]`.
pub fn optimal_weight(delta: f64, p2: f64, gamma1: f64, gamma2: f64) -> Result<WeightOptimum> {
    optimal_weight_with(&AsymptoticConfig::new(delta, gamma1, gamma2, 0.0, p2, 1.0)?, &WeightSearchOptions::default())
}

pub fn optimal_weight_with(base: &AsymptoticConfig, opts: &WeightSearchOptions) -> Result<WeightOptimum> {
    let (w_star, p1_star) = golden_max(
        |w| threshold_p1_with(&base.with_w(w), &opts.threshold),
        opts.w_min,
        opts.w_max,
        opts.tol,
        4.0 * opts.threshold.tol,
    )?;
    Ok(WeightOptimum { w_star, p1_star })
}

/// `W` giving the most negative worst-case exponent for a fixed model
/// `(δ, γ, P1, P2)`, searched over `ln W ∈ [−ln W_max, ln W_max]`.
/// Returns the weight and the worst-case exponent there.
pub fn most_robust_weight(cfg: &AsymptoticConfig, opts: &WeightSearchOptions) -> Result<(f64, f64)> {
    cfg.validate()?;
    if cfg.rho() >= cfg.delta {
        return Err(Error::Domain("support fraction meets the measurement ratio".into()));
    }
    let span = opts.w_max.ln();
    let (lw, neg) = golden_max(
        |lw| Ok(-exponent_surface(&cfg.with_w(lw.exp()), &opts.threshold.search)?.max_psi()),
        -span,
        span,
        opts.tol,
        0.0,
    )?;
    Ok((lw.exp(), -neg))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::ln_binomial;

    fn cfg(delta: f64, p1: f64, p2: f64, w: f64) -> AsymptoticConfig {
        AsymptoticConfig::new(delta, 0.5, 0.5, p1, p2, w).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn config_validation() {
        assert!(AsymptoticConfig::new(1.0, 0.5, 0.5, 0.1, 0.1, 1.0).is_err());
        assert!(AsymptoticConfig::new(0.5, 0.6, 0.5, 0.1, 0.1, 1.0).is_err());
        assert!(AsymptoticConfig::new(0.5, 0.5, 0.5, 1.1, 0.1, 1.0).is_err());
        assert!(AsymptoticConfig::new(0.5, 0.5, 0.5, 0.1, 0.1, 0.0).is_err());
        assert!(AsymptoticConfig::new(0.5, 1.0, 0.0, 0.1, 0.0, 1.0).is_ok());
    }

    #[test]
    fn combinatorial_exponent_examples() {
        let c = cfg(0.5, 0.2, 0.1, 1.0);
        assert_eq!(psi_com(0.0, 0.0, &c).unwrap(), 0.0);
        let t1 = c.a1() / 2.0;
        assert!(close(psi_com(t1, 0.0, &c).unwrap(), t1 * LN_2 + c.a1() * LN_2, 1e-15));
        assert!(close(psi_com(c.a1(), c.a2(), &c).unwrap(), (c.a1() + c.a2()) * LN_2, 1e-15));
        assert!(psi_com(c.a1() + 1e-6, 0.0, &c).is_err());
        assert!(psi_com(-1e-6, 0.0, &c).is_err());
    }

    #[test]
    fn combinatorial_exponent_matches_finite_n() {
        let n = 2000.0;
        let c = cfg(0.5, 0.2, 0.1, 1.0);
        let (r1, r2) = (n * c.a1(), n * c.a2());
        for (t1, t2) in [(100.0, 300.0), (400.0, 450.0), (20.0, 10.0), (800.0, 0.0)] {
            let exact = ((t1 + t2) * LN_2 + ln_binomial(r1, t1) + ln_binomial(r2, t2)) / n;
            let psi = psi_com(t1 / n, t2 / n, &c).unwrap();
            assert!(close(exact, psi, 5e-3), "{exact} vs {psi}");
        }
    }

    #[test]
    fn external_exponent_vanishes_without_outside_vertices() {
        let c = cfg(0.5, 0.2, 0.1, 2.0);
        let (v, root) = psi_ext_with(c.a1(), c.a2(), &c, &ExponentVariant::ACCEPTED).unwrap();
        assert_eq!(v, 0.0);
        assert!(root.is_none());
    }

    #[test]
    fn unit_weight_exponents_depend_on_total_only() {
        let c = cfg(0.6, 0.2, 0.2, 1.0);
        for total in [0.1, 0.35, 0.55] {
            let splits: Vec<(f64, f64)> = [0.3, 0.5, 0.7].iter().map(|f| (total * f, total * (1.0 - f))).collect();
            let (e0, i0) = (psi_ext(splits[0].0, splits[0].1, &c).unwrap(), psi_int(splits[0].0, splits[0].1, &c).unwrap());
            for &(a, b) in &splits[1..] {
                assert!(close(psi_ext(a, b, &c).unwrap(), e0, 1e-12));
                assert!(close(psi_int(a, b, &c).unwrap(), i0, 1e-12));
            }
        }
    }

    #[test]
    fn unit_weight_swap_symmetry() {
        // γ1(1−P1) = γ2(1−P2) with different P's needs different γ's
        let c = AsymptoticConfig::new(0.6, 0.6, 0.4, 0.5, 0.25, 1.0).unwrap();
        assert!(close(c.a1(), c.a2(), 1e-15));
        for (a, b) in [(0.05, 0.2), (0.1, 0.25), (0.29, 0.01)] {
            let p = exponent_point(a, b, &c, &ExponentVariant::ACCEPTED).unwrap();
            let q = exponent_point(b, a, &c, &ExponentVariant::ACCEPTED).unwrap();
            assert!(close(p.psi_total, q.psi_total, 1e-12));
            assert!(close(p.psi_com, q.psi_com, 1e-12));
        }
    }

    #[test]
    fn closed_form_matches_variational_form() {
        for (w, p1, p2) in [(1.0, 0.2, 0.05), (2.0, 0.3, 0.1), (3.5, 0.1, 0.4), (0.5, 0.25, 0.25)] {
            let c = cfg(0.75, p1, p2, w);
            for (a, b) in [(0.01, 0.0), (0.1, 0.1), (0.0, 0.2), (c.a1(), c.a2()), (0.3, 0.05)] {
                let closed = psi_int(a, b, &c).unwrap();
                let saddle = psi_int_saddle(a, b, &c).unwrap();
                assert!(close(closed, saddle, 1e-11), "{w} ({a}, {b}): {closed} vs {saddle}");
            }
        }
    }

    #[test]
    fn literal_reading_differs() {
        let c = cfg(0.75, 0.2, 0.1, 2.0);
        let accepted = exponent_point(0.2, 0.1, &c, &ExponentVariant::ACCEPTED).unwrap();
        let literal = exponent_point(0.2, 0.1, &c, &ExponentVariant::LITERAL).unwrap();
        assert!((accepted.psi_int - literal.psi_int).abs() > 1e-3);
        assert!((accepted.psi_ext - literal.psi_ext).abs() > 1e-3);
    }

    #[test]
    fn internal_exponent_vanishes_at_zero_excess() {
        let c = cfg(0.75, 0.2, 0.1, 2.0);
        assert!(psi_int(0.0, 0.0, &c).is_err());
        let mut prev = f64::INFINITY;
        for e in [1e-2, 1e-3, 1e-4, 1e-6] {
            let v = psi_int(e, e, &c).unwrap().abs();
            assert!(v < prev);
            prev = v;
        }
        assert!(prev < 1e-4);
    }

    #[test]
    fn root_residuals_are_tiny() {
        let c = cfg(0.75, 0.3, 0.1, 2.5);
        for (a, b) in [(0.01, 0.3), (0.2, 0.2), (0.34, 0.0), (0.0, 0.44)] {
            let p = exponent_point(a, b, &c, &ExponentVariant::ACCEPTED).unwrap();
            assert!(p.x0.unwrap().residual <= 1e-10, "{p:?}");
            assert!(p.s_star.unwrap().residual <= 1e-10, "{p:?}");
            assert_eq!(p.psi_total, p.psi_com - p.psi_int - p.psi_ext);
        }
    }

    #[test]
    fn exponent_is_never_positive() {
        let c = cfg(0.5, 0.35, 0.05, 2.0);
        let s = exponent_surface(&c, &SearchOptions { grid: 40, ..Default::default() }).unwrap();
        assert!(s.points.iter().all(|p| p.psi_total <= 1e-12));
    }

    #[test]
    fn recoverability_trivial_cases() {
        assert!(recoverable(&cfg(0.1, 0.0, 0.0, 1.0), 0.0).unwrap().0);
        let (ok, s) = recoverable(&cfg(0.3, 0.5, 0.1, 2.0), 0.0).unwrap();
        assert!(!ok && s.points.is_empty());
        assert!(recoverable(&cfg(0.5, 0.1, 0.1, 1.0), -1.0).is_err());
    }

    #[test]
    fn classical_weak_threshold() {
        // cross-polytope weak threshold ρ_W(1/2) ≈ 0.3848 in k/m
        let opts = ThresholdOptions { tol: 1e-5, ..Default::default() };
        let p = threshold_uniform(0.5, &opts).unwrap();
        assert!(close(p / 0.5, 0.3848, 2e-3), "{p}");
        // a two-class model with equal probabilities and unit weights collapses to it
        let split = threshold_p1_with(&cfg(0.5, 0.0, p, 1.0), &opts).unwrap();
        assert!(close(split, p, 2e-4), "{split} vs {p}");
    }

    #[test]
    fn dominant_point_predicate_matches_region_maximum() {
        let search = SearchOptions { grid: 60, ..Default::default() };
        for (w, p1) in [(1.0, 0.5), (1.0, 0.8), (2.0, 0.8), (2.0, 0.99), (3.0, 0.3)] {
            let c = cfg(0.75, p1, 0.1, w);
            let by_max = recoverable_with(&c, 0.0, &search).unwrap().0;
            let by_point = recoverable_at(&c, 0.0, &search).unwrap();
            assert_eq!(by_max, by_point, "W = {w}, P1 = {p1}");
            let zero = dominant_point(&c, &search).unwrap().unwrap().psi_total;
            assert!(zero.abs() < 1e-12, "{zero}");
        }
    }

    #[test]
    fn threshold_monotone_in_delta() {
        let a = threshold_p1(0.5, 0.1, 0.5, 0.5, 2.0).unwrap();
        let b = threshold_p1(0.75, 0.1, 0.5, 0.5, 2.0).unwrap();
        assert!(b >= a && a > 0.0);
    }

    #[test]
    fn weighting_raises_threshold() {
        let t1 = threshold_p1(0.75, 0.1, 0.5, 0.5, 1.0).unwrap();
        let t2 = threshold_p1(0.75, 0.1, 0.5, 0.5, 2.0).unwrap();
        let t3 = threshold_p1(0.75, 0.1, 0.5, 0.5, 3.0).unwrap();
        assert!(t2 > t1 + 0.1, "{t1} {t2}");
        assert!(t3 >= t2);
    }

    #[test]
    fn symmetric_model_prefers_unit_weight() {
        let c = cfg(0.75, 0.3, 0.3, 1.0);
        let opts = WeightSearchOptions { tol: 1e-3, ..Default::default() };
        let (w, psi) = most_robust_weight(&c, &opts).unwrap();
        assert!(close(w, 1.0, 1e-2), "{w}");
        assert!(psi < 0.0);
    }

    #[test]
    fn empty_second_class_pushes_weight_to_bound() {
        // with P2 = 0 a large W switches class 2 off; the problem collapses
        // to class 1 alone with δ/γ1 measurements per unknown
        let opts = WeightSearchOptions { threshold: ThresholdOptions { tol: 1e-4, ..Default::default() }, ..Default::default() };
        let base = cfg(0.4, 0.0, 0.0, 1.0);
        let best = optimal_weight_with(&base, &opts).unwrap();
        assert!(best.w_star > opts.w_max - 0.1, "{best:?}");
        let collapsed = threshold_uniform(0.8, &opts.threshold).unwrap();
        assert!(close(best.p1_star, collapsed, 1e-3), "{best:?} vs {collapsed}");
        let plain = threshold_p1_with(&base, &opts.threshold).unwrap();
        assert!(best.p1_star > plain + 0.1);
    }

    #[test]
    fn surface_csv_layout() {
        let s = exponent_surface(&cfg(0.5, 0.2, 0.1, 2.0), &SearchOptions { grid: 5, boundary_points: 0, refine: false, ..Default::default() }).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("t1p,t2p,psi_com,psi_int,psi_ext,psi_total"));
        assert_eq!(lines.count(), s.points.len());
    }

    #[test]
    fn golden_section_finds_peak() {
        let (x, v) = golden_max(|x| Ok(-(x - 2.3) * (x - 2.3)), 1.0, 10.0, 1e-6, 0.0).unwrap();
        assert!(close(x, 2.3, 1e-5) && v <= 0.0);
        let (x, _) = golden_max(|x| Ok(x.min(4.0)), 1.0, 10.0, 1e-3, 0.0).unwrap();
        assert_eq!(x, 10.0);
    }
}
