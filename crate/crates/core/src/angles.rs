//! Finite-dimensional Grassmann angles of the weighted cross-polytope.
//!
//! Faces are described by class counts: `F` has `k1` vertices in class 1 and
//! `k2` in class 2, and `G ⊇ F` adds `t1` and `t2` more. With weights
//! `w = 1` on class 1 and `w = W` on class 2 every quantity depends on these
//! counts only. All results are natural logarithms.
//!
//! * External angle of `G`:
//!   `γ = ξ/√π ∫₀^∞ e^{−ξ²x²} erf(x)^{r1} erf(Wx)^{r2} dx`, with
//!   `ξ² = Σ_{i∈G} w_i²` and `r_j` the class-`j` vertices outside `G`.
//! * Internal angle of `F` in `G`:
//!   `β = √(π Ω_G) 2^{−t} p_Z(0)`, where `Z = √Ω X₀ − Σ_{j∈G∖F} w_j X_j`,
//!   `X₀ ~ N(0, 1/2)`, `X_j` half-normal with density `(2/√π)e^{−x²}`,
//!   `Ω = Σ_{i∈F} w_i²` and `Ω_G = Σ_{i∈G} w_i²`.
//!
//! `p_Z(0)` is obtained by inverting the moment generating function of `Z`
//! along the vertical line through its real saddle point, where the
//! integrand is positive near the real axis and bounded by a Gaussian in the
//! imaginary direction.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::SparsityModel;
use crate::quad::{integrate_with_breaks, QuadOptions};
use crate::special::{erf_log_derivative, erfcx, faddeeva, ln_binomial, ln_erf, log_sum_exp, LN_PI};
use std::f64::consts::{FRAC_2_SQRT_PI, LN_2};

/// Depth (in nats below the peak) at which integrands are truncated.
const LOG_CUTOFF: f64 = 60.0;

#[derive(Debug, Clone, PartialEq)]
pub struct AngleQuery {
    pub model: SparsityModel,
    pub w2: f64,
    pub k1: usize,
    pub k2: usize,
    pub t1: usize,
    pub t2: usize,
}

impl AngleQuery {
    pub fn new(model: SparsityModel, w2: f64, k1: usize, k2: usize, t1: usize, t2: usize) -> Result<Self> {
        if !(w2 > 0.0 && w2.is_finite()) {
            return Err(Error::InvalidArgument(format!("W2 must be positive, got {w2}")));
        }
        if k1 + t1 > model.n1() || k2 + t2 > model.n2() {
            return Err(Error::InvalidArgument(format!(
                "face counts (k1 + t1, k2 + t2) = ({}, {}) exceed class sizes ({}, {})",
                k1 + t1,
                k2 + t2,
                model.n1(),
                model.n2()
            )));
        }
        Ok(AngleQuery { model, w2, k1, k2, t1, t2 })
    }

    /// Support counts fixed at their typical values `round(n_j P_j)`.
    pub fn typical(model: SparsityModel, w2: f64, t1: usize, t2: usize) -> Result<Self> {
        let k1 = (model.n1() as f64 * model.p1()).round() as usize;
        let k2 = (model.n2() as f64 * model.p2()).round() as usize;
        Self::new(model, w2, k1, k2, t1, t2)
    }

    pub fn k(&self) -> usize {
        self.k1 + self.k2
    }

    pub fn l(&self) -> usize {
        self.k() + self.t1 + self.t2
    }

    /// Class-1 and class-2 vertices outside `G`.
    pub fn outside(&self) -> (usize, usize) {
        (self.model.n1() - self.k1 - self.t1, self.model.n2() - self.k2 - self.t2)
    }

    /// `Σ_{i∈F} w_i²`.
    pub fn omega(&self) -> f64 {
        self.k1 as f64 + self.w2 * self.w2 * self.k2 as f64
    }

    /// `Σ_{i∈G} w_i²`.
    pub fn xi_squared(&self) -> f64 {
        self.omega() + self.t1 as f64 + self.w2 * self.w2 * self.t2 as f64
    }
}

fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    // f(lo) and f(hi) have opposite signs; f is monotone
    let rising = f(lo) < f(hi);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if (f(mid) < 0.0) == rising {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `ln ∫_lower^∞ exp(f(x)) dx` for a concave `f` with maximizer `peak`.
fn log_integral_concave<F: Fn(f64) -> f64>(f: F, peak: f64, lower: f64, opts: &QuadOptions) -> Result<f64> {
    let fmax = f(peak);
    let below = |x: f64, d: f64| f(x) - fmax + d;
    let mut breaks = Vec::new();
    for d in [LOG_CUTOFF, 2.0] {
        if peak > lower {
            let x = if below(lower, d) >= 0.0 { lower } else { bisect(|x| below(x, d), lower, peak) };
            breaks.push(x);
        }
    }
    breaks.push(peak);
    for d in [2.0, LOG_CUTOFF] {
        let mut width = (peak - lower).max(1.0);
        while below(peak + width, d) > 0.0 {
            width *= 2.0;
            if width > 1e12 {
                return Err(Error::QuadratureFailure { tol: opts.rel_tol, err: f64::INFINITY });
            }
        }
        breaks.push(bisect(|x| below(x, d), peak, peak + width));
    }
    breaks.dedup();
    let res = integrate_with_breaks(|x| (f(x) - fmax).exp(), &breaks, opts)?;
    Ok(fmax + res.value.ln())
}

/// Natural log of the external angle, evaluated with the integration
/// variable scaled by `scale` (the value does not depend on it).
fn external_angle_scaled(q: &AngleQuery, opts: &QuadOptions, scale: f64) -> Result<f64> {
    let (r1, r2) = q.outside();
    if r1 + r2 == 0 {
        return Ok(-LN_2);
    }
    let (r1, r2, w) = (r1 as f64, r2 as f64, q.w2);
    let xi2 = q.xi_squared();
    let log_f = |u: f64| {
        let x = scale * u;
        let mut v = -xi2 * x * x;
        if r1 > 0.0 {
            v += r1 * ln_erf(x);
        }
        if r2 > 0.0 {
            v += r2 * ln_erf(w * x);
        }
        v
    };
    let slope = |u: f64| {
        let x = scale * u;
        let mut d = -2.0 * xi2 * x;
        if r1 > 0.0 {
            d += r1 * erf_log_derivative(x);
        }
        if r2 > 0.0 {
            d += r2 * w * erf_log_derivative(w * x);
        }
        d
    };
    let mut hi = 1.0 / scale;
    while slope(hi) > 0.0 {
        hi *= 2.0;
    }
    let peak = bisect(slope, 0.0, hi);
    let log_int = log_integral_concave(log_f, peak, 0.0, opts)?;
    Ok(0.5 * xi2.ln() - 0.5 * LN_PI + scale.ln() + log_int)
}

/// `ln γ(G)`; exactly `−ln 2` when `G` is a facet.
pub fn external_angle(q: &AngleQuery) -> Result<f64> {
    external_angle_with(q, &QuadOptions::default())
}

pub fn external_angle_with(q: &AngleQuery, opts: &QuadOptions) -> Result<f64> {
    external_angle_scaled(q, opts, 1.0)
}

/// Cumulant generating function of `Z` along the real axis.
fn cgf_real(q: &AngleQuery, theta: f64) -> f64 {
    let w = q.w2;
    0.25 * q.omega() * theta * theta
        + q.t1 as f64 * erfcx(0.5 * theta).ln()
        + q.t2 as f64 * erfcx(0.5 * w * theta).ln()
}

fn cgf_real_derivative(q: &AngleQuery, theta: f64) -> f64 {
    // d/dy ln erfcx(y) = 2y − 2/(√π erfcx(y))
    let dl = |y: f64| 2.0 * y - FRAC_2_SQRT_PI / erfcx(y);
    0.5 * q.omega() * theta + 0.5 * q.t1 as f64 * dl(0.5 * theta) + 0.5 * q.w2 * q.t2 as f64 * dl(0.5 * q.w2 * theta)
}

/// The moment generating function of `−w X` is `w(i w θ / 2)` with `w(·)`
/// the Faddeeva function, which extends it to complex `θ`.
fn cgf_complex(q: &AngleQuery, theta: Complex64) -> Complex64 {
    let i = Complex64::i();
    let mut k = 0.25 * q.omega() * theta * theta;
    if q.t1 > 0 {
        k += q.t1 as f64 * faddeeva(0.5 * i * theta).ln();
    }
    if q.t2 > 0 {
        k += q.t2 as f64 * faddeeva(0.5 * i * q.w2 * theta).ln();
    }
    k
}

/// `ln p_Z(0)` and the saddle point used.
fn log_density_at_zero(q: &AngleQuery, opts: &QuadOptions) -> Result<(f64, f64)> {
    let omega = q.omega();
    let reach = 2.0 * (q.t1 as f64 + q.w2 * q.t2 as f64) / (std::f64::consts::PI.sqrt() * omega);
    let theta0 = bisect(|t| cgf_real_derivative(q, t), 0.0, reach.max(1e-12));
    let k0 = cgf_real(q, theta0);
    let k0c = cgf_complex(q, Complex64::new(theta0, 0.0));
    // |M(θ₀ + it)| ≤ M(θ₀) e^{−Ω t²/4}
    let t_max = (4.0 * (LOG_CUTOFF + 10.0) / omega).sqrt();
    // curvature sets the natural width of the central lobe
    let h = 1e-4 * theta0.max(1.0);
    let curv = (cgf_real_derivative(q, theta0 + h) - cgf_real_derivative(q, theta0 - h)) / (2.0 * h);
    let mut width = 1.0 / curv.max(omega / 2.0).sqrt();
    let mut breaks = vec![0.0];
    while width < t_max {
        breaks.push(width);
        width *= 2.0;
    }
    breaks.push(t_max);
    let integrand = |t: f64| (cgf_complex(q, Complex64::new(theta0, t)) - k0c).exp().re;
    let res = integrate_with_breaks(integrand, &breaks, opts)?;
    if res.value.is_nan() || res.value <= 0.0 {
        return Err(Error::QuadratureFailure { tol: opts.rel_tol, err: res.error });
    }
    Ok((k0 - LN_PI + res.value.ln(), theta0))
}

/// `ln β(F, G)`; zero when `G = F`.
pub fn internal_angle(q: &AngleQuery) -> Result<f64> {
    internal_angle_with(q, &QuadOptions::default())
}

pub fn internal_angle_with(q: &AngleQuery, opts: &QuadOptions) -> Result<f64> {
    let t = q.t1 + q.t2;
    if t == 0 {
        return Ok(0.0);
    }
    if q.k() == 0 {
        return Err(Error::InvalidArgument("internal angle needs a nonempty face F".into()));
    }
    if t == 1 {
        return Ok(-LN_2);
    }
    let (log_p, _) = log_density_at_zero(q, opts)?;
    Ok(0.5 * LN_PI + 0.5 * q.xi_squared().ln() - t as f64 * LN_2 + log_p)
}

/// `ln [2^{t1+t2} C(n1−k1, t1) C(n2−k2, t2) β γ]`, one summand of the
/// union bound on the failure probability.
pub fn union_bound_term(q: &AngleQuery) -> Result<f64> {
    let combinatorial = (q.t1 + q.t2) as f64 * LN_2
        + ln_binomial((q.model.n1() - q.k1) as f64, q.t1 as f64)
        + ln_binomial((q.model.n2() - q.k2) as f64, q.t2 as f64);
    Ok(combinatorial + internal_angle(q)? + external_angle(q)?)
}

/// `ln` of the union bound: the sum of [`union_bound_term`] over all
/// `(t1, t2)` with `t1 + t2 > m − k + 1`.
pub fn log_failure_bound(model: &SparsityModel, w2: f64, m: usize, k1: usize, k2: usize) -> Result<f64> {
    let k = k1 + k2;
    let mut terms = Vec::new();
    for t1 in 0..=model.n1().saturating_sub(k1) {
        for t2 in 0..=model.n2().saturating_sub(k2) {
            if t1 + t2 + k > m + 1 {
                terms.push(union_bound_term(&AngleQuery::new(model.clone(), w2, k1, k2, t1, t2)?)?);
            }
        }
    }
    Ok(log_sum_exp(&terms))
}
