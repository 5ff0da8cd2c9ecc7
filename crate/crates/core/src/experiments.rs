//! Monte Carlo recovery experiments over `(P1, W2)` grids.
//!
//! Every `(P1, trial)` pair gets its own instance, seeded from the plan seed
//! and the pair's indices; the same instance is solved for every `W2`, so
//! comparisons between weights are paired.

use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::{threshold_p1_with, AsymptoticConfig, ThresholdOptions};
use crate::lpsolve::{LpStatus, SolverOptions};
use crate::model::{gaussian_instance, AmplitudeLaw, SparsityModel, WeightScheme};
use crate::recovery::{recover, RecoveryOptions, SUCCESS_TOL};
use crate::rng::derive_seed;

/// Two-sided 95% standard normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

fn default_tol() -> f64 {
    SUCCESS_TOL
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub n: usize,
    pub n1: usize,
    pub m: usize,
    #[serde(rename = "P2")]
    pub p2: f64,
    #[serde(rename = "P1_values")]
    pub p1_values: Vec<f64>,
    #[serde(rename = "W2_values")]
    pub w2_values: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    #[serde(default = "default_tol")]
    pub success_tol: f64,
    #[serde(default)]
    pub amplitude: AmplitudeLaw,
}

fn strictly_increasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[0] < w[1])
}

impl ExperimentPlan {
    pub fn n2(&self) -> usize {
        self.n - self.n1
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.p1_values.is_empty() || self.w2_values.is_empty() {
            return bad("P1 and W2 sweeps must be nonempty".into());
        }
        if !strictly_increasing(&self.p1_values) || !strictly_increasing(&self.w2_values) {
            return bad("sweeps must be strictly increasing".into());
        }
        if self.n1 > self.n {
            return bad(format!("n1 = {} exceeds n = {}", self.n1, self.n));
        }
        if self.m == 0 || self.m >= self.n {
            return bad(format!("need 0 < m < n, got m = {}, n = {}", self.m, self.n));
        }
        if self.p1_values.iter().chain([&self.p2]).any(|p| !(0.0..=1.0).contains(p)) {
            return bad("probabilities must lie in [0, 1]".into());
        }
        if self.w2_values.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
            return bad("weights must be positive".into());
        }
        if self.success_tol.is_nan() || self.success_tol <= 0.0 {
            return bad("success tolerance must be positive".into());
        }
        Ok(())
    }

    pub fn model(&self, p1: f64) -> Result<SparsityModel> {
        SparsityModel::new(self.n1, self.n2(), p1, self.p2)
    }

    /// Seed of the instance used for every `W2` at `(P1 index, trial)`.
    pub fn trial_seed(&self, p1_index: usize, trial: usize) -> u64 {
        derive_seed(self.seed, &[p1_index as u64, trial as u64])
    }

    /// Asymptotic configuration with the plan's proportions.
    pub fn asymptotic(&self, p1: f64, w2: f64) -> Result<AsymptoticConfig> {
        let n = self.n as f64;
        let g1 = self.n1 as f64 / n;
        AsymptoticConfig::new(self.m as f64 / n, g1, 1.0 - g1, p1, self.p2, w2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    Success,
    Failure,
    /// The LP did not reach an optimal point; counted as a failure.
    SolverFailure,
}

/// Outcomes for one `(P1, trial)` instance across the `W2` sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub p1_index: usize,
    pub trial: usize,
    pub seed: u64,
    pub fingerprint: u64,
    pub outcomes: Vec<Outcome>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    #[serde(rename = "P1")]
    pub p1: f64,
    #[serde(rename = "W2")]
    pub w2: f64,
    pub trials: usize,
    pub successes: usize,
    pub solver_failures: usize,
    pub rate: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

/// Wilson score interval at 95%.
pub fn wilson_interval(successes: usize, trials: usize) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if successes == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if successes == trials { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanOutcome {
    pub plan: ExperimentPlan,
    /// Indexed by `p1_index * trials + trial`.
    pub records: Vec<TrialRecord>,
}

impl PlanOutcome {
    pub fn record(&self, p1_index: usize, trial: usize) -> &TrialRecord {
        &self.records[p1_index * self.plan.trials + trial]
    }

    /// Aggregated points, `P1`-major then `W2`.
    pub fn curve(&self) -> Vec<CurvePoint> {
        let plan = &self.plan;
        let mut out = Vec::with_capacity(plan.p1_values.len() * plan.w2_values.len());
        for (i, &p1) in plan.p1_values.iter().enumerate() {
            for (j, &w2) in plan.w2_values.iter().enumerate() {
                let mut successes = 0;
                let mut solver_failures = 0;
                for t in 0..plan.trials {
                    match self.record(i, t).outcomes[j] {
                        Outcome::Success => successes += 1,
                        Outcome::Failure => {}
                        Outcome::SolverFailure => solver_failures += 1,
                    }
                }
                let (ci_lo, ci_hi) = wilson_interval(successes, plan.trials);
                out.push(CurvePoint {
                    p1,
                    w2,
                    trials: plan.trials,
                    successes,
                    solver_failures,
                    rate: successes as f64 / plan.trials as f64,
                    ci_lo,
                    ci_hi,
                });
            }
        }
        out
    }

    /// Paired difference in successes between weight indices `a` and `b`
    /// at one `P1`: `(a only, b only)`.
    pub fn discordant(&self, p1_index: usize, a: usize, b: usize) -> (usize, usize) {
        (0..self.plan.trials).fold((0, 0), |(x, y), t| {
            let o = &self.record(p1_index, t).outcomes;
            let (sa, sb) = (o[a] == Outcome::Success, o[b] == Outcome::Success);
            (x + (sa && !sb) as usize, y + (sb && !sa) as usize)
        })
    }
}

/// Runs every trial of the plan (in parallel) and keeps per-trial outcomes.
pub fn run_plan_detailed(plan: &ExperimentPlan, solver: &SolverOptions) -> Result<PlanOutcome> {
    plan.validate()?;
    let opts = RecoveryOptions { solver: *solver, success_tol: plan.success_tol };
    let tasks: Vec<(usize, usize)> =
        (0..plan.p1_values.len()).flat_map(|i| (0..plan.trials).map(move |t| (i, t))).collect();
    let records = tasks
        .par_iter()
        .map(|&(i, trial)| -> Result<TrialRecord> {
            let model = plan.model(plan.p1_values[i])?;
            let seed = plan.trial_seed(i, trial);
            let inst = gaussian_instance(&model, plan.m, plan.amplitude, seed)?;
            let outcomes = plan
                .w2_values
                .iter()
                .map(|&w2| {
                    let w = WeightScheme::two_valued(&model, w2)?;
                    let r = recover(&inst, &w, &opts)?;
                    Ok(if r.status != LpStatus::Optimal {
                        Outcome::SolverFailure
                    } else if r.success {
                        Outcome::Success
                    } else {
                        Outcome::Failure
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(TrialRecord { p1_index: i, trial, seed, fingerprint: inst.fingerprint(), outcomes })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PlanOutcome { plan: plan.clone(), records })
}

pub fn run_plan(plan: &ExperimentPlan) -> Result<Vec<CurvePoint>> {
    Ok(run_plan_detailed(plan, &SolverOptions::default())?.curve())
}

pub fn write_curve_csv<W: Write>(points: &[CurvePoint], mut out: W) -> io::Result<()> {
    writeln!(out, "P1,W2,trials,successes,rate,ci_lo,ci_hi")?;
    for p in points {
        writeln!(out, "{},{},{},{},{},{},{}", p.p1, p.w2, p.trials, p.successes, p.rate, p.ci_lo, p.ci_hi)?;
    }
    Ok(())
}

/// Points of one `W2` column, ordered by `P1`.
pub fn column(points: &[CurvePoint], w2: f64) -> Vec<CurvePoint> {
    let mut col: Vec<CurvePoint> = points.iter().filter(|p| p.w2 == w2).copied().collect();
    col.sort_by(|a, b| a.p1.total_cmp(&b.p1));
    col
}

/// First `P1` where the rate falls through `level`, by linear interpolation
/// between neighbouring grid points.
pub fn crossing(curve: &[(f64, f64)], level: f64) -> Option<f64> {
    curve.windows(2).find_map(|w| {
        let ((x0, y0), (x1, y1)) = (w[0], w[1]);
        if y0 >= level && y1 < level {
            Some(x0 + (y0 - level) / (y0 - y1) * (x1 - x0))
        } else {
            None
        }
    })
}

/// Least-squares non-increasing fit (pool adjacent violators).
pub fn isotonic_decreasing(values: &[f64]) -> Vec<f64> {
    let mut blocks: Vec<(f64, usize)> = Vec::new();
    for &v in values {
        blocks.push((v, 1));
        while blocks.len() > 1 {
            let (b, nb) = blocks[blocks.len() - 1];
            let (a, na) = blocks[blocks.len() - 2];
            if a >= b {
                break;
            }
            blocks.pop();
            let last = blocks.last_mut().unwrap();
            *last = ((a * na as f64 + b * nb as f64) / (na + nb) as f64, na + nb);
        }
    }
    blocks.into_iter().flat_map(|(v, k)| std::iter::repeat_n(v, k)).collect()
}

/// Largest deviation of a curve from its non-increasing fit.
pub fn monotonicity_residual(values: &[f64]) -> f64 {
    isotonic_decreasing(values)
        .iter()
        .zip(values)
        .fold(0.0, |m, (f, v)| f64::max(m, (f - v).abs()))
}

/// Where a rate curve meets 50% relative to the sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CrossingKind {
    Observed,
    /// The rate stays at or above 50% over the whole sweep.
    AboveSweep,
    /// The rate is already below 50% at the first point.
    BelowSweep,
    /// Too few points to tell.
    Undetermined,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoryRow {
    #[serde(rename = "W2")]
    pub w2: f64,
    pub crossing_kind: CrossingKind,
    pub empirical_crossing: Option<f64>,
    pub theoretical_threshold: f64,
    pub gap: Option<f64>,
}

impl TheoryRow {
    /// Crossing position for ordering purposes; censored rows sit beyond the
    /// corresponding end of the sweep.
    fn rank_value(&self) -> Option<f64> {
        match self.crossing_kind {
            CrossingKind::Observed => self.empirical_crossing,
            CrossingKind::AboveSweep => Some(f64::INFINITY),
            CrossingKind::BelowSweep => Some(f64::NEG_INFINITY),
            CrossingKind::Undetermined => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoryReport {
    pub rows: Vec<TheoryRow>,
    /// Fewer than two `P1` points, or some `W2` curve does not cross 50%
    /// inside the sweep.
    pub insufficient_sweep: bool,
    /// Whether every pair of `W2` values with strictly ordered thresholds
    /// has strictly ordered crossings (censored crossings count as beyond
    /// the sweep end; pairs censored on the same side are skipped). `None`
    /// when no pair can be compared.
    pub ordering_agrees: Option<bool>,
}

fn classify(col: &[(f64, f64)]) -> (CrossingKind, Option<f64>) {
    if col.len() < 2 {
        return (CrossingKind::Undetermined, None);
    }
    match crossing(col, 0.5) {
        Some(c) => (CrossingKind::Observed, Some(c)),
        None if col[0].1 < 0.5 => (CrossingKind::BelowSweep, None),
        None => (CrossingKind::AboveSweep, None),
    }
}

/// Empirical 50% crossing per `W2` next to the asymptotic threshold at the
/// plan's `(δ, γ1, γ2, P2)`.
pub fn empirical_vs_theory(plan: &ExperimentPlan, points: &[CurvePoint], opts: &ThresholdOptions) -> Result<TheoryReport> {
    plan.validate()?;
    let mut rows = Vec::new();
    for &w2 in &plan.w2_values {
        let col: Vec<(f64, f64)> = column(points, w2).iter().map(|p| (p.p1, p.rate)).collect();
        let (crossing_kind, empirical_crossing) = classify(&col);
        let theoretical_threshold = threshold_p1_with(&plan.asymptotic(0.0, w2)?, opts)?;
        rows.push(TheoryRow {
            w2,
            crossing_kind,
            empirical_crossing,
            theoretical_threshold,
            gap: empirical_crossing.map(|c| c - theoretical_threshold),
        });
    }
    let insufficient_sweep = rows.iter().any(|r| r.crossing_kind != CrossingKind::Observed);
    let mut compared = 0;
    let mut agree = true;
    for a in &rows {
        for b in &rows {
            if a.theoretical_threshold >= b.theoretical_threshold {
                continue;
            }
            if let (Some(x), Some(y)) = (a.rank_value(), b.rank_value()) {
                if x.is_infinite() && x == y {
                    continue;
                }
                compared += 1;
                agree &= x < y;
            }
        }
    }
    let ordering_agrees = (compared > 0).then_some(agree);
    Ok(TheoryReport { rows, insufficient_sweep, ordering_agrees })
}

pub fn write_theory_csv<W: Write>(report: &TheoryReport, mut out: W) -> io::Result<()> {
    writeln!(out, "W2,crossing_kind,empirical_crossing,theoretical_threshold,gap")?;
    let opt = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
    for r in &report.rows {
        let kind = match r.crossing_kind {
            CrossingKind::Observed => "observed",
            CrossingKind::AboveSweep => "above_sweep",
            CrossingKind::BelowSweep => "below_sweep",
            CrossingKind::Undetermined => "undetermined",
        };
        writeln!(out, "{},{},{},{},{}", r.w2, kind, opt(r.empirical_crossing), r.theoretical_threshold, opt(r.gap))?;
    }
    Ok(())
}
