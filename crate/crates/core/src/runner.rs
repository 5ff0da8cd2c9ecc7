//! Executes a [`RunManifest`] and writes its outputs into a directory.
//!
//! Files per command (tables as `.csv` or `.json` by [`Format`]):
//!
//! | command     | outputs                                                     |
//! |-------------|-------------------------------------------------------------|
//! | `recover`   | `x_true`, `x_hat`, `diagnostics.json`                       |
//! | `simulate`  | `curve`, `theory` (with `theory`), `curve.svg` (with plot)   |
//! | `threshold` | `threshold`, `threshold.svg` (with plot)                    |
//! | `weights`   | `weights.json`                                              |
//! | `surface`   | `surface`, `dominant.json`                                  |
//! | `angles`    | `angles`, `summary.json`                                    |
//!
//! Every directory also receives `manifest.json`.

use std::fs;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::angles::{external_angle, internal_angle, AngleQuery};
use crate::error::{Error, Result};
use crate::experiments::{empirical_vs_theory, run_plan_detailed, write_curve_csv, write_theory_csv, CurvePoint};
use crate::exponents::{
    dominant_point, exponent_surface, optimal_weight_with, threshold_p1_with, AsymptoticConfig, SearchOptions,
    ThresholdOptions, WeightSearchOptions,
};
use crate::lpsolve::{LpStatus, SolverOptions};
use crate::manifest::{Command, Format, ModelManifest, RunManifest};
use crate::model::{gaussian_instance, SparsityModel};
use crate::plot::LinePlot;
use crate::recovery::{recover, RecoveryOptions};
use crate::special::{ln_binomial, log_sum_exp};

/// Outcome of a successful run. Only `recover` can be negative.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Positive,
    Negative,
}

pub fn execute(run: &RunManifest, out: &Path) -> Result<Verdict> {
    run.write(out)?;
    match &run.command {
        Command::Recover { model, m, success_tol } => run_recover(model, *m, *success_tol, run.format, out),
        Command::Simulate { plan, theory } => {
            let outcome = run_plan_detailed(plan, &SolverOptions::default())?;
            let curve = outcome.curve();
            write_table(out, "curve", run.format, &curve, |w| write_curve_csv(&curve, w))?;
            if *theory {
                let report = empirical_vs_theory(plan, &curve, &ThresholdOptions::default())?;
                write_table(out, "theory", run.format, &report, |w| write_theory_csv(&report, w))?;
            }
            if run.plot {
                write_text(out, "curve.svg", &curve_plot(&plan.w2_values, &curve).to_svg())?;
            }
            Ok(Verdict::Positive)
        }
        Command::Threshold { delta, p2, gamma1, gamma2, w2_values, tol } => {
            let base = AsymptoticConfig::new(*delta, *gamma1, *gamma2, 0.0, *p2, 1.0)?;
            if w2_values.is_empty() {
                return Err(Error::InvalidArgument("empty W2 sweep".into()));
            }
            let opts = ThresholdOptions { tol: *tol, ..Default::default() };
            let rows = threshold_rows(&base, w2_values, &opts)?;
            write_table(out, "threshold", run.format, &rows, |w| {
                writeln!(w, "W2,P1_threshold")?;
                for r in &rows {
                    writeln!(w, "{},{}", r.w2, r.p1_threshold)?;
                }
                Ok(())
            })?;
            if run.plot {
                let pts = rows.iter().map(|r| (r.w2, r.p1_threshold)).collect();
                let plot = LinePlot::new(&format!("Recoverable P1 threshold (delta = {delta}, P2 = {p2})"), "W2", "P1 threshold")
                    .with_series("threshold", pts);
                write_text(out, "threshold.svg", &plot.to_svg())?;
            }
            Ok(Verdict::Positive)
        }
        Command::Weights { delta, p2, gamma1, gamma2, w_min, w_max, tol } => {
            let base = AsymptoticConfig::new(*delta, *gamma1, *gamma2, 0.0, *p2, 1.0)?;
            if !(*w_min > 0.0 && w_min < w_max) {
                return Err(Error::InvalidArgument(format!("need 0 < w_min < w_max, got {w_min}, {w_max}")));
            }
            let opts = WeightSearchOptions { w_min: *w_min, w_max: *w_max, tol: *tol, ..Default::default() };
            let best = optimal_weight_with(&base, &opts)?;
            let unweighted = threshold_p1_with(&base, &opts.threshold)?;
            let doc = json!({
                "W_star": best.w_star,
                "P1_star": best.p1_star,
                "diagnostics": {
                    "unweighted_threshold": unweighted,
                    "gain": best.p1_star - unweighted,
                    "w_range": [w_min, w_max],
                    "w_tol": tol,
                    "threshold_tol": opts.threshold.tol,
                    "saturated": best.p1_star >= 1.0,
                }
            });
            write_text(out, "weights.json", &pretty(&doc))?;
            Ok(Verdict::Positive)
        }
        Command::Surface { config, grid } => {
            let opts = SearchOptions { grid: *grid, boundary_points: *grid, ..Default::default() };
            let surface = exponent_surface(config, &opts)?;
            write_table(out, "surface", run.format, &surface.points, |w| surface.write_csv(w))?;
            let dominant = dominant_point(config, &opts)?;
            let recoverable = config.rho() < config.delta
                && dominant.is_none_or(|p| p.t1p + p.t2p < config.min_face_excess());
            let doc = json!({
                "max": surface.max,
                "dominant": dominant,
                "recoverable": recoverable,
            });
            write_text(out, "dominant.json", &pretty(&doc))?;
            Ok(Verdict::Positive)
        }
        Command::Angles { n1, n2, w2, k1, k2, m } => {
            let rows = angle_rows(*n1, *n2, *w2, *k1, *k2, *m)?;
            write_table(out, "angles", run.format, &rows, |w| {
                writeln!(w, "t1,t2,log_internal,log_external,log_term")?;
                for r in &rows {
                    writeln!(w, "{},{},{},{},{}", r.t1, r.t2, r.log_internal, r.log_external, r.log_term)?;
                }
                Ok(())
            })?;
            let terms: Vec<f64> = rows.iter().map(|r| r.log_term).collect();
            let doc = json!({
                "rows": rows.len(),
                "log_sum_terms": if terms.is_empty() { None } else { Some(log_sum_exp(&terms)) },
                "restricted_to_union_bound": m.is_some(),
            });
            write_text(out, "summary.json", &pretty(&doc))?;
            Ok(Verdict::Positive)
        }
    }
}

fn pretty<T: Serialize + ?Sized>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("value serializes");
    s.push('\n');
    s
}

fn write_text(dir: &Path, name: &str, text: &str) -> Result<()> {
    fs::write(dir.join(name), text)?;
    Ok(())
}

/// Writes `stem.csv` via `csv` or `stem.json` from `value`.
fn write_table<T: Serialize + ?Sized>(
    dir: &Path,
    stem: &str,
    format: Format,
    value: &T,
    csv: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>,
) -> Result<()> {
    match format {
        Format::Csv => {
            let mut buf = Vec::new();
            csv(&mut buf)?;
            fs::write(dir.join(format!("{stem}.csv")), buf)?;
        }
        Format::Json => write_text(dir, &format!("{stem}.json"), &pretty(value))?,
    }
    Ok(())
}

fn run_recover(spec: &ModelManifest, m: usize, success_tol: f64, format: Format, out: &Path) -> Result<Verdict> {
    spec.validate()?;
    let model = spec.model()?;
    let inst = gaussian_instance(&model, m, spec.amplitude, spec.seed)?;
    let opts = RecoveryOptions { success_tol, ..Default::default() };
    let r = recover(&inst, &spec.weights()?, &opts)?;

    let x_true = inst.x_true.values();
    let indexed = |name: &'static str, v: &[f64]| {
        let v = v.to_vec();
        move |w: &mut Vec<u8>| -> std::io::Result<()> {
            writeln!(w, "index,{name}")?;
            for (i, x) in v.iter().enumerate() {
                writeln!(w, "{i},{x}")?;
            }
            Ok(())
        }
    };
    write_table(out, "x_true", format, x_true, indexed("x_true", x_true))?;
    write_table(out, "x_hat", format, &r.x_hat, indexed("x_hat", &r.x_hat))?;
    let (k1, k2) = model.class_counts(inst.x_true.support());
    let doc = json!({
        "status": r.status,
        "success": r.success,
        "objective": r.objective,
        "max_abs_error": r.max_abs_error,
        "nonunique": r.nonunique,
        "iterations": r.iterations,
        "support_k1": k1,
        "support_k2": k2,
        "m": m,
        "fingerprint": format!("{:016x}", inst.fingerprint()),
    });
    write_text(out, "diagnostics.json", &pretty(&doc))?;
    if r.status != LpStatus::Optimal {
        return Err(Error::Solver(format!("solver stopped with status {:?}", r.status)));
    }
    Ok(if r.success { Verdict::Positive } else { Verdict::Negative })
}

#[derive(Debug, Clone, Copy, Serialize)]
struct ThresholdRow {
    #[serde(rename = "W2")]
    w2: f64,
    #[serde(rename = "P1_threshold")]
    p1_threshold: f64,
}

fn threshold_rows(base: &AsymptoticConfig, w2_values: &[f64], opts: &ThresholdOptions) -> Result<Vec<ThresholdRow>> {
    w2_values
        .par_iter()
        .map(|&w2| {
            let p1_threshold = threshold_p1_with(&base.with_w(w2), opts)
                .map_err(|e| Error::Solver(format!("threshold at W2 = {w2}: {e}")))?;
            Ok(ThresholdRow { w2, p1_threshold })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, Serialize)]
struct AngleRow {
    t1: usize,
    t2: usize,
    log_internal: f64,
    log_external: f64,
    log_term: f64,
}

fn angle_rows(n1: usize, n2: usize, w2: f64, k1: usize, k2: usize, m: Option<usize>) -> Result<Vec<AngleRow>> {
    if k1 > n1 || k2 > n2 {
        return Err(Error::InvalidArgument(format!("support ({k1}, {k2}) exceeds class sizes ({n1}, {n2})")));
    }
    if k1 + k2 == 0 {
        return Err(Error::InvalidArgument("support must be nonempty".into()));
    }
    let model = SparsityModel::new(n1, n2, 0.0, 0.0)?;
    let k = k1 + k2;
    let pairs: Vec<(usize, usize)> = (0..=n1 - k1)
        .flat_map(|t1| (0..=n2 - k2).map(move |t2| (t1, t2)))
        .filter(|&(t1, t2)| m.is_none_or(|m| t1 + t2 + k > m + 1))
        .collect();
    pairs
        .par_iter()
        .map(|&(t1, t2)| {
            let q = AngleQuery::new(model.clone(), w2, k1, k2, t1, t2)?;
            let log_internal = internal_angle(&q)?;
            let log_external = external_angle(&q)?;
            let log_term = (t1 + t2) as f64 * std::f64::consts::LN_2
                + ln_binomial((n1 - k1) as f64, t1 as f64)
                + ln_binomial((n2 - k2) as f64, t2 as f64)
                + log_internal
                + log_external;
            Ok(AngleRow { t1, t2, log_internal, log_external, log_term })
        })
        .collect()
}

fn curve_plot(w2_values: &[f64], curve: &[CurvePoint]) -> LinePlot {
    let mut plot = LinePlot::new("Recovery rate", "P1", "success rate");
    plot.y_range = Some((0.0, 1.0));
    for &w2 in w2_values {
        let pts = curve.iter().filter(|p| p.w2 == w2).map(|p| (p.p1, p.rate)).collect();
        plot = plot.with_series(&format!("W2 = {w2}"), pts);
    }
    plot
}
