//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit status
//! if any criterion fails.

mod common;

use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use weighted_l1::experiments::{column, empirical_vs_theory, run_plan_detailed, CrossingKind, ExperimentPlan};
use weighted_l1::exponents::{
    dominant_point, exponent_surface, most_robust_weight, optimal_weight, threshold_p1_with, threshold_uniform,
    AsymptoticConfig, SearchOptions, ThresholdOptions, WeightSearchOptions,
};
use weighted_l1::lpsolve::SolverOptions;
use weighted_l1::model::{gaussian_instance, AmplitudeLaw, SparsityModel, WeightScheme};
use weighted_l1::recovery::{recover, RecoveryOptions, SUCCESS_TOL};

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn sweep(start: f64, step: f64, count: usize) -> Vec<f64> {
    (0..count).map(|i| ((start + step * i as f64) * 1e9).round() / 1e9).collect()
}

/// Weighted recovery beats plain ℓ1 by at least 10 points on three
/// consecutive `P1` values (n = 200, m = 100, P2 = 0.05).
fn weighted_rate_improvement() -> Outcome {
    let plan = ExperimentPlan {
        n: 200,
        n1: 100,
        m: 100,
        p2: 0.05,
        p1_values: sweep(0.05, 0.05, 10),
        w2_values: vec![1.0, 2.0, 3.0],
        trials: 200,
        seed: 20_100,
        success_tol: SUCCESS_TOL,
        amplitude: AmplitudeLaw::Gaussian,
    };
    let outcome = run_plan_detailed(&plan, &SolverOptions::default()).map_err(|e| e.to_string())?;
    let curve = outcome.curve();
    let k = plan.w2_values.len();
    let mut run = 0;
    let mut longest = 0;
    let mut lines = Vec::new();
    for (i, p1) in plan.p1_values.iter().enumerate() {
        let row = &curve[i * k..(i + 1) * k];
        let base = row[0].rate;
        let best = row.iter().map(|p| p.rate).fold(f64::NEG_INFINITY, f64::max);
        run = if best - base >= 0.10 { run + 1 } else { 0 };
        longest = longest.max(run);
        lines.push(format!("P1={p1}: W2=1 {base:.3} best {best:.3}"));
    }
    let failures: usize = curve.iter().map(|p| p.solver_failures).sum();
    check(longest >= 3, format!("longest run {longest} [{}], solver failures {failures}", lines.join("; ")))
}

/// Theoretical and empirical (n = 200, m = 150, P2 = 0.1) threshold
/// orderings agree across W2 ∈ {1, 2, 3}.
fn threshold_ordering() -> Outcome {
    let plan = ExperimentPlan {
        n: 200,
        n1: 100,
        m: 150,
        p2: 0.1,
        p1_values: sweep(0.6, 0.05, 9),
        w2_values: vec![1.0, 2.0, 3.0],
        trials: 200,
        seed: 30_150,
        success_tol: SUCCESS_TOL,
        amplitude: AmplitudeLaw::Gaussian,
    };
    let outcome = run_plan_detailed(&plan, &SolverOptions::default()).map_err(|e| e.to_string())?;
    let curve = outcome.curve();
    let report = empirical_vs_theory(&plan, &curve, &ThresholdOptions::default()).map_err(|e| e.to_string())?;
    let t = |i: usize| report.rows[i].theoretical_threshold;
    let observed = |i: usize| report.rows[i].crossing_kind == CrossingKind::Observed;
    let rows: Vec<String> = report
        .rows
        .iter()
        .map(|r| {
            let rates: Vec<String> = column(&curve, r.w2).iter().map(|p| format!("{:.2}", p.rate)).collect();
            format!(
                "W2={}: theory {:.4}, crossing {} ({:?}), gap {}, rates [{}]",
                r.w2,
                r.theoretical_threshold,
                r.empirical_crossing.map_or("-".into(), |c| format!("{c:.4}")),
                r.crossing_kind,
                r.gap.map_or("-".into(), |g| format!("{g:+.4}")),
                rates.join(" ")
            )
        })
        .collect();
    let ok = t(1) > t(0) && observed(0) && observed(1) && report.ordering_agrees == Some(true);
    check(ok, format!("ordering agrees {:?}; {}", report.ordering_agrees, rows.join("; ")))
}

fn exponent_angle_oracle() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for w in [1.0, 2.0] {
        for delta in [0.5, 0.75] {
            let gap = common::exponent_angle_gap(delta, w, 0.2, 0.05);
            worst = worst.max(gap);
            parts.push(format!("W={w} delta={delta}: {gap:.2e}"));
        }
    }
    check(worst <= 3e-2, format!("max |psi - ln(term)/n| = {worst:.3e} ({})", parts.join(", ")))
}

fn nullspace_equivalence() -> Outcome {
    let mut disagree = Vec::new();
    let mut holds = 0;
    for seed in 0..100 {
        let (verdict, all) = common::nullspace_trial(seed);
        holds += verdict as usize;
        if verdict != all {
            disagree.push(seed);
        }
    }
    check(disagree.is_empty(), format!("{} disagreements over 100 instances ({holds} satisfy the condition)", disagree.len()))
}

fn lp_certification() -> Outcome {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    let (mut worst_obj, mut worst_gap): (f64, f64) = (0.0, 0.0);
    for _ in 0..500 {
        let (rel, gap) = common::check_tiny_lp(&common::tiny_lp(&mut rng));
        worst_obj = worst_obj.max(rel);
        worst_gap = worst_gap.max(gap);
    }
    check(
        worst_obj <= 1e-6 && worst_gap <= 1e-8,
        format!("500 LPs: max relative objective error {worst_obj:.2e}, max duality gap {worst_gap:.2e}"),
    )
}

fn symmetry_reduction() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;

    // recovery outputs with unit weights do not see the class split
    let opts = RecoveryOptions::default();
    let mut mismatches = 0;
    for seed in 0..20 {
        let mut reference = None;
        for n1 in [5, 20, 33] {
            let model = SparsityModel::new(n1, 40 - n1, 0.15, 0.15).unwrap();
            let inst = gaussian_instance(&model, 24, AmplitudeLaw::Gaussian, seed).unwrap();
            let r = recover(&inst, &WeightScheme::two_valued(&model, 1.0).unwrap(), &opts).unwrap();
            let key = (r.x_hat, r.success);
            match &reference {
                None => reference = Some(key),
                Some(k) => mismatches += (*k != key) as usize,
            }
        }
    }
    ok &= mismatches == 0;
    notes.push(format!("recovery mismatches {mismatches}/40"));

    // thresholds: with W2 = 1 only the total support fraction matters
    let topts = ThresholdOptions { tol: 1e-6, ..Default::default() };
    let p_star = threshold_uniform(0.5, &topts).map_err(|e| e.to_string())?;
    let mut totals = Vec::new();
    for g1 in [0.3, 0.5, 0.7] {
        let base = AsymptoticConfig::new(0.5, g1, 1.0 - g1, 0.0, p_star, 1.0).unwrap();
        let t = threshold_p1_with(&base, &topts).map_err(|e| e.to_string())?;
        totals.push((g1, t));
    }
    let spread = totals.iter().map(|(_, t)| (t - p_star).abs()).fold(0.0, f64::max);
    ok &= spread <= 1e-5;
    notes.push(format!("threshold at P2 = p* = {p_star:.6} deviates by {spread:.1e} across splits"));

    // exponents: the dominant face size and the worst exponent
    let sopts = SearchOptions { grid: 80, boundary_points: 80, ..Default::default() };
    let mut stats = Vec::new();
    for g1 in [0.3, 0.5, 0.7] {
        let cfg = AsymptoticConfig::new(0.5, g1, 1.0 - g1, 0.15, 0.15, 1.0).unwrap();
        let d = dominant_point(&cfg, &sopts).map_err(|e| e.to_string())?.ok_or("no dominant point")?;
        let max = exponent_surface(&cfg, &sopts).map_err(|e| e.to_string())?.max_psi();
        stats.push((d.t1p + d.t2p, max));
    }
    let dev = stats.iter().map(|s| (s.0 - stats[0].0).abs().max((s.1 - stats[0].1).abs())).fold(0.0, f64::max);
    ok &= dev <= 1e-6;
    notes.push(format!("exponent deviation across splits {dev:.1e}"));

    // optimal weight when the optimum has P1 = P2
    let best = optimal_weight(0.5, p_star, 0.5, 0.5).map_err(|e| e.to_string())?;
    ok &= (best.w_star - 1.0).abs() <= 1e-2;
    notes.push(format!("optimal_weight at P2 = p*: W* = {:.4}, P1* = {:.6}", best.w_star, best.p1_star));

    let cfg = AsymptoticConfig::new(0.5, 0.5, 0.5, 0.15, 0.15, 1.0).unwrap();
    let wopts = WeightSearchOptions { w_max: 4.0, ..Default::default() };
    let (w_robust, _) = most_robust_weight(&cfg, &wopts).map_err(|e| e.to_string())?;
    ok &= (w_robust - 1.0).abs() <= 1e-2;
    notes.push(format!("most robust weight at P1 = P2 = 0.15: {w_robust:.4}"));

    check(ok, notes.join("; "))
}

fn wl1(args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_wl1")).args(args).output().map_err(|e| e.to_string())?;
    match out.status.code() {
        Some(0) | Some(1) => Ok(()),
        _ => Err(format!("wl1 {args:?} failed: {}", String::from_utf8_lossy(&out.stderr))),
    }
}

fn dir_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

fn cli_determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let commands: Vec<Vec<&str>> = vec![
        vec!["recover", "--n", "200", "--m", "100", "--n1", "100", "--p1", "0.3", "--p2", "0.05", "--w2", "3", "--seed", "7"],
        vec!["simulate", "--n", "60", "--n1", "30", "--m", "30", "--p2", "0.05", "--p1-values", "0.1:0.3:0.1", "--w2-values", "1,2", "--trials", "20", "--seed", "9", "--theory", "--plot"],
        vec!["threshold", "--delta", "0.75", "--p2", "0.1", "--gamma1", "0.5", "--w2-range", "1:3:0.5", "--plot"],
        vec!["surface", "--delta", "0.5", "--gamma1", "0.5", "--p1", "0.2", "--p2", "0.05", "--w2", "2", "--grid", "40"],
        vec!["angles", "--n1", "12", "--n2", "12", "--w2", "2", "--k1", "2", "--k2", "1", "--m", "10"],
    ];
    let mut compared = 0;
    for (i, cmd) in commands.iter().enumerate() {
        let first = tmp.path().join(format!("{i}-first"));
        wl1(&[&cmd[..], &["--threads", "1", "--out", first.to_str().unwrap()]].concat())?;
        let manifest = first.join("manifest.json");
        let reference = dir_files(&first);
        for threads in ["1", "3"] {
            let again = tmp.path().join(format!("{i}-replay-{threads}"));
            wl1(&["replay", manifest.to_str().unwrap(), "--threads", threads, "--out", again.to_str().unwrap()])?;
            if dir_files(&again) != reference {
                return Err(format!("{} replay at {threads} threads differs", cmd[0]));
            }
            compared += reference.iter().filter(|(n, _)| n.ends_with(".csv")).count();
        }
    }
    Ok(format!("{compared} CSV files byte-identical on replay at 1 and 3 threads"))
}

fn main() {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 7] = [
        ("1 weighted recovery-rate improvement", weighted_rate_improvement),
        ("2 empirical vs asymptotic threshold ordering", threshold_ordering),
        ("3 exponent-angle oracle", exponent_angle_oracle),
        ("4 null-space condition vs recovery", nullspace_equivalence),
        ("5 LP solver certification", lp_certification),
        ("6 symmetry and reduction", symmetry_reduction),
        ("7 CLI replay determinism", cli_determinism),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let result = run();
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS [{name}] ({secs:.1}s) {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL [{name}] ({secs:.1}s) {detail}");
            }
        }
    }
    println!("{} of 7 criteria passed", 7 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
