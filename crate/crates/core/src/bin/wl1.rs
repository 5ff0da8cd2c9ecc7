//! `wl1`: command-line front end. Each subcommand builds a run manifest,
//! executes it into `--out`, and exits with 0 (success), 1 (negative
//! recovery verdict) or 2 (error).

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use weighted_l1::experiments::ExperimentPlan;
use weighted_l1::exponents::AsymptoticConfig;
use weighted_l1::manifest::{read_model, read_plan, Command, Format, ModelManifest, RunManifest};
use weighted_l1::model::AmplitudeLaw;
use weighted_l1::recovery::SUCCESS_TOL;
use weighted_l1::runner::{execute, Verdict};

#[derive(Parser)]
#[command(name = "wl1", version, about = "Weighted l1 recovery, thresholds and optimal weights")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, default_value = "wl1-out")]
    out: PathBuf,
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    /// Also write SVG plots.
    #[arg(long, global = true)]
    plot: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum AmplitudeArg {
    Gaussian,
    Rademacher,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate one instance and recover it.
    Recover(RecoverArgs),
    /// Monte Carlo recovery rates over a (P1, W2) grid.
    Simulate(SimulateArgs),
    /// Asymptotic recoverable-P1 threshold as a function of W2.
    Threshold(ThresholdArgs),
    /// Weight maximizing the recoverable-P1 threshold.
    Weights(WeightsArgs),
    /// Exponent surface over the face-size region.
    Surface(SurfaceArgs),
    /// Finite-n internal/external angle table.
    Angles(AnglesArgs),
    /// Re-run a stored manifest.
    Replay { manifest: PathBuf },
}

#[derive(Args)]
struct RecoverArgs {
    /// Model manifest (JSON with n, n1, n2, P1, P2, W2, seed, amplitude).
    #[arg(long, conflicts_with_all = ["n", "n1", "p1", "p2", "w2", "seed"])]
    model: Option<PathBuf>,
    #[arg(long, required_unless_present = "model")]
    n: Option<usize>,
    #[arg(long)]
    m: usize,
    #[arg(long, required_unless_present = "model")]
    n1: Option<usize>,
    #[arg(long, required_unless_present = "model")]
    p1: Option<f64>,
    #[arg(long, required_unless_present = "model")]
    p2: Option<f64>,
    #[arg(long, required_unless_present = "model")]
    w2: Option<f64>,
    #[arg(long, required_unless_present = "model")]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = AmplitudeArg::Gaussian)]
    amplitude: AmplitudeArg,
    #[arg(long, default_value_t = SUCCESS_TOL)]
    success_tol: f64,
}

#[derive(Args)]
struct SimulateArgs {
    /// Plan file: a bare experiment plan or a simulate manifest.
    #[arg(long, conflicts_with_all = ["n", "n1", "m", "p2", "p1_values", "w2_values", "seed"])]
    plan: Option<PathBuf>,
    #[arg(long, required_unless_present = "plan")]
    n: Option<usize>,
    #[arg(long, required_unless_present = "plan")]
    n1: Option<usize>,
    #[arg(long, required_unless_present = "plan")]
    m: Option<usize>,
    #[arg(long, required_unless_present = "plan")]
    p2: Option<f64>,
    /// Comma list or `start:stop:step`.
    #[arg(long, required_unless_present = "plan")]
    p1_values: Option<String>,
    /// Comma list or `start:stop:step`.
    #[arg(long, required_unless_present = "plan")]
    w2_values: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Compare 50% crossings with asymptotic thresholds.
    #[arg(long)]
    theory: bool,
}

#[derive(Args)]
struct ThresholdArgs {
    #[arg(long)]
    delta: f64,
    #[arg(long)]
    p2: f64,
    #[arg(long)]
    gamma1: f64,
    /// Defaults to `1 − gamma1`.
    #[arg(long)]
    gamma2: Option<f64>,
    /// Comma list or `start:stop:step`.
    #[arg(long)]
    w2_range: String,
    #[arg(long, default_value_t = 1e-3)]
    tol: f64,
}

#[derive(Args)]
struct WeightsArgs {
    #[arg(long)]
    delta: f64,
    #[arg(long)]
    p2: f64,
    #[arg(long)]
    gamma1: f64,
    #[arg(long)]
    gamma2: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    w_min: f64,
    #[arg(long, default_value_t = 10.0)]
    w_max: f64,
    #[arg(long, default_value_t = 1e-2)]
    tol: f64,
}

#[derive(Args)]
struct SurfaceArgs {
    #[arg(long)]
    delta: f64,
    #[arg(long)]
    gamma1: f64,
    #[arg(long)]
    gamma2: Option<f64>,
    #[arg(long)]
    p1: f64,
    #[arg(long)]
    p2: f64,
    #[arg(long)]
    w2: f64,
    #[arg(long, default_value_t = 100)]
    grid: usize,
}

#[derive(Args)]
struct AnglesArgs {
    #[arg(long)]
    n1: usize,
    #[arg(long)]
    n2: usize,
    #[arg(long)]
    w2: f64,
    #[arg(long)]
    k1: usize,
    #[arg(long)]
    k2: usize,
    /// Keep only the union-bound range `t1 + t2 > m − k + 1`.
    #[arg(long)]
    m: Option<usize>,
}

/// Parses `a,b,c` or `start:stop:step`; range values are rounded to 12
/// decimals so `1:3:0.1` yields exactly 21 clean points.
fn parse_sweep(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() == 3 {
        let [a, b, step] = [parts[0], parts[1], parts[2]].map(|p| p.trim().parse::<f64>());
        let (a, b, step) = (a?, b?, step?);
        if step.is_nan() || step <= 0.0 || b < a {
            bail!("range {s:?} needs start <= stop and a positive step");
        }
        let count = ((b - a) / step + 1e-9).floor() as usize + 1;
        return Ok((0..count).map(|i| ((a + i as f64 * step) * 1e12).round() / 1e12).collect());
    }
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| p.parse::<f64>().with_context(|| format!("bad sweep value {p:?}")))
        .collect()
}

fn gamma2(gamma1: f64, gamma2: Option<f64>) -> f64 {
    gamma2.unwrap_or(1.0 - gamma1)
}

fn build(cli: &Cli) -> Result<RunManifest> {
    let format = match cli.format {
        FormatArg::Csv => Format::Csv,
        FormatArg::Json => Format::Json,
    };
    let command = match &cli.cmd {
        Cmd::Replay { manifest } => {
            return RunManifest::read(manifest).with_context(|| format!("reading {}", manifest.display()));
        }
        Cmd::Recover(a) => {
            let model = match &a.model {
                Some(path) => read_model(path)?,
                None => {
                    let (n, n1) = (a.n.unwrap(), a.n1.unwrap());
                    if n1 > n {
                        bail!("n1 = {n1} exceeds n = {n}");
                    }
                    ModelManifest {
                        n,
                        n1,
                        n2: n - n1,
                        p1: a.p1.unwrap(),
                        p2: a.p2.unwrap(),
                        w2: a.w2.unwrap(),
                        seed: a.seed.unwrap(),
                        amplitude: match a.amplitude {
                            AmplitudeArg::Gaussian => AmplitudeLaw::Gaussian,
                            AmplitudeArg::Rademacher => AmplitudeLaw::Rademacher,
                        },
                    }
                }
            };
            Command::Recover { model, m: a.m, success_tol: a.success_tol }
        }
        Cmd::Simulate(a) => {
            let plan = match &a.plan {
                Some(path) => {
                    let mut plan = read_plan(path)?;
                    if let Some(t) = a.trials {
                        plan.trials = t;
                    }
                    plan
                }
                None => ExperimentPlan {
                    n: a.n.unwrap(),
                    n1: a.n1.unwrap(),
                    m: a.m.unwrap(),
                    p2: a.p2.unwrap(),
                    p1_values: parse_sweep(a.p1_values.as_deref().unwrap())?,
                    w2_values: parse_sweep(a.w2_values.as_deref().unwrap())?,
                    trials: a.trials.unwrap_or(200),
                    seed: a.seed.unwrap_or(0),
                    success_tol: SUCCESS_TOL,
                    amplitude: AmplitudeLaw::Gaussian,
                },
            };
            plan.validate()?;
            Command::Simulate { plan, theory: a.theory }
        }
        Cmd::Threshold(a) => Command::Threshold {
            delta: a.delta,
            p2: a.p2,
            gamma1: a.gamma1,
            gamma2: gamma2(a.gamma1, a.gamma2),
            w2_values: parse_sweep(&a.w2_range)?,
            tol: a.tol,
        },
        Cmd::Weights(a) => Command::Weights {
            delta: a.delta,
            p2: a.p2,
            gamma1: a.gamma1,
            gamma2: gamma2(a.gamma1, a.gamma2),
            w_min: a.w_min,
            w_max: a.w_max,
            tol: a.tol,
        },
        Cmd::Surface(a) => Command::Surface {
            config: AsymptoticConfig::new(a.delta, a.gamma1, gamma2(a.gamma1, a.gamma2), a.p1, a.p2, a.w2)?,
            grid: a.grid,
        },
        Cmd::Angles(a) => Command::Angles { n1: a.n1, n2: a.n2, w2: a.w2, k1: a.k1, k2: a.k2, m: a.m },
    };
    Ok(RunManifest::new(command, format, cli.plot))
}

fn run(cli: &Cli) -> Result<Verdict> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global()?;
    }
    let manifest = build(cli)?;
    let verdict = execute(&manifest, &cli.out)?;
    eprintln!("{}: wrote {}", manifest.command.name(), cli.out.display());
    Ok(verdict)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Verdict::Positive) => ExitCode::SUCCESS,
        Ok(Verdict::Negative) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
