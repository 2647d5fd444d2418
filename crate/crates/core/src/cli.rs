//! `sumrate` command-line driver.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::diagnostics::{
    all_members_inverse_z, check_rate_convexity_samples, check_sinr_convexity_samples,
    SampleParams, DEFAULT_SINR_EPS, RATE_CHECK_SLACK,
};
use crate::error::{Error, Result};
use crate::hsd::{solve_rate, solve_sinr, IterTrace, SolverConfig, StepSchedule};
use crate::recover::{recover_power, RecoverOptions};
use crate::scenario::{generate_problem, load_problem, ScenarioParams, UatFProblem};
use crate::specrad::log_map;
use crate::wmmse::{wmmse_solve, WmmseInit, WmmseOptions};

#[derive(Debug, Parser)]
#[command(name = "sumrate", version, about = "Weighted sum-rate maximization over spectral-radius rate regions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a random cell-less uplink instance.
    Generate {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Rate-domain solver.
    SolveRate {
        #[command(flatten)]
        solve: SolveArgs,
        #[arg(long, default_value_t = 0.4)]
        a: f64,
        #[arg(long, default_value_t = crate::hsd::DEFAULT_RATE_BOX)]
        b: f64,
    },
    /// SINR-domain solver.
    SolveSinr {
        #[command(flatten)]
        solve: SolveArgs,
        #[arg(long, default_value_t = 1.6)]
        a: f64,
        #[arg(long, default_value_t = crate::hsd::DEFAULT_SINR_BOX)]
        b: f64,
    },
    /// Recover transmit powers from a solution file.
    Recover {
        #[arg(short, long)]
        input: PathBuf,
        /// Solution JSON with a `rates` array, or a bare JSON list of rates.
        #[arg(long)]
        rates: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Inverse-Z test and sampled convexity check of one instance.
    Diagnose {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = CheckKind::Rate)]
        domain: CheckKind,
        #[command(flatten)]
        sample: SampleArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// WMMSE baseline.
    Wmmse {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = InitKind::Full)]
        init: InitKind,
        #[arg(long, default_value_t = 10_000)]
        iters: usize,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long)]
        solution: Option<PathBuf>,
    },
    /// Batch statistics over generated instances.
    Sweep {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long, default_value_t = 1000)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        sample: SampleArgs,
        /// Worker threads (0 = all cores).
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        #[arg(short, long)]
        output: PathBuf,
    },
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ScenarioArgs {
    #[arg(long, default_value_t = 3)]
    pub users: usize,
    #[arg(long, default_value_t = 4)]
    pub aps: usize,
    #[arg(long, default_value_t = 2)]
    pub antennas: usize,
    #[arg(long, default_value_t = 100.0)]
    pub side: f64,
    #[arg(long, default_value_t = 2)]
    pub serve: usize,
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    #[arg(long, default_value_t = 1e8)]
    pub pmax: f64,
}

impl ScenarioArgs {
    fn params(&self) -> ScenarioParams {
        ScenarioParams {
            users: self.users,
            aps: self.aps,
            antennas: self.antennas,
            side_m: self.side,
            serve: self.serve,
            samples: self.samples,
            p_max: self.pmax,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SolveArgs {
    #[arg(short, long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 2000)]
    pub iters: usize,
    #[arg(long, default_value_t = 0.999)]
    pub q: f64,
    /// Scalar (constant vector) or JSON list.
    #[arg(long, default_value = "0.5")]
    pub init: String,
    #[arg(short, long)]
    pub output: PathBuf,
    #[arg(long)]
    pub solution: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, Args, Serialize)]
pub struct SampleArgs {
    #[arg(long, default_value_t = 10_000)]
    pub pairs: usize,
    #[arg(long = "box", default_value_t = 5.0)]
    pub box_hi: f64,
    #[arg(long, default_value_t = 99)]
    pub alphas: usize,
    /// Slack; defaults to 1e-12 for the rate check and 1e-13 for the SINR check.
    #[arg(long)]
    pub eps: Option<f64>,
}

impl SampleArgs {
    fn params(&self, kind: CheckKind, seed: u64) -> SampleParams {
        let eps = self.eps.unwrap_or(match kind {
            CheckKind::Rate => RATE_CHECK_SLACK,
            CheckKind::Sinr => DEFAULT_SINR_EPS,
        });
        SampleParams {
            n_pairs: self.pairs,
            box_hi: self.box_hi,
            n_alpha: self.alphas,
            eps,
            seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckKind {
    Rate,
    Sinr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum InitKind {
    Full,
    Alt,
}

/// Parses `--init`: a scalar `x` means `x * 1`, otherwise a JSON list of length `n`.
pub fn parse_init(text: &str, n: usize) -> Result<Vec<f64>> {
    if let Ok(x) = text.trim().parse::<f64>() {
        return Ok(vec![x; n]);
    }
    let v: Vec<f64> = serde_json::from_str(text)
        .map_err(|e| Error::InvalidConfig(format!("--init must be a number or JSON list: {e}")))?;
    if v.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: v.len(),
        });
    }
    Ok(v)
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let f = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(f, value)?;
    Ok(())
}

fn write_trace(path: &Path, trace: &IterTrace) -> Result<()> {
    trace.write_csv(BufWriter::new(File::create(path)?))?;
    Ok(())
}

fn solve(problem: &UatFProblem, args: &SolveArgs, a: f64, b: f64, sinr: bool) -> Result<()> {
    let n = problem.n();
    let mut cfg = if sinr {
        SolverConfig::sinr_defaults(n)
    } else {
        SolverConfig::rate_defaults(n)
    };
    cfg.schedule = StepSchedule::new(a, args.q)?;
    cfg.box_bound = b;
    cfg.max_iter = args.iters;
    cfg.initial_point = parse_init(&args.init, n)?;
    cfg.weights = problem.w().to_vec();
    let family = problem.family()?;
    let trace = if sinr {
        solve_sinr(&family, &cfg)?
    } else {
        solve_rate(&family, &cfg)?
    };
    write_trace(&args.output, &trace)?;
    eprintln!(
        "iterations {}  final objective {:.12}  final gamma {:.6e}",
        trace.len(),
        trace.solution_objective,
        trace.last().gamma
    );
    if trace.upper_box_hits > 0 {
        eprintln!(
            "warning: {} iterates hit the upper box face b = {b}; consider a larger --b",
            trace.upper_box_hits
        );
    }
    if let Some(path) = &args.solution {
        let params = json!({
            "domain": if sinr { "sinr" } else { "rate" },
            "input": args.input,
            "iters": args.iters,
            "a": a,
            "q": args.q,
            "b": b,
            "init": cfg.initial_point,
        });
        let mut out = json!({
            "rates": trace.solution_rates(),
            "objective": trace.solution_objective,
            "last_iterate_objective": trace.final_objective(),
            "final_gamma": trace.last().gamma,
            "upper_box_hits": trace.upper_box_hits,
            "params": params,
        });
        if sinr {
            out["sinr"] = json!(trace.solution);
        }
        write_json(path, &out)?;
    }
    Ok(())
}

fn read_rates(path: &Path) -> Result<Vec<f64>> {
    let v: Value = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    let list = match &v {
        Value::Array(_) => &v,
        Value::Object(o) => o
            .get("rates")
            .ok_or_else(|| Error::Schema("solution file has no `rates` field".into()))?,
        _ => return Err(Error::Schema("expected a list or an object with `rates`".into())),
    };
    serde_json::from_value(list.clone()).map_err(|e| Error::Schema(e.to_string()))
}

#[derive(Debug, Serialize)]
struct SweepSummary {
    count: usize,
    generated: usize,
    rejected: usize,
    inverse_z: usize,
    rate_check_passed: usize,
    sinr_check_passed: usize,
    inverse_z_fraction: f64,
    rate_check_fraction: f64,
    sinr_check_fraction: f64,
    /// Inverse-Z instances with rate-check violations; zero whenever the theory holds.
    inverse_z_rate_failures: usize,
    params: Value,
}

struct SweepItem {
    inverse_z: bool,
    rate_ok: bool,
    sinr_ok: bool,
}

fn sweep_one(params: &ScenarioParams, sample: &SampleArgs, seed: u64) -> Result<Option<SweepItem>> {
    let problem = match generate_problem(params, seed) {
        Ok(p) => p,
        Err(Error::NonPositiveEntry { .. } | Error::DegenerateChannel { .. }) => return Ok(None),
        Err(e) => return Err(e),
    };
    let family = problem.family()?;
    let rate = check_rate_convexity_samples(&family, &sample.params(CheckKind::Rate, seed))?;
    let sinr = check_sinr_convexity_samples(&family, &sample.params(CheckKind::Sinr, seed))?;
    Ok(Some(SweepItem {
        inverse_z: all_members_inverse_z(&family),
        rate_ok: rate.violations == 0,
        sinr_ok: sinr.violations == 0,
    }))
}

fn run_sweep(scenario: &ScenarioArgs, count: usize, seed: u64, sample: &SampleArgs, jobs: usize) -> Result<SweepSummary> {
    if count == 0 {
        return Err(Error::EmptyBatch);
    }
    let params = scenario.params();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidParams(e.to_string()))?;
    let items: Vec<Result<Option<SweepItem>>> = pool.install(|| {
        (0..count as u64)
            .into_par_iter()
            .map(|i| sweep_one(&params, sample, seed.wrapping_add(i)))
            .collect()
    });
    let mut s = SweepSummary {
        count,
        generated: 0,
        rejected: 0,
        inverse_z: 0,
        rate_check_passed: 0,
        sinr_check_passed: 0,
        inverse_z_fraction: 0.0,
        rate_check_fraction: 0.0,
        sinr_check_fraction: 0.0,
        inverse_z_rate_failures: 0,
        params: json!({
            "scenario": scenario,
            "sample": sample,
            "seed": seed,
        }),
    };
    for item in items {
        match item? {
            None => s.rejected += 1,
            Some(it) => {
                s.generated += 1;
                s.inverse_z += usize::from(it.inverse_z);
                s.rate_check_passed += usize::from(it.rate_ok);
                s.sinr_check_passed += usize::from(it.sinr_ok);
                s.inverse_z_rate_failures += usize::from(it.inverse_z && !it.rate_ok);
            }
        }
    }
    if s.generated > 0 {
        let g = s.generated as f64;
        s.inverse_z_fraction = s.inverse_z as f64 / g;
        s.rate_check_fraction = s.rate_check_passed as f64 / g;
        s.sinr_check_fraction = s.sinr_check_passed as f64 / g;
    }
    Ok(s)
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate {
            scenario,
            seed,
            output,
        } => {
            let problem = generate_problem(&scenario.params(), seed)?;
            let mut v: Value = serde_json::from_str(&problem.to_json()?)?;
            v["params"] = json!({ "scenario": scenario, "seed": seed });
            write_json(&output, &v)
        }
        Command::SolveRate { solve: s, a, b } => solve(&load_problem(&s.input)?, &s, a, b, false),
        Command::SolveSinr { solve: s, a, b } => solve(&load_problem(&s.input)?, &s, a, b, true),
        Command::Recover {
            input,
            rates,
            output,
        } => {
            let problem = load_problem(&input)?;
            let r = read_rates(&rates)?;
            let sol = recover_power(&problem.interference_model(), &r, &RecoverOptions::default())?;
            let mut v = serde_json::to_value(&sol)?;
            v["weighted_sum_rate"] = json!(sol.weighted_sum_rate(problem.w()));
            v["params"] = json!({ "input": input, "rates": rates });
            write_json(&output, &v)
        }
        Command::Diagnose {
            input,
            domain,
            sample,
            seed,
            output,
        } => {
            let problem = load_problem(&input)?;
            let family = problem.family()?;
            let params = sample.params(domain, seed);
            let report = match domain {
                CheckKind::Rate => check_rate_convexity_samples(&family, &params)?,
                CheckKind::Sinr => check_sinr_convexity_samples(&family, &params)?,
            };
            let mut v = serde_json::to_value(&report)?;
            v["all_inverse_z"] = json!(all_members_inverse_z(&family));
            write_json(&output, &v)
        }
        Command::Wmmse {
            input,
            init,
            iters,
            output,
            solution,
        } => {
            let problem = load_problem(&input)?;
            let start = match init {
                InitKind::Full => WmmseInit::Full,
                InitKind::Alt => WmmseInit::Alternating,
            }
            .point(problem.n(), problem.p_max());
            let opts = WmmseOptions {
                max_iter: iters,
                ..WmmseOptions::default()
            };
            let trace = wmmse_solve(&problem.interference_model(), problem.w(), &start, &opts)?;
            write_trace(&output, &trace)?;
            eprintln!(
                "iterations {}  final objective {:.12}",
                trace.len(),
                trace.solution_objective
            );
            if let Some(path) = solution {
                let rates = log_map(&problem.interference_model().sinr(&trace.solution));
                write_json(
                    &path,
                    &json!({
                        "p": trace.solution,
                        "rates": rates,
                        "objective": trace.solution_objective,
                        "iterations": trace.len(),
                        "params": { "input": input, "init": init, "iters": iters },
                    }),
                )?;
            }
            Ok(())
        }
        Command::Sweep {
            scenario,
            count,
            seed,
            sample,
            jobs,
            output,
        } => {
            let summary = run_sweep(&scenario, count, seed, &sample, jobs)?;
            eprintln!(
                "generated {}  inverse-Z {:.3}  rate check {:.3}  SINR check {:.3}",
                summary.generated,
                summary.inverse_z_fraction,
                summary.rate_check_fraction,
                summary.sinr_check_fraction
            );
            write_json(&output, &summary)
        }
    }
}
