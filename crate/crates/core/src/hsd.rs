//! Hybrid steepest descent with subgradient projections onto the spectral
//! radius level set, in the rate domain and in the SINR domain.
//!
//! One iteration, with `h` the constraint function and `g_k` a subgradient:
//!
//! ```text
//! x_hat   = x_k - (h(x_k) - 1) g_k / ||g_k||^2   if h(x_k) > 1, else x_k
//! x_tilde = clamp(x_hat, 0, b)
//! x_{k+1} = x_tilde - mu_k grad(objective)(x_tilde)
//! ```
//!
//! The rate objective is `-w^T r` (gradient `-w`), the SINR objective is
//! `-sum w_n log(1 + s_n)`.

use std::io::Write;

use crate::error::{Error, Result};
use crate::specrad::{exp_map, log_map, MaxLinearFamily, SubgradResult};

pub const DEFAULT_RATE_BOX: f64 = 50.0;
pub const DEFAULT_SINR_BOX: f64 = 1e6;
pub const DEFAULT_FEASIBILITY_TOL: f64 = 1e-4;

/// `mu_k = a k^{-q}` with `a > 0`, `q in (0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepSchedule {
    a: f64,
    q: f64,
}

impl StepSchedule {
    pub fn new(a: f64, q: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::InvalidConfig(format!("step scale a must be positive, got {a}")));
        }
        if !(q > 0.0 && q <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "step exponent q must lie in (0, 1], got {q}"
            )));
        }
        Ok(Self { a, q })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// Step for iteration `k >= 1`.
    pub fn step(&self, k: usize) -> f64 {
        self.a * (k as f64).powf(-self.q)
    }
}

/// Optional early exit: stop once both the objective change and the
/// constraint excess stay below `tol` for `window` consecutive iterations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EarlyExit {
    pub tol: f64,
    pub window: usize,
}

impl Default for EarlyExit {
    fn default() -> Self {
        Self { tol: 1e-8, window: 50 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub box_bound: f64,
    pub max_iter: usize,
    /// Iterations with `gamma <= 1 + feasibility_tol` are flagged feasible.
    pub feasibility_tol: f64,
    pub initial_point: Vec<f64>,
    pub schedule: StepSchedule,
    pub weights: Vec<f64>,
    pub early_exit: Option<EarlyExit>,
}

impl SolverConfig {
    /// Rate-domain defaults: `mu_k = 0.4 k^{-0.999}`, `r_1 = 0.5 * 1`, `b = 50`, 2000 iterations.
    pub fn rate_defaults(n: usize) -> Self {
        Self {
            box_bound: DEFAULT_RATE_BOX,
            max_iter: 2000,
            feasibility_tol: DEFAULT_FEASIBILITY_TOL,
            initial_point: vec![0.5; n],
            schedule: StepSchedule { a: 0.4, q: 0.999 },
            weights: vec![1.0; n],
            early_exit: None,
        }
    }

    /// SINR-domain defaults: `mu_k = 1.6 k^{-0.999}`, `s_1 = 0.5 * 1`, `b = 1e6`, 2000 iterations.
    pub fn sinr_defaults(n: usize) -> Self {
        Self {
            box_bound: DEFAULT_SINR_BOX,
            schedule: StepSchedule { a: 1.6, q: 0.999 },
            ..Self::rate_defaults(n)
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if !(self.box_bound > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "box bound must be positive, got {}",
                self.box_bound
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidConfig("max_iter must be at least 1".into()));
        }
        // re-run the schedule checks in case fields were built by hand elsewhere
        StepSchedule::new(self.schedule.a, self.schedule.q)?;
        for (name, v) in [("initial point", &self.initial_point), ("weights", &self.weights)] {
            if v.len() != n {
                return Err(Error::InvalidConfig(format!(
                    "{name} has length {}, expected {n}",
                    v.len()
                )));
            }
            if let Some(x) = v.iter().find(|x| !(**x > 0.0 && x.is_finite())) {
                return Err(Error::InvalidConfig(format!(
                    "{name} must be strictly positive, found {x}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Rate,
    Sinr,
    Power,
}

impl Domain {
    fn prefix(self) -> &'static str {
        match self {
            Domain::Rate => "r",
            Domain::Sinr => "s",
            Domain::Power => "p",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterRecord {
    /// One-based iteration counter.
    pub k: usize,
    pub iterate: Vec<f64>,
    pub objective: f64,
    pub gamma: f64,
    pub feasible: bool,
    /// Zero-based active member (written one-based in CSV).
    pub active: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterTrace {
    pub domain: Domain,
    pub records: Vec<IterRecord>,
    /// Final iterate pulled onto the constraint set (see [`restore_feasible`]).
    pub solution: Vec<f64>,
    pub solution_objective: f64,
    /// Number of iterations where the box projection clipped a coordinate at `b`.
    pub upper_box_hits: usize,
}

impl IterTrace {
    pub fn last(&self) -> &IterRecord {
        self.records.last().expect("trace is never empty")
    }

    pub fn final_objective(&self) -> f64 {
        self.last().objective
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Solution expressed as rates, whatever the domain.
    pub fn solution_rates(&self) -> Vec<f64> {
        match self.domain {
            Domain::Rate => self.solution.clone(),
            Domain::Sinr => log_map(&self.solution),
            Domain::Power => panic!("power-domain traces carry powers, not rates"),
        }
    }

    /// CSV with header `iter,objective,gamma,feasible,active_l,x_1..x_N`,
    /// 17 significant digits per float.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let n = self.records.first().map_or(0, |r| r.iterate.len());
        let p = self.domain.prefix();
        write!(out, "iter,objective,gamma,feasible,active_l")?;
        for i in 1..=n {
            write!(out, ",{p}_{i}")?;
        }
        writeln!(out)?;
        for r in &self.records {
            write!(
                out,
                "{},{:.16e},{:.16e},{},{}",
                r.k,
                r.objective,
                r.gamma,
                u8::from(r.feasible),
                r.active + 1
            )?;
            for x in &r.iterate {
                write!(out, ",{x:.16e}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Coordinatewise clamp onto `[0, b]^N`.
pub fn box_project(x: &[f64], b: f64) -> Vec<f64> {
    x.iter().map(|v| v.max(0.0).min(b)).collect()
}

fn subgradient_projection(x: &[f64], sg: &SubgradResult) -> Vec<f64> {
    if sg.value <= 1.0 {
        return x.to_vec();
    }
    let norm2: f64 = sg.gradient.iter().map(|g| g * g).sum();
    let t = (sg.value - 1.0) / norm2;
    x.iter().zip(&sg.gradient).map(|(xi, gi)| xi - t * gi).collect()
}

/// Rate-domain subgradient projection onto `{r : h(r) <= 1}`.
pub fn sp_step_rate(family: &MaxLinearFamily, r: &[f64]) -> Result<(Vec<f64>, SubgradResult)> {
    let sg = family.subgrad_rate(r)?;
    Ok((subgradient_projection(r, &sg), sg))
}

/// SINR-domain subgradient projection onto `{s : rho_G(s) <= 1}`.
pub fn sp_step_sinr(family: &MaxLinearFamily, s: &[f64]) -> Result<(Vec<f64>, SubgradResult)> {
    let sg = family.subgrad_sinr(s)?;
    Ok((subgradient_projection(s, &sg), sg))
}

/// Gradient of `Phi(s) = -sum w_n log(1 + s_n)` on `s >= 0`.
pub fn grad_phi(s: &[f64], w: &[f64]) -> Result<Vec<f64>> {
    if s.len() != w.len() {
        return Err(Error::DimensionMismatch {
            expected: w.len(),
            got: s.len(),
        });
    }
    if let Some((index, &value)) = s.iter().enumerate().find(|(_, v)| !(**v >= 0.0)) {
        return Err(Error::NegativeInput { index, value });
    }
    Ok(s.iter().zip(w).map(|(sn, wn)| -wn / (1.0 + sn)).collect())
}

/// Pulls a nonnegative SINR vector onto `{rho_G <= 1}` by radial scaling.
///
/// `rho_G` is positively homogeneous, so `s / rho_G(s)` lies on the boundary
/// whenever `rho_G(s) > 1`; points already inside are returned unchanged.
pub fn restore_feasible(s: &[f64], gamma: f64) -> Vec<f64> {
    if gamma > 1.0 {
        s.iter().map(|x| x / gamma).collect()
    } else {
        s.to_vec()
    }
}

fn rate_objective(w: &[f64], r: &[f64]) -> f64 {
    w.iter().zip(r).map(|(a, b)| a * b).sum()
}

fn sinr_objective(w: &[f64], s: &[f64]) -> f64 {
    w.iter().zip(s).map(|(a, b)| a * b.ln_1p()).sum()
}

struct ExitWatch {
    cfg: Option<EarlyExit>,
    prev_objective: Option<f64>,
    streak: usize,
}

impl ExitWatch {
    fn new(cfg: Option<EarlyExit>) -> Self {
        Self {
            cfg,
            prev_objective: None,
            streak: 0,
        }
    }

    fn should_stop(&mut self, objective: f64, gamma: f64) -> bool {
        let Some(cfg) = self.cfg else { return false };
        let calm = self
            .prev_objective
            .is_some_and(|p| (objective - p).abs() <= cfg.tol && (gamma - 1.0).max(0.0) <= cfg.tol);
        self.prev_objective = Some(objective);
        self.streak = if calm { self.streak + 1 } else { 0 };
        self.streak >= cfg.window
    }
}

fn run(family: &MaxLinearFamily, config: &SolverConfig, domain: Domain) -> Result<IterTrace> {
    let n = family.n();
    config.validate(n)?;
    let w = &config.weights;
    let b = config.box_bound;
    let mut x = config.initial_point.clone();
    let mut records = Vec::with_capacity(config.max_iter);
    let mut upper_box_hits = 0;
    let mut watch = ExitWatch::new(config.early_exit);

    for k in 1..=config.max_iter {
        let (x_hat, sg) = match domain {
            Domain::Rate => sp_step_rate(family, &x)?,
            _ => sp_step_sinr(family, &x)?,
        };
        let objective = match domain {
            Domain::Rate => rate_objective(w, &x),
            _ => sinr_objective(w, &x),
        };
        let gamma = sg.value;
        records.push(IterRecord {
            k,
            iterate: x.clone(),
            objective,
            gamma,
            feasible: gamma <= 1.0 + config.feasibility_tol,
            active: sg.active,
        });
        if watch.should_stop(objective, gamma) {
            break;
        }

        let x_tilde = box_project(&x_hat, b);
        if x_hat.iter().any(|v| *v >= b) {
            upper_box_hits += 1;
        }
        let mu = config.schedule.step(k);
        x = match domain {
            Domain::Rate => x_tilde.iter().zip(w).map(|(xi, wi)| xi + mu * wi).collect(),
            _ => {
                let g = grad_phi(&x_tilde, w)?;
                x_tilde.iter().zip(&g).map(|(xi, gi)| xi - mu * gi).collect()
            }
        };
    }

    let last = records.last().expect("at least one iteration");
    let (solution, solution_objective) = match domain {
        Domain::Rate => {
            let s = restore_feasible(&exp_map(&last.iterate), last.gamma);
            let r = log_map(&s);
            let obj = rate_objective(w, &r);
            (r, obj)
        }
        _ => {
            let s = restore_feasible(&last.iterate, last.gamma);
            let obj = sinr_objective(w, &s);
            (s, obj)
        }
    };
    Ok(IterTrace {
        domain,
        records,
        solution,
        solution_objective,
        upper_box_hits,
    })
}

/// Rate-domain solver for `max w^T r` over `{r >= 0 : rho_G(E(r)) <= 1}`.
pub fn solve_rate(family: &MaxLinearFamily, config: &SolverConfig) -> Result<IterTrace> {
    run(family, config, Domain::Rate)
}

/// SINR-domain solver for `max sum w_n log(1 + s_n)` over `{s >= 0 : rho_G(s) <= 1}`.
pub fn solve_sinr(family: &MaxLinearFamily, config: &SolverConfig) -> Result<IterTrace> {
    run(family, config, Domain::Sinr)
}
