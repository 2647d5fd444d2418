//! Convexity diagnostics for the members of a max-of-linear family.
//!
//! The inverse-Z test is a sufficient condition for convexity of
//! `r -> rho(diag(e^r - 1) M_l)`. The sampled midpoint checks are necessary
//! conditions only: zero violations does not prove convexity.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::perron::{is_inverse_z, INVERSE_Z_TOL};
use crate::scenario::UatFProblem;
use crate::specrad::{exp_map, MaxLinearFamily};

/// Absolute slack in the rate-domain check, to absorb Perron round-off.
pub const RATE_CHECK_SLACK: f64 = 1e-12;
pub const DEFAULT_SINR_EPS: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleParams {
    pub n_pairs: usize,
    pub box_hi: f64,
    pub n_alpha: usize,
    /// Slack added to the right-hand side of each inequality.
    pub eps: f64,
    pub seed: u64,
}

impl SampleParams {
    /// 10 000 pairs from `[0, 5]^N`, 99 values of alpha in `[0.01, 0.99]`.
    pub fn rate_defaults(seed: u64) -> Self {
        Self {
            n_pairs: 10_000,
            box_hi: 5.0,
            n_alpha: 99,
            eps: RATE_CHECK_SLACK,
            seed,
        }
    }

    pub fn sinr_defaults(seed: u64) -> Self {
        Self {
            eps: DEFAULT_SINR_EPS,
            ..Self::rate_defaults(seed)
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_pairs == 0 || self.n_alpha == 0 {
            return Err(Error::InvalidParams("n_pairs and n_alpha must be at least 1".into()));
        }
        if !(self.box_hi > 0.0 && self.box_hi.is_finite()) {
            return Err(Error::InvalidParams(format!("box_hi must be positive, got {}", self.box_hi)));
        }
        if self.eps.is_nan() {
            return Err(Error::InvalidParams("eps is NaN".into()));
        }
        Ok(())
    }

    /// `n_alpha` points spaced evenly over `[0.01, 0.99]`.
    pub fn alphas(&self) -> Vec<f64> {
        if self.n_alpha == 1 {
            return vec![0.5];
        }
        let step = 0.98 / (self.n_alpha - 1) as f64;
        (0..self.n_alpha).map(|i| 0.01 + step * i as f64).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckDomain {
    Rate,
    Sinr,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportParams {
    pub domain: CheckDomain,
    #[serde(flatten)]
    pub sample: SampleParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexityReport {
    pub violations: usize,
    pub total_checks: usize,
    /// Largest `lhs - rhs` seen (before slack), floored at 0.
    pub worst_gap: f64,
    pub params: ReportParams,
}

fn run_check(
    family: &MaxLinearFamily,
    params: &SampleParams,
    domain: CheckDomain,
) -> Result<ConvexityReport> {
    params.validate()?;
    let n = family.n();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let pairs: Vec<(Vec<f64>, Vec<f64>)> = (0..params.n_pairs)
        .map(|_| {
            let mut draw = || -> Vec<f64> {
                (0..n).map(|_| rng.random::<f64>() * params.box_hi).collect()
            };
            let a = draw();
            (a, draw())
        })
        .collect();
    let alphas = params.alphas();
    let lift = |x: &[f64]| match domain {
        CheckDomain::Rate => exp_map(x),
        CheckDomain::Sinr => x.to_vec(),
    };

    let per_pair: Vec<Result<(usize, usize, f64)>> = pairs
        .par_iter()
        .map(|(x1, x2)| {
            let mut violations = 0;
            let mut checks = 0;
            let mut worst = 0.0_f64;
            for l in 0..family.len() {
                let f1 = family.member_radius(l, &lift(x1))?;
                let f2 = family.member_radius(l, &lift(x2))?;
                for &a in &alphas {
                    let mid: Vec<f64> = x1.iter().zip(x2).map(|(p, q)| a * p + (1.0 - a) * q).collect();
                    let lhs = family.member_radius(l, &lift(&mid))?;
                    let gap = lhs - (a * f1 + (1.0 - a) * f2);
                    worst = worst.max(gap);
                    checks += 1;
                    if gap > params.eps {
                        violations += 1;
                    }
                }
            }
            Ok((violations, checks, worst))
        })
        .collect();

    let mut report = ConvexityReport {
        violations: 0,
        total_checks: 0,
        worst_gap: 0.0,
        params: ReportParams {
            domain,
            sample: *params,
        },
    };
    for r in per_pair {
        let (v, c, w) = r?;
        report.violations += v;
        report.total_checks += c;
        report.worst_gap = report.worst_gap.max(w);
    }
    Ok(report)
}

/// Midpoint convexity of `r -> rho(diag(e^r - 1) M_l)` for every member.
pub fn check_rate_convexity_samples(
    family: &MaxLinearFamily,
    params: &SampleParams,
) -> Result<ConvexityReport> {
    run_check(family, params, CheckDomain::Rate)
}

/// Midpoint convexity of `s -> rho(diag(s) M_l)` for every member.
pub fn check_sinr_convexity_samples(
    family: &MaxLinearFamily,
    params: &SampleParams,
) -> Result<ConvexityReport> {
    run_check(family, params, CheckDomain::Sinr)
}

/// True when every member is an inverse Z-matrix. Singular members count as failures.
pub fn all_members_inverse_z(family: &MaxLinearFamily) -> bool {
    family
        .members()
        .iter()
        .all(|m| matches!(is_inverse_z(m, INVERSE_Z_TOL), Ok(true)))
}

/// Fraction of instances whose family is entirely inverse-Z.
pub fn inverse_z_fraction(problems: &[UatFProblem]) -> Result<f64> {
    if problems.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let mut hits = 0;
    for p in problems {
        if all_members_inverse_z(&p.family()?) {
            hits += 1;
        }
    }
    Ok(hits as f64 / problems.len() as f64)
}
