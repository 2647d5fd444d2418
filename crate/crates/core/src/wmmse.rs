//! Scalar WMMSE baseline for `max sum w_n log(1 + p_n / f_n(p))`.
//!
//! With fixed beamformers every user sees a scalar channel, so receivers and
//! MSE weights are scalars. Writing `v_n = sqrt(p_n)` and
//! `T_n = p_n + f_n(p)`, one sweep is
//!
//! ```text
//! U_n = v_n / T_n
//! W_n = T_n / f_n(p)                        (= 1 + SINR_n)
//! v_n = clamp(w_n W_n U_n / sum_l w_l W_l U_l^2 (M + I)_ln, 0, sqrt(p_max))
//! ```
//!
//! Each block update is exact, so the objective never decreases. A user that
//! starts at zero power stays there.

use crate::error::{Error, Result};
use crate::hsd::{Domain, IterRecord, IterTrace};
use crate::recover::{achieved_rates, InterferenceModel};
use crate::specrad::argmax;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WmmseOptions {
    pub max_iter: usize,
    /// Stop once `max_n |p_n' - p_n| / p_max` falls to this level.
    pub tol: f64,
}

impl Default for WmmseOptions {
    fn default() -> Self {
        Self {
            max_iter: 10_000,
            tol: 1e-10,
        }
    }
}

/// Initial points used for comparison runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WmmseInit {
    /// `p_max * 1`.
    Full,
    /// `p_max * [1, 0, 1, 0, ...]`.
    Alternating,
}

impl WmmseInit {
    pub fn point(self, n: usize, p_max: f64) -> Vec<f64> {
        match self {
            WmmseInit::Full => vec![p_max; n],
            WmmseInit::Alternating => (0..n)
                .map(|i| if i % 2 == 0 { p_max } else { 0.0 })
                .collect(),
        }
    }
}

fn objective(model: &InterferenceModel, w: &[f64], p: &[f64]) -> Result<f64> {
    Ok(achieved_rates(model, p)?
        .iter()
        .zip(w)
        .map(|(r, wn)| r * wn)
        .sum())
}

fn sweep(model: &InterferenceModel, w: &[f64], p: &[f64]) -> Vec<f64> {
    let n = model.n();
    let p_max = model.p_max();
    let f = model.interference(p);
    let t: Vec<f64> = p.iter().zip(&f).map(|(pn, fn_)| pn + fn_).collect();
    let recv: Vec<f64> = p.iter().zip(&t).map(|(pn, tn)| pn.sqrt() / tn).collect();
    let weight: Vec<f64> = t.iter().zip(&f).map(|(tn, fn_)| tn / fn_).collect();
    let m = model.m();
    (0..n)
        .map(|j| {
            let denom: f64 = (0..n)
                .map(|l| {
                    let coupling = m[(l, j)] + if l == j { 1.0 } else { 0.0 };
                    w[l] * weight[l] * recv[l] * recv[l] * coupling
                })
                .sum();
            let v = if denom > 0.0 {
                (w[j] * weight[j] * recv[j] / denom).clamp(0.0, p_max.sqrt())
            } else {
                0.0
            };
            (v * v).min(p_max)
        })
        .collect()
}

fn record(model: &InterferenceModel, w: &[f64], k: usize, p: &[f64]) -> Result<IterRecord> {
    let scaled: Vec<f64> = p.iter().map(|x| x / model.p_max()).collect();
    let (active, gamma) = argmax(&scaled);
    Ok(IterRecord {
        k,
        iterate: p.to_vec(),
        objective: objective(model, w, p)?,
        gamma,
        feasible: gamma <= 1.0,
        active,
    })
}

/// Runs WMMSE from `p_init`; `gamma` in the trace is `max_n p_n / p_max`.
pub fn wmmse_solve(
    model: &InterferenceModel,
    w: &[f64],
    p_init: &[f64],
    opts: &WmmseOptions,
) -> Result<IterTrace> {
    let n = model.n();
    for v in [w, p_init] {
        if v.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: v.len(),
            });
        }
    }
    if let Some(x) = w.iter().find(|x| !(**x > 0.0 && x.is_finite())) {
        return Err(Error::InvalidParams(format!("weights must be positive, found {x}")));
    }
    if let Some(x) = p_init.iter().find(|x| !(**x >= 0.0 && **x <= model.p_max())) {
        return Err(Error::InvalidInit(format!(
            "entry {x} outside [0, {}]",
            model.p_max()
        )));
    }
    if opts.max_iter == 0 {
        return Err(Error::InvalidConfig("max_iter must be at least 1".into()));
    }

    let mut p = p_init.to_vec();
    let mut records = vec![record(model, w, 1, &p)?];
    for k in 2..=opts.max_iter {
        let next = sweep(model, w, &p);
        let change = next
            .iter()
            .zip(&p)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
            / model.p_max();
        p = next;
        records.push(record(model, w, k, &p)?);
        if change <= opts.tol {
            break;
        }
    }
    let solution_objective = records.last().expect("non-empty").objective;
    Ok(IterTrace {
        domain: Domain::Power,
        records,
        solution: p,
        solution_objective,
        upper_box_hits: 0,
    })
}
