//! Power recovery: from an optimal rate vector back to transmit powers.
//!
//! On the support `I = {n : r_n > 0}` the powers are the unique fixed point of
//! `q -> D (M_I q + u_I)` with `D = diag(e^{r_n} - 1)`; off the support they
//! are zero. At that fixed point `p_n / f_n(p) = e^{r_n} - 1`, so the
//! achieved rates reproduce `r` exactly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{inf_norm, Matrix};
use crate::specrad::MaxLinearFamily;

pub const SUPPORT_EPS: f64 = 1e-9;

/// Affine interference `f_n(p) = m_n^T p + u_n` with per-user budget `p_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct InterferenceModel {
    m: Matrix,
    u: Vec<f64>,
    p_max: f64,
}

impl InterferenceModel {
    pub fn new(m: Matrix, u: Vec<f64>, p_max: f64) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::NotSquare {
                rows: m.rows(),
                cols: m.cols(),
            });
        }
        let n = m.rows();
        if u.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: u.len(),
            });
        }
        for (index, &value) in m.as_slice().iter().enumerate() {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::NonPositiveEntry {
                    field: "M",
                    index,
                    value,
                });
            }
        }
        for (index, &value) in u.iter().enumerate() {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::NonPositiveEntry {
                    field: "u",
                    index,
                    value,
                });
            }
        }
        if !(p_max > 0.0 && p_max.is_finite()) {
            return Err(Error::InvalidParams(format!("p_max must be positive, got {p_max}")));
        }
        Ok(Self { m, u, p_max })
    }

    pub fn n(&self) -> usize {
        self.u.len()
    }

    pub fn m(&self) -> &Matrix {
        &self.m
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn p_max(&self) -> f64 {
        self.p_max
    }

    /// Family for the per-user budget `||p||_inf <= p_max`.
    pub fn family(&self) -> Result<MaxLinearFamily> {
        MaxLinearFamily::per_user_power(&self.m, &self.u, self.p_max)
    }

    /// `f(p) = M p + u`.
    pub fn interference(&self, p: &[f64]) -> Vec<f64> {
        self.m
            .mul_vec(p)
            .into_iter()
            .zip(&self.u)
            .map(|(mp, u)| mp + u)
            .collect()
    }

    pub fn sinr(&self, p: &[f64]) -> Vec<f64> {
        p.iter()
            .zip(self.interference(p))
            .map(|(pn, f)| pn / f)
            .collect()
    }
}

/// `(log(1 + p_n / f_n(p)))_n`.
pub fn achieved_rates(model: &InterferenceModel, p: &[f64]) -> Result<Vec<f64>> {
    if p.len() != model.n() {
        return Err(Error::DimensionMismatch {
            expected: model.n(),
            got: p.len(),
        });
    }
    if let Some((index, &value)) = p.iter().enumerate().find(|(_, v)| !(**v >= 0.0)) {
        return Err(Error::NegativeInput { index, value });
    }
    Ok(model.sinr(p).into_iter().map(f64::ln_1p).collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecoverOptions {
    /// Relative fixed-point residual `||T(q) - q||_inf / ||q||_inf` to reach.
    pub tol: f64,
    pub max_iter: usize,
    /// Rates at or below this count as zero.
    pub support_eps: f64,
    /// Accepted excess of `h(r*)` over 1.
    pub feasibility_tol: f64,
}

impl Default for RecoverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 100_000,
            support_eps: SUPPORT_EPS,
            feasibility_tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveredSolution {
    pub p_star: Vec<f64>,
    /// Zero-based indices with positive rate.
    pub support: Vec<usize>,
    pub residual: f64,
    pub achieved_rates: Vec<f64>,
    /// Unweighted sum of `achieved_rates`.
    pub sum_rate: f64,
    pub iterations: usize,
}

impl RecoveredSolution {
    pub fn weighted_sum_rate(&self, w: &[f64]) -> f64 {
        w.iter().zip(&self.achieved_rates).map(|(a, b)| a * b).sum()
    }
}

/// Fixed-point iteration `q <- D (M_I q + u_I)` on the support.
#[derive(Debug, Clone)]
pub struct PowerFixedPoint {
    m: Matrix,
    u: Vec<f64>,
    d: Vec<f64>,
    q: Vec<f64>,
}

impl PowerFixedPoint {
    pub fn new(model: &InterferenceModel, support: &[usize], d: Vec<f64>) -> Self {
        Self {
            m: model.m.principal_submatrix(support),
            u: support.iter().map(|&i| model.u[i]).collect(),
            q: vec![1.0; d.len()],
            d,
        }
    }

    fn map(&self, q: &[f64]) -> Vec<f64> {
        self.m
            .mul_vec(q)
            .iter()
            .zip(&self.u)
            .zip(&self.d)
            .map(|((mq, u), d)| d * (mq + u))
            .collect()
    }

    /// Applies one step and returns the relative residual of the new point.
    pub fn step(&mut self) -> f64 {
        self.q = self.map(&self.q);
        self.residual()
    }

    pub fn residual(&self) -> f64 {
        let t = self.map(&self.q);
        let diff = t
            .iter()
            .zip(&self.q)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        diff / inf_norm(&self.q)
    }

    pub fn point(&self) -> &[f64] {
        &self.q
    }
}

/// Transmit powers realizing the (feasible) rate vector `r_star`.
pub fn recover_power(
    model: &InterferenceModel,
    r_star: &[f64],
    opts: &RecoverOptions,
) -> Result<RecoveredSolution> {
    let n = model.n();
    if r_star.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: r_star.len(),
        });
    }
    if let Some((index, &value)) = r_star.iter().enumerate().find(|(_, v)| !(**v >= 0.0)) {
        return Err(Error::NegativeInput { index, value });
    }
    let value = model.family()?.h_rate(r_star)?;
    if value > 1.0 + opts.feasibility_tol {
        return Err(Error::Infeasible {
            value,
            tol: opts.feasibility_tol,
        });
    }

    let support: Vec<usize> = (0..n).filter(|&i| r_star[i] > opts.support_eps).collect();
    let mut p_star = vec![0.0; n];
    let mut residual = 0.0;
    let mut iterations = 0;
    if !support.is_empty() {
        let d = support.iter().map(|&i| r_star[i].exp_m1()).collect();
        let mut fp = PowerFixedPoint::new(model, &support, d);
        residual = fp.residual();
        while residual > opts.tol {
            if iterations >= opts.max_iter {
                return Err(Error::NonConvergence {
                    what: "power recovery fixed point",
                    iterations,
                    residual,
                });
            }
            residual = fp.step();
            iterations += 1;
        }
        for (&i, &q) in support.iter().zip(fp.point()) {
            p_star[i] = q;
        }
    }
    let rates = achieved_rates(model, &p_star)?;
    Ok(RecoveredSolution {
        sum_rate: rates.iter().sum(),
        achieved_rates: rates,
        p_star,
        support,
        residual,
        iterations,
    })
}
