//! Nonlinear spectral radius of the max-of-linear mapping
//! `G(x) = M x + u max_l a_l^T x`, its composition with the exponential map,
//! and subgradients of both.
//!
//! For this family `rho_G(x) = max_l rho(diag(x) M_l)` with
//! `M_l = M + u a_l^T`, so every evaluation reduces to linear Perron problems.

use crate::error::{Error, Result};
use crate::matrix::{dot, inf_norm, Matrix};
use crate::perron::{self, PositiveMatrix, DEFAULT_MAX_ITER, DEFAULT_TOL};

/// `r -> (e^{r_n} - 1)_n`.
pub fn exp_map(r: &[f64]) -> Vec<f64> {
    r.iter().map(|x| x.exp_m1()).collect()
}

/// Inverse of [`exp_map`] on the nonnegative orthant: `s -> log(1 + s)`.
pub fn log_map(s: &[f64]) -> Vec<f64> {
    s.iter().map(|x| x.ln_1p()).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaxLinearFamily {
    members: Vec<PositiveMatrix>,
    tol: f64,
    max_iter: usize,
}

/// Function value, maximizing member and the gradient of that member.
#[derive(Debug, Clone, PartialEq)]
pub struct SubgradResult {
    pub value: f64,
    /// Zero-based index of the active member (smallest among ties).
    pub active: usize,
    pub gradient: Vec<f64>,
}

impl MaxLinearFamily {
    pub fn new(members: Vec<PositiveMatrix>) -> Result<Self> {
        let n = members
            .first()
            .ok_or_else(|| Error::InvalidParams("family needs at least one member".into()))?
            .n();
        if let Some(bad) = members.iter().find(|m| m.n() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: bad.n(),
            });
        }
        Ok(Self {
            members,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
        })
    }

    /// Members `M + u a_l^T` for the polyhedral norm `||x|| = max_l a_l^T |x|`.
    pub fn build(m: &Matrix, u: &[f64], generators: &[Vec<f64>]) -> Result<Self> {
        let m = PositiveMatrix::new(m.clone())?;
        let n = m.n();
        if u.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: u.len(),
            });
        }
        if let Some((index, &value)) = u.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
            return Err(Error::NonPositiveInput { index, value });
        }
        if generators.is_empty() {
            return Err(Error::InvalidParams("at least one norm generator is required".into()));
        }
        let mut members = Vec::with_capacity(generators.len());
        for a in generators {
            if a.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: a.len(),
                });
            }
            if let Some((index, &value)) = a.iter().enumerate().find(|(_, v)| **v < 0.0) {
                return Err(Error::NegativeInput { index, value });
            }
            if a.iter().all(|v| *v == 0.0) {
                return Err(Error::InvalidParams("norm generator must be nonzero".into()));
            }
            let mut ml = m.matrix().clone();
            for i in 0..n {
                for j in 0..n {
                    ml[(i, j)] += u[i] * a[j];
                }
            }
            members.push(PositiveMatrix::new(ml)?);
        }
        Self::new(members)
    }

    /// Per-user power budget: generators `a_l = e_l / p_max`.
    pub fn per_user_power(m: &Matrix, u: &[f64], p_max: f64) -> Result<Self> {
        if !(p_max > 0.0 && p_max.is_finite()) {
            return Err(Error::InvalidParams(format!("p_max must be positive, got {p_max}")));
        }
        let n = m.rows();
        let generators: Vec<Vec<f64>> = (0..n)
            .map(|l| {
                let mut a = vec![0.0; n];
                a[l] = 1.0 / p_max;
                a
            })
            .collect();
        Self::build(m, u, &generators)
    }

    /// Overrides the Perron tolerance and iteration budget used internally.
    pub fn with_tolerance(mut self, tol: f64, max_iter: usize) -> Self {
        self.tol = tol;
        self.max_iter = max_iter;
        self
    }

    pub fn n(&self) -> usize {
        self.members[0].n()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[PositiveMatrix] {
        &self.members
    }

    fn check_len(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                got: x.len(),
            });
        }
        Ok(())
    }

    fn check_nonneg(&self, x: &[f64]) -> Result<()> {
        self.check_len(x)?;
        match x.iter().enumerate().find(|(_, v)| !(**v >= 0.0)) {
            Some((index, &value)) => Err(Error::NegativeInput { index, value }),
            None => Ok(()),
        }
    }

    fn check_positive(&self, x: &[f64]) -> Result<()> {
        self.check_len(x)?;
        match x.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
            Some((index, &value)) => Err(Error::NonPositiveInput { index, value }),
            None => Ok(()),
        }
    }

    /// `rho(diag(x) M_l)` for `x >= 0`.
    ///
    /// Zero coordinates of `x` zero out rows of `diag(x) M_l`; those rows carry
    /// no cycles, so the radius equals that of the principal submatrix on the
    /// support of `x`, which is again strictly positive.
    pub fn member_radius(&self, l: usize, x: &[f64]) -> Result<f64> {
        self.check_nonneg(x)?;
        let support: Vec<usize> = (0..x.len()).filter(|&i| x[i] > 0.0).collect();
        let m = self.members[l].matrix();
        let a = if support.len() == x.len() {
            m.scale_rows(x)
        } else if support.is_empty() {
            return Ok(0.0);
        } else {
            let xs: Vec<f64> = support.iter().map(|&i| x[i]).collect();
            m.principal_submatrix(&support).scale_rows(&xs)
        };
        perron::radius_of_positive(&a, self.tol, self.max_iter)
    }

    /// Per-member radii at `x >= 0`.
    pub fn member_radii(&self, x: &[f64]) -> Result<Vec<f64>> {
        (0..self.len()).map(|l| self.member_radius(l, x)).collect()
    }

    /// `rho_G(x) = max_l rho(diag(x) M_l)`.
    pub fn rho_g(&self, x: &[f64]) -> Result<f64> {
        Ok(argmax(&self.member_radii(x)?).1)
    }

    /// Convex extension `(rho_G o E o P_+)(r)`, defined on all of R^N.
    pub fn h_rate(&self, r: &[f64]) -> Result<f64> {
        self.check_len(r)?;
        let x: Vec<f64> = r.iter().map(|v| v.max(0.0).exp_m1()).collect();
        self.rho_g(&x)
    }

    /// Gradient of the active member of `rho_G` at `x > 0`.
    fn active_gradient(&self, x: &[f64]) -> Result<SubgradResult> {
        let radii = self.member_radii(x)?;
        let (active, value) = argmax(&radii);
        let m = self.members[active].matrix();
        let pair = perron::perron_pair(
            &PositiveMatrix::new(m.scale_rows(x))?,
            self.tol,
            self.max_iter,
        )?;
        let m_xi = m.mul_vec(&pair.right);
        let denom = dot(&pair.left, &pair.right);
        let gradient = pair
            .left
            .iter()
            .zip(&m_xi)
            .map(|(eta, mx)| eta * mx / denom)
            .collect();
        Ok(SubgradResult {
            value,
            active,
            gradient,
        })
    }

    /// Value and subgradient of the rate-domain constraint function at `r > 0`:
    /// `diag(e^r) diag(eta) M_l* xi / (eta^T xi)`.
    pub fn subgrad_rate(&self, r: &[f64]) -> Result<SubgradResult> {
        self.check_positive(r)?;
        let mut res = self.active_gradient(&exp_map(r))?;
        for (g, rn) in res.gradient.iter_mut().zip(r) {
            *g *= rn.exp();
        }
        Ok(res)
    }

    /// Value and subgradient of the SINR-domain gauge at `s > 0`:
    /// `diag(eta) M_l* xi / (eta^T xi)`.
    pub fn subgrad_sinr(&self, s: &[f64]) -> Result<SubgradResult> {
        self.check_positive(s)?;
        self.active_gradient(s)
    }

    /// `G(p)` evaluated as the entrywise maximum over members of `M_l p`.
    ///
    /// Since every `M_l` shares `M` and differs only by `u a_l^T` with `u > 0`,
    /// the maximizing member is the same in every row.
    pub fn apply(&self, p: &[f64]) -> Vec<f64> {
        let mut out = vec![f64::NEG_INFINITY; self.n()];
        for m in &self.members {
            for (o, v) in out.iter_mut().zip(m.matrix().mul_vec(p)) {
                *o = o.max(v);
            }
        }
        out
    }

    /// Spectral radius of the nonlinear map `p -> diag(x) G(p)` by normalized
    /// nonlinear power iteration, with the same Collatz-Wielandt bracket used
    /// for linear maps. Independent of the max-of-radii route in [`Self::rho_g`].
    pub fn nonlinear_radius_oracle(&self, x: &[f64], tol: f64, max_iter: usize) -> Result<f64> {
        self.check_positive(x)?;
        let mut p = vec![1.0; self.n()];
        let mut gap = f64::INFINITY;
        for _ in 0..max_iter.max(1) {
            let y: Vec<f64> = self.apply(&p).iter().zip(x).map(|(g, xi)| g * xi).collect();
            let (mut lo, mut hi) = (f64::INFINITY, 0.0_f64);
            for (yi, pi) in y.iter().zip(&p) {
                lo = lo.min(yi / pi);
                hi = hi.max(yi / pi);
            }
            gap = (hi - lo) / hi;
            if gap <= tol {
                return Ok(0.5 * (lo + hi));
            }
            let norm = inf_norm(&y);
            p = y.into_iter().map(|v| v / norm).collect();
        }
        Err(Error::NonConvergence {
            what: "nonlinear power iteration",
            iterations: max_iter,
            residual: gap,
        })
    }
}

/// Smallest index attaining the maximum.
pub(crate) fn argmax(values: &[f64]) -> (usize, f64) {
    let mut best = (0, values[0]);
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > best.1 {
            best = (i, v);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_family(c: f64) -> MaxLinearFamily {
        MaxLinearFamily::new(vec![PositiveMatrix::from_rows(&[[c]]).unwrap()]).unwrap()
    }

    fn two_user() -> MaxLinearFamily {
        let m = Matrix::from_rows(&[[1.0, 1.0], [1.0, 1.0]]).unwrap();
        MaxLinearFamily::per_user_power(&m, &[1.0, 1.0], 1.0).unwrap()
    }

    #[test]
    fn build_scalar() {
        let m = Matrix::from_rows(&[[1.0]]).unwrap();
        let f = MaxLinearFamily::build(&m, &[1.0], &[vec![1.0]]).unwrap();
        assert_eq!(f.members()[0].matrix().to_rows(), vec![vec![2.0]]);
    }

    #[test]
    fn build_per_user_power() {
        let f = two_user();
        assert_eq!(f.len(), 2);
        assert_eq!(f.members()[0].matrix().to_rows(), vec![vec![2.0, 1.0], vec![2.0, 1.0]]);
        assert_eq!(f.members()[1].matrix().to_rows(), vec![vec![1.0, 2.0], vec![1.0, 2.0]]);
    }

    #[test]
    fn build_rejects_bad_inputs() {
        let m = Matrix::from_rows(&[[1.0, 1.0], [1.0, 1.0]]).unwrap();
        assert!(matches!(
            MaxLinearFamily::build(&m, &[1.0], &[vec![1.0, 0.0]]),
            Err(Error::DimensionMismatch { expected: 2, got: 1 })
        ));
        assert!(MaxLinearFamily::build(&m, &[1.0, 1.0], &[vec![0.0, 0.0]]).is_err());
        assert!(MaxLinearFamily::build(&m, &[1.0, 1.0], &[vec![-1.0, 1.0]]).is_err());
        assert!(MaxLinearFamily::build(&m, &[1.0, 0.0], &[vec![1.0, 1.0]]).is_err());
    }

    #[test]
    fn rho_g_examples() {
        let f = scalar_family(2.0);
        assert_eq!(f.rho_g(&[0.0]).unwrap(), 0.0);
        assert_eq!(f.rho_g(&[0.5]).unwrap(), 1.0);
        let sym = MaxLinearFamily::new(vec![PositiveMatrix::from_rows(&[[2.0, 1.0], [1.0, 2.0]]).unwrap()])
            .unwrap();
        assert!((sym.rho_g(&[1.0, 1.0]).unwrap() - 3.0).abs() < 1e-11);
        assert!(matches!(sym.rho_g(&[1.0, -0.1]), Err(Error::NegativeInput { index: 1, .. })));
    }

    #[test]
    fn rho_g_partial_support_uses_submatrix() {
        let f = MaxLinearFamily::new(vec![PositiveMatrix::from_rows(&[[2.0, 5.0], [7.0, 3.0]]).unwrap()])
            .unwrap();
        // diag([0, 2]) M has eigenvalues 0 and 6.
        assert!((f.rho_g(&[0.0, 2.0]).unwrap() - 6.0).abs() < 1e-12);
        // continuity from the positive side
        let near = f.rho_g(&[1e-9, 2.0]).unwrap();
        assert!((near - 6.0).abs() < 1e-6);
    }

    #[test]
    fn h_rate_examples() {
        let f = scalar_family(2.0);
        assert_eq!(f.h_rate(&[0.0]).unwrap(), 0.0);
        assert!((f.h_rate(&[1.5_f64.ln()]).unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(f.h_rate(&[-3.0]).unwrap(), 0.0);
    }

    #[test]
    fn scalar_subgradients() {
        let f = scalar_family(2.0);
        let t = 0.7_f64;
        let g = f.subgrad_rate(&[t]).unwrap();
        assert!((g.value - 2.0 * t.exp_m1()).abs() < 1e-14);
        assert!((g.gradient[0] - 2.0 * t.exp()).abs() < 1e-13);
        let g = f.subgrad_sinr(&[t]).unwrap();
        assert!((g.value - 2.0 * t).abs() < 1e-15);
        assert!((g.gradient[0] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn subgrad_rejects_non_positive() {
        let f = two_user();
        assert!(matches!(f.subgrad_rate(&[0.5, 0.0]), Err(Error::NonPositiveInput { index: 1, .. })));
        assert!(matches!(f.subgrad_sinr(&[-1.0, 1.0]), Err(Error::NonPositiveInput { index: 0, .. })));
    }

    #[test]
    fn two_user_value_is_max_of_member_radii() {
        let f = two_user();
        let r = [0.5, 0.5];
        let g = f.subgrad_rate(&r).unwrap();
        let x = exp_map(&r);
        // independent recomputation: each member is rank one with rows equal,
        // so rho(diag(x) M_l) = trace(diag(x) M_l)
        let m1 = 2.0 * x[0] + 1.0 * x[1];
        let m2 = 1.0 * x[0] + 2.0 * x[1];
        assert!((g.value - m1.max(m2)).abs() < 1e-12);
        assert_eq!(g.active, 0);
    }

    #[test]
    fn oracle_scalar_and_single_member() {
        let f = scalar_family(2.0);
        assert_eq!(f.nonlinear_radius_oracle(&[0.3], 1e-13, 1000).unwrap(), f.rho_g(&[0.3]).unwrap());
        let single = MaxLinearFamily::new(vec![PositiveMatrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap()])
            .unwrap();
        let x = [0.4, 1.7];
        let lin = perron::spectral_radius(
            &PositiveMatrix::from_rows(&[[0.4, 0.8], [5.1, 6.8]]).unwrap(),
            1e-13,
            10_000,
        )
        .unwrap();
        let orc = single.nonlinear_radius_oracle(&x, 1e-13, 10_000).unwrap();
        assert!((orc - lin).abs() / lin < 1e-8);
    }

    #[test]
    fn argmax_breaks_ties_low() {
        assert_eq!(argmax(&[1.0, 3.0, 3.0, 2.0]), (1, 3.0));
    }
}
