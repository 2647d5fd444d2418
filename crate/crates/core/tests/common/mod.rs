//! Independent reference computations shared by the integration tests.
//!
//! Nothing here calls the power-iteration code paths under test: spectral
//! radii come from characteristic polynomials, derivatives from finite
//! differences.
#![allow(dead_code)]

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sumrate_hsd::{Matrix, MaxLinearFamily, PositiveMatrix};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_positive(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..n).map(|_| rng.random_range(lo..hi)).collect())
        .collect()
}

pub fn random_vec(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(lo..hi)).collect()
}

/// Random per-user-power family on `n` users.
pub fn random_family(rng: &mut ChaCha8Rng, n: usize) -> MaxLinearFamily {
    let m = Matrix::from_rows(&random_positive(rng, n, 0.01, 1.0)).unwrap();
    let u = random_vec(rng, n, 0.05, 1.0);
    let p_max = rng.random_range(0.5..5.0);
    MaxLinearFamily::per_user_power(&m, &u, p_max).unwrap()
}

/// Coefficients `c_0..c_n` of `det(lambda I - A) = sum c_k lambda^k`
/// by the Faddeev-LeVerrier recursion.
pub fn char_poly(a: &[Vec<f64>]) -> Vec<f64> {
    let n = a.len();
    let mul = |x: &[Vec<f64>], y: &[Vec<f64>]| -> Vec<Vec<f64>> {
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| (0..n).map(|k| x[i][k] * y[k][j]).sum())
                    .collect()
            })
            .collect()
    };
    let mut c = vec![0.0; n + 1];
    c[n] = 1.0;
    let mut mk = vec![vec![0.0; n]; n];
    for k in 1..=n {
        // M_k = A M_{k-1} + c_{n-k+1} I
        let mut next = mul(a, &mk);
        for (i, row) in next.iter_mut().enumerate() {
            row[i] += c[n - k + 1];
        }
        mk = next;
        let am = mul(a, &mk);
        let trace: f64 = (0..n).map(|i| am[i][i]).sum();
        c[n - k] = -trace / k as f64;
    }
    c
}

/// All roots of a monic polynomial by Durand-Kerner iteration.
pub fn poly_roots(c: &[f64]) -> Vec<Complex64> {
    let n = c.len() - 1;
    let eval = |z: Complex64| -> Complex64 {
        c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &ck| acc * z + ck)
    };
    let bound = 1.0 + c[..n].iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let seed = Complex64::new(0.4, 0.9);
    let mut z: Vec<Complex64> = (0..n).map(|k| seed.powu(k as u32) * bound).collect();
    for _ in 0..2000 {
        let mut moved = 0.0_f64;
        for i in 0..n {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..n {
                if i != j {
                    denom *= z[i] - z[j];
                }
            }
            let delta = eval(z[i]) / denom;
            z[i] -= delta;
            moved = moved.max(delta.norm() / z[i].norm().max(1e-300));
        }
        if moved < 1e-15 {
            break;
        }
    }
    // one Newton polish per root against the original polynomial
    let deriv: Vec<f64> = (1..=n).map(|k| c[k] * k as f64).collect();
    let eval_d = |z: Complex64| -> Complex64 {
        deriv.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &ck| acc * z + ck)
    };
    z.into_iter()
        .map(|r| {
            let d = eval_d(r);
            if d.norm() > 0.0 {
                r - eval(r) / d
            } else {
                r
            }
        })
        .collect()
}

/// Spectral radius as the largest root modulus of the characteristic polynomial.
pub fn oracle_radius(a: &[Vec<f64>]) -> f64 {
    poly_roots(&char_poly(a))
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

/// Closed-form spectral radius of a nonnegative 2x2 matrix.
pub fn radius_2x2(a: [[f64; 2]; 2]) -> f64 {
    let tr = a[0][0] + a[1][1];
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    0.5 * (tr + (tr * tr - 4.0 * det).max(0.0).sqrt())
}

/// `max_l rho(diag(e^r - 1) M_l)` for two users, without power iteration.
pub fn h_rate_2x2(members: &[[[f64; 2]; 2]], r: [f64; 2]) -> f64 {
    let d = [r[0].exp_m1(), r[1].exp_m1()];
    members
        .iter()
        .map(|m| {
            radius_2x2([
                [d[0] * m[0][0], d[0] * m[0][1]],
                [d[1] * m[1][0], d[1] * m[1][1]],
            ])
        })
        .fold(0.0, f64::max)
}

pub fn members_2x2(family: &MaxLinearFamily) -> Vec<[[f64; 2]; 2]> {
    family
        .members()
        .iter()
        .map(|m| {
            let m = m.matrix();
            [[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]]
        })
        .collect()
}

/// Largest `t` in `[0, hi]` with `f(t) <= 1`, for nondecreasing `f` with `f(0) <= 1`.
fn boundary(f: impl Fn(f64) -> f64, mut hi: f64) -> f64 {
    while f(hi) <= 1.0 {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if f(mid) <= 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Exhaustive search of `max w^T r` over the two-user rate region:
/// `r_1` on a grid of spacing `step`, `r_2` pushed to the region boundary.
pub fn grid_optimum_2user(members: &[[[f64; 2]; 2]], w: [f64; 2], step: f64) -> (f64, [f64; 2]) {
    let r1_max = boundary(|t| h_rate_2x2(members, [t, 0.0]), 1.0);
    let mut best = (f64::NEG_INFINITY, [0.0, 0.0]);
    let steps = (r1_max / step).floor() as usize;
    for i in 0..=steps {
        let r1 = i as f64 * step;
        let r2 = boundary(|t| h_rate_2x2(members, [r1, t]), 1.0);
        let v = w[0] * r1 + w[1] * r2;
        if v > best.0 {
            best = (v, [r1, r2]);
        }
    }
    best
}

/// Central-difference gradient with step `h`.
pub fn fd_gradient(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    (0..x.len())
        .map(|i| {
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[i] += h;
            xm[i] -= h;
            (f(&xp) - f(&xm)) / (2.0 * h)
        })
        .collect()
}

pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let diff = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let scale = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    diff / scale
}

pub fn positive(rows: &[Vec<f64>]) -> PositiveMatrix {
    PositiveMatrix::from_rows(rows).unwrap()
}
