//! Synthetic cell-less uplink scenarios and the use-and-then-forget
//! interference model built from them.
//!
//! Channel model: large-scale gain `g = max(d, 1 m)^-3.67`, i.i.d. unit
//! circular Gaussian fading per antenna, perfect CSI at the receiver. Receive
//! beamformers are the channel samples masked to the serving access points.
//! Noise power is normalized to 1, so `p_max` is in noise units.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::recover::InterferenceModel;
use crate::specrad::MaxLinearFamily;

pub const PATH_LOSS_EXPONENT: f64 = 3.67;
pub const MIN_DISTANCE_M: f64 = 1.0;
/// Mixed into the scenario seed to derive the fading seed.
pub const CHANNEL_SEED_MIX: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkLayout {
    pub ap_positions: Vec<[f64; 2]>,
    pub user_positions: Vec<[f64; 2]>,
    pub antennas_per_ap: usize,
    pub side_m: f64,
    /// Serving APs per user, sorted by index.
    pub association: Vec<Vec<usize>>,
    pub rng_seed: u64,
}

impl NetworkLayout {
    pub fn n_users(&self) -> usize {
        self.user_positions.len()
    }

    pub fn n_aps(&self) -> usize {
        self.ap_positions.len()
    }

    /// Length of an aggregated channel vector, `K1 * K2`.
    pub fn dim(&self) -> usize {
        self.n_aps() * self.antennas_per_ap
    }

    pub fn gain(&self, user: usize, ap: usize) -> f64 {
        let [ux, uy] = self.user_positions[user];
        let [ax, ay] = self.ap_positions[ap];
        let d = (ux - ax).hypot(uy - ay).max(MIN_DISTANCE_M);
        d.powf(-PATH_LOSS_EXPONENT)
    }

    fn serves(&self, user: usize, coord: usize) -> bool {
        self.association[user].contains(&(coord / self.antennas_per_ap))
    }
}

pub fn generate_layout(
    n_users: usize,
    k1_aps: usize,
    k2_antennas: usize,
    side_m: f64,
    serve_count: usize,
    seed: u64,
) -> Result<NetworkLayout> {
    if n_users == 0 || k1_aps == 0 || k2_antennas == 0 || serve_count == 0 {
        return Err(Error::InvalidParams("all counts must be at least 1".into()));
    }
    if serve_count > k1_aps {
        return Err(Error::InvalidParams(format!(
            "serve count {serve_count} exceeds the number of APs {k1_aps}"
        )));
    }
    if !(side_m > 0.0 && side_m.is_finite()) {
        return Err(Error::InvalidParams(format!("side must be positive, got {side_m}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut point = || [rng.random::<f64>() * side_m, rng.random::<f64>() * side_m];
    let ap_positions: Vec<_> = (0..k1_aps).map(|_| point()).collect();
    let user_positions: Vec<_> = (0..n_users).map(|_| point()).collect();
    let mut layout = NetworkLayout {
        ap_positions,
        user_positions,
        antennas_per_ap: k2_antennas,
        side_m,
        association: Vec::new(),
        rng_seed: seed,
    };
    layout.association = (0..n_users)
        .map(|n| {
            let mut aps: Vec<usize> = (0..k1_aps).collect();
            aps.sort_by(|&a, &b| layout.gain(n, b).total_cmp(&layout.gain(n, a)));
            let mut chosen = aps[..serve_count].to_vec();
            chosen.sort_unstable();
            chosen
        })
        .collect();
    Ok(layout)
}

/// `samples[n][s]` is the aggregated channel of user `n` in draw `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSampleSet {
    samples: Vec<Vec<Vec<Complex64>>>,
}

impl ChannelSampleSet {
    pub fn from_samples(samples: Vec<Vec<Vec<Complex64>>>) -> Result<Self> {
        let s = samples.first().map_or(0, Vec::len);
        if s < 2 {
            return Err(Error::InvalidParams(format!(
                "need at least 2 samples per user, got {s}"
            )));
        }
        let dim = samples[0][0].len();
        for user in &samples {
            if user.len() != s {
                return Err(Error::DimensionMismatch {
                    expected: s,
                    got: user.len(),
                });
            }
            if let Some(h) = user.iter().find(|h| h.len() != dim) {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: h.len(),
                });
            }
        }
        Ok(Self { samples })
    }

    pub fn n_samples(&self) -> usize {
        self.samples[0].len()
    }

    pub fn n_users(&self) -> usize {
        self.samples.len()
    }

    pub fn user(&self, n: usize) -> &[Vec<Complex64>] {
        &self.samples[n]
    }

    /// Same draws with every channel multiplied by `alpha`.
    pub fn scaled(&self, alpha: f64) -> Self {
        Self {
            samples: self
                .samples
                .iter()
                .map(|u| u.iter().map(|h| h.iter().map(|x| x * alpha).collect()).collect())
                .collect(),
        }
    }
}

pub fn sample_channels(layout: &NetworkLayout, n_samples: usize, seed: u64) -> Result<ChannelSampleSet> {
    if n_samples < 2 {
        return Err(Error::InvalidParams(format!(
            "need at least 2 samples, got {n_samples}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k2 = layout.antennas_per_ap;
    let samples = (0..layout.n_users())
        .map(|n| {
            let amp: Vec<f64> = (0..layout.n_aps())
                .map(|k| (layout.gain(n, k) / 2.0).sqrt())
                .collect();
            (0..n_samples)
                .map(|_| {
                    (0..layout.dim())
                        .map(|i| {
                            let re: f64 = rng.sample(StandardNormal);
                            let im: f64 = rng.sample(StandardNormal);
                            Complex64::new(re, im) * amp[i / k2]
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    ChannelSampleSet::from_samples(samples)
}

/// `a^H b`.
fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Positive instance `max sum w_n log(1 + p_n / (m_n^T p + u_n))`, `||p||_inf <= p_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct UatFProblem {
    m: Matrix,
    u: Vec<f64>,
    w: Vec<f64>,
    p_max: f64,
}

#[derive(Serialize, Deserialize)]
struct ProblemFile {
    n: usize,
    #[serde(rename = "M")]
    m: Vec<Vec<f64>>,
    u: Vec<f64>,
    w: Vec<f64>,
    p_max: f64,
}

impl UatFProblem {
    pub fn new(m: Matrix, u: Vec<f64>, w: Vec<f64>, p_max: f64) -> Result<Self> {
        InterferenceModel::new(m.clone(), u.clone(), p_max)?;
        if w.len() != u.len() {
            return Err(Error::DimensionMismatch {
                expected: u.len(),
                got: w.len(),
            });
        }
        for (index, &value) in w.iter().enumerate() {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::NonPositiveEntry {
                    field: "w",
                    index,
                    value,
                });
            }
        }
        Ok(Self { m, u, w, p_max })
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

    pub fn w(&self) -> &[f64] {
        &self.w
    }

    pub fn p_max(&self) -> f64 {
        self.p_max
    }

    pub fn family(&self) -> Result<MaxLinearFamily> {
        MaxLinearFamily::per_user_power(&self.m, &self.u, self.p_max)
    }

    pub fn interference_model(&self) -> InterferenceModel {
        InterferenceModel::new(self.m.clone(), self.u.clone(), self.p_max)
            .expect("validated on construction")
    }

    pub fn to_json(&self) -> Result<String> {
        let file = ProblemFile {
            n: self.n(),
            m: self.m.to_rows(),
            u: self.u.clone(),
            w: self.w.clone(),
            p_max: self.p_max,
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ProblemFile =
            serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
        if file.m.len() != file.n {
            return Err(Error::Schema(format!(
                "M has {} rows but n = {}",
                file.m.len(),
                file.n
            )));
        }
        if let Some(row) = file.m.iter().find(|r| r.len() != file.n) {
            return Err(Error::Schema(format!(
                "M row has {} entries but n = {}",
                row.len(),
                file.n
            )));
        }
        if file.u.len() != file.n || file.w.len() != file.n {
            return Err(Error::Schema(format!(
                "u and w must have n = {} entries",
                file.n
            )));
        }
        Self::new(Matrix::from_rows(&file.m)?, file.u, file.w, file.p_max)
    }
}

pub fn build_uatf_problem(
    layout: &NetworkLayout,
    channels: &ChannelSampleSet,
    p_max: f64,
    w: Vec<f64>,
) -> Result<UatFProblem> {
    let n = layout.n_users();
    if channels.n_users() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: channels.n_users(),
        });
    }
    let s = channels.n_samples() as f64;
    let mut m = Matrix::zeros(n, n);
    let mut u = vec![0.0; n];
    for user in 0..n {
        let beams: Vec<Vec<Complex64>> = channels
            .user(user)
            .iter()
            .map(|h| {
                h.iter()
                    .enumerate()
                    .map(|(i, x)| if layout.serves(user, i) { *x } else { Complex64::ZERO })
                    .collect()
            })
            .collect();
        let own: Vec<Complex64> = channels
            .user(user)
            .iter()
            .zip(&beams)
            .map(|(h, v)| inner(h, v))
            .collect();
        let mean = own.iter().sum::<Complex64>() / s;
        let signal = mean.norm_sqr();
        if !(signal > 0.0) {
            return Err(Error::DegenerateChannel { user });
        }
        for other in 0..n {
            let c = if other == user {
                own.iter().map(|x| (x - mean).norm_sqr()).sum::<f64>() / s
            } else {
                channels
                    .user(other)
                    .iter()
                    .zip(&beams)
                    .map(|(h, v)| inner(h, v).norm_sqr())
                    .sum::<f64>()
                    / s
            };
            m[(user, other)] = c / signal;
        }
        u[user] = beams
            .iter()
            .map(|v| v.iter().map(Complex64::norm_sqr).sum::<f64>())
            .sum::<f64>()
            / s
            / signal;
    }
    UatFProblem::new(m, u, w, p_max)
}

pub fn save_problem(problem: &UatFProblem, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, problem.to_json()?)?;
    Ok(())
}

pub fn load_problem(path: impl AsRef<Path>) -> Result<UatFProblem> {
    UatFProblem::from_json(&fs::read_to_string(path)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioParams {
    pub users: usize,
    pub aps: usize,
    pub antennas: usize,
    pub side_m: f64,
    pub serve: usize,
    pub samples: usize,
    pub p_max: f64,
}

impl Default for ScenarioParams {
    /// Three single-antenna users, four 2-antenna APs in a 100 m square,
    /// two serving APs per user, 100 fading samples, `p_max = 1e8` noise units.
    fn default() -> Self {
        Self {
            users: 3,
            aps: 4,
            antennas: 2,
            side_m: 100.0,
            serve: 2,
            samples: 100,
            p_max: 1e8,
        }
    }
}

/// Layout from `seed`, fading from `seed ^ CHANNEL_SEED_MIX`, unit weights.
pub fn generate_problem(params: &ScenarioParams, seed: u64) -> Result<UatFProblem> {
    let layout = generate_layout(
        params.users,
        params.aps,
        params.antennas,
        params.side_m,
        params.serve,
        seed,
    )?;
    let channels = sample_channels(&layout, params.samples, seed ^ CHANNEL_SEED_MIX)?;
    build_uatf_problem(&layout, &channels, params.p_max, vec![1.0; params.users])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_is_seeded() {
        let a = generate_layout(3, 4, 2, 100.0, 2, 7).unwrap();
        let b = generate_layout(3, 4, 2, 100.0, 2, 7).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, generate_layout(3, 4, 2, 100.0, 2, 8).unwrap());
        for p in a.ap_positions.iter().chain(&a.user_positions) {
            assert!(p.iter().all(|c| (0.0..=100.0).contains(c)));
        }
        assert!(a.association.iter().all(|s| s.len() == 2));
    }

    #[test]
    fn association_picks_strongest() {
        let a = generate_layout(5, 4, 1, 100.0, 1, 3).unwrap();
        for n in 0..5 {
            let best = a.association[n][0];
            assert!((0..4).all(|k| a.gain(n, k) <= a.gain(n, best)));
        }
    }

    #[test]
    fn full_association() {
        let a = generate_layout(3, 4, 2, 100.0, 4, 1).unwrap();
        assert!(a.association.iter().all(|s| s == &vec![0, 1, 2, 3]));
    }

    #[test]
    fn layout_rejects_bad_counts() {
        assert!(generate_layout(0, 4, 2, 100.0, 2, 0).is_err());
        assert!(generate_layout(3, 4, 2, 100.0, 5, 0).is_err());
    }

    #[test]
    fn channel_sampling() {
        let layout = generate_layout(3, 4, 2, 100.0, 2, 5).unwrap();
        let a = sample_channels(&layout, 10, 9).unwrap();
        assert_eq!(a, sample_channels(&layout, 10, 9).unwrap());
        assert!(sample_channels(&layout, 1, 9).is_err());
    }

    #[test]
    fn mean_channel_power_matches_gain() {
        let layout = generate_layout(2, 4, 2, 100.0, 2, 11).unwrap();
        let ch = sample_channels(&layout, 10_000, 12).unwrap();
        for n in 0..2 {
            let expected: f64 = (0..4).map(|k| 2.0 * layout.gain(n, k)).sum();
            let got = ch
                .user(n)
                .iter()
                .map(|h| h.iter().map(Complex64::norm_sqr).sum::<f64>())
                .sum::<f64>()
                / 10_000.0;
            assert!((got / expected - 1.0).abs() < 0.1, "{got} vs {expected}");
        }
    }

    #[test]
    fn constant_channel_is_rejected() {
        let layout = generate_layout(1, 1, 1, 10.0, 1, 0).unwrap();
        let c = Complex64::new(0.3, -0.2);
        let ch = ChannelSampleSet::from_samples(vec![vec![vec![c]; 4]]).unwrap();
        assert!(matches!(
            build_uatf_problem(&layout, &ch, 1.0, vec![1.0]),
            Err(Error::NonPositiveEntry { field: "M", .. })
        ));
    }

    #[test]
    fn zero_channel_is_degenerate() {
        let layout = generate_layout(1, 1, 1, 10.0, 1, 0).unwrap();
        let ch = ChannelSampleSet::from_samples(vec![vec![vec![Complex64::ZERO]; 3]]).unwrap();
        assert!(matches!(
            build_uatf_problem(&layout, &ch, 1.0, vec![1.0]),
            Err(Error::DegenerateChannel { user: 0 })
        ));
    }

    #[test]
    fn default_scenario_is_valid() {
        let p = generate_problem(&ScenarioParams::default(), 42).unwrap();
        assert_eq!(p.n(), 3);
        assert_eq!(p.w(), &[1.0; 3]);
        assert!(p.family().is_ok());
    }

    #[test]
    fn json_round_trip() {
        let p = generate_problem(&ScenarioParams::default(), 1).unwrap();
        let q = UatFProblem::from_json(&p.to_json().unwrap()).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn json_validation() {
        let missing_u = r#"{"n":1,"M":[[1.0]],"w":[1.0],"p_max":1.0}"#;
        assert!(matches!(UatFProblem::from_json(missing_u), Err(Error::Schema(_))));
        let bad_m = r#"{"n":1,"M":[[0.0]],"u":[1.0],"w":[1.0],"p_max":1.0}"#;
        assert!(matches!(
            UatFProblem::from_json(bad_m),
            Err(Error::NonPositiveEntry { .. })
        ));
        let ragged = r#"{"n":2,"M":[[1.0,1.0],[1.0]],"u":[1.0,1.0],"w":[1.0,1.0],"p_max":1.0}"#;
        assert!(matches!(UatFProblem::from_json(ragged), Err(Error::Schema(_))));
    }
}
