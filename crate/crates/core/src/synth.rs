//! Synthetic S-matrix blocks and trajectory ensembles with known answers.
//!
//! Model spec files are `key = value` lines (`#` comments). S-matrix models:
//!
//! ```text
//! kind = quadratic        # linear | quadratic | two-branch
//! k = 1.0
//! J_max = 70
//! J0 = 30                 # Gaussian amplitude centre; omit for constant h
//! w = 8
//! h = 1
//! eta = 0, -1.0005, -0.0005   # η(J) = Σ c_n J^n
//! # second branch of a two-branch model: J0_2, w_2, h_2, eta_2
//! ```
//!
//! Trajectory models:
//!
//! ```text
//! kind = classical
//! J_max = 40
//! sigma_r = 1
//! branches = linear 180 0; isotropic
//! weights = 1, 1
//! noise_deg = 3
//! count = 100000
//! seed = 7
//! ```

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rand::distr::weighted::WeightedIndex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::qct::{ell_from_xi, Trajectory, TrajectoryEnsemble};
use crate::smatrix::{ChannelHeader, SMatrixBlock};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Amplitude {
    Constant(f64),
    /// h exp(−((J − center)/width)²).
    Gaussian { center: f64, width: f64, height: f64 },
}

impl Amplitude {
    pub fn at(&self, j: f64) -> f64 {
        match *self {
            Amplitude::Constant(h) => h,
            Amplitude::Gaussian { center, width, height } => height * (-((j - center) / width).powi(2)).exp(),
        }
    }

    fn height(&self) -> f64 {
        match *self {
            Amplitude::Constant(h) => h,
            Amplitude::Gaussian { height, .. } => height,
        }
    }
}

/// A(J) e^{2iη(J)} with η(J) = Σ_n eta[n] J^n.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseBranch {
    pub amplitude: Amplitude,
    pub eta: Vec<f64>,
}

impl PhaseBranch {
    pub fn eta_at(&self, j: f64) -> f64 {
        self.eta.iter().rev().fold(0.0, |acc, c| acc * j + c)
    }

    pub fn s_at(&self, j: f64) -> Complex64 {
        Complex64::from_polar(self.amplitude.at(j), 2.0 * self.eta_at(j))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseKind {
    Linear,
    Quadratic,
    TwoBranch,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseModel {
    pub kind: PhaseKind,
    pub branches: Vec<PhaseBranch>,
}

impl PhaseModel {
    /// η(J) = cJ/2, unit amplitude.
    pub fn linear(c: f64) -> Self {
        Self {
            kind: PhaseKind::Linear,
            branches: vec![PhaseBranch {
                amplitude: Amplitude::Constant(1.0),
                eta: vec![0.0, c / 2.0],
            }],
        }
    }

    /// η(J) = −αJ(J+1)/2, unit amplitude.
    pub fn quadratic(alpha: f64) -> Self {
        Self {
            kind: PhaseKind::Quadratic,
            branches: vec![PhaseBranch {
                amplitude: Amplitude::Constant(1.0),
                eta: vec![0.0, -alpha / 2.0, -alpha / 2.0],
            }],
        }
    }

    pub fn two_branch(first: PhaseBranch, second: PhaseBranch) -> Self {
        Self {
            kind: PhaseKind::TwoBranch,
            branches: vec![first, second],
        }
    }

    /// Replaces the amplitude profile of every branch.
    pub fn with_amplitude(mut self, amplitude: Amplitude) -> Self {
        self.branches.iter_mut().for_each(|b| b.amplitude = amplitude);
        self
    }

    fn validate(&self) -> Result<()> {
        let expected = if self.kind == PhaseKind::TwoBranch { 2 } else { 1 };
        if self.branches.len() != expected {
            return Err(Error::Model(format!(
                "{:?} model needs {expected} branch(es), got {}",
                self.kind,
                self.branches.len()
            )));
        }
        for b in &self.branches {
            let h = b.amplitude.height();
            if !(0.0..=1.0).contains(&h) {
                return Err(Error::Model(format!("amplitude height {h} outside [0, 1]")));
            }
            if let Amplitude::Gaussian { width, .. } = b.amplitude {
                if !(width > 0.0) {
                    return Err(Error::Model(format!("amplitude width must be positive, got {width}")));
                }
            }
        }
        Ok(())
    }

    /// S(J) for J = 0..=j_max; a two-branch sum is scaled so max |S| ≤ 1.
    pub fn s_values(&self, j_max: u32) -> Result<Vec<Complex64>> {
        self.validate()?;
        let mut s: Vec<Complex64> = (0..=j_max)
            .map(|j| self.branches.iter().map(|b| b.s_at(j as f64)).sum())
            .collect();
        let peak = s.iter().fold(0.0f64, |m, v| m.max(v.norm()));
        if self.kind == PhaseKind::TwoBranch && peak > 1.0 {
            s.iter_mut().for_each(|v| *v /= peak);
        }
        if let Some(j) = s.iter().position(|v| v.norm() > 1.0 + 1e-12) {
            return Err(Error::Model(format!("|S| = {} > 1 at J = {j}", s[j].norm())));
        }
        Ok(s)
    }
}

/// Single-helicity block (j = j' = 0) with S^J₀₀ = A(J) e^{2iη(J)}.
pub fn synth_smatrix(model: &PhaseModel, k: f64, j_max: u32) -> Result<SMatrixBlock> {
    if j_max < 2 {
        return Err(Error::Model(format!("J_max must be at least 2, got {j_max}")));
    }
    let s = model.s_values(j_max)?;
    SMatrixBlock::new(
        ChannelHeader::new(k, 0, 0, j_max),
        s.into_iter().enumerate().map(|(j, v)| (j as u32, 0, 0, v)),
    )
}

/// j = 0 → j' block: the model is replicated over every allowed Ω' with phase
/// offset Ω'·φ and magnitude scaled by 1/√(2j'+1).
pub fn synth_smatrix_helicity(
    model: &PhaseModel,
    k: f64,
    j_final: u32,
    j_max: u32,
    phase_offset: f64,
) -> Result<SMatrixBlock> {
    if j_max < 2 {
        return Err(Error::Model(format!("J_max must be at least 2, got {j_max}")));
    }
    let s = model.s_values(j_max)?;
    let scale = 1.0 / ((2 * j_final + 1) as f64).sqrt();
    let mut entries = Vec::new();
    for (j, v) in s.iter().enumerate() {
        let lim = (j as u32).min(j_final) as i32;
        for mp in -lim..=lim {
            let offset = Complex64::from_polar(scale, mp as f64 * phase_offset);
            entries.push((j as u32, 0, mp, v * offset));
        }
    }
    SMatrixBlock::new(ChannelHeader::new(k, 0, j_final, j_max), entries)
}

/// Classical deflection branch θ(J).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClassicalBranch {
    /// Straight line from θ(0) to θ(J_max), radians.
    Linear { theta_at_zero: f64, theta_at_jmax: f64 },
    /// θ independent of J, uniform in cos θ.
    Isotropic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalModel {
    pub branches: Vec<ClassicalBranch>,
    pub weights: Vec<f64>,
    /// Standard deviation of Gaussian noise added to θ, radians.
    pub noise: f64,
    pub sigma_r: f64,
    pub j_max: f64,
}

impl ClassicalModel {
    pub fn single(branch: ClassicalBranch, j_max: f64) -> Self {
        Self {
            branches: vec![branch],
            weights: vec![1.0],
            noise: 0.0,
            sigma_r: 1.0,
            j_max,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.branches.is_empty() || self.branches.len() != self.weights.len() {
            return Err(Error::Model(format!(
                "{} branches but {} weights",
                self.branches.len(),
                self.weights.len()
            )));
        }
        if self.weights.iter().any(|w| !(*w >= 0.0)) || self.weights.iter().sum::<f64>() <= 0.0 {
            return Err(Error::Model("branch weights must be ≥ 0 with a positive sum".into()));
        }
        if !(self.noise >= 0.0) {
            return Err(Error::Model(format!("noise must be ≥ 0, got {}", self.noise)));
        }
        if !(self.j_max > 0.0) {
            return Err(Error::Model(format!("J_max must be positive, got {}", self.j_max)));
        }
        Ok(())
    }
}

/// Unit-weight ensemble: J from the continuous ℓ sampler, θ from a branch
/// chosen by weight plus Gaussian noise, clipped to [0, π].
pub fn synth_trajectories(model: &ClassicalModel, count: usize, seed: u64) -> Result<TrajectoryEnsemble> {
    model.validate()?;
    if count == 0 {
        return Err(Error::Model("trajectory count must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pick = WeightedIndex::new(&model.weights).map_err(|e| Error::Model(e.to_string()))?;
    let noise = Normal::new(0.0, model.noise).map_err(|e| Error::Model(e.to_string()))?;
    let records = (0..count)
        .map(|_| {
            let j = ell_from_xi(rng.random::<f64>(), model.j_max);
            let theta = match model.branches[pick.sample(&mut rng)] {
                ClassicalBranch::Linear {
                    theta_at_zero,
                    theta_at_jmax,
                } => {
                    let t = theta_at_zero + (theta_at_jmax - theta_at_zero) * j / model.j_max;
                    t + noise.sample(&mut rng)
                }
                ClassicalBranch::Isotropic => (rng.random_range(-1.0..=1.0f64)).acos(),
            };
            Trajectory {
                w: 1.0,
                j,
                theta: theta.clamp(0.0, PI),
            }
        })
        .collect();
    TrajectoryEnsemble::new(records, model.sigma_r, model.j_max)
}

/// A parsed model spec file.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    SMatrix {
        model: PhaseModel,
        k: f64,
        j_max: u32,
        j_final: u32,
        phase_offset: f64,
    },
    Trajectories {
        model: ClassicalModel,
        count: usize,
        seed: u64,
    },
}

fn model_err(msg: impl Into<String>) -> Error {
    Error::Model(msg.into())
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    v.trim()
        .parse()
        .map_err(|_| model_err(format!("cannot parse {key} from '{v}'")))
}

fn parse_list(key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',').map(|t| parse_f64(key, t)).collect()
}

struct Keys(BTreeMap<String, String>);

impl Keys {
    fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        self.get(key).map_or(Ok(default), |v| parse_f64(key, v))
    }

    fn u64_or(&self, key: &str, default: u64) -> Result<u64> {
        self.get(key).map_or(Ok(default), |v| {
            v.parse().map_err(|_| model_err(format!("cannot parse {key} from '{v}' as an integer")))
        })
    }

    fn required(&self, key: &str) -> Result<&str> {
        self.get(key).ok_or_else(|| model_err(format!("missing key '{key}'")))
    }

    fn branch(&self, suffix: &str) -> Result<PhaseBranch> {
        let key = |k: &str| format!("{k}{suffix}");
        let h = self.f64_or(&key("h"), 1.0)?;
        let amplitude = match self.get(&key("J0")) {
            Some(c) => Amplitude::Gaussian {
                center: parse_f64("J0", c)?,
                width: parse_f64("w", self.required(&key("w"))?)?,
                height: h,
            },
            None => Amplitude::Constant(h),
        };
        let eta = parse_list("eta", self.required(&key("eta"))?)?;
        Ok(PhaseBranch { amplitude, eta })
    }
}

pub fn parse_model_spec(text: &str) -> Result<ModelSpec> {
    let mut map = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| model_err(format!("line {}: expected key = value", n + 1)))?;
        if map.insert(k.trim().to_string(), v.trim().to_string()).is_some() {
            return Err(model_err(format!("line {}: duplicate key '{}'", n + 1, k.trim())));
        }
    }
    let keys = Keys(map);
    let kind = keys.required("kind")?;
    if kind == "classical" {
        let mut branches = Vec::new();
        for b in keys.required("branches")?.split(';') {
            let toks: Vec<&str> = b.split_whitespace().collect();
            branches.push(match toks.as_slice() {
                ["isotropic"] => ClassicalBranch::Isotropic,
                ["linear", a, z] => ClassicalBranch::Linear {
                    theta_at_zero: parse_f64("branches", a)?.to_radians(),
                    theta_at_jmax: parse_f64("branches", z)?.to_radians(),
                },
                _ => return Err(model_err(format!("cannot parse branch '{}'", b.trim()))),
            });
        }
        let weights = match keys.get("weights") {
            Some(v) => parse_list("weights", v)?,
            None => vec![1.0; branches.len()],
        };
        let model = ClassicalModel {
            branches,
            weights,
            noise: keys.f64_or("noise_deg", 0.0)?.to_radians(),
            sigma_r: keys.f64_or("sigma_r", 1.0)?,
            j_max: parse_f64("J_max", keys.required("J_max")?)?,
        };
        model.validate()?;
        return Ok(ModelSpec::Trajectories {
            model,
            count: keys.u64_or("count", 10_000)? as usize,
            seed: keys.u64_or("seed", 0)?,
        });
    }
    let kind = match kind {
        "linear" => PhaseKind::Linear,
        "quadratic" => PhaseKind::Quadratic,
        "two-branch" => PhaseKind::TwoBranch,
        other => return Err(model_err(format!("unknown model kind '{other}'"))),
    };
    let mut branches = vec![keys.branch("")?];
    if kind == PhaseKind::TwoBranch {
        branches.push(keys.branch("_2")?);
    }
    let model = PhaseModel { kind, branches };
    model.validate()?;
    Ok(ModelSpec::SMatrix {
        model,
        k: keys.f64_or("k", 1.0)?,
        j_max: u32::try_from(keys.required("J_max").and_then(|_| keys.u64_or("J_max", 0))?)
            .map_err(|_| model_err("J_max too large"))?,
        j_final: u32::try_from(keys.u64_or("jp", 0)?).map_err(|_| model_err("jp too large"))?,
        phase_offset: keys.f64_or("phase_offset", 0.0)?,
    })
}
