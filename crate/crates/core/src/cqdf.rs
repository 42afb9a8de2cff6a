//! Connor's quantum deflection function Θ̃(J) = d arg S̃(J)/dJ with
//! S̃(J) = e^{iπJ} S^J.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::smatrix::SMatrixBlock;

/// Smallest |S̃| for which a phase is considered defined.
pub const MIN_MAGNITUDE: f64 = 1e-300;
/// Distance from a half turn below which a phase step counts as a tie.
pub const TIE_TOL: f64 = 1e-12;

/// Rule for choosing the branch of each successive argument.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UnwrapMode {
    /// Minimal jump |Δ| < π; an exact half turn is reported as an error.
    #[default]
    TwoSided,
    /// Δ ∈ [-π, π): a half-turn step is always taken as -π.
    OneSided,
}

/// e^{iπJ} S^J_{Ω'Ω} over the contiguous J range spanned by the pair's entries.
#[derive(Debug, Clone, PartialEq)]
pub struct ModifiedSequence {
    pub omega_prime: i32,
    pub omega: i32,
    pub j_values: Vec<u32>,
    pub values: Vec<Complex64>,
}

/// Continuous-branch arguments of a modified sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSequence {
    pub omega_prime: i32,
    pub omega: i32,
    pub j_values: Vec<u32>,
    pub args: Vec<f64>,
    pub magnitudes: Vec<f64>,
}

/// Θ̃(J) in radians; values may lie outside [0, π].
#[derive(Debug, Clone, PartialEq)]
pub struct CqdfCurve {
    pub omega_prime: i32,
    pub omega: i32,
    pub j_values: Vec<u32>,
    pub theta_tilde: Vec<f64>,
    pub magnitudes: Vec<f64>,
}

impl CqdfCurve {
    /// Scattering angle predicted at each J, see [`predicted_angle`].
    pub fn predicted_angles(&self) -> Vec<f64> {
        self.theta_tilde.iter().map(|&t| predicted_angle(t)).collect()
    }
}

/// Folds any real angle into [0, π] by reflection: periodic in 2π and even.
pub fn fold_angle(theta: f64) -> f64 {
    let r = theta.rem_euclid(2.0 * PI);
    if r > PI {
        2.0 * PI - r
    } else {
        r
    }
}

/// Angle at which the Q_r ridge is found for a given Θ̃: π − fold(|Θ̃|).
///
/// The factor e^{iπJ} in S̃ maps d^J(θ) onto d^J(π − θ), so Θ̃ measures the
/// deflection from the backward direction.
pub fn predicted_angle(theta_tilde: f64) -> f64 {
    PI - fold_angle(theta_tilde.abs())
}

pub fn modified_smatrix(block: &SMatrixBlock, omega_prime: i32, omega: i32) -> Result<ModifiedSequence> {
    let present: Vec<u32> = block
        .entries()
        .filter(|(k, _)| k.omega_prime == omega_prime && k.omega == omega)
        .map(|(k, _)| k.j)
        .collect();
    let (Some(&lo), Some(&hi)) = (present.iter().min(), present.iter().max()) else {
        return Err(Error::Domain(format!(
            "no entries for helicity pair (Ω'={omega_prime}, Ω={omega})"
        )));
    };
    let missing: Vec<u32> = (lo..=hi).filter(|j| !present.contains(j)).collect();
    if !missing.is_empty() {
        return Err(Error::MissingJ {
            omega_prime,
            omega,
            missing,
        });
    }
    let j_values: Vec<u32> = (lo..=hi).collect();
    let values = j_values
        .iter()
        .map(|&j| {
            let s = block.get(j, omega_prime, omega);
            if j % 2 == 0 {
                s
            } else {
                -s
            }
        })
        .collect();
    Ok(ModifiedSequence {
        omega_prime,
        omega,
        j_values,
        values,
    })
}

/// Continuous arguments: the first is the principal value, each later one
/// differs from its predecessor by Δ = arg(z_J z̄_{J-1}).
pub fn unwrap_arg(seq: &ModifiedSequence, mode: UnwrapMode) -> Result<PhaseSequence> {
    let mut args = Vec::with_capacity(seq.values.len());
    let mut magnitudes = Vec::with_capacity(seq.values.len());
    for (i, (&j, &z)) in seq.j_values.iter().zip(&seq.values).enumerate() {
        let magnitude = z.norm();
        if !(magnitude >= MIN_MAGNITUDE) {
            return Err(Error::UndefinedPhase { j, magnitude });
        }
        magnitudes.push(magnitude);
        if i == 0 {
            args.push(z.arg());
            continue;
        }
        let mut delta = (z * seq.values[i - 1].conj()).arg();
        if (delta.abs() - PI).abs() < TIE_TOL {
            match mode {
                UnwrapMode::TwoSided => return Err(Error::UnwrapTie { j, delta }),
                UnwrapMode::OneSided => delta = -PI,
            }
        }
        args.push(args[i - 1] + delta);
    }
    Ok(PhaseSequence {
        omega_prime: seq.omega_prime,
        omega: seq.omega,
        j_values: seq.j_values.clone(),
        args,
        magnitudes,
    })
}

/// Unit-spacing derivative: central differences inside, second-order
/// one-sided differences at the ends (first order when only two points).
pub fn derivative(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        2 => vec![values[1] - values[0]; 2],
        _ => (0..n)
            .map(|i| {
                if i == 0 {
                    (-3.0 * values[0] + 4.0 * values[1] - values[2]) / 2.0
                } else if i == n - 1 {
                    (3.0 * values[n - 1] - 4.0 * values[n - 2] + values[n - 3]) / 2.0
                } else {
                    (values[i + 1] - values[i - 1]) / 2.0
                }
            })
            .collect(),
    }
}

pub fn cqdf(block: &SMatrixBlock, omega_prime: i32, omega: i32, mode: UnwrapMode) -> Result<CqdfCurve> {
    let phases = unwrap_arg(&modified_smatrix(block, omega_prime, omega)?, mode)?;
    Ok(CqdfCurve {
        omega_prime,
        omega,
        theta_tilde: derivative(&phases.args),
        j_values: phases.j_values,
        magnitudes: phases.magnitudes,
    })
}
