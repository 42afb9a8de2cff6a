//! Observables read directly off an S-matrix block: opacity, J-partial and
//! integral cross sections, helicity amplitudes and the DCS.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::AngularGrid;
use crate::smatrix::SMatrixBlock;
use crate::wigner::wigner_d_ladder;

/// f_{Ω'Ω}(θ) sampled on a grid; units of length.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeCurve {
    pub omega_prime: i32,
    pub omega: i32,
    pub grid: AngularGrid,
    pub values: Vec<Complex64>,
}

/// A real curve over θ (DCS in length²/sr unless stated otherwise).
#[derive(Debug, Clone, PartialEq)]
pub struct AngularCurve {
    pub grid: AngularGrid,
    pub values: Vec<f64>,
}

impl AngularCurve {
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

fn check_j(block: &SMatrixBlock, j: u32) -> Result<()> {
    if j > block.j_max() {
        return Err(Error::Domain(format!("J = {j} outside 0..={}", block.j_max())));
    }
    Ok(())
}

fn sum_sq_at(block: &SMatrixBlock, j: u32) -> f64 {
    block
        .entries()
        .filter(|(k, _)| k.j == j)
        .map(|(_, s)| s.norm_sqr())
        .sum()
}

/// P_r(J) = Σ_{ΩΩ'} |S^J_{Ω'Ω}|² / (2 min(J, j) + 1).
pub fn opacity(block: &SMatrixBlock, j: u32) -> Result<f64> {
    check_j(block, j)?;
    let degeneracy = 2 * j.min(block.header().j) + 1;
    Ok(sum_sq_at(block, j) / degeneracy as f64)
}

/// σ^J = (π/k²) (2J+1)/(2j+1) Σ_{ΩΩ'} |S^J_{Ω'Ω}|².
pub fn partial_cross_section(block: &SMatrixBlock, j: u32) -> Result<f64> {
    check_j(block, j)?;
    let k = block.k();
    let jj = block.header().j;
    Ok(PI / (k * k) * (2 * j + 1) as f64 / (2 * jj + 1) as f64 * sum_sq_at(block, j))
}

/// σ_r = Σ_J σ^J.
pub fn integral_cross_section(block: &SMatrixBlock) -> f64 {
    (0..=block.j_max())
        .map(|j| partial_cross_section(block, j).unwrap())
        .sum()
}

pub(crate) fn check_helicity(block: &SMatrixBlock, omega_prime: i32, omega: i32) -> Result<()> {
    let h = block.header();
    if omega.unsigned_abs() > h.j || omega_prime.unsigned_abs() > h.j_final {
        return Err(Error::Domain(format!(
            "helicities (Ω'={omega_prime}, Ω={omega}) outside channel j={}, j'={}",
            h.j, h.j_final
        )));
    }
    Ok(())
}

/// f^J_{Ω'Ω}(θ) for J = 0..=J_max at one angle, given the S column for the pair.
pub(crate) fn partial_amplitudes(
    s_column: &[Complex64],
    omega_prime: i32,
    omega: i32,
    k: f64,
    theta: f64,
) -> Vec<Complex64> {
    let j_max = (s_column.len() - 1) as u32;
    let d = wigner_d_ladder(omega_prime, omega, j_max, theta).expect("θ on grid lies in [0, π]");
    // 1/(2ik) = -i/(2k)
    let pref = Complex64::new(0.0, -0.5 / k);
    s_column
        .iter()
        .zip(d)
        .enumerate()
        .map(|(j, (s, d))| pref * s * ((2 * j + 1) as f64 * d))
        .collect()
}

/// f_{Ω'Ω}(θ) = (1/2ik) Σ_J (2J+1) d^J_{Ω'Ω}(θ) S^J_{Ω'Ω}.
pub fn scattering_amplitude(
    block: &SMatrixBlock,
    omega_prime: i32,
    omega: i32,
    grid: &AngularGrid,
) -> Result<AmplitudeCurve> {
    check_helicity(block, omega_prime, omega)?;
    let column = block.column(omega_prime, omega);
    let k = block.k();
    let values = grid
        .thetas()
        .par_iter()
        .map(|&t| partial_amplitudes(&column, omega_prime, omega, k, t).iter().sum())
        .collect();
    Ok(AmplitudeCurve {
        omega_prime,
        omega,
        grid: grid.clone(),
        values,
    })
}

/// σ_r(θ) = Σ_{Ω'Ω} |f_{Ω'Ω}(θ)|² / (2j+1).
pub fn dcs(block: &SMatrixBlock, grid: &AngularGrid) -> AngularCurve {
    let pairs = block.helicity_pairs();
    let columns: Vec<_> = pairs.iter().map(|&(mp, m)| block.column(mp, m)).collect();
    let k = block.k();
    let norm = 1.0 / (2 * block.header().j + 1) as f64;
    let values = grid
        .thetas()
        .par_iter()
        .map(|&t| {
            pairs
                .iter()
                .zip(&columns)
                .map(|(&(mp, m), col)| {
                    partial_amplitudes(col, mp, m, k, t)
                        .iter()
                        .sum::<Complex64>()
                        .norm_sqr()
                })
                .sum::<f64>()
                * norm
        })
        .collect();
    AngularCurve {
        grid: grid.clone(),
        values,
    }
}
