//! The quantum deflection function Q_r(θ, J).
//!
//! With J-partial amplitudes f^J_{Ω'Ω}(θ) = (1/2ik)(2J+1) d^J_{Ω'Ω}(θ) S^J_{Ω'Ω}
//! and the full amplitude F = Σ_J f^J,
//!
//! ```text
//! Q_r(θ, J) = sin θ/(2j+1) Σ_{Ω'Ω} [ |f^J|² + Re(f^J (F - f^J)*) ]
//! ```
//!
//! The first term is the random-phase (diagonal) part; the second carries all
//! coherences between J and every other partial wave, and can make Q_r
//! negative. Summing over J returns σ_r(θ) sin θ, and 2π ∫ Q_r dθ returns σ^J.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{AngularGrid, JWindow};
use crate::map::DeflectionMap;
use crate::observables::{check_helicity, partial_amplitudes, AmplitudeCurve, AngularCurve};
use crate::quadrature::ThetaQuadrature;
use crate::smatrix::SMatrixBlock;

/// Default presentation smoothing along J.
pub const DEFAULT_SMOOTH_J: f64 = 1.5;
/// Default presentation smoothing along θ, radians (1°).
pub const DEFAULT_SMOOTH_THETA: f64 = PI / 180.0;

/// f^J_{Ω'Ω}(θ) for a single J; the zero curve if the entry is absent.
pub fn j_partial_amplitude(
    block: &SMatrixBlock,
    j: u32,
    omega_prime: i32,
    omega: i32,
    grid: &AngularGrid,
) -> Result<AmplitudeCurve> {
    let h = block.header();
    if j > h.j_max {
        return Err(Error::Domain(format!("J = {j} outside 0..={}", h.j_max)));
    }
    if omega.unsigned_abs() > j.min(h.j) || omega_prime.unsigned_abs() > j.min(h.j_final) {
        return Err(Error::Domain(format!(
            "helicities (Ω'={omega_prime}, Ω={omega}) violate |Ω| ≤ min(J, j) at J={j}"
        )));
    }
    let s = block.get(j, omega_prime, omega);
    let pref = Complex64::new(0.0, -0.5 / block.k()) * s * (2 * j + 1) as f64;
    let values = grid
        .thetas()
        .iter()
        .map(|&t| {
            if s == Complex64::default() {
                Complex64::default()
            } else {
                let d = crate::wigner::wigner_d(j, omega_prime, omega, t).expect("bounds checked");
                pref * d
            }
        })
        .collect();
    Ok(AmplitudeCurve {
        omega_prime,
        omega,
        grid: grid.clone(),
        values,
    })
}

#[derive(Clone, Copy)]
enum Terms {
    Full,
    DiagonalOnly,
}

fn build_map(block: &SMatrixBlock, grid: &AngularGrid, only_omega_prime: Option<i32>, terms: Terms) -> DeflectionMap {
    let pairs: Vec<(i32, i32)> = block
        .helicity_pairs()
        .into_iter()
        .filter(|(mp, _)| only_omega_prime.is_none_or(|o| o == *mp))
        .collect();
    let columns: Vec<_> = pairs.iter().map(|&(mp, m)| block.column(mp, m)).collect();
    let k = block.k();
    let nj = block.j_max() as usize + 1;
    let norm = 1.0 / (2 * block.header().j + 1) as f64;

    let rows: Vec<Vec<f64>> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let mut row = vec![0.0; nj];
            let sin_t = grid.sin_theta(i);
            if sin_t == 0.0 {
                return row;
            }
            let theta = grid.thetas()[i];
            for (&(mp, m), col) in pairs.iter().zip(&columns) {
                let f = partial_amplitudes(col, mp, m, k, theta);
                let total: Complex64 = f.iter().sum();
                for (r, fj) in row.iter_mut().zip(&f) {
                    let diagonal = fj.norm_sqr();
                    *r += match terms {
                        Terms::Full => diagonal + (fj * (total - fj).conj()).re,
                        Terms::DiagonalOnly => diagonal,
                    };
                }
            }
            row.iter_mut().for_each(|r| *r *= sin_t * norm);
            row
        })
        .collect();

    DeflectionMap::new(
        grid.clone(),
        DeflectionMap::integer_j_axis(block.j_max()),
        rows.concat(),
    )
    .expect("shape is consistent by construction")
}

/// Q_r(θ, J) summed over Ω' and averaged over Ω.
pub fn qmdf_map(block: &SMatrixBlock, grid: &AngularGrid) -> DeflectionMap {
    build_map(block, grid, None, Terms::Full)
}

/// Q_r(θ, J) for a single final helicity Ω' (still averaged over Ω).
pub fn qmdf_helicity_map(block: &SMatrixBlock, omega_prime: i32, grid: &AngularGrid) -> Result<DeflectionMap> {
    check_helicity(block, omega_prime, 0)?;
    Ok(build_map(block, grid, Some(omega_prime), Terms::Full))
}

/// Diagonal part only: sin θ/(2j+1) Σ_{Ω'Ω} |f^J_{Ω'Ω}(θ)|².
pub fn random_phase_map(block: &SMatrixBlock, grid: &AngularGrid) -> DeflectionMap {
    build_map(block, grid, None, Terms::DiagonalOnly)
}

/// Q_r(θ; window) = Σ_{J ∈ window} Q_r(θ, J).
pub fn sum_over_j(map: &DeflectionMap, window: JWindow) -> Result<AngularCurve> {
    let top = map.j_values().last().copied().unwrap_or(0.0);
    if window.hi as f64 > top + 1e-9 {
        return Err(Error::Domain(format!(
            "J window [{}, {}] exceeds map range (J ≤ {top})",
            window.lo, window.hi
        )));
    }
    let cols: Vec<usize> = map
        .j_values()
        .iter()
        .enumerate()
        .filter(|(_, &j)| j >= window.lo as f64 - 1e-9 && j <= window.hi as f64 + 1e-9)
        .map(|(i, _)| i)
        .collect();
    let values = (0..map.n_theta())
        .map(|i| {
            let row = map.row(i);
            cols.iter().map(|&c| row[c]).sum()
        })
        .collect();
    Ok(AngularCurve {
        grid: map.grid().clone(),
        values,
    })
}

/// DCS from amplitudes restricted to J ∈ window (coherences inside the window only).
pub fn partial_dcs(block: &SMatrixBlock, window: JWindow, grid: &AngularGrid) -> Result<AngularCurve> {
    window.check_within(block.j_max())?;
    let pairs = block.helicity_pairs();
    let columns: Vec<Vec<Complex64>> = pairs
        .iter()
        .map(|&(mp, m)| {
            let mut col = block.column(mp, m);
            for (j, s) in col.iter_mut().enumerate() {
                if !window.contains(j as u32) {
                    *s = Complex64::default();
                }
            }
            col
        })
        .collect();
    let k = block.k();
    let norm = 1.0 / (2 * block.header().j + 1) as f64;
    let values = grid
        .thetas()
        .par_iter()
        .map(|&t| {
            pairs
                .iter()
                .zip(&columns)
                .map(|(&(mp, m), col)| partial_amplitudes(col, mp, m, k, t).iter().sum::<Complex64>().norm_sqr())
                .sum::<f64>()
                * norm
        })
        .collect();
    Ok(AngularCurve {
        grid: grid.clone(),
        values,
    })
}

/// 2π ∫₀^π Q_r(θ, J) dθ.
///
/// A full uniform grid uses the sine-series rule, exact for the band-limited
/// Q_r of any block with 2 J_max + 1 below the number of grid intervals; other
/// grids use composite Simpson or trapezoid.
pub fn integrate_over_theta(map: &DeflectionMap, j: u32) -> Result<f64> {
    let idx = map
        .j_index(j as f64)
        .ok_or_else(|| Error::Domain(format!("J = {j} not present in map")))?;
    let q = ThetaQuadrature::new(map.grid());
    Ok(2.0 * PI * q.integrate(&map.column(idx)))
}

/// Presentation smoothing: separable normalized Gaussians along J and θ.
pub fn smooth_map(map: &DeflectionMap, s_j: f64, s_theta: f64) -> Result<DeflectionMap> {
    map.smoothed(s_j, s_theta)
}
