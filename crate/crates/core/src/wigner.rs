//! Reduced Wigner rotation matrix elements d^J_{Ω'Ω}(θ).
//!
//! Elements are generated by the three-term recursion in J at fixed (Ω', Ω),
//!
//! ```text
//! J √[((J+1)²-Ω²)((J+1)²-Ω'²)] d^{J+1}
//!     = (2J+1)[J(J+1) cos θ - Ω Ω'] d^J - (J+1) √[(J²-Ω²)(J²-Ω'²)] d^{J-1},
//! ```
//!
//! seeded at J₀ = max(|Ω|, |Ω'|) where the factorial sum collapses to a single
//! term. The seed is evaluated in log space and the recursion runs on scaled
//! values, so seeds far below the smallest normal double are still propagated
//! into the region where the element becomes appreciable.
//!
//! The phase convention is d^J_{Ω'Ω}(θ) = ⟨J Ω'| exp(-iθJ_y) |J Ω⟩, giving
//! d^1_{10} = -sin θ/√2 and d^1_{01} = +sin θ/√2.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::AngularGrid;

fn check_bounds(j: u32, omega_prime: i32, omega: i32) -> Result<()> {
    let j = j as i64;
    if (omega as i64).abs() > j || (omega_prime as i64).abs() > j {
        return Err(Error::Domain(format!(
            "helicity bound violated: J={j}, Ω'={omega_prime}, Ω={omega}"
        )));
    }
    Ok(())
}

fn ln_factorial(n: i64) -> f64 {
    debug_assert!(n >= 0);
    libm::lgamma(n as f64 + 1.0)
}

/// Closed forms at θ = 0 and θ = π.
fn endpoint_value(j: u32, omega_prime: i32, omega: i32, theta: f64) -> Option<f64> {
    if theta == 0.0 {
        Some(if omega_prime == omega { 1.0 } else { 0.0 })
    } else if theta == PI {
        if omega_prime == -omega {
            let parity = (j as i64 + omega_prime as i64).rem_euclid(2);
            Some(if parity == 0 { 1.0 } else { -1.0 })
        } else {
            Some(0.0)
        }
    } else {
        None
    }
}

/// Sign and natural log of |d^{J₀}_{Ω'Ω}(θ)| at J₀ = max(|Ω|, |Ω'|), 0 < θ < π.
fn seed_log(omega_prime: i32, omega: i32, theta: f64) -> (f64, f64) {
    let (mp, m) = (omega_prime as i64, omega as i64);
    let j = mp.abs().max(m.abs());
    // Single surviving term of the factorial sum.
    let s = 0.max(m - mp);
    debug_assert_eq!(s, (j + m).min(j - mp));
    let cos_pow = 2 * j + m - mp - 2 * s;
    let sin_pow = mp - m + 2 * s;
    let sign = if (mp - m + s).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    let half = 0.5 * theta;
    let mut ln = 0.5
        * (ln_factorial(j + mp) + ln_factorial(j - mp) + ln_factorial(j + m) + ln_factorial(j - m))
        - ln_factorial(j + m - s)
        - ln_factorial(s)
        - ln_factorial(mp - m + s)
        - ln_factorial(j - mp - s);
    if cos_pow > 0 {
        ln += cos_pow as f64 * half.cos().ln();
    }
    if sin_pow > 0 {
        ln += sin_pow as f64 * half.sin().ln();
    }
    (sign, ln)
}

/// d^J_{Ω'Ω}(θ) for every J in `0..=j_max` at one angle; entries with
/// J < max(|Ω|, |Ω'|) are zero.
pub fn wigner_d_ladder(omega_prime: i32, omega: i32, j_max: u32, theta: f64) -> Result<Vec<f64>> {
    if !(0.0..=PI).contains(&theta) {
        return Err(Error::Domain(format!("θ = {theta} outside [0, π]")));
    }
    let j0 = omega_prime.unsigned_abs().max(omega.unsigned_abs());
    let mut out = vec![0.0; j_max as usize + 1];
    if j0 > j_max {
        return Ok(out);
    }
    if theta == 0.0 || theta == PI {
        for j in j0..=j_max {
            out[j as usize] = endpoint_value(j, omega_prime, omega, theta).unwrap();
        }
        return Ok(out);
    }

    let x = theta.cos();
    let (m, mp) = (omega as f64, omega_prime as f64);
    let (sign, ln_seed) = seed_log(omega_prime, omega, theta);

    // Values are carried as v = d·exp(shift).
    const RESCALE: f64 = 1e200;
    let mut shift = if ln_seed < -300.0 { -ln_seed } else { 0.0 };
    let emit = |v: f64, shift: f64| if shift == 0.0 { v } else { v * (-shift).exp() };

    let mut prev = 0.0;
    let mut cur = sign * (ln_seed + shift).exp();
    out[j0 as usize] = emit(cur, shift);

    let mut j = j0;
    if j0 == 0 && j_max >= 1 {
        // The J = 0 step of the recursion is singular; d¹₀₀ = cos θ.
        prev = cur;
        cur = x;
        out[1] = emit(cur, shift);
        j = 1;
    }
    while j < j_max {
        let jf = j as f64;
        let jp1 = jf + 1.0;
        let lead = jf * ((jp1 * jp1 - m * m) * (jp1 * jp1 - mp * mp)).sqrt();
        let mid = (2.0 * jf + 1.0) * (jf * jp1 * x - m * mp);
        let back = jp1 * ((jf * jf - m * m) * (jf * jf - mp * mp)).max(0.0).sqrt();
        let next = (mid * cur - back * prev) / lead;
        prev = cur;
        cur = next;
        j += 1;
        if cur.abs() > RESCALE {
            cur /= RESCALE;
            prev /= RESCALE;
            shift -= RESCALE.ln();
        }
        out[j as usize] = emit(cur, shift);
    }
    Ok(out)
}

/// d^J_{Ω'Ω}(θ).
pub fn wigner_d(j: u32, omega_prime: i32, omega: i32, theta: f64) -> Result<f64> {
    check_bounds(j, omega_prime, omega)?;
    if let Some(v) = endpoint_value(j, omega_prime, omega, theta) {
        return Ok(v);
    }
    Ok(wigner_d_ladder(omega_prime, omega, j, theta)?[j as usize])
}

/// Argument set for a batch evaluation over a grid.
#[derive(Debug, Clone)]
pub struct DTableRequest {
    pub j: u32,
    pub omega_prime: i32,
    pub omega: i32,
    pub grid: AngularGrid,
}

/// d^J_{Ω'Ω}(θ) at every point of the request grid.
pub fn wigner_d_column(request: &DTableRequest) -> Result<Vec<f64>> {
    check_bounds(request.j, request.omega_prime, request.omega)?;
    request
        .grid
        .thetas()
        .iter()
        .map(|&t| wigner_d(request.j, request.omega_prime, request.omega, t))
        .collect()
}
