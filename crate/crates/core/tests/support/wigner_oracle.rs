//! d^J_{Ω'Ω}(θ) from the explicit factorial sum in exact integer and
//! 1024-bit fixed-point arithmetic.
//!
//! d = sqrt[(J+Ω')!(J−Ω')!/((J+Ω)!(J−Ω)!)]
//!     Σ_s (−1)^{Ω'−Ω+s} C(J+Ω, s) C(J−Ω, J−Ω'−s) c^{2J+Ω−Ω'−2s} s^{Ω'−Ω+2s}
//!
//! with c = cos(θ/2), s = sin(θ/2) evaluated by Taylor series at the exact
//! binary value of θ/2.

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, Signed, ToPrimitive, Zero};

const P: u32 = 1024;

fn from_f64(x: f64) -> BigInt {
    assert!(x >= 0.0 && x.is_finite());
    if x == 0.0 {
        return BigInt::zero();
    }
    let bits = x.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let mant = if exp == 0 { (bits & ((1 << 52) - 1)) << 1 } else { (bits & ((1 << 52) - 1)) | (1 << 52) };
    let shift = exp - 1075 + P as i64;
    let m = BigInt::from(mant);
    if shift >= 0 {
        m << shift as usize
    } else {
        m >> (-shift) as usize
    }
}

fn mul(a: &BigInt, b: &BigInt) -> BigInt {
    (a * b) >> P as usize
}

/// (cos t, sin t) in fixed point.
fn cos_sin(t: f64) -> (BigInt, BigInt) {
    let x = from_f64(t);
    let x2 = mul(&x, &x);
    let one = BigInt::one() << P as usize;
    let (mut c, mut s) = (one.clone(), x.clone());
    let (mut tc, mut ts) = (one, x);
    let mut n: u64 = 1;
    loop {
        tc = -mul(&tc, &x2) / BigInt::from((2 * n - 1) * (2 * n));
        ts = -mul(&ts, &x2) / BigInt::from((2 * n) * (2 * n + 1));
        if tc.is_zero() && ts.is_zero() {
            break;
        }
        c += &tc;
        s += &ts;
        n += 1;
    }
    (c, s)
}

fn binomial(n: i64, k: i64) -> BigInt {
    if k < 0 || k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut r = BigInt::one();
    for i in 0..k {
        r = r * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    r
}

fn factorial(n: i64) -> BigUint {
    (1..=n.max(1) as u64).fold(BigUint::one(), |acc, v| acc * v)
}

/// x = frac · 2^exp with frac in [0.5, 1).
fn split(x: &BigUint) -> (f64, i64) {
    let bits = x.bits() as i64;
    let shift = (bits - 60).max(0);
    let top = (x >> shift as usize).to_f64().unwrap();
    let frac = top / 2f64.powi((bits - shift) as i32);
    (frac, bits)
}

pub fn wigner_d_exact(j: u32, omega_prime: i32, omega: i32, theta: f64) -> f64 {
    let (jj, mp, m) = (j as i64, omega_prime as i64, omega as i64);
    assert!(mp.abs() <= jj && m.abs() <= jj);
    let (c, s) = cos_sin(theta / 2.0);
    let n = (2 * jj + 1) as usize;
    let mut cp = vec![BigInt::one() << P as usize];
    let mut sp = cp.clone();
    for k in 1..n {
        let next_c = mul(&cp[k - 1], &c);
        let next_s = mul(&sp[k - 1], &s);
        cp.push(next_c);
        sp.push(next_s);
    }
    let mut sum = BigInt::zero();
    for k in 0..=2 * jj {
        let a = 2 * jj + m - mp - 2 * k;
        let b = mp - m + 2 * k;
        if a < 0 || b < 0 || jj + m - k < 0 || mp - m + k < 0 || jj - mp - k < 0 {
            continue;
        }
        let coeff = binomial(jj + m, k) * binomial(jj - m, jj - mp - k);
        if coeff.is_zero() {
            continue;
        }
        let term = coeff * mul(&cp[a as usize], &sp[b as usize]);
        if (mp - m + k).rem_euclid(2) == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    if sum.is_zero() {
        return 0.0;
    }
    let sign = if sum.sign() == Sign::Minus { -1.0 } else { 1.0 };
    let mag = sum.abs().to_biguint().unwrap();
    let (fm, em) = split(&mag);
    let (fa, ea) = split(&(factorial(jj + mp) * factorial(jj - mp)));
    let (fb, eb) = split(&(factorial(jj + m) * factorial(jj - m)));
    // 2^((ea − eb)/2) split into an integer power and a possible √2.
    let half = ea - eb;
    let odd = if half.rem_euclid(2) == 1 { std::f64::consts::SQRT_2 } else { 1.0 };
    let exp = em - P as i64 + half.div_euclid(2);
    sign * fm * (fa / fb).sqrt() * odd * 2f64.powi(exp as i32)
}
