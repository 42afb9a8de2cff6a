//! Random S-matrix blocks.

use num_complex::Complex64;
use qdeflect::{ChannelHeader, SMatrixBlock};
use rand::Rng;

/// Entries with |S| ≤ 1 and uniform phase; each allowed key is kept with
/// probability `fill`, and at least one entry per J is always present.
pub fn random_block<R: Rng>(rng: &mut R, k: f64, j: u32, j_final: u32, j_max: u32, fill: f64) -> SMatrixBlock {
    let mut entries = Vec::new();
    for jj in 0..=j_max {
        let lo = jj.min(j) as i32;
        let lop = jj.min(j_final) as i32;
        let mut any = false;
        let mut keys = Vec::new();
        for omega in -lo..=lo {
            for omega_prime in -lop..=lop {
                keys.push((omega, omega_prime));
            }
        }
        let forced = rng.random_range(0..keys.len());
        for (i, (omega, omega_prime)) in keys.into_iter().enumerate() {
            if i == forced || rng.random::<f64>() < fill {
                let s = Complex64::from_polar(rng.random::<f64>(), rng.random_range(-std::f64::consts::PI..std::f64::consts::PI));
                entries.push((jj, omega, omega_prime, s));
                any = true;
            }
        }
        assert!(any);
    }
    SMatrixBlock::new(ChannelHeader::new(k, j, j_final, j_max), entries).unwrap()
}

/// Block with random sizes: J_max ≤ `max_j_max`, j and j' ≤ `max_j`.
pub fn random_shape_block<R: Rng>(rng: &mut R, max_j_max: u32, max_j: u32) -> SMatrixBlock {
    let j_max = rng.random_range(2..=max_j_max);
    let j = rng.random_range(0..=max_j);
    let jp = rng.random_range(0..=max_j);
    let k = rng.random_range(0.5..3.0);
    let fill = rng.random_range(0.3..1.0);
    random_block(rng, k, j, jp, j_max, fill)
}
