mod support;

use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use qdeflect::quadrature::trapezoid;
use qdeflect::{
    dcs, integral_cross_section, integrate_over_theta, partial_cross_section, partial_dcs, qmdf_helicity_map,
    qmdf_map, random_phase_map, smooth_map, sum_over_j, AngularGrid, ChannelHeader, DeflectionMap, JWindow,
    SMatrixBlock,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use support::blocks::{random_block, random_shape_block};

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(f64::MIN_POSITIVE)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn j_sum_recovers_dcs(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let block = random_shape_block(&mut rng, 40, 2);
        let grid = AngularGrid::uniform(181).unwrap();
        let map = qmdf_map(&block, &grid);
        let d = dcs(&block, &grid);
        for (i, s) in map.j_sums().iter().enumerate() {
            let expect = d.values[i] * grid.sin_theta(i);
            if grid.is_endpoint(i) {
                prop_assert_eq!(*s, 0.0);
            } else {
                prop_assert!(rel_close(*s, expect, 1e-12), "θ index {}: {} vs {}", i, s, expect);
            }
            prop_assert!(*s >= 0.0);
        }
    }

    #[test]
    fn theta_integral_recovers_partial_cross_sections(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let block = random_shape_block(&mut rng, 30, 2);
        let map = qmdf_map(&block, &AngularGrid::uniform(401).unwrap());
        let mut total = 0.0;
        for j in 0..=block.j_max() {
            let q = integrate_over_theta(&map, j).unwrap();
            let expect = partial_cross_section(&block, j).unwrap();
            prop_assert!(rel_close(q, expect, 1e-9), "J={}: {} vs {}", j, q, expect);
            total += q;
        }
        prop_assert!(rel_close(total, integral_cross_section(&block), 1e-9));
    }

    #[test]
    fn helicity_maps_sum_to_full_map(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let block = random_block(&mut rng, 1.3, 1, 2, 12, 0.7);
        let grid = AngularGrid::uniform(91).unwrap();
        let full = qmdf_map(&block, &grid);
        let mut acc = vec![0.0; full.values().len()];
        for mp in -2..=2 {
            let m = qmdf_helicity_map(&block, mp, &grid).unwrap();
            acc.iter_mut().zip(m.values()).for_each(|(a, v)| *a += v);
        }
        let scale = full.max_abs();
        for (a, f) in acc.iter().zip(full.values()) {
            prop_assert!((a - f).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn windows_are_additive(seed in any::<u64>(), split in 0u32..20) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let block = random_block(&mut rng, 1.0, 0, 1, 20, 0.8);
        let grid = AngularGrid::uniform(121).unwrap();
        let map = qmdf_map(&block, &grid);
        let lo = sum_over_j(&map, JWindow::new(0, split).unwrap()).unwrap();
        let hi = sum_over_j(&map, JWindow::new(split + 1, 20).unwrap()).unwrap();
        let full = sum_over_j(&map, JWindow::full(20)).unwrap();
        let scale = full.max_abs();
        for i in 0..grid.len() {
            prop_assert!((lo.values[i] + hi.values[i] - full.values[i]).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn random_phase_map_is_nonnegative_and_matches_single_window_dcs(seed in any::<u64>(), j in 0u32..15) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let block = random_block(&mut rng, 0.8, 2, 1, 15, 0.6);
        let grid = AngularGrid::uniform(73).unwrap();
        let rp = random_phase_map(&block, &grid);
        prop_assert!(rp.values().iter().all(|&v| v >= 0.0));
        let single = partial_dcs(&block, JWindow::new(j, j).unwrap(), &grid).unwrap();
        for i in 1..grid.len() - 1 {
            let expect = rp.get(i, j as usize) / grid.sin_theta(i);
            prop_assert!((single.values[i] - expect).abs() <= 1e-12 * expect.abs().max(1e-300) + 1e-300);
        }
    }

    #[test]
    fn full_window_partial_dcs_is_dcs(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let block = random_shape_block(&mut rng, 25, 2);
        let grid = AngularGrid::uniform(91).unwrap();
        let p = partial_dcs(&block, JWindow::full(block.j_max()), &grid).unwrap();
        prop_assert_eq!(p, dcs(&block, &grid));
    }

    #[test]
    fn smoothing_conserves_interior_mass(seed in any::<u64>(), sj in 0.3f64..2.5, st_deg in 0.2f64..3.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        use rand::Rng;
        let grid = AngularGrid::uniform(361).unwrap();
        let js = DeflectionMap::integer_j_axis(60);
        // Support kept well inside both axes.
        let values: Vec<f64> = (0..grid.len())
            .flat_map(|i| {
                let t = grid.thetas()[i];
                let row: Vec<f64> = (0..=60)
                    .map(|j| if (60..300).contains(&i) && (15..45).contains(&j) { rng.random_range(-1.0..1.0) * t.sin() } else { 0.0 })
                    .collect();
                row
            })
            .collect();
        let map = DeflectionMap::new(grid, js, values).unwrap();
        // Trapezoid weights are uniform away from the ends, which a normalized
        // discrete kernel preserves exactly.
        let total = |m: &DeflectionMap| -> f64 {
            (0..m.n_j()).map(|j| trapezoid(m.grid().thetas(), &m.column(j))).sum()
        };
        let smoothed = smooth_map(&map, sj, st_deg.to_radians()).unwrap();
        let scale: f64 = map.values().iter().map(|v| v.abs()).sum::<f64>() * PI / 360.0;
        prop_assert!((total(&smoothed) - total(&map)).abs() <= 1e-9 * scale);
    }
}

fn two_wave() -> SMatrixBlock {
    let one = Complex64::new(1.0, 0.0);
    SMatrixBlock::new(ChannelHeader::new(1.0, 0, 0, 1), [(0, 0, 0, one), (1, 0, 0, one)]).unwrap()
}

#[test]
fn two_wave_block_has_negative_entry_with_positive_marginal() {
    let grid = AngularGrid::new(vec![0.0, 2.0 * PI / 3.0, PI]).unwrap();
    let map = qmdf_map(&two_wave(), &grid);
    let s = (2.0 * PI / 3.0).sin();
    assert!((map.get(1, 0) - s * (0.25 - 0.375)).abs() < 1e-12);
    assert!((map.get(1, 0) + 0.108_253_175_473_054_8).abs() < 1e-12);
    assert!((map.get(1, 1) - 0.162_379_763_209_582_2).abs() < 1e-12);
    assert!((map.j_sums()[1] - 0.054_126_587_736_527_4).abs() < 1e-12);
    let rp = random_phase_map(&two_wave(), &grid);
    assert!((rp.get(1, 0) - 0.216_506_350_946_109_7).abs() < 1e-12);
}

#[test]
fn partial_dcs_windows_are_not_additive() {
    let one = Complex64::new(1.0, 0.0);
    let block = SMatrixBlock::new(
        ChannelHeader::new(1.0, 0, 0, 10),
        (0..=10).map(|j| (j, 0, 0, if j < 5 { one } else { Complex64::from_polar(1.0, 0.8) })),
    )
    .unwrap();
    let grid = AngularGrid::uniform(181).unwrap();
    let a = partial_dcs(&block, JWindow::new(0, 4).unwrap(), &grid).unwrap();
    let b = partial_dcs(&block, JWindow::new(5, 10).unwrap(), &grid).unwrap();
    let full = dcs(&block, &grid);
    let worst = (0..grid.len())
        .map(|i| (a.values[i] + b.values[i] - full.values[i]).abs())
        .fold(0.0, f64::max);
    assert!(worst > 1e-6);
}

#[test]
fn single_wave_map_equals_random_phase() {
    let block = SMatrixBlock::new(ChannelHeader::new(1.0, 0, 0, 3), [(3, 0, 0, Complex64::new(0.0, 0.5))]).unwrap();
    let grid = AngularGrid::uniform(61).unwrap();
    assert_eq!(qmdf_map(&block, &grid), random_phase_map(&block, &grid));
}

#[test]
fn smoothing_spreads_a_delta_column_with_unit_weights() {
    let grid = AngularGrid::uniform(41).unwrap();
    let mut values = vec![0.0; 41 * 31];
    values[20 * 31 + 15] = 1.0;
    let map = DeflectionMap::new(grid, DeflectionMap::integer_j_axis(30), values).unwrap();
    let s = smooth_map(&map, 1.0, 0.0).unwrap();
    assert!((s.row(20).iter().sum::<f64>() - 1.0).abs() < 1e-14);
    assert!(smooth_map(&map, -0.5, 0.0).is_err());
}
