//! Angular sampling grids.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Ordered scattering angles in `[0, π]`, radians.
#[derive(Debug, Clone, PartialEq)]
pub struct AngularGrid {
    thetas: Vec<f64>,
}

impl AngularGrid {
    pub fn new(thetas: Vec<f64>) -> Result<Self> {
        if thetas.len() < 2 {
            return Err(Error::Domain("angular grid needs at least two points".into()));
        }
        if thetas.iter().any(|t| !(0.0..=PI).contains(t)) {
            return Err(Error::Domain("angular grid points must lie in [0, π]".into()));
        }
        if thetas.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Domain("angular grid must be strictly increasing".into()));
        }
        Ok(Self { thetas })
    }

    /// `n` equally spaced points from 0 to π inclusive.
    pub fn uniform(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain("angular grid needs at least two points".into()));
        }
        let step = PI / (n - 1) as f64;
        let mut thetas: Vec<f64> = (0..n).map(|i| i as f64 * step).collect();
        thetas[n - 1] = PI;
        Ok(Self { thetas })
    }

    /// Inclusive 0..180° grid with the given spacing; the spacing must divide 180°.
    pub fn from_step_degrees(step_deg: f64) -> Result<Self> {
        if !(step_deg > 0.0) || !step_deg.is_finite() {
            return Err(Error::Domain(format!("grid spacing must be positive, got {step_deg}")));
        }
        let intervals = (180.0 / step_deg).round();
        if intervals < 1.0 || (intervals * step_deg - 180.0).abs() > 1e-9 {
            return Err(Error::Domain(format!("grid spacing {step_deg}° does not divide 180°")));
        }
        Self::uniform(intervals as usize + 1)
    }

    /// 721 points, 0.25° apart, endpoints included.
    pub fn default_grid() -> Self {
        Self::uniform(721).expect("static grid")
    }

    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    pub fn len(&self) -> usize {
        self.thetas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thetas.is_empty()
    }

    /// sin θ at point `i`, pinned to exactly zero at θ = 0 and θ = π.
    pub fn sin_theta(&self, i: usize) -> f64 {
        let t = self.thetas[i];
        if t == 0.0 || t == PI {
            0.0
        } else {
            t.sin()
        }
    }

    pub fn is_endpoint(&self, i: usize) -> bool {
        let t = self.thetas[i];
        t == 0.0 || t == PI
    }

    /// Spacing if the grid is uniform (relative tolerance 1e-9), else `None`.
    pub fn uniform_step(&self) -> Option<f64> {
        let n = self.thetas.len();
        let h = (self.thetas[n - 1] - self.thetas[0]) / (n - 1) as f64;
        let uniform = self
            .thetas
            .windows(2)
            .all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h);
        uniform.then_some(h)
    }

    /// Uniform and spanning the full `[0, π]` interval.
    pub fn is_full_uniform(&self) -> bool {
        self.uniform_step().is_some() && self.thetas[0] == 0.0 && *self.thetas.last().unwrap() == PI
    }
}

/// Inclusive range of total angular momenta `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct JWindow {
    pub lo: u32,
    pub hi: u32,
}

impl JWindow {
    pub fn new(lo: u32, hi: u32) -> Result<Self> {
        if lo > hi {
            return Err(Error::Domain(format!("J window [{lo}, {hi}] is reversed")));
        }
        Ok(Self { lo, hi })
    }

    pub fn full(j_max: u32) -> Self {
        Self { lo: 0, hi: j_max }
    }

    pub fn contains(&self, j: u32) -> bool {
        (self.lo..=self.hi).contains(&j)
    }

    pub(crate) fn check_within(&self, j_max: u32) -> Result<()> {
        if self.hi > j_max {
            return Err(Error::Domain(format!(
                "J window [{}, {}] exceeds J_max = {j_max}",
                self.lo, self.hi
            )));
        }
        Ok(())
    }
}
