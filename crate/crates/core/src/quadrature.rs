//! Quadrature over θ for sampled curves.
//!
//! Everything integrated over θ in this crate carries a sin θ factor, so the
//! integrands vanish at 0 and π. On a full uniform grid such a band-limited
//! integrand is a finite sine series, and [`ThetaQuadrature`] uses the rule
//! that integrates sin(mθ) exactly for every m below the number of intervals.
//! Other grids fall back to composite Simpson (uniform, even interval count)
//! or the composite trapezoid rule.

use std::f64::consts::PI;

use crate::grid::AngularGrid;

/// Which rule a [`ThetaQuadrature`] applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    SineSeries,
    Simpson,
    Trapezoid,
}

/// Precomputed weights for ∫₀^π f(θ) dθ on a fixed grid.
#[derive(Debug, Clone)]
pub struct ThetaQuadrature {
    rule: Rule,
    weights: Vec<f64>,
}

impl ThetaQuadrature {
    pub fn new(grid: &AngularGrid) -> Self {
        if grid.is_full_uniform() && grid.len() >= 3 {
            Self {
                rule: Rule::SineSeries,
                weights: sine_series_weights(grid.len() - 1),
            }
        } else {
            Self::composite(grid)
        }
    }

    /// Composite Simpson when the grid allows it, trapezoid otherwise.
    pub fn composite(grid: &AngularGrid) -> Self {
        let t = grid.thetas();
        let n = t.len();
        if let Some(h) = grid.uniform_step() {
            if n >= 3 && (n - 1).is_multiple_of(2) {
                let mut weights = vec![0.0; n];
                for (i, w) in weights.iter_mut().enumerate() {
                    let c = if i == 0 || i == n - 1 {
                        1.0
                    } else if i % 2 == 1 {
                        4.0
                    } else {
                        2.0
                    };
                    *w = c * h / 3.0;
                }
                return Self { rule: Rule::Simpson, weights };
            }
        }
        Self {
            rule: Rule::Trapezoid,
            weights: trapezoid_weights(t),
        }
    }

    pub fn rule(&self) -> Rule {
        self.rule
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn integrate(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.weights.len());
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }
}

pub fn trapezoid_weights(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut w = vec![0.0; n];
    for i in 0..n.saturating_sub(1) {
        let h = x[i + 1] - x[i];
        w[i] += 0.5 * h;
        w[i + 1] += 0.5 * h;
    }
    w
}

pub fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    trapezoid_weights(x).iter().zip(y).map(|(w, v)| w * v).sum()
}

/// Composite Simpson on an arbitrary uniform abscissa with an even number of
/// intervals; falls back to the trapezoid rule otherwise.
pub fn simpson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len();
    if n < 3 || !(n - 1).is_multiple_of(2) {
        return trapezoid(x, y);
    }
    let h = (x[n - 1] - x[0]) / (n - 1) as f64;
    let inner: f64 = y[1..n - 1]
        .iter()
        .enumerate()
        .map(|(i, v)| if i % 2 == 0 { 4.0 } else { 2.0 } * v)
        .sum();
    (y[0] + y[n - 1] + inner) * h / 3.0
}

/// Weights for θ_i = iπ/N, exact for Σ_{m<N} b_m sin(mθ).
fn sine_series_weights(intervals: usize) -> Vec<f64> {
    let n = intervals;
    // sin(kπ/N) for k in 0..2N, indexed modulo 2N.
    let table: Vec<f64> = (0..2 * n).map(|k| (k as f64 * PI / n as f64).sin()).collect();
    let mut w = vec![0.0; n + 1];
    for (i, wi) in w.iter_mut().enumerate().take(n).skip(1) {
        let mut acc = 0.0;
        let mut m = 1;
        while m < n {
            acc += table[(m * i) % (2 * n)] * 2.0 / m as f64;
            m += 2;
        }
        *wi = acc * 2.0 / n as f64;
    }
    w
}
