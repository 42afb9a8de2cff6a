//! Real-valued maps over (θ, J).

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::AngularGrid;
use crate::quadrature::ThetaQuadrature;

/// Values on a θ × J grid, stored θ-major. Entries may be negative.
#[derive(Debug, Clone, PartialEq)]
pub struct DeflectionMap {
    grid: AngularGrid,
    j_values: Vec<f64>,
    values: Vec<f64>,
}

impl DeflectionMap {
    pub fn new(grid: AngularGrid, j_values: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if j_values.is_empty() {
            return Err(Error::Domain("map needs at least one J value".into()));
        }
        if j_values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Domain("map J values must be strictly increasing".into()));
        }
        if values.len() != grid.len() * j_values.len() {
            return Err(Error::Domain(format!(
                "map has {} values for a {}×{} grid",
                values.len(),
                grid.len(),
                j_values.len()
            )));
        }
        Ok(Self { grid, j_values, values })
    }

    /// Integer J axis 0..=j_max.
    pub fn integer_j_axis(j_max: u32) -> Vec<f64> {
        (0..=j_max).map(f64::from).collect()
    }

    pub fn grid(&self) -> &AngularGrid {
        &self.grid
    }

    pub fn j_values(&self) -> &[f64] {
        &self.j_values
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn n_theta(&self) -> usize {
        self.grid.len()
    }

    pub fn n_j(&self) -> usize {
        self.j_values.len()
    }

    pub fn get(&self, theta_idx: usize, j_idx: usize) -> f64 {
        self.values[theta_idx * self.j_values.len() + j_idx]
    }

    /// Values at fixed θ over all J.
    pub fn row(&self, theta_idx: usize) -> &[f64] {
        let n = self.j_values.len();
        &self.values[theta_idx * n..(theta_idx + 1) * n]
    }

    /// Values at fixed J over all θ.
    pub fn column(&self, j_idx: usize) -> Vec<f64> {
        (0..self.grid.len()).map(|i| self.get(i, j_idx)).collect()
    }

    /// Index of the column whose J equals `j` (to 1e-9).
    pub fn j_index(&self, j: f64) -> Option<usize> {
        self.j_values.iter().position(|&v| (v - j).abs() <= 1e-9)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn map_values(&self, f: impl Fn(usize, usize, f64) -> f64) -> Self {
        let n = self.j_values.len();
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(idx, &v)| f(idx / n, idx % n, v))
            .collect();
        Self {
            grid: self.grid.clone(),
            j_values: self.j_values.clone(),
            values,
        }
    }

    /// 2π ∫ column(J) dθ for every column, with one shared set of weights.
    pub fn theta_integrals(&self) -> Vec<f64> {
        let q = ThetaQuadrature::new(&self.grid);
        (0..self.n_j())
            .map(|jdx| 2.0 * PI * q.integrate(&self.column(jdx)))
            .collect()
    }

    /// Σ_J over each θ row.
    pub fn j_sums(&self) -> Vec<f64> {
        (0..self.n_theta()).map(|i| self.row(i).iter().sum()).collect()
    }

    /// Divides by sin θ; rows where sin θ = 0 are set to zero and their
    /// indices returned.
    pub fn divided_by_sin_theta(&self) -> (Self, Vec<usize>) {
        let endpoints: Vec<usize> = (0..self.n_theta()).filter(|&i| self.grid.is_endpoint(i)).collect();
        let out = self.map_values(|i, _, v| {
            let s = self.grid.sin_theta(i);
            if s == 0.0 {
                0.0
            } else {
                v / s
            }
        });
        (out, endpoints)
    }

    /// Number of 4-connected components of {value ≥ frac · max}.
    pub fn superlevel_components(&self, frac: f64) -> usize {
        let (nt, nj) = (self.n_theta(), self.n_j());
        let threshold = frac * self.max();
        let inside: Vec<bool> = self.values.iter().map(|&v| v >= threshold).collect();
        let mut seen = vec![false; inside.len()];
        let mut count = 0;
        let mut stack = Vec::new();
        for start in 0..inside.len() {
            if !inside[start] || seen[start] {
                continue;
            }
            count += 1;
            seen[start] = true;
            stack.push(start);
            while let Some(idx) = stack.pop() {
                let (i, j) = (idx / nj, idx % nj);
                let mut visit = |ni: usize, nj_: usize| {
                    let n = ni * nj + nj_;
                    if inside[n] && !seen[n] {
                        seen[n] = true;
                        stack.push(n);
                    }
                };
                if i > 0 {
                    visit(i - 1, j);
                }
                if i + 1 < nt {
                    visit(i + 1, j);
                }
                if j > 0 {
                    visit(i, j - 1);
                }
                if j + 1 < nj {
                    visit(i, j + 1);
                }
            }
        }
        count
    }

    /// Separable convolution with normalized Gaussians exp(-u²/s²) along J
    /// (width in J units) and θ (radians). Kernels are truncated at 6 s and
    /// not renormalized near the edges, so intensity leaks out only there.
    /// Both axes must be uniformly spaced when the width on them is nonzero.
    pub fn smoothed(&self, s_j: f64, s_theta: f64) -> Result<Self> {
        if !(s_j >= 0.0) || !(s_theta >= 0.0) {
            return Err(Error::Domain(format!(
                "smoothing widths must be nonnegative, got s_J={s_j}, s_θ={s_theta}"
            )));
        }
        let (nt, nj) = (self.n_theta(), self.n_j());
        let mut values = self.values.clone();

        if s_j > 0.0 && nj > 1 {
            let dj = uniform_spacing(&self.j_values)
                .ok_or_else(|| Error::Domain("J smoothing needs a uniform J axis".into()))?;
            let kernel = discrete_gaussian(s_j / dj);
            let mut out = vec![0.0; values.len()];
            for i in 0..nt {
                convolve(&values[i * nj..(i + 1) * nj], &kernel, &mut out[i * nj..(i + 1) * nj]);
            }
            values = out;
        }

        if s_theta > 0.0 {
            let h = self
                .grid
                .uniform_step()
                .ok_or_else(|| Error::Domain("θ smoothing needs a uniform angular grid".into()))?;
            let kernel = discrete_gaussian(s_theta / h);
            let mut col = vec![0.0; nt];
            let mut smoothed = vec![0.0; nt];
            for j in 0..nj {
                for i in 0..nt {
                    col[i] = values[i * nj + j];
                }
                convolve(&col, &kernel, &mut smoothed);
                for i in 0..nt {
                    values[i * nj + j] = smoothed[i];
                }
            }
        }

        Ok(Self {
            grid: self.grid.clone(),
            j_values: self.j_values.clone(),
            values,
        })
    }
}

fn uniform_spacing(x: &[f64]) -> Option<f64> {
    let n = x.len();
    let h = (x[n - 1] - x[0]) / (n - 1) as f64;
    x.windows(2)
        .all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h.abs())
        .then_some(h)
}

/// Symmetric weights ∝ exp(-(k/width)²) for |k| ≤ ceil(6·width), summing to 1.
fn discrete_gaussian(width_in_steps: f64) -> Vec<f64> {
    let half = (6.0 * width_in_steps).ceil() as usize;
    let mut w: Vec<f64> = (0..=2 * half)
        .map(|i| {
            let k = i as f64 - half as f64;
            (-(k / width_in_steps).powi(2)).exp()
        })
        .collect();
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= total);
    w
}

fn convolve(input: &[f64], kernel: &[f64], out: &mut [f64]) {
    let half = (kernel.len() / 2) as isize;
    let n = input.len() as isize;
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (k, w) in kernel.iter().enumerate() {
            let src = i as isize + k as isize - half;
            if (0..n).contains(&src) {
                acc += w * input[src as usize];
            }
        }
        *o = acc;
    }
}
