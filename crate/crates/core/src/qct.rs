//! Classical estimators from weighted trajectory ensembles.
//!
//! Each record carries a weight w, a total angular momentum J and a
//! scattering angle θ. Two families of estimators are provided, Legendre
//! moment expansions and Gaussian kernel sums, for
//!
//! * the J-partial cross section σ_r(J),
//! * the DCS σ_r(θ),
//! * the joint deflection function, returned as a [`DeflectionMap`] with the
//!   same normalization as the quantum map: 2π ∫ dθ gives σ_r(J) and ∫ dJ gives
//!   σ_r(θ) sin θ.
//!
//! J enters the expansions through the reduced variable
//! x = 2 J(J+1)/(J_max(J_max+1)) − 1 ∈ [−1, 1], whose Jacobian
//! dx/dJ = 2(2J+1)/(J_max(J_max+1)) is the prefactor of σ_r(J).
//!
//! Trajectory file format:
//!
//! ```text
//! # sigma_r 12.5
//! # J_max 40
//! # N_tot 10 2000
//! <w> <J> <theta_deg>
//! ```
//!
//! `# N_tot <J> <count>` lines are optional and feed the discrete opacity.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::AngularGrid;
use crate::legendre::legendre_all;
use crate::map::DeflectionMap;
use crate::observables::AngularCurve;

/// Default Legendre truncation order for both θ and J.
pub const DEFAULT_ORDER: usize = 20;
/// Marginal undershoot (relative to its max) that triggers a Gibbs warning.
pub const GIBBS_THRESHOLD: f64 = 0.02;

/// One trajectory: weight, total angular momentum, scattering angle (radians).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Trajectory {
    pub w: f64,
    pub j: f64,
    pub theta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryEnsemble {
    records: Vec<Trajectory>,
    n_tot_by_j: BTreeMap<u32, u64>,
    sigma_r: f64,
    j_max: f64,
}

impl TrajectoryEnsemble {
    pub fn new(records: Vec<Trajectory>, sigma_r: f64, j_max: f64) -> Result<Self> {
        if !(sigma_r >= 0.0) || !sigma_r.is_finite() {
            return Err(Error::Validation(format!("sigma_r must be finite and ≥ 0, got {sigma_r}")));
        }
        if !(j_max > 0.0) || !j_max.is_finite() {
            return Err(Error::Validation(format!("J_max must be positive, got {j_max}")));
        }
        for (i, r) in records.iter().enumerate() {
            if !(r.w >= 0.0) || !r.w.is_finite() {
                return Err(Error::Validation(format!("record {i}: weight {} is not ≥ 0", r.w)));
            }
            if !(0.0..=j_max).contains(&r.j) {
                return Err(Error::Validation(format!("record {i}: J = {} outside [0, {j_max}]", r.j)));
            }
            if !(0.0..=PI).contains(&r.theta) {
                return Err(Error::Validation(format!("record {i}: θ = {} outside [0, π]", r.theta)));
            }
        }
        Ok(Self {
            records,
            n_tot_by_j: BTreeMap::new(),
            sigma_r,
            j_max,
        })
    }

    /// Attaches the number of trajectories run at each integer J.
    pub fn with_totals(mut self, totals: impl IntoIterator<Item = (u32, u64)>) -> Self {
        self.n_tot_by_j.extend(totals);
        self
    }

    pub fn records(&self) -> &[Trajectory] {
        &self.records
    }

    pub fn n_tot_by_j(&self) -> &BTreeMap<u32, u64> {
        &self.n_tot_by_j
    }

    pub fn sigma_r(&self) -> f64 {
        self.sigma_r
    }

    pub fn j_max(&self) -> f64 {
        self.j_max
    }

    /// S_w = Σ w_i.
    pub fn total_weight(&self) -> f64 {
        self.records.iter().map(|r| r.w).sum()
    }

    /// Same ensemble with every weight multiplied by `factor`.
    pub fn scaled_weights(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.records.iter_mut().for_each(|r| r.w *= factor);
        out
    }

    fn checked_total_weight(&self) -> Result<f64> {
        let s = self.total_weight();
        if s > 0.0 {
            Ok(s)
        } else {
            Err(Error::Domain("ensemble has zero total weight".into()))
        }
    }

    pub fn reduced_variable(&self, j: f64) -> f64 {
        reduced_variable(j, self.j_max)
    }

    /// Writes the trajectory file format; angles in degrees.
    pub fn save<W: Write>(&self, mut out: W) -> Result<()> {
        out.write_all(self.to_text().as_bytes())?;
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# sigma_r {}", self.sigma_r);
        let _ = writeln!(s, "# J_max {}", self.j_max);
        for (j, n) in &self.n_tot_by_j {
            let _ = writeln!(s, "# N_tot {j} {n}");
        }
        for r in &self.records {
            let _ = writeln!(s, "{} {} {}", r.w, r.j, r.theta.to_degrees());
        }
        s
    }
}

/// x = 2 J(J+1)/(J_max(J_max+1)) − 1.
pub fn reduced_variable(j: f64, j_max: f64) -> f64 {
    2.0 * j * (j + 1.0) / (j_max * (j_max + 1.0)) - 1.0
}

/// dx/dJ = 2(2J+1)/(J_max(J_max+1)).
pub fn reduced_jacobian(j: f64, j_max: f64) -> f64 {
    2.0 * (2.0 * j + 1.0) / (j_max * (j_max + 1.0))
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn num<T: std::str::FromStr>(tok: Option<&str>, what: &str, line: usize) -> Result<T> {
    let tok = tok.ok_or_else(|| parse_err(line, format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| parse_err(line, format!("cannot parse {what} from '{tok}'")))
}

pub fn load_trajectories<R: BufRead>(source: R) -> Result<TrajectoryEnsemble> {
    let mut sigma_r = None;
    let mut j_max = None;
    let mut totals = Vec::new();
    let mut records = Vec::new();
    for (idx, line) in source.lines().enumerate() {
        let line = line?;
        let n = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(comment) = trimmed.strip_prefix('#') {
            let mut toks = comment.split_whitespace();
            match toks.next() {
                Some("sigma_r") => sigma_r = Some(num::<f64>(toks.next(), "sigma_r", n)?),
                Some("J_max") => j_max = Some(num::<f64>(toks.next(), "J_max", n)?),
                Some("N_tot") => {
                    let j = num::<u32>(toks.next(), "N_tot J", n)?;
                    let c = num::<u64>(toks.next(), "N_tot count", n)?;
                    totals.push((j, c));
                }
                _ => {}
            }
            continue;
        }
        let mut toks = trimmed.split_whitespace();
        let w = num::<f64>(toks.next(), "weight", n)?;
        let j = num::<f64>(toks.next(), "J", n)?;
        let theta_deg = num::<f64>(toks.next(), "theta", n)?;
        if toks.next().is_some() {
            return Err(parse_err(n, "expected three columns: w J theta_deg"));
        }
        records.push(Trajectory {
            w,
            j,
            theta: theta_deg.to_radians(),
        });
    }
    let sigma_r = sigma_r.ok_or_else(|| parse_err(0, "missing '# sigma_r' header"))?;
    let j_max = j_max.ok_or_else(|| parse_err(0, "missing '# J_max' header"))?;
    Ok(TrajectoryEnsemble::new(records, sigma_r, j_max)?.with_totals(totals))
}

pub fn load_trajectories_str(text: &str) -> Result<TrajectoryEnsemble> {
    load_trajectories(text.as_bytes())
}

/// P_r(J) = S_w(J)/N_tot(J); records are binned to the nearest integer J.
pub fn qct_opacity(ensemble: &TrajectoryEnsemble, j: u32) -> Result<f64> {
    let n_tot = ensemble.n_tot_by_j.get(&j).copied().unwrap_or(0);
    if n_tot == 0 {
        return Err(Error::Domain(format!("opacity undefined at J = {j}: no trajectories run")));
    }
    let sw: f64 = ensemble
        .records
        .iter()
        .filter(|r| r.j.round() as u32 == j)
        .map(|r| r.w)
        .sum();
    Ok(sw / n_tot as f64)
}

/// Legendre moment coefficients of an ensemble.
///
/// `a[m]` expands the angular density in P_m(cos θ), `b[n]` the J density in
/// P_n(x), and `alpha[m][n]` the joint density.
#[derive(Debug, Clone, PartialEq)]
pub struct LegendreDF {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub alpha: Vec<Vec<f64>>,
    pub sigma_r: f64,
    pub j_max: f64,
}

impl LegendreDF {
    /// Weighted moments up to orders M (θ) and N (J).
    pub fn fit(ensemble: &TrajectoryEnsemble, m_order: usize, n_order: usize) -> Result<Self> {
        let sw = ensemble.checked_total_weight()?;
        let (m1, n1) = (m_order + 1, n_order + 1);
        let j_max = ensemble.j_max;
        let sums = ensemble
            .records
            .par_iter()
            .fold(
                || vec![0.0; m1 * n1],
                |mut acc, r| {
                    let pm = legendre_all(m_order, r.theta.cos());
                    let pn = legendre_all(n_order, reduced_variable(r.j, j_max));
                    for (m, &p) in pm.iter().enumerate() {
                        for (n, &q) in pn.iter().enumerate() {
                            acc[m * n1 + n] += r.w * p * q;
                        }
                    }
                    acc
                },
            )
            .reduce(
                || vec![0.0; m1 * n1],
                |mut a, b| {
                    a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
                    a
                },
            );
        let mean = |m: usize, n: usize| if m == 0 && n == 0 { 1.0 } else { sums[m * n1 + n] / sw };
        let alpha = (0..m1)
            .map(|m| {
                (0..n1)
                    .map(|n| (2 * m + 1) as f64 * (2 * n + 1) as f64 / 4.0 * mean(m, n))
                    .collect()
            })
            .collect();
        let a = (0..m1).map(|m| (2 * m + 1) as f64 / 2.0 * mean(m, 0)).collect();
        let b = (0..n1).map(|n| (2 * n + 1) as f64 / 2.0 * mean(0, n)).collect();
        Ok(Self {
            a,
            b,
            alpha,
            sigma_r: ensemble.sigma_r,
            j_max,
        })
    }

    /// σ_r(J) = σ_r · dx/dJ · Σ_n b_n P_n(x).
    pub fn sigma_j(&self, j: f64) -> f64 {
        let p = legendre_all(self.b.len() - 1, reduced_variable(j, self.j_max));
        let series: f64 = self.b.iter().zip(&p).map(|(b, p)| b * p).sum();
        self.sigma_r * reduced_jacobian(j, self.j_max) * series
    }

    /// σ_r(θ) = (σ_r/2π) Σ_m a_m P_m(cos θ).
    pub fn dcs(&self, theta: f64) -> f64 {
        let p = legendre_all(self.a.len() - 1, theta.cos());
        let series: f64 = self.a.iter().zip(&p).map(|(a, p)| a * p).sum();
        self.sigma_r / (2.0 * PI) * series
    }

    /// σ_r(θ, J) sin θ from the double expansion.
    pub fn joint(&self, theta: f64, j: f64) -> f64 {
        let pm = legendre_all(self.alpha.len() - 1, theta.cos());
        let pn = legendre_all(self.b.len() - 1, reduced_variable(j, self.j_max));
        let mut series = 0.0;
        for (row, p) in self.alpha.iter().zip(&pm) {
            series += p * row.iter().zip(&pn).map(|(a, q)| a * q).sum::<f64>();
        }
        self.sigma_r / (2.0 * PI) * reduced_jacobian(j, self.j_max) * theta.sin() * series
    }

    /// True when either reconstructed 1-D density drops below −2% of its
    /// maximum on a dense probe grid (Gibbs undershoot of a truncated series).
    pub fn gibbs_warning(&self) -> bool {
        let x_density: Vec<f64> = (0..=400)
            .map(|i| {
                let x = -1.0 + i as f64 / 200.0;
                let p = legendre_all(self.b.len() - 1, x);
                self.b.iter().zip(&p).map(|(b, p)| b * p).sum()
            })
            .collect();
        let t_density: Vec<f64> = (0..=400).map(|i| self.dcs(PI * i as f64 / 400.0)).collect();
        undershoots(&x_density) || undershoots(&t_density)
    }
}

fn undershoots(v: &[f64]) -> bool {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = v.iter().copied().fold(f64::INFINITY, f64::min);
    max > 0.0 && min < -GIBBS_THRESHOLD * max
}

pub fn qct_sigma_j_legendre(ensemble: &TrajectoryEnsemble, n_order: usize) -> Result<LegendreDF> {
    LegendreDF::fit(ensemble, 0, n_order)
}

pub fn qct_dcs_legendre(ensemble: &TrajectoryEnsemble, m_order: usize, grid: &AngularGrid) -> Result<AngularCurve> {
    let fit = LegendreDF::fit(ensemble, m_order, 0)?;
    Ok(AngularCurve {
        grid: grid.clone(),
        values: grid.thetas().iter().map(|&t| fit.dcs(t)).collect(),
    })
}

pub fn qct_df_legendre(
    ensemble: &TrajectoryEnsemble,
    m_order: usize,
    n_order: usize,
    grid: &AngularGrid,
    j_values: Vec<f64>,
) -> Result<DeflectionMap> {
    let fit = LegendreDF::fit(ensemble, m_order, n_order)?;
    let values = grid
        .thetas()
        .par_iter()
        .enumerate()
        .flat_map_iter(|(i, &t)| {
            let fit = &fit;
            let zero = grid.is_endpoint(i);
            j_values
                .iter()
                .map(move |&j| if zero { 0.0 } else { fit.joint(t, j) })
        })
        .collect();
    DeflectionMap::new(grid.clone(), j_values, values)
}

/// Gaussian kernel widths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelConfig {
    /// Width s_J in units of J.
    pub s_j: f64,
    /// Width s_θ in radians.
    pub s_theta: f64,
    /// Divide each record's kernel by its mass inside the domain.
    pub renormalize: bool,
}

impl KernelConfig {
    pub fn new(s_j: f64, s_theta: f64) -> Result<Self> {
        if !(s_j > 0.0) || !(s_theta > 0.0) {
            return Err(Error::Domain(format!(
                "kernel widths must be positive, got s_J={s_j}, s_θ={s_theta}"
            )));
        }
        Ok(Self {
            s_j,
            s_theta,
            renormalize: false,
        })
    }

    pub fn with_renormalize(mut self, on: bool) -> Self {
        self.renormalize = on;
        self
    }

    /// Default s_J: twice the mean nearest-neighbour spacing of the distinct
    /// record J values, floored at twice the spacing of the evaluation J grid.
    pub fn default_s_j(ensemble: &TrajectoryEnsemble, j_grid_step: f64) -> f64 {
        let mut js: Vec<f64> = ensemble.records.iter().map(|r| r.j).collect();
        js.sort_by(f64::total_cmp);
        js.dedup();
        let spacing = if js.len() >= 2 {
            (js[js.len() - 1] - js[0]) / (js.len() - 1) as f64
        } else {
            0.0
        };
        2.0 * spacing.max(j_grid_step)
    }
}

/// Width reported two ways: s ln 2 (the s = Δ/ln 2 reading) and 2√(ln 2) s.
pub fn fwhm(s: f64) -> (f64, f64) {
    let ln2 = std::f64::consts::LN_2;
    (s * ln2, 2.0 * ln2.sqrt() * s)
}

/// G(u) = exp(−u²/s²)/(s√π).
pub fn gaussian_kernel(u: f64, s: f64) -> f64 {
    (-(u / s).powi(2)).exp() / (s * PI.sqrt())
}

/// ∫_lo^hi G(u − c) du.
fn kernel_mass(center: f64, s: f64, lo: f64, hi: f64) -> f64 {
    0.5 * (libm::erf((hi - center) / s) - libm::erf((lo - center) / s))
}

/// Kernel estimate of σ_r(J).
#[derive(Debug, Clone)]
pub struct GaussianSigmaJ {
    centers: Vec<(f64, f64)>,
    s_j: f64,
    sigma_r: f64,
}

impl GaussianSigmaJ {
    pub fn eval(&self, j: f64) -> f64 {
        self.sigma_r * self.centers.iter().map(|&(w, c)| w * gaussian_kernel(j - c, self.s_j)).sum::<f64>()
    }
}

/// Per-record (w/S_w, renormalization) factors for one axis.
fn record_factors(ensemble: &TrajectoryEnsemble, sw: f64, renorm: Option<(f64, f64, f64)>, pick: fn(&Trajectory) -> f64) -> Vec<(f64, f64)> {
    ensemble
        .records
        .iter()
        .map(|r| {
            let c = pick(r);
            let scale = match renorm {
                Some((s, lo, hi)) => 1.0 / kernel_mass(c, s, lo, hi),
                None => 1.0,
            };
            (r.w / sw * scale, c)
        })
        .collect()
}

pub fn qct_sigma_j_gaussian(ensemble: &TrajectoryEnsemble, config: KernelConfig) -> Result<GaussianSigmaJ> {
    let sw = ensemble.checked_total_weight()?;
    let renorm = config.renormalize.then_some((config.s_j, 0.0, ensemble.j_max));
    Ok(GaussianSigmaJ {
        centers: record_factors(ensemble, sw, renorm, |r| r.j),
        s_j: config.s_j,
        sigma_r: ensemble.sigma_r,
    })
}

/// (σ_r/2π) S_w⁻¹ Σ w_i G(J − J_i) G(θ − θ_i) on grid × j_values.
pub fn qct_df_gaussian(
    ensemble: &TrajectoryEnsemble,
    config: KernelConfig,
    grid: &AngularGrid,
    j_values: Vec<f64>,
) -> Result<DeflectionMap> {
    let sw = ensemble.checked_total_weight()?;
    let scales: Vec<f64> = ensemble
        .records
        .iter()
        .map(|r| {
            if config.renormalize {
                1.0 / (kernel_mass(r.j, config.s_j, 0.0, ensemble.j_max)
                    * kernel_mass(r.theta, config.s_theta, 0.0, PI))
            } else {
                1.0
            }
        })
        .collect();
    // Kernel values along J for every record, shared across θ rows.
    let gj: Vec<Vec<f64>> = ensemble
        .records
        .iter()
        .map(|r| j_values.iter().map(|&j| gaussian_kernel(j - r.j, config.s_j)).collect())
        .collect();
    let pref = ensemble.sigma_r / (2.0 * PI) / sw;
    let nj = j_values.len();
    let cutoff = 8.0 * config.s_theta;
    let values = grid
        .thetas()
        .par_iter()
        .flat_map_iter(|&t| {
            let mut row = vec![0.0; nj];
            for ((r, g), scale) in ensemble.records.iter().zip(&gj).zip(&scales) {
                let u = t - r.theta;
                if u.abs() > cutoff {
                    continue;
                }
                let f = r.w * scale * gaussian_kernel(u, config.s_theta);
                row.iter_mut().zip(g).for_each(|(v, gj)| *v += f * gj);
            }
            row.into_iter().map(move |v| v * pref)
        })
        .collect();
    DeflectionMap::new(grid.clone(), j_values, values)
}

/// J values with J(J+1) = ξ J_max(J_max+1), ξ uniform on [0, 1].
pub fn sample_ell_continuous(j_max: f64, count: usize, seed: u64) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(Error::Domain("sample count must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count).map(|_| ell_from_xi(rng.random::<f64>(), j_max)).collect())
}

/// Positive root of J(J+1) = ξ J_max(J_max+1).
pub fn ell_from_xi(xi: f64, j_max: f64) -> f64 {
    let target = xi * j_max * (j_max + 1.0);
    ((-1.0 + (1.0 + 4.0 * target).sqrt()) / 2.0).clamp(0.0, j_max)
}
