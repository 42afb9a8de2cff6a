//! `qdeflect`: CSV front end for the qdeflect library.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qdeflect::cqdf::UnwrapMode;
use qdeflect::qct::{self, KernelConfig, LegendreDF, TrajectoryEnsemble};
use qdeflect::qmdf::{DEFAULT_SMOOTH_J, DEFAULT_SMOOTH_THETA};
use qdeflect::synth::{self, ModelSpec};
use qdeflect::{AngularCurve, AngularGrid, DeflectionMap, Error, JWindow, SMatrixBlock};
use sha2::{Digest, Sha256};

#[derive(Parser, Debug)]
#[command(name = "qdeflect", version, about = "Quantum and classical deflection functions as CSV")]
struct Cli {
    /// Output file (standard output if omitted).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct GridArgs {
    /// Angular grid spacing in degrees; must divide 180.
    #[arg(long = "grid-deg", default_value_t = 0.25)]
    grid_deg: f64,
}

impl GridArgs {
    fn grid(&self) -> Result<AngularGrid, Error> {
        AngularGrid::from_step_degrees(self.grid_deg)
    }
}

#[derive(Args, Debug, Clone)]
struct MapArgs {
    #[command(flatten)]
    grid: GridArgs,
    /// Apply the default presentation smoothing (s_J = 1.5, s_θ = 1°).
    #[arg(long)]
    smooth: bool,
    /// Gaussian smoothing width along J.
    #[arg(long = "smooth-j")]
    smooth_j: Option<f64>,
    /// Gaussian smoothing width along θ, degrees.
    #[arg(long = "smooth-theta-deg")]
    smooth_theta_deg: Option<f64>,
    /// Emit Q_r/sin θ; rows at θ = 0 and 180° are written as 0.
    #[arg(long = "no-sin-theta")]
    no_sin_theta: bool,
}

impl MapArgs {
    fn widths(&self) -> (f64, f64) {
        let (dj, dt) = if self.smooth {
            (DEFAULT_SMOOTH_J, DEFAULT_SMOOTH_THETA)
        } else {
            (0.0, 0.0)
        };
        (
            self.smooth_j.unwrap_or(dj),
            self.smooth_theta_deg.map_or(dt, f64::to_radians),
        )
    }

    fn describe(&self) -> String {
        let (sj, st) = self.widths();
        format!(
            "grid_deg={} smooth_j={} smooth_theta_deg={} no_sin_theta={}",
            self.grid.grid_deg,
            sj,
            st.to_degrees(),
            self.no_sin_theta
        )
    }
}

#[derive(Args, Debug, Clone)]
struct WindowArgs {
    #[arg(long)]
    jmin: Option<u32>,
    #[arg(long)]
    jmax: Option<u32>,
}

impl WindowArgs {
    fn window(&self, j_max: u32) -> Result<JWindow, Error> {
        JWindow::new(self.jmin.unwrap_or(0), self.jmax.unwrap_or(j_max))
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Unwrap {
    TwoSided,
    OneSided,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Method {
    Legendre,
    Gaussian,
}

#[derive(Args, Debug, Clone)]
struct QctArgs {
    #[arg(long, value_enum, default_value_t = Method::Legendre)]
    method: Method,
    /// Legendre order in cos θ.
    #[arg(long = "order-theta", default_value_t = qct::DEFAULT_ORDER)]
    order_theta: usize,
    /// Legendre order in the reduced J variable.
    #[arg(long = "order-j", default_value_t = qct::DEFAULT_ORDER)]
    order_j: usize,
    /// Kernel width along J (default: twice the mean J spacing).
    #[arg(long = "smooth-j")]
    smooth_j: Option<f64>,
    /// Kernel width along θ, degrees.
    #[arg(long = "smooth-theta-deg", default_value_t = 2.0)]
    smooth_theta_deg: f64,
    /// Divide each kernel by its mass inside the domain.
    #[arg(long)]
    renormalize: bool,
    /// Spacing of the output J axis.
    #[arg(long = "j-step", default_value_t = 1.0)]
    j_step: f64,
}

impl QctArgs {
    fn j_axis(&self, j_max: f64) -> Result<Vec<f64>, Error> {
        if !(self.j_step > 0.0) {
            return Err(Error::Domain(format!("--j-step must be positive, got {}", self.j_step)));
        }
        let n = (j_max / self.j_step).floor() as usize;
        Ok((0..=n).map(|i| i as f64 * self.j_step).collect())
    }

    fn kernel(&self, ens: &TrajectoryEnsemble) -> Result<KernelConfig, Error> {
        let s_j = self
            .smooth_j
            .unwrap_or_else(|| KernelConfig::default_s_j(ens, self.j_step));
        Ok(KernelConfig::new(s_j, self.smooth_theta_deg.to_radians())?.with_renormalize(self.renormalize))
    }

    fn describe(&self, ens: &TrajectoryEnsemble) -> String {
        match self.method {
            Method::Legendre => format!(
                "method=legendre order_theta={} order_j={} j_step={}",
                self.order_theta, self.order_j, self.j_step
            ),
            Method::Gaussian => {
                let s_j = self
                    .smooth_j
                    .unwrap_or_else(|| KernelConfig::default_s_j(ens, self.j_step));
                let (a, b) = qct::fwhm(s_j);
                format!(
                    "method=gaussian s_j={} fwhm_j(s*ln2)={} fwhm_j(2*sqrt(ln2)*s)={} smooth_theta_deg={} renormalize={} j_step={}",
                    s_j, a, b, self.smooth_theta_deg, self.renormalize, self.j_step
                )
            }
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Differential cross section σ_r(θ).
    Dcs {
        input: PathBuf,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Opacity function P_r(J).
    Opacity { input: PathBuf },
    /// J-partial cross sections σ^J.
    SigmaJ { input: PathBuf },
    /// Quantum deflection map Q_r(θ, J).
    Qmdf {
        input: PathBuf,
        #[command(flatten)]
        map: MapArgs,
    },
    /// Q_r(θ, J) restricted to one final helicity.
    QmdfHelicity {
        input: PathBuf,
        #[arg(long = "omega-prime", allow_hyphen_values = true)]
        omega_prime: i32,
        #[command(flatten)]
        map: MapArgs,
    },
    /// Diagonal (random-phase) part of Q_r(θ, J).
    RandomPhase {
        input: PathBuf,
        #[command(flatten)]
        map: MapArgs,
    },
    /// Σ_J Q_r(θ, J) over a J window.
    SumJ {
        input: PathBuf,
        #[command(flatten)]
        window: WindowArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long = "no-sin-theta")]
        no_sin_theta: bool,
    },
    /// DCS from amplitudes restricted to a J window.
    PartialDcs {
        input: PathBuf,
        #[command(flatten)]
        window: WindowArgs,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Connor's quantum deflection function Θ̃(J).
    Cqdf {
        input: PathBuf,
        #[arg(long = "omega-prime", default_value_t = 0, allow_hyphen_values = true)]
        omega_prime: i32,
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        omega: i32,
        #[arg(long, value_enum, default_value_t = Unwrap::TwoSided)]
        unwrap: Unwrap,
    },
    /// Classical deflection function from a trajectory file.
    QctDf {
        input: PathBuf,
        #[command(flatten)]
        qct: QctArgs,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Classical DCS (Legendre expansion).
    QctDcs {
        input: PathBuf,
        #[arg(long = "order-theta", default_value_t = qct::DEFAULT_ORDER)]
        order_theta: usize,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Classical J-partial cross section.
    QctSigmaJ {
        input: PathBuf,
        #[command(flatten)]
        qct: QctArgs,
    },
    /// Synthetic S-matrix block or trajectory ensemble from a model spec file.
    Synth {
        model: PathBuf,
        /// Overrides the seed of a trajectory model.
        #[arg(long)]
        seed: Option<u64>,
    },
}

struct Output {
    text: String,
}

impl Output {
    fn new(command: &str, input: &Path, digest: &str, params: &str) -> Self {
        let mut text = String::new();
        let _ = writeln!(text, "# qdeflect {}", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(text, "# command: {command}");
        let _ = writeln!(text, "# input: {} sha256={digest}", input.display());
        if !params.is_empty() {
            let _ = writeln!(text, "# parameters: {params}");
        }
        Self { text }
    }

    fn line(&mut self, s: impl AsRef<str>) {
        self.text.push_str(s.as_ref());
        self.text.push('\n');
    }
}

fn angle(theta: f64) -> String {
    format!("{:.6}", theta.to_degrees())
}

fn value(v: f64) -> String {
    format!("{v:.8e}")
}

fn j_label(j: f64) -> String {
    if j.fract() == 0.0 {
        format!("{j}")
    } else {
        format!("{j:.6}")
    }
}

fn read_input(path: &Path) -> Result<(String, String), Error> {
    let bytes = fs::read(path).map_err(|e| Error::Validation(format!("cannot read {}: {e}", path.display())))?;
    let digest = hex::encode(Sha256::digest(&bytes));
    let text = String::from_utf8(bytes).map_err(|_| Error::Validation(format!("{} is not UTF-8", path.display())))?;
    Ok((text, digest))
}

fn load_block(path: &Path) -> Result<(SMatrixBlock, String), Error> {
    let (text, digest) = read_input(path)?;
    let block = qdeflect::load_smatrix_str(&text)?;
    for v in qdeflect::smatrix::validate_unitarity(&block).violations {
        eprintln!(
            "warning: |S| = {} > 1 at J={} Omega={} OmegaPrime={}",
            v.magnitude, v.key.j, v.key.omega, v.key.omega_prime
        );
    }
    Ok((block, digest))
}

fn load_ensemble(path: &Path) -> Result<(TrajectoryEnsemble, String), Error> {
    let (text, digest) = read_input(path)?;
    Ok((qct::load_trajectories_str(&text)?, digest))
}

fn write_curve(out: &mut Output, column: &str, curve: &AngularCurve) {
    out.line(format!("theta_deg,{column}"));
    for (t, v) in curve.grid.thetas().iter().zip(&curve.values) {
        out.line(format!("{},{}", angle(*t), value(*v)));
    }
}

fn write_map(out: &mut Output, map: &DeflectionMap) {
    out.line("theta_deg,J,value");
    for (i, t) in map.grid().thetas().iter().enumerate() {
        let a = angle(*t);
        for (j, v) in map.j_values().iter().zip(map.row(i)) {
            out.line(format!("{a},{},{}", j_label(*j), value(*v)));
        }
    }
}

fn finish_map(out: &mut Output, map: DeflectionMap, args: &MapArgs) -> Result<(), Error> {
    let (sj, st) = args.widths();
    let map = if sj > 0.0 || st > 0.0 { map.smoothed(sj, st)? } else { map };
    let map = if args.no_sin_theta {
        let (m, ends) = map.divided_by_sin_theta();
        if !ends.is_empty() {
            let list: Vec<String> = ends.iter().map(|&i| angle(m.grid().thetas()[i])).collect();
            out.line(format!("# rows at theta_deg={} set to 0 (sin θ = 0)", list.join(",")));
        }
        m
    } else {
        map
    };
    write_map(out, &map);
    Ok(())
}

fn run(cmd: &Command, argv: &str) -> Result<String, Error> {
    let out = match cmd {
        Command::Dcs { input, grid } => {
            let (block, digest) = load_block(input)?;
            let mut out = Output::new(argv, input, &digest, &format!("grid_deg={}", grid.grid_deg));
            write_curve(&mut out, "dcs", &qdeflect::dcs(&block, &grid.grid()?));
            out
        }
        Command::Opacity { input } => {
            let (block, digest) = load_block(input)?;
            let mut out = Output::new(argv, input, &digest, "");
            out.line("J,opacity");
            for j in 0..=block.j_max() {
                out.line(format!("{j},{}", value(qdeflect::opacity(&block, j)?)));
            }
            out
        }
        Command::SigmaJ { input } => {
            let (block, digest) = load_block(input)?;
            let mut out = Output::new(argv, input, &digest, "");
            out.line("J,sigma_j");
            for j in 0..=block.j_max() {
                out.line(format!("{j},{}", value(qdeflect::partial_cross_section(&block, j)?)));
            }
            out
        }
        Command::Qmdf { input, map } => {
            let (block, digest) = load_block(input)?;
            let mut out = Output::new(argv, input, &digest, &map.describe());
            finish_map(&mut out, qdeflect::qmdf_map(&block, &map.grid.grid()?), map)?;
            out
        }
        Command::QmdfHelicity { input, omega_prime, map } => {
            let (block, digest) = load_block(input)?;
            let params = format!("omega_prime={omega_prime} {}", map.describe());
            let mut out = Output::new(argv, input, &digest, &params);
            let m = qdeflect::qmdf_helicity_map(&block, *omega_prime, &map.grid.grid()?)?;
            finish_map(&mut out, m, map)?;
            out
        }
        Command::RandomPhase { input, map } => {
            let (block, digest) = load_block(input)?;
            let mut out = Output::new(argv, input, &digest, &map.describe());
            finish_map(&mut out, qdeflect::random_phase_map(&block, &map.grid.grid()?), map)?;
            out
        }
        Command::SumJ {
            input,
            window,
            grid,
            no_sin_theta,
        } => {
            let (block, digest) = load_block(input)?;
            let w = window.window(block.j_max())?;
            let params = format!("jmin={} jmax={} grid_deg={} no_sin_theta={no_sin_theta}", w.lo, w.hi, grid.grid_deg);
            let mut out = Output::new(argv, input, &digest, &params);
            let map = qdeflect::qmdf_map(&block, &grid.grid()?);
            let mut curve = qdeflect::sum_over_j(&map, w)?;
            if *no_sin_theta {
                let g = curve.grid.clone();
                for (i, v) in curve.values.iter_mut().enumerate() {
                    let s = g.sin_theta(i);
                    *v = if s == 0.0 { 0.0 } else { *v / s };
                }
                out.line("# rows with sin θ = 0 set to 0");
            }
            write_curve(&mut out, "value", &curve);
            out
        }
        Command::PartialDcs { input, window, grid } => {
            let (block, digest) = load_block(input)?;
            let w = window.window(block.j_max())?;
            let params = format!("jmin={} jmax={} grid_deg={}", w.lo, w.hi, grid.grid_deg);
            let mut out = Output::new(argv, input, &digest, &params);
            write_curve(&mut out, "dcs", &qdeflect::partial_dcs(&block, w, &grid.grid()?)?);
            out
        }
        Command::Cqdf {
            input,
            omega_prime,
            omega,
            unwrap,
        } => {
            let (block, digest) = load_block(input)?;
            let mode = match unwrap {
                Unwrap::TwoSided => UnwrapMode::TwoSided,
                Unwrap::OneSided => UnwrapMode::OneSided,
            };
            let params = format!("omega_prime={omega_prime} omega={omega} unwrap={mode:?}");
            let mut out = Output::new(argv, input, &digest, &params);
            let curve = qdeflect::cqdf(&block, *omega_prime, *omega, mode)?;
            out.line("J,theta_tilde_rad,theta_tilde_deg,magnitude");
            for ((j, t), m) in curve.j_values.iter().zip(&curve.theta_tilde).zip(&curve.magnitudes) {
                out.line(format!("{j},{},{:.6},{}", value(*t), t.to_degrees(), value(*m)));
            }
            out
        }
        Command::QctDf { input, qct: args, grid } => {
            let (ens, digest) = load_ensemble(input)?;
            let params = format!("{} grid_deg={}", args.describe(&ens), grid.grid_deg);
            let mut out = Output::new(argv, input, &digest, &params);
            let g = grid.grid()?;
            let js = args.j_axis(ens.j_max())?;
            let map = match args.method {
                Method::Legendre => {
                    let fit = LegendreDF::fit(&ens, args.order_theta, args.order_j)?;
                    if fit.gibbs_warning() {
                        out.line("# warning: truncated expansion undershoots below -2% of its max");
                        eprintln!("warning: Legendre expansion shows Gibbs undershoot; consider lower orders");
                    }
                    qct::qct_df_legendre(&ens, args.order_theta, args.order_j, &g, js)?
                }
                Method::Gaussian => qct::qct_df_gaussian(&ens, args.kernel(&ens)?, &g, js)?,
            };
            write_map(&mut out, &map);
            out
        }
        Command::QctDcs {
            input,
            order_theta,
            grid,
        } => {
            let (ens, digest) = load_ensemble(input)?;
            let params = format!("order_theta={order_theta} grid_deg={}", grid.grid_deg);
            let mut out = Output::new(argv, input, &digest, &params);
            write_curve(&mut out, "dcs", &qct::qct_dcs_legendre(&ens, *order_theta, &grid.grid()?)?);
            out
        }
        Command::QctSigmaJ { input, qct: args } => {
            let (ens, digest) = load_ensemble(input)?;
            let mut out = Output::new(argv, input, &digest, &args.describe(&ens));
            let js = args.j_axis(ens.j_max())?;
            let values: Vec<f64> = match args.method {
                Method::Legendre => {
                    let fit = qct::qct_sigma_j_legendre(&ens, args.order_j)?;
                    js.iter().map(|&j| fit.sigma_j(j)).collect()
                }
                Method::Gaussian => {
                    let g = qct::qct_sigma_j_gaussian(&ens, args.kernel(&ens)?)?;
                    js.iter().map(|&j| g.eval(j)).collect()
                }
            };
            out.line("J,sigma_j");
            for (j, v) in js.iter().zip(values) {
                out.line(format!("{},{}", j_label(*j), value(v)));
            }
            out
        }
        Command::Synth { model, seed } => {
            let (text, digest) = read_input(model)?;
            let spec = synth::parse_model_spec(&text)?;
            let body = match spec {
                ModelSpec::SMatrix {
                    model,
                    k,
                    j_max,
                    j_final,
                    phase_offset,
                } => {
                    let block = if j_final == 0 {
                        synth::synth_smatrix(&model, k, j_max)?
                    } else {
                        synth::synth_smatrix_helicity(&model, k, j_final, j_max, phase_offset)?
                    };
                    block.to_text()
                }
                ModelSpec::Trajectories {
                    model,
                    count,
                    seed: file_seed,
                } => synth::synth_trajectories(&model, count, seed.unwrap_or(file_seed))?.to_text(),
            };
            let mut out = Output::new(argv, model, &digest, &seed.map_or(String::new(), |s| format!("seed={s}")));
            out.text.push_str(&body);
            out
        }
    };
    Ok(out.text)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let argv = command_line();
    let result = run(&cli.command, &argv).and_then(|text| match &cli.out {
        Some(path) => fs::write(path, text).map_err(Error::from),
        None => {
            print!("{text}");
            Ok(())
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 2 } else { 1 })
        }
    }
}

/// Subcommand and arguments as given, without the program path or `--out`.
fn command_line() -> String {
    let mut parts = Vec::new();
    let mut args = std::env::args().skip(1);
    while let Some(a) = args.next() {
        if a == "--out" {
            args.next();
        } else if !a.starts_with("--out=") {
            parts.push(a);
        }
    }
    parts.join(" ")
}
