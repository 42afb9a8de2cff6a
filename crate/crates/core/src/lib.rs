//! Quantum and classical deflection functions.
//!
//! The crate turns S-matrix blocks into the joint (θ, J) map Q_r(θ, J), whose
//! J-sum is the differential cross section times sin θ and whose θ-integral is
//! the J-partial cross section. Alongside it sit the classical estimators for
//! trajectory ensembles, Connor's quantum deflection function, and synthetic
//! models with closed-form answers.
//!
//! ```
//! use num_complex::Complex64;
//! use qdeflect::{qmdf_map, AngularGrid, ChannelHeader, SMatrixBlock};
//!
//! let one = Complex64::new(1.0, 0.0);
//! let block = SMatrixBlock::new(ChannelHeader::new(1.0, 0, 0, 1), [(0, 0, 0, one), (1, 0, 0, one)])?;
//! let map = qmdf_map(&block, &AngularGrid::uniform(181)?);
//! assert_eq!(map.n_j(), 2);
//! # Ok::<(), qdeflect::Error>(())
//! ```

pub mod cqdf;
pub mod error;
pub mod grid;
pub mod legendre;
pub mod map;
pub mod observables;
pub mod qct;
pub mod qmdf;
pub mod quadrature;
pub mod smatrix;
pub mod synth;
pub mod wigner;

pub use cqdf::{cqdf, modified_smatrix, unwrap_arg, CqdfCurve, PhaseSequence, UnwrapMode};
pub use error::{Error, Result};
pub use grid::{AngularGrid, JWindow};
pub use map::DeflectionMap;
pub use observables::{
    dcs, integral_cross_section, opacity, partial_cross_section, scattering_amplitude, AmplitudeCurve, AngularCurve,
};
pub use qct::{KernelConfig, LegendreDF, Trajectory, TrajectoryEnsemble};
pub use qmdf::{
    integrate_over_theta, j_partial_amplitude, partial_dcs, qmdf_helicity_map, qmdf_map, random_phase_map,
    smooth_map, sum_over_j,
};
pub use smatrix::{load_smatrix, load_smatrix_str, ChannelHeader, SMatrixBlock};
pub use synth::{synth_smatrix, synth_trajectories, PhaseModel};
pub use wigner::{wigner_d, wigner_d_ladder};

// The guide's snippets run as doc-tests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/smatrix.md")]
    mod smatrix {}
    #[doc = include_str!("../../../book/src/observables.md")]
    mod observables {}
    #[doc = include_str!("../../../book/src/wigner.md")]
    mod wigner {}
    #[doc = include_str!("../../../book/src/qmdf.md")]
    mod qmdf {}
    #[doc = include_str!("../../../book/src/cqdf.md")]
    mod cqdf {}
    #[doc = include_str!("../../../book/src/qct.md")]
    mod qct {}
    #[doc = include_str!("../../../book/src/synthetic.md")]
    mod synthetic {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
