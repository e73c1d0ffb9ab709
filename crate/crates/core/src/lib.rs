//! Generalized Pauli channels built from mutually unbiased bases, their
//! time-local dynamics, and Markovianity diagnostics.
//!
//! Prime dimensions only. The main entry points are [`mub::mub_family`],
//! [`channel::channel_from_eigenvalues`] and [`dynamics::build_trajectory`].

pub mod channel;
pub mod dynamics;
pub mod error;
pub mod linalg;
pub mod mub;
pub mod ratefn;
pub mod superop;

pub use channel::{
    channel_from_eigenvalues, channel_from_probabilities, choi_matrix, fujiwara_verdict, ChannelJson,
    ChoiMatrix, CpVerdict, GenPauliChannel, WeylChannel,
};
pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, StateVector};
pub use mub::{mub_family, weyl_basis, MubFamily, WeylBasis};
pub use ratefn::{Preset, RateExpr, RateSet};
pub use superop::LinearMap;
pub use dynamics::{analyze, build_trajectory, AnalysisConfig, DivisibilityReport, Trajectory};
