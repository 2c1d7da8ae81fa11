// NaN must fail validation, hence `!(x > 0.0)` rather than `x <= 0.0`.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod basis;
pub mod classical;
pub mod eigen;
pub mod error;
pub mod integrable;
pub mod io;
pub mod model;
pub mod operator;
pub mod params;
pub mod peres;
pub mod stats;

pub use basis::{build_basis, parity_class, Basis, BasisState, BasisTag, ParitySector};
pub use classical::dop853::Tolerances;
pub use classical::{ClassicalState, Section, ShellSampling, Trajectory};
pub use eigen::{
    converged_count, diagonalize, eigenvalues, photon_distribution, solve, solve_all_sectors,
    solve_perturbed, PhotonDistribution, SpectrumResult, DEFAULT_DELTA,
};
pub use error::{Error, Result};
pub use integrable::{analytic_spectrum, compare_with_analytic, BogoliubovData, EquivalenceReport};
pub use io::{OutputRecord, RunManifest, Table};
pub use model::{hamiltonian, observable, perturbed_hamiltonian, Observable};
pub use operator::SymmetricOperator;
pub use params::ModelParams;
pub use peres::{Dominance, PeresPoint};
pub use stats::{RatioPoint, RefModel, SpacingSample};
