//! Dilatively stable processes: cumulant scaling laws, the set-partition
//! moment calculus, FBM and fractional Lévy simulators, limsup-based
//! estimators of the scaling exponent, and a Monte Carlo verification harness.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod kernel;
pub mod levy;
pub mod model;
pub mod partition;
pub mod pathstats;
pub mod seed;
pub mod simulate;
pub mod verify;

pub use error::{Error, Result};
pub use kernel::FlpKernel;
pub use levy::{simulate_levy_increments, JumpLaw, LevyComponent, LevySpec};
pub use model::{
    cumulant_at, fbm_covariance, holder_case, CumulantVector, DilativeParams, HolderCase, ProcessKind, ProcessSpec,
    SamplePath, Violation,
};
pub use partition::{
    enumerate_partitions, kolmogorov_bound, min_even_order, moment_from_cumulants, scaled_increment_moment,
    SetPartition,
};
pub use simulate::{simulate_fbm, simulate_flp, SimGrid};
