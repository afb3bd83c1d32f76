//! Optimization toolkit for dense Cloud-RAN design studies.
//!
//! The crate is organised around a two-stage pipeline: beamforming and
//! channel-estimation problems are canonicalized once into a standard cone
//! program (`stuffing`), after which instances are produced by copying
//! numbers into the pre-stored structure, and the standard form is solved by
//! an ADMM operator-splitting method on the homogeneous self-dual embedding
//! (`solver`). On top of that sit the network-design algorithms themselves:
//! group sparse beamforming and max-min rate optimization (`beamforming`),
//! regularized high-dimensional channel estimation and scenario-based
//! stochastic coordinated beamforming (`csi`), and the topology/channel
//! generators they consume (`network`).

pub mod beamforming;
pub mod cones;
pub mod csi;
pub mod dense;
mod error;
pub mod network;
pub mod rng;
pub mod solver;
pub mod sparse;
pub mod stuffing;
pub(crate) mod vecops;

pub use error::Error;
pub use solver::{solve, ConeProgram, SolveOutcome, SolveStatus, SolverSettings};
