//! Homotopy continuation for square systems of homogeneous polynomials, with
//! step sizes driven by the normalized condition number `mu_norm`.
//!
//! Systems live in the Bombieri-Weyl space `H_(d)`, points in `P(C^{n+1})`
//! with unit-norm representatives. The tracker follows a path of systems
//! with one projective Newton step per subdivision point; [`cmetric`]
//! measures and shortens discretized paths in the condition metric.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cmetric;
pub mod condition;
pub mod error;
pub mod io;
pub mod newton;
pub mod polysys;
pub mod projective;
pub mod tracker;

pub use num_complex::Complex64;

pub use condition::{check_mu_stability, mu_norm, MuValue, RadiusKind, StabilityReport};
pub use error::{Error, Result};
pub use newton::{certify_approximate_zero, newton_step, NewtonOutcome};
pub use polysys::{kostlan_sample, HomSystem};
pub use projective::{proj_distance, system_distance, ProjPoint};
pub use tracker::{start_pair, track, Homotopy, HomotopyKind, TrackFailure, TrackResult, TrackerConfig};
