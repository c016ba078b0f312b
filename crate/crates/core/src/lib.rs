//! Parabolic dynamics of fibred holomorphic maps over an irrational rotation.
//!
//! The maps studied are `F(theta, z) = (theta + alpha, z + a_2(theta) z^2 + a_3(theta) z^3 + ...)`
//! with trigonometric polynomial coefficients. The crate reduces such a map order by order through
//! fibred polynomial conjugacies, detects the resulting Leau-Fatou flower, builds the fibred petals,
//! checks them numerically, and certifies the Siegel alternative when every reduction succeeds.

pub mod cli;
pub mod cohomology;
pub mod dynamics;
pub mod error;
pub mod fibredjet;
pub mod models;
pub mod petals;
pub mod reduction;
pub mod rotation;
pub mod siegel;
pub mod spec;
pub mod trigpoly;

pub use error::{Error, Result};
pub use fibredjet::{ChangeShape, FibredJet, FoldedJet, InfinityJet};
pub use rotation::{Precision, RootOfUnity, RotationNumber};
pub use trigpoly::TrigPoly;
