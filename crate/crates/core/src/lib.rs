//! Left-invariant Randers metrics on simply connected nilpotent Lie groups:
//! curvature, structural criteria, Ricci-soliton fitting and Ricci flow.
//!
//! The group never appears explicitly. A nilpotent Lie algebra (structure
//! constants, class at most 4) together with exponential coordinates of the
//! first kind determines everything: the left-invariant frame, the Randers
//! data `F = sqrt(a(y,y)) + a(X,y)` built from an inner product and a drift
//! vector at the identity, and all curvature quantities downstream.

pub mod algebra;
pub mod catalog;
pub mod chart;
pub mod curvature;
pub mod error;
pub mod flow;
pub mod linalg;
pub mod model;
pub mod randers;
pub mod report;
pub mod riemann;
pub mod scalar;
pub mod soliton;

pub use error::{Error, Result};
