//! Symplectic invariants of curves in Lagrange Grassmannians.
//!
//! The crate computes normal moving frames, canonical splittings and
//! curvature mappings of curves of Lagrangian planes with an arbitrary Young
//! diagram, and reconstructs curves from prescribed curvatures. Every
//! `t`-dependent quantity is a truncated power series ([`jets::MatrixJet`])
//! about a fixed center, so derivatives are exact up to the retained order.

pub mod diagram;
pub mod error;
pub mod flag;
pub mod generators;
pub mod io;
pub mod jets;
pub mod normal_frame;
pub mod quiver;
pub mod reconstruction;
pub mod subspace;
pub mod symplectic;
pub mod verify;

pub use error::{Error, Result};
