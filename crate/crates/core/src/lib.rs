//! Equivariant oscillator networks with the symmetry of the order-16
//! quaternion group.
//!
//! The crate covers the whole chain from the group itself to the stability
//! of the heteroclinic cycle in the weak-coupling phase model:
//!
//! * [`group`]: permutations, presentation checks, Cayley graph.
//! * [`network`]: the 16-cell coupled system and its simulation.
//! * [`hopf`]: the C² representation, normal form and branch classification.
//! * [`torus`]: phase action on the 16-torus, isotropy catalog, the
//!   three-angle reduced field.
//! * [`dynamics`]: equilibria, invariant planes, connection shooting.
//! * [`stability`]: stability indices and the parameter-region classifier.
//! * [`ledger`]: machine-readable list of inconsistencies found in the
//!   printed source data.

pub mod dynamics;
pub mod error;
pub mod group;
pub mod hopf;
pub mod ledger;
pub mod network;
pub mod ode;
pub mod stability;
pub mod sweep;
pub mod torus;

pub use error::{Error, Result};
