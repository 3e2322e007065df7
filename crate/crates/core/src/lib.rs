//! Computer algebra and numerical optimization for one-dimensional linear
//! convolutional networks (1D-LCNs).
//!
//! The crate covers three tasks:
//!
//! * generating integer polynomial equations whose common zero locus is the
//!   (complex) neurovariety of an architecture, via recursive resultant
//!   matrices ([`idealgen::vanishing_generators`]);
//! * computing the generic Euclidean distance degree of the associated Segre
//!   variety, which counts the complex critical points of quadratic-loss
//!   training ([`eddegree::generic_ed_degree`]);
//! * numerically locating those critical points on hypersurface
//!   neurovarieties ([`critpoints::solve_critical_points`]).

pub mod critpoints;
pub mod decomp;
pub mod eddegree;
mod error;
pub mod idealgen;
pub mod lcn;
pub mod polyring;
pub mod resultant;
pub mod verify;

pub use error::{Error, Result};
pub use lcn::{Architecture, Filter};
pub use polyring::{Monomial, MultiPoly, PolyMatrix};
