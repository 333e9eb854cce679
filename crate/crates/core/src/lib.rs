//! Exact construction and verification of generator towers for the fixed
//! fields of p-group actions on rational function fields.
//!
//! The crate has three layers:
//! * permutation groups — standard generators of the Sylow p-subgroups of
//!   symmetric groups, their orientation subgroups, wreath decompositions,
//!   and exact normal forms (`perm`, `group`, `wreath`);
//! * exact algebra — cyclotomic rationals, sparse multivariate polynomials
//!   and rational functions, and monomial group actions (`cyc`, `poly`,
//!   `ratfunc`, `action`);
//! * towers — construction of explicit generator towers for fixed fields,
//!   with machine-checkable certificates and an independent verifier
//!   (`cyclic`, `tower`, `verify`).

pub mod action;
pub mod cyc;
pub mod cyclic;
pub mod error;
pub mod group;
pub mod perm;
pub mod poly;
pub mod ratfunc;
pub mod tower;
pub mod verify;
pub mod wreath;

pub use error::{Error, Result};
