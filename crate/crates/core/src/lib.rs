//! Control ability of linear continuous-time systems measured through their
//! controllability regions.
//!
//! The reachable set of `dx/dt = A x + B u` under `|u_i| <= 1` is a convex,
//! centrally symmetric "smooth zonotope". This crate builds discretized
//! zonotope approximations of it, computes exact and closed-form volumes,
//! deconstructs those volumes into shape factors, compares systems through
//! support functions, computes minimum transfer times and optimizes input
//! configurations against these measures.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod gramian;
pub mod io;
pub mod lti;
pub mod optimizer;
pub mod region;
pub mod zonotope;

pub use error::{Error, Result};
