//! Rounding pipeline for makespan minimization on (1,ε)-restricted
//! assignment instances, with the exact oracles needed to check each stage.
//!
//! The stages, in order: [`linprog`] solves LP(ρ,δ); [`canonical`] turns a
//! feasible point into a canonical instance; [`coarsen`] halves the `p`/`q`
//! parameters with Moser–Tardos-certified randomized rounding; [`finalround`]
//! picks the heavy assignment; [`canonical::lift_assignment`] maps it back to
//! a schedule. [`pipeline`] wires them together.

pub mod baselines;
pub mod canonical;
pub mod coarsen;
pub mod error;
pub mod finalround;
pub mod flow;
pub mod goodness;
pub mod instance;
pub mod linprog;
pub mod lll;
pub mod pipeline;
pub mod rational;

pub use error::{Error, Result};
pub use rational::Rational;
