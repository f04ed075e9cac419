//! Maximum Nash welfare allocation of indivisible goods under binary additive
//! valuations: a group-strategyproof deterministic rule with lexicographic
//! tie-breaking, the fractional MNW rule, its decomposition into a lottery
//! over rounded MNW allocations, fairness certificates, and brute-force
//! oracles for cross-checking on small instances.

pub mod det;
pub mod error;
pub mod exec;
pub mod fairness;
mod flow;
pub mod frac;
pub mod graph;
pub mod io;
pub mod lottery;
pub mod model;
pub mod oracle;

pub use det::{initial_mnw, mnw_tie, mnw_tie_traced, mnw_tie_with_priority, TieStep};
pub use error::{Error, Result};
pub use exec::Execution;
pub use fairness::{Verdict, Witness};
pub use frac::{fractional_mnw, verify_fractional_mnw, FractionalSolution};
pub use lottery::{check_rounded, decompose, sample};
pub use model::{
    expected_utilities, induced_fractional, rat, rat_int, utilities, utility, Allocation, FractionalAllocation,
    Instance, Lottery, Rational, UtilityVector,
};
