//! Horocycle dynamics on the modular surface, at desk scale.
//!
//! The crate provides exact-contract arithmetic in SL(2,R) and SL(2,Z)
//! ([`sl2`]), the horocycle flow in closed form ([`flow`]), the diophantine
//! machinery that locates a flow piece relative to the closed horocycles
//! ([`diophantine`]), algebraic and empirical measures with discrepancy
//! verdicts ([`measures`]), prime and almost-prime sieving together with the
//! Selberg upper bound ([`sieve`]), and Hecke-point experiments ([`hecke`]).

pub mod diophantine;
pub mod flow;
pub mod hecke;
pub mod measures;
pub mod rng;
pub mod sieve;
pub mod sl2;

/// Library version, embedded in experiment manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
