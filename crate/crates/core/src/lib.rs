//! Jets, Whitney fields and horizontal curves in the first Heisenberg group, computed
//! on exact rationals.
//!
//! The crate is organised bottom-up: [`exact_poly`] supplies rationals and polynomials,
//! [`interval_sets`] finite unions of subintervals of `[0, 1]`, [`jets`] Whitney jets,
//! [`horizontality`] the Heisenberg lift and the extendability conditions,
//! [`counterexample`] the dyadic interval construction of a curve without the `C^2`
//! Lusin property, and [`diff_analysis`] finite-scale differentiability estimators.

pub mod counterexample;
pub mod diff_analysis;
pub mod error;
pub mod exact_poly;
pub mod horizontality;
pub mod interval_sets;
pub mod jets;

#[cfg(test)]
mod properties;

pub use error::{Error, Result};
