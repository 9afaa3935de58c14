//! Exact rational scalars, dense polynomials, root isolation and the norms built on them.

pub mod norms;
pub mod piecewise;
pub mod polynomial;
pub mod rational;
pub mod roots;

pub use norms::{
    abs_integral, abs_integral_with, degiorgi_ratio, intmax_lower_bound, intmax_ratio,
    measure_where_nonpositive, sup_norm, sup_norm_with,
};
pub use piecewise::PiecewisePolynomial;
pub use polynomial::Polynomial;
pub use rational::{CertifiedValue, Exact, NumberFormat, Rational};
pub use roots::{isolate_roots, RealRoot, RootIsolation};
