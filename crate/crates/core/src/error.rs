use thiserror::Error;

/// Errors raised by the exact-arithmetic and curve routines.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("interval bounds are reversed: {lo} > {hi}")]
    ReversedInterval { lo: String, hi: String },

    #[error("ratio is undefined for the zero polynomial")]
    ZeroPolynomial,

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("the set is empty")]
    EmptySet,

    #[error("{0} is not a site of the jet")]
    NotASite(String),

    #[error("order {k} is out of range for a jet of order {m}")]
    OrderOutOfRange { k: usize, m: usize },

    #[error("order 0 carries no horizontality constraint")]
    ZeroOrder,

    #[error("sites must be distinct")]
    CoincidentSites,

    #[error("expected a < b, got a = {a}, b = {b}")]
    NotIncreasing { a: String, b: String },

    #[error("curve component {component} is discontinuous at t = {at}")]
    Discontinuous { component: &'static str, at: String },

    #[error("t = {0} lies outside the curve domain")]
    OutOfDomain(String),

    #[error("invalid jet: {0}")]
    InvalidJet(String),

    #[error("invalid curve: {0}")]
    InvalidCurve(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("generation {n} exceeds the construction depth {depth}")]
    LevelOutOfRange { n: usize, depth: usize },

    #[error("scale {rho} does not fit inside the domain around x = {x}")]
    ScaleOutOfDomain { x: String, rho: String },

    #[error("missing derivative data: {0}")]
    MissingDerivatives(String),

    #[error("cannot parse {0:?} as a rational number")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
