//! Error type shared by all modules.

use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    /// A fibre value left the family's natural domain.
    DomainViolation { x: f64, reason: &'static str },
    /// `y` has no preimage under the fibre map over `base`.
    NoPreimage { base: f64, y: f64 },
    /// A forward orbit left the configured domain at `step`.
    OrbitEscape { step: usize, x: f64 },
    /// An operation that needs a complete graph hit escape flags.
    AbsentGraph { escaped: usize },
    /// Attractor dropped below repeller; iteration not converged.
    OrderingViolation { theta: f64, gap: f64 },
    /// Two graph samples live on different grids.
    GridMismatch { left: usize, right: usize },
    /// Strip ordering or derived-constant invariants failed.
    InvalidStrip(String),
    InvalidSchedule(String),
    InvalidRotation(String),
    InvalidFamily(String),
    /// A sublevel set expected to be one arc split into several pieces.
    NonConvexRegion { components: usize },
    /// A root or bracket required by the operation does not exist.
    NotFound(&'static str),
    /// Bisection bracket collapsed or never contained a sign change.
    EmptyInterval(&'static str),
    /// A lemma hypothesis (e.g. the b_n lower bound) is violated.
    HypothesisViolation(String),
    /// No admissible M_n in the Lemma-"F2" window.
    NoAdmissibleM { level: usize },
    /// Escape predicate has the same verdict on both bracket endpoints.
    PredicateConstant { escapes_at_lower: bool },
    /// Expression parse error (Custom families).
    Parse(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DomainViolation { x, reason } => {
                write!(f, "domain violation at x = {x}: {reason}")
            }
            Error::NoPreimage { base, y } => {
                write!(f, "no preimage of y = {y} under the fibre map over theta = {base}")
            }
            Error::OrbitEscape { step, x } => {
                write!(f, "orbit escaped the domain at step {step} (x = {x})")
            }
            Error::AbsentGraph { escaped } => {
                write!(f, "graph is absent: {escaped} grid points escaped")
            }
            Error::OrderingViolation { theta, gap } => {
                write!(f, "attractor below repeller at theta = {theta} (gap = {gap})")
            }
            Error::GridMismatch { left, right } => {
                write!(f, "grid sizes differ: {left} vs {right}")
            }
            Error::InvalidStrip(msg) => write!(f, "invalid strip: {msg}"),
            Error::InvalidSchedule(msg) => write!(f, "invalid schedule: {msg}"),
            Error::InvalidRotation(msg) => write!(f, "invalid rotation: {msg}"),
            Error::InvalidFamily(msg) => write!(f, "invalid family: {msg}"),
            Error::NonConvexRegion { components } => {
                write!(f, "critical region has {components} components, expected one arc")
            }
            Error::NotFound(what) => write!(f, "not found: {what}"),
            Error::EmptyInterval(what) => write!(f, "empty interval: {what}"),
            Error::HypothesisViolation(msg) => write!(f, "hypothesis violated: {msg}"),
            Error::NoAdmissibleM { level } => {
                write!(f, "no admissible M_{level} in the scan window")
            }
            Error::PredicateConstant { escapes_at_lower } => write!(
                f,
                "escape predicate is constant on the bracket (lower endpoint escapes: {escapes_at_lower})"
            ),
            Error::Parse(msg) => write!(f, "parse error: {msg}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}
