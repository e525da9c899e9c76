//! Numerics for quasi-periodically forced (qpf) monotone interval maps
//!
//! This crate computes the objects that organise the saddle-node
//! bifurcation of skew products
//!
//! ```text
//! (theta, x) |-> (theta + omega, f_beta(theta, x)),
//! ```
//!
//! where `theta` lives on the circle, `omega` is an irrational rotation
//! number and every fibre map `x |-> f_beta(theta, x)` is strictly
//! increasing:
//!
//! * attracting / repelling invariant graphs via pullback and
//!   pushforward iteration, their Lyapunov exponents and pinching
//!   statistics ([`graphs`]),
//! * exact first and second order derivative propagation along forward
//!   and backward orbits ([`jet`]),
//! * the inductive critical-region machinery: the arcs `I_n`, the strip
//!   functions `phi_n`/`psi_n`, admissible parameter intervals, the
//!   `(F1)/(F2)` combinatorial conditions and the quantitative strip
//!   bounds ([`regions`]),
//! * location of the critical parameter `beta_c` and a heuristic
//!   smooth / non-smooth classification of the bifurcation
//!   ([`bifurcation`]).
//!
//! The crate is `no_std` compatible (it only needs `alloc`); all float
//! math is routed through `libm`, so results are bit-identical across
//! platforms. With the `parallel` feature the grid sweeps run on rayon
//! with deterministic reductions.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod bifurcation;
pub mod error;
pub mod expr;
pub mod family;
pub mod graphs;
pub mod jet;
pub(crate) mod math;
pub mod quad;
pub mod regions;
pub mod torus;

pub use error::{Error, Result};
pub use family::{AssumptionCheck, AssumptionReport, Family, GridSpec, Partials, Strip};
pub use graphs::{Direction, GraphSample, PinchStats};
pub use jet::Jet2;
pub use regions::{BoundsReport, CriticalRegion, FReport, Schedule, StripSamples};
pub use torus::{circle_dist, reduce, Arc, RotationSpec};

pub use bifurcation::{BifurcationResult, Classification, SweepRow};
