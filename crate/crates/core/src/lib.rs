//! Socially optimal flows over time with departure-time choice.
//!
//! The solver runs successive shortest paths on a static network, turns the
//! path decomposition into an exact flow over time for a piecewise-linear
//! scheduling cost, and produces dual node potentials and time-varying arc
//! tolls that certify optimality and induce the optimum as an equilibrium.
//! All arithmetic is exact.

pub mod cost;
pub mod duals;
pub mod error;
pub mod fixtures;
pub mod flow;
pub mod interval;
pub mod io;
pub mod network;
pub mod oracle;
pub mod pwl;
pub mod scalar;
pub mod schedule;
pub mod solve;
pub mod ssp;

pub use error::{Error, Result};
pub use scalar::{Ext, Scalar};
pub use solve::{solve, Target};

/// Arbitrary-precision rational, the default scalar.
pub type Rational = num_rational::BigRational;
/// Extended rational `Rational ∪ {+∞}`.
pub type ExtRational = scalar::Ext<Rational>;

pub type Network = network::Network<Rational>;
pub type StaticFlow = network::StaticFlow<Rational>;
pub type ResidualGraph = network::ResidualGraph<Rational>;
pub type IntervalUnion = interval::IntervalUnion<Rational>;
pub type Pwl = pwl::Pwl<Rational>;
pub type SchedulingCost = cost::SchedulingCost<Rational>;
pub type SspDecomposition = ssp::SspDecomposition<Rational>;
pub type PathSchedule = schedule::PathSchedule<Rational>;
pub type FlowOverTime = flow::FlowOverTime<Rational>;
pub type JIndex = flow::JIndex<Rational>;
pub type Solution = solve::Solution<Rational>;
pub type DualCertificate = duals::DualCertificate<Rational>;
pub type TollSchedule = duals::TollSchedule<Rational>;
pub type Instance = io::Instance<Rational>;
