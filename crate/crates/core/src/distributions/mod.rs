//! Exact rationals, step CDFs, piecewise-linear targets and distances between
//! distribution functions.
//!
//! Everything here is exact: floating point only appears when a closed form
//! such as `1 − e^{−t}` is sampled, and the sampled values are rounded onto an
//! exact dyadic grid before they enter a [`TargetF`].

mod builtin;
mod metrics;
pub mod rational;
mod step;
mod target;

pub use builtin::{cdf_from_builtin, Builtin};
pub use metrics::{levy_distance, sup_distance, sup_distance_all};
pub use rational::{format_rational, parse_rational, rat, Rational};
pub use step::StepCdf;
pub use target::TargetF;

pub(crate) use step::StepCdfRepr;
pub(crate) use target::TargetFRepr;

/// A nondecreasing, right-continuous function that is zero on `]−∞, 0[` and
/// affine between consecutive knots.
pub trait Cdf {
    fn eval(&self, t: &Rational) -> Rational;

    /// `lim_{s ↑ t} F(s)`.
    fn left_limit(&self, t: &Rational) -> Rational;

    /// Jump locations or breakpoints, increasing.
    fn knots(&self) -> Vec<Rational>;

    /// Vertices of the completed graph (jumps filled with vertical segments),
    /// in order along the curve. Starts at height zero.
    fn graph_vertices(&self) -> Vec<(Rational, Rational)>;
}

/// Either kind of exact curve.
#[derive(Clone, Debug, PartialEq)]
pub enum Curve {
    Step(StepCdf),
    Target(TargetF),
}

impl Cdf for Curve {
    fn eval(&self, t: &Rational) -> Rational {
        match self {
            Curve::Step(f) => f.eval(t),
            Curve::Target(f) => f.eval(t),
        }
    }

    fn left_limit(&self, t: &Rational) -> Rational {
        match self {
            Curve::Step(f) => f.left_limit(t),
            Curve::Target(f) => f.left_limit(t),
        }
    }

    fn knots(&self) -> Vec<Rational> {
        match self {
            Curve::Step(f) => f.knots(),
            Curve::Target(f) => f.knots(),
        }
    }

    fn graph_vertices(&self) -> Vec<(Rational, Rational)> {
        match self {
            Curve::Step(f) => f.graph_vertices(),
            Curve::Target(f) => f.graph_vertices(),
        }
    }
}
