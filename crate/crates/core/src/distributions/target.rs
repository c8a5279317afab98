use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::rational::{format_rational, serde_rational, Rational};
use super::Cdf;
use crate::{Error, Result};

/// A continuous piecewise-linear candidate limit.
///
/// Linear between consecutive breakpoints on `[0, t_max]`, constant equal to
/// the last value beyond `t_max`, and zero on `]−∞, 0[`. The first breakpoint
/// sits at `t = 0`.
///
/// Construction only checks the shape of the breakpoint list; membership in
/// the class of admissible limits is decided by
/// [`check_class_f`](crate::conditions::check_class_f). Segments listed in
/// `flagged_jumps` stand for genuine discontinuities that a piecewise-linear
/// representation cannot express directly.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "TargetFRepr", into = "TargetFRepr")]
pub struct TargetF {
    breakpoints: Vec<(Rational, Rational)>,
    flagged_jumps: Vec<usize>,
}

impl TargetF {
    pub fn new(breakpoints: Vec<(Rational, Rational)>) -> Result<Self> {
        Self::with_flagged_jumps(breakpoints, Vec::new())
    }

    pub fn with_flagged_jumps(
        breakpoints: Vec<(Rational, Rational)>,
        mut flagged_jumps: Vec<usize>,
    ) -> Result<Self> {
        let Some((t0, _)) = breakpoints.first() else {
            return Err(Error::InvalidTarget("no breakpoints".into()));
        };
        if !t0.is_zero() {
            return Err(Error::InvalidTarget(format!(
                "first breakpoint at {} instead of 0",
                format_rational(t0)
            )));
        }
        for (i, w) in breakpoints.windows(2).enumerate() {
            if w[1].0 <= w[0].0 {
                return Err(Error::InvalidTarget(format!(
                    "breakpoint {} at {} does not follow {}",
                    i + 1,
                    format_rational(&w[1].0),
                    format_rational(&w[0].0)
                )));
            }
        }
        flagged_jumps.sort_unstable();
        flagged_jumps.dedup();
        if let Some(&bad) = flagged_jumps.iter().find(|&&i| i + 1 >= breakpoints.len()) {
            return Err(Error::InvalidTarget(format!(
                "flagged segment {bad} does not exist"
            )));
        }
        Ok(Self {
            breakpoints,
            flagged_jumps,
        })
    }

    pub fn breakpoints(&self) -> &[(Rational, Rational)] {
        &self.breakpoints
    }

    /// Indices `i` of segments `[t_i, t_{i+1}]` that encode a jump.
    pub fn flagged_jumps(&self) -> &[usize] {
        &self.flagged_jumps
    }

    pub fn t_max(&self) -> &Rational {
        &self.breakpoints.last().expect("nonempty").0
    }

    /// Value at `+∞`.
    pub fn limit(&self) -> &Rational {
        &self.breakpoints.last().expect("nonempty").1
    }

    /// Slopes of the consecutive segments.
    pub fn slopes(&self) -> Vec<Rational> {
        self.breakpoints
            .windows(2)
            .map(|w| (&w[1].1 - &w[0].1) / (&w[1].0 - &w[0].0))
            .collect()
    }
}

impl Cdf for TargetF {
    fn eval(&self, t: &Rational) -> Rational {
        if *t < Rational::zero() {
            return Rational::zero();
        }
        let i = self.breakpoints.partition_point(|(x, _)| x <= t);
        // i >= 1 because the first breakpoint is at 0 <= t
        if i == self.breakpoints.len() {
            return self.limit().clone();
        }
        let (t0, v0) = &self.breakpoints[i - 1];
        let (t1, v1) = &self.breakpoints[i];
        v0 + (v1 - v0) * (t - t0) / (t1 - t0)
    }

    fn left_limit(&self, t: &Rational) -> Rational {
        if *t <= Rational::zero() {
            Rational::zero()
        } else {
            self.eval(t)
        }
    }

    fn knots(&self) -> Vec<Rational> {
        self.breakpoints.iter().map(|(t, _)| t.clone()).collect()
    }

    fn graph_vertices(&self) -> Vec<(Rational, Rational)> {
        let mut out = Vec::with_capacity(self.breakpoints.len() + 1);
        if !self.breakpoints[0].1.is_zero() {
            out.push((Rational::zero(), Rational::zero()));
        }
        out.extend(self.breakpoints.iter().cloned());
        out
    }
}

#[derive(Serialize, Deserialize)]
pub(crate) struct Point(
    #[serde(with = "serde_rational")] Rational,
    #[serde(with = "serde_rational")] Rational,
);

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct TargetFRepr {
    breakpoints: Vec<Point>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    flagged_jumps: Vec<usize>,
}

impl TryFrom<TargetFRepr> for TargetF {
    type Error = Error;

    fn try_from(r: TargetFRepr) -> Result<Self> {
        TargetF::with_flagged_jumps(
            r.breakpoints
                .into_iter()
                .map(|Point(t, v)| (t, v))
                .collect(),
            r.flagged_jumps,
        )
    }
}

impl From<TargetF> for TargetFRepr {
    fn from(f: TargetF) -> Self {
        TargetFRepr {
            breakpoints: f
                .breakpoints
                .into_iter()
                .map(|(t, v)| Point(t, v))
                .collect(),
            flagged_jumps: f.flagged_jumps,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::rational::{int, rat};

    fn capped_identity() -> TargetF {
        TargetF::new(vec![(int(0), int(0)), (int(1), int(1))]).unwrap()
    }

    #[test]
    fn interpolates_and_saturates() {
        let f = capped_identity();
        assert_eq!(f.eval(&rat(1, 3)), rat(1, 3));
        assert_eq!(f.eval(&int(5)), int(1));
        assert_eq!(f.eval(&rat(-1, 2)), int(0));
        assert_eq!(f.left_limit(&int(1)), int(1));
    }

    #[test]
    fn rejects_bad_breakpoints() {
        assert!(TargetF::new(vec![]).is_err());
        assert!(TargetF::new(vec![(int(1), int(0))]).is_err());
        assert!(TargetF::new(vec![(int(0), int(0)), (int(0), int(1))]).is_err());
        assert!(TargetF::with_flagged_jumps(vec![(int(0), int(0))], vec![0]).is_err());
    }
}
