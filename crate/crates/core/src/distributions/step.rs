use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::rational::{format_rational, serde_rational, urat, Rational};
use super::Cdf;
use crate::{Error, Result};

/// A finitely supported, right-continuous jump distribution function.
///
/// Jump locations are strictly increasing and positive, sizes are positive and
/// the total mass never exceeds one. A value with total mass below one is the
/// distribution function of a sub-probability measure.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "StepCdfRepr", into = "StepCdfRepr")]
pub struct StepCdf {
    jumps: Vec<(Rational, Rational)>,
    // cumulative[i] = sum of sizes[0..=i]
    cumulative: Vec<Rational>,
}

impl StepCdf {
    pub fn new(jumps: Vec<(Rational, Rational)>) -> Result<Self> {
        let mut cumulative = Vec::with_capacity(jumps.len());
        let mut total = Rational::zero();
        let mut previous: Option<&Rational> = None;
        for (i, (t, size)) in jumps.iter().enumerate() {
            if *t <= Rational::zero() {
                return Err(Error::InvalidStepCdf(format!(
                    "jump {i} at non-positive location {}",
                    format_rational(t)
                )));
            }
            if let Some(p) = previous {
                if t <= p {
                    return Err(Error::InvalidStepCdf(format!(
                        "jump {i} at {} does not follow {}",
                        format_rational(t),
                        format_rational(p)
                    )));
                }
            }
            if *size <= Rational::zero() {
                return Err(Error::InvalidStepCdf(format!(
                    "jump {i} at {} has non-positive size {}",
                    format_rational(t),
                    format_rational(size)
                )));
            }
            total += size;
            cumulative.push(total.clone());
            previous = Some(t);
        }
        if total > Rational::one() {
            return Err(Error::InvalidStepCdf(format!(
                "total mass {} exceeds 1",
                format_rational(&total)
            )));
        }
        Ok(Self { jumps, cumulative })
    }

    /// Jumps of `count / q` at `numerator / q`, built from integer data that is
    /// already known to be valid: positive, increasing numerators, positive
    /// counts summing to at most `q`.
    pub(crate) fn from_counts(q: u64, jumps: impl IntoIterator<Item = (u64, u64)>) -> Self {
        let mut out = Self::empty();
        let mut total = 0u64;
        for (t, c) in jumps {
            total += c;
            out.jumps.push((urat(t, q), urat(c, q)));
            out.cumulative.push(urat(total, q));
        }
        debug_assert!(total <= q);
        out
    }

    /// The identically-zero distribution function.
    pub fn empty() -> Self {
        Self {
            jumps: Vec::new(),
            cumulative: Vec::new(),
        }
    }

    /// Jumps `sizes[k-1]` at `k * spacing` for `k = 1..=sizes.len()`.
    pub fn lattice(spacing: &Rational, sizes: &[Rational]) -> Result<Self> {
        let mut loc = Rational::zero();
        let jumps = sizes
            .iter()
            .map(|s| {
                loc += spacing;
                (loc.clone(), s.clone())
            })
            .collect();
        Self::new(jumps)
    }

    pub fn jumps(&self) -> &[(Rational, Rational)] {
        &self.jumps
    }

    pub fn len(&self) -> usize {
        self.jumps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.jumps.is_empty()
    }

    pub fn locations(&self) -> impl Iterator<Item = &Rational> {
        self.jumps.iter().map(|(t, _)| t)
    }

    pub fn sizes(&self) -> impl Iterator<Item = &Rational> {
        self.jumps.iter().map(|(_, s)| s)
    }

    /// Value of the function just after the `i`-th jump.
    pub fn cumulative(&self, i: usize) -> &Rational {
        &self.cumulative[i]
    }

    pub fn total_mass(&self) -> Rational {
        self.cumulative
            .last()
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    /// Keeps the jumps located at or before `horizon`.
    pub fn truncated(&self, horizon: &Rational) -> Self {
        let n = self.count_le(horizon);
        Self {
            jumps: self.jumps[..n].to_vec(),
            cumulative: self.cumulative[..n].to_vec(),
        }
    }

    // number of jumps located at or before t
    fn count_le(&self, t: &Rational) -> usize {
        self.jumps.partition_point(|(x, _)| x <= t)
    }

    fn count_lt(&self, t: &Rational) -> usize {
        self.jumps.partition_point(|(x, _)| x < t)
    }

    fn value_after(&self, n: usize) -> Rational {
        if n == 0 {
            Rational::zero()
        } else {
            self.cumulative[n - 1].clone()
        }
    }

    /// `∫_0^∞ (1 − F(t)) dt`, finite only when the total mass is exactly one.
    pub fn tail_integral(&self) -> Result<Rational> {
        let total = self.total_mass();
        if total != Rational::one() {
            return Err(Error::MassBelowOne(total));
        }
        let mut integral = Rational::zero();
        let mut left = Rational::zero();
        let mut level = Rational::zero();
        for ((t, _), cum) in self.jumps.iter().zip(&self.cumulative) {
            integral += (t - &left) * (Rational::one() - &level);
            left = t.clone();
            level = cum.clone();
        }
        Ok(integral)
    }
}

impl Cdf for StepCdf {
    fn eval(&self, t: &Rational) -> Rational {
        self.value_after(self.count_le(t))
    }

    fn left_limit(&self, t: &Rational) -> Rational {
        self.value_after(self.count_lt(t))
    }

    fn knots(&self) -> Vec<Rational> {
        self.locations().cloned().collect()
    }

    fn graph_vertices(&self) -> Vec<(Rational, Rational)> {
        let mut out = Vec::with_capacity(2 * self.jumps.len());
        let mut level = Rational::zero();
        for ((t, _), cum) in self.jumps.iter().zip(&self.cumulative) {
            out.push((t.clone(), level.clone()));
            out.push((t.clone(), cum.clone()));
            level = cum.clone();
        }
        out
    }
}

#[derive(Serialize, Deserialize)]
pub(crate) struct JumpRepr {
    #[serde(with = "serde_rational")]
    t: Rational,
    #[serde(with = "serde_rational")]
    size: Rational,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct StepCdfRepr {
    jumps: Vec<JumpRepr>,
}

impl TryFrom<StepCdfRepr> for StepCdf {
    type Error = Error;

    fn try_from(r: StepCdfRepr) -> Result<Self> {
        StepCdf::new(r.jumps.into_iter().map(|j| (j.t, j.size)).collect())
    }
}

impl From<StepCdf> for StepCdfRepr {
    fn from(f: StepCdf) -> Self {
        StepCdfRepr {
            jumps: f
                .jumps
                .into_iter()
                .map(|(t, size)| JumpRepr { t, size })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::rational::{int, rat};

    #[test]
    fn unit_step_evaluation() {
        let f = StepCdf::new(vec![(int(1), int(1))]).unwrap();
        assert_eq!(f.eval(&rat(1, 2)), int(0));
        assert_eq!(f.eval(&int(1)), int(1));
        assert_eq!(f.left_limit(&int(1)), int(0));
        assert_eq!(f.eval(&int(-3)), int(0));
    }

    #[test]
    fn rejects_malformed_jumps() {
        assert!(StepCdf::new(vec![(int(2), rat(1, 2)), (int(1), rat(1, 2))]).is_err());
        assert!(StepCdf::new(vec![(int(1), rat(1, 2)), (int(1), rat(1, 2))]).is_err());
        assert!(StepCdf::new(vec![(int(0), int(1))]).is_err());
        assert!(StepCdf::new(vec![(int(1), int(0))]).is_err());
        assert!(StepCdf::new(vec![(int(1), rat(3, 4)), (int(2), rat(1, 2))]).is_err());
    }

    #[test]
    fn tail_integrals() {
        let unit = StepCdf::new(vec![(int(1), int(1))]).unwrap();
        assert_eq!(unit.tail_integral().unwrap(), int(1));

        let two = StepCdf::new(vec![(rat(1, 2), rat(1, 2)), (int(1), rat(1, 2))]).unwrap();
        assert_eq!(two.tail_integral().unwrap(), rat(3, 4));

        let sub = StepCdf::new(vec![(int(1), rat(1, 2))]).unwrap();
        assert!(matches!(sub.tail_integral(), Err(Error::MassBelowOne(_))));
    }

    #[test]
    fn tail_integral_matches_riemann_sum() {
        // independent check by midpoint sums over a fine grid
        let f = StepCdf::new(vec![(rat(1, 2), rat(1, 2)), (int(1), rat(1, 2))]).unwrap();
        let steps = 4000;
        let h = 2.0 / steps as f64;
        let riemann: f64 = (0..steps)
            .map(|i| {
                let t = (i as f64 + 0.5) * h;
                let v = if t >= 1.0 {
                    1.0
                } else if t >= 0.5 {
                    0.5
                } else {
                    0.0
                };
                (1.0 - v) * h
            })
            .sum();
        assert!((riemann - 0.75).abs() < 1e-9);
        assert_eq!(f.tail_integral().unwrap(), rat(3, 4));
    }
}
