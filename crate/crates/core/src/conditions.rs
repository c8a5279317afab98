//! Structural checks on hitting-time distribution functions and on their
//! possible limits.
//!
//! Any hitting CDF `F_U` satisfies four conditions:
//!
//! 1. its jumps sit at `μ(U), 2μ(U), …`;
//! 2. it is zero before `μ(U)` and constant between jumps;
//! 3. its jumps are nonincreasing;
//! 4. its first jump equals `μ(U)`.
//!
//! A step CDF meeting these with finitely many rational jumps is a
//! [`RationalF`]. Limits of hitting CDFs along sets of vanishing measure are
//! nondecreasing, null on `]−∞, 0]`, continuous, concave and below the
//! diagonal; [`check_class_f`] decides this for piecewise-linear candidates.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::distributions::rational::{format_rational, serde_rational, Rational};
use crate::distributions::{Cdf, StepCdf, TargetF};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    /// Jumps exactly at `α, 2α, …, Kα`.
    Lattice,
    /// Zero before the first jump, constant between jumps.
    NullBeforeFirst,
    DecreasingJumps,
    /// First jump size equals its location.
    FirstJump,
    /// Values outside `[0, 1]`.
    Range,
    Monotone,
    Concave,
    NullAtOrigin,
    BelowDiagonal,
    Continuity,
}

impl Condition {
    /// Item number `1..=4` for the hitting-CDF conditions.
    pub fn id(self) -> Option<u8> {
        match self {
            Condition::Lattice => Some(1),
            Condition::NullBeforeFirst => Some(2),
            Condition::DecreasingJumps => Some(3),
            Condition::FirstJump => Some(4),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub condition: Condition,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub id: Option<u8>,
    /// Location of the witness, when there is one.
    #[serde(
        skip_serializing_if = "Option::is_none",
        default,
        with = "opt_rational"
    )]
    pub at: Option<Rational>,
    pub detail: String,
}

impl Violation {
    fn new(condition: Condition, at: Option<&Rational>, detail: String) -> Self {
        Self {
            condition,
            id: condition.id(),
            at: at.cloned(),
            detail,
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.id {
            Some(id) => write!(f, "condition {id}: {}", self.detail),
            None => write!(f, "{:?}: {}", self.condition, self.detail),
        }
    }
}

mod opt_rational {
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::distributions::rational::{format_rational, parse_rational, Rational};

    pub fn serialize<S: Serializer>(x: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
        match x {
            Some(x) => s.serialize_str(&format_rational(x)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rational>, D::Error> {
        Option::<String>::deserialize(d)?
            .map(|s| parse_rational(&s).map_err(serde::de::Error::custom))
            .transpose()
    }
}

/// Outcome of a checker: passes exactly when no violation was found.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CReport {
    pub pass: bool,
    pub violations: Vec<Violation>,
}

impl CReport {
    pub fn from_violations(violations: Vec<Violation>) -> Self {
        Self {
            pass: violations.is_empty(),
            violations,
        }
    }

    /// Distinct condition item numbers that failed.
    pub fn failed_ids(&self) -> Vec<u8> {
        let mut ids: Vec<u8> = self.violations.iter().filter_map(|v| v.id).collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }

    pub fn has(&self, c: Condition) -> bool {
        self.violations.iter().any(|v| v.condition == c)
    }

    fn summary(&self) -> String {
        self.violations
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join("; ")
    }
}

/// Checks the four hitting-CDF conditions on a step CDF.
///
/// `α` is read off the first jump location. A missing jump before the last
/// one is a lattice violation: nonincreasing jumps cannot vanish and then
/// resume. Total mass below one is not reported here.
pub fn check_conditions_c(f: &StepCdf) -> CReport {
    let mut out = Vec::new();
    let Some((alpha, first)) = f.jumps().first() else {
        out.push(Violation::new(
            Condition::NullBeforeFirst,
            None,
            "no jumps: the function never leaves zero".into(),
        ));
        return CReport::from_violations(out);
    };

    let mut expected = Rational::zero();
    for (t, _) in f.jumps() {
        expected += alpha;
        if *t != expected {
            out.push(Violation::new(
                Condition::Lattice,
                Some(t),
                format!(
                    "jump at {} where {} was expected",
                    format_rational(t),
                    format_rational(&expected)
                ),
            ));
            expected = t.clone();
        }
    }

    for w in f.jumps().windows(2) {
        if w[1].1 > w[0].1 {
            out.push(Violation::new(
                Condition::DecreasingJumps,
                Some(&w[1].0),
                format!(
                    "jump {} at {} exceeds the previous jump {}",
                    format_rational(&w[1].1),
                    format_rational(&w[1].0),
                    format_rational(&w[0].1)
                ),
            ));
        }
    }

    if first != alpha {
        out.push(Violation::new(
            Condition::FirstJump,
            Some(alpha),
            format!(
                "first jump {} differs from its location {}",
                format_rational(first),
                format_rational(alpha)
            ),
        ));
    }
    CReport::from_violations(out)
}

/// Extracts the rational data of a step CDF meeting the conditions with
/// total mass one.
pub fn to_rational_f(f: &StepCdf) -> Result<RationalF> {
    let report = check_conditions_c(f);
    if !report.pass {
        return Err(Error::ConditionsViolated(report.summary()));
    }
    let total = f.total_mass();
    if total != Rational::one() {
        return Err(Error::MassBelowOne(total));
    }
    RationalF::new(f.jumps()[0].0.clone(), f.sizes().cloned().collect())
}

/// Membership of a piecewise-linear candidate in the class of admissible
/// limits: values in `[0, 1]`, zero at the origin, nondecreasing, concave,
/// below the diagonal, and no flagged jump steeper than slope one.
///
/// Checking `F(t) ≤ t` at breakpoints suffices: between breakpoints both
/// sides are affine.
pub fn check_class_f(f: &TargetF) -> CReport {
    let mut out = Vec::new();
    let bps = f.breakpoints();
    let (zero, one) = (Rational::zero(), Rational::one());

    if !bps[0].1.is_zero() {
        out.push(Violation::new(
            Condition::NullAtOrigin,
            Some(&bps[0].0),
            format!("value {} at the origin", format_rational(&bps[0].1)),
        ));
    }
    for (t, v) in bps {
        if *v < zero || *v > one {
            out.push(Violation::new(
                Condition::Range,
                Some(t),
                format!("value {} outside [0, 1]", format_rational(v)),
            ));
        }
        if v > t {
            out.push(Violation::new(
                Condition::BelowDiagonal,
                Some(t),
                format!(
                    "value {} exceeds t = {}",
                    format_rational(v),
                    format_rational(t)
                ),
            ));
        }
    }
    let slopes = f.slopes();
    for (i, s) in slopes.iter().enumerate() {
        if *s < zero {
            out.push(Violation::new(
                Condition::Monotone,
                Some(&bps[i].0),
                format!("decreasing segment with slope {}", format_rational(s)),
            ));
        }
    }
    for (i, w) in slopes.windows(2).enumerate() {
        if w[1] > w[0] {
            out.push(Violation::new(
                Condition::Concave,
                Some(&bps[i + 1].0),
                format!(
                    "slope increases from {} to {}",
                    format_rational(&w[0]),
                    format_rational(&w[1])
                ),
            ));
        }
    }
    // concave and below the diagonal forces every slope to be at most one
    for &i in f.flagged_jumps() {
        if slopes[i] > one {
            out.push(Violation::new(
                Condition::Continuity,
                Some(&bps[i].0),
                format!(
                    "flagged jump of height {} over width {}",
                    format_rational(&(&bps[i + 1].1 - &bps[i].1)),
                    format_rational(&(&bps[i + 1].0 - &bps[i].0))
                ),
            ));
        }
    }
    CReport::from_violations(out)
}

/// First pair `(s, t)` with `f(t) − f(s) > t − s + α`, if any.
///
/// `s` is returned as the jump location it approaches from below. The worst
/// pairs take `t` at a jump and `s` just below a jump, so a running minimum of
/// `f(x_j−) − x_j` over earlier jumps decides every `t` in one pass.
pub fn inequality_i_witness(f: &StepCdf, alpha: &Rational) -> Option<(Rational, Rational)> {
    let mut best: Option<(Rational, &Rational)> = None;
    for (i, (x, _)) in f.jumps().iter().enumerate() {
        let before = f.left_limit(x);
        let candidate = before - x;
        match &best {
            Some((b, _)) if *b <= candidate => {}
            _ => best = Some((candidate, x)),
        }
        let (floor, s) = best.as_ref().expect("set above");
        if f.cumulative(i) - x > floor + alpha {
            return Some(((*s).clone(), x.clone()));
        }
    }
    None
}

/// Whether `f(t) − f(s) ≤ t − s + α` for all `0 ≤ s < t`.
pub fn check_inequality_i(f: &StepCdf, alpha: &Rational) -> bool {
    inequality_i_witness(f, alpha).is_none()
}

/// A step CDF meeting the hitting-CDF conditions with finitely many rational
/// jumps: `β_k` at `k α` for `k = 1..=K`, `β_1 = α`, nonincreasing, summing to
/// one.
///
/// Writing every quantity over the common denominator `q`, the jump values
/// change at indices `k_1 < … < k_s = K` with values `p_1 > … > p_s`, and
/// `q = Σ_{j<s} k_j (p_j − p_{j+1}) + k_s p_s`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RationalFRepr", into = "RationalFRepr")]
pub struct RationalF {
    alpha: Rational,
    betas: Vec<Rational>,
    q: u64,
}

impl RationalF {
    pub fn new(alpha: Rational, betas: Vec<Rational>) -> Result<Self> {
        let invalid = |m: String| Err(Error::InvalidRationalF(m));
        if alpha <= Rational::zero() || alpha > Rational::one() {
            return invalid(format!("alpha {} outside ]0, 1]", format_rational(&alpha)));
        }
        let Some(first) = betas.first() else {
            return invalid("no jumps".into());
        };
        if *first != alpha {
            return invalid(format!(
                "first jump {} differs from alpha {}",
                format_rational(first),
                format_rational(&alpha)
            ));
        }
        if let Some(b) = betas.iter().find(|b| **b <= Rational::zero()) {
            return invalid(format!("non-positive jump {}", format_rational(b)));
        }
        if let Some(i) = betas.windows(2).position(|w| w[1] > w[0]) {
            return invalid(format!("jump {} increases", i + 2));
        }
        let q = betas
            .iter()
            .fold(alpha.denom().clone(), |acc: BigInt, b| acc.lcm(b.denom()));
        let total: BigInt = betas.iter().map(|b| b.numer() * (&q / b.denom())).sum();
        if total != q {
            return invalid(format!(
                "jumps sum to {}",
                format_rational(&Rational::new(total, q))
            ));
        }
        let q = q.to_u64().ok_or_else(|| Error::TooLarge(q.to_string()))?;
        Ok(Self { alpha, betas, q })
    }

    pub fn alpha(&self) -> &Rational {
        &self.alpha
    }

    pub fn betas(&self) -> &[Rational] {
        &self.betas
    }

    /// Number of jumps `K`.
    pub fn len(&self) -> usize {
        self.betas.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Common denominator of `α` and all jumps.
    pub fn q(&self) -> u64 {
        self.q
    }

    /// `p = α q`.
    pub fn p(&self) -> u64 {
        self.numerator_over_q(&self.alpha)
    }

    fn numerator_over_q(&self, x: &Rational) -> u64 {
        let n = x.numer().to_u64().expect("positive numerator");
        let d = x.denom().to_u64().expect("denominator divides q");
        n * (self.q / d)
    }

    /// Run structure `(k_j, p_j)`: jump values `p_j / q` hold up to index
    /// `k_j` (1-based, inclusive).
    pub fn runs(&self) -> Vec<(u64, u64)> {
        let mut out: Vec<(u64, u64)> = Vec::new();
        for (i, b) in self.betas.iter().enumerate() {
            let p = self.numerator_over_q(b);
            match out.last_mut() {
                Some((k, last)) if *last == p => *k = i as u64 + 1,
                _ => out.push((i as u64 + 1, p)),
            }
        }
        out
    }

    /// Change indices `k_1 < … < k_s = K`.
    pub fn change_indices(&self) -> Vec<u64> {
        self.runs().into_iter().map(|(k, _)| k).collect()
    }

    /// Distinct jump numerators `p_1 > … > p_s`.
    pub fn pvals(&self) -> Vec<u64> {
        self.runs().into_iter().map(|(_, p)| p).collect()
    }

    /// Number `s` of distinct jump values.
    pub fn distinct_values(&self) -> usize {
        self.runs().len()
    }

    /// `Σ_{j<s} k_j (p_j − p_{j+1}) + k_s p_s`; equals `q` for every valid value.
    pub fn q_identity_sum(&self) -> u64 {
        let runs = self.runs();
        runs.iter()
            .enumerate()
            .map(|(j, &(k, p))| {
                let next = runs.get(j + 1).map_or(0, |r| r.1);
                k * (p - next)
            })
            .sum()
    }

    pub fn step_cdf(&self) -> StepCdf {
        let p = self.p();
        StepCdf::from_counts(
            self.q,
            self.betas
                .iter()
                .enumerate()
                .map(|(i, b)| ((i as u64 + 1) * p, self.numerator_over_q(b))),
        )
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct RationalFRepr {
    #[serde(with = "serde_rational")]
    alpha: Rational,
    betas: Vec<RationalString>,
}

#[derive(Serialize, Deserialize)]
#[serde(transparent)]
pub(crate) struct RationalString(#[serde(with = "serde_rational")] Rational);

impl TryFrom<RationalFRepr> for RationalF {
    type Error = Error;

    fn try_from(r: RationalFRepr) -> Result<Self> {
        RationalF::new(r.alpha, r.betas.into_iter().map(|b| b.0).collect())
    }
}

impl From<RationalF> for RationalFRepr {
    fn from(f: RationalF) -> Self {
        RationalFRepr {
            alpha: f.alpha,
            betas: f.betas.into_iter().map(RationalString).collect(),
        }
    }
}
