use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::distributions::rational::{serde_rational, to_f64, uint, urat, Rational};
use crate::distributions::{Cdf, StepCdf};
use crate::{Error, Result};

/// Sampled hitting times scaled by the target measure.
///
/// The distribution function is the empirical one over uncensored samples;
/// the censored count is kept alongside and never enters it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "EmpiricalRepr", into = "EmpiricalRepr")]
pub struct EmpiricalCdf {
    mu: Rational,
    // sorted hitting times of the uncensored trajectories
    taus: Vec<u64>,
    censored: u64,
    run: Option<RunInfo>,
}

/// How a sample was drawn, kept so a run can be reproduced from its output.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunInfo {
    pub seed: u64,
    pub horizon: u64,
}

impl EmpiricalCdf {
    pub fn new(mu: Rational, mut taus: Vec<u64>, censored: u64) -> Result<Self> {
        if mu <= Rational::zero() {
            return Err(Error::NullTarget);
        }
        if taus.contains(&0) {
            return Err(Error::InvalidSystem("hitting times start at 1".into()));
        }
        taus.sort_unstable();
        Ok(Self {
            mu,
            taus,
            censored,
            run: None,
        })
    }

    pub fn with_run(mut self, run: RunInfo) -> Self {
        self.run = Some(run);
        self
    }

    pub fn run(&self) -> Option<RunInfo> {
        self.run
    }

    pub fn mu(&self) -> &Rational {
        &self.mu
    }

    pub fn taus(&self) -> &[u64] {
        &self.taus
    }

    /// Number of uncensored samples.
    pub fn count(&self) -> u64 {
        self.taus.len() as u64
    }

    pub fn censored(&self) -> u64 {
        self.censored
    }

    pub fn censored_fraction(&self) -> f64 {
        self.censored as f64 / (self.count() + self.censored).max(1) as f64
    }

    /// Sample values `μ(U) τ`, sorted.
    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        let mu = to_f64(&self.mu);
        self.taus.iter().map(move |&t| mu * t as f64)
    }

    /// Distinct hitting times with multiplicities.
    pub fn histogram(&self) -> Vec<(u64, u64)> {
        let mut out: Vec<(u64, u64)> = Vec::new();
        for &t in &self.taus {
            match out.last_mut() {
                Some((last, c)) if *last == t => *c += 1,
                _ => out.push((t, 1)),
            }
        }
        out
    }

    /// The empirical law as an exact step distribution function.
    pub fn to_step_cdf(&self) -> Result<StepCdf> {
        let n = self.count();
        if n == 0 {
            return Err(Error::EmptySample);
        }
        let jumps = self
            .histogram()
            .into_iter()
            .map(|(t, c)| (&self.mu * uint(t), urat(c, n)))
            .collect();
        StepCdf::new(jumps)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct EmpiricalRepr {
    #[serde(with = "serde_rational")]
    mu: Rational,
    count: u64,
    censored: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    horizon: Option<u64>,
    taus: Vec<u64>,
}

impl TryFrom<EmpiricalRepr> for EmpiricalCdf {
    type Error = Error;

    fn try_from(r: EmpiricalRepr) -> Result<Self> {
        if r.count != r.taus.len() as u64 {
            return Err(Error::InvalidSystem(format!(
                "count {} does not match {} samples",
                r.count,
                r.taus.len()
            )));
        }
        let run = match (r.seed, r.horizon) {
            (Some(seed), Some(horizon)) => Some(RunInfo { seed, horizon }),
            (None, None) => None,
            _ => return Err(Error::Parse("seed and horizon go together".into())),
        };
        let e = EmpiricalCdf::new(r.mu, r.taus, r.censored)?;
        Ok(EmpiricalCdf { run, ..e })
    }
}

impl From<EmpiricalCdf> for EmpiricalRepr {
    fn from(e: EmpiricalCdf) -> Self {
        EmpiricalRepr {
            mu: e.mu,
            count: e.taus.len() as u64,
            censored: e.censored,
            seed: e.run.map(|r| r.seed),
            horizon: e.run.map(|r| r.horizon),
            taus: e.taus,
        }
    }
}

/// Exact Kolmogorov–Smirnov distance to a reference curve, one-sided limits
/// included, over sample points and reference knots.
pub fn ks_distance<F: Cdf + ?Sized>(e: &EmpiricalCdf, reference: &F) -> Result<Rational> {
    Ok(crate::distributions::sup_distance_all(
        &e.to_step_cdf()?,
        reference,
    ))
}

/// KS distance to a continuous nondecreasing reference given in closed form.
/// The supremum is attained at sample points, on either side of a jump.
pub fn ks_distance_continuous(e: &EmpiricalCdf, reference: impl Fn(f64) -> f64) -> Result<f64> {
    let n = e.count();
    if n == 0 {
        return Err(Error::EmptySample);
    }
    let mu = to_f64(e.mu());
    let mut below = 0u64;
    let mut best = 0.0f64;
    for (t, c) in e.histogram() {
        let y = reference(mu * t as f64);
        let left = below as f64 / n as f64;
        below += c;
        let right = below as f64 / n as f64;
        best = best.max((y - left).abs()).max((y - right).abs());
    }
    Ok(best)
}
