//! Realization of admissible limits on the dyadic odometer.
//!
//! The odometer adds one with carry to the least significant binary digit, so
//! on cylinders of length `m` it acts as `x ↦ x + 1 mod 2^m`. The `2^m`
//! cylinders form an exact tower, and any union of them has the same hitting
//! statistics as the corresponding marked set of the cycle `Z/2^m`. Residue
//! `i` stands for the cylinder with index `i − 1`.
//!
//! A tower of height `2^m = r q + leftover` is cut into `r` blocks of height
//! `q`, each marked with the same stamp; the top `leftover` floors stay empty.

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::conditions::{check_class_f, RationalF};
use crate::cyclic::CyclicSystem;
use crate::distributions::rational::{serde_rational, uint, urat, Rational};
use crate::distributions::{levy_distance, StepCdf, TargetF};
use crate::rationalize::rationalize_target_with_budget;
use crate::stamp::{build_system, derive_params, make_stamp, Stamp, StampParams};
use crate::{Error, Result};

const MAX_EXPONENT: u32 = 40;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TowerStamping {
    pub m: u32,
    pub params: StampParams,
    pub stamp: Stamp,
    /// Number of full blocks of height `q`.
    pub r: u64,
    /// Unmarked floors above the last block.
    pub leftover: u64,
}

impl TowerStamping {
    pub fn new(m: u32, params: StampParams) -> Result<Self> {
        if m > MAX_EXPONENT {
            return Err(Error::TowerExponent(m));
        }
        let height = 1u64 << m;
        let q = params.q();
        if height < q {
            return Err(Error::TowerTooShort { m, q });
        }
        Ok(Self {
            m,
            stamp: make_stamp(&params),
            r: height / q,
            leftover: height % q,
            params,
        })
    }

    pub fn height(&self) -> u64 {
        1 << self.m
    }

    pub fn marked_count(&self) -> u64 {
        self.r * self.params.p()
    }

    pub fn measure(&self) -> Rational {
        urat(self.marked_count(), self.height())
    }

    /// `(p/q)(1 − q 2^{−m}) < μ(U) ≤ p/q`.
    pub fn measure_bound_holds(&self) -> bool {
        let (p, q) = (self.params.p(), self.params.q());
        let alpha = urat(p, q);
        let lower = &alpha * (Rational::one() - urat(q, self.height()));
        let mu = self.measure();
        lower < mu && mu <= alpha
    }

    /// Block `j` occupies floors `j q + 1 ..= (j + 1) q`.
    pub fn system(&self) -> CyclicSystem {
        let q = self.params.q();
        let marked = (0..self.r)
            .flat_map(|j| self.stamp.marked_offsets.iter().map(move |o| j * q + o + 1))
            .collect();
        CyclicSystem::from_sorted_unchecked(self.height(), marked)
    }
}

pub fn stamp_tower(m: u32, sp: &StampParams) -> Result<CyclicSystem> {
    Ok(TowerStamping::new(m, sp.clone())?.system())
}

/// Whether every block with another block above it sees the hitting-time
/// distribution of the stamp itself.
///
/// Hitting times are streamed floor by floor and compared, block by block,
/// with the histogram of the periodic system the stamp comes from; equal
/// histograms give equal conditional distribution functions at every `t`.
pub fn subtower_exactness_check(ts: &TowerStamping) -> Result<bool> {
    if ts.r < 2 {
        return Err(Error::TooFewSubtowers(ts.r));
    }
    Ok(blocks_match(ts, ts.r - 1))
}

/// Like [`subtower_exactness_check`] but includes the top block, which is
/// exact only when the blocks tile the tower.
pub fn all_subtowers_exact(ts: &TowerStamping) -> bool {
    blocks_match(ts, ts.r)
}

fn blocks_match(ts: &TowerStamping, blocks: u64) -> bool {
    let reference = build_system(&ts.params).hitting_times();
    let sys = ts.system();
    let marked = sys.marked();
    let q = ts.params.q();
    let n = ts.height();
    let mut next = 0usize;
    for j in 0..blocks {
        let mut counts = vec![0u64; reference.max_time() as usize + 1];
        for x in j * q + 1..=(j + 1) * q {
            while next < marked.len() && marked[next] <= x {
                next += 1;
            }
            let tau = match marked.get(next) {
                Some(u) => u - x,
                None => n - x + marked[0],
            };
            match counts.get_mut(tau as usize) {
                Some(c) => *c += 1,
                None => return false,
            }
        }
        if counts
            .iter()
            .enumerate()
            .skip(1)
            .any(|(k, &c)| c != reference.count(k as u64))
        {
            return false;
        }
    }
    true
}

/// One stage of the realization pipeline.
#[derive(Clone, Debug, Serialize)]
pub struct RealizationStage {
    #[serde(with = "serde_rational")]
    pub eps: Rational,
    /// Mesh count of the rational approximation.
    pub n: u64,
    pub q: u64,
    pub m: u32,
    pub r: u64,
    pub leftover: u64,
    #[serde(with = "serde_rational")]
    pub measure: Rational,
    #[serde(with = "serde_rational")]
    pub levy_distance: Rational,
    pub rational_f: RationalF,
    pub hitting_cdf: StepCdf,
    #[serde(skip)]
    pub tower: TowerStamping,
}

impl RealizationStage {
    /// The marked set on `Z/2^m`.
    pub fn system(&self) -> CyclicSystem {
        self.tower.system()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RealizationTrace {
    pub margin: u32,
    pub stages: Vec<RealizationStage>,
}

/// Smallest `m` with `2^m ≥ q/ε`.
pub fn min_exponent(q: u64, eps: &Rational) -> u32 {
    let target = uint(q) / eps;
    let two = uint(2);
    let (mut m, mut power) = (0, Rational::one());
    while power < target {
        power *= &two;
        m += 1;
    }
    m
}

/// Rationalizes `f0` at every `ε_n`, stamps a tower of height
/// `2^{m_n}`, `m_n = ⌈log₂(q_n/ε_n)⌉ + margin`, and records the Lévy distance
/// between the resulting hitting CDF and `f0`. Stages run in parallel.
pub fn realize(f0: &TargetF, eps_schedule: &[Rational], margin: u32) -> Result<RealizationTrace> {
    if eps_schedule.is_empty()
        || eps_schedule.iter().any(|e| *e <= Rational::zero())
        || eps_schedule.windows(2).any(|w| w[1] >= w[0])
    {
        return Err(Error::BadSchedule);
    }
    let report = check_class_f(f0);
    if !report.pass {
        return Err(Error::ClassViolated(report.violations[0].to_string()));
    }
    let stages = eps_schedule
        .par_iter()
        .map(|eps| realize_stage(f0, eps, margin))
        .collect::<Result<Vec<_>>>()?;
    Ok(RealizationTrace { margin, stages })
}

fn realize_stage(f0: &TargetF, eps: &Rational, margin: u32) -> Result<RealizationStage> {
    let approx = rationalize_target_with_budget(f0, eps)?;
    let rational_f = approx.rational_f;
    let q = rational_f.q();
    let m = min_exponent(q, eps) + margin;
    let tower = TowerStamping::new(m, derive_params(&rational_f)?)?;
    let hitting_cdf = tower.system().hitting_cdf();
    Ok(RealizationStage {
        eps: eps.clone(),
        n: approx.budget.n,
        q,
        m,
        r: tower.r,
        leftover: tower.leftover,
        measure: tower.measure(),
        levy_distance: levy_distance(&hitting_cdf, f0),
        rational_f,
        hitting_cdf,
        tower,
    })
}
