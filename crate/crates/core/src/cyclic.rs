//! Hitting and return times for a marked subset of a finite cycle.
//!
//! The space is `{1, …, q}` with the uniform measure and the map
//! `x ↦ x + 1` (and `q ↦ 1`). Every ergodic periodic system is conjugate to
//! one of these, and the `m`-cylinders of the dyadic odometer form one with
//! `q = 2^m`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::distributions::rational::{urat, Rational};
use crate::distributions::StepCdf;
use crate::{Error, Result};

/// A cycle of length `q` with a nonempty marked set `U` of 1-based residues.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "CyclicRepr", into = "CyclicRepr")]
pub struct CyclicSystem {
    q: u64,
    // sorted, distinct, within 1..=q
    marked: Vec<u64>,
}

impl CyclicSystem {
    pub fn new(q: u64, marked: impl IntoIterator<Item = u64>) -> Result<Self> {
        if q == 0 {
            return Err(Error::ZeroPeriod);
        }
        let mut marked: Vec<u64> = marked.into_iter().collect();
        if marked.is_empty() {
            return Err(Error::EmptyMarked);
        }
        if let Some(&residue) = marked.iter().find(|&&x| x == 0 || x > q) {
            return Err(Error::ResidueOutOfRange { residue, q });
        }
        marked.sort_unstable();
        if let Some(w) = marked.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicateResidue(w[0]));
        }
        Ok(Self { q, marked })
    }

    /// Builds from residues already known to be sorted, distinct and in range.
    pub(crate) fn from_sorted_unchecked(q: u64, marked: Vec<u64>) -> Self {
        debug_assert!(!marked.is_empty());
        debug_assert!(marked.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(marked[0] >= 1 && *marked.last().unwrap() <= q);
        Self { q, marked }
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn marked(&self) -> &[u64] {
        &self.marked
    }

    pub fn marked_count(&self) -> u64 {
        self.marked.len() as u64
    }

    /// `μ(U) = |U| / q`.
    pub fn measure(&self) -> Rational {
        urat(self.marked_count(), self.q)
    }

    pub fn is_marked(&self, x: u64) -> bool {
        self.marked.binary_search(&x).is_ok()
    }

    /// Hitting time `τ_U(x) = min{k ≥ 1 : T^k x ∈ U}` of a single residue.
    pub fn hitting_time(&self, x: u64) -> u64 {
        let i = self.marked.partition_point(|&u| u <= x);
        match self.marked.get(i) {
            Some(&u) => u - x,
            None => self.marked[0] + self.q - x,
        }
    }

    /// Cyclic gaps from each marked residue to the next one, in residue order.
    /// These are the return times of the marked points; they sum to `q`.
    pub fn gaps(&self) -> impl Iterator<Item = u64> + '_ {
        let wrap = self.marked[0] + self.q - self.marked[self.marked.len() - 1];
        self.marked
            .windows(2)
            .map(|w| w[1] - w[0])
            .chain(std::iter::once(wrap))
    }

    /// Return time value ↦ number of marked residues with that return time.
    pub fn gap_multiplicities(&self) -> BTreeMap<u64, u64> {
        let mut out = BTreeMap::new();
        for g in self.gaps() {
            *out.entry(g).or_insert(0) += 1;
        }
        out
    }

    /// Histogram of `τ_U` over all `q` points.
    ///
    /// A point sitting `j` steps below the next marked residue has hitting time
    /// `j`, so a gap of length `g` contributes one point to each of
    /// `1, …, g`. One pass over the marked residues accumulates the gaps; a
    /// suffix sum turns them into counts.
    pub fn hitting_times(&self) -> HittingHistogram {
        let mults = self.gap_multiplicities();
        let max_gap = *mults.keys().next_back().expect("nonempty") as usize;
        let mut counts = vec![0u64; max_gap];
        for (&g, &m) in &mults {
            counts[g as usize - 1] += m;
        }
        for k in (0..max_gap.saturating_sub(1)).rev() {
            counts[k] += counts[k + 1];
        }
        HittingHistogram { counts }
    }

    /// `F_U(t) = μ(μ(U) τ_U ≤ t)`: a jump of `count(k) / q` at `k μ(U)`.
    pub fn hitting_cdf(&self) -> StepCdf {
        let p = self.marked_count();
        StepCdf::from_counts(self.q, self.hitting_times().iter().map(|(k, c)| (k * p, c)))
    }

    /// `F̃_U(t) = μ(U ∩ {μ(U) τ_U ≤ t}) / μ(U)`.
    pub fn return_cdf(&self) -> StepCdf {
        let p = self.marked_count();
        let jumps = self
            .gap_multiplicities()
            .into_iter()
            .map(|(g, m)| (urat(g * p, self.q), urat(m, p)))
            .collect();
        StepCdf::new(jumps).expect("return CDF is a valid step CDF")
    }

    /// `Σ_t t μ(U ∩ {τ_U = t})`, which Kac's theorem pins at one.
    pub fn kac_expectation(&self) -> Rational {
        let total: u64 = self.gaps().sum();
        urat(total, self.q)
    }

    /// One skyscraper per distinct return time, ordered by height.
    pub fn kac_town(&self) -> KacTown {
        let skyscrapers = self
            .gap_multiplicities()
            .into_iter()
            .map(|(height, m)| Skyscraper {
                height,
                base_width: urat(m, self.q),
            })
            .collect();
        KacTown {
            skyscrapers,
            ground: self.measure(),
        }
    }
}

/// Counts of points by hitting time; `count(k)` is nonincreasing in `k` and
/// positive up to the largest return time.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HittingHistogram {
    // counts[k - 1] = #{x : τ_U(x) = k}
    counts: Vec<u64>,
}

impl HittingHistogram {
    pub fn count(&self, k: u64) -> u64 {
        if k == 0 {
            return 0;
        }
        self.counts.get(k as usize - 1).copied().unwrap_or(0)
    }

    pub fn max_time(&self) -> u64 {
        self.counts.len() as u64
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// `(k, count)` pairs for `k = 1..=max_time`.
    pub fn iter(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.counts
            .iter()
            .enumerate()
            .map(|(i, &c)| (i as u64 + 1, c))
    }

    pub fn to_map(&self) -> BTreeMap<u64, u64> {
        self.iter().collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Skyscraper {
    pub height: u64,
    #[serde(with = "crate::distributions::rational::serde_rational")]
    pub base_width: Rational,
}

/// Kac's town over `U`: skyscrapers over `U ∩ {τ_U = k}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KacTown {
    pub skyscrapers: Vec<Skyscraper>,
    #[serde(with = "crate::distributions::rational::serde_rational")]
    pub ground: Rational,
}

impl KacTown {
    /// Total measure of all floors; equals one.
    pub fn total_floor_measure(&self) -> Rational {
        self.skyscrapers
            .iter()
            .map(|s| Rational::from_integer(s.height.into()) * &s.base_width)
            .sum()
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct CyclicRepr {
    q: u64,
    marked: Vec<u64>,
}

impl TryFrom<CyclicRepr> for CyclicSystem {
    type Error = Error;

    fn try_from(r: CyclicRepr) -> Result<Self> {
        CyclicSystem::new(r.q, r.marked)
    }
}

impl From<CyclicSystem> for CyclicRepr {
    fn from(s: CyclicSystem) -> Self {
        CyclicRepr {
            q: s.q,
            marked: s.marked,
        }
    }
}
