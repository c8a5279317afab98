//! The stamp machine: a rational distribution function becomes a periodic
//! system with a marked set whose hitting CDF is exactly that function.

use std::collections::BTreeMap;

use num_integer::Integer;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::conditions::RationalF;
use crate::cyclic::CyclicSystem;
use crate::distributions::rational::urat;
use crate::{Error, Result};

/// Run structure of a rational distribution function over its common
/// denominator `q`: jump value `pvals[j] / q` holds up to index `k[j]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StampParams {
    q: u64,
    p: u64,
    k: Vec<u64>,
    pvals: Vec<u64>,
}

impl StampParams {
    pub fn new(q: u64, k: Vec<u64>, pvals: Vec<u64>) -> Result<Self> {
        let invalid = |m: String| Err(Error::InvalidStampParams(m));
        if k.is_empty() || k.len() != pvals.len() {
            return invalid(format!(
                "{} change indices for {} values",
                k.len(),
                pvals.len()
            ));
        }
        if k[0] == 0 || k.windows(2).any(|w| w[0] >= w[1]) {
            return invalid("change indices must be positive and increasing".into());
        }
        if *pvals.last().expect("nonempty") == 0 || pvals.windows(2).any(|w| w[0] <= w[1]) {
            return invalid("jump values must be positive and decreasing".into());
        }
        let sum =
            identity_sum(&k, &pvals).ok_or_else(|| Error::TooLarge("q-identity sum".into()))?;
        if sum != q {
            return invalid(format!("q-identity gives {sum}, expected {q}"));
        }
        Ok(Self {
            q,
            p: pvals[0],
            k,
            pvals,
        })
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn k(&self) -> &[u64] {
        &self.k
    }

    pub fn pvals(&self) -> &[u64] {
        &self.pvals
    }

    /// Largest return time `k_s`.
    pub fn max_return(&self) -> u64 {
        *self.k.last().expect("nonempty")
    }

    /// Number of return gaps of each length: `p_j − p_{j+1}` gaps of `k_j`,
    /// with `p_{s+1} = 0`.
    pub fn gap_counts(&self) -> BTreeMap<u64, u64> {
        (0..self.k.len())
            .map(|j| {
                (
                    self.k[j],
                    self.pvals[j] - self.pvals.get(j + 1).copied().unwrap_or(0),
                )
            })
            .collect()
    }

    /// The rational distribution function these parameters describe.
    pub fn rational_f(&self) -> RationalF {
        let mut betas = Vec::new();
        let mut from = 0;
        for (&k, &p) in self.k.iter().zip(&self.pvals) {
            betas.extend((from..k).map(|_| urat(p, self.q)));
            from = k;
        }
        RationalF::new(urat(self.p, self.q), betas).expect("parameters satisfy the q-identity")
    }
}

fn identity_sum(k: &[u64], pvals: &[u64]) -> Option<u64> {
    let mut sum = 0u64;
    for j in 0..k.len() {
        let next = pvals.get(j + 1).copied().unwrap_or(0);
        sum = sum.checked_add(k[j].checked_mul(pvals[j] - next)?)?;
    }
    Some(sum)
}

/// A height-`q` marking pattern: offsets counted from the base of a block.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stamp {
    pub height: u64,
    pub marked_offsets: Vec<u64>,
}

impl Stamp {
    /// Cyclic gaps between consecutive offsets, wrap-around gap last.
    pub fn gaps(&self) -> Vec<u64> {
        let o = &self.marked_offsets;
        let mut out: Vec<u64> = o.windows(2).map(|w| w[1] - w[0]).collect();
        out.push(self.height - o[o.len() - 1] + o[0]);
        out
    }
}

pub fn derive_params(f: &RationalF) -> Result<StampParams> {
    let (k, pvals) = f.runs().into_iter().unzip();
    StampParams::new(f.q(), k, pvals)
}

/// Marks `1`, then walks `p_j − p_{j+1}` steps of `k_j` for `j < s` and
/// `p_s − 1` steps of `k_s`; one more step of `k_s` returns to `1`.
pub fn build_system(sp: &StampParams) -> CyclicSystem {
    let mut marked = Vec::with_capacity(sp.p as usize);
    let mut x = 1u64;
    marked.push(x);
    let s = sp.k.len();
    for j in 0..s {
        let steps = if j + 1 < s {
            sp.pvals[j] - sp.pvals[j + 1]
        } else {
            sp.pvals[j] - 1
        };
        for _ in 0..steps {
            x += sp.k[j];
            marked.push(x);
        }
    }
    CyclicSystem::from_sorted_unchecked(sp.q, marked)
}

pub fn make_stamp(sp: &StampParams) -> Stamp {
    Stamp {
        height: sp.q,
        marked_offsets: build_system(sp).marked().iter().map(|u| u - 1).collect(),
    }
}

/// Whether the built system's hitting CDF reproduces `f` exactly.
pub fn verify_roundtrip(f: &RationalF) -> bool {
    match derive_params(f) {
        Ok(sp) => build_system(&sp).hitting_cdf() == f.step_cdf(),
        Err(_) => false,
    }
}

/// Random parameters with `q ≤ max_q`: up to four distinct return times with
/// random multiplicities; `q` follows from the q-identity. The jump values
/// are coprime to `q`, so `q` is the reduced common denominator.
pub fn random_params<R: Rng + ?Sized>(rng: &mut R, max_q: u64) -> StampParams {
    assert!(max_q >= 1);
    loop {
        let s = rng.random_range(1..=4usize);
        let top = (max_q / 2).clamp(1, 400);
        let mut k: Vec<u64> = (0..s).map(|_| rng.random_range(1..=top)).collect();
        k.sort_unstable();
        k.dedup();
        let counts: Vec<u64> = (0..k.len()).map(|_| rng.random_range(1..=12u64)).collect();
        // pvals[j] = Σ_{i ≥ j} counts[i]
        let mut pvals: Vec<u64> = counts.clone();
        for j in (0..pvals.len().saturating_sub(1)).rev() {
            pvals[j] += pvals[j + 1];
        }
        let q: u64 = k.iter().zip(&counts).map(|(a, b)| a * b).sum();
        let g = pvals.iter().fold(q, |g, &p| g.gcd(&p));
        if q <= max_q && g == 1 {
            return StampParams::new(q, k, pvals).expect("valid by construction");
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::rational::{int, rat};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn worked() -> RationalF {
        let betas = [5, 5, 5, 3, 3, 3, 3].iter().map(|&c| rat(c, 27)).collect();
        RationalF::new(rat(5, 27), betas).unwrap()
    }

    #[test]
    fn worked_params_and_system() {
        let sp = derive_params(&worked()).unwrap();
        assert_eq!((sp.q(), sp.p()), (27, 5));
        assert_eq!(sp.k(), &[3, 7]);
        assert_eq!(sp.pvals(), &[5, 3]);
        let sys = build_system(&sp);
        assert_eq!(sys.marked(), &[1, 4, 7, 14, 21]);
        let mut gaps: Vec<u64> = sys.gaps().collect();
        gaps.sort_unstable();
        assert_eq!(gaps, vec![3, 3, 7, 7, 7]);
        assert_eq!(sys.hitting_cdf(), worked().step_cdf());
    }

    #[test]
    fn worked_stamp() {
        let stamp = make_stamp(&derive_params(&worked()).unwrap());
        assert_eq!(stamp.height, 27);
        assert_eq!(stamp.marked_offsets, vec![0, 3, 6, 13, 20]);
        let mut gaps = stamp.gaps();
        gaps.sort_unstable();
        assert_eq!(gaps, vec![3, 3, 7, 7, 7]);
    }

    #[test]
    fn trivial_params() {
        let one = RationalF::new(int(1), vec![int(1)]).unwrap();
        let sp = derive_params(&one).unwrap();
        assert_eq!(
            (sp.q(), sp.p(), sp.k(), sp.pvals()),
            (1, 1, &[1u64][..], &[1u64][..])
        );
        assert_eq!(build_system(&sp).marked(), &[1]);
        assert_eq!(make_stamp(&sp).marked_offsets, vec![0]);
        assert!(verify_roundtrip(&one));

        let halves = RationalF::new(rat(1, 2), vec![rat(1, 2), rat(1, 2)]).unwrap();
        let sp = derive_params(&halves).unwrap();
        assert_eq!(
            (sp.q(), sp.p(), sp.k(), sp.pvals()),
            (2, 1, &[2u64][..], &[1u64][..])
        );
        let sys = build_system(&sp);
        assert_eq!(sys.marked(), &[1]);
        assert_eq!(sys.hitting_cdf(), halves.step_cdf());
    }

    #[test]
    fn invalid_params_are_rejected() {
        assert!(StampParams::new(27, vec![3, 7], vec![5, 3]).is_ok());
        assert!(StampParams::new(28, vec![3, 7], vec![5, 3]).is_err());
        assert!(StampParams::new(27, vec![7, 3], vec![5, 3]).is_err());
        assert!(StampParams::new(27, vec![3, 7], vec![3, 5]).is_err());
        assert!(StampParams::new(1, vec![], vec![]).is_err());
    }

    #[test]
    fn params_round_trip_through_rational_f() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let sp = random_params(&mut rng, 5000);
            let f = sp.rational_f();
            assert_eq!(derive_params(&f).unwrap(), sp);
            assert!(verify_roundtrip(&f));
        }
    }

    #[test]
    fn built_system_structure() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let sp = random_params(&mut rng, 2000);
            let sys = build_system(&sp);
            assert_eq!(sys.marked_count(), sp.p());
            assert_eq!(sys.measure(), urat(sp.p(), sp.q()));
            assert_eq!(sys.gap_multiplicities(), sp.gap_counts());
            let stamp = make_stamp(&sp);
            for (u, o) in sys.marked().iter().zip(&stamp.marked_offsets) {
                assert_eq!(u - 1, *o);
            }
        }
    }
}
