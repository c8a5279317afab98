//! Monte Carlo estimation of hitting-time laws from stationary starts.
//!
//! Trajectory `i` draws from a ChaCha8 stream selected by `i` under the
//! user seed, so results do not depend on how trajectories are scheduled
//! across threads.

mod empirical;
mod system;

use num_traits::Zero;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub(crate) use empirical::EmpiricalRepr;
pub use empirical::{ks_distance, ks_distance_continuous, EmpiricalCdf, RunInfo};
pub(crate) use system::SystemRepr;
pub use system::{BernoulliSpec, MarkovSpec, RotationSpec, SystemSpec, ROTATION_BITS};

use crate::{Error, Result};

/// Samples `samples` hitting times, censoring those beyond `horizon`.
pub fn simulate_hitting(
    spec: &SystemSpec,
    samples: u64,
    seed: u64,
    horizon: u64,
) -> Result<EmpiricalCdf> {
    if samples == 0 || horizon == 0 {
        return Err(Error::EmptySample);
    }
    let mu = spec.target_measure();
    if mu.is_zero() {
        return Err(Error::NullTarget);
    }
    let sampler = spec.sampler()?;
    let times: Vec<Option<u64>> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i);
            sampler.hitting_time(&mut rng, horizon)
        })
        .collect();
    let taus: Vec<u64> = times.iter().flatten().copied().collect();
    if taus.is_empty() {
        return Err(Error::AllCensored(samples));
    }
    let censored = samples - taus.len() as u64;
    Ok(EmpiricalCdf::new(mu, taus, censored)?.with_run(RunInfo { seed, horizon }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cyclic::CyclicSystem;
    use crate::distributions::rational::{int, rat, to_f64};
    use crate::distributions::{Cdf, StepCdf};

    fn worked() -> SystemSpec {
        SystemSpec::Cyclic(CyclicSystem::new(27, [1, 4, 7, 14, 21]).unwrap())
    }

    fn coin(word: Vec<usize>) -> SystemSpec {
        SystemSpec::Bernoulli(BernoulliSpec::new(vec![rat(1, 2), rat(1, 2)], word).unwrap())
    }

    #[test]
    fn cyclic_matches_exact_engine() {
        let n = 100_000;
        let e = simulate_hitting(&worked(), n, 1, 1000).unwrap();
        let exact = CyclicSystem::new(27, [1, 4, 7, 14, 21])
            .unwrap()
            .hitting_cdf();
        let d = to_f64(&ks_distance(&e, &exact).unwrap());
        assert!(d <= 3.0 / (n as f64).sqrt(), "{d}");
    }

    #[test]
    fn single_zero_is_geometric() {
        let n = 50_000;
        let e = simulate_hitting(&coin(vec![0]), n, 2, 200).unwrap();
        // P(τ = k) = 2^{-k}, scaled by μ = 1/2; tail beyond 60 is negligible
        let jumps = (1..=60)
            .map(|k| {
                (
                    rat(k, 2),
                    Rational::new(1.into(), num_bigint::BigInt::from(2).pow(k as u32)),
                )
            })
            .collect();
        let geometric = StepCdf::new(jumps).unwrap();
        let d = to_f64(&ks_distance(&e, &geometric).unwrap());
        assert!(d <= 3.0 / (n as f64).sqrt(), "{d}");
    }

    use crate::distributions::Rational;

    #[test]
    fn whole_space_hits_at_once() {
        let e = simulate_hitting(&coin(vec![]), 100, 0, 10).unwrap();
        assert!(e.taus().iter().all(|&t| t == 1));
        let step = e.to_step_cdf().unwrap();
        assert_eq!(step.jumps(), &[(int(1), int(1))]);
        let full = SystemSpec::Cyclic(CyclicSystem::new(5, 1..=5).unwrap());
        let e = simulate_hitting(&full, 100, 0, 10).unwrap();
        assert_eq!(e.to_step_cdf().unwrap().eval(&int(1)), int(1));
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let spec = coin(vec![0, 1, 1]);
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| simulate_hitting(&spec, 5000, 42, 500).unwrap())
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn censoring_is_sound() {
        let spec = coin(vec![0, 0, 0, 0, 0, 0]);
        let short = simulate_hitting(&spec, 4000, 9, 40).unwrap();
        let long = simulate_hitting(&spec, 4000, 9, 4000).unwrap();
        assert!(short.censored() > long.censored());
        let kept: Vec<u64> = long.taus().iter().copied().filter(|&t| t <= 40).collect();
        assert_eq!(short.taus(), kept.as_slice());
    }

    #[test]
    fn everything_censored() {
        let spec = coin(vec![0; 30]);
        assert!(matches!(
            simulate_hitting(&spec, 10, 0, 1),
            Err(Error::AllCensored(10))
        ));
    }

    #[test]
    fn rare_cylinder_is_nearly_exponential() {
        // 00000001 cannot overlap itself, so its hitting law is close to exp(1)
        let e = simulate_hitting(
            &coin(vec![0, 0, 0, 0, 0, 0, 0, 1]),
            100_000,
            2024,
            1_000_000,
        )
        .unwrap();
        let d = ks_distance_continuous(&e, |t| -(-t).exp_m1()).unwrap();
        assert!(d <= 0.05, "{d}");
    }

    #[test]
    fn rotation_arc() {
        // golden rotation, arc of length 1/100
        let spec = SystemSpec::Rotation(
            RotationSpec::new(
                crate::distributions::parse_rational("0.6180339887498948482").unwrap(),
                int(0),
                rat(1, 100),
            )
            .unwrap(),
        );
        let e = simulate_hitting(&spec, 20_000, 5, 10_000).unwrap();
        assert_eq!(e.censored(), 0);
        // every orbit of the golden rotation meets the arc within a few hundred steps
        assert!(e.taus().iter().all(|&t| t <= 300));
        assert_eq!(e.mu(), &rat(1, 100));
    }
}
