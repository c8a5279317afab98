//! Rational approximation of admissible limits and of hitting CDFs in the
//! `(ε, ε)` sense: for every `t ∈ [0, 1/ε]` some `s` with `|s − t| < ε` has
//! `|F_0(t) − F(s)| ≤ ε`.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::conditions::{check_class_f, check_conditions_c, to_rational_f, RationalF};
use crate::distributions::rational::{serde_rational, uint, Rational};
use crate::distributions::{Cdf, StepCdf, TargetF};
use crate::{Error, Result};

const MAX_JUMPS: usize = 5_000_000;

/// Mesh `1/N` over `[0, N]` with `N > 1/ε`; jump sizes live on the grid
/// `1/N³`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StarBudget {
    #[serde(with = "serde_rational")]
    pub eps: Rational,
    pub n: u64,
}

impl StarBudget {
    /// The smallest admissible `N`, namely `⌊1/ε⌋ + 1`.
    pub fn new(eps: &Rational) -> Result<Self> {
        if !eps.is_positive() {
            return Err(Error::NonPositiveEpsilon(eps.clone()));
        }
        let n: BigInt = eps.recip().floor().to_integer() + 1;
        let n = n
            .to_u64()
            .ok_or_else(|| Error::TooLarge(format!("mesh count {n}")))?;
        Ok(Self {
            eps: eps.clone(),
            n,
        })
    }

    fn with_n(&self, n: u64) -> Self {
        Self {
            eps: self.eps.clone(),
            n,
        }
    }

    // candidates tried before giving up
    fn search_limit(&self) -> u64 {
        8 * self.n + 8
    }
}

/// A rational approximation with the mesh it was built on.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Rationalization {
    pub budget: StarBudget,
    pub rational_f: RationalF,
}

pub fn rationalize_target(f0: &TargetF, eps: &Rational) -> Result<RationalF> {
    rationalize_target_with_budget(f0, eps).map(|r| r.rational_f)
}

/// Jumps of `1/N` at first, then the mesh increments of `f0` rounded up to
/// the `1/N³` grid (never below one grid step), capped at total mass one and
/// completed beyond `N` by equal jumps. `N` starts at `⌊1/ε⌋ + 1` and grows
/// until the result is verified.
pub fn rationalize_target_with_budget(f0: &TargetF, eps: &Rational) -> Result<Rationalization> {
    let budget = StarBudget::new(eps)?;
    let report = check_class_f(f0);
    if !report.pass {
        let first = &report.violations[0];
        return Err(Error::ClassViolated(first.to_string()));
    }
    search(&budget, f0, |n| mesh_profile(f0, n))
}

pub fn rationalize_step(f: &StepCdf, eps: &Rational) -> Result<RationalF> {
    rationalize_step_with_budget(f, eps).map(|r| r.rational_f)
}

/// Inputs that are already rational with denominator at most `N³` come back
/// unchanged. Otherwise the jumps up to the horizon `N` are snapped up to the
/// `1/N³` grid, or, when the spacing is finer than `1/N`, the lattice points
/// are interpolated and the target construction applies.
pub fn rationalize_step_with_budget(f: &StepCdf, eps: &Rational) -> Result<Rationalization> {
    let budget = StarBudget::new(eps)?;
    let report = check_conditions_c(f);
    if !report.pass {
        let first = &report.violations[0];
        return Err(Error::ConditionsViolated(first.to_string()));
    }
    if f.total_mass().is_one() {
        let exact = to_rational_f(f)?;
        if u128::from(exact.q()) <= u128::from(budget.n).pow(3) {
            return Ok(Rationalization {
                budget,
                rational_f: exact,
            });
        }
    }
    search(&budget, f, |n| snap_step(f, n))
}

fn search<F: Cdf + ?Sized>(
    budget: &StarBudget,
    f0: &F,
    build: impl Fn(u64) -> Result<RationalF>,
) -> Result<Rationalization> {
    let max_n = budget.search_limit();
    for n in budget.n..=max_n {
        let candidate = build(n)?;
        if star_holds(f0, &candidate.step_cdf(), &budget.eps) {
            return Ok(Rationalization {
                budget: budget.with_n(n),
                rational_f: candidate,
            });
        }
    }
    Err(Error::StarUnreachable {
        eps: budget.eps.clone(),
        max_n,
    })
}

fn cube(n: u64) -> BigInt {
    BigInt::from(n).pow(3)
}

// max(⌈x·g⌉, 1) / g
fn round_up_to_grid(x: &Rational, g: &BigInt) -> Rational {
    let units = (x * Rational::from_integer(g.clone())).ceil().to_integer();
    Rational::new(units.max(BigInt::one()), g.clone())
}

fn mesh_profile(f0: &TargetF, n: u64) -> Result<RationalF> {
    let h = Rational::new(BigInt::one(), BigInt::from(n));
    let grid = cube(n);
    let mut sizes = vec![h.clone()];
    let mut cum = h.clone();
    let mut previous = f0.eval(&h);
    for k in 1..n * n {
        if cum.is_one() {
            break;
        }
        let next = f0.eval(&(uint(k + 1) * &h));
        let step = round_up_to_grid(&(&next - &previous), &grid);
        previous = next;
        push_capped(&mut sizes, &mut cum, step);
    }
    complete(h, sizes, cum)
}

fn snap_step(f: &StepCdf, n: u64) -> Result<RationalF> {
    let alpha = f.jumps()[0].0.clone();
    let horizon = uint(n);
    let h = Rational::new(BigInt::one(), BigInt::from(n));
    if alpha < h {
        // lattice increments are nonincreasing, so this interpolant is concave
        let mut pts = vec![(Rational::zero(), Rational::zero())];
        for (i, (t, _)) in f.jumps().iter().enumerate() {
            pts.push((t.clone(), f.cumulative(i).clone()));
            if *t >= horizon {
                break;
            }
        }
        let interpolant = TargetF::new(pts)?;
        return mesh_profile(&interpolant, n);
    }
    let grid = cube(n);
    let spacing = round_up_to_grid(&alpha, &grid);
    let mut sizes = Vec::new();
    let mut cum = Rational::zero();
    let mut at = alpha.clone();
    let mut k = 0;
    while at <= horizon && !cum.is_one() {
        let beta = f
            .jumps()
            .get(k)
            .map(|(_, s)| s.clone())
            .unwrap_or_else(Rational::zero);
        push_capped(&mut sizes, &mut cum, round_up_to_grid(&beta, &grid));
        k += 1;
        at += &alpha;
    }
    complete(spacing, sizes, cum)
}

fn push_capped(sizes: &mut Vec<Rational>, cum: &mut Rational, step: Rational) {
    let room = Rational::one() - &*cum;
    let step = step.min(room);
    *cum += &step;
    sizes.push(step);
}

/// Appends equal copies of the last jump and one smaller remainder until the
/// total mass is one.
fn complete(alpha: Rational, mut sizes: Vec<Rational>, cum: Rational) -> Result<RationalF> {
    let rest = Rational::one() - &cum;
    if rest.is_positive() {
        let last = sizes.last().expect("at least one jump").clone();
        let copies = (&rest / &last).floor().to_integer();
        let copies = copies
            .to_usize()
            .filter(|c| c + sizes.len() < MAX_JUMPS)
            .ok_or_else(|| Error::TooLarge(format!("{copies} tail jumps")))?;
        let remainder = &rest - &last * Rational::from_integer(copies.into());
        sizes.extend(std::iter::repeat_n(last, copies));
        if remainder.is_positive() {
            sizes.push(remainder);
        }
    }
    RationalF::new(alpha, sizes)
}

/// Exact decision of the `(ε, ε)` closeness of `f` to `f0` on `[0, 1/ε]`.
pub fn check_star<F: Cdf + ?Sized>(f0: &F, f: &RationalF, eps: &Rational) -> bool {
    star_holds(f0, &f.step_cdf(), eps)
}

/// For a fixed `t` the values `f(s)`, `|s − t| < ε`, form the finite set of
/// levels `f(max(t − ε, 0))` and `f(x_j)` for jumps `x_j` inside the window.
/// That set only changes when `t ± ε` crosses a jump, and `f0` is affine
/// between its knots, so checking every event point and every open interval
/// between events decides all `t`.
pub fn star_holds<F: Cdf + ?Sized>(f0: &F, f: &StepCdf, eps: &Rational) -> bool {
    assert!(eps.is_positive(), "eps must be positive");
    let horizon = eps.recip();
    let zero = Rational::zero();
    let mut events = f0.knots();
    events.extend([zero.clone(), eps.clone(), horizon.clone()]);
    for x in f.locations() {
        let below = x - eps;
        if below > horizon {
            break;
        }
        events.push(below);
        events.push(x + eps);
    }
    events.retain(|t| *t >= zero && *t <= horizon);
    events.sort();
    events.dedup();

    let two = Rational::from_integer(2.into());
    for (i, t) in events.iter().enumerate() {
        let y = f0.eval(t);
        if !covered(&levels(f, t, eps), &y, &y, eps) {
            return false;
        }
        if let Some(b) = events.get(i + 1) {
            let mid = (t + b) / &two;
            if !covered(&levels(f, &mid, eps), &y, &f0.left_limit(b), eps) {
                return false;
            }
        }
    }
    true
}

fn levels(f: &StepCdf, t: &Rational, eps: &Rational) -> Vec<Rational> {
    let lo = t - eps;
    let hi = t + eps;
    let jumps = f.jumps();
    let base = if lo.is_negative() {
        Rational::zero()
    } else {
        f.eval(&lo)
    };
    let start = jumps.partition_point(|(x, _)| *x <= lo);
    let end = jumps.partition_point(|(x, _)| *x < hi);
    std::iter::once(base)
        .chain((start..end).map(|i| f.cumulative(i).clone()))
        .collect()
}

/// Whether `[lo, hi]` lies inside `⋃ [L − ε, L + ε]` over sorted levels `L`.
fn covered(levels: &[Rational], lo: &Rational, hi: &Rational, eps: &Rational) -> bool {
    let mut component: Option<(Rational, Rational)> = None;
    for level in levels {
        let (a, b) = (level - eps, level + eps);
        component = match component {
            Some((start, end)) if a <= end => Some((start, b.max(end))),
            Some((start, end)) => {
                if start <= *lo && *hi <= end {
                    return true;
                }
                Some((a, b))
            }
            None => Some((a, b)),
        };
    }
    matches!(component, Some((start, end)) if start <= *lo && *hi <= end)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conditions::check_conditions_c;
    use crate::cyclic::CyclicSystem;
    use crate::distributions::rational::{int, rat, to_f64};
    use crate::distributions::{cdf_from_builtin, levy_distance};

    fn min_t_1() -> TargetF {
        TargetF::new(vec![(int(0), int(0)), (int(1), int(1))]).unwrap()
    }

    fn exp1() -> TargetF {
        cdf_from_builtin("exp1", &[], &rat(1, 64)).unwrap()
    }

    /// The closeness condition scanned over t on a grid of spacing `step`,
    /// with candidate s on a finer grid around t.
    fn star_by_grid(f0: &dyn Cdf, f: &StepCdf, eps: f64, step: f64) -> bool {
        let horizon = 1.0 / eps;
        let mut t = 0.0;
        while t <= horizon + 1e-12 {
            let y = to_f64(&f0.eval(&Rational::from_float(t).unwrap()));
            let mut ok = false;
            let mut s = (t - eps).max(0.0);
            while s < t + eps {
                let v = to_f64(&f.eval(&Rational::from_float(s).unwrap()));
                if (v - y).abs() <= eps + 1e-12 {
                    ok = true;
                    break;
                }
                s += eps / 64.0;
            }
            if !ok {
                return false;
            }
            t += step;
        }
        true
    }

    #[test]
    fn min_t_1_at_one_half() {
        let r = rationalize_target_with_budget(&min_t_1(), &rat(1, 2)).unwrap();
        assert_eq!(r.budget.n, 3);
        assert_eq!(r.rational_f.alpha(), &rat(1, 3));
        assert_eq!(r.rational_f.betas(), &[rat(1, 3), rat(1, 3), rat(1, 3)]);
        assert!(check_star(&min_t_1(), &r.rational_f, &rat(1, 2)));
        assert!(star_by_grid(
            &min_t_1(),
            &r.rational_f.step_cdf(),
            0.5,
            1.0 / 12.0
        ));
    }

    #[test]
    fn zero_target_puts_mass_in_the_tail() {
        let zero = TargetF::new(vec![(int(0), int(0))]).unwrap();
        let eps = rat(1, 2);
        let f = rationalize_target(&zero, &eps).unwrap();
        assert!(check_conditions_c(&f.step_cdf()).pass);
        assert!(check_star(&zero, &f, &eps));
    }

    #[test]
    fn exp1_at_one_eighth() {
        let eps = rat(1, 8);
        let f = rationalize_target(&exp1(), &eps).unwrap();
        assert!(check_conditions_c(&f.step_cdf()).pass);
        assert!(check_star(&exp1(), &f, &eps));
        assert!(star_by_grid(&exp1(), &f.step_cdf(), 0.125, 1.0 / 64.0));
    }

    #[test]
    fn output_shape() {
        for eps in [rat(1, 3), rat(1, 8), rat(2, 7)] {
            let r = rationalize_target_with_budget(&exp1(), &eps).unwrap();
            let f = &r.rational_f;
            let h = rat(1, r.budget.n as i64);
            assert_eq!(f.alpha(), &h);
            assert!(f.betas().iter().all(|b| *b <= h));
            assert!(u128::from(f.q()) <= u128::from(r.budget.n).pow(3));
            assert!(uint(r.budget.n) * &eps > int(1));
        }
    }

    #[test]
    fn gross_mismatch_fails() {
        let unit = RationalF::new(int(1), vec![int(1)]).unwrap();
        assert!(!check_star(&min_t_1(), &unit, &rat(1, 10)));
    }

    #[test]
    fn star_is_monotone_in_eps() {
        let f = rationalize_target(&exp1(), &rat(1, 8)).unwrap();
        for eps in [rat(1, 8), rat(1, 6), rat(1, 4), rat(1, 2)] {
            assert!(check_star(&exp1(), &f, &eps));
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            rationalize_target(&min_t_1(), &int(0)),
            Err(Error::NonPositiveEpsilon(_))
        ));
        let convex = TargetF::new(vec![
            (int(0), int(0)),
            (int(1), rat(1, 4)),
            (int(2), int(1)),
        ])
        .unwrap();
        assert!(matches!(
            rationalize_target(&convex, &rat(1, 2)),
            Err(Error::ClassViolated(_))
        ));
        let bad = StepCdf::new(vec![(rat(1, 2), rat(1, 4)), (int(1), rat(3, 4))]).unwrap();
        assert!(matches!(
            rationalize_step(&bad, &rat(1, 2)),
            Err(Error::ConditionsViolated(_))
        ));
    }

    #[test]
    fn worked_is_a_fixed_point() {
        let fu = CyclicSystem::new(27, [1, 4, 7, 14, 21])
            .unwrap()
            .hitting_cdf();
        let r = rationalize_step(&fu, &rat(1, 100)).unwrap();
        assert_eq!(r.step_cdf(), fu);
    }

    #[test]
    fn geometric_jumps() {
        let jumps = (1..=20)
            .map(|k| {
                (
                    rat(k, 2),
                    Rational::new(1.into(), BigInt::from(2).pow(k as u32)),
                )
            })
            .collect();
        let f = StepCdf::new(jumps).unwrap();
        let eps = rat(1, 4);
        let r = rationalize_step(&f, &eps).unwrap();
        assert!(check_conditions_c(&r.step_cdf()).pass);
        assert!(check_star(&f, &r, &eps));
        assert!(star_by_grid(&f, &r.step_cdf(), 0.25, 1.0 / 32.0));
    }

    #[test]
    fn fine_hitting_cdf_is_coarsened() {
        // spacing 1/40 is finer than the mesh 1/5
        let sys = CyclicSystem::new(200, [1, 9, 20, 31, 70]).unwrap();
        let f = sys.hitting_cdf();
        let eps = rat(1, 4);
        let r = rationalize_step_with_budget(&f, &eps).unwrap();
        assert!(check_conditions_c(&r.rational_f.step_cdf()).pass);
        assert!(check_star(&f, &r.rational_f, &eps));
    }

    #[test]
    fn short_mass_is_completed() {
        let f = StepCdf::new(vec![(rat(1, 2), rat(1, 2)), (int(1), rat(1, 4))]).unwrap();
        let eps = rat(1, 4);
        let r = rationalize_step(&f, &eps).unwrap();
        assert_eq!(r.betas().iter().sum::<Rational>(), int(1));
        assert!(check_star(&f, &r, &eps));
    }

    #[test]
    fn levy_convergence_on_exp1() {
        let f0 = exp1();
        for n in 1..=5 {
            let eps = rat(1, 1 << n);
            let f = rationalize_target(&f0, &eps).unwrap();
            let truncated = f.step_cdf().truncated(&eps.recip());
            let d = levy_distance(&f0, &truncated);
            assert!(d <= &eps * int(2), "n = {n}: {d}");
        }
    }
}
