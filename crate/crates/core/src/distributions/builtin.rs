//! Closed-form members of the class of admissible limits, sampled onto a mesh.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::rational::{format_rational, parse_rational, to_f64, uint, Rational};
use super::TargetF;
use crate::{Error, Result};

// values are rounded up onto this dyadic grid before the concave hull is taken
const VALUE_GRID_BITS: u32 = 48;
const MAX_MESH_POINTS: u64 = 2_000_000;

/// A named closed form with its parameters, e.g. `scaled_exp(1/2,2)`.
#[derive(Clone, Debug, PartialEq)]
pub enum Builtin {
    /// `1 − e^{−t}`
    Exp1,
    /// `min(c t, 1)`
    CappedLinear(Rational),
    /// `a (1 − e^{−λ t})`
    ScaledExp(Rational, Rational),
}

impl Builtin {
    pub fn from_parts(name: &str, params: &[Rational]) -> Result<Self> {
        let arity = |n: usize| {
            if params.len() == n {
                Ok(())
            } else {
                Err(Error::BuiltinParams {
                    name: name.to_string(),
                    reason: format!("expected {n} parameter(s), got {}", params.len()),
                })
            }
        };
        let invalid = |reason: String| Error::BuiltinParams {
            name: name.to_string(),
            reason,
        };
        match name {
            "exp1" => {
                arity(0)?;
                Ok(Builtin::Exp1)
            }
            "capped_linear" => {
                arity(1)?;
                let c = params[0].clone();
                if c.is_negative() || c > Rational::one() {
                    return Err(invalid(format!(
                        "slope {} must lie in [0, 1]",
                        format_rational(&c)
                    )));
                }
                Ok(Builtin::CappedLinear(c))
            }
            "scaled_exp" => {
                arity(2)?;
                let (a, lambda) = (params[0].clone(), params[1].clone());
                if !a.is_positive() || a > Rational::one() {
                    return Err(invalid(format!(
                        "amplitude {} must lie in ]0, 1]",
                        format_rational(&a)
                    )));
                }
                if !lambda.is_positive() {
                    return Err(invalid("rate must be positive".into()));
                }
                if &a * &lambda > Rational::one() {
                    return Err(invalid(format!(
                        "initial slope a*lambda = {} exceeds 1",
                        format_rational(&(&a * &lambda))
                    )));
                }
                Ok(Builtin::ScaledExp(a, lambda))
            }
            _ => Err(Error::UnknownBuiltin(name.to_string())),
        }
    }

    /// Parses `name` or `name(p1,p2,...)`.
    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        let (name, params) = match spec.split_once('(') {
            None => (spec, Vec::new()),
            Some((name, rest)) => {
                let inner = rest
                    .strip_suffix(')')
                    .ok_or_else(|| Error::Parse(format!("unbalanced parentheses in `{spec}`")))?;
                let params = inner
                    .split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(parse_rational)
                    .collect::<Result<Vec<_>>>()?;
                (name.trim(), params)
            }
        };
        Self::from_parts(name, &params)
    }

    /// Samples the closed form onto a [`TargetF`] with breakpoint spacing
    /// `mesh`.
    pub fn sample(&self, mesh: &Rational) -> Result<TargetF> {
        if !mesh.is_positive() || *mesh > Rational::one() {
            return Err(Error::BuiltinParams {
                name: self.name().to_string(),
                reason: format!("mesh {} must lie in ]0, 1]", format_rational(mesh)),
            });
        }
        match self {
            Builtin::CappedLinear(c) => Ok(capped_linear(c, mesh)),
            Builtin::Exp1 => {
                let h = to_f64(mesh);
                let count = mesh_count((1.0 / h).ln() / h)?;
                sample_concave(mesh, count, |t| -(-t).exp_m1())
            }
            Builtin::ScaledExp(a, lambda) => {
                let (h, af, lf) = (to_f64(mesh), to_f64(a), to_f64(lambda));
                let count = mesh_count((af / h).ln() / lf / h)?;
                sample_concave(mesh, count, move |t| -af * (-lf * t).exp_m1())
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Builtin::Exp1 => "exp1",
            Builtin::CappedLinear(_) => "capped_linear",
            Builtin::ScaledExp(..) => "scaled_exp",
        }
    }
}

/// Samples a builtin closed form by name, e.g. `("scaled_exp", [1/2, 2])`.
pub fn cdf_from_builtin(name: &str, params: &[Rational], mesh: &Rational) -> Result<TargetF> {
    Builtin::from_parts(name, params)?.sample(mesh)
}

fn mesh_count(cells: f64) -> Result<u64> {
    let n = cells.ceil().max(1.0);
    if !n.is_finite() || n > MAX_MESH_POINTS as f64 {
        return Err(Error::BuiltinParams {
            name: "mesh".into(),
            reason: format!("sampling would need {n} breakpoints"),
        });
    }
    Ok(n as u64)
}

fn capped_linear(c: &Rational, mesh: &Rational) -> TargetF {
    let mut pts = vec![(Rational::zero(), Rational::zero())];
    if !c.is_zero() {
        let knee = c.recip();
        let mut k = 1u64;
        loop {
            let t = uint(k) * mesh;
            if t >= knee {
                break;
            }
            pts.push((t.clone(), c * t));
            k += 1;
        }
        pts.push((knee, Rational::one()));
    }
    TargetF::new(pts).expect("increasing mesh")
}

/// Samples a concave `f` with `f(0) = 0` at `k * mesh`, `k = 0..=count`.
///
/// Each value is rounded up onto a dyadic grid and clipped by `min(t, 1)`; the
/// least concave majorant of the clipped points is then evaluated back at the
/// mesh. The result is concave, never below `f` on the mesh, and at most one
/// grid step above the rounded samples.
fn sample_concave(mesh: &Rational, count: u64, f: impl Fn(f64) -> f64) -> Result<TargetF> {
    let scale = 2f64.powi(VALUE_GRID_BITS as i32);
    let denom = BigInt::one() << VALUE_GRID_BITS;
    let mut pts = Vec::with_capacity(count as usize + 1);
    pts.push((Rational::zero(), Rational::zero()));
    for k in 1..=count {
        let t = uint(k) * mesh;
        let y = f(to_f64(&t));
        let up = BigInt::from((y * scale).ceil().to_i64().unwrap_or(i64::MAX)) + 1;
        let v = Rational::new(up, denom.clone())
            .min(t.clone())
            .min(Rational::one());
        pts.push((t, v));
    }
    let hull = upper_hull(&pts);
    let sampled = evaluate_on(&hull, pts.into_iter().map(|(t, _)| t));
    TargetF::new(sampled)
}

fn cross(o: &(Rational, Rational), a: &(Rational, Rational), b: &(Rational, Rational)) -> Rational {
    (&a.0 - &o.0) * (&b.1 - &o.1) - (&a.1 - &o.1) * (&b.0 - &o.0)
}

fn upper_hull(pts: &[(Rational, Rational)]) -> Vec<(Rational, Rational)> {
    let mut hull: Vec<(Rational, Rational)> = Vec::new();
    for p in pts {
        while hull.len() >= 2
            && !cross(&hull[hull.len() - 2], &hull[hull.len() - 1], p).is_negative()
        {
            hull.pop();
        }
        hull.push(p.clone());
    }
    hull
}

fn evaluate_on(
    hull: &[(Rational, Rational)],
    ts: impl Iterator<Item = Rational>,
) -> Vec<(Rational, Rational)> {
    let mut seg = 0;
    ts.map(|t| {
        while seg + 1 < hull.len() && hull[seg + 1].0 < t {
            seg += 1;
        }
        let v = if seg + 1 == hull.len() || hull[seg].0 == t {
            hull[seg].1.clone()
        } else {
            let (t0, v0) = &hull[seg];
            let (t1, v1) = &hull[seg + 1];
            v0 + (v1 - v0) * (&t - t0) / (t1 - t0)
        };
        (t, v)
    })
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::rational::{int, rat};
    use crate::distributions::Cdf;

    #[test]
    fn capped_linear_is_exact() {
        let f = cdf_from_builtin("capped_linear", &[int(1)], &rat(1, 4)).unwrap();
        let expected: Vec<_> = (0..=4).map(|k| (rat(k, 4), rat(k, 4))).collect();
        assert_eq!(f.breakpoints(), expected.as_slice());
        assert_eq!(f.eval(&rat(1, 3)), rat(1, 3));
    }

    #[test]
    fn capped_linear_with_off_mesh_knee() {
        let f = cdf_from_builtin("capped_linear", &[rat(2, 3)], &rat(1, 2)).unwrap();
        assert_eq!(f.t_max(), &rat(3, 2));
        assert_eq!(f.eval(&int(1)), rat(2, 3));
        assert_eq!(f.eval(&int(7)), int(1));
    }

    #[test]
    fn exp1_starts_at_zero() {
        let f = cdf_from_builtin("exp1", &[], &rat(1, 2)).unwrap();
        assert_eq!(f.eval(&int(0)), int(0));
    }

    /// e^{-x} for rational x in [0, 20] by a Taylor series of e^{-x/64} with an
    /// explicit remainder bound, raised to the 64th power.
    fn exp_neg_bounds(x: f64) -> (f64, f64) {
        let y = x / 64.0;
        let mut term = 1.0f64;
        let mut sum = 1.0f64;
        for n in 1..30 {
            term *= -y / n as f64;
            sum += term;
        }
        let e = sum.powi(64);
        (e * (1.0 - 1e-13), e * (1.0 + 1e-13))
    }

    #[test]
    fn exp1_breakpoints_track_the_exponential() {
        let mesh = rat(1, 64);
        let f = cdf_from_builtin("exp1", &[], &mesh).unwrap();
        for (t, v) in f.breakpoints() {
            let (lo, hi) = exp_neg_bounds(to_f64(t));
            let v = to_f64(v);
            assert!(v >= 1.0 - hi - 1e-12, "below the exponential at {t}");
            assert!(v - (1.0 - lo) <= 1.0 / 64.0, "too far above at {t}");
        }
        // beyond the last breakpoint the sampled curve is constant
        let last = to_f64(f.limit());
        assert!(1.0 - last <= 1.0 / 64.0);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(matches!(
            cdf_from_builtin("capped_linear", &[rat(3, 2)], &rat(1, 4)),
            Err(Error::BuiltinParams { .. })
        ));
        assert!(cdf_from_builtin("scaled_exp", &[int(1), int(2)], &rat(1, 4)).is_err());
        assert!(cdf_from_builtin("scaled_exp", &[rat(1, 2)], &rat(1, 4)).is_err());
        assert!(matches!(
            cdf_from_builtin("gamma", &[], &rat(1, 4)),
            Err(Error::UnknownBuiltin(_))
        ));
        assert!(cdf_from_builtin("exp1", &[], &int(0)).is_err());
    }

    #[test]
    fn parses_call_syntax() {
        assert_eq!(Builtin::parse("exp1").unwrap(), Builtin::Exp1);
        assert_eq!(
            Builtin::parse("scaled_exp(1/2, 2)").unwrap(),
            Builtin::ScaledExp(rat(1, 2), int(2))
        );
        assert!(Builtin::parse("capped_linear(1").is_err());
    }
}
