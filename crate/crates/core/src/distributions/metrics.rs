//! Exact distances between distribution functions.

use num_traits::{Signed, Zero};

use super::rational::Rational;
use super::Cdf;

fn merged_knots<F: Cdf + ?Sized, G: Cdf + ?Sized>(f: &F, g: &G) -> Vec<Rational> {
    let mut pts = f.knots();
    pts.extend(g.knots());
    pts.push(Rational::zero());
    pts.sort();
    pts.dedup();
    pts
}

fn gap_at<F: Cdf + ?Sized, G: Cdf + ?Sized>(f: &F, g: &G, x: &Rational) -> Rational {
    let right = (f.eval(x) - g.eval(x)).abs();
    let left = (f.left_limit(x) - g.left_limit(x)).abs();
    right.max(left)
}

/// Exact `sup |f − g|` over `[0, horizon]`.
///
/// Between consecutive knots both functions are affine, so the supremum is
/// reached as a one-sided limit at a knot or at the horizon itself.
pub fn sup_distance<F: Cdf + ?Sized, G: Cdf + ?Sized>(
    f: &F,
    g: &G,
    horizon: &Rational,
) -> Rational {
    assert!(horizon.is_positive(), "horizon must be positive");
    let mut best = (f.eval(horizon) - g.eval(horizon)).abs();
    for x in merged_knots(f, g).iter().filter(|x| *x <= horizon) {
        let d = if x.is_zero() {
            (f.eval(x) - g.eval(x)).abs()
        } else {
            gap_at(f, g, x)
        };
        if d > best {
            best = d;
        }
    }
    best
}

/// Exact `sup |f − g|` over the whole line (the Kolmogorov–Smirnov distance).
pub fn sup_distance_all<F: Cdf + ?Sized, G: Cdf + ?Sized>(f: &F, g: &G) -> Rational {
    merged_knots(f, g)
        .iter()
        .map(|x| gap_at(f, g, x))
        .max()
        .unwrap_or_else(Rational::zero)
}

/// The completed graph of a distribution function (jumps filled in with
/// vertical segments), parametrised by `c = t + F(t)`.
///
/// Every anti-diagonal `t + y = c` meets a completed graph exactly once, at
/// abscissa `abscissa(c)`.
struct AntiDiagonal {
    c: Vec<Rational>,
    t: Vec<Rational>,
    last_level: Rational,
}

impl AntiDiagonal {
    fn new<F: Cdf + ?Sized>(f: &F) -> Self {
        let vertices = f.graph_vertices();
        let last_level = vertices
            .last()
            .map(|(_, y)| y.clone())
            .unwrap_or_else(Rational::zero);
        let (c, t) = vertices.into_iter().map(|(t, y)| (&t + y, t)).unzip();
        Self { c, t, last_level }
    }

    fn abscissa(&self, c: &Rational) -> Rational {
        match self.c.first() {
            None => return c.clone(),
            Some(c0) if c <= c0 => return c.clone(),
            _ => {}
        }
        let i = self.c.partition_point(|x| x <= c);
        if i == self.c.len() {
            return c - &self.last_level;
        }
        let (c0, c1) = (&self.c[i - 1], &self.c[i]);
        let (t0, t1) = (&self.t[i - 1], &self.t[i]);
        if t0 == t1 {
            t0.clone()
        } else {
            t0 + (t1 - t0) * (c - c0) / (c1 - c0)
        }
    }
}

/// Exact Lévy distance: the least `ε ≥ 0` with
/// `f(t − ε) − ε ≤ g(t) ≤ f(t + ε) + ε` for every `t`.
///
/// Shifting a completed graph by `(±ε, ∓ε)` moves it along the anti-diagonals,
/// so the Lévy distance is the largest horizontal gap between the two completed
/// graphs measured along anti-diagonals. That gap is piecewise linear in `c`
/// with kinks only at graph vertices, where it is evaluated exactly.
pub fn levy_distance<F: Cdf + ?Sized, G: Cdf + ?Sized>(f: &F, g: &G) -> Rational {
    let a = AntiDiagonal::new(f);
    let b = AntiDiagonal::new(g);
    a.c.iter()
        .chain(b.c.iter())
        .map(|c| (a.abscissa(c) - b.abscissa(c)).abs())
        .max()
        .unwrap_or_else(Rational::zero)
}
