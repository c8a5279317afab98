use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cyclic::{CyclicRepr, CyclicSystem};
use crate::distributions::rational::{format_rational, parse_rational, Rational};
use crate::{Error, Result};

/// Fractional bits of the fixed-point circle used by rotations.
pub const ROTATION_BITS: u32 = 128;

/// A system with a stationary law and a target event.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SystemRepr", into = "SystemRepr")]
pub enum SystemSpec {
    /// Full shift with independent symbols; target is the cylinder `word`.
    Bernoulli(BernoulliSpec),
    /// Stationary Markov shift; target is the cylinder `word`.
    Markov(MarkovSpec),
    /// Circle rotation by `angle`; target is the arc `[a, b)`.
    Rotation(RotationSpec),
    Cyclic(CyclicSystem),
}

impl SystemSpec {
    /// Exact measure of the target.
    pub fn target_measure(&self) -> Rational {
        match self {
            SystemSpec::Bernoulli(b) => {
                b.word.iter().map(|&s| b.probabilities[s].clone()).product()
            }
            SystemSpec::Markov(m) => match m.word.split_first() {
                None => Rational::one(),
                Some((&first, rest)) => {
                    let mut mu = m.stationary[first].clone();
                    let mut prev = first;
                    for &s in rest {
                        mu *= &m.matrix[prev][s];
                        prev = s;
                    }
                    mu
                }
            },
            SystemSpec::Rotation(r) => &r.arc.1 - &r.arc.0,
            SystemSpec::Cyclic(c) => c.measure(),
        }
    }

    pub(crate) fn sampler(&self) -> Result<Sampler> {
        Ok(match self {
            SystemSpec::Bernoulli(b) => Sampler::Shift {
                initial: Categorical::new(&b.probabilities)?,
                rows: None,
                automaton: Automaton::new(&b.word),
            },
            SystemSpec::Markov(m) => Sampler::Shift {
                initial: Categorical::new(&m.stationary)?,
                rows: Some(
                    m.matrix
                        .iter()
                        .map(|r| Categorical::new(r))
                        .collect::<Result<_>>()?,
                ),
                automaton: Automaton::new(&m.word),
            },
            SystemSpec::Rotation(r) => Sampler::Rotation {
                angle: to_fixed(&r.angle),
                start: to_fixed(&r.arc.0),
                length: to_fixed(&(&r.arc.1 - &r.arc.0)),
            },
            SystemSpec::Cyclic(c) => Sampler::Cyclic(c.clone()),
        })
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub(crate) enum SystemRepr {
    Bernoulli(BernoulliRepr),
    Markov(MarkovRepr),
    Rotation(RotationRepr),
    Cyclic(CyclicRepr),
}

impl TryFrom<SystemRepr> for SystemSpec {
    type Error = Error;

    fn try_from(r: SystemRepr) -> Result<Self> {
        Ok(match r {
            SystemRepr::Bernoulli(b) => SystemSpec::Bernoulli(b.try_into()?),
            SystemRepr::Markov(m) => SystemSpec::Markov(m.try_into()?),
            SystemRepr::Rotation(r) => SystemSpec::Rotation(r.try_into()?),
            SystemRepr::Cyclic(c) => SystemSpec::Cyclic(c.try_into()?),
        })
    }
}

impl From<SystemSpec> for SystemRepr {
    fn from(s: SystemSpec) -> Self {
        match s {
            SystemSpec::Bernoulli(b) => SystemRepr::Bernoulli(b.into()),
            SystemSpec::Markov(m) => SystemRepr::Markov(m.into()),
            SystemSpec::Rotation(r) => SystemRepr::Rotation(r.into()),
            SystemSpec::Cyclic(c) => SystemRepr::Cyclic(c.into()),
        }
    }
}

fn rationals(xs: &[String]) -> Result<Vec<Rational>> {
    xs.iter().map(|s| parse_rational(s)).collect()
}

fn strings(xs: &[Rational]) -> Vec<String> {
    xs.iter().map(format_rational).collect()
}

fn check_distribution(p: &[Rational], what: &str) -> Result<()> {
    if p.is_empty() || p.iter().any(|x| !x.is_positive()) {
        return Err(Error::InvalidSystem(format!(
            "{what} must be nonempty and positive"
        )));
    }
    let total: Rational = p.iter().sum();
    if !total.is_one() {
        return Err(Error::InvalidSystem(format!(
            "{what} sums to {}",
            format_rational(&total)
        )));
    }
    Ok(())
}

fn check_word(word: &[usize], symbols: usize) -> Result<()> {
    match word.iter().find(|&&s| s >= symbols) {
        Some(s) => Err(Error::InvalidSystem(format!(
            "symbol {s} outside an alphabet of {symbols}"
        ))),
        None => Ok(()),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BernoulliSpec {
    probabilities: Vec<Rational>,
    word: Vec<usize>,
}

impl BernoulliSpec {
    pub fn new(probabilities: Vec<Rational>, word: Vec<usize>) -> Result<Self> {
        check_distribution(&probabilities, "symbol probabilities")?;
        check_word(&word, probabilities.len())?;
        Ok(Self {
            probabilities,
            word,
        })
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct BernoulliRepr {
    probabilities: Vec<String>,
    word: Vec<usize>,
}

impl TryFrom<BernoulliRepr> for BernoulliSpec {
    type Error = Error;

    fn try_from(r: BernoulliRepr) -> Result<Self> {
        BernoulliSpec::new(rationals(&r.probabilities)?, r.word)
    }
}

impl From<BernoulliSpec> for BernoulliRepr {
    fn from(b: BernoulliSpec) -> Self {
        BernoulliRepr {
            probabilities: strings(&b.probabilities),
            word: b.word,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MarkovSpec {
    matrix: Vec<Vec<Rational>>,
    stationary: Vec<Rational>,
    word: Vec<usize>,
}

impl MarkovSpec {
    /// Rows must be probability vectors (zero entries allowed) and the
    /// stationary vector must be positive and fixed by the matrix.
    pub fn new(
        matrix: Vec<Vec<Rational>>,
        stationary: Vec<Rational>,
        word: Vec<usize>,
    ) -> Result<Self> {
        let n = stationary.len();
        check_distribution(&stationary, "stationary vector")?;
        if matrix.len() != n || matrix.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidSystem(format!("matrix must be {n} by {n}")));
        }
        for (i, row) in matrix.iter().enumerate() {
            if row.iter().any(|x| x.is_negative()) || !row.iter().sum::<Rational>().is_one() {
                return Err(Error::InvalidSystem(format!(
                    "row {i} is not a probability vector"
                )));
            }
        }
        for j in 0..n {
            let image: Rational = (0..n).map(|i| &stationary[i] * &matrix[i][j]).sum();
            if image != stationary[j] {
                return Err(Error::InvalidSystem(format!(
                    "stationary vector is not fixed at state {j}"
                )));
            }
        }
        check_word(&word, n)?;
        Ok(Self {
            matrix,
            stationary,
            word,
        })
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct MarkovRepr {
    matrix: Vec<Vec<String>>,
    stationary: Vec<String>,
    word: Vec<usize>,
}

impl TryFrom<MarkovRepr> for MarkovSpec {
    type Error = Error;

    fn try_from(r: MarkovRepr) -> Result<Self> {
        let matrix = r
            .matrix
            .iter()
            .map(|row| rationals(row))
            .collect::<Result<_>>()?;
        MarkovSpec::new(matrix, rationals(&r.stationary)?, r.word)
    }
}

impl From<MarkovSpec> for MarkovRepr {
    fn from(m: MarkovSpec) -> Self {
        MarkovRepr {
            matrix: m.matrix.iter().map(|r| strings(r)).collect(),
            stationary: strings(&m.stationary),
            word: m.word,
        }
    }
}

/// Angles and arc endpoints are exact rationals (decimal input is read
/// exactly); the orbit runs on a 128-bit fixed-point circle.
#[derive(Clone, Debug, PartialEq)]
pub struct RotationSpec {
    angle: Rational,
    arc: (Rational, Rational),
}

impl RotationSpec {
    pub fn new(angle: Rational, a: Rational, b: Rational) -> Result<Self> {
        if a.is_negative() || b > Rational::one() || a >= b || (&b - &a).is_one() {
            return Err(Error::InvalidSystem(format!(
                "arc [{}, {}) must lie in [0, 1] with length in ]0, 1[",
                format_rational(&a),
                format_rational(&b)
            )));
        }
        let angle = &angle - angle.floor();
        Ok(Self { angle, arc: (a, b) })
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct RotationRepr {
    angle: String,
    arc: (String, String),
}

impl TryFrom<RotationRepr> for RotationSpec {
    type Error = Error;

    fn try_from(r: RotationRepr) -> Result<Self> {
        RotationSpec::new(
            parse_rational(&r.angle)?,
            parse_rational(&r.arc.0)?,
            parse_rational(&r.arc.1)?,
        )
    }
}

impl From<RotationSpec> for RotationRepr {
    fn from(r: RotationSpec) -> Self {
        RotationRepr {
            angle: format_rational(&r.angle),
            arc: (format_rational(&r.arc.0), format_rational(&r.arc.1)),
        }
    }
}

/// `⌊x · 2^128⌋` for `x ∈ [0, 1[`.
fn to_fixed(x: &Rational) -> u128 {
    let scaled = x * Rational::from_integer(BigInt::one() << ROTATION_BITS);
    scaled.floor().to_integer().to_u128().unwrap_or(u128::MAX)
}

/// Exact sampling from a rational probability vector via integer thresholds
/// over the common denominator.
#[derive(Clone, Debug)]
pub(crate) struct Categorical {
    denominator: u64,
    // thresholds[i] = numerator sum of symbols 0..=i
    thresholds: Vec<u64>,
}

impl Categorical {
    fn new(p: &[Rational]) -> Result<Self> {
        let d = p.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
        let denominator = d.to_u64().ok_or_else(|| {
            Error::InvalidSystem(format!("common denominator {d} exceeds 64 bits"))
        })?;
        let mut acc = 0u64;
        let thresholds = p
            .iter()
            .map(|x| {
                acc += (x * Rational::from_integer(d.clone()))
                    .to_integer()
                    .to_u64()
                    .expect("bounded by the denominator");
                acc
            })
            .collect();
        Ok(Self {
            denominator,
            thresholds,
        })
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u = rng.random_range(0..self.denominator);
        self.thresholds.partition_point(|&t| t <= u)
    }
}

/// Knuth–Morris–Pratt automaton recognising occurrences of a word.
#[derive(Clone, Debug)]
pub(crate) struct Automaton {
    word: Vec<usize>,
    failure: Vec<usize>,
}

impl Automaton {
    fn new(word: &[usize]) -> Self {
        let mut failure = vec![0; word.len()];
        let mut k = 0;
        for i in 1..word.len() {
            while k > 0 && word[i] != word[k] {
                k = failure[k - 1];
            }
            if word[i] == word[k] {
                k += 1;
            }
            failure[i] = k;
        }
        Self {
            word: word.to_vec(),
            failure,
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.word.len()
    }

    /// Next state after reading `symbol` from `state` matched symbols.
    fn step(&self, mut state: usize, symbol: usize) -> usize {
        if state == self.word.len() {
            state = self.failure[state - 1];
        }
        while state > 0 && self.word[state] != symbol {
            state = self.failure[state - 1];
        }
        if self.word[state] == symbol {
            state + 1
        } else {
            0
        }
    }
}

pub(crate) enum Sampler {
    Shift {
        initial: Categorical,
        rows: Option<Vec<Categorical>>,
        automaton: Automaton,
    },
    Rotation {
        angle: u128,
        start: u128,
        length: u128,
    },
    Cyclic(CyclicSystem),
}

impl Sampler {
    /// Hitting time of one stationary starting point, `None` past `horizon`.
    pub(crate) fn hitting_time<R: Rng + ?Sized>(&self, rng: &mut R, horizon: u64) -> Option<u64> {
        match self {
            Sampler::Cyclic(sys) => {
                let x = rng.random_range(1..=sys.q());
                Some(sys.hitting_time(x)).filter(|&t| t <= horizon)
            }
            Sampler::Rotation {
                angle,
                start,
                length,
            } => {
                let mut x: u128 = rng.random();
                for k in 1..=horizon {
                    x = x.wrapping_add(*angle);
                    if x.wrapping_sub(*start) < *length {
                        return Some(k);
                    }
                }
                None
            }
            Sampler::Shift {
                initial,
                rows,
                automaton,
            } => {
                if automaton.len() == 0 {
                    return Some(1);
                }
                // the window at time k covers symbols x_k .. x_{k+L-1}
                let len = automaton.len() as u64;
                let mut symbol = initial.sample(rng);
                let mut state = 0;
                let mut index = 0u64;
                while index < horizon + len - 1 {
                    symbol = match rows {
                        Some(rows) => rows[symbol].sample(rng),
                        None => initial.sample(rng),
                    };
                    index += 1;
                    state = automaton.step(state, symbol);
                    if state == automaton.len() {
                        return Some(index + 1 - len);
                    }
                }
                None
            }
        }
    }
}
