//! Time-varying and separable space-time signals.
//!
//! Signals form a closed expression grammar written as prefix terms:
//!
//! ```text
//! const(c)  sin(amp, omega, phase)  exp_decay(amp, rate)
//! sum(s1, s2, ...)  product(s1, s2, ...)  floor_clamp(min, s)
//! ```
//!
//! Every expression carries an interval enclosing its values over `t >= 0`
//! and a second interval enclosing its limit points as `t → ∞`. Both are
//! exact for atoms and for `floor_clamp` of atoms, and sound enclosures
//! (interval arithmetic) for sums and products. The certification constants
//! read their sup-norms, infima and limsups from these intervals.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SignalError {
    #[error("parse error at column {col}: {msg}")]
    Parse { col: usize, msg: String },
    #[error("exp_decay rate must be >= 0 (got {0}); growing signals are not bounded")]
    GrowingExponential(f64),
    #[error("non-finite constant in signal expression")]
    NonFinite,
    #[error("b-role signal must be floor_clamp(min, ...) with min > 0")]
    MissingPositiveFloor,
    #[error("tabulated profile needs at least 2 values")]
    ShortTable,
    #[error("table profile has {got} values but the grid has {want} nodes")]
    TableSize { got: usize, want: usize },
}

/// Closed interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn point(v: f64) -> Self {
        Interval { lo: v, hi: v }
    }

    fn hull(a: f64, b: f64) -> Self {
        Interval {
            lo: a.min(b),
            hi: a.max(b),
        }
    }

    pub fn abs_max(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    fn add(self, o: Interval) -> Interval {
        Interval {
            lo: self.lo + o.lo,
            hi: self.hi + o.hi,
        }
    }

    fn mul(self, o: Interval) -> Interval {
        let c = [self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi];
        Interval {
            lo: c.iter().cloned().fold(f64::INFINITY, f64::min),
            hi: c.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        }
    }

    fn clamp_below(self, m: f64) -> Interval {
        Interval {
            lo: self.lo.max(m),
            hi: self.hi.max(m),
        }
    }
}

/// A scalar signal `s(t)`, `t >= 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Signal {
    Const(f64),
    Sin { amp: f64, omega: f64, phase: f64 },
    ExpDecay { amp: f64, rate: f64 },
    Sum(Vec<Signal>),
    Product(Vec<Signal>),
    FloorClamp { min: f64, inner: Box<Signal> },
}

impl Signal {
    pub fn constant(c: f64) -> Self {
        Signal::Const(c)
    }

    pub fn sin(amp: f64, omega: f64, phase: f64) -> Self {
        Signal::Sin { amp, omega, phase }
    }

    pub fn exp_decay(amp: f64, rate: f64) -> Result<Self, SignalError> {
        if !(rate >= 0.0) {
            return Err(SignalError::GrowingExponential(rate));
        }
        Ok(Signal::ExpDecay { amp, rate })
    }

    pub fn floor_clamp(min: f64, inner: Signal) -> Self {
        Signal::FloorClamp {
            min,
            inner: Box::new(inner),
        }
    }

    pub fn zero() -> Self {
        Signal::Const(0.0)
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Signal::Const(c) => *c,
            Signal::Sin { amp, omega, phase } => amp * (omega * t + phase).sin(),
            Signal::ExpDecay { amp, rate } => amp * (-rate * t).exp(),
            Signal::Sum(xs) => xs.iter().map(|s| s.eval(t)).sum(),
            Signal::Product(xs) => xs.iter().map(|s| s.eval(t)).product(),
            Signal::FloorClamp { min, inner } => inner.eval(t).max(*min),
        }
    }

    /// Enclosure of `{s(t) : t >= 0}`.
    pub fn range(&self) -> Interval {
        match self {
            Signal::Const(c) => Interval::point(*c),
            Signal::Sin { amp, omega, phase } => {
                if *omega == 0.0 {
                    Interval::point(amp * phase.sin())
                } else {
                    Interval::hull(-amp.abs(), amp.abs())
                }
            }
            Signal::ExpDecay { amp, rate } => {
                if *rate == 0.0 {
                    Interval::point(*amp)
                } else {
                    Interval::hull(0.0, *amp)
                }
            }
            Signal::Sum(xs) => xs
                .iter()
                .map(Signal::range)
                .fold(Interval::point(0.0), Interval::add),
            Signal::Product(xs) => xs
                .iter()
                .map(Signal::range)
                .fold(Interval::point(1.0), Interval::mul),
            Signal::FloorClamp { min, inner } => inner.range().clamp_below(*min),
        }
    }

    /// Enclosure of the limit points of `s(t)` as `t → ∞`.
    pub fn asymptotic_range(&self) -> Interval {
        match self {
            Signal::ExpDecay { amp, rate } => {
                if *rate == 0.0 {
                    Interval::point(*amp)
                } else {
                    Interval::point(0.0)
                }
            }
            Signal::Sum(xs) => xs
                .iter()
                .map(Signal::asymptotic_range)
                .fold(Interval::point(0.0), Interval::add),
            Signal::Product(xs) => xs
                .iter()
                .map(Signal::asymptotic_range)
                .fold(Interval::point(1.0), Interval::mul),
            Signal::FloorClamp { min, inner } => inner.asymptotic_range().clamp_below(*min),
            other => other.range(),
        }
    }

    /// `ess sup_{t>=0} |s(t)|`.
    pub fn sup_norm(&self) -> f64 {
        self.range().abs_max()
    }

    /// `limsup_{t→∞} |s(t)|`.
    pub fn limsup_abs(&self) -> f64 {
        self.asymptotic_range().abs_max()
    }

    /// `inf_{t>=0} s(t)`.
    pub fn inf(&self) -> f64 {
        self.range().lo
    }

    /// `liminf_{t→∞} s(t)`.
    pub fn liminf(&self) -> f64 {
        self.asymptotic_range().lo
    }

    /// The value of a time-invariant signal.
    pub fn constant_value(&self) -> Option<f64> {
        let r = self.range();
        (r.lo == r.hi).then_some(r.lo)
    }

    /// Enforces the input-coefficient convention: the outermost node is a
    /// `floor_clamp` with a positive floor, so `inf b > 0` is guaranteed.
    pub fn check_positive_floor(&self) -> Result<f64, SignalError> {
        match self {
            Signal::FloorClamp { min, .. } if *min > 0.0 => Ok(*min),
            _ => Err(SignalError::MissingPositiveFloor),
        }
    }

    fn check(&self) -> Result<(), SignalError> {
        let finite = |xs: &[f64]| xs.iter().all(|x| x.is_finite());
        match self {
            Signal::Const(c) => finite(&[*c]).then_some(()).ok_or(SignalError::NonFinite),
            Signal::Sin { amp, omega, phase } => finite(&[*amp, *omega, *phase])
                .then_some(())
                .ok_or(SignalError::NonFinite),
            Signal::ExpDecay { amp, rate } => {
                if !finite(&[*amp, *rate]) {
                    return Err(SignalError::NonFinite);
                }
                if *rate < 0.0 {
                    return Err(SignalError::GrowingExponential(*rate));
                }
                Ok(())
            }
            Signal::Sum(xs) | Signal::Product(xs) => xs.iter().try_for_each(Signal::check),
            Signal::FloorClamp { min, inner } => {
                if !min.is_finite() {
                    return Err(SignalError::NonFinite);
                }
                inner.check()
            }
        }
    }
}

impl fmt::Display for Signal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Signal::Const(c) => write!(f, "const({c})"),
            Signal::Sin { amp, omega, phase } => write!(f, "sin({amp},{omega},{phase})"),
            Signal::ExpDecay { amp, rate } => write!(f, "exp_decay({amp},{rate})"),
            Signal::Sum(xs) | Signal::Product(xs) => {
                let name = if matches!(self, Signal::Sum(_)) {
                    "sum"
                } else {
                    "product"
                };
                write!(f, "{name}(")?;
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{x}")?;
                }
                f.write_str(")")
            }
            Signal::FloorClamp { min, inner } => write!(f, "floor_clamp({min},{inner})"),
        }
    }
}

impl FromStr for Signal {
    type Err = SignalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let term = Parser::new(s).parse_all()?;
        signal_from_term(&term)
    }
}

impl TryFrom<String> for Signal {
    type Error = SignalError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<Signal> for String {
    fn from(s: Signal) -> String {
        s.to_string()
    }
}

/// A spatial profile `g(x)` on `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Profile {
    Const(f64),
    /// `Σ c_k x^k`.
    Poly(Vec<f64>),
    /// `amp · sin(mode · π x)`.
    Sine { mode: f64, amp: f64 },
    /// Values on an equispaced grid over `[0, 1]`, linearly interpolated.
    Table(Vec<f64>),
}

impl Profile {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Profile::Const(c) => *c,
            Profile::Poly(c) => c.iter().rev().fold(0.0, |acc, &ck| acc * x + ck),
            Profile::Sine { mode, amp } => amp * (mode * PI * x).sin(),
            Profile::Table(v) => {
                let n = v.len() - 1;
                let s = (x.clamp(0.0, 1.0)) * n as f64;
                let i = (s.floor() as usize).min(n - 1);
                let frac = s - i as f64;
                v[i] * (1.0 - frac) + v[i + 1] * frac
            }
        }
    }

    /// Values at the `n + 1` nodes `x_i = i / n`. A table with exactly
    /// `n + 1` entries is returned verbatim.
    pub fn tabulate(&self, n: usize) -> Vec<f64> {
        if let Profile::Table(v) = self {
            if v.len() == n + 1 {
                return v.clone();
            }
        }
        (0..=n).map(|i| self.eval(i as f64 / n as f64)).collect()
    }

    /// `‖g‖_{L²(0,1)}`, exact for every variant (piecewise-linear for tables).
    pub fn l2_norm(&self) -> f64 {
        let sq = match self {
            Profile::Const(c) => c * c,
            Profile::Poly(c) => {
                let mut s = 0.0;
                for (i, a) in c.iter().enumerate() {
                    for (j, b) in c.iter().enumerate() {
                        s += a * b / (i + j + 1) as f64;
                    }
                }
                s
            }
            Profile::Sine { mode, amp } => {
                let k = mode * PI;
                if k == 0.0 {
                    0.0
                } else {
                    // ∫ sin²(kx) = 1/2 - sin(2k)/(4k)
                    amp * amp * (0.5 - (2.0 * k).sin() / (4.0 * k))
                }
            }
            Profile::Table(v) => {
                let h = 1.0 / (v.len() - 1) as f64;
                v.windows(2)
                    .map(|w| h * (w[0] * w[0] + w[0] * w[1] + w[1] * w[1]) / 3.0)
                    .sum()
            }
        };
        sq.max(0.0).sqrt()
    }

    fn check(&self) -> Result<(), SignalError> {
        let ok = match self {
            Profile::Const(c) => c.is_finite(),
            Profile::Poly(c) | Profile::Table(c) => c.iter().all(|x| x.is_finite()),
            Profile::Sine { mode, amp } => mode.is_finite() && amp.is_finite(),
        };
        if !ok {
            return Err(SignalError::NonFinite);
        }
        if let Profile::Table(v) = self {
            if v.len() < 2 {
                return Err(SignalError::ShortTable);
            }
        }
        Ok(())
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |f: &mut fmt::Formatter<'_>, name: &str, v: &[f64]| {
            write!(f, "{name}(")?;
            for (i, x) in v.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{x}")?;
            }
            f.write_str(")")
        };
        match self {
            Profile::Const(c) => write!(f, "const({c})"),
            Profile::Poly(c) => list(f, "poly", c),
            Profile::Sine { mode, amp } => write!(f, "sin({mode},{amp})"),
            Profile::Table(v) => list(f, "table", v),
        }
    }
}

impl FromStr for Profile {
    type Err = SignalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let term = Parser::new(s).parse_all()?;
        let nums = term.numbers()?;
        let p = match (term.name.as_str(), nums.len()) {
            ("const", 1) => Profile::Const(nums[0]),
            ("poly", n) if n >= 1 => Profile::Poly(nums),
            ("sin", 1) => Profile::Sine {
                mode: nums[0],
                amp: 1.0,
            },
            ("sin", 2) => Profile::Sine {
                mode: nums[0],
                amp: nums[1],
            },
            ("table", _) => Profile::Table(nums),
            (name, n) => {
                return Err(SignalError::Parse {
                    col: term.col,
                    msg: format!("unknown profile {name}/{n}; expected const(c), poly(c0,..), sin(k[,amp]) or table(..)"),
                })
            }
        };
        p.check()?;
        Ok(p)
    }
}

impl TryFrom<String> for Profile {
    type Error = SignalError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<Profile> for String {
    fn from(p: Profile) -> String {
        p.to_string()
    }
}

/// Separable space-time signal `s(t) · g(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceTimeSignal {
    pub time: Signal,
    pub space: Profile,
}

impl SpaceTimeSignal {
    pub fn new(time: Signal, space: Profile) -> Self {
        SpaceTimeSignal { time, space }
    }

    /// Spatially uniform `s(t)`.
    pub fn uniform(time: Signal) -> Self {
        SpaceTimeSignal {
            time,
            space: Profile::Const(1.0),
        }
    }

    pub fn zero() -> Self {
        Self::uniform(Signal::zero())
    }

    pub fn eval_xt(&self, t: f64, x: f64) -> f64 {
        self.time.eval(t) * self.space.eval(x)
    }
}

pub fn eval(s: &Signal, t: f64) -> f64 {
    s.eval(t)
}

pub fn eval_xt(s: &SpaceTimeSignal, t: f64, x: f64) -> f64 {
    s.eval_xt(t, x)
}

// prefix-term parser shared by signals and profiles

#[derive(Debug, Clone, PartialEq)]
enum Arg {
    Num(f64),
    Term(Term),
}

#[derive(Debug, Clone, PartialEq)]
struct Term {
    name: String,
    args: Vec<Arg>,
    col: usize,
}

impl Term {
    fn numbers(&self) -> Result<Vec<f64>, SignalError> {
        self.args
            .iter()
            .map(|a| match a {
                Arg::Num(v) => Ok(*v),
                Arg::Term(t) => Err(SignalError::Parse {
                    col: t.col,
                    msg: format!("{}: expected a number, found term {}", self.name, t.name),
                }),
            })
            .collect()
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(s: &'a str) -> Self {
        Parser {
            src: s.as_bytes(),
            pos: 0,
        }
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, SignalError> {
        Err(SignalError::Parse {
            col: self.pos + 1,
            msg: msg.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expect(&mut self, c: u8) -> Result<(), SignalError> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected '{}'", c as char))
        }
    }

    fn parse_all(mut self) -> Result<Term, SignalError> {
        let t = self.term()?;
        if self.peek().is_some() {
            return self.err("trailing input");
        }
        Ok(t)
    }

    fn term(&mut self) -> Result<Term, SignalError> {
        self.skip_ws();
        let col = self.pos + 1;
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected a term name");
        }
        let name = String::from_utf8_lossy(&self.src[start..self.pos]).into_owned();
        self.expect(b'(')?;
        let mut args = Vec::new();
        if self.peek() == Some(b')') {
            self.pos += 1;
            return Ok(Term { name, args, col });
        }
        loop {
            args.push(self.arg()?);
            match self.peek() {
                Some(b',') => self.pos += 1,
                Some(b')') => {
                    self.pos += 1;
                    break;
                }
                _ => return self.err("expected ',' or ')'"),
            }
        }
        Ok(Term { name, args, col })
    }

    fn arg(&mut self) -> Result<Arg, SignalError> {
        match self.peek() {
            Some(c) if c.is_ascii_alphabetic() => {
                // a bare `pi` is a number, anything else followed by '(' is a term
                let save = self.pos;
                if self.src[self.pos..].starts_with(b"pi") {
                    self.pos += 2;
                    let next = self.peek();
                    if matches!(next, Some(b',') | Some(b')')) {
                        return Ok(Arg::Num(PI));
                    }
                    self.pos = save;
                }
                Ok(Arg::Term(self.term()?))
            }
            Some(_) => self.number().map(Arg::Num),
            None => self.err("unexpected end of input"),
        }
    }

    fn number(&mut self) -> Result<f64, SignalError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() {
            let c = self.src[self.pos];
            let exp_sign = (c == b'-' || c == b'+')
                && self.pos > start
                && matches!(self.src[self.pos - 1], b'e' | b'E');
            if c.is_ascii_digit()
                || c == b'.'
                || c == b'e'
                || c == b'E'
                || ((c == b'-' || c == b'+') && self.pos == start)
                || exp_sign
            {
                self.pos += 1;
            } else {
                break;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
        match text.parse::<f64>() {
            Ok(v) => Ok(v),
            Err(_) => {
                self.pos = start;
                self.err(format!("invalid number '{text}'"))
            }
        }
    }
}

fn signal_from_term(t: &Term) -> Result<Signal, SignalError> {
    let arity_err = |want: &str| SignalError::Parse {
        col: t.col,
        msg: format!("{} expects {}", t.name, want),
    };
    let sig = match t.name.as_str() {
        "const" => {
            let n = t.numbers()?;
            if n.len() != 1 {
                return Err(arity_err("1 number"));
            }
            Signal::Const(n[0])
        }
        "sin" => {
            let n = t.numbers()?;
            if n.len() != 3 {
                return Err(arity_err("3 numbers (amp, omega, phase)"));
            }
            Signal::sin(n[0], n[1], n[2])
        }
        "exp_decay" => {
            let n = t.numbers()?;
            if n.len() != 2 {
                return Err(arity_err("2 numbers (amp, rate)"));
            }
            Signal::ExpDecay {
                amp: n[0],
                rate: n[1],
            }
        }
        "sum" | "product" => {
            if t.args.len() < 2 {
                return Err(arity_err("at least 2 signals"));
            }
            let xs = t
                .args
                .iter()
                .map(|a| match a {
                    Arg::Term(sub) => signal_from_term(sub),
                    Arg::Num(v) => Ok(Signal::Const(*v)),
                })
                .collect::<Result<Vec<_>, _>>()?;
            if t.name == "sum" {
                Signal::Sum(xs)
            } else {
                Signal::Product(xs)
            }
        }
        "floor_clamp" => match t.args.as_slice() {
            [Arg::Num(min), Arg::Term(inner)] => Signal::floor_clamp(*min, signal_from_term(inner)?),
            [Arg::Num(min), Arg::Num(v)] => Signal::floor_clamp(*min, Signal::Const(*v)),
            _ => return Err(arity_err("(min, signal)")),
        },
        other => {
            return Err(SignalError::Parse {
                col: t.col,
                msg: format!("unknown signal '{other}'"),
            })
        }
    };
    sig.check()?;
    Ok(sig)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_atoms() {
        assert_eq!(Signal::constant(10.0).eval(123.0), 10.0);
        assert!((Signal::sin(3.0, 1.0, 0.0).eval(PI / 2.0) - 3.0).abs() < 1e-15);
        let e = Signal::exp_decay(1.0, 1.0).unwrap();
        for t in [0.0, 0.5, 3.0] {
            assert!((e.eval(t) - (-t).exp()).abs() < 1e-15);
        }
    }

    #[test]
    fn profile_l2_norm_matches_quadrature() {
        let quad = |p: &Profile| {
            let n = 200_000;
            let h = 1.0 / n as f64;
            ((0..n).map(|i| p.eval((i as f64 + 0.5) * h).powi(2)).sum::<f64>() * h).sqrt()
        };
        for p in [
            Profile::Const(-2.0),
            Profile::Poly(vec![1.0, -3.0, 0.5]),
            Profile::Sine { mode: 1.0, amp: 2.0 },
            Profile::Sine { mode: 2.5, amp: 1.0 },
            Profile::Table(vec![0.0, 1.0, -1.0, 0.5]),
        ] {
            assert!((p.l2_norm() - quad(&p)).abs() < 1e-8, "{p:?}");
        }
        assert_eq!(Profile::Sine { mode: 0.0, amp: 3.0 }.l2_norm(), 0.0);
    }

    #[test]
    fn norms_of_atoms() {
        let s = Signal::sin(3.0, 1.0, 0.0);
        assert_eq!(s.sup_norm(), 3.0);
        assert_eq!(s.limsup_abs(), 3.0);
        let e = Signal::exp_decay(5.0, 2.0).unwrap();
        assert_eq!(e.sup_norm(), 5.0);
        assert_eq!(e.limsup_abs(), 0.0);
        let b = Signal::floor_clamp(0.1, Signal::constant(0.1));
        assert_eq!(b.inf(), 0.1);
        assert_eq!(b.check_positive_floor(), Ok(0.1));
        assert_eq!(
            Signal::constant(0.1).check_positive_floor(),
            Err(SignalError::MissingPositiveFloor)
        );
    }

    #[test]
    fn composite_enclosures() {
        let s: Signal = "sum(const(1),exp_decay(2,1))".parse().unwrap();
        assert_eq!(s.range(), Interval { lo: 1.0, hi: 3.0 });
        assert_eq!(s.asymptotic_range(), Interval::point(1.0));
        assert_eq!(s.liminf(), 1.0);
        let p: Signal = "product(sin(2,1,0),exp_decay(1,0.5))".parse().unwrap();
        assert_eq!(p.sup_norm(), 2.0);
        assert_eq!(p.limsup_abs(), 0.0);
        let c: Signal = "floor_clamp(0.5, sin(1,2,0))".parse().unwrap();
        assert_eq!(c.range(), Interval { lo: 0.5, hi: 1.0 });
        assert!(c.eval(3.0 * PI / 4.0) >= 0.5);
    }

    #[test]
    fn constant_value_detection() {
        assert_eq!(Signal::constant(4.0).constant_value(), Some(4.0));
        assert_eq!(
            Signal::floor_clamp(0.1, Signal::constant(0.1)).constant_value(),
            Some(0.1)
        );
        assert_eq!(Signal::sin(1.0, 1.0, 0.0).constant_value(), None);
        assert_eq!(Signal::sin(1.0, 0.0, PI / 2.0).constant_value(), Some(1.0));
    }

    #[test]
    fn parse_roundtrip_and_errors() {
        let s: Signal = "sum( const(1) , exp_decay(2, 1e-1), sin(3,1,pi))".parse().unwrap();
        let back: Signal = s.to_string().parse().unwrap();
        assert_eq!(s, back);
        assert!("exp_decay(1,-1)".parse::<Signal>().is_err());
        assert!("sin(1,2)".parse::<Signal>().is_err());
        assert!("bogus(1)".parse::<Signal>().is_err());
        assert!("const(1) x".parse::<Signal>().is_err());
        match "sum(const(1),".parse::<Signal>() {
            Err(SignalError::Parse { col, .. }) => assert_eq!(col, 14),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn profiles() {
        let p: Profile = "poly(0,-1,1)".parse().unwrap();
        assert_eq!(p.eval(0.5), -0.25);
        let s: Profile = "sin(1)".parse().unwrap();
        assert!((s.eval(0.5) - 1.0).abs() < 1e-15);
        let t = Profile::Table(vec![0.0, 2.0, 4.0]);
        assert_eq!(t.eval(0.25), 1.0);
        assert_eq!(t.tabulate(2), vec![0.0, 2.0, 4.0]);
        assert_eq!(t.tabulate(4), vec![0.0, 1.0, 2.0, 3.0, 4.0]);
        assert!("table(1)".parse::<Profile>().is_err());
    }

    #[test]
    fn separable_eval() {
        let st = SpaceTimeSignal::new(Signal::constant(3.0), "poly(0,1)".parse().unwrap());
        assert_eq!(eval_xt(&st, 7.0, 0.5), 1.5);
    }
}
