//! Registry of smooth scalar functions with analytic derivatives.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Smallest eigenvalue admitted for functions defined on `(0, ∞)`.
pub const POSITIVE_MARGIN: f64 = 1e-12;

/// Open interval on which a registry function is defined.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Real,
    /// `(0, ∞)`, evaluated with the margin `x >= POSITIVE_MARGIN`.
    Positive,
}

impl Domain {
    pub fn contains<T: Real>(self, x: T) -> bool {
        match self {
            Domain::Real => x.is_finite(),
            Domain::Positive => x.is_finite() && x >= T::lit(POSITIVE_MARGIN),
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain::Real => write!(f, "(-inf, inf)"),
            Domain::Positive => write!(f, "(0, inf)"),
        }
    }
}

/// A smooth function `f : ℝ ⊇ domain → ℝ` from the supported registry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScalarFunction<T> {
    Identity,
    Square,
    Cube,
    Power(T),
    Log,
    Exp,
    /// Plateau: 0 on `(-∞, a-δ]`, 1 on `[a, b]`, 0 on `[b+δ, ∞)`, C^∞.
    Smoothstep {
        a: T,
        b: T,
        delta: T,
    },
}

impl<T: Real> ScalarFunction<T> {
    pub fn power(p: T) -> Result<Self> {
        if !p.is_finite() {
            return Err(Error::invalid("power exponent must be finite"));
        }
        Ok(ScalarFunction::Power(p))
    }

    pub fn smoothstep(a: T, b: T, delta: T) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && delta.is_finite()) {
            return Err(Error::invalid("smoothstep parameters must be finite"));
        }
        if delta <= T::zero() {
            return Err(Error::invalid("smoothstep requires delta > 0"));
        }
        if a > b {
            return Err(Error::invalid("smoothstep requires a <= b"));
        }
        Ok(ScalarFunction::Smoothstep { a, b, delta })
    }

    pub fn name(&self) -> &'static str {
        match self {
            ScalarFunction::Identity => "identity",
            ScalarFunction::Square => "square",
            ScalarFunction::Cube => "cube",
            ScalarFunction::Power(_) => "power",
            ScalarFunction::Log => "log",
            ScalarFunction::Exp => "exp",
            ScalarFunction::Smoothstep { .. } => "smoothstep",
        }
    }

    pub fn params(&self) -> Vec<T> {
        match *self {
            ScalarFunction::Power(p) => vec![p],
            ScalarFunction::Smoothstep { a, b, delta } => vec![a, b, delta],
            _ => Vec::new(),
        }
    }

    pub fn domain(&self) -> Domain {
        match self {
            ScalarFunction::Power(_) | ScalarFunction::Log => Domain::Positive,
            _ => Domain::Real,
        }
    }

    pub fn check_domain(&self, x: T) -> Result<()> {
        if self.domain().contains(x) {
            Ok(())
        } else {
            Err(Error::Domain {
                function: self.to_string(),
                value: x.to_f64_lossy(),
                domain: self.domain().to_string(),
            })
        }
    }

    pub fn eval(&self, x: T) -> T {
        match *self {
            ScalarFunction::Identity => x,
            ScalarFunction::Square => x * x,
            ScalarFunction::Cube => x * x * x,
            ScalarFunction::Power(p) => x.powf(p),
            ScalarFunction::Log => x.ln(),
            ScalarFunction::Exp => x.exp(),
            ScalarFunction::Smoothstep { a, b, delta } => {
                let up = transition((x - (a - delta)) / delta);
                let down = transition(((b + delta) - x) / delta);
                up * down
            }
        }
    }

    pub fn deriv(&self, x: T) -> T {
        match *self {
            ScalarFunction::Identity => T::one(),
            ScalarFunction::Square => T::lit(2.0) * x,
            ScalarFunction::Cube => T::lit(3.0) * x * x,
            ScalarFunction::Power(p) => p * x.powf(p - T::one()),
            ScalarFunction::Log => x.recip(),
            ScalarFunction::Exp => x.exp(),
            ScalarFunction::Smoothstep { a, b, delta } => {
                let u = (x - (a - delta)) / delta;
                let w = ((b + delta) - x) / delta;
                (transition_deriv(u) * transition(w) - transition(u) * transition_deriv(w)) / delta
            }
        }
    }
}

/// `ψ(t) = exp(-1/t)` for `t > 0`, else 0.
fn mollifier<T: Real>(t: T) -> T {
    if t > T::zero() {
        (-t.recip()).exp()
    } else {
        T::zero()
    }
}

fn mollifier_deriv<T: Real>(t: T) -> T {
    if t > T::zero() {
        (-t.recip()).exp() / (t * t)
    } else {
        T::zero()
    }
}

/// C^∞ step from 0 on `t <= 0` to 1 on `t >= 1`.
fn transition<T: Real>(t: T) -> T {
    if t <= T::zero() {
        return T::zero();
    }
    if t >= T::one() {
        return T::one();
    }
    let p = mollifier(t);
    let q = mollifier(T::one() - t);
    p / (p + q)
}

fn transition_deriv<T: Real>(t: T) -> T {
    if t <= T::zero() || t >= T::one() {
        return T::zero();
    }
    let p = mollifier(t);
    let q = mollifier(T::one() - t);
    let dp = mollifier_deriv(t);
    let dq = mollifier_deriv(T::one() - t);
    let s = p + q;
    (dp * q + p * dq) / (s * s)
}

impl<T: Real> fmt::Display for ScalarFunction<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let params = self.params();
        if params.is_empty() {
            write!(f, "{}", self.name())
        } else {
            let p: Vec<String> = params.iter().map(|x| x.to_string()).collect();
            write!(f, "{}:{}", self.name(), p.join(","))
        }
    }
}

/// Parses `NAME[:p1,p2,...]`, e.g. `square`, `power:0.5`, `smoothstep:1,2,0.25`.
impl<T: Real> FromStr for ScalarFunction<T> {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, rest) = match s.split_once(':') {
            Some((n, r)) => (n.trim(), Some(r)),
            None => (s, None),
        };
        let params: Vec<T> = match rest {
            None => Vec::new(),
            Some(r) => r
                .split(',')
                .map(|p| {
                    p.trim()
                        .parse::<f64>()
                        .map(T::lit)
                        .map_err(|_| Error::invalid(format!("bad parameter {p:?} in {s:?}")))
                })
                .collect::<Result<_>>()?,
        };
        let expect = |n: usize| -> Result<()> {
            if params.len() == n {
                Ok(())
            } else {
                Err(Error::invalid(format!(
                    "function {name} takes {n} parameter(s), got {}",
                    params.len()
                )))
            }
        };
        match name {
            "identity" | "id" => expect(0).map(|_| ScalarFunction::Identity),
            "square" => expect(0).map(|_| ScalarFunction::Square),
            "cube" => expect(0).map(|_| ScalarFunction::Cube),
            "log" => expect(0).map(|_| ScalarFunction::Log),
            "exp" => expect(0).map(|_| ScalarFunction::Exp),
            "power" => {
                expect(1)?;
                ScalarFunction::power(params[0])
            }
            "smoothstep" => {
                expect(3)?;
                ScalarFunction::smoothstep(params[0], params[1], params[2])
            }
            other => Err(Error::invalid(format!("unknown function {other:?}"))),
        }
    }
}
