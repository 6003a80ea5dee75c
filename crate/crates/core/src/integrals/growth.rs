//! Asymptotic classes of positive functions at `t → ∞`.
//!
//! A class is `t^power · e^{rate t} · (ln t)^log · (ln ln t)^loglog` up to a
//! positive constant factor. Two positive functions whose ratio tends to a
//! positive constant are integrable at infinity together, so the classes are
//! enough to decide convergence of the criterion integrals for the analytic
//! warping shapes.

use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::rational::{self, Rational};
use crate::warping::PowerExp;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Growth {
    pub rate: Rational,
    pub power: Rational,
    pub log: Rational,
    pub loglog: Rational,
}

impl std::ops::Mul for Growth {
    type Output = Growth;

    fn mul(self, o: Growth) -> Growth {
        Growth {
            rate: self.rate + o.rate,
            power: self.power + o.power,
            log: self.log + o.log,
            loglog: self.loglog + o.loglog,
        }
    }
}

impl std::ops::Div for Growth {
    type Output = Growth;

    fn div(self, o: Growth) -> Growth {
        self * o.powr(-Rational::one())
    }
}

impl Growth {
    pub fn one() -> Self {
        Growth {
            rate: Rational::zero(),
            power: Rational::zero(),
            log: Rational::zero(),
            loglog: Rational::zero(),
        }
    }

    pub fn of(term: &PowerExp) -> Self {
        Growth { rate: term.rate, power: term.power, ..Growth::one() }
    }

    pub fn powr(self, e: Rational) -> Self {
        Growth {
            rate: self.rate * e,
            power: self.power * e,
            log: self.log * e,
            loglog: self.loglog * e,
        }
    }

    /// Integrability on `[c, ∞)` by the Bertrand scale.
    pub fn is_integrable(&self) -> bool {
        let minus_one = -Rational::one();
        if !self.rate.is_zero() {
            return self.rate.is_negative();
        }
        if self.power != minus_one {
            return self.power < minus_one;
        }
        if self.log != minus_one {
            return self.log < minus_one;
        }
        self.loglog < minus_one
    }

    /// Class of `|ln P(t)|` for a function `P` of this class tending to
    /// infinity. `None` when `P` does not tend to infinity or the logarithm
    /// leaves the scale.
    pub fn log_of(&self) -> Option<Growth> {
        let one = Rational::one();
        if self.rate.is_positive() {
            return Some(Growth { power: one, ..Growth::one() });
        }
        if !self.rate.is_zero() {
            return None;
        }
        if self.power.is_positive() {
            return Some(Growth { log: one, ..Growth::one() });
        }
        if self.power.is_zero() && self.log.is_positive() && self.loglog.is_zero() {
            return Some(Growth { loglog: one, ..Growth::one() });
        }
        None
    }
}

impl fmt::Display for Growth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if !self.power.is_zero() {
            parts.push(format!("t^{}", rational::format(self.power)));
        }
        if !self.rate.is_zero() {
            parts.push(format!("e^({} t)", rational::format(self.rate)));
        }
        if !self.log.is_zero() {
            parts.push(format!("(ln t)^{}", rational::format(self.log)));
        }
        if !self.loglog.is_zero() {
            parts.push(format!("(ln ln t)^{}", rational::format(self.loglog)));
        }
        if parts.is_empty() {
            f.write_str("1")
        } else {
            f.write_str(&parts.join(" "))
        }
    }
}

/// Behaviour of `P(τ) = ∫_a^τ term dt` as `τ → ∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Primitive {
    /// `P(τ) → limit < ∞`
    Bounded { limit: f64 },
    /// `P(τ) → ∞` within the given class.
    Grows(Growth),
}

pub fn primitive(term: &PowerExp, a: f64) -> Primitive {
    let g = Growth::of(term);
    if g.is_integrable() {
        let limit = definite(term, a, f64::INFINITY).unwrap_or(f64::NAN);
        return Primitive::Bounded { limit };
    }
    let minus_one = -Rational::one();
    let class = if term.rate.is_positive() {
        g
    } else if term.power == minus_one {
        Growth { log: Rational::one(), ..Growth::one() }
    } else {
        Growth { power: term.power + Rational::one(), ..Growth::one() }
    };
    Primitive::Grows(class)
}

/// `∫_{x0}^{x1} term dt` in closed form (`x1` may be `+inf`). `None` when the
/// term mixes powers and exponentials.
pub fn definite(term: &PowerExp, x0: f64, x1: f64) -> Option<f64> {
    ln_definite(term, x0, x1).map(f64::exp)
}

/// Logarithm of [`definite`], finite even where the integral overflows.
pub fn ln_definite(term: &PowerExp, x0: f64, x1: f64) -> Option<f64> {
    let ln_c = term.coeff.ln();
    match (term.rate.is_zero(), term.power.is_zero()) {
        (true, true) => Some(ln_c + (x1 - x0).ln()),
        (true, false) => {
            if term.power == -Rational::one() {
                return Some(ln_c + (x1.ln() - x0.ln()).ln());
            }
            let e = rational::to_f64(term.power) + 1.0;
            // |x1^e - x0^e| / |e| with the larger power factored out
            let (big, small) = if e > 0.0 { (x1, x0) } else { (x0, x1) };
            let ln_big = e * big.ln();
            let ratio = (e * (small.ln() - big.ln())).exp();
            Some(ln_c + ln_big + (-ratio).ln_1p() - e.abs().ln())
        }
        (false, true) => {
            let u = rational::to_f64(term.rate);
            let span = x1 - x0;
            let z = u * span;
            // ln|e^z - 1|
            let ln_gap = if z > 1.0 { z + (-(-z).exp()).ln_1p() } else { z.exp_m1().abs().ln() };
            Some(ln_c + u * x0 - u.abs().ln() + ln_gap)
        }
        (false, false) => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn g(rate: i64, power: Rational, log: Rational, loglog: Rational) -> Growth {
        Growth { rate: int(rate), power, log, loglog }
    }

    #[test]
    fn bertrand_scale() {
        assert!(g(-1, int(5), int(0), int(0)).is_integrable());
        assert!(!g(1, int(-5), int(0), int(0)).is_integrable());
        assert!(g(0, ratio(-3, 2), int(0), int(0)).is_integrable());
        assert!(!g(0, int(-1), int(0), int(0)).is_integrable());
        assert!(!g(0, int(-1), int(-1), int(0)).is_integrable());
        assert!(g(0, int(-1), int(-2), int(0)).is_integrable());
        assert!(!g(0, int(-1), int(-1), int(-1)).is_integrable());
        assert!(g(0, int(-1), int(-1), int(-2)).is_integrable());
    }

    #[test]
    fn closed_form_integrals() {
        let e = PowerExp { coeff: 2.0, power: int(0), rate: int(-1) };
        assert!((definite(&e, 0.0, f64::INFINITY).unwrap() - 2.0).abs() < 1e-15);
        let p = PowerExp { coeff: 1.0, power: int(-2), rate: int(0) };
        assert!((definite(&p, 1.0, f64::INFINITY).unwrap() - 1.0).abs() < 1e-15);
        let h = PowerExp { coeff: 1.0, power: int(-1), rate: int(0) };
        assert!((definite(&h, 1.0, std::f64::consts::E).unwrap() - 1.0).abs() < 1e-15);
        let grow = PowerExp { coeff: 1.0, power: int(0), rate: int(3) };
        let v = definite(&grow, 0.0, 1.0).unwrap();
        assert!((v - (3.0f64.exp() - 1.0) / 3.0).abs() < 1e-13);
    }

    #[test]
    fn primitive_classes() {
        let harmonic = PowerExp { coeff: 1.0, power: int(-1), rate: int(0) };
        assert_eq!(
            primitive(&harmonic, 1.0),
            Primitive::Grows(Growth { log: int(1), ..Growth::one() })
        );
        let Primitive::Grows(c) = primitive(&PowerExp::constant(1.0), 0.0) else { panic!() };
        assert_eq!(c.power, int(1));
        assert_eq!(c.log_of().unwrap().log, int(1));
        let Primitive::Bounded { limit } = primitive(&PowerExp { coeff: 1.0, power: int(-3), rate: int(0) }, 1.0)
        else {
            panic!()
        };
        assert!((limit - 0.5).abs() < 1e-15);
    }
}
