//! Warping functions `h(t, x)` on `[a, b) × N` and their envelopes.
//!
//! For an exponent `alpha = n/p - k` the lower envelope is
//! `f(t) = min_x h(t, x)^alpha` and the upper envelope is
//! `F(t) = max_x h(t, x)^alpha`. Both are computed from the extreme values of
//! `h` over the base, so only one power is taken per `t`.
//!
//! Bounded families (`C1 e^{s1 t} <= h <= C2 e^{s2 t}` and the power analogue)
//! describe a whole class of warping functions. For them the envelopes are the
//! tightest bounds valid for every member of the class.

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};

/// Half-open interval `[start, end)`; `end` may be `+inf`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub start: f64,
    #[serde(with = "end_serde")]
    pub end: f64,
}

impl Interval {
    pub fn new(start: f64, end: f64) -> Result<Self> {
        if !start.is_finite() {
            return Err(Error::InvalidInterval(format!("start must be finite, got {start}")));
        }
        if end.is_nan() || end == f64::NEG_INFINITY || end <= start {
            return Err(Error::InvalidInterval(format!("need start < end, got [{start}, {end})")));
        }
        Ok(Interval { start, end })
    }

    pub fn unbounded(start: f64) -> Self {
        Interval { start, end: f64::INFINITY }
    }

    pub fn is_unbounded(&self) -> bool {
        self.end.is_infinite()
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.start && t <= self.end
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        other.start >= self.start && other.end <= self.end
    }
}

mod end_serde {
    use serde::{de, Deserializer, Serializer};
    use std::fmt;

    pub fn serialize<S: Serializer>(end: &f64, s: S) -> Result<S::Ok, S::Error> {
        if end.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*end)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        struct V;
        impl de::Visitor<'_> for V {
            type Value = f64;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number or \"inf\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<f64, E> {
                Ok(v)
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<f64, E> {
                Ok(v as f64)
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<f64, E> {
                Ok(v as f64)
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<f64, E> {
                match v.trim() {
                    "inf" | "+inf" | "infinity" | "Infinity" => Ok(f64::INFINITY),
                    other => other.parse().map_err(E::custom),
                }
            }
        }
        d.deserialize_any(V)
    }
}

/// `coeff * t^power * e^{rate t}` with `coeff > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerExp {
    pub coeff: f64,
    pub power: Rational,
    pub rate: Rational,
}

impl PowerExp {
    pub fn constant(c: f64) -> Self {
        PowerExp { coeff: c, power: Rational::zero(), rate: Rational::zero() }
    }

    pub fn ln_eval(&self, t: f64) -> f64 {
        let mut v = self.coeff.ln() + rational::to_f64(self.rate) * t;
        if !self.power.is_zero() {
            v += rational::to_f64(self.power) * t.ln();
        }
        v
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.ln_eval(t).exp()
    }

    pub fn powr(&self, e: Rational) -> Self {
        PowerExp {
            coeff: self.coeff.powf(rational::to_f64(e)),
            power: self.power * e,
            rate: self.rate * e,
        }
    }

    pub fn mul(&self, other: &PowerExp) -> Self {
        PowerExp {
            coeff: self.coeff * other.coeff,
            power: self.power + other.power,
            rate: self.rate + other.rate,
        }
    }
}

/// Warped (t-only) profiles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "kebab-case")]
pub enum Profile {
    /// `h(t) = value`
    Constant { value: f64 },
    /// `h(t) = scale * e^{rate t}`
    Exp {
        scale: f64,
        #[serde(with = "rational::serde_str")]
        rate: Rational,
    },
    /// `h(t) = scale * t^exponent`, defined for `t > 0`.
    Power {
        scale: f64,
        #[serde(with = "rational::serde_str")]
        exponent: Rational,
    },
}

impl Profile {
    pub fn as_power_exp(&self) -> PowerExp {
        match *self {
            Profile::Constant { value } => PowerExp::constant(value),
            Profile::Exp { scale, rate } => PowerExp { coeff: scale, power: Rational::zero(), rate },
            Profile::Power { scale, exponent } => {
                PowerExp { coeff: scale, power: exponent, rate: Rational::zero() }
            }
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        self.as_power_exp().eval(t)
    }
}

/// Finite samples of `h` on `t_grid × x_grid`, `x_grid ⊂ Tⁿ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSamples {
    pub t: Vec<f64>,
    pub x: Vec<Vec<f64>>,
    /// `values[i][j] = h(t[i], x[j])`
    pub values: Vec<Vec<f64>>,
}

impl GridSamples {
    fn validate(&self) -> Result<()> {
        if self.x.is_empty() {
            return Err(Error::EmptyGrid);
        }
        if self.t.len() < 2 {
            return Err(Error::InvalidModel("grid needs at least two t-samples".into()));
        }
        if self.t.iter().any(|t| !t.is_finite()) || self.t.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidModel("t-samples must be finite and strictly increasing".into()));
        }
        let dim = self.x[0].len();
        if self.x.iter().any(|p| p.len() != dim) {
            return Err(Error::InvalidModel("x-samples must share one torus dimension".into()));
        }
        if self.values.len() != self.t.len() {
            return Err(Error::InvalidModel(format!(
                "expected {} rows of values, got {}",
                self.t.len(),
                self.values.len()
            )));
        }
        for (i, row) in self.values.iter().enumerate() {
            if row.len() != self.x.len() {
                return Err(Error::InvalidModel(format!(
                    "row {i} has {} values, expected {}",
                    row.len(),
                    self.x.len()
                )));
            }
            if let Some(v) = row.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
                return Err(Error::InvalidModel(format!("sample {v} in row {i} is not positive")));
            }
        }
        Ok(())
    }

    /// Extreme values of `h(t, ·)` over the x-samples, with linear
    /// interpolation in `t` between rows.
    pub fn extremes(&self, t: f64) -> (f64, f64) {
        let last = self.t.len() - 1;
        let seg = self.t.partition_point(|&s| s <= t).clamp(1, last) - 1;
        let (t0, t1) = (self.t[seg], self.t[seg + 1]);
        let w = ((t - t0) / (t1 - t0)).clamp(0.0, 1.0);
        let (r0, r1) = (&self.values[seg], &self.values[seg + 1]);
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (a, b) in r0.iter().zip(r1) {
            let v = a + w * (b - a);
            lo = lo.min(v);
            hi = hi.max(v);
        }
        (lo, hi)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum WarpingShape {
    Separable(Profile),
    /// `c1 e^{s1 t} <= h(t, x) <= c2 e^{s2 t}`
    ExpBounded {
        c1: f64,
        #[serde(with = "rational::serde_str")]
        s1: Rational,
        c2: f64,
        #[serde(with = "rational::serde_str")]
        s2: Rational,
    },
    /// `c1 t^{s1} <= h(t, x) <= c2 t^{s2}`
    PowerBounded {
        c1: f64,
        #[serde(with = "rational::serde_str")]
        s1: Rational,
        c2: f64,
        #[serde(with = "rational::serde_str")]
        s2: Rational,
    },
    Grid(GridSamples),
}

/// A validated warping function together with the interval it lives on.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WarpingModel {
    shape: WarpingShape,
    domain: Interval,
}

impl WarpingModel {
    /// Builds a model on `domain`. Grid models take their domain from the
    /// first and last t-sample and ignore the argument's end point.
    pub fn new(shape: WarpingShape, domain: Interval) -> Result<Self> {
        let domain = match &shape {
            WarpingShape::Separable(profile) => {
                check_profile(profile, domain)?;
                domain
            }
            WarpingShape::ExpBounded { c1, s1, c2, s2 } => {
                check_band(*c1, *s1, *c2, *s2)?;
                domain
            }
            WarpingShape::PowerBounded { c1, s1, c2, s2 } => {
                check_band(*c1, *s1, *c2, *s2)?;
                if domain.start <= 0.0 {
                    return Err(Error::InvalidModel("power-bounded models need a > 0".into()));
                }
                domain
            }
            WarpingShape::Grid(grid) => {
                grid.validate()?;
                Interval::new(grid.t[0], *grid.t.last().unwrap())?
            }
        };
        Ok(WarpingModel { shape, domain })
    }

    pub fn separable(profile: Profile, domain: Interval) -> Result<Self> {
        Self::new(WarpingShape::Separable(profile), domain)
    }

    pub fn constant(value: f64, start: f64) -> Result<Self> {
        Self::separable(Profile::Constant { value }, Interval::unbounded(start))
    }

    pub fn grid(samples: GridSamples) -> Result<Self> {
        let placeholder = Interval::unbounded(0.0);
        Self::new(WarpingShape::Grid(samples), placeholder)
    }

    pub fn shape(&self) -> &WarpingShape {
        &self.shape
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    pub fn is_separable(&self) -> bool {
        matches!(self.shape, WarpingShape::Separable(_))
    }

    pub fn is_grid(&self) -> bool {
        matches!(self.shape, WarpingShape::Grid(_))
    }

    fn check_t(&self, t: f64) -> Result<()> {
        if t.is_nan() || !self.domain.contains(t) {
            return Err(Error::OutOfDomain { t, start: self.domain.start, end: self.domain.end });
        }
        Ok(())
    }

    /// `(ln min_x h, ln max_x h)` at `t`, or the band bounds for bounded
    /// families.
    fn ln_extremes(&self, t: f64) -> (f64, f64) {
        match &self.shape {
            WarpingShape::Separable(p) => {
                let v = p.as_power_exp().ln_eval(t);
                (v, v)
            }
            WarpingShape::ExpBounded { c1, s1, c2, s2 } => (
                c1.ln() + rational::to_f64(*s1) * t,
                c2.ln() + rational::to_f64(*s2) * t,
            ),
            WarpingShape::PowerBounded { c1, s1, c2, s2 } => (
                c1.ln() + rational::to_f64(*s1) * t.ln(),
                c2.ln() + rational::to_f64(*s2) * t.ln(),
            ),
            WarpingShape::Grid(g) => {
                let (lo, hi) = g.extremes(t);
                (lo.ln(), hi.ln())
            }
        }
    }

    /// `ln f(t)` and `ln F(t)` for exponent `alpha`.
    pub fn ln_envelopes(&self, alpha: Rational, t: f64) -> Result<(f64, f64)> {
        self.check_t(t)?;
        if alpha.is_zero() {
            return Ok((0.0, 0.0));
        }
        let (lo, hi) = self.ln_extremes(t);
        let a = rational::to_f64(alpha);
        Ok(if alpha.is_positive() { (a * lo, a * hi) } else { (a * hi, a * lo) })
    }

    pub fn lower_envelope(&self, alpha: Rational, t: f64) -> Result<f64> {
        Ok(self.ln_envelopes(alpha, t)?.0.exp())
    }

    pub fn upper_envelope(&self, alpha: Rational, t: f64) -> Result<f64> {
        Ok(self.ln_envelopes(alpha, t)?.1.exp())
    }

    /// Closed-form bounds `lo <= f <= F <= hi` for the analytic shapes; `None`
    /// for sampled data. Separable models return `lo == hi`.
    pub fn envelope_terms(&self, alpha: Rational) -> Option<(PowerExp, PowerExp)> {
        let (lo, hi) = match &self.shape {
            WarpingShape::Separable(p) => {
                let e = p.as_power_exp();
                (e, e)
            }
            WarpingShape::ExpBounded { c1, s1, c2, s2 } => (
                PowerExp { coeff: *c1, power: Rational::zero(), rate: *s1 },
                PowerExp { coeff: *c2, power: Rational::zero(), rate: *s2 },
            ),
            WarpingShape::PowerBounded { c1, s1, c2, s2 } => (
                PowerExp { coeff: *c1, power: *s1, rate: Rational::zero() },
                PowerExp { coeff: *c2, power: *s2, rate: Rational::zero() },
            ),
            WarpingShape::Grid(_) => return None,
        };
        if alpha.is_zero() {
            let one = PowerExp::constant(1.0);
            return Some((one, one));
        }
        let (lo, hi) = (lo.powr(alpha), hi.powr(alpha));
        Some(if alpha.is_positive() { (lo, hi) } else { (hi, lo) })
    }
}

fn check_profile(profile: &Profile, domain: Interval) -> Result<()> {
    let positive = |v: f64, what: &str| {
        if v.is_finite() && v > 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidModel(format!("{what} must be positive, got {v}")))
        }
    };
    match *profile {
        Profile::Constant { value } => positive(value, "constant value"),
        Profile::Exp { scale, .. } => positive(scale, "scale"),
        Profile::Power { scale, exponent } => {
            positive(scale, "scale")?;
            if !exponent.is_zero() && domain.start <= 0.0 {
                return Err(Error::InvalidModel("power profiles need a > 0".into()));
            }
            Ok(())
        }
    }
}

fn check_band(c1: f64, s1: Rational, c2: f64, s2: Rational) -> Result<()> {
    if !(c1.is_finite() && c2.is_finite() && c1 > 0.0 && c2 > 0.0) {
        return Err(Error::InvalidModel("band constants must be positive".into()));
    }
    if c1 > c2 {
        return Err(Error::InvalidModel(format!("need C1 <= C2, got {c1} > {c2}")));
    }
    if s1.is_negative() || s2 < s1 {
        return Err(Error::InvalidModel(format!(
            "need s2 >= s1 >= 0, got s1 = {}, s2 = {}",
            rational::format(s1),
            rational::format(s2)
        )));
    }
    Ok(())
}

/// Exponent data `(n, k, p)`: base dimension, form degree, integrability.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExponentTriple {
    pub n: u32,
    pub k: u32,
    pub p: Rational,
}

impl ExponentTriple {
    pub fn new(n: u32, k: u32, p: Rational) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidExponent("base dimension n must be at least 1".into()));
        }
        if p <= rational::int(1) {
            return Err(Error::InvalidExponent(format!("need p > 1, got {}", rational::format(p))));
        }
        Ok(ExponentTriple { n, k, p })
    }

    /// `n/p - k`
    pub fn alpha(&self) -> Rational {
        rational::int(self.n as i64) / self.p - rational::int(self.k as i64)
    }
}

/// Exponent `n/p - k` of the envelope functions.
pub fn envelope_exponent(n: u32, k: u32, p: Rational) -> Result<Rational> {
    Ok(ExponentTriple::new(n, k, p)?.alpha())
}

/// True iff `k = n/p` exactly.
pub fn is_middle_dimension(n: u32, k: u32, p: Rational) -> bool {
    rational::int(n as i64) / p == rational::int(k as i64)
}
