//! Classification of the four criterion integrals
//!
//! ```text
//! I  = ∫_a^b F_{k,p}^p
//! J  = ∫_{δ0}^b f_{k,p}^p(τ) (∫_a^τ F_{k,p}^p)^{-1} dτ
//! Ĩ  = ∫_a^b f_{k-1,p}^{-p'}
//! A  = ∫_{δ0}^b F_{k-1,p}^p f_{k-1,p}^{-pp'}(τ) (P(τ) |ln P(τ)|^p)^{-1} dτ,   P(τ) = ∫_a^τ f_{k-1,p}^{-p'}
//! ```
//!
//! Separable models go through closed forms. For bounded families each
//! integrand is squeezed between two explicit functions built from the band
//! constants and both are classified on the asymptotic scale of
//! [`growth::Growth`]; when the two disagree the verdict is `Unknown`. Grid
//! models, and any model when [`Route::Numeric`] is requested, go through
//! log-domain quadrature with tail classification on doubling cutoffs.

pub mod growth;
mod numeric;

use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};
use crate::warping::{ExponentTriple, Interval, PowerExp, WarpingModel, WarpingShape};
use growth::{ln_definite, primitive, Growth, Primitive};
use numeric::{Integrand, LnFn};

/// Conjugate exponent `p' = p/(p-1)`.
pub fn conjugate_exponent(p: Rational) -> Result<Rational> {
    rational::conjugate(p)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Diverges,
    Converges,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ClosedForm,
    EnvelopeBounds,
    Quadrature,
    TailDoubling,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Partial {
    pub cutoff: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub method: Method,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub partials: Vec<Partial>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub growth_exponent: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub delta0: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub notes: Vec<String>,
}

impl Diagnostics {
    pub fn new(method: Method) -> Self {
        Diagnostics { method, partials: Vec::new(), growth_exponent: None, delta0: None, notes: Vec::new() }
    }

    fn note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegralVerdict {
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error_bound: Option<f64>,
    pub diagnostics: Diagnostics,
}

impl IntegralVerdict {
    pub fn diverges(diagnostics: Diagnostics) -> Self {
        IntegralVerdict { status: Status::Diverges, value: None, error_bound: None, diagnostics }
    }

    /// A convergent verdict; non-finite values are downgraded to `Unknown`.
    pub fn converges(value: f64, error_bound: f64, diagnostics: Diagnostics) -> Self {
        if !(value.is_finite() && error_bound.is_finite()) {
            return Self::unknown(diagnostics.note("value is not representable in double precision"));
        }
        IntegralVerdict {
            status: Status::Converges,
            value: Some(value.max(0.0)),
            error_bound: Some(error_bound.abs()),
            diagnostics,
        }
    }

    pub fn unknown(mut diagnostics: Diagnostics) -> Self {
        if diagnostics.notes.is_empty() {
            diagnostics.notes.push("no conclusive evidence".into());
        }
        IntegralVerdict { status: Status::Unknown, value: None, error_bound: None, diagnostics }
    }

    pub fn is_diverges(&self) -> bool {
        self.status == Status::Diverges
    }

    pub fn is_converges(&self) -> bool {
        self.status == Status::Converges
    }

    fn with_delta0(mut self, delta0: f64) -> Self {
        self.diagnostics.delta0 = Some(delta0);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Route {
    /// Closed forms and envelope bounds where available, quadrature otherwise.
    #[default]
    Auto,
    /// Quadrature on the model envelopes regardless of the model shape.
    Numeric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifierSettings {
    /// Partial integrals above this value with sustained growth diverge.
    pub ceiling: f64,
    pub epsilon_tail: f64,
    pub max_doublings: u32,
    /// Length `L0` of the first doubling cutoff.
    pub initial_length: f64,
    pub panel_rel_tol: f64,
    /// Overrides the default `δ0 = a + 1`.
    pub delta0: Option<f64>,
    pub route: Route,
}

impl Default for ClassifierSettings {
    fn default() -> Self {
        ClassifierSettings {
            ceiling: 1e8,
            epsilon_tail: 1e-8,
            max_doublings: 40,
            initial_length: 1.0,
            panel_rel_tol: 1e-9,
            delta0: None,
            route: Route::Auto,
        }
    }
}

impl ClassifierSettings {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("ceiling", self.ceiling),
            ("epsilon_tail", self.epsilon_tail),
            ("initial_length", self.initial_length),
            ("panel_rel_tol", self.panel_rel_tol),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::config(format!("classifier.{name}"), format!("must be positive, got {v}")));
            }
        }
        if self.max_doublings < 4 || self.max_doublings > 60 {
            return Err(Error::config("classifier.max_doublings", "must lie in 4..=60"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IntegralKind {
    #[serde(rename = "I")]
    I,
    #[serde(rename = "J")]
    J,
    #[serde(rename = "I~")]
    ITilde,
    #[serde(rename = "A")]
    A,
}

impl fmt::Display for IntegralKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            IntegralKind::I => "I",
            IntegralKind::J => "J",
            IntegralKind::ITilde => "I~",
            IntegralKind::A => "A",
        })
    }
}

/// `∫_a^b F_{k,p}^p`.
pub fn classify_i(
    h: &WarpingModel,
    n: u32,
    k: u32,
    p: Rational,
    interval: Interval,
    settings: &ClassifierSettings,
) -> Result<IntegralVerdict> {
    classify(IntegralKind::I, h, n, k, p, interval, None, settings)
}

/// `∫_{δ0}^b f_{k,p}^p (∫_a^τ F_{k,p}^p)^{-1} dτ`; `delta0` defaults to the
/// settings override or `a + 1`.
pub fn classify_j(
    h: &WarpingModel,
    n: u32,
    k: u32,
    p: Rational,
    interval: Interval,
    delta0: Option<f64>,
    settings: &ClassifierSettings,
) -> Result<IntegralVerdict> {
    classify(IntegralKind::J, h, n, k, p, interval, delta0, settings)
}

/// `∫_a^b f_{k-1,p}^{-p'}`; needs `k >= 1`.
pub fn classify_i_tilde(
    h: &WarpingModel,
    n: u32,
    k: u32,
    p: Rational,
    interval: Interval,
    settings: &ClassifierSettings,
) -> Result<IntegralVerdict> {
    classify(IntegralKind::ITilde, h, n, k, p, interval, None, settings)
}

/// The logarithmic integral `A`; needs `k >= 1`. `δ0` is advanced past the
/// point where the inner integral reaches `e` (or the midpoint between 1
/// and its limit when that limit is at most `e`), and the shift is recorded
/// in the diagnostics.
pub fn classify_a(
    h: &WarpingModel,
    n: u32,
    k: u32,
    p: Rational,
    interval: Interval,
    delta0: Option<f64>,
    settings: &ClassifierSettings,
) -> Result<IntegralVerdict> {
    classify(IntegralKind::A, h, n, k, p, interval, delta0, settings)
}

/// Classifies `∫_a^∞ g` for a nonnegative `g` on doubling cutoffs
/// `a + 2^i L0`, with a second pass on the scale `u = ln t` when the
/// increments decay too slowly to extrapolate.
pub fn adaptive_tail_classification(
    g: impl Fn(f64) -> f64,
    a: f64,
    settings: &ClassifierSettings,
) -> Result<IntegralVerdict> {
    settings.validate()?;
    if !a.is_finite() {
        return Err(Error::InvalidInterval(format!("start must be finite, got {a}")));
    }
    let ln_g = move |t: f64| {
        let v = g(t);
        if v.is_nan() || v < 0.0 {
            return Err(Error::Evaluation { t, reason: format!("integrand value {v} is not nonnegative") });
        }
        Ok(v.ln())
    };
    let integrand = Integrand::plain(Box::new(ln_g));
    numeric::classify_tail(&integrand, a, 0.0, settings)
}

/// Exponent data shared by the four classifiers.
struct Exponents {
    p: Rational,
    p_conj: Rational,
    /// `n/p - k` for I and J, `n/p - k + 1` for Ĩ and A.
    gamma: Rational,
}

impl Exponents {
    fn new(kind: IntegralKind, n: u32, k: u32, p: Rational) -> Result<Self> {
        let triple = ExponentTriple::new(n, k, p)?;
        let p_conj = rational::conjugate(p)?;
        let gamma = match kind {
            IntegralKind::I | IntegralKind::J => triple.alpha(),
            IntegralKind::ITilde | IntegralKind::A => {
                if k == 0 {
                    return Err(Error::InvalidExponent(format!("{kind} needs k >= 1")));
                }
                triple.alpha() + Rational::one()
            }
        };
        Ok(Exponents { p, p_conj, gamma })
    }

    fn pf(&self) -> f64 {
        rational::to_f64(self.p)
    }

    fn pcf(&self) -> f64 {
        rational::to_f64(self.p_conj)
    }
}

/// Integrand of one criterion integral (or of a bound for it) in terms of
/// explicit power-exponential factors.
#[derive(Debug, Clone, Copy)]
enum Shape {
    Simple(PowerExp),
    /// `num / ∫_a^τ inner`
    Ratio { num: PowerExp, inner: PowerExp },
    /// `num / (P |ln P|^q)`, `P = ∫_a^τ inner`
    LogRatio { num: PowerExp, inner: PowerExp, q: Rational },
}

impl Shape {
    /// `(lower, upper)` bounds of the integrand of `kind` from envelope terms.
    fn bounds(kind: IntegralKind, ex: &Exponents, lo: PowerExp, hi: PowerExp) -> (Shape, Shape) {
        let p = ex.p;
        let pc = ex.p_conj;
        match kind {
            IntegralKind::I => (Shape::Simple(lo.powr(p)), Shape::Simple(hi.powr(p))),
            IntegralKind::ITilde => (Shape::Simple(hi.powr(-pc)), Shape::Simple(lo.powr(-pc))),
            IntegralKind::J => (
                Shape::Ratio { num: lo.powr(p), inner: hi.powr(p) },
                Shape::Ratio { num: hi.powr(p), inner: lo.powr(p) },
            ),
            IntegralKind::A => (
                Shape::LogRatio { num: lo.powr(p).mul(&hi.powr(-p * pc)), inner: lo.powr(-pc), q: p },
                Shape::LogRatio { num: hi.powr(p).mul(&lo.powr(-p * pc)), inner: hi.powr(-pc), q: p },
            ),
        }
    }

    /// Integrability on `[c, ∞)`; `None` when the scale cannot decide.
    fn tail_integrable(&self, a: f64) -> Option<bool> {
        match *self {
            Shape::Simple(t) => Some(Growth::of(&t).is_integrable()),
            Shape::Ratio { num, inner } => Some(match primitive(&inner, a) {
                Primitive::Bounded { .. } => Growth::of(&num).is_integrable(),
                Primitive::Grows(g) => (Growth::of(&num) / g).is_integrable(),
            }),
            Shape::LogRatio { num, inner, q } => match primitive(&inner, a) {
                Primitive::Bounded { limit } => {
                    if limit == 1.0 || !limit.is_finite() {
                        None
                    } else {
                        Some(Growth::of(&num).is_integrable())
                    }
                }
                Primitive::Grows(g) => {
                    let lg = g.log_of()?;
                    Some((Growth::of(&num) / (g * lg.powr(q))).is_integrable())
                }
            },
        }
    }

    fn integrand(&self) -> Integrand<'static> {
        let ln = |t: PowerExp| -> LnFn<'static> { Box::new(move |x| Ok(t.ln_eval(x))) };
        match *self {
            Shape::Simple(t) => Integrand::plain(ln(t)),
            Shape::Ratio { num, inner } => Integrand::nested(ln(num), ln(inner), None),
            Shape::LogRatio { num, inner, q } => {
                Integrand::nested(ln(num), ln(inner), Some(rational::to_f64(q)))
            }
        }
    }

    fn inner(&self) -> Option<PowerExp> {
        match *self {
            Shape::Simple(_) => None,
            Shape::Ratio { inner, .. } | Shape::LogRatio { inner, .. } => Some(inner),
        }
    }
}

fn default_delta0(interval: Interval) -> f64 {
    let a = interval.start;
    if a + 1.0 < interval.end {
        a + 1.0
    } else {
        0.5 * (a + interval.end)
    }
}

/// Level the inner integral of A must reach at `δ0`, given its value at `b`.
fn log_threshold(limit: f64) -> Option<f64> {
    let e = std::f64::consts::E;
    if limit > e {
        Some(e)
    } else if limit > 1.0 {
        Some(0.5 * (1.0 + limit))
    } else {
        None
    }
}

/// Smallest `τ >= delta0` with `inner(τ) >= level`, by bracketing and
/// bisection. `inner` is nondecreasing.
fn advance_to_level(inner: &dyn Fn(f64) -> Result<f64>, delta0: f64, end: f64, level: f64) -> Result<f64> {
    if inner(delta0)? >= level {
        return Ok(delta0);
    }
    let mut lo = delta0;
    let mut step = 1.0;
    let mut hi = loop {
        let cand = if end.is_finite() { (lo + step).min(end) } else { lo + step };
        if inner(cand)? >= level || cand >= end {
            break cand;
        }
        lo = cand;
        step *= 2.0;
        if step > 1e300 {
            return Err(Error::Evaluation { t: cand, reason: "inner integral never reaches the level".into() });
        }
    };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if inner(mid)? >= level {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[allow(clippy::too_many_arguments)]
fn classify(
    kind: IntegralKind,
    h: &WarpingModel,
    n: u32,
    k: u32,
    p: Rational,
    interval: Interval,
    delta0: Option<f64>,
    settings: &ClassifierSettings,
) -> Result<IntegralVerdict> {
    settings.validate()?;
    let ex = Exponents::new(kind, n, k, p)?;
    let interval = Interval::new(interval.start, interval.end)?;
    // h^0 = 1 whatever the model, grid tails included.
    let exact_unit = ex.gamma.is_zero() && settings.route == Route::Auto;
    if h.is_grid() && interval.is_unbounded() && !exact_unit {
        let diag = Diagnostics::new(Method::Quadrature).note("finite samples cannot certify a tail");
        return Ok(IntegralVerdict::unknown(diag));
    }
    let domain = h.domain();
    let inside = if exact_unit { interval.start >= domain.start } else { domain.contains_interval(&interval) };
    if !inside {
        let t = if interval.start < domain.start { interval.start } else { interval.end };
        return Err(Error::OutOfDomain { t, start: domain.start, end: domain.end });
    }
    let delta0 = match kind {
        IntegralKind::J | IntegralKind::A => {
            let d = delta0.or(settings.delta0).unwrap_or_else(|| default_delta0(interval));
            if !(d > interval.start && d < interval.end) {
                return Err(Error::InvalidInterval(format!(
                    "delta0 = {d} must lie strictly inside [{}, {})",
                    interval.start, interval.end
                )));
            }
            Some(d)
        }
        _ => None,
    };
    let terms = match settings.route {
        Route::Auto if exact_unit => Some((PowerExp::constant(1.0), PowerExp::constant(1.0))),
        Route::Auto => h.envelope_terms(ex.gamma),
        Route::Numeric => None,
    };
    let verdict = match terms {
        Some((lo, hi)) if lo == hi => closed_form(kind, &ex, lo, interval, delta0)?,
        Some((lo, hi)) => envelope_bounds(kind, &ex, lo, hi, interval, delta0, settings)?,
        None => quadrature(kind, &ex, h, interval, delta0, settings)?,
    };
    Ok(verdict)
}

/// Exact route for separable models (and degenerate bands).
fn closed_form(
    kind: IntegralKind,
    ex: &Exponents,
    term: PowerExp,
    interval: Interval,
    delta0: Option<f64>,
) -> Result<IntegralVerdict> {
    let (a, b) = (interval.start, interval.end);
    let (shape, _) = Shape::bounds(kind, ex, term, term);
    let mut diag = Diagnostics::new(Method::ClosedForm);
    if interval.is_unbounded() {
        match shape.tail_integrable(a) {
            Some(false) => {
                let note = match shape {
                    Shape::Simple(t) => format!("integrand ~ {} is not integrable at infinity", Growth::of(&t)),
                    _ => "integrand is not integrable at infinity".to_string(),
                };
                let v = IntegralVerdict::diverges(diag.note(note));
                return Ok(match delta0 {
                    Some(d) => v.with_delta0(d),
                    None => v,
                });
            }
            Some(true) => {}
            None => return Ok(IntegralVerdict::unknown(diag.note("inner integral tends to 1"))),
        }
    }
    let rel = 1e-12;
    let verdict = match shape {
        Shape::Simple(t) => {
            let v = ln_definite(&t, a, b).map(f64::exp).unwrap_or(f64::NAN);
            IntegralVerdict::converges(v, rel * v, diag)
        }
        Shape::Ratio { inner, .. } => {
            // Telescoping: the integrand is (ln P)'.
            let d = delta0.expect("J carries delta0");
            let ln_p = |x: f64| ln_definite(&inner, a, x).unwrap_or(f64::NAN);
            let v = ln_p(b) - ln_p(d);
            diag.delta0 = Some(d);
            IntegralVerdict::converges(v, rel * (ln_p(b).abs() + ln_p(d).abs()), diag)
        }
        Shape::LogRatio { inner, q, .. } => {
            // Telescoping: the integrand is (sign ln P · |ln P|^{1-q}/(1-q))'.
            let ln_p = |x: f64| ln_definite(&inner, a, x).unwrap_or(f64::NAN);
            let p_of = |x: f64| Ok(ln_p(x).exp());
            let mut d = delta0.expect("A carries delta0");
            if let Some(level) = log_threshold(ln_p(b).exp()) {
                let shifted = advance_to_level(&p_of, d, b, level)?;
                if shifted > d {
                    diag.notes.push(format!("delta0 advanced from {d} to {shifted} so that the inner integral reaches {level:.6}"));
                    d = shifted;
                }
            }
            diag.delta0 = Some(d);
            let (l0, l1) = (ln_p(d), ln_p(b));
            if l0 == 0.0 || (l0 < 0.0 && l1 >= 0.0) {
                return Ok(IntegralVerdict::unknown(diag.note("log singularity of the inner integral")));
            }
            let qf = rational::to_f64(q);
            let term = |l: f64| l.abs().powf(1.0 - qf);
            let sign = if l0 > 0.0 { 1.0 } else { -1.0 };
            let v = sign * (term(l0) - term(l1)) / (qf - 1.0);
            IntegralVerdict::converges(v, rel * (term(l0) + term(l1)) / (qf - 1.0), diag)
        }
    };
    Ok(verdict)
}

/// Bounded families: squeeze the integrand between explicit bounds.
fn envelope_bounds(
    kind: IntegralKind,
    ex: &Exponents,
    lo: PowerExp,
    hi: PowerExp,
    interval: Interval,
    delta0: Option<f64>,
    settings: &ClassifierSettings,
) -> Result<IntegralVerdict> {
    let (a, b) = (interval.start, interval.end);
    let (lower, upper) = Shape::bounds(kind, ex, lo, hi);
    let mut diag = Diagnostics::new(Method::EnvelopeBounds);
    let mut start = a;
    if let Some(d) = delta0 {
        start = d;
        if kind == IntegralKind::A {
            // The smaller inner integral must stay above 1 for the bounds
            // to be ordered.
            let small = upper.inner().expect("A has an inner integral");
            let p_small = |x: f64| Ok(ln_definite(&small, a, x).map(f64::exp).unwrap_or(f64::NAN));
            let limit = p_small(b)?;
            let Some(level) = log_threshold(limit) else {
                diag.delta0 = Some(d);
                return Ok(IntegralVerdict::unknown(
                    diag.note("the lower inner integral stays below 1, so the bounds are not ordered"),
                ));
            };
            let shifted = advance_to_level(&p_small, d, b, level)?;
            if shifted > d {
                diag.notes.push(format!("delta0 advanced from {d} to {shifted} so that the inner integral reaches {level:.6}"));
                start = shifted;
            }
        }
        diag.delta0 = Some(start);
    }
    if interval.is_unbounded() {
        let lower_int = lower.tail_integrable(a);
        let upper_int = upper.tail_integrable(a);
        if lower_int == Some(false) {
            let v = IntegralVerdict::diverges(diag.note("the lower bound of the integrand is not integrable"));
            return Ok(v);
        }
        if upper_int != Some(true) {
            return Ok(IntegralVerdict::unknown(
                diag.note("lower and upper bounds of the integrand disagree about the tail"),
            ));
        }
    }
    let lo_v = bound_value(&lower, a, start, b, settings, &mut diag)?;
    let hi_v = bound_value(&upper, a, start, b, settings, &mut diag)?;
    let value = 0.5 * (lo_v.0 + hi_v.0);
    let error = 0.5 * (hi_v.0 - lo_v.0).abs() + lo_v.1 + hi_v.1;
    Ok(IntegralVerdict::converges(value, error, diag))
}

/// Value and error of the integral of one bound over `[start, b)`.
fn bound_value(
    shape: &Shape,
    a: f64,
    start: f64,
    b: f64,
    settings: &ClassifierSettings,
    diag: &mut Diagnostics,
) -> Result<(f64, f64)> {
    if let Shape::Simple(t) = shape {
        if let Some(ln_v) = ln_definite(t, start, b) {
            let v = ln_v.exp();
            return Ok((v, 1e-12 * v));
        }
    }
    let ln_inner0 = match shape.inner() {
        Some(inner) => ln_definite(&inner, a, start).unwrap_or(f64::NAN),
        None => 0.0,
    };
    let integrand = shape.integrand();
    if b.is_finite() {
        let breaks = numeric::breakpoints(start, b, &[], settings.initial_length);
        let panel = integrand.integrate(&breaks, ln_inner0, settings.panel_rel_tol)?;
        return Ok((panel.value, panel.error));
    }
    let v = numeric::classify_tail(&integrand, start, ln_inner0, settings)?;
    match (v.value, v.error_bound) {
        (Some(value), Some(err)) => Ok((value, err)),
        _ => {
            let last = v.diagnostics.partials.last().map_or(0.0, |p| p.value);
            diag.notes.push("bound integral did not settle numerically; value is the last partial".into());
            Ok((last, last.abs()))
        }
    }
}

/// Numeric route on the model envelopes themselves.
fn quadrature(
    kind: IntegralKind,
    ex: &Exponents,
    h: &WarpingModel,
    interval: Interval,
    delta0: Option<f64>,
    settings: &ClassifierSettings,
) -> Result<IntegralVerdict> {
    let (a, b) = (interval.start, interval.end);
    let g = ex.gamma;
    let (pf, pcf) = (ex.pf(), ex.pcf());
    let ln_lower = move |t: f64| -> Result<f64> { Ok(h.ln_envelopes(g, t)?.0) };
    let ln_upper = move |t: f64| -> Result<f64> { Ok(h.ln_envelopes(g, t)?.1) };
    let integrand: Integrand<'_> = match kind {
        IntegralKind::I => Integrand::plain(Box::new(move |t| Ok(pf * ln_upper(t)?))),
        IntegralKind::ITilde => Integrand::plain(Box::new(move |t| Ok(-pcf * ln_lower(t)?))),
        IntegralKind::J => Integrand::nested(
            Box::new(move |t| Ok(pf * ln_lower(t)?)),
            Box::new(move |t| Ok(pf * ln_upper(t)?)),
            None,
        ),
        IntegralKind::A => Integrand::nested(
            Box::new(move |t| Ok(pf * ln_upper(t)? - pf * pcf * ln_lower(t)?)),
            Box::new(move |t| Ok(-pcf * ln_lower(t)?)),
            Some(pf),
        ),
    };
    let nodes: Vec<f64> = match h.shape() {
        WarpingShape::Grid(grid) => grid.t.clone(),
        _ => Vec::new(),
    };
    let piece = settings.initial_length;
    let tol = settings.panel_rel_tol;
    let mut notes = Vec::new();
    let mut start = a;
    let mut ln_inner0 = 0.0;
    if let Some(mut d) = delta0 {
        let inner = integrand.inner.as_ref().expect("nested integrand");
        let inner_plain = Integrand::plain(Box::new(|t| (inner.ln_g)(t)));
        let p_of = |x: f64| -> Result<f64> {
            if x <= a {
                return Ok(0.0);
            }
            Ok(inner_plain.integrate(&numeric::breakpoints(a, x, &nodes, piece), 0.0, tol)?.value)
        };
        if kind == IntegralKind::A {
            let far = if b.is_finite() { b } else { a + settings.initial_length * 2f64.powi(settings.max_doublings as i32) };
            let limit = if b.is_finite() {
                p_of(b)?
            } else {
                let mut breaks = vec![a];
                breaks.extend((0..=settings.max_doublings).map(|i| a + piece * 2f64.powi(i as i32)));
                inner_plain.integrate(&breaks, 0.0, tol)?.value
            };
            if let Some(level) = log_threshold(limit) {
                let shifted = advance_to_level(&p_of, d, far, level)?;
                if shifted > d {
                    notes.push(format!("delta0 advanced from {d} to {shifted} so that the inner integral reaches {level:.6}"));
                    d = shifted;
                }
            }
        }
        start = d;
        ln_inner0 = p_of(d)?.ln();
    }
    let mut verdict = if b.is_finite() {
        let breaks = numeric::breakpoints(start, b, &nodes, piece);
        let panel = integrand.integrate(&breaks, ln_inner0, tol)?;
        let diag = Diagnostics::new(Method::Quadrature);
        IntegralVerdict::converges(panel.value, panel.error + 1e-12 * panel.value.abs(), diag)
    } else {
        numeric::classify_tail(&integrand, start, ln_inner0, settings)?
    };
    verdict.diagnostics.notes.splice(0..0, notes);
    if delta0.is_some() {
        verdict.diagnostics.delta0 = Some(start);
    }
    Ok(verdict)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};
    use crate::warping::Profile;

    fn settings() -> ClassifierSettings {
        ClassifierSettings::default()
    }

    fn exp_model(rate: i64) -> WarpingModel {
        WarpingModel::separable(Profile::Exp { scale: 1.0, rate: int(rate) }, Interval::unbounded(0.0)).unwrap()
    }

    #[test]
    fn conjugate_examples() {
        assert_eq!(conjugate_exponent(int(2)).unwrap(), int(2));
        assert_eq!(conjugate_exponent(int(4)).unwrap(), ratio(4, 3));
        assert_eq!(conjugate_exponent(ratio(3, 2)).unwrap(), int(3));
    }

    #[test]
    fn constant_model_i_diverges() {
        let h = WarpingModel::constant(1.0, 0.0).unwrap();
        let v = classify_i(&h, 3, 1, int(2), Interval::unbounded(0.0), &settings()).unwrap();
        assert_eq!(v.status, Status::Diverges);
    }

    #[test]
    fn power_profile_i_closed_form() {
        // h = t^2, n = 1, k = 1, p = 2: alpha = -1/2, integrand t^{-2} on [1, ∞)
        let h = WarpingModel::separable(Profile::Power { scale: 1.0, exponent: int(2) }, Interval::unbounded(1.0))
            .unwrap();
        let v = classify_i(&h, 1, 1, int(2), Interval::unbounded(1.0), &settings()).unwrap();
        assert_eq!(v.status, Status::Converges);
        assert!((v.value.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exp_j_ratio_tends_to_constant() {
        // h = e^t, n = 2, k = 0, p = 3/2: F^p = e^{2t}, J integrand -> 2
        let h = exp_model(1);
        let v = classify_j(&h, 2, 0, ratio(3, 2), Interval::unbounded(0.0), Some(1.0), &settings()).unwrap();
        assert_eq!(v.status, Status::Diverges);
        let mut s = settings();
        s.route = Route::Numeric;
        let v = classify_j(&h, 2, 0, ratio(3, 2), Interval::unbounded(0.0), Some(1.0), &s).unwrap();
        assert_eq!(v.status, Status::Diverges);
    }

    #[test]
    fn a_closed_form_value_one() {
        let h = WarpingModel::constant(1.0, 0.0).unwrap();
        let e = std::f64::consts::E;
        let v = classify_a(&h, 2, 2, int(2), Interval::unbounded(0.0), Some(e), &settings()).unwrap();
        assert_eq!(v.status, Status::Converges);
        assert!((v.value.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn grid_unbounded_is_unknown() {
        let g = crate::warping::GridSamples {
            t: vec![0.0, 1.0],
            x: vec![vec![0.0]],
            values: vec![vec![1.0], vec![1.0]],
        };
        let h = WarpingModel::grid(g).unwrap();
        let v = classify_i(&h, 1, 0, int(2), Interval::unbounded(0.0), &settings()).unwrap();
        assert_eq!(v.status, Status::Unknown);
        assert!(v.diagnostics.notes[0].contains("finite samples cannot certify a tail"));
        let v = classify_i(&h, 1, 0, int(2), Interval::new(0.0, 1.0).unwrap(), &settings()).unwrap();
        assert_eq!(v.status, Status::Converges);
        assert!((v.value.unwrap() - 1.0).abs() < 1e-12);
        // k = n/p: the integrand is identically one
        let v = classify_i(&h, 2, 1, int(2), Interval::unbounded(0.0), &settings()).unwrap();
        assert_eq!(v.status, Status::Diverges);
    }

    #[test]
    fn delta0_outside_interval_is_an_error() {
        let h = WarpingModel::constant(1.0, 0.0).unwrap();
        let r = classify_j(&h, 1, 0, int(2), Interval::unbounded(0.0), Some(-1.0), &settings());
        assert!(matches!(r, Err(Error::InvalidInterval(_))));
    }

    #[test]
    fn band_disagreement_is_unknown() {
        // alpha > 0, s1 != s2: J lower bound converges, upper diverges
        let band = WarpingShape::ExpBounded { c1: 1.0, s1: int(1), c2: 1.0, s2: int(2) };
        let h = WarpingModel::new(band, Interval::unbounded(0.0)).unwrap();
        let v = classify_j(&h, 2, 0, int(2), Interval::unbounded(0.0), None, &settings()).unwrap();
        assert_eq!(v.status, Status::Unknown);
        let v = classify_i(&h, 2, 0, int(2), Interval::unbounded(0.0), &settings()).unwrap();
        assert_eq!(v.status, Status::Diverges);
    }

    #[test]
    fn tail_examples() {
        let s = settings();
        let v = adaptive_tail_classification(|t| 1.0 / t, 1.0, &s).unwrap();
        assert_eq!(v.status, Status::Diverges);
        let v = adaptive_tail_classification(|t| 1.0 / (t * t), 1.0, &s).unwrap();
        assert_eq!(v.status, Status::Converges);
        assert!((v.value.unwrap() - 1.0).abs() < 1e-7, "{:?}", v);
        let v = adaptive_tail_classification(|t| 1.0 / (t * t.ln().powi(2)), std::f64::consts::E, &s).unwrap();
        assert_eq!(v.status, Status::Converges, "{:?}", v);
        assert!((v.value.unwrap() - 1.0).abs() < 1e-6, "{:?}", v);
    }

    #[test]
    fn negative_integrand_propagates() {
        let r = adaptive_tail_classification(|_| -1.0, 0.0, &settings());
        assert!(matches!(r, Err(Error::Evaluation { .. })));
    }
}
