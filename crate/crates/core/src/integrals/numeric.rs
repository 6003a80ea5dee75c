//! Log-domain quadrature and tail classification on doubling cutoffs.
//!
//! Integrands are handed over as logarithms so that exponential envelopes
//! can be evaluated far into the tail without overflow. Nested integrands of
//! the form `num(τ) / (P(τ) |ln P(τ)|^q)` with `P(τ) = P(τ0) + ∫_{τ0}^τ g`
//! are handled in a single march that carries `ln P` from node to node.

use crate::error::{Error, Result};

use super::{ClassifierSettings, Diagnostics, IntegralVerdict, Method, Partial};

pub(crate) type LnFn<'a> = Box<dyn Fn(f64) -> Result<f64> + 'a>;

/// Romberg levels tried per panel; level `j` uses `4·2^j` trapezoid steps.
const MAX_LEVEL: usize = 16;
const MIN_LEVEL: usize = 2;
/// Increment ratio above which the tail is not extrapolated.
const RATIO_MAX: f64 = 0.95;
/// Largest log-scale cutoff; keeps `e^u` finite.
const LOG_STAGE_LIMIT: f64 = 700.0;

pub(crate) struct Inner<'a> {
    pub ln_g: LnFn<'a>,
    /// Power `q` of `|ln P|` in the denominator, if any.
    pub log_power: Option<f64>,
}

pub(crate) struct Integrand<'a> {
    pub ln_outer: LnFn<'a>,
    pub inner: Option<Inner<'a>>,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Panel {
    pub value: f64,
    pub error: f64,
    /// `ln P` at the right end (nested integrands only).
    pub ln_inner: f64,
}

pub(crate) fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// `ln` of the mean of `e^l` over a unit step when `l` is linear from `l0`
/// to `l1`; exact for exponentials and symmetric in its arguments.
pub(crate) fn ln_segment(l0: f64, l1: f64) -> f64 {
    let (hi, lo) = if l0 >= l1 { (l0, l1) } else { (l1, l0) };
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    if lo == f64::NEG_INFINITY || hi == f64::INFINITY {
        return hi - std::f64::consts::LN_2;
    }
    let d = hi - lo;
    if d < 1e-8 {
        return hi - 0.5 * d;
    }
    hi + (-(-d).exp_m1() / d).ln()
}

fn check_ln(t: f64, v: f64) -> Result<f64> {
    if v.is_nan() {
        return Err(Error::Evaluation { t, reason: "integrand is NaN".into() });
    }
    Ok(v)
}

impl<'a> Integrand<'a> {
    pub fn plain(ln_outer: LnFn<'a>) -> Self {
        Integrand { ln_outer, inner: None }
    }

    pub fn nested(ln_outer: LnFn<'a>, ln_g: LnFn<'a>, log_power: Option<f64>) -> Self {
        Integrand { ln_outer, inner: Some(Inner { ln_g, log_power }) }
    }

    /// `ln` of the outer integrand at `t` given `ln P(t)`.
    fn ln_outer_value(&self, t: f64, ln_inner: f64) -> Result<f64> {
        let lo = check_ln(t, (self.ln_outer)(t)?)?;
        let v = match &self.inner {
            None => lo,
            Some(inner) => {
                let mut v = lo - ln_inner;
                if let Some(q) = inner.log_power {
                    v -= q * ln_inner.abs().ln();
                }
                v
            }
        };
        check_ln(t, v)
    }

    /// The same integral after the substitution `t = e^u`.
    pub fn log_scaled(&self) -> Integrand<'_> {
        Integrand {
            ln_outer: Box::new(move |u: f64| Ok((self.ln_outer)(u.exp())? + u)),
            inner: self.inner.as_ref().map(|i| Inner {
                ln_g: Box::new(move |u: f64| Ok((i.ln_g)(u.exp())? + u)),
                log_power: i.log_power,
            }),
        }
    }

    /// Composite log-linear trapezoid with `n` steps; nested integrands
    /// march `ln P` with the same rule.
    fn trapezoid(&self, x0: f64, x1: f64, n: usize, ln_inner0: f64) -> Result<(f64, f64)> {
        let h = (x1 - x0) / n as f64;
        let ln_h = h.ln();
        let node = |i: usize| if i == n { x1 } else { x0 + i as f64 * h };
        let mut ln_p = ln_inner0;
        let mut prev_g = match &self.inner {
            Some(inner) => check_ln(x0, (inner.ln_g)(x0)?)?,
            None => f64::NAN,
        };
        let mut prev = self.ln_outer_value(x0, ln_p)?;
        let mut sum = 0.0;
        for i in 1..=n {
            let x = node(i);
            if let Some(inner) = &self.inner {
                let g = check_ln(x, (inner.ln_g)(x)?)?;
                ln_p = log_add_exp(ln_p, ln_h + ln_segment(prev_g, g));
                prev_g = g;
            }
            let cur = self.ln_outer_value(x, ln_p)?;
            sum += (ln_h + ln_segment(prev, cur)).exp();
            prev = cur;
        }
        Ok((sum, if self.inner.is_some() { ln_p } else { f64::NAN }))
    }

    /// Romberg integration of one panel to relative tolerance `rel_tol`.
    pub fn panel(&self, x0: f64, x1: f64, ln_inner0: f64, rel_tol: f64) -> Result<Panel> {
        let nested = self.inner.is_some();
        let mut prev_outer: Vec<f64> = Vec::new();
        let mut prev_inner: Vec<f64> = Vec::new();
        let mut best = Panel { value: f64::NAN, error: f64::INFINITY, ln_inner: f64::NAN };
        for level in 0..=MAX_LEVEL {
            let (o, l) = self.trapezoid(x0, x1, 4 << level, ln_inner0)?;
            if !o.is_finite() {
                return Ok(Panel { value: o, error: 0.0, ln_inner: l });
            }
            let outer = richardson_row(&prev_outer, o);
            let inner = if nested { richardson_row(&prev_inner, l) } else { Vec::new() };
            let value = *outer.last().unwrap();
            let ln_inner = inner.last().copied().unwrap_or(f64::NAN);
            if level > 0 {
                let error = (value - prev_outer.last().unwrap()).abs();
                let inner_err = if nested {
                    (ln_inner - prev_inner.last().unwrap()).abs()
                } else {
                    0.0
                };
                best = Panel { value, error, ln_inner };
                let outer_ok = error <= rel_tol * value.abs() || (error == 0.0);
                let inner_ok = inner_err <= rel_tol * ln_inner.abs().max(1.0);
                if level >= MIN_LEVEL && outer_ok && inner_ok {
                    return Ok(best);
                }
            }
            prev_outer = outer;
            prev_inner = inner;
        }
        Ok(best)
    }

    /// Integrates over consecutive break points.
    pub fn integrate(&self, breaks: &[f64], ln_inner0: f64, rel_tol: f64) -> Result<Panel> {
        let mut total = Panel { value: 0.0, error: 0.0, ln_inner: ln_inner0 };
        for w in breaks.windows(2) {
            let p = self.panel(w[0], w[1], total.ln_inner, rel_tol)?;
            total.value += p.value;
            total.error += p.error;
            total.ln_inner = p.ln_inner;
        }
        Ok(total)
    }
}

fn richardson_row(prev: &[f64], t: f64) -> Vec<f64> {
    let mut row = Vec::with_capacity(prev.len() + 1);
    row.push(t);
    let mut factor = 1.0;
    for (m, p) in prev.iter().enumerate() {
        factor *= 4.0;
        let last = row[m];
        row.push(last + (last - p) / (factor - 1.0));
    }
    row
}

/// Break points splitting `[start, end]` at `nodes` and into pieces of at
/// most `piece` length (capped at 256 pieces per segment).
pub(crate) fn breakpoints(start: f64, end: f64, nodes: &[f64], piece: f64) -> Vec<f64> {
    let mut cuts: Vec<f64> = vec![start];
    cuts.extend(nodes.iter().copied().filter(|&t| t > start && t < end));
    cuts.push(end);
    let mut out = vec![start];
    for w in cuts.windows(2) {
        let pieces = ((w[1] - w[0]) / piece).ceil().clamp(1.0, 256.0) as usize;
        for i in 1..=pieces {
            out.push(if i == pieces { w[1] } else { w[0] + (w[1] - w[0]) * i as f64 / pieces as f64 });
        }
    }
    out
}

struct History {
    cutoffs: Vec<f64>,
    partials: Vec<f64>,
    increments: Vec<f64>,
    quad_error: f64,
}

enum Decision {
    Diverges(String),
    Converges { value: f64, error: f64, note: String },
    Open(String),
}

impl History {
    fn new() -> Self {
        History { cutoffs: Vec::new(), partials: Vec::new(), increments: Vec::new(), quad_error: 0.0 }
    }

    fn push(&mut self, cutoff: f64, panel: &Panel) {
        let prev = self.partials.last().copied().unwrap_or(0.0);
        self.cutoffs.push(cutoff);
        self.partials.push(prev + panel.value);
        self.increments.push(panel.value);
        self.quad_error += panel.error;
    }

    fn last(&self) -> f64 {
        *self.partials.last().unwrap()
    }

    fn tail<'s>(&'s self, v: &'s [f64], len: usize) -> Option<&'s [f64]> {
        (v.len() >= len).then(|| &v[v.len() - len..])
    }

    /// Slopes of `log2(partial)` per doubling over the last four steps.
    fn sustained_growth(&self, ceiling: f64) -> bool {
        if self.last() <= ceiling {
            return false;
        }
        match self.tail(&self.partials, 5) {
            Some(w) => w.windows(2).all(|p| p[0] > 0.0 && (p[1] / p[0]).log2() >= 0.5),
            None => false,
        }
    }

    /// Least-squares slope of `ln partial` against `ln cutoff` over the last
    /// four cutoffs.
    fn growth_exponent(&self, origin: f64) -> Option<f64> {
        let n = self.partials.len();
        if n < 4 {
            return None;
        }
        let pts: Vec<(f64, f64)> = (n - 4..n)
            .filter(|&i| self.partials[i] > 0.0 && self.cutoffs[i] > origin)
            .map(|i| ((self.cutoffs[i] - origin).ln(), self.partials[i].ln()))
            .collect();
        if pts.len() < 2 {
            return None;
        }
        let m = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        (sxx > 0.0).then(|| sxy / sxx)
    }

    fn decide(&self, eps: f64) -> Decision {
        let p = self.last();
        let d = &self.increments;
        let Some(last2) = self.tail(d, 2) else {
            return Decision::Open("too few cutoffs".into());
        };
        if last2.iter().all(|&x| x <= eps * p.abs()) {
            let rho = if last2[0] > 0.0 { last2[1] / last2[0] } else { 0.0 };
            let tail = if rho > 0.0 && rho <= RATIO_MAX { last2[1] * rho / (1.0 - rho) } else { 0.0 };
            return Decision::Converges {
                value: p + tail,
                error: tail + last2[1] + self.quad_error,
                note: "tail increments fell below the tolerance".into(),
            };
        }
        if let Some(last4) = self.tail(d, 4) {
            let non_decreasing = last4.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-6));
            if non_decreasing && last4[3] > eps * p.abs() {
                return Decision::Diverges("tail increments stopped decreasing".into());
            }
            // Aitken extrapolation over the last three increment ratios.
            let n = d.len();
            let rhos: Vec<f64> = (n - 3..n).map(|j| d[j] / d[j - 1]).collect();
            if rhos.iter().all(|&r| r > 0.0 && r <= RATIO_MAX) {
                let extrap: Vec<f64> = (n - 3..n)
                    .zip(&rhos)
                    .map(|(j, r)| self.partials[j] + d[j] * r / (1.0 - r))
                    .collect();
                let hi = extrap.iter().copied().fold(f64::MIN, f64::max);
                let lo = extrap.iter().copied().fold(f64::MAX, f64::min);
                let value = extrap[2];
                if hi - lo <= eps * value.abs() {
                    return Decision::Converges {
                        value,
                        error: (hi - lo) + self.quad_error,
                        note: "geometric tail extrapolated".into(),
                    };
                }
            }
            let rho = last4[3] / last4[2];
            return Decision::Open(format!(
                "tail increments neither settle nor grow (last increment {:.3e}, ratio {:.4})",
                last4[3], rho
            ));
        }
        Decision::Open("too few cutoffs".into())
    }

    fn diagnostics(&self, origin: f64, method: Method) -> Diagnostics {
        Diagnostics {
            method,
            partials: self
                .cutoffs
                .iter()
                .zip(&self.partials)
                .map(|(&cutoff, &value)| Partial { cutoff, value })
                .collect(),
            growth_exponent: self.growth_exponent(origin),
            ..Diagnostics::new(method)
        }
    }
}

/// Classifies `∫_start^∞` of `integrand` on doubling cutoffs, falling back to
/// the log scale `u = ln t` when the increments decay too slowly.
pub(crate) fn classify_tail(
    integrand: &Integrand<'_>,
    start: f64,
    ln_inner0: f64,
    settings: &ClassifierSettings,
) -> Result<IntegralVerdict> {
    let tol = settings.panel_rel_tol;
    let eps = settings.epsilon_tail;
    let mut hist = History::new();
    let mut prev = start;
    let mut ln_inner = ln_inner0;
    let mut early: Option<Decision> = None;
    for i in 0..=settings.max_doublings {
        let cutoff = start + settings.initial_length * 2f64.powi(i as i32);
        let panel = integrand.panel(prev, cutoff, ln_inner, tol)?;
        hist.push(cutoff, &panel);
        (prev, ln_inner) = (cutoff, panel.ln_inner);
        let p = hist.last();
        if p == f64::INFINITY {
            early = Some(Decision::Diverges(format!("partial integral overflowed by t = {cutoff:.6e}")));
            break;
        }
        if hist.sustained_growth(settings.ceiling) {
            early = Some(Decision::Diverges(format!(
                "partial integral exceeded the ceiling {:.1e} with sustained growth",
                settings.ceiling
            )));
            break;
        }
        if let Some(w) = hist.tail(&hist.increments, 4) {
            if w.iter().all(|&d| d <= 1e-3 * eps * p.abs()) {
                break;
            }
        }
    }
    let decision = match early {
        Some(d) => d,
        None => hist.decide(eps),
    };
    let mut diag = hist.diagnostics(start, Method::TailDoubling);
    match decision {
        Decision::Diverges(note) => {
            diag.notes.push(note);
            return Ok(IntegralVerdict::diverges(diag));
        }
        Decision::Converges { value, error, note } => {
            diag.notes.push(note);
            return Ok(IntegralVerdict::converges(value, error, diag));
        }
        Decision::Open(note) => diag.notes.push(note),
    }

    // Second stage on the log scale, only for slowly decaying increments.
    let stage1_last = prev;
    if stage1_last <= 1.0 || hist.last() <= 0.0 {
        return Ok(IntegralVerdict::unknown(diag));
    }
    let scaled = integrand.log_scaled();
    let mut u_prev = stage1_last.ln();
    let mut stage2 = History::new();
    // Seed with the stage-one total so ratios and Aitken values carry over.
    stage2.partials.push(hist.last());
    stage2.increments.push(*hist.increments.last().unwrap());
    stage2.cutoffs.push(stage1_last);
    stage2.quad_error = hist.quad_error;
    let mut result: Option<Decision> = None;
    loop {
        let u = 2.0 * u_prev;
        if u > LOG_STAGE_LIMIT {
            break;
        }
        let panel = scaled.panel(u_prev, u, ln_inner, tol)?;
        stage2.push(u.exp(), &panel);
        (u_prev, ln_inner) = (u, panel.ln_inner);
        if stage2.last() == f64::INFINITY {
            result = Some(Decision::Diverges("partial integral overflowed on the log scale".into()));
            break;
        }
    }
    let decision = match result {
        Some(d) => d,
        None => {
            // Seeded entry is not an increment of the log-scale sequence.
            let mut fresh = History::new();
            fresh.quad_error = stage2.quad_error;
            fresh.cutoffs = stage2.cutoffs[1..].to_vec();
            fresh.partials = stage2.partials[1..].to_vec();
            fresh.increments = stage2.increments[1..].to_vec();
            if fresh.partials.is_empty() {
                Decision::Open("log-scale stage had no room".into())
            } else {
                fresh.decide(eps)
            }
        }
    };
    for (c, v) in stage2.cutoffs.iter().zip(&stage2.partials).skip(1) {
        diag.partials.push(Partial { cutoff: *c, value: *v });
    }
    match decision {
        Decision::Diverges(note) => {
            diag.notes.push(format!("log scale: {note}"));
            Ok(IntegralVerdict::diverges(diag))
        }
        Decision::Converges { value, error, note } => {
            diag.notes.push(format!("log scale: {note}"));
            Ok(IntegralVerdict::converges(value, error, diag))
        }
        Decision::Open(note) => {
            diag.notes.push(format!("log scale: {note}"));
            Ok(IntegralVerdict::unknown(diag))
        }
    }
}
