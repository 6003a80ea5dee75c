//! Decision engine: maps a cohomology query to a verdict with a trace of
//! every hypothesis that was checked.
//!
//! All criteria are sufficient conditions. The engine never reports
//! non-vanishing; a query that no criterion settles is `Inconclusive`.

pub mod regimes;

use std::fmt;

use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::integrals::{self, ClassifierSettings, IntegralKind, IntegralVerdict, Status};
use crate::rational::{self, Rational};
use crate::warping::{Interval, WarpingModel, WarpingShape};
use regimes::{Family, RegimeRule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Flavor {
    #[default]
    Absolute,
    RelativeToBase,
    Interior,
}

impl fmt::Display for Flavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Flavor::Absolute => "absolute",
            Flavor::RelativeToBase => "relative-to-base",
            Flavor::Interior => "interior",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Context {
    /// `[a, b) ×_h N`
    PureCylinder(WarpingModel),
    /// A manifold `M` whose complement of a compact piece `X` is
    /// bi-Lipschitz to `[a, b) ×_h ∂X`. `betti[j] = dim H^j(X)` for
    /// `j = 0..=n`; `H^{n+1}(X)` vanishes since `∂X` is nonempty.
    AsymptoticCylinder { model: WarpingModel, betti: Option<Vec<u64>>, complete: bool },
    /// Cartan–Hadamard manifold of dimension `m` with `K <= -1` and
    /// `Ric >= -(1 + ε)^2 (m - 1)`.
    CartanHadamard { m: u32 },
}

impl Context {
    fn model(&self) -> Option<&WarpingModel> {
        match self {
            Context::PureCylinder(m) | Context::AsymptoticCylinder { model: m, .. } => Some(m),
            Context::CartanHadamard { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CohomologyQuery {
    /// Dimension of the cross-section `N` (or `∂X`).
    pub n: u32,
    pub k: u32,
    pub p: Rational,
    pub q: Rational,
    pub interval: Interval,
    pub flavor: Flavor,
    pub context: Context,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Vanishes,
    Inconclusive,
    Unsupported,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CriterionId {
    Preconditions,
    ExpRegime,
    PowerRegime,
    MiddleDimension,
    AbsoluteIntegral,
    RelativeMiddle,
    RelativeIntegral,
    AsymptoticRelative,
    AsymptoticMiddle,
    AsymptoticAbsolute,
    CompleteDual,
    InteriorDual,
    CartanHadamard,
    CartanHadamardDual,
}

impl CriterionId {
    /// The implication the criterion rests on.
    pub fn statement(&self) -> &'static str {
        match self {
            CriterionId::Preconditions => "p, q > 1; p >= q for absolute and relative, q >= p for interior; |1/p - 1/q| within 1/(n+1)",
            CriterionId::ExpRegime => "C1 e^{s1 t} <= h <= C2 e^{s2 t}, a >= 0, b = ∞: absolute vanishing for k = n/p or (s1 = s2, k < n/p); relative vanishing for k = n/p + 1 or (s1 = s2 = s > 0, k > n/p + 1 + 1/(p p' s))",
            CriterionId::PowerRegime => "C1 t^{s1} <= h <= C2 t^{s2}, a >= 1, b = ∞: absolute vanishing for k = n/p, (s1 = s2, k < n/p) or (s1 = s2 > 0, n/p < k <= n/p + 1/(p s1)); relative vanishing for k = n/p + 1 or (s1 = s2 > 0, n/p + 1 - 1/(p' s1) <= k <= n/p + 1)",
            CriterionId::MiddleDimension => "p >= q > 1, b = ∞, k = n/p ∈ ℤ  ⟹  H̄^k_{q,p}([a,∞) ×_h N) = 0 for every h",
            CriterionId::AbsoluteIntegral => "p >= q > 1, I = ∞, J = ∞  ⟹  H̄^k_{q,p}([a,b) ×_h N) = 0",
            CriterionId::RelativeMiddle => "p >= q > 1, b = ∞, k = n/p + 1, n/p ∈ ℤ  ⟹  H̄^k_{q,p}([a,∞) ×_h N, N_a) = 0 for every h",
            CriterionId::RelativeIntegral => "p >= q > 1, Ĩ = ∞, A < ∞  ⟹  H̄^k_{q,p}([a,b) ×_h N, N_a) = 0",
            CriterionId::AsymptoticRelative => "p >= q > 1, Ĩ = ∞, A < ∞ on the end  ⟹  H̄^k_{q,p}(M, X) = 0",
            CriterionId::AsymptoticMiddle => "p >= q > 1, b = ∞, k = n/p + 1, n/p ∈ ℤ, H^{k-1}(X) = H^k(X) = 0  ⟹  H̄^k_{q,p}(M) = 0",
            CriterionId::AsymptoticAbsolute => "p >= q > 1, H^k(X) = 0, Ĩ = ∞, A < ∞ on the end  ⟹  H̄^k_{q,p}(M) = 0",
            CriterionId::CompleteDual => "M complete, r > 1, b = ∞, n/r ∈ ℤ, H^{n/r}(X) = H^{n/r+1}(X) = 0  ⟹  H̄_r^{n/r+1}(M) = H̄_{r'}^{n/r'}(M) = 0",
            CriterionId::InteriorDual => "q >= p > 1, b = ∞, k = n/p ∈ ℤ, H^{k-1}(X) = H^k(X) = 0  ⟹  H̄^k_{p,q;0}(M) = 0",
            CriterionId::CartanHadamard => "p >= q > 1, (m-1)/p ∈ ℤ  ⟹  H̄^{(m-1)/p+1}_{q,p}(M) = 0",
            CriterionId::CartanHadamardDual => "p > 1, (m-1)/p ∈ ℤ  ⟹  H̄_{p'}^{(m-1)/p'}(M) = 0",
        }
    }
}

impl fmt::Display for CriterionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).ok().and_then(|v| v.as_str().map(str::to_owned));
        f.write_str(s.as_deref().unwrap_or("?"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConditionStatus {
    Satisfied,
    Failed,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Evidence {
    Flag { value: bool },
    Integral { integral: IntegralKind, verdict: Box<IntegralVerdict> },
    Note { text: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub criterion: CriterionId,
    pub condition: String,
    pub status: ConditionStatus,
    pub evidence: Evidence,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub outcome: Outcome,
    /// The criterion that settled the query (`Vanishes` only).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub criterion: Option<CriterionId>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub statement: Option<String>,
    pub trace: Vec<TraceEntry>,
}

impl Verdict {
    fn unsupported(reason: String) -> Self {
        Verdict {
            outcome: Outcome::Unsupported,
            criterion: None,
            statement: None,
            trace: vec![TraceEntry {
                criterion: CriterionId::Preconditions,
                condition: "query is within the supported range".into(),
                status: ConditionStatus::Failed,
                evidence: Evidence::Note { text: reason },
            }],
        }
    }

    pub fn vanishes(&self) -> bool {
        self.outcome == Outcome::Vanishes
    }
}

/// Accumulates trace entries; the first criterion with all hypotheses
/// satisfied settles the query.
#[derive(Default)]
struct Engine {
    trace: Vec<TraceEntry>,
    settled: Option<CriterionId>,
}

struct Attempt<'e> {
    engine: &'e mut Engine,
    id: CriterionId,
    ok: bool,
}

impl Engine {
    fn attempt(&mut self, id: CriterionId) -> Attempt<'_> {
        Attempt { engine: self, id, ok: true }
    }

    fn done(&self) -> bool {
        self.settled.is_some()
    }

    fn finish(self) -> Verdict {
        match self.settled {
            Some(id) => Verdict {
                outcome: Outcome::Vanishes,
                criterion: Some(id),
                statement: Some(id.statement().to_string()),
                trace: self.trace,
            },
            None => Verdict { outcome: Outcome::Inconclusive, criterion: None, statement: None, trace: self.trace },
        }
    }
}

impl Attempt<'_> {
    fn push(&mut self, condition: String, status: ConditionStatus, evidence: Evidence) {
        if status != ConditionStatus::Satisfied {
            self.ok = false;
        }
        self.engine.trace.push(TraceEntry { criterion: self.id, condition, status, evidence });
    }

    fn flag(&mut self, condition: impl Into<String>, value: bool) -> &mut Self {
        let status = if value { ConditionStatus::Satisfied } else { ConditionStatus::Failed };
        self.push(condition.into(), status, Evidence::Flag { value });
        self
    }

    fn note(&mut self, condition: impl Into<String>, text: impl Into<String>) -> &mut Self {
        self.push(condition.into(), ConditionStatus::Satisfied, Evidence::Note { text: text.into() });
        self
    }

    fn integral(
        &mut self,
        kind: IntegralKind,
        want: Status,
        result: crate::Result<IntegralVerdict>,
    ) -> &mut Self {
        let condition = match want {
            Status::Diverges => format!("{kind} = ∞"),
            _ => format!("{kind} < ∞"),
        };
        match result {
            Ok(v) => {
                let status = if v.status == want {
                    ConditionStatus::Satisfied
                } else if v.status == Status::Unknown {
                    ConditionStatus::Unknown
                } else {
                    ConditionStatus::Failed
                };
                self.push(condition, status, Evidence::Integral { integral: kind, verdict: Box::new(v) });
            }
            Err(e) => {
                self.push(condition, ConditionStatus::Unknown, Evidence::Note { text: e.to_string() });
            }
        }
        self
    }

    /// Records the outcome; returns true when the criterion settled the query.
    fn conclude(&mut self) -> bool {
        if self.ok && self.engine.settled.is_none() {
            self.engine.settled = Some(self.id);
        }
        self.ok
    }
}

fn n_over(n: u32, p: Rational) -> Rational {
    rational::int(n as i64) / p
}

fn int_value(r: Rational) -> Option<u32> {
    (r.is_integer() && *r.numer() >= 0).then(|| *r.numer() as u32)
}

fn betti_at(betti: &[u64], j: Option<u32>) -> Option<u64> {
    let j = j? as usize;
    Some(betti.get(j).copied().unwrap_or(0))
}

fn fmt_r(r: Rational) -> String {
    rational::format(r)
}

/// Validates exponent ordering, the standing Hölder-gap assumption, degree
/// range and context/flavor compatibility.
pub fn check_preconditions(q: &CohomologyQuery) -> Result<(), String> {
    let one = Rational::one();
    if q.p <= one || q.q <= one {
        return Err(format!("need p, q > 1, got p = {}, q = {}", fmt_r(q.p), fmt_r(q.q)));
    }
    if q.n == 0 {
        return Err("n must be at least 1".into());
    }
    if q.k > q.n + 1 {
        return Err(format!("degree k = {} exceeds n + 1 = {}", q.k, q.n + 1));
    }
    let gap_limit = one / rational::int(q.n as i64 + 1);
    match q.flavor {
        Flavor::Absolute | Flavor::RelativeToBase => {
            if q.p < q.q {
                return Err(format!(
                    "{} cohomology is only treated for p >= q, got p = {}, q = {}",
                    q.flavor,
                    fmt_r(q.p),
                    fmt_r(q.q)
                ));
            }
            if one / q.p - one / q.q > gap_limit {
                return Err("1/p - 1/q exceeds 1/(n+1)".into());
            }
        }
        Flavor::Interior => {
            if q.q < q.p {
                return Err(format!(
                    "interior cohomology needs q >= p, got p = {}, q = {}",
                    fmt_r(q.p),
                    fmt_r(q.q)
                ));
            }
            // The form slot carries q and the primitive slot p.
            if one / q.q - one / q.p > gap_limit {
                return Err("1/q - 1/p exceeds 1/(n+1)".into());
            }
        }
    }
    if q.flavor == Flavor::RelativeToBase && q.k == 0 {
        return Err("relative criteria need k >= 1".into());
    }
    match &q.context {
        Context::PureCylinder(_) => {
            if q.flavor == Flavor::Interior {
                return Err("interior cohomology is only treated for asymptotic cylinders".into());
            }
        }
        Context::AsymptoticCylinder { betti, .. } => {
            if let Some(b) = betti {
                if b.len() != q.n as usize + 1 {
                    return Err(format!("betti list must have n + 1 = {} entries, got {}", q.n + 1, b.len()));
                }
            } else if q.flavor != Flavor::RelativeToBase {
                return Err(format!("{} queries on asymptotic cylinders need betti numbers of X", q.flavor));
            }
        }
        Context::CartanHadamard { m } => {
            if *m < 2 {
                return Err(format!("Cartan-Hadamard dimension must be at least 2, got {m}"));
            }
            if q.n + 1 != *m {
                return Err(format!("n must equal m - 1 = {}, got {}", m - 1, q.n));
            }
            if q.flavor != Flavor::Absolute {
                return Err("Cartan-Hadamard preset covers absolute cohomology only".into());
            }
        }
    }
    if let Some(model) = q.context.model() {
        let iv = q.interval;
        if !(iv.start.is_finite() && iv.end > iv.start) {
            return Err(format!("invalid interval [{}, {})", iv.start, iv.end));
        }
        let d = model.domain();
        let grid_tail = model.is_grid() && iv.is_unbounded();
        if iv.start < d.start || (!grid_tail && iv.end > d.end) {
            return Err(format!(
                "interval [{}, {}) is not inside the model domain [{}, {})",
                iv.start, iv.end, d.start, d.end
            ));
        }
    }
    Ok(())
}

fn precheck(q: &CohomologyQuery) -> Option<Verdict> {
    check_preconditions(q).err().map(Verdict::unsupported)
}

fn middle_dimension(e: &mut Engine, q: &CohomologyQuery) {
    let n_p = n_over(q.n, q.p);
    let mut a = e.attempt(CriterionId::MiddleDimension);
    a.flag("b = ∞", q.interval.is_unbounded());
    a.flag(format!("k = n/p = {}", fmt_r(n_p)), rational::int(q.k as i64) == n_p);
    a.conclude();
}

fn absolute_integrals(e: &mut Engine, q: &CohomologyQuery, h: &WarpingModel, s: &ClassifierSettings) {
    let mut a = e.attempt(CriterionId::AbsoluteIntegral);
    a.integral(IntegralKind::I, Status::Diverges, integrals::classify_i(h, q.n, q.k, q.p, q.interval, s));
    a.integral(IntegralKind::J, Status::Diverges, integrals::classify_j(h, q.n, q.k, q.p, q.interval, None, s));
    a.conclude();
}

fn relative_middle(e: &mut Engine, q: &CohomologyQuery) {
    let n_p = n_over(q.n, q.p);
    let mut a = e.attempt(CriterionId::RelativeMiddle);
    a.flag("b = ∞", q.interval.is_unbounded());
    a.flag(format!("n/p = {} is an integer", fmt_r(n_p)), n_p.is_integer());
    a.flag(format!("k = n/p + 1 = {}", fmt_r(n_p + Rational::one())), rational::int(q.k as i64) == n_p + Rational::one());
    a.conclude();
}

fn relative_integrals(
    e: &mut Engine,
    id: CriterionId,
    q: &CohomologyQuery,
    h: &WarpingModel,
    s: &ClassifierSettings,
    extra: impl FnOnce(&mut Attempt<'_>),
) {
    let mut a = e.attempt(id);
    extra(&mut a);
    a.integral(IntegralKind::ITilde, Status::Diverges, integrals::classify_i_tilde(h, q.n, q.k, q.p, q.interval, s));
    a.integral(IntegralKind::A, Status::Converges, integrals::classify_a(h, q.n, q.k, q.p, q.interval, None, s));
    a.conclude();
}

/// Regime table for bounded families on `[a, ∞)`; no-op for other models.
fn regime(e: &mut Engine, q: &CohomologyQuery, h: &WarpingModel) {
    let (family, s1, s2) = match h.shape() {
        WarpingShape::ExpBounded { s1, s2, .. } => (Family::Exp, *s1, *s2),
        WarpingShape::PowerBounded { s1, s2, .. } => (Family::Power, *s1, *s2),
        _ => return,
    };
    if !q.interval.is_unbounded() || q.interval.start < regimes::min_start(family) {
        return;
    }
    let v = table_verdict(family, q.n, q.k, q.p, s1, s2, q.flavor);
    e.trace.extend(v.trace);
    if v.outcome == Outcome::Vanishes && e.settled.is_none() {
        e.settled = v.criterion;
    }
}

fn table_verdict(
    family: Family,
    n: u32,
    k: u32,
    p: Rational,
    s1: Rational,
    s2: Rational,
    flavor: Flavor,
) -> Verdict {
    let id = match family {
        Family::Exp => CriterionId::ExpRegime,
        Family::Power => CriterionId::PowerRegime,
    };
    let mut e = Engine::default();
    let rules = RegimeRule::candidates(family, flavor);
    if rules.is_empty() {
        let mut a = e.attempt(id);
        a.flag(format!("{flavor} cohomology is covered by the {family} table"), false);
    }
    for rule in rules {
        let mut a = e.attempt(id);
        a.flag(format!("{rule}: {}", rule.condition()), rule.holds(n, k, p, s1, s2));
        if a.conclude() {
            break;
        }
    }
    if family == Family::Exp && flavor == Flavor::RelativeToBase {
        // The relative exp bound involves a single rate s; it is read as s = s1 = s2.
        e.trace.push(TraceEntry {
            criterion: id,
            condition: "rate s in the relative bound".into(),
            status: ConditionStatus::Satisfied,
            evidence: Evidence::Note { text: "s is taken as the common value s1 = s2".into() },
        });
    }
    e.finish()
}

/// Absolute cohomology of a pure cylinder.
pub fn decide_absolute(q: &CohomologyQuery, settings: &ClassifierSettings) -> Verdict {
    if let Some(v) = precheck(q) {
        return v;
    }
    let Context::PureCylinder(h) = &q.context else {
        return Verdict::unsupported("decide_absolute needs a pure cylinder".into());
    };
    let mut e = Engine::default();
    middle_dimension(&mut e, q);
    if !e.done() {
        absolute_integrals(&mut e, q, h, settings);
    }
    e.finish()
}

/// Cohomology of a pure cylinder relative to the slice `N_a`.
pub fn decide_relative(q: &CohomologyQuery, settings: &ClassifierSettings) -> Verdict {
    if let Some(v) = precheck(q) {
        return v;
    }
    let Context::PureCylinder(h) = &q.context else {
        return Verdict::unsupported("decide_relative needs a pure cylinder".into());
    };
    let mut e = Engine::default();
    relative_middle(&mut e, q);
    if !e.done() {
        relative_integrals(&mut e, CriterionId::RelativeIntegral, q, h, settings, |_| {});
    }
    e.finish()
}

/// `H̄(M, X)` for an asymptotic cylinder.
pub fn decide_asymptotic_relative(q: &CohomologyQuery, settings: &ClassifierSettings) -> Verdict {
    if let Some(v) = precheck(q) {
        return v;
    }
    let Context::AsymptoticCylinder { model, .. } = &q.context else {
        return Verdict::unsupported("decide_asymptotic_relative needs an asymptotic cylinder".into());
    };
    let mut e = Engine::default();
    relative_integrals(&mut e, CriterionId::AsymptoticRelative, q, model, settings, |_| {});
    e.finish()
}

fn asymptotic_middle(e: &mut Engine, q: &CohomologyQuery, betti: &[u64]) {
    let n_p = n_over(q.n, q.p);
    let mut a = e.attempt(CriterionId::AsymptoticMiddle);
    a.flag("b = ∞", q.interval.is_unbounded());
    a.flag(format!("n/p = {} is an integer", fmt_r(n_p)), n_p.is_integer());
    let target = n_p + Rational::one();
    a.flag(format!("k = n/p + 1 = {}", fmt_r(target)), rational::int(q.k as i64) == target);
    let j = int_value(n_p);
    a.flag(format!("H^{}(X) = 0", fmt_r(n_p)), betti_at(betti, j) == Some(0));
    a.flag(format!("H^{}(X) = 0", fmt_r(target)), betti_at(betti, j.map(|j| j + 1)) == Some(0));
    a.conclude();
}

/// Complete `M`, `p = q = e`: degrees `n/e + 1` (with `r = e`) and `n/e`
/// (with `r = e'`).
fn complete_dual(e: &mut Engine, q: &CohomologyQuery, betti: &[u64]) -> crate::Result<()> {
    let exp = q.p;
    let conj = rational::conjugate(exp)?;
    for (r, degree) in [(exp, n_over(q.n, exp) + Rational::one()), (conj, n_over(q.n, exp))] {
        if rational::int(q.k as i64) != degree {
            continue;
        }
        let n_r = n_over(q.n, r);
        let mut a = e.attempt(CriterionId::CompleteDual);
        a.flag("M is complete", true);
        a.flag("p = q", q.p == q.q);
        a.flag("b = ∞", q.interval.is_unbounded());
        a.note("exponent pair", format!("r = {}, r' = {}", fmt_r(r), fmt_r(rational::conjugate(r)?)));
        a.flag(format!("n/r = {} is an integer", fmt_r(n_r)), n_r.is_integer());
        let j = int_value(n_r);
        a.flag(format!("H^{}(X) = 0", fmt_r(n_r)), betti_at(betti, j) == Some(0));
        a.flag(format!("H^{}(X) = 0", fmt_r(n_r + Rational::one())), betti_at(betti, j.map(|j| j + 1)) == Some(0));
        if a.conclude() {
            break;
        }
    }
    Ok(())
}

/// `H̄(M)` for an asymptotic cylinder with known Betti numbers of `X`.
pub fn decide_asymptotic_absolute(q: &CohomologyQuery, settings: &ClassifierSettings) -> Verdict {
    if let Some(v) = precheck(q) {
        return v;
    }
    let Context::AsymptoticCylinder { model, betti, complete } = &q.context else {
        return Verdict::unsupported("decide_asymptotic_absolute needs an asymptotic cylinder".into());
    };
    let Some(betti) = betti else {
        return Verdict::unsupported("betti numbers of X are required".into());
    };
    let mut e = Engine::default();
    asymptotic_middle(&mut e, q, betti);
    if !e.done() && *complete && q.p == q.q {
        if let Err(err) = complete_dual(&mut e, q, betti) {
            return Verdict::unsupported(err.to_string());
        }
    }
    if !e.done() {
        let k = Some(q.k);
        relative_integrals(&mut e, CriterionId::AsymptoticAbsolute, q, model, settings, |a| {
            a.flag(format!("H^{}(X) = 0", q.k), betti_at(betti, k) == Some(0));
        });
    }
    e.finish()
}

/// Interior (compactly supported) cohomology `H̄_{p,q;0}` with `q >= p`.
pub fn decide_interior(q: &CohomologyQuery, _settings: &ClassifierSettings) -> Verdict {
    if let Some(v) = precheck(q) {
        return v;
    }
    let Context::AsymptoticCylinder { betti, complete, .. } = &q.context else {
        return Verdict::unsupported("interior cohomology needs an asymptotic cylinder".into());
    };
    let Some(betti) = betti else {
        return Verdict::unsupported("betti numbers of X are required".into());
    };
    let (Ok(p_conj), Ok(q_conj)) = (rational::conjugate(q.p), rational::conjugate(q.q)) else {
        return Verdict::unsupported("conjugate exponents undefined".into());
    };
    let n_p = n_over(q.n, q.p);
    let mut e = Engine::default();
    {
        let mut a = e.attempt(CriterionId::InteriorDual);
        a.note(
            "dual exponent pair",
            format!("p' = {}, q' = {}, with p' >= q' > 1", fmt_r(p_conj), fmt_r(q_conj)),
        );
        a.flag("b = ∞", q.interval.is_unbounded());
        a.flag(format!("n/p = {} is an integer", fmt_r(n_p)), n_p.is_integer());
        a.flag(format!("k = n/p = {}", fmt_r(n_p)), rational::int(q.k as i64) == n_p);
        let j = int_value(n_p);
        let below = j.and_then(|j| j.checked_sub(1));
        a.flag(format!("H^{}(X) = 0", fmt_r(n_p - Rational::one())), betti_at(betti, below) == Some(0));
        a.flag(format!("H^{}(X) = 0", fmt_r(n_p)), betti_at(betti, j) == Some(0));
        a.conclude();
    }
    if !e.done() && *complete && q.p == q.q {
        if let Err(err) = complete_dual(&mut e, q, betti) {
            return Verdict::unsupported(err.to_string());
        }
    }
    e.finish()
}

/// Cartan–Hadamard manifolds of dimension `m`, degree `k`.
pub fn decide_cartan_hadamard(m: u32, p: Rational, q: Rational, k: u32) -> Verdict {
    let query = cartan_hadamard_query(m, p, q, k);
    if let Some(v) = precheck(&query) {
        return v;
    }
    let d = n_over(m - 1, p);
    let mut e = Engine::default();
    {
        let mut a = e.attempt(CriterionId::CartanHadamard);
        a.flag(format!("(m-1)/p = {} is an integer", fmt_r(d)), d.is_integer());
        a.flag(format!("k = (m-1)/p + 1 = {}", fmt_r(d + Rational::one())), rational::int(k as i64) == d + Rational::one());
        a.conclude();
    }
    if !e.done() && p == q {
        let mut a = e.attempt(CriterionId::CartanHadamardDual);
        a.flag("p = q", true);
        let p_conj = rational::conjugate(p).expect("p > 1 checked");
        let d_conj = n_over(m - 1, p_conj);
        a.note("exponent pair", format!("applied with r = {}, r' = {}", fmt_r(p_conj), fmt_r(p)));
        a.flag(format!("(m-1)/r = {} is an integer", fmt_r(d_conj)), d_conj.is_integer());
        a.flag(format!("k = (m-1)/p = {}", fmt_r(d)), rational::int(k as i64) == d);
        a.conclude();
    }
    e.finish()
}

/// The query form of a Cartan–Hadamard preset (`n = m - 1`, `b = ∞`).
pub fn cartan_hadamard_query(m: u32, p: Rational, q: Rational, k: u32) -> CohomologyQuery {
    CohomologyQuery {
        n: m.saturating_sub(1),
        k,
        p,
        q,
        interval: Interval::unbounded(0.0),
        flavor: Flavor::Absolute,
        context: Context::CartanHadamard { m },
    }
}

fn regime_precheck(n: u32, k: u32, p: Rational, q: Rational, s1: Rational, s2: Rational, flavor: Flavor) -> Option<Verdict> {
    let one = Rational::one();
    if p <= one || q <= one || p < q {
        return Some(Verdict::unsupported(format!(
            "regime tables need p >= q > 1, got p = {}, q = {}",
            fmt_r(p),
            fmt_r(q)
        )));
    }
    if !regimes::valid_rates(s1, s2) {
        return Some(Verdict::unsupported(format!("need s2 >= s1 >= 0, got s1 = {}, s2 = {}", fmt_r(s1), fmt_r(s2))));
    }
    if n == 0 || k > n + 1 {
        return Some(Verdict::unsupported(format!("need n >= 1 and k <= n + 1, got n = {n}, k = {k}")));
    }
    if flavor == Flavor::Interior {
        return Some(Verdict::unsupported("regime tables cover absolute and relative cohomology".into()));
    }
    None
}

/// Vanishing table for `C1 e^{s1 t} <= h <= C2 e^{s2 t}` on `[a, ∞)`, `a >= 0`.
pub fn decide_exp_regime(n: u32, k: u32, p: Rational, q: Rational, s1: Rational, s2: Rational, flavor: Flavor) -> Verdict {
    regime_precheck(n, k, p, q, s1, s2, flavor)
        .unwrap_or_else(|| table_verdict(Family::Exp, n, k, p, s1, s2, flavor))
}

/// Vanishing table for `C1 t^{s1} <= h <= C2 t^{s2}` on `[a, ∞)`, `a >= 1`.
pub fn decide_power_regime(n: u32, k: u32, p: Rational, q: Rational, s1: Rational, s2: Rational, flavor: Flavor) -> Verdict {
    regime_precheck(n, k, p, q, s1, s2, flavor)
        .unwrap_or_else(|| table_verdict(Family::Power, n, k, p, s1, s2, flavor))
}

/// Runs the decision chain appropriate for the query's flavor and context.
pub fn analyze(q: &CohomologyQuery, settings: &ClassifierSettings) -> Verdict {
    if let Some(v) = precheck(q) {
        return v;
    }
    match (&q.context, q.flavor) {
        (Context::CartanHadamard { m }, _) => decide_cartan_hadamard(*m, q.p, q.q, q.k),
        (Context::PureCylinder(h), flavor) => {
            let mut e = Engine::default();
            regime(&mut e, q, h);
            if !e.done() {
                match flavor {
                    Flavor::Absolute => {
                        middle_dimension(&mut e, q);
                        if !e.done() {
                            absolute_integrals(&mut e, q, h, settings);
                        }
                    }
                    _ => {
                        relative_middle(&mut e, q);
                        if !e.done() {
                            relative_integrals(&mut e, CriterionId::RelativeIntegral, q, h, settings, |_| {});
                        }
                    }
                }
            }
            e.finish()
        }
        (Context::AsymptoticCylinder { .. }, Flavor::RelativeToBase) => decide_asymptotic_relative(q, settings),
        (Context::AsymptoticCylinder { .. }, Flavor::Absolute) => decide_asymptotic_absolute(q, settings),
        (Context::AsymptoticCylinder { .. }, Flavor::Interior) => decide_interior(q, settings),
    }
}
