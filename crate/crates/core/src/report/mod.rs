//! Batch analysis, regime tables, lab runs and presets, rendered as one
//! deterministic JSON document per run.

pub mod config;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::criteria::regimes::{Family, RegimeRule};
use crate::criteria::{self, Flavor, Outcome, Verdict};
use crate::error::{Error, Result};
use crate::integrals::ClassifierSettings;
use crate::lab::runs::{self, LabCheck, LabResult, LabSettings};
use crate::rational::{self, Rational};

pub use config::{AnalysisConfig, ModelDecl, QueryDecl, Target};

pub const TOOL: &str = "lqp";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Exit status when any query is outside the supported range.
pub const EXIT_UNSUPPORTED: i32 = 2;
/// Exit status when a lab run or golden comparison fails.
pub const EXIT_CHECK_FAILED: i32 = 3;

pub const GOLDEN_EXP: &str = include_str!("../../tests/golden/table_exp.json");
pub const GOLDEN_POWER: &str = include_str!("../../tests/golden/table_power.json");

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QueryReport {
    pub index: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub target: String,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableSweep {
    pub ns: Vec<u32>,
    #[serde(with = "rational::serde_str::vec")]
    pub ps: Vec<Rational>,
    /// Rate pairs are taken as `s1 <= s2` in list order; keep it sorted.
    #[serde(with = "rational::serde_str::vec")]
    pub rates: Vec<Rational>,
    pub flavors: Vec<Flavor>,
}

impl Default for TableSweep {
    fn default() -> Self {
        TableSweep {
            ns: (1..=6).collect(),
            ps: vec![rational::ratio(3, 2), rational::int(2), rational::int(3)],
            rates: vec![rational::int(1), rational::int(2), rational::int(3)],
            flavors: vec![Flavor::Absolute, Flavor::RelativeToBase],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub flavor: Flavor,
    pub n: u32,
    #[serde(with = "rational::serde_str")]
    pub p: Rational,
    #[serde(with = "rational::serde_str")]
    pub s1: Rational,
    #[serde(with = "rational::serde_str")]
    pub s2: Rational,
    pub k: u32,
    pub outcome: Outcome,
    /// Every table case that applies, in table order.
    pub rules: Vec<RegimeRule>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeTable {
    pub family: Family,
    pub sweep: TableSweep,
    pub rows: Vec<TableRow>,
    pub vanishing: usize,
}

impl RegimeTable {
    /// Key-sorted pretty JSON, the form the golden files are stored in.
    pub fn canonical_json(&self) -> String {
        canonical(&serde_json::to_value(self).expect("table serializes"))
    }
}

/// Pretty JSON with object keys sorted, plus a trailing newline.
pub fn canonical(value: &serde_json::Value) -> String {
    // serde_json::Value keeps keys in a BTreeMap, so this sorts them.
    let sorted: serde_json::Value = serde_json::from_str(&value.to_string()).expect("round trip");
    let mut s = serde_json::to_string_pretty(&sorted).expect("value serializes");
    s.push('\n');
    s
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GoldenCheck {
    pub matches: bool,
    pub mismatched_rows: usize,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub first_mismatches: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegreeVerdict {
    pub k: u32,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PresetReport {
    pub preset: String,
    pub m: u32,
    #[serde(with = "rational::serde_str")]
    pub p: Rational,
    #[serde(with = "rational::serde_str")]
    pub q: Rational,
    pub vanishing_degrees: Vec<u32>,
    pub degrees: Vec<DegreeVerdict>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Summary {
    pub vanishes: usize,
    pub inconclusive: usize,
    pub unsupported: usize,
    pub lab_failures: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub golden_matches: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config: Option<AnalysisConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub queries: Option<Vec<QueryReport>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table: Option<RegimeTable>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub golden: Option<GoldenCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lab: Option<Vec<LabResult>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<PresetReport>,
    pub summary: Summary,
    pub exit_code: i32,
}

impl Report {
    fn new(command: impl Into<String>) -> Self {
        Report {
            tool: TOOL,
            version: VERSION,
            command: command.into(),
            config: None,
            queries: None,
            table: None,
            golden: None,
            lab: None,
            preset: None,
            summary: Summary::default(),
            exit_code: 0,
        }
    }

    fn tally(&mut self, verdicts: &[&Verdict]) {
        for v in verdicts {
            match v.outcome {
                Outcome::Vanishes => self.summary.vanishes += 1,
                Outcome::Inconclusive => self.summary.inconclusive += 1,
                Outcome::Unsupported => self.summary.unsupported += 1,
            }
        }
    }

    fn finish(mut self) -> Self {
        self.exit_code = if self.summary.unsupported > 0 {
            EXIT_UNSUPPORTED
        } else if self.summary.lab_failures > 0 || self.summary.golden_matches == Some(false) {
            EXIT_CHECK_FAILED
        } else {
            0
        };
        self
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

pub fn evaluate(target: &Target, settings: &ClassifierSettings) -> Verdict {
    match target {
        Target::Query(q) => criteria::analyze(q, settings),
        Target::Regime { family, n, k, p, q, s1, s2, flavor } => match family {
            Family::Exp => criteria::decide_exp_regime(*n, *k, *p, *q, *s1, *s2, *flavor),
            Family::Power => criteria::decide_power_regime(*n, *k, *p, *q, *s1, *s2, *flavor),
        },
        Target::CartanHadamard { m, k, p, q } => criteria::decide_cartan_hadamard(*m, *p, *q, *k),
    }
}

/// One verdict per query, in query order.
pub fn run_analyze(config: &AnalysisConfig) -> Result<Report> {
    config.validate()?;
    let targets = config.targets()?;
    let verdicts: Vec<Verdict> = targets.par_iter().map(|t| evaluate(t, &config.classifier)).collect();
    let queries: Vec<QueryReport> = targets
        .iter()
        .zip(verdicts)
        .enumerate()
        .map(|(index, (t, verdict))| QueryReport {
            index,
            id: config.queries[index].id.clone(),
            target: t.label(),
            verdict,
        })
        .collect();
    let mut report = Report::new("analyze");
    report.tally(&queries.iter().map(|q| &q.verdict).collect::<Vec<_>>());
    report.config = Some(config.clone());
    report.queries = Some(queries);
    Ok(report.finish())
}

pub fn regime_table(family: Family, sweep: &TableSweep) -> RegimeTable {
    let mut rows = Vec::new();
    for &flavor in &sweep.flavors {
        for &n in &sweep.ns {
            for &p in &sweep.ps {
                for (i, &s1) in sweep.rates.iter().enumerate() {
                    for &s2 in &sweep.rates[i..] {
                        for k in 0..=n + 1 {
                            let rules: Vec<RegimeRule> = RegimeRule::candidates(family, flavor)
                                .iter()
                                .copied()
                                .filter(|r| r.holds(n, k, p, s1, s2))
                                .collect();
                            let outcome = match family {
                                Family::Exp => criteria::decide_exp_regime(n, k, p, p, s1, s2, flavor),
                                Family::Power => criteria::decide_power_regime(n, k, p, p, s1, s2, flavor),
                            }
                            .outcome;
                            rows.push(TableRow { flavor, n, p, s1, s2, k, outcome, rules });
                        }
                    }
                }
            }
        }
    }
    let vanishing = rows.iter().filter(|r| r.outcome == Outcome::Vanishes).count();
    RegimeTable { family, sweep: sweep.clone(), rows, vanishing }
}

pub fn golden(family: Family) -> &'static str {
    match family {
        Family::Exp => GOLDEN_EXP,
        Family::Power => GOLDEN_POWER,
    }
}

/// Compares a table with the shipped golden file of the default sweep.
pub fn check_golden(table: &RegimeTable) -> Result<GoldenCheck> {
    if table.sweep != TableSweep::default() {
        return Err(Error::config("table", "golden files cover the default sweep only"));
    }
    let expected = golden(table.family);
    let actual = table.canonical_json();
    if actual == expected {
        return Ok(GoldenCheck { matches: true, mismatched_rows: 0, first_mismatches: Vec::new() });
    }
    let want: serde_json::Value = serde_json::from_str(expected)?;
    let got = serde_json::to_value(table)?;
    let rows = |v: &serde_json::Value| v.get("rows").and_then(|r| r.as_array()).cloned().unwrap_or_default();
    let (want_rows, got_rows) = (rows(&want), rows(&got));
    let mut mismatched = want_rows.len().abs_diff(got_rows.len());
    let mut first = Vec::new();
    for (w, g) in want_rows.iter().zip(&got_rows) {
        if w != g {
            mismatched += 1;
            if first.len() < 10 {
                first.push(format!("expected {w}, got {g}"));
            }
        }
    }
    Ok(GoldenCheck { matches: false, mismatched_rows: mismatched.max(1), first_mismatches: first })
}

pub fn run_table(family: Family, sweep: &TableSweep, check_against_golden: bool) -> Result<Report> {
    let table = regime_table(family, sweep);
    let mut report = Report::new(format!("table {family}"));
    if check_against_golden {
        let g = check_golden(&table)?;
        report.summary.golden_matches = Some(g.matches);
        report.golden = Some(g);
    }
    report.summary.vanishes = table.vanishing;
    report.summary.inconclusive = table.rows.len() - table.vanishing;
    report.table = Some(table);
    Ok(report.finish())
}

pub fn run_lab(checks: &[LabCheck], settings: &LabSettings) -> Result<Report> {
    settings.validate()?;
    let results = checks.iter().map(|c| runs::run(*c, settings)).collect::<Result<Vec<_>>>()?;
    let names: Vec<&str> = checks.iter().map(|c| c.name()).collect();
    let mut report = Report::new(format!("lab {}", names.join(",")));
    report.summary.lab_failures = results.iter().filter(|r| !r.passed()).count();
    report.config = Some(AnalysisConfig { lab: settings.clone(), ..AnalysisConfig::default() });
    report.lab = Some(results);
    Ok(report.finish())
}

/// Verdicts in every degree `0..=m` of a Cartan–Hadamard manifold.
pub fn cartan_hadamard_preset(m: u32, p: Rational, q: Rational) -> PresetReport {
    let degrees: Vec<DegreeVerdict> =
        (0..=m).map(|k| DegreeVerdict { k, verdict: criteria::decide_cartan_hadamard(m, p, q, k) }).collect();
    let vanishing_degrees = degrees.iter().filter(|d| d.verdict.vanishes()).map(|d| d.k).collect();
    PresetReport { preset: "cartan-hadamard".into(), m, p, q, vanishing_degrees, degrees }
}

pub fn run_preset(m: u32, p: Rational, q: Rational) -> Report {
    let preset = cartan_hadamard_preset(m, p, q);
    let mut report = Report::new("presets cartan-hadamard");
    report.tally(&preset.degrees.iter().map(|d| &d.verdict).collect::<Vec<_>>());
    report.preset = Some(preset);
    report.finish()
}

/// Every numeric default in one place.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Defaults {
    pub classifier: ClassifierSettings,
    pub lab: LabSettings,
    pub lab_counts: BTreeMap<String, usize>,
    pub table: TableSweep,
}

pub fn defaults() -> Defaults {
    Defaults {
        classifier: ClassifierSettings::default(),
        lab: LabSettings::default(),
        lab_counts: LabCheck::ALL.iter().map(|c| (c.name().to_string(), c.default_count())).collect(),
        table: TableSweep::default(),
    }
}

pub fn defaults_toml() -> String {
    toml::to_string_pretty(&defaults()).expect("defaults serialize")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        let ok = AnalysisConfig::from_toml_str("").unwrap();
        let r = run_analyze(&ok).unwrap();
        assert_eq!((r.exit_code, r.queries.as_ref().unwrap().len()), (0, 0));
        let bad = AnalysisConfig::from_toml_str(
            "[[model]]\nname = \"u\"\nkind = \"separable\"\nprofile = \"constant\"\nvalue = 1.0\n\
             domain = { start = 0.0, end = \"inf\" }\n\
             [[query]]\nn = 2\nk = 1\np = 2\nq = 3\nmodel = \"u\"\n",
        )
        .unwrap();
        let r = run_analyze(&bad).unwrap();
        assert_eq!(r.exit_code, EXIT_UNSUPPORTED);
        assert_eq!(r.summary.unsupported, 1);
    }

    #[test]
    fn empty_sweep_gives_empty_table() {
        let sweep = TableSweep { ns: vec![], ..TableSweep::default() };
        assert!(regime_table(Family::Exp, &sweep).rows.is_empty());
    }

    #[test]
    fn preset_degrees() {
        let p = cartan_hadamard_preset(5, rational::int(2), rational::int(2));
        assert_eq!(p.vanishing_degrees, vec![2, 3]);
    }

    #[test]
    fn defaults_render() {
        let t = defaults_toml();
        assert!(t.contains("ceiling"));
        assert!(t.contains("[lab_counts]"));
    }
}
