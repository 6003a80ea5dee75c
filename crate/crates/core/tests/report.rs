use lqp_core::criteria::regimes::{Family, RegimeRule};
use lqp_core::criteria::{CriterionId, Flavor, Outcome};
use lqp_core::lab::runs::{LabCheck, LabSettings};
use lqp_core::rational;
use lqp_core::report::{self, AnalysisConfig, TableSweep, EXIT_CHECK_FAILED, EXIT_UNSUPPORTED};

const CONFIG: &str = r#"
[[model]]
name = "flat"
kind = "separable"
profile = "constant"
value = 1.0
domain = { start = 0.0, end = "inf" }

[[model]]
name = "band"
kind = "power-bounded"
c1 = 1.0
s1 = 1
c2 = 3.0
s2 = 2
domain = { start = 1.0, end = "inf" }

[[query]]
id = "middle"
n = 4
k = 2
p = 2
q = 2
model = "flat"

[[query]]
id = "band-middle"
n = 3
k = 2
p = 3
q = 2
flavor = "relative-to-base"
model = "band"

[[query]]
id = "table"
n = 2
k = 0
p = 2
q = 2
family = "exp"
s1 = 1
s2 = 1
"#;

#[test]
fn analyze_reports_in_query_order() {
    let config = AnalysisConfig::from_toml_str(CONFIG).unwrap();
    let report = report::run_analyze(&config).unwrap();
    let queries = report.queries.as_ref().unwrap();
    let ids: Vec<_> = queries.iter().map(|q| q.id.as_deref().unwrap()).collect();
    assert_eq!(ids, ["middle", "band-middle", "table"]);
    assert_eq!(queries[0].verdict.criterion, Some(CriterionId::MiddleDimension));
    assert_eq!(queries[1].verdict.outcome, Outcome::Vanishes);
    assert_eq!(queries[2].verdict.criterion, Some(CriterionId::ExpRegime));
    assert_eq!(report.exit_code, 0);
    assert_eq!(report.summary.vanishes, 3);
}

#[test]
fn reports_are_deterministic_and_echo_defaults() {
    let config = AnalysisConfig::from_toml_str(CONFIG).unwrap();
    let a = report::run_analyze(&config).unwrap().to_json();
    let b = report::run_analyze(&config).unwrap().to_json();
    assert_eq!(a, b);
    let json: serde_json::Value = serde_json::from_str(&a).unwrap();
    assert_eq!(json["config"]["classifier"]["ceiling"], 1e8);
    assert_eq!(json["config"]["lab"]["seed"], 7);
    assert_eq!(json["tool"], "lqp");
}

#[test]
fn unsupported_query_sets_exit_status() {
    let text = format!("{CONFIG}\n[[query]]\nn = 2\nk = 1\np = 2\nq = 3\nmodel = \"flat\"\n");
    let report = report::run_analyze(&AnalysisConfig::from_toml_str(&text).unwrap()).unwrap();
    assert_eq!(report.summary.unsupported, 1);
    assert_eq!(report.exit_code, EXIT_UNSUPPORTED);
}

#[test]
fn exp_table_with_equal_rates_uses_every_case() {
    let sweep = TableSweep {
        rates: vec![rational::int(1), rational::int(2)],
        ..TableSweep::default()
    };
    let table = report::regime_table(Family::Exp, &sweep);
    let mut seen = std::collections::HashSet::new();
    for row in table.rows.iter().filter(|r| r.s1 == r.s2) {
        assert_eq!(row.outcome == Outcome::Vanishes, !row.rules.is_empty());
        seen.extend(row.rules.iter().copied());
    }
    let expected = [RegimeRule::MiddleDegree, RegimeRule::EqualRatesBelow, RegimeRule::RelativeMiddle, RegimeRule::EqualRatesAbove];
    assert_eq!(seen, expected.into_iter().collect());
}

#[test]
fn power_table_with_unequal_rates_vanishes_only_in_middle_degrees() {
    let table = report::regime_table(Family::Power, &TableSweep::default());
    for row in table.rows.iter().filter(|r| r.s1 != r.s2 && r.outcome == Outcome::Vanishes) {
        let expected = match row.flavor {
            Flavor::Absolute => RegimeRule::MiddleDegree,
            _ => RegimeRule::RelativeMiddle,
        };
        assert_eq!(row.rules, vec![expected], "{row:?}");
    }
}

#[test]
fn golden_check_rejects_other_sweeps() {
    let sweep = TableSweep { ns: vec![1], ..TableSweep::default() };
    assert!(report::run_table(Family::Exp, &sweep, true).is_err());
    let r = report::run_table(Family::Exp, &sweep, false).unwrap();
    assert_eq!(r.exit_code, 0);
    assert!(r.golden.is_none());
}

#[test]
fn lab_failure_sets_exit_status() {
    // an order requirement no second-order scheme can meet
    let settings = LabSettings { min_order: 5.0, count: Some(1), grids: vec![16, 32], ..LabSettings::default() };
    let r = report::run_lab(&[LabCheck::Homotopy], &settings).unwrap();
    assert_eq!(r.summary.lab_failures, 1);
    assert_eq!(r.exit_code, EXIT_CHECK_FAILED);
    let ok = LabSettings { count: Some(3), ..LabSettings::default() };
    let r = report::run_lab(&[LabCheck::Norms, LabCheck::Ddzero], &ok).unwrap();
    assert_eq!(r.exit_code, 0);
    assert_eq!(r.lab.as_ref().unwrap().len(), 2);
}

#[test]
fn preset_lists_every_degree() {
    let r = report::run_preset(7, rational::int(2), rational::int(2));
    let preset = r.preset.as_ref().unwrap();
    assert_eq!(preset.degrees.len(), 8);
    assert_eq!(preset.vanishing_degrees, vec![3, 4]);
    assert_eq!(r.summary.vanishes, 2);
}
