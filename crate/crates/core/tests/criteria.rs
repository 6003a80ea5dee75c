use lqp_core::criteria::regimes::{self, Family};
use lqp_core::criteria::{self, CohomologyQuery, Context, CriterionId, Flavor, Outcome};
use lqp_core::integrals::ClassifierSettings;
use lqp_core::rational::{self, Rational};
use lqp_core::warping::{Interval, Profile, WarpingModel};
use proptest::prelude::*;

fn exponent() -> impl Strategy<Value = Rational> {
    prop_oneof![Just(rational::ratio(3, 2)), Just(rational::int(2)), Just(rational::int(3)), Just(rational::ratio(5, 2))]
}

fn exp_cylinder(n: u32, k: u32, p: Rational, q: Rational, rate: Rational, flavor: Flavor) -> CohomologyQuery {
    let h = WarpingModel::separable(Profile::Exp { scale: 1.0, rate }, Interval::unbounded(0.0)).unwrap();
    CohomologyQuery { n, k, p, q, interval: h.domain(), flavor, context: Context::PureCylinder(h) }
}

fn power_cylinder(n: u32, k: u32, p: Rational, rate: Rational, flavor: Flavor) -> CohomologyQuery {
    let h = WarpingModel::separable(Profile::Power { scale: 1.0, exponent: rate }, Interval::unbounded(1.0)).unwrap();
    CohomologyQuery { n, k, p, q: p, interval: h.domain(), flavor, context: Context::PureCylinder(h) }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn vanishing_verdicts_name_their_criterion(
        n in 1u32..6,
        k in 0u32..7,
        p in exponent(),
        rate in (-4i64..=4).prop_map(rational::int),
        relative in any::<bool>(),
    ) {
        let k = if relative { k.clamp(1, n + 1) } else { k.min(n + 1) };
        let flavor = if relative { Flavor::RelativeToBase } else { Flavor::Absolute };
        let v = criteria::analyze(&exp_cylinder(n, k, p, p, rate, flavor), &ClassifierSettings::default());
        prop_assert!(!v.trace.is_empty());
        prop_assert_eq!(v.vanishes(), v.criterion.is_some());
        prop_assert_eq!(v.vanishes(), v.statement.is_some());
        prop_assert!(v.outcome != Outcome::Unsupported);
    }

    #[test]
    fn outcome_does_not_depend_on_q(
        n in 1u32..6,
        k in 0u32..7,
        p in exponent(),
        rate in (-4i64..=4).prop_map(rational::int),
        qn in 1i64..=8,
        relative in any::<bool>(),
    ) {
        let k = k.min(n + 1);
        // q in (1, p]
        let q = rational::int(1) + (p - rational::int(1)) * rational::ratio(qn, 8);
        let flavor = if relative { Flavor::RelativeToBase } else { Flavor::Absolute };
        let s = ClassifierSettings::default();
        let at_q = criteria::analyze(&exp_cylinder(n, k, p, q, rate, flavor), &s).outcome;
        let at_p = criteria::analyze(&exp_cylinder(n, k, p, p, rate, flavor), &s).outcome;
        prop_assert_eq!(at_q, at_p);
    }

    #[test]
    fn q_above_p_is_unsupported(n in 1u32..6, k in 0u32..6, p in exponent(), extra in 1i64..4) {
        let q = p + rational::ratio(extra, 4);
        let query = exp_cylinder(n, k.min(n), p, q, rational::int(1), Flavor::Absolute);
        prop_assert!(criteria::check_preconditions(&query).is_err());
        prop_assert_eq!(criteria::analyze(&query, &ClassifierSettings::default()).outcome, Outcome::Unsupported);
    }

    /// A separable exponential or power profile with rate s lies in the
    /// band with s1 = s2 = s, so every table case must be recovered by the
    /// integral criteria.
    #[test]
    fn integral_criteria_cover_the_tables(
        n in 1u32..6,
        k in 0u32..7,
        p in exponent(),
        s in (1i64..=3).prop_map(rational::int),
        relative in any::<bool>(),
    ) {
        let k = k.min(n + 1);
        let flavor = if relative { Flavor::RelativeToBase } else { Flavor::Absolute };
        let s_settings = ClassifierSettings::default();
        let exp_table = criteria::decide_exp_regime(n, k, p, p, s, s, flavor);
        if exp_table.vanishes() {
            let q = exp_cylinder(n, k, p, p, s, flavor);
            let v = match flavor {
                Flavor::Absolute => criteria::decide_absolute(&q, &s_settings),
                _ => criteria::decide_relative(&q, &s_settings),
            };
            prop_assert!(v.vanishes(), "exp n={} k={} p={} s={} {}: {:?}", n, k, p, s, flavor, v.trace);
        }
        let power_table = criteria::decide_power_regime(n, k, p, p, s, s, flavor);
        if power_table.vanishes() {
            let q = power_cylinder(n, k, p, s, flavor);
            let v = match flavor {
                Flavor::Absolute => criteria::decide_absolute(&q, &s_settings),
                _ => criteria::decide_relative(&q, &s_settings),
            };
            prop_assert!(v.vanishes(), "power n={} k={} p={} s={} {}: {:?}", n, k, p, s, flavor, v.trace);
        }
    }

    #[test]
    fn unequal_rates_leave_only_the_middle_degrees(
        n in 1u32..7,
        k in 0u32..8,
        p in exponent(),
        s1 in 0i64..3,
        gap in 1i64..3,
        family in prop_oneof![Just(Family::Exp), Just(Family::Power)],
        relative in any::<bool>(),
    ) {
        let flavor = if relative { Flavor::RelativeToBase } else { Flavor::Absolute };
        let (s1, s2) = (rational::int(s1), rational::int(s1 + gap));
        let v = match family {
            Family::Exp => criteria::decide_exp_regime(n, k, p, p, s1, s2, flavor),
            Family::Power => criteria::decide_power_regime(n, k, p, p, s1, s2, flavor),
        };
        let n_p = rational::int(n as i64) / p;
        let k = rational::int(k as i64);
        let special = if relative { k == n_p + rational::int(1) } else { k == n_p };
        prop_assert_eq!(v.vanishes(), special);
    }
}

#[test]
fn table_rules_match_hand_examples() {
    let (n, p) = (2, rational::int(2));
    let abs = |k, s1, s2| regimes::regime_rule(Family::Exp, Flavor::Absolute, n, k, p, rational::int(s1), rational::int(s2));
    assert_eq!(abs(1, 1, 2), Some(regimes::RegimeRule::MiddleDegree));
    assert_eq!(abs(0, 1, 1), Some(regimes::RegimeRule::EqualRatesBelow));
    assert_eq!(abs(0, 1, 2), None);
    // power, absolute window: n/p < k <= n/p + 1/(p s) with n = 1, p = 3/2, s = 1 gives k = 1
    let win = regimes::regime_rule(Family::Power, Flavor::Absolute, 1, 1, rational::ratio(3, 2), rational::int(1), rational::int(1));
    assert_eq!(win, Some(regimes::RegimeRule::EqualRatesWindow));
    // exp, relative, n = 1, p = 2, s = 1: k > 1/2 + 1 + 1/4
    let rel = |k| regimes::regime_rule(Family::Exp, Flavor::RelativeToBase, 1, k, rational::int(2), rational::int(1), rational::int(1));
    assert_eq!(rel(1), None);
    assert_eq!(rel(2), Some(regimes::RegimeRule::EqualRatesAbove));
}

#[test]
fn asymptotic_and_interior_contexts() {
    let h = WarpingModel::constant(1.0, 0.0).unwrap();
    let s = ClassifierSettings::default();
    let base = CohomologyQuery {
        n: 2,
        k: 2,
        p: rational::int(2),
        q: rational::int(2),
        interval: h.domain(),
        flavor: Flavor::RelativeToBase,
        context: Context::AsymptoticCylinder { model: h.clone(), betti: None, complete: false },
    };
    // k = n/p + 1 on an asymptotic cylinder
    let v = criteria::analyze(&base, &s);
    assert!(v.vanishes(), "{:?}", v.trace);
    let ch = criteria::cartan_hadamard_query(5, rational::int(2), rational::int(2), 3);
    assert_eq!(criteria::analyze(&ch, &s).criterion, Some(CriterionId::CartanHadamard));
    // interior queries need the Betti numbers of X
    let interior = CohomologyQuery { flavor: Flavor::Interior, ..base };
    assert_eq!(criteria::analyze(&interior, &s).outcome, Outcome::Unsupported);
}

#[test]
fn verdicts_serialize_with_kebab_case_tags() {
    let v = criteria::decide_cartan_hadamard(3, rational::int(2), rational::int(2), 2);
    let json = serde_json::to_value(&v).unwrap();
    assert_eq!(json["outcome"], "vanishes");
    assert_eq!(json["criterion"], "cartan-hadamard");
    assert!(json["trace"].as_array().is_some_and(|t| !t.is_empty()));
}
