//! Symbolic vanishing tables for warping functions squeezed between two
//! exponentials or two powers of `t`.
//!
//! Everything here is exact rational arithmetic on `(n, k, p, s1, s2)`.

use std::fmt;

use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};

use crate::rational::{self, Rational};

use super::Flavor;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// `C1 e^{s1 t} <= h <= C2 e^{s2 t}` on `[a, ∞)`, `a >= 0`
    Exp,
    /// `C1 t^{s1} <= h <= C2 t^{s2}` on `[a, ∞)`, `a >= 1`
    Power,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Exp => "exp",
            Family::Power => "power",
        })
    }
}

/// The individual cases of the tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegimeRule {
    /// absolute, `k = n/p`
    MiddleDegree,
    /// absolute, `s1 = s2`, `k < n/p`
    EqualRatesBelow,
    /// absolute, power family, `s1 = s2 > 0`, `n/p < k <= n/p + 1/(p s1)`
    EqualRatesWindow,
    /// relative, `k = n/p + 1`
    RelativeMiddle,
    /// relative, exp family, `s1 = s2 = s > 0`, `k > n/p + 1 + 1/(p p' s)`
    EqualRatesAbove,
    /// relative, power family, `s1 = s2 > 0`, `n/p + 1 - 1/(p' s1) <= k <= n/p + 1`
    RelativeWindow,
}

impl RegimeRule {
    pub fn condition(&self) -> &'static str {
        match self {
            RegimeRule::MiddleDegree => "k = n/p",
            RegimeRule::EqualRatesBelow => "s1 = s2 and k < n/p",
            RegimeRule::EqualRatesWindow => "s1 = s2 > 0 and n/p < k <= n/p + 1/(p s1)",
            RegimeRule::RelativeMiddle => "k = n/p + 1",
            RegimeRule::EqualRatesAbove => "s1 = s2 = s > 0 and k > n/p + 1 + 1/(p p' s)",
            RegimeRule::RelativeWindow => "s1 = s2 > 0 and n/p + 1 - 1/(p' s1) <= k <= n/p + 1",
        }
    }

    /// Rules of `family` for `flavor`, in the order they are tried.
    pub fn candidates(family: Family, flavor: Flavor) -> &'static [RegimeRule] {
        use RegimeRule::*;
        match (family, flavor) {
            (Family::Exp, Flavor::Absolute) => &[MiddleDegree, EqualRatesBelow],
            (Family::Exp, Flavor::RelativeToBase) => &[RelativeMiddle, EqualRatesAbove],
            (Family::Power, Flavor::Absolute) => &[MiddleDegree, EqualRatesBelow, EqualRatesWindow],
            (Family::Power, Flavor::RelativeToBase) => &[RelativeWindow, RelativeMiddle],
            (_, Flavor::Interior) => &[],
        }
    }

    pub fn holds(&self, n: u32, k: u32, p: Rational, s1: Rational, s2: Rational) -> bool {
        let n_p = rational::int(n as i64) / p;
        let k = rational::int(k as i64);
        let one = Rational::one();
        let equal_positive = s1 == s2 && s1.is_positive();
        match self {
            RegimeRule::MiddleDegree => k == n_p,
            RegimeRule::EqualRatesBelow => s1 == s2 && k < n_p,
            RegimeRule::EqualRatesWindow => equal_positive && n_p < k && k <= n_p + one / (p * s1),
            RegimeRule::RelativeMiddle => k == n_p + one,
            RegimeRule::EqualRatesAbove => {
                let p_conj = p / (p - one);
                equal_positive && k > n_p + one + one / (p * p_conj * s1)
            }
            RegimeRule::RelativeWindow => {
                let p_conj = p / (p - one);
                equal_positive && n_p + one - one / (p_conj * s1) <= k && k <= n_p + one
            }
        }
    }
}

impl fmt::Display for RegimeRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).ok().and_then(|v| v.as_str().map(str::to_owned));
        f.write_str(s.as_deref().unwrap_or("?"))
    }
}

/// First rule of the table that applies, if any.
pub fn regime_rule(
    family: Family,
    flavor: Flavor,
    n: u32,
    k: u32,
    p: Rational,
    s1: Rational,
    s2: Rational,
) -> Option<RegimeRule> {
    RegimeRule::candidates(family, flavor)
        .iter()
        .copied()
        .find(|r| r.holds(n, k, p, s1, s2))
}

/// Table domain: `s2 >= s1 >= 0`.
pub fn valid_rates(s1: Rational, s2: Rational) -> bool {
    !s1.is_negative() && s2 >= s1
}

/// Minimum interval start for the family.
pub fn min_start(family: Family) -> f64 {
    match family {
        Family::Exp => 0.0,
        Family::Power => 1.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    #[test]
    fn exp_examples() {
        let rule = |k, s1, s2, flavor| regime_rule(Family::Exp, flavor, 2, k, int(2), int(s1), int(s2));
        assert_eq!(rule(0, 1, 1, Flavor::Absolute), Some(RegimeRule::EqualRatesBelow));
        assert_eq!(rule(0, 1, 2, Flavor::Absolute), None);
        // 3 > 1 + 1 + 1/4
        assert_eq!(rule(3, 1, 1, Flavor::RelativeToBase), Some(RegimeRule::EqualRatesAbove));
        assert_eq!(rule(2, 1, 3, Flavor::RelativeToBase), Some(RegimeRule::RelativeMiddle));
    }

    #[test]
    fn power_examples() {
        assert_eq!(
            regime_rule(Family::Power, Flavor::Absolute, 4, 2, int(2), int(1), int(1)),
            Some(RegimeRule::MiddleDegree)
        );
        // n/p + 1 - 1/(p' s1) = 2 - 2/3 <= 2 <= 2
        assert_eq!(
            regime_rule(Family::Power, Flavor::RelativeToBase, 3, 2, int(3), int(1), int(1)),
            Some(RegimeRule::RelativeWindow)
        );
        // window (1, 3/2] has no integer above 1 for n = 2, p = 2, s = 1
        assert!(!RegimeRule::EqualRatesWindow.holds(2, 2, int(2), int(1), int(1)));
        assert!(RegimeRule::EqualRatesWindow.holds(2, 2, int(2), ratio(1, 2), ratio(1, 2)));
    }
}
