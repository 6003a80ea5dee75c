//! The TOML analysis configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::criteria::regimes::{self, Family};
use crate::criteria::{CohomologyQuery, Context, Flavor};
use crate::error::{Error, Result};
use crate::integrals::ClassifierSettings;
use crate::lab::runs::LabSettings;
use crate::rational::{self, Rational};
use crate::warping::{Interval, WarpingModel, WarpingShape};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    #[serde(default)]
    pub classifier: ClassifierSettings,
    #[serde(default)]
    pub lab: LabSettings,
    #[serde(default)]
    pub output: OutputSettings,
    #[serde(default, rename = "model")]
    pub models: Vec<ModelDecl>,
    #[serde(default, rename = "query")]
    pub queries: Vec<QueryDecl>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSettings {
    /// Report destination; standard output when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
}

/// A named warping model. The shape fields sit next to `name` and `domain`
/// (`kind = "separable"`, `profile = "exp"`, ...).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDecl {
    pub name: String,
    /// Required except for grid models, which carry their own t-range.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<Interval>,
    #[serde(flatten)]
    pub shape: WarpingShape,
}

impl ModelDecl {
    pub fn build(&self) -> Result<WarpingModel> {
        let domain = match (&self.shape, self.domain) {
            (_, Some(d)) => Interval::new(d.start, d.end)?,
            (WarpingShape::Grid(_), None) => Interval::unbounded(0.0),
            (_, None) => {
                return Err(Error::config(format!("model.{}.domain", self.name), "missing domain"));
            }
        };
        WarpingModel::new(self.shape.clone(), domain)
            .map_err(|e| Error::config(format!("model.{}", self.name), e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    CartanHadamard,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ContextKind {
    #[default]
    Pure,
    Asymptotic,
}

/// One query. Exactly one of `model`, `family` or `preset` selects the
/// geometry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QueryDecl {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    /// Cross-section dimension; defaults to `m - 1` for presets.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    pub k: u32,
    #[serde(with = "rational::serde_str")]
    pub p: Rational,
    #[serde(with = "rational::serde_str")]
    pub q: Rational,
    #[serde(default)]
    pub flavor: Flavor,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<Family>,
    #[serde(default, with = "rational::serde_str::option", skip_serializing_if = "Option::is_none")]
    pub s1: Option<Rational>,
    #[serde(default, with = "rational::serde_str::option", skip_serializing_if = "Option::is_none")]
    pub s2: Option<Rational>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<Preset>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<u32>,
    #[serde(default)]
    pub context: ContextKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub betti: Option<Vec<u64>>,
    #[serde(default)]
    pub complete: bool,
    /// Defaults to the model domain.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interval: Option<Interval>,
}

/// A query resolved against the declared models.
#[derive(Debug, Clone, PartialEq)]
pub enum Target {
    Query(CohomologyQuery),
    Regime { family: Family, n: u32, k: u32, p: Rational, q: Rational, s1: Rational, s2: Rational, flavor: Flavor },
    CartanHadamard { m: u32, k: u32, p: Rational, q: Rational },
}

impl Target {
    pub fn label(&self) -> String {
        match self {
            Target::Query(q) => match q.context {
                Context::PureCylinder(_) => "pure-cylinder".into(),
                Context::AsymptoticCylinder { .. } => "asymptotic-cylinder".into(),
                Context::CartanHadamard { .. } => "cartan-hadamard".into(),
            },
            Target::Regime { family, .. } => format!("{family}-family"),
            Target::CartanHadamard { .. } => "cartan-hadamard".into(),
        }
    }
}

impl QueryDecl {
    pub fn resolve(&self, index: usize, models: &[(String, WarpingModel)]) -> Result<Target> {
        let field = |name: &str| format!("query[{index}].{name}");
        let chosen = [self.model.is_some(), self.family.is_some(), self.preset.is_some()];
        if chosen.iter().filter(|c| **c).count() != 1 {
            return Err(Error::config(field("model"), "set exactly one of model, family or preset"));
        }
        if let Some(Preset::CartanHadamard) = self.preset {
            let m = self.m.ok_or_else(|| Error::config(field("m"), "cartan-hadamard preset needs m"))?;
            if let Some(n) = self.n {
                if n + 1 != m {
                    return Err(Error::config(field("n"), format!("must equal m - 1 = {}", m.saturating_sub(1))));
                }
            }
            return Ok(Target::CartanHadamard { m, k: self.k, p: self.p, q: self.q });
        }
        let n = self.n.ok_or_else(|| Error::config(field("n"), "missing cross-section dimension"))?;
        if let Some(family) = self.family {
            let s1 = self.s1.ok_or_else(|| Error::config(field("s1"), "family queries need s1"))?;
            let s2 = self.s2.ok_or_else(|| Error::config(field("s2"), "family queries need s2"))?;
            if let Some(iv) = self.interval {
                if !iv.is_unbounded() || iv.start < regimes::min_start(family) {
                    return Err(Error::config(
                        field("interval"),
                        format!("{family} tables cover [a, ∞) with a >= {}", regimes::min_start(family)),
                    ));
                }
            }
            return Ok(Target::Regime { family, n, k: self.k, p: self.p, q: self.q, s1, s2, flavor: self.flavor });
        }
        let name = self.model.as_deref().unwrap_or_default();
        let model = models
            .iter()
            .find(|(m, _)| m == name)
            .map(|(_, m)| m.clone())
            .ok_or_else(|| Error::config(field("model"), format!("unknown model {name:?}")))?;
        let interval = match self.interval {
            Some(iv) => Interval::new(iv.start, iv.end).map_err(|e| Error::config(field("interval"), e.to_string()))?,
            None => model.domain(),
        };
        let context = match self.context {
            ContextKind::Pure => Context::PureCylinder(model),
            ContextKind::Asymptotic => {
                Context::AsymptoticCylinder { model, betti: self.betti.clone(), complete: self.complete }
            }
        };
        Ok(Target::Query(CohomologyQuery { n, k: self.k, p: self.p, q: self.q, interval, flavor: self.flavor, context }))
    }
}

impl AnalysisConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: AnalysisConfig = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.classifier.validate()?;
        self.lab.validate()?;
        for (i, m) in self.models.iter().enumerate() {
            if self.models[..i].iter().any(|o| o.name == m.name) {
                return Err(Error::config(format!("model[{i}].name"), format!("duplicate model name {:?}", m.name)));
            }
        }
        Ok(())
    }

    pub fn build_models(&self) -> Result<Vec<(String, WarpingModel)>> {
        self.models.iter().map(|m| Ok((m.name.clone(), m.build()?))).collect()
    }

    pub fn targets(&self) -> Result<Vec<Target>> {
        let models = self.build_models()?;
        self.queries.iter().enumerate().map(|(i, q)| q.resolve(i, &models)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
[classifier]
ceiling = 1e9

[[model]]
name = "unit"
kind = "separable"
profile = "constant"
value = 1.0
domain = { start = 0.0, end = "inf" }

[[model]]
name = "band"
kind = "exp-bounded"
c1 = 1.0
s1 = "1/2"
c2 = 2.0
s2 = 1
domain = { start = 0.0, end = "inf" }

[[query]]
n = 2
k = 1
p = 2
q = "3/2"
model = "unit"

[[query]]
n = 3
k = 2
p = "3/2"
q = "3/2"
family = "power"
s1 = 1
s2 = 1
flavor = "relative-to-base"

[[query]]
k = 2
p = 2
q = 2
preset = "cartan-hadamard"
m = 3
"#;

    #[test]
    fn parses_and_resolves() {
        let c = AnalysisConfig::from_toml_str(SAMPLE).unwrap();
        assert_eq!(c.classifier.ceiling, 1e9);
        assert_eq!(c.classifier.epsilon_tail, ClassifierSettings::default().epsilon_tail);
        let targets = c.targets().unwrap();
        assert!(matches!(&targets[0], Target::Query(q) if q.interval.is_unbounded() && q.q == rational::ratio(3, 2)));
        assert!(matches!(targets[1], Target::Regime { family: Family::Power, .. }));
        assert!(matches!(targets[2], Target::CartanHadamard { m: 3, .. }));
    }

    #[test]
    fn reports_field_errors() {
        let bad = SAMPLE.replace("model = \"unit\"", "model = \"nope\"");
        let err = AnalysisConfig::from_toml_str(&bad).unwrap().targets().unwrap_err();
        assert!(err.to_string().contains("query[0].model"), "{err}");
        let err = AnalysisConfig::from_toml_str("[classifier]\nceiling = -1").unwrap_err();
        assert!(err.to_string().contains("classifier.ceiling"));
        let err = AnalysisConfig::from_toml_str("[[query]]\nn = 1\nk = 0\np = 2\nq = 2\nbogus = 1").unwrap_err();
        assert!(err.to_string().contains("bogus"), "{err}");
    }
}
