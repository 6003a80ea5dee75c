//! Batch verification runs over seeded random forms.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::random::{rng, RandomForm, RandomWarping};
use super::{check_homotopy_base, check_homotopy_cylinder, check_lemma_ineq, dd_residual, fit_order};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LabCheck {
    Homotopy,
    Ineq,
    Norms,
    Ddzero,
}

impl LabCheck {
    pub const ALL: [LabCheck; 4] = [LabCheck::Homotopy, LabCheck::Ineq, LabCheck::Norms, LabCheck::Ddzero];

    pub fn name(&self) -> &'static str {
        match self {
            LabCheck::Homotopy => "homotopy",
            LabCheck::Ineq => "ineq",
            LabCheck::Norms => "norms",
            LabCheck::Ddzero => "ddzero",
        }
    }

    pub fn default_count(&self) -> usize {
        match self {
            LabCheck::Homotopy => 4,
            LabCheck::Ineq => 1000,
            LabCheck::Norms => 100,
            LabCheck::Ddzero => 100,
        }
    }
}

/// `(p, q)` pairs cycled through by the fiber-bound run.
pub const INEQ_EXPONENTS: [(f64, f64); 3] = [(2.0, 2.0), (3.0, 2.0), (2.0, 1.5)];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LabSettings {
    pub seed: u64,
    /// Interval counts `N` of the refinement study (`N + 1` t-points, `N`
    /// x-points per axis).
    pub grids: Vec<usize>,
    /// Number of random cases; `None` uses the per-check default.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    pub torus_dim: usize,
    pub a: f64,
    pub end: f64,
    pub margin: f64,
    pub min_order: f64,
    pub max_residual: f64,
    pub dd_tolerance: f64,
    pub dd_resolution: usize,
    pub norm_tolerance: f64,
    pub norm_resolution: usize,
    pub ineq_resolution: usize,
}

impl Default for LabSettings {
    fn default() -> Self {
        LabSettings {
            seed: 7,
            grids: vec![32, 64, 128],
            count: None,
            torus_dim: 2,
            a: 0.0,
            end: 1.0,
            margin: 0.02,
            min_order: 1.8,
            max_residual: 1e-3,
            dd_tolerance: 1e-10,
            dd_resolution: 64,
            norm_tolerance: 1e-12,
            norm_resolution: 32,
            ineq_resolution: 128,
        }
    }
}

impl LabSettings {
    pub fn validate(&self) -> Result<()> {
        if self.grids.iter().any(|g| *g < 8) {
            return Err(Error::config("lab.grids", "grid sizes must be at least 8"));
        }
        if self.torus_dim == 0 || self.torus_dim > 3 {
            return Err(Error::config("lab.torus_dim", "torus dimension must be 1, 2 or 3"));
        }
        if !(self.a.is_finite() && self.end.is_finite() && self.a < self.end) {
            return Err(Error::config("lab.a", "need finite a < end"));
        }
        for (field, v) in [
            ("lab.margin", self.margin),
            ("lab.min_order", self.min_order),
            ("lab.max_residual", self.max_residual),
            ("lab.dd_tolerance", self.dd_tolerance),
            ("lab.norm_tolerance", self.norm_tolerance),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(field, "must be positive"));
            }
        }
        for (field, v) in [
            ("lab.dd_resolution", self.dd_resolution),
            ("lab.norm_resolution", self.norm_resolution),
            ("lab.ineq_resolution", self.ineq_resolution),
        ] {
            if v < 8 {
                return Err(Error::config(field, "must be at least 8"));
            }
        }
        Ok(())
    }

    fn count(&self, check: LabCheck) -> usize {
        self.count.unwrap_or_else(|| check.default_count())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomotopyCase {
    pub case: usize,
    pub degree: usize,
    pub base_residuals: Vec<f64>,
    pub cylinder_residuals: Vec<f64>,
    pub base_order: f64,
    pub cylinder_order: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomotopyStudy {
    pub grids: Vec<usize>,
    pub torus_dim: usize,
    pub min_order: f64,
    pub max_residual: f64,
    pub cases: Vec<HomotopyCase>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IneqCase {
    pub case: usize,
    pub torus_dim: usize,
    pub degree: usize,
    pub p: f64,
    pub q: f64,
    pub c: f64,
    pub t: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IneqStudy {
    pub count: usize,
    pub held: usize,
    pub margin: f64,
    /// Largest `lhs / rhs` over cases with `rhs > 0`.
    pub worst_ratio: f64,
    pub failures: Vec<IneqCase>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormStudy {
    pub count: usize,
    pub max_relative_gap: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DdStudy {
    pub count: usize,
    pub resolution: usize,
    pub max_relative: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "check", rename_all = "kebab-case")]
pub enum LabResult {
    Homotopy(HomotopyStudy),
    Ineq(IneqStudy),
    Norms(NormStudy),
    Ddzero(DdStudy),
}

impl LabResult {
    pub fn passed(&self) -> bool {
        match self {
            LabResult::Homotopy(s) => s.passed,
            LabResult::Ineq(s) => s.passed,
            LabResult::Norms(s) => s.passed,
            LabResult::Ddzero(s) => s.passed,
        }
    }
}

pub fn run(check: LabCheck, settings: &LabSettings) -> Result<LabResult> {
    settings.validate()?;
    Ok(match check {
        LabCheck::Homotopy => LabResult::Homotopy(homotopy(settings)?),
        LabCheck::Ineq => LabResult::Ineq(ineq(settings)?),
        LabCheck::Norms => LabResult::Norms(norms(settings)?),
        LabCheck::Ddzero => LabResult::Ddzero(ddzero(settings)?),
    })
}

pub fn homotopy(s: &LabSettings) -> Result<HomotopyStudy> {
    let n = s.torus_dim;
    let cases = (0..s.count(LabCheck::Homotopy))
        .into_par_iter()
        .map(|case| {
            let mut r = rng(s.seed, case as u64);
            let degree = r.random_range(1..=n);
            let warping = RandomWarping::new(&mut r, n);
            let form = RandomForm::new(&mut r, n, degree);
            let mut base = Vec::new();
            let mut cylinder = Vec::new();
            for &g in &s.grids {
                let cyl = warping.cylinder(s.a, s.end, g + 1, n, g)?;
                let w = form.sample(&cyl)?;
                let (c, t) = (cyl.t(g / 4), cyl.t(3 * g / 4));
                base.push(check_homotopy_base(&cyl, &w, c, t)?);
                cylinder.push(check_homotopy_cylinder(&cyl, &w, c)?);
            }
            let base_order = fit_order(&s.grids, &base);
            let cylinder_order = fit_order(&s.grids, &cylinder);
            let last_ok = |v: &[f64]| v.last().is_some_and(|r| *r < s.max_residual);
            let passed =
                base_order >= s.min_order && cylinder_order >= s.min_order && last_ok(&base) && last_ok(&cylinder);
            Ok(HomotopyCase {
                case,
                degree,
                base_residuals: base,
                cylinder_residuals: cylinder,
                base_order,
                cylinder_order,
                passed,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let passed = cases.iter().all(|c| c.passed);
    Ok(HomotopyStudy {
        grids: s.grids.clone(),
        torus_dim: n,
        min_order: s.min_order,
        max_residual: s.max_residual,
        cases,
        passed,
    })
}

/// x-points per axis for the fiber-bound run: `nt` on a circle, a quarter of
/// that on a 2-torus.
fn ineq_nx(nt: usize, n: usize) -> usize {
    (nt >> (2 * (n - 1))).max(8)
}

pub fn ineq(s: &LabSettings) -> Result<IneqStudy> {
    let nt = s.ineq_resolution;
    let cases = (0..s.count(LabCheck::Ineq))
        .into_par_iter()
        .map(|case| {
            let mut r = rng(s.seed, case as u64);
            let n = 1 + case % 2;
            let (p, q) = INEQ_EXPONENTS[(case / 2) % INEQ_EXPONENTS.len()];
            let degree = r.random_range(1..=n + 1);
            let warping = RandomWarping::new(&mut r, n);
            let form = RandomForm::new(&mut r, n, degree);
            let cyl = warping.cylinder(s.a, s.end, nt, n, ineq_nx(nt, n))?;
            let (c, t) = (cyl.t(r.random_range(0..nt)), cyl.t(r.random_range(0..nt)));
            let check = check_lemma_ineq(&cyl, &form.sample(&cyl)?, c, t, p, q, s.margin)?;
            Ok(IneqCase {
                case,
                torus_dim: n,
                degree,
                p,
                q,
                c,
                t,
                lhs: check.lhs,
                rhs: check.rhs,
                holds: check.holds,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let held = cases.iter().filter(|c| c.holds).count();
    let worst_ratio = cases.iter().filter(|c| c.rhs > 0.0).map(|c| c.lhs / c.rhs).fold(0.0, f64::max);
    let failures: Vec<IneqCase> = cases.iter().filter(|c| !c.holds).cloned().collect();
    Ok(IneqStudy { count: cases.len(), held, margin: s.margin, worst_ratio, passed: failures.is_empty(), failures })
}

/// Relative gap between the general and the horizontal norm formulas.
pub fn norms(s: &LabSettings) -> Result<NormStudy> {
    let n = s.torus_dim;
    let res = s.norm_resolution;
    let gaps = (0..s.count(LabCheck::Norms))
        .into_par_iter()
        .map(|case| {
            let mut r = rng(s.seed, case as u64);
            let degree = r.random_range(0..=n);
            let p = r.random_range(1.0..4.0);
            let warping = RandomWarping::new(&mut r, n);
            let cyl = warping.cylinder(s.a, s.end, res + 1, n, res)?;
            let form = RandomForm::horizontal(&mut r, n, degree).sample(&cyl)?;
            let general = cyl.lp_norm(&form, p)?;
            let short = cyl.horizontal_lp_norm(&form, p)?;
            Ok(if general == 0.0 && short == 0.0 { 0.0 } else { (general - short).abs() / general.max(short) })
        })
        .collect::<Result<Vec<f64>>>()?;
    let max_relative_gap = gaps.iter().copied().fold(0.0, f64::max);
    Ok(NormStudy {
        count: gaps.len(),
        max_relative_gap,
        tolerance: s.norm_tolerance,
        passed: max_relative_gap <= s.norm_tolerance,
    })
}

pub fn ddzero(s: &LabSettings) -> Result<DdStudy> {
    let n = s.torus_dim;
    let res = s.dd_resolution;
    let rel = (0..s.count(LabCheck::Ddzero))
        .into_par_iter()
        .map(|case| {
            let mut r = rng(s.seed, case as u64);
            let degree = r.random_range(0..n);
            let warping = RandomWarping::new(&mut r, n);
            let cyl = warping.cylinder(s.a, s.end, res, n, res)?;
            let form = RandomForm::new(&mut r, n, degree).sample(&cyl)?;
            Ok(dd_residual(&cyl, &form)?.relative())
        })
        .collect::<Result<Vec<f64>>>()?;
    let max_relative = rel.iter().copied().fold(0.0, f64::max);
    Ok(DdStudy {
        count: rel.len(),
        resolution: res,
        max_relative,
        tolerance: s.dd_tolerance,
        passed: max_relative <= s.dd_tolerance,
    })
}
