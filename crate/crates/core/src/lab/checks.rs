//! Residuals of the homotopy identities, the fiber-integral Hölder bound and
//! related diagnostics on discrete cylinders.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{DiscreteCylinder, DiscreteForm};

fn check_homotopy_degree(cyl: &DiscreteCylinder, form: &DiscreteForm) -> Result<()> {
    let k = form.degree();
    if k == 0 || k > cyl.n() {
        return Err(Error::InvalidForm(format!("homotopy checks need 1 <= k <= n, got k = {k}")));
    }
    Ok(())
}

/// `‖d_N ∫_c^t ω + ∫_c^t dω - (i_t^* ω - i_c^* ω)‖_{L²(N)}`; `c` and `t`
/// must be grid points.
pub fn check_homotopy_base(cyl: &DiscreteCylinder, form: &DiscreteForm, c: f64, t: f64) -> Result<f64> {
    check_homotopy_degree(cyl, form)?;
    let d_form = cyl.exterior_derivative(form)?;
    let lhs = cyl
        .base_exterior_derivative(&cyl.fiber_integral(form, c, t)?)?
        .add(&cyl.fiber_integral(&d_form, c, t)?)?;
    let rhs = cyl.slice_pullback(form, t)?.sub(&cyl.slice_pullback(form, c)?)?;
    cyl.base_lp_norm(&lhs.sub(&rhs)?, 2.0)
}

/// `‖d S_c ω + S_c dω - (ω - π^* i_c^* ω)‖_{L²}` over the whole cylinder;
/// `c` must be a grid point.
pub fn check_homotopy_cylinder(cyl: &DiscreteCylinder, form: &DiscreteForm, c: f64) -> Result<f64> {
    check_homotopy_degree(cyl, form)?;
    let lhs = cyl
        .exterior_derivative(&cyl.homotopy_s(form, c)?)?
        .add(&cyl.homotopy_s(&cyl.exterior_derivative(form)?, c)?)?;
    let rhs = form.sub(&cyl.base_pullback(&cyl.slice_pullback(form, c)?)?)?;
    cyl.lp_norm(&lhs.sub(&rhs)?, 2.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LemmaCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Compares `‖∫_c^t ω‖_{L^q(N)}` with
/// `|N|^{1/q-1/p} |∫_c^t f_{k-1,p}^{-p'}|^{1/p'} ‖ω‖_{L^p}`, where
/// `f_{k-1,p}(τ) = min_x h^{n/p-k+1}(τ, x)`. `holds` allows the relative
/// slack `margin`.
pub fn check_lemma_ineq(
    cyl: &DiscreteCylinder,
    form: &DiscreteForm,
    c: f64,
    t: f64,
    p: f64,
    q: f64,
    margin: f64,
) -> Result<LemmaCheck> {
    if !(p >= q && q > 1.0 && p.is_finite()) {
        return Err(Error::InvalidExponent(format!("need p >= q > 1, got p = {p}, q = {q}")));
    }
    let k = form.degree();
    if k == 0 {
        return Err(Error::InvalidForm("the fiber bound needs k >= 1".into()));
    }
    let lhs = cyl.base_lp_norm(&cyl.fiber_integral(form, c, t)?, q)?;
    let p_conj = p / (p - 1.0);
    let n = cyl.n() as f64;
    let f = cyl.min_power(n / p - k as f64 + 1.0);
    let g: Vec<f64> = f.iter().map(|v| v.powf(-p_conj)).collect();
    let inner = cyl.integrate_t(&g, c, t)?.abs();
    let rhs = cyl.torus_volume().powf(1.0 / q - 1.0 / p) * inner.powf(1.0 / p_conj) * cyl.lp_norm(form, p)?;
    Ok(LemmaCheck { lhs, rhs, holds: lhs <= rhs * (1.0 + margin) })
}

/// Slices `t_j` along which `‖i_{t_j}^* ω‖_{L^p(N)} f_{k,p}(t_j) |g(t_j)|^{-1/p}`
/// keeps decreasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticScan {
    pub points: Vec<f64>,
    pub ratios: Vec<f64>,
    /// The last ratio is zero or below the first one. On a truncation this
    /// is a diagnostic, not a proof.
    pub decays: bool,
}

/// Scans the t-grid for record lows of the slice ratio. Slices with
/// `g(t) = 0` are skipped; zero ratios always qualify.
pub fn find_asymp_sequence(
    cyl: &DiscreteCylinder,
    form: &DiscreteForm,
    g: impl Fn(f64) -> f64,
    p: f64,
) -> Result<AsymptoticScan> {
    let k = form.degree() as f64;
    let f = cyl.min_power(cyl.n() as f64 / p - k);
    let mut scan = AsymptoticScan { points: Vec::new(), ratios: Vec::new(), decays: false };
    let mut best = f64::INFINITY;
    let mut seen = false;
    for (ti, f_t) in f.iter().enumerate() {
        let t = cyl.t(ti);
        let gv = g(t);
        if gv == 0.0 || !gv.is_finite() {
            continue;
        }
        seen = true;
        let slice = cyl.base_lp_norm(&cyl.slice_pullback(form, t)?, p)?;
        let ratio = slice * f_t * gv.abs().powf(-1.0 / p);
        if ratio == 0.0 || ratio < best {
            best = ratio;
            scan.points.push(t);
            scan.ratios.push(ratio);
        }
    }
    if !seen {
        return Err(Error::Evaluation { t: cyl.a(), reason: "g vanishes on the whole grid".into() });
    }
    if let (Some(first), Some(last)) = (scan.ratios.first(), scan.ratios.last()) {
        scan.decays = *last == 0.0 || last < first;
    }
    Ok(scan)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DdCheck {
    /// `max |(ddω)_I|` over all components and grid points.
    pub max_abs: f64,
    /// `max |ω| / (Δt Δx)`, the size of the mixed second differences.
    pub scale: f64,
}

impl DdCheck {
    pub fn relative(&self) -> f64 {
        if self.scale == 0.0 {
            self.max_abs
        } else {
            self.max_abs / self.scale
        }
    }
}

pub fn dd_residual(cyl: &DiscreteCylinder, form: &DiscreteForm) -> Result<DdCheck> {
    if form.degree() + 1 > cyl.n() {
        return Err(Error::InvalidForm(format!("dd needs k <= n - 1, got k = {}", form.degree())));
    }
    let dd = cyl.exterior_derivative(&cyl.exterior_derivative(form)?)?;
    Ok(DdCheck { max_abs: dd.max_abs(), scale: form.max_abs() / (cyl.dt() * cyl.dx()) })
}

/// Least-squares slope of `-ln r` against `ln N`.
pub fn fit_order(sizes: &[usize], residuals: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = sizes
        .iter()
        .zip(residuals)
        .filter(|(_, r)| **r > 0.0)
        .map(|(n, r)| ((*n as f64).ln(), -r.ln()))
        .collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let m = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / m, sy / m);
    let (num, den) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + (x - mx) * (y - my), b + (x - mx).powi(2)));
    num / den
}
