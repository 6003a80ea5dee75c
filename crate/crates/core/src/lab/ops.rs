use crate::error::{Error, Result};

use super::{binomial, multi_indices, BaseForm, DiscreteCylinder, DiscreteForm};

impl DiscreteCylinder {
    fn check_form(&self, form: &DiscreteForm) -> Result<()> {
        let (n, k) = (self.n(), form.degree());
        let want_b = if k == 0 { 0 } else { binomial(n, k - 1) };
        let ok = k <= n + 1
            && form.a().len() == binomial(n, k)
            && form.b().len() == want_b
            && form.a().iter().chain(form.b()).all(|c| c.len() == self.len());
        if !ok {
            return Err(Error::InvalidForm("form does not live on this cylinder".into()));
        }
        Ok(())
    }

    /// `[h^{-2k} |ω_A|² + h^{-2(k-1)} |ω_B|²]^{1/2}` at one grid point.
    pub fn pointwise_modulus(&self, form: &DiscreteForm, ti: usize, xi: usize) -> Result<f64> {
        self.check_form(form)?;
        if ti >= self.nt() || xi >= self.slice_len() {
            return Err(Error::InvalidForm(format!("grid index ({ti}, {xi}) out of range")));
        }
        let at = ti * self.slice_len() + xi;
        let k = form.degree() as i32;
        let h = self.h()[at];
        let sa: f64 = form.a().iter().map(|c| c[at] * c[at]).sum();
        let sb: f64 = form.b().iter().map(|c| c[at] * c[at]).sum();
        Ok((h.powi(-2 * k) * sa + h.powi(-2 * (k - 1)) * sb).sqrt())
    }

    /// `L^p` norm with weights `h^{2(n/p-k)}` on `|ω_A|²` and `h^{2(n/p-k+1)}`
    /// on `|ω_B|²`; trapezoid in `t`, rectangle rule in `x`.
    pub fn lp_norm(&self, form: &DiscreteForm, p: f64) -> Result<f64> {
        self.check_form(form)?;
        check_p(p)?;
        let (n, k) = (self.n() as f64, form.degree() as f64);
        let ea = 2.0 * (n / p - k);
        let eb = 2.0 * (n / p - k + 1.0);
        let m = self.slice_len();
        let w = self.t_weights();
        let mut total = 0.0;
        for (ti, wt) in w.iter().enumerate() {
            let mut slice = 0.0;
            for xi in 0..m {
                let at = ti * m + xi;
                let h = self.h()[at];
                let sa: f64 = form.a().iter().map(|c| c[at] * c[at]).sum();
                let sb: f64 = form.b().iter().map(|c| c[at] * c[at]).sum();
                let q = h.powf(ea) * sa + h.powf(eb) * sb;
                slice += q.powf(p / 2.0);
            }
            total += wt * slice;
        }
        Ok((total * self.cell_volume()).powf(1.0 / p))
    }

    /// `L^p` norm of a horizontal form as `∫∫ |ω|^p h^{n-kp}`.
    pub fn horizontal_lp_norm(&self, form: &DiscreteForm, p: f64) -> Result<f64> {
        self.check_form(form)?;
        check_p(p)?;
        if !form.is_horizontal() {
            return Err(Error::InvalidForm("form has a dt-component".into()));
        }
        let weight = self.n() as f64 - form.degree() as f64 * p;
        let m = self.slice_len();
        let w = self.t_weights();
        let mut total = 0.0;
        for (ti, wt) in w.iter().enumerate() {
            let slice: f64 = (0..m)
                .map(|xi| {
                    let at = ti * m + xi;
                    let modulus = form.a().iter().map(|c| c[at] * c[at]).sum::<f64>().sqrt();
                    modulus.powf(p) * self.h()[at].powf(weight)
                })
                .sum();
            total += wt * slice;
        }
        Ok((total * self.cell_volume()).powf(1.0 / p))
    }

    /// `L^p(N)` norm of a form on the flat torus.
    pub fn base_lp_norm(&self, base: &BaseForm, p: f64) -> Result<f64> {
        check_p(p)?;
        let m = self.slice_len();
        if base.components().iter().any(|c| c.len() != m) {
            return Err(Error::InvalidForm("base form does not live on this torus".into()));
        }
        let total: f64 = (0..m)
            .map(|xi| base.components().iter().map(|c| c[xi] * c[xi]).sum::<f64>().sqrt().powf(p))
            .sum();
        Ok((total * self.cell_volume()).powf(1.0 / p))
    }

    /// Periodic centered difference along x-axis `axis`, applied slice by slice.
    fn diff_x(&self, f: &[f64], axis: usize) -> Vec<f64> {
        let m = self.slice_len();
        let nx = self.nx();
        let stride = nx.pow((self.n() - 1 - axis) as u32);
        let scale = 1.0 / (2.0 * self.dx());
        let mut out = vec![0.0; f.len()];
        for (s, chunk) in f.chunks(m).enumerate() {
            let base = s * m;
            for xi in 0..m {
                let coord = (xi / stride) % nx;
                let up = if coord + 1 == nx { xi + stride - nx * stride } else { xi + stride };
                let down = if coord == 0 { xi + nx * stride - stride } else { xi - stride };
                out[base + xi] = (chunk[up] - chunk[down]) * scale;
            }
        }
        out
    }

    /// Centered difference in t with second-order one-sided ends.
    fn diff_t(&self, f: &[f64]) -> Vec<f64> {
        let m = self.slice_len();
        let nt = self.nt();
        let inv = 1.0 / (2.0 * self.dt());
        let mut out = vec![0.0; f.len()];
        let at = |ti: usize, xi: usize| f[ti * m + xi];
        for xi in 0..m {
            out[xi] = (-3.0 * at(0, xi) + 4.0 * at(1, xi) - at(2, xi)) * inv;
            for ti in 1..nt - 1 {
                out[ti * m + xi] = (at(ti + 1, xi) - at(ti - 1, xi)) * inv;
            }
            let l = nt - 1;
            out[l * m + xi] = (3.0 * at(l, xi) - 4.0 * at(l - 1, xi) + at(l - 2, xi)) * inv;
        }
        out
    }

    /// `d_N` on components of degree `k` (any number of stacked slices).
    fn d_torus(&self, comps: &[Vec<f64>], k: usize, len: usize) -> Vec<Vec<f64>> {
        let n = self.n();
        let source = multi_indices(n, k);
        let mut out = Vec::new();
        for target in multi_indices(n, k + 1) {
            let mut acc = vec![0.0; len];
            for (pos, &j) in target.iter().enumerate() {
                let rest: Vec<usize> = target.iter().copied().filter(|&i| i != j).collect();
                let src = source.iter().position(|s| *s == rest).expect("face of an index");
                let dj = self.diff_x(&comps[src], j);
                let sign = if pos % 2 == 0 { 1.0 } else { -1.0 };
                acc.iter_mut().zip(&dj).for_each(|(a, d)| *a += sign * d);
            }
            out.push(acc);
        }
        out
    }

    /// `dω = d_N ω_A + dt ∧ (∂_t ω_A - d_N ω_B)`.
    pub fn exterior_derivative(&self, form: &DiscreteForm) -> Result<DiscreteForm> {
        self.check_form(form)?;
        let k = form.degree();
        if k > self.n() {
            return Err(Error::InvalidForm(format!("d of a degree {k} form leaves the complex")));
        }
        let len = self.len();
        let a = self.d_torus(form.a(), k, len);
        let mut b: Vec<Vec<f64>> = form.a().iter().map(|c| self.diff_t(c)).collect();
        if k > 0 {
            for (bi, dn) in b.iter_mut().zip(self.d_torus(form.b(), k - 1, len)) {
                bi.iter_mut().zip(&dn).for_each(|(x, d)| *x -= d);
            }
        }
        DiscreteForm::new(self, k + 1, a, b)
    }

    /// `d_N` of a form on the torus.
    pub fn base_exterior_derivative(&self, base: &BaseForm) -> Result<BaseForm> {
        if base.degree() >= self.n() {
            return Ok(BaseForm::zero(self, base.degree() + 1));
        }
        let comps = self.d_torus(base.components(), base.degree(), self.slice_len());
        BaseForm::new(self, base.degree() + 1, comps)
    }

    /// Cumulative trapezoid `∫_a^{t_i} f` for every grid `t_i`.
    fn cumulative(&self, f: &[f64]) -> Vec<f64> {
        let m = self.slice_len();
        let half = self.dt() / 2.0;
        let mut out = vec![0.0; f.len()];
        for ti in 1..self.nt() {
            for xi in 0..m {
                let at = ti * m + xi;
                out[at] = out[at - m] + half * (f[at - m] + f[at]);
            }
        }
        out
    }

    /// `∫_a^t f` for each x from the cumulative table; off-grid `t` uses the
    /// trapezoid on the linear interpolant of the last cell.
    fn primitive_at(&self, f: &[f64], cum: &[f64], t: f64) -> Vec<f64> {
        let m = self.slice_len();
        let s = ((t - self.a()) / self.dt()).clamp(0.0, (self.nt() - 1) as f64);
        let i = (s.floor() as usize).min(self.nt() - 2);
        let frac = s - i as f64;
        let dt = self.dt();
        (0..m)
            .map(|xi| {
                let lo = f[i * m + xi];
                let hi = f[(i + 1) * m + xi];
                let mid = lo + frac * (hi - lo);
                cum[i * m + xi] + frac * dt * (lo + mid) / 2.0
            })
            .collect()
    }

    /// `∫_c^t ω = ∫_c^t ω_B(τ) dτ`, a `(k-1)`-form on the torus.
    pub fn fiber_integral(&self, form: &DiscreteForm, c: f64, t: f64) -> Result<BaseForm> {
        self.check_form(form)?;
        if form.degree() == 0 {
            return Err(Error::InvalidForm("fiber integral needs degree >= 1".into()));
        }
        self.check_range(c)?;
        self.check_range(t)?;
        let comps = form
            .b()
            .iter()
            .map(|f| {
                let cum = self.cumulative(f);
                let upper = self.primitive_at(f, &cum, t);
                let lower = self.primitive_at(f, &cum, c);
                upper.iter().zip(&lower).map(|(u, l)| u - l).collect()
            })
            .collect();
        BaseForm::new(self, form.degree() - 1, comps)
    }

    /// `(S_c ω)(t) = ∫_c^t ω` as a horizontal `(k-1)`-form on the cylinder.
    pub fn homotopy_s(&self, form: &DiscreteForm, c: f64) -> Result<DiscreteForm> {
        self.check_form(form)?;
        if form.degree() == 0 {
            return Err(Error::InvalidForm("S_c needs degree >= 1".into()));
        }
        self.check_range(c)?;
        let m = self.slice_len();
        let a = form
            .b()
            .iter()
            .map(|f| {
                let mut cum = self.cumulative(f);
                let at_c = self.primitive_at(f, &cum, c);
                for chunk in cum.chunks_mut(m) {
                    chunk.iter_mut().zip(&at_c).for_each(|(v, c0)| *v -= c0);
                }
                cum
            })
            .collect();
        let k = form.degree() - 1;
        let nb = if k == 0 { 0 } else { multi_indices(self.n(), k - 1).len() };
        DiscreteForm::new(self, k, a, vec![vec![0.0; self.len()]; nb])
    }

    /// `i_t^* ω = ω_A(t)`; `t` must be a grid point.
    pub fn slice_pullback(&self, form: &DiscreteForm, t: f64) -> Result<BaseForm> {
        self.check_form(form)?;
        let ti = self.t_index(t)?;
        let m = self.slice_len();
        let comps = form.a().iter().map(|c| c[ti * m..(ti + 1) * m].to_vec()).collect();
        BaseForm::new(self, form.degree(), comps)
    }

    /// `π^* θ`: the t-constant extension, with no dt-part.
    pub fn base_pullback(&self, base: &BaseForm) -> Result<DiscreteForm> {
        BaseForm::new(self, base.degree(), base.components().to_vec())?;
        let a = base.components().iter().map(|c| c.repeat(self.nt())).collect();
        let k = base.degree();
        let nb = if k == 0 { 0 } else { multi_indices(self.n(), k - 1).len() };
        DiscreteForm::new(self, k, a, vec![vec![0.0; self.len()]; nb])
    }

    /// `min_x h^{e}(t_i, x)` per grid `t_i`.
    pub(crate) fn min_power(&self, e: f64) -> Vec<f64> {
        self.h()
            .chunks(self.slice_len())
            .map(|s| s.iter().map(|h| h.powf(e)).fold(f64::INFINITY, f64::min))
            .collect()
    }

    /// `∫_c^t g` for a function sampled on the t-grid.
    pub(crate) fn integrate_t(&self, g: &[f64], c: f64, t: f64) -> Result<f64> {
        self.check_range(c)?;
        self.check_range(t)?;
        let cum = self.cumulative_scalar(g);
        Ok(self.primitive_scalar(g, &cum, t) - self.primitive_scalar(g, &cum, c))
    }

    fn cumulative_scalar(&self, g: &[f64]) -> Vec<f64> {
        let half = self.dt() / 2.0;
        let mut out = vec![0.0; g.len()];
        for i in 1..g.len() {
            out[i] = out[i - 1] + half * (g[i - 1] + g[i]);
        }
        out
    }

    fn primitive_scalar(&self, g: &[f64], cum: &[f64], t: f64) -> f64 {
        let s = ((t - self.a()) / self.dt()).clamp(0.0, (self.nt() - 1) as f64);
        let i = (s.floor() as usize).min(self.nt() - 2);
        let frac = s - i as f64;
        let mid = g[i] + frac * (g[i + 1] - g[i]);
        cum[i] + frac * self.dt() * (g[i] + mid) / 2.0
    }
}

fn check_p(p: f64) -> Result<()> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::InvalidExponent(format!("need p >= 1, got {p}")));
    }
    Ok(())
}
