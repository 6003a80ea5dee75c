//! Discrete truncated cylinders `[a, T] × T^n` over the flat torus, forms
//! split as `ω = ω_A + dt ∧ ω_B`, and the finite-difference operators used
//! to check the norm formulas and homotopy identities numerically.
//!
//! Arrays are stored t-major: entry `ti * P + xi` with `P = nx^n` points per
//! slice and `xi` the row-major index of the x multi-index.

pub mod checks;
mod ops;
pub mod random;
pub mod runs;

use std::f64::consts::TAU;

use itertools::Itertools;

use crate::error::{Error, Result};

pub use checks::{
    check_homotopy_base, check_homotopy_cylinder, check_lemma_ineq, dd_residual, find_asymp_sequence,
    fit_order, AsymptoticScan, DdCheck, LemmaCheck,
};

/// Sampler of one component, `(index, t, x) -> value`.
type ComponentFn<'a> = dyn Fn(&[usize], f64, &[f64]) -> f64 + 'a;

/// Strictly increasing `k`-tuples over `0..n` in lexicographic order.
pub fn multi_indices(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k > n {
        return Vec::new();
    }
    (0..n).combinations(k).collect()
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteCylinder {
    a: f64,
    end: f64,
    nt: usize,
    n: usize,
    nx: usize,
    h: Vec<f64>,
}

impl DiscreteCylinder {
    pub fn new(a: f64, end: f64, nt: usize, n: usize, nx: usize, h: Vec<f64>) -> Result<Self> {
        if !(a.is_finite() && end.is_finite() && a < end) {
            return Err(Error::InvalidCylinder(format!("need finite a < T, got [{a}, {end}]")));
        }
        if nt < 3 {
            return Err(Error::InvalidCylinder(format!("need at least 3 t-points, got {nt}")));
        }
        if n == 0 {
            return Err(Error::InvalidCylinder("torus dimension must be at least 1".into()));
        }
        if nx < 3 {
            return Err(Error::InvalidCylinder(format!("need at least 3 x-points per axis, got {nx}")));
        }
        let len = nt * nx.pow(n as u32);
        if h.len() != len {
            return Err(Error::InvalidCylinder(format!("expected {len} samples of h, got {}", h.len())));
        }
        if let Some(bad) = h.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::InvalidCylinder(format!("h must be positive and finite, found {bad}")));
        }
        Ok(DiscreteCylinder { a, end, nt, n, nx, h })
    }

    /// Samples `h(t, x)` on the grid.
    pub fn from_fn(
        a: f64,
        end: f64,
        nt: usize,
        n: usize,
        nx: usize,
        h: impl Fn(f64, &[f64]) -> f64,
    ) -> Result<Self> {
        if nt < 3 || n == 0 || nx < 3 || a.partial_cmp(&end) != Some(std::cmp::Ordering::Less) {
            return DiscreteCylinder::new(a, end, nt, n, nx, Vec::new());
        }
        let shell = DiscreteCylinder { a, end, nt, n, nx, h: Vec::new() };
        let points: Vec<Vec<f64>> = (0..shell.slice_len()).map(|xi| shell.x_point(xi)).collect();
        let mut samples = Vec::with_capacity(shell.len());
        for ti in 0..nt {
            let t = shell.t(ti);
            samples.extend(points.iter().map(|x| h(t, x)));
        }
        DiscreteCylinder::new(a, end, nt, n, nx, samples)
    }

    pub fn constant(a: f64, end: f64, nt: usize, n: usize, nx: usize, value: f64) -> Result<Self> {
        DiscreteCylinder::from_fn(a, end, nt, n, nx, |_, _| value)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn end(&self) -> f64 {
        self.end
    }

    pub fn nt(&self) -> usize {
        self.nt
    }

    /// Torus dimension.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn h(&self) -> &[f64] {
        &self.h
    }

    pub fn dt(&self) -> f64 {
        (self.end - self.a) / (self.nt - 1) as f64
    }

    pub fn dx(&self) -> f64 {
        TAU / self.nx as f64
    }

    pub fn t(&self, ti: usize) -> f64 {
        if ti + 1 == self.nt {
            self.end
        } else {
            self.a + ti as f64 * self.dt()
        }
    }

    /// Grid points per t-slice.
    pub fn slice_len(&self) -> usize {
        self.nx.pow(self.n as u32)
    }

    pub fn len(&self) -> usize {
        self.nt * self.slice_len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn x_point(&self, xi: usize) -> Vec<f64> {
        let mut x = vec![0.0; self.n];
        let mut rest = xi;
        for axis in (0..self.n).rev() {
            x[axis] = (rest % self.nx) as f64 * self.dx();
            rest /= self.nx;
        }
        x
    }

    pub fn cell_volume(&self) -> f64 {
        self.dx().powi(self.n as i32)
    }

    /// `|N| = (2π)^n`
    pub fn torus_volume(&self) -> f64 {
        TAU.powi(self.n as i32)
    }

    /// Index of the grid point at `t`.
    pub fn t_index(&self, t: f64) -> Result<usize> {
        self.check_range(t)?;
        let s = (t - self.a) / self.dt();
        let i = s.round();
        if (s - i).abs() > 1e-9 {
            return Err(Error::OffGrid { t });
        }
        Ok(i as usize)
    }

    fn check_range(&self, t: f64) -> Result<()> {
        let slack = 1e-12 * (self.end - self.a);
        if !(t >= self.a - slack && t <= self.end + slack) {
            return Err(Error::OutOfDomain { t, start: self.a, end: self.end });
        }
        Ok(())
    }

    /// Trapezoid weights of the t-grid.
    pub fn t_weights(&self) -> Vec<f64> {
        let dt = self.dt();
        (0..self.nt)
            .map(|i| if i == 0 || i + 1 == self.nt { dt / 2.0 } else { dt })
            .collect()
    }
}

/// A `k`-form `ω_A + dt ∧ ω_B` on a discrete cylinder. `a` holds one array
/// per `k`-multi-index, `b` one per `(k-1)`-multi-index.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteForm {
    degree: usize,
    a: Vec<Vec<f64>>,
    b: Vec<Vec<f64>>,
}

impl DiscreteForm {
    pub fn new(cyl: &DiscreteCylinder, degree: usize, a: Vec<Vec<f64>>, b: Vec<Vec<f64>>) -> Result<Self> {
        let n = cyl.n();
        if degree > n + 1 {
            return Err(Error::InvalidForm(format!("degree {degree} exceeds n + 1 = {}", n + 1)));
        }
        let want_a = binomial(n, degree);
        let want_b = if degree == 0 { 0 } else { binomial(n, degree - 1) };
        if a.len() != want_a || b.len() != want_b {
            return Err(Error::InvalidForm(format!(
                "degree {degree} on T^{n} needs {want_a} A- and {want_b} B-components, got {} and {}",
                a.len(),
                b.len()
            )));
        }
        if let Some(bad) = a.iter().chain(&b).find(|c| c.len() != cyl.len()) {
            return Err(Error::InvalidForm(format!(
                "component has {} samples, the grid has {}",
                bad.len(),
                cyl.len()
            )));
        }
        Ok(DiscreteForm { degree, a, b })
    }

    pub fn zero(cyl: &DiscreteCylinder, degree: usize) -> Result<Self> {
        let n = cyl.n();
        let na = binomial(n, degree);
        let nb = if degree == 0 { 0 } else { binomial(n, degree - 1) };
        DiscreteForm::new(cyl, degree, vec![vec![0.0; cyl.len()]; na], vec![vec![0.0; cyl.len()]; nb])
    }

    /// Samples `fa(I, t, x)` and `fb(J, t, x)` per multi-index.
    pub fn from_fn(
        cyl: &DiscreteCylinder,
        degree: usize,
        fa: impl Fn(&[usize], f64, &[f64]) -> f64,
        fb: impl Fn(&[usize], f64, &[f64]) -> f64,
    ) -> Result<Self> {
        let n = cyl.n();
        if degree > n + 1 {
            return Err(Error::InvalidForm(format!("degree {degree} exceeds n + 1 = {}", n + 1)));
        }
        let points: Vec<Vec<f64>> = (0..cyl.slice_len()).map(|xi| cyl.x_point(xi)).collect();
        let sample = |f: &ComponentFn<'_>, idx: &[usize]| {
            let mut out = Vec::with_capacity(cyl.len());
            for ti in 0..cyl.nt() {
                let t = cyl.t(ti);
                out.extend(points.iter().map(|x| f(idx, t, x)));
            }
            out
        };
        let a = multi_indices(n, degree).iter().map(|i| sample(&fa, i)).collect();
        let b = if degree == 0 {
            Vec::new()
        } else {
            multi_indices(n, degree - 1).iter().map(|j| sample(&fb, j)).collect()
        };
        DiscreteForm::new(cyl, degree, a, b)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn a(&self) -> &[Vec<f64>] {
        &self.a
    }

    pub fn b(&self) -> &[Vec<f64>] {
        &self.b
    }

    pub fn is_horizontal(&self) -> bool {
        self.b.iter().flatten().all(|v| *v == 0.0)
    }

    pub fn scaled(&self, c: f64) -> Self {
        let s = |v: &Vec<Vec<f64>>| v.iter().map(|c_| c_.iter().map(|x| c * x).collect()).collect();
        DiscreteForm { degree: self.degree, a: s(&self.a), b: s(&self.b) }
    }

    pub fn sub(&self, other: &DiscreteForm) -> Result<Self> {
        if self.degree != other.degree || self.a.len() != other.a.len() {
            return Err(Error::InvalidForm("subtracting forms of different shape".into()));
        }
        Ok(DiscreteForm { degree: self.degree, a: sub_all(&self.a, &other.a), b: sub_all(&self.b, &other.b) })
    }

    pub fn add(&self, other: &DiscreteForm) -> Result<Self> {
        self.sub(&other.scaled(-1.0))
    }

    pub fn max_abs(&self) -> f64 {
        self.a.iter().chain(&self.b).flatten().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Components in the coframe `(dt, dx^1, …, dx^n)`: axis 0 is `t`, axis
    /// `j + 1` is `x^j`. `dt ∧ dx^J` has index `[0, J + 1]`.
    pub fn full_components(&self, n: usize) -> Vec<(Vec<usize>, Vec<f64>)> {
        let shift = |idx: &[usize]| idx.iter().map(|i| i + 1).collect::<Vec<_>>();
        let mut out = Vec::new();
        if self.degree > 0 {
            for (j, c) in multi_indices(n, self.degree - 1).iter().zip(&self.b) {
                let mut idx = vec![0];
                idx.extend(shift(j));
                out.push((idx, c.clone()));
            }
        }
        for (i, c) in multi_indices(n, self.degree).iter().zip(&self.a) {
            out.push((shift(i), c.clone()));
        }
        out.sort_by(|x, y| x.0.cmp(&y.0));
        out
    }

    /// Inverse of [`DiscreteForm::full_components`].
    pub fn from_full_components(
        cyl: &DiscreteCylinder,
        degree: usize,
        comps: Vec<(Vec<usize>, Vec<f64>)>,
    ) -> Result<Self> {
        let mut form = DiscreteForm::zero(cyl, degree)?;
        let n = cyl.n();
        let a_idx = multi_indices(n, degree);
        let b_idx = if degree == 0 { Vec::new() } else { multi_indices(n, degree - 1) };
        for (idx, values) in comps {
            if idx.len() != degree || !idx.windows(2).all(|w| w[0] < w[1]) || idx.iter().any(|&i| i > n) {
                return Err(Error::InvalidForm(format!("bad multi-index {idx:?} for degree {degree}")));
            }
            if values.len() != cyl.len() {
                return Err(Error::InvalidForm("component length does not match the grid".into()));
            }
            if idx.first() == Some(&0) {
                let j: Vec<usize> = idx[1..].iter().map(|i| i - 1).collect();
                let pos = b_idx.iter().position(|x| *x == j).expect("valid index");
                form.b[pos] = values;
            } else {
                let i: Vec<usize> = idx.iter().map(|i| i - 1).collect();
                let pos = a_idx.iter().position(|x| *x == i).expect("valid index");
                form.a[pos] = values;
            }
        }
        Ok(form)
    }
}

fn sub_all(x: &[Vec<f64>], y: &[Vec<f64>]) -> Vec<Vec<f64>> {
    x.iter().zip(y).map(|(u, v)| u.iter().zip(v).map(|(p, q)| p - q).collect()).collect()
}

/// A form on the torus at a fixed `t`; one array of `nx^n` samples per
/// multi-index.
#[derive(Debug, Clone, PartialEq)]
pub struct BaseForm {
    degree: usize,
    components: Vec<Vec<f64>>,
}

impl BaseForm {
    pub fn new(cyl: &DiscreteCylinder, degree: usize, components: Vec<Vec<f64>>) -> Result<Self> {
        let want = binomial(cyl.n(), degree);
        if components.len() != want {
            return Err(Error::InvalidForm(format!(
                "degree {degree} on T^{} needs {want} components, got {}",
                cyl.n(),
                components.len()
            )));
        }
        if components.iter().any(|c| c.len() != cyl.slice_len()) {
            return Err(Error::InvalidForm("base component length does not match the x-grid".into()));
        }
        Ok(BaseForm { degree, components })
    }

    pub fn zero(cyl: &DiscreteCylinder, degree: usize) -> Self {
        BaseForm { degree, components: vec![vec![0.0; cyl.slice_len()]; binomial(cyl.n(), degree)] }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn components(&self) -> &[Vec<f64>] {
        &self.components
    }

    pub fn sub(&self, other: &BaseForm) -> Result<Self> {
        if self.degree != other.degree || self.components.len() != other.components.len() {
            return Err(Error::InvalidForm("subtracting base forms of different shape".into()));
        }
        Ok(BaseForm { degree: self.degree, components: sub_all(&self.components, &other.components) })
    }

    pub fn add(&self, other: &BaseForm) -> Result<Self> {
        let neg = BaseForm {
            degree: other.degree,
            components: other.components.iter().map(|c| c.iter().map(|v| -v).collect()).collect(),
        };
        self.sub(&neg)
    }

    pub fn max_abs(&self) -> f64 {
        self.components.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multi_index_order() {
        assert_eq!(multi_indices(3, 2), vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
        assert_eq!(multi_indices(2, 0), vec![Vec::<usize>::new()]);
        assert!(multi_indices(2, 3).is_empty());
        assert_eq!(binomial(5, 2), 10);
    }

    #[test]
    fn grid_geometry() {
        let cyl = DiscreteCylinder::constant(0.0, 2.0, 5, 2, 4, 1.0).unwrap();
        assert_eq!(cyl.len(), 5 * 16);
        assert_eq!(cyl.t(4), 2.0);
        assert_eq!(cyl.t_index(1.5).unwrap(), 3);
        assert!(matches!(cyl.t_index(1.2), Err(Error::OffGrid { .. })));
        assert!(matches!(cyl.t_index(2.5), Err(Error::OutOfDomain { .. })));
        assert_eq!(cyl.x_point(6), vec![TAU / 4.0, TAU / 2.0]);
        assert!(DiscreteCylinder::constant(0.0, 1.0, 5, 1, 4, 0.0).is_err());
    }

    #[test]
    fn full_components_round_trip() {
        let cyl = DiscreteCylinder::constant(0.0, 1.0, 4, 2, 4, 1.0).unwrap();
        let f = DiscreteForm::from_fn(&cyl, 2, |i, t, x| t + x[0] + i[0] as f64, |j, t, x| t * x[1] - j[0] as f64)
            .unwrap();
        let full = f.full_components(2);
        assert_eq!(full.iter().map(|c| c.0.clone()).collect::<Vec<_>>(), vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
        assert_eq!(DiscreteForm::from_full_components(&cyl, 2, full).unwrap(), f);
    }
}
