//! Seeded trigonometric test data: forms whose components are short sums of
//! products `c cos(ν t + φ) Π_j cos(m_j x_j + ψ_j)` with frequencies at most
//! [`MAX_FREQUENCY`] and coefficients in `[-1, 1]`.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;

use super::{multi_indices, DiscreteCylinder, DiscreteForm};

pub const MAX_FREQUENCY: u32 = 4;
pub const TERMS: usize = 2;

/// Stream `stream` of the generator seeded with `seed`.
pub fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

#[derive(Debug, Clone, PartialEq)]
struct Term {
    coeff: f64,
    t_freq: f64,
    t_phase: f64,
    x_freqs: Vec<f64>,
    x_phases: Vec<f64>,
}

/// A trigonometric polynomial in `(t, x) ∈ ℝ × T^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigPoly {
    terms: Vec<Term>,
}

impl TrigPoly {
    pub fn random<R: Rng>(rng: &mut R, n: usize, terms: usize) -> Self {
        let freq = |r: &mut R| r.random_range(0..=MAX_FREQUENCY) as f64;
        let terms = (0..terms)
            .map(|_| Term {
                coeff: rng.random_range(-1.0..=1.0),
                t_freq: freq(rng),
                t_phase: rng.random_range(0.0..TAU),
                x_freqs: (0..n).map(|_| freq(rng)).collect(),
                x_phases: (0..n).map(|_| rng.random_range(0.0..TAU)).collect(),
            })
            .collect();
        TrigPoly { terms }
    }

    pub fn eval(&self, t: f64, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|s| {
                let spatial: f64 =
                    s.x_freqs.iter().zip(&s.x_phases).zip(x).map(|((m, ph), xj)| (m * xj + ph).cos()).product();
                s.coeff * (s.t_freq * t + s.t_phase).cos() * spatial
            })
            .sum()
    }

    /// Samples on the cylinder grid, factor by factor.
    pub fn sample(&self, cyl: &DiscreteCylinder) -> Vec<f64> {
        let (nt, nx, n) = (cyl.nt(), cyl.nx(), cyl.n());
        let m = cyl.slice_len();
        let mut out = vec![0.0; cyl.len()];
        for s in &self.terms {
            let tf: Vec<f64> = (0..nt).map(|i| s.coeff * (s.t_freq * cyl.t(i) + s.t_phase).cos()).collect();
            let axes: Vec<Vec<f64>> = (0..n)
                .map(|j| (0..nx).map(|i| (s.x_freqs[j] * i as f64 * cyl.dx() + s.x_phases[j]).cos()).collect())
                .collect();
            let mut spatial = vec![1.0; m];
            for (xi, v) in spatial.iter_mut().enumerate() {
                let mut rest = xi;
                for axis in (0..n).rev() {
                    *v *= axes[axis][rest % nx];
                    rest /= nx;
                }
            }
            for (ti, f) in tf.iter().enumerate() {
                let row = &mut out[ti * m..(ti + 1) * m];
                row.iter_mut().zip(&spatial).for_each(|(o, sp)| *o += f * sp);
            }
        }
        out
    }
}

/// Analytic description of a random `k`-form, sampled on any grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomForm {
    pub degree: usize,
    pub a: Vec<TrigPoly>,
    pub b: Vec<TrigPoly>,
}

impl RandomForm {
    pub fn new<R: Rng>(rng: &mut R, n: usize, degree: usize) -> Self {
        let na = multi_indices(n, degree).len();
        let nb = if degree == 0 { 0 } else { multi_indices(n, degree - 1).len() };
        RandomForm {
            degree,
            a: (0..na).map(|_| TrigPoly::random(rng, n, TERMS)).collect(),
            b: (0..nb).map(|_| TrigPoly::random(rng, n, TERMS)).collect(),
        }
    }

    /// A form with no dt-part.
    pub fn horizontal<R: Rng>(rng: &mut R, n: usize, degree: usize) -> Self {
        let mut f = RandomForm::new(rng, n, degree);
        f.b.clear();
        f
    }

    pub fn sample(&self, cyl: &DiscreteCylinder) -> Result<DiscreteForm> {
        let a = self.a.iter().map(|p| p.sample(cyl)).collect();
        let b = if self.degree == 0 {
            Vec::new()
        } else if self.b.is_empty() {
            vec![vec![0.0; cyl.len()]; multi_indices(cyl.n(), self.degree - 1).len()]
        } else {
            self.b.iter().map(|p| p.sample(cyl)).collect()
        };
        DiscreteForm::new(cyl, self.degree, a, b)
    }
}

/// Positive warping `h = exp(0.3 · trig)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomWarping(TrigPoly);

impl RandomWarping {
    pub const AMPLITUDE: f64 = 0.3;

    pub fn new<R: Rng>(rng: &mut R, n: usize) -> Self {
        RandomWarping(TrigPoly::random(rng, n, TERMS))
    }

    pub fn eval(&self, t: f64, x: &[f64]) -> f64 {
        (Self::AMPLITUDE * self.0.eval(t, x)).exp()
    }

    pub fn cylinder(&self, a: f64, end: f64, nt: usize, n: usize, nx: usize) -> Result<DiscreteCylinder> {
        let shell = DiscreteCylinder::constant(a, end, nt, n, nx, 1.0)?;
        let h = self.0.sample(&shell).into_iter().map(|v| (Self::AMPLITUDE * v).exp()).collect();
        DiscreteCylinder::new(a, end, nt, n, nx, h)
    }
}
