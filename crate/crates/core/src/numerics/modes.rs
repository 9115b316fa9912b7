//! Per-mode radial propagation in logarithmic time `s = ln t`.
//!
//! Both cosmological models reduce, mode by mode, to
//! `G(s) = -e^{-a s} int dsigma e^{b sigma} S_nu(s - sigma) f(sigma)`
//! with `S_nu(x) = sinh(nu x) / nu`. The kernel separates as
//! `S(s - sigma) = S(s')C(sigma') - C(s')S(sigma')` with coordinates shifted to
//! a reference point, so retarded/advanced integrals cost O(Nt) per mode.

use num_complex::Complex64;

use super::quadrature::{simpson_weights, CumulativeRule};
use super::stencil::UniformDerivative;
use crate::error::{Error, Result};

/// Exponents of the time measure: the Green integral is
/// `-t^{-a} int dsigma e^{b sigma} ...` and pairings use `int ds e^{b s}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialMeasure {
    pub b: f64,
    pub a: f64,
}

impl RadialMeasure {
    pub const FRW4: Self = Self { b: 3.0, a: 1.0 };
    pub const CIRCLE2: Self = Self { b: 2.0, a: 0.0 };

    /// Exponent of the volume element `int dt t^{D-1} = int ds e^{(a+b) s}`.
    pub fn volume_exponent(&self) -> f64 {
        self.a + self.b
    }

    /// `nu^2` of the homogeneous solutions `e^{(-a +- nu) s}` for spectral
    /// mass term `q` (`k^2 + 6 xi` or `n^2`).
    pub fn nu2(&self, q: f64) -> f64 {
        self.a * self.a - q
    }
}

/// Mode wave operator `-e^{-2s} (f'' + 2a f' + q f)` on a log-uniform grid:
/// fourth-order centered differences, one-sided windows at the ends.
#[derive(Debug, Clone)]
pub struct WaveStencil {
    d1: UniformDerivative,
    d2: UniformDerivative,
}

impl WaveStencil {
    pub const MIN_POINTS: usize = 5;

    pub fn new(n: usize, ds: f64) -> Result<Self> {
        if n < Self::MIN_POINTS {
            return Err(Error::Stencil { needed: Self::MIN_POINTS, got: n });
        }
        Ok(Self {
            d1: UniformDerivative::new(n, ds, 1, 5)?,
            d2: UniformDerivative::with_edges(n, ds, 2, 5, 6)?,
        })
    }

    pub fn apply(&self, s: &[f64], m: RadialMeasure, q: f64, col: &[Complex64]) -> Vec<Complex64> {
        let f1 = self.d1.apply(col);
        let f2 = self.d2.apply(col);
        (0..col.len())
            .map(|i| -(f2[i] + f1[i] * (2.0 * m.a) + col[i] * q) * (-2.0 * s[i]).exp())
            .collect()
    }
}

const SERIES_SWITCH: f64 = 1e-3;

/// `sinh(nu x)/nu` for `nu^2 = nu2`, continued through `nu2 <= 0`.
pub fn sinh_over(nu2: f64, x: f64) -> f64 {
    let z = nu2 * x * x;
    if z.abs() < SERIES_SWITCH {
        x * (1.0 + z / 6.0 * (1.0 + z / 20.0 * (1.0 + z / 42.0)))
    } else if nu2 > 0.0 {
        let nu = nu2.sqrt();
        (nu * x).sinh() / nu
    } else {
        let mu = (-nu2).sqrt();
        (mu * x).sin() / mu
    }
}

/// `cosh(nu x)` for `nu^2 = nu2`, continued through `nu2 <= 0`.
pub fn cosh_of(nu2: f64, x: f64) -> f64 {
    let z = nu2 * x * x;
    if z.abs() < SERIES_SWITCH {
        1.0 + z / 2.0 * (1.0 + z / 12.0 * (1.0 + z / 30.0))
    } else if nu2 > 0.0 {
        (nu2.sqrt() * x).cosh()
    } else {
        ((-nu2).sqrt() * x).cos()
    }
}

/// Which causal inverse to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Causal {
    Retarded,
    Advanced,
}

/// Quadrature data on a log-uniform time grid.
#[derive(Debug, Clone)]
pub struct TimeQuadrature {
    pub s: Vec<f64>,
    pub s_ref: f64,
    pub ds: f64,
    pub simpson: Vec<f64>,
    pub cumulative: CumulativeRule,
}

impl TimeQuadrature {
    pub fn new(s: Vec<f64>, ds: f64) -> Self {
        let n = s.len();
        let s_ref = 0.5 * (s[0] + s[n - 1]);
        Self {
            simpson: simpson_weights(n, ds),
            cumulative: CumulativeRule::new(n, ds),
            s,
            s_ref,
            ds,
        }
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    fn basis(&self, nu2: f64) -> (Vec<f64>, Vec<f64>) {
        let sv = self.s.iter().map(|&s| sinh_over(nu2, s - self.s_ref)).collect();
        let cv = self.s.iter().map(|&s| cosh_of(nu2, s - self.s_ref)).collect();
        (sv, cv)
    }
}

/// Retarded or advanced Green integral of one mode column.
pub fn green_column(
    q: &TimeQuadrature,
    m: RadialMeasure,
    nu2: f64,
    src: &[Complex64],
    which: Causal,
) -> Vec<Complex64> {
    let (sv, cv) = q.basis(nu2);
    let weight: Vec<f64> = q.s.iter().map(|&s| (m.b * s).exp()).collect();
    let fc: Vec<Complex64> = (0..q.len()).map(|i| src[i] * (weight[i] * cv[i])).collect();
    let fs: Vec<Complex64> = (0..q.len()).map(|i| src[i] * (weight[i] * sv[i])).collect();
    let mut cum_c = q.cumulative.integrate(&fc);
    let mut cum_s = q.cumulative.integrate(&fs);
    if which == Causal::Advanced {
        let last = q.len() - 1;
        let (tc, ts) = (cum_c[last], cum_s[last]);
        cum_c.iter_mut().for_each(|v| *v -= tc);
        cum_s.iter_mut().for_each(|v| *v -= ts);
    }
    (0..q.len())
        .map(|i| (cum_c[i] * sv[i] - cum_s[i] * cv[i]) * (-(-m.a * q.s[i]).exp()))
        .collect()
}

/// Projections `int ds e^{b s} (S, C)(s) f(s)` of a column onto the two
/// homogeneous solutions; all pairings are bilinear in these.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    pub s: Complex64,
    pub c: Complex64,
}

pub fn moments(q: &TimeQuadrature, m: RadialMeasure, nu2: f64, col: &[Complex64]) -> Moments {
    let mut out = Moments::default();
    for i in 0..q.len() {
        let s = q.s[i];
        let w = q.simpson[i] * (m.b * s).exp();
        let x = s - q.s_ref;
        out.s += col[i] * (w * sinh_over(nu2, x));
        out.c += col[i] * (w * cosh_of(nu2, x));
    }
    out
}

/// Fundamental-solution pairing `-int int f(s) Delta(s, sigma) g(sigma)` for one
/// mode, in terms of the moments of `f` (at `-k`) and `g` (at `k`).
pub fn pair(f: &Moments, g: &Moments) -> Complex64 {
    -(f.s * g.c - f.c * g.s)
}
