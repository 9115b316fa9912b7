//! Analytic test functions: smooth compactly supported bumps in time, product
//! profiles in space, and their exact gradients.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frw4::{GridSpec, LatticeFft, SpectralField};
use crate::geometry::AffineField;

/// `exp(-1/(1-u^2))` on `|u| < 1`, zero elsewhere.
pub fn bump(u: f64) -> f64 {
    if u.abs() < 1.0 {
        (-1.0 / (1.0 - u * u)).exp()
    } else {
        0.0
    }
}

pub fn bump_derivative(u: f64) -> f64 {
    if u.abs() < 1.0 {
        let d = 1.0 - u * u;
        -2.0 * u / (d * d) * bump(u)
    } else {
        0.0
    }
}

/// Bump in `s = ln t` centered at `s_center` with half-width `s_half`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeBump {
    pub s_center: f64,
    pub s_half: f64,
}

impl TimeBump {
    /// Bump supported on `[t0, t1]`.
    pub fn between(t0: f64, t1: f64) -> Result<Self> {
        if !(t0 > 0.0 && t1 > t0) {
            return Err(Error::InvalidInput(format!("time support [{t0}, {t1}] is invalid")));
        }
        let (a, b) = (t0.ln(), t1.ln());
        Ok(Self { s_center: 0.5 * (a + b), s_half: 0.5 * (b - a) })
    }

    pub fn value(&self, t: f64) -> f64 {
        bump((t.ln() - self.s_center) / self.s_half)
    }

    /// `d/dt`.
    pub fn dt(&self, t: f64) -> f64 {
        bump_derivative((t.ln() - self.s_center) / self.s_half) / (self.s_half * t)
    }

    pub fn support(&self) -> (f64, f64) {
        ((self.s_center - self.s_half).exp(), (self.s_center + self.s_half).exp())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Profile {
    Bump { center: f64, half_width: f64 },
    Gaussian { center: f64, sigma: f64 },
    Constant,
}

impl Profile {
    pub fn value(&self, x: f64) -> f64 {
        match *self {
            Profile::Bump { center, half_width } => bump((x - center) / half_width),
            Profile::Gaussian { center, sigma } => (-0.5 * ((x - center) / sigma).powi(2)).exp(),
            Profile::Constant => 1.0,
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match *self {
            Profile::Bump { center, half_width } => bump_derivative((x - center) / half_width) / half_width,
            Profile::Gaussian { center, sigma } => -(x - center) / (sigma * sigma) * self.value(x),
            Profile::Constant => 0.0,
        }
    }

    /// Closed support, if compact.
    pub fn support(&self) -> Option<(f64, f64)> {
        match *self {
            Profile::Bump { center, half_width } => Some((center - half_width, center + half_width)),
            _ => None,
        }
    }
}

/// `phi(t, x) = A T(t) P_1(x^1) P_2(x^2) P_3(x^3)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BumpSource {
    pub amplitude: f64,
    pub time: TimeBump,
    pub profiles: [Profile; 3],
}

impl BumpSource {
    pub fn new(time: TimeBump, profiles: [Profile; 3]) -> Self {
        Self { amplitude: 1.0, time, profiles }
    }

    fn spatial(&self, x: [f64; 3]) -> f64 {
        (0..3).map(|a| self.profiles[a].value(x[a])).product()
    }

    pub fn value(&self, t: f64, x: [f64; 3]) -> f64 {
        self.amplitude * self.time.value(t) * self.spatial(x)
    }

    /// `(d_t, d_1, d_2, d_3) phi`.
    pub fn gradient(&self, t: f64, x: [f64; 3]) -> [f64; 4] {
        let p: [f64; 3] = [0, 1, 2].map(|a| self.profiles[a].value(x[a]));
        let dp: [f64; 3] = [0, 1, 2].map(|a| self.profiles[a].derivative(x[a]));
        let tv = self.amplitude * self.time.value(t);
        [
            self.amplitude * self.time.dt(t) * p[0] * p[1] * p[2],
            tv * dp[0] * p[1] * p[2],
            tv * p[0] * dp[1] * p[2],
            tv * p[0] * p[1] * dp[2],
        ]
    }

    /// Spectral field; the spatial transform is computed once and scaled by
    /// the time profile.
    pub fn to_field(&self, grid: &GridSpec) -> SpectralField {
        let l = &grid.lattice;
        let mut spec: Vec<Complex64> = (0..l.size())
            .map(|i| Complex64::new(self.spatial(l.x(i)), 0.0))
            .collect();
        LatticeFft::new(l).to_spectral(&mut spec);
        let nk = l.size();
        let values = (0..grid.len())
            .map(|i| spec[i % nk] * (self.amplitude * self.time.value(grid.time.t(i / nk))))
            .collect();
        SpectralField { grid: grid.clone(), values, real: true }
    }

    /// `v^mu d_mu phi` for an affine field in coordinates `(t, x^1, x^2, x^3)`.
    pub fn lie_derivative_field(&self, grid: &GridSpec, v: &AffineField) -> Result<SpectralField> {
        if v.dim != 4 {
            return Err(Error::InvalidInput("vector field must be four-dimensional".into()));
        }
        Ok(SpectralField::from_fn(grid, |t, x| {
            let p = [t, x[0], x[1], x[2]];
            let vv = v.eval(&p);
            let g = self.gradient(t, x);
            (0..4).map(|m| vv[m] * g[m]).sum()
        }))
    }

    /// Support along the twist axis, if compact.
    pub fn x1_support(&self) -> Option<(f64, f64)> {
        self.profiles[0].support()
    }

    /// Anisotropic Gaussian source with a random time window inside
    /// `[t_lo, t_hi]`, centers in `[-center, center]` and widths in `sigma`.
    pub fn random<R: Rng>(rng: &mut R, t_lo: f64, t_hi: f64, center: f64, sigma: (f64, f64)) -> Self {
        let (a, b) = (t_lo.ln(), t_hi.ln());
        let span = b - a;
        let s_half = span * rng.gen_range(0.2..0.35);
        let s_center = rng.gen_range(a + s_half..b - s_half);
        let profiles = [0, 1, 2].map(|_| Profile::Gaussian {
            center: rng.gen_range(-center..=center),
            sigma: rng.gen_range(sigma.0..=sigma.1),
        });
        Self {
            amplitude: rng.gen_range(0.5..1.5),
            time: TimeBump { s_center, s_half },
            profiles,
        }
    }
}

/// True when every point of one support is spacelike to every point of the
/// other along `x^1`: the gap exceeds the null distance `ln(t_max / t_min)`
/// over the union of time supports.
pub fn spacelike_separated(a: &BumpSource, b: &BumpSource) -> bool {
    let (Some(sa), Some(sb)) = (a.x1_support(), b.x1_support()) else {
        return false;
    };
    let gap = (sb.0 - sa.1).max(sa.0 - sb.1);
    let (ta, tb) = (a.time.support(), b.time.support());
    let null = (ta.1.max(tb.1) / ta.0.min(tb.0)).ln();
    gap > null
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gradient_matches_difference_quotient() {
        let src = BumpSource::new(
            TimeBump::between(1.2, 2.5).unwrap(),
            [
                Profile::Bump { center: 0.2, half_width: 0.8 },
                Profile::Gaussian { center: -0.1, sigma: 0.4 },
                Profile::Constant,
            ],
        );
        let (t, x) = (1.7, [0.4, 0.1, 3.0]);
        let g = src.gradient(t, x);
        let h = 1e-6;
        let dt = (src.value(t + h, x) - src.value(t - h, x)) / (2.0 * h);
        assert!((g[0] - dt).abs() < 1e-8);
        for a in 0..3 {
            let (mut xp, mut xm) = (x, x);
            xp[a] += h;
            xm[a] -= h;
            let d = (src.value(t, xp) - src.value(t, xm)) / (2.0 * h);
            assert!((g[a + 1] - d).abs() < 1e-8, "axis {a}");
        }
        let (t0, t1) = src.time.support();
        assert!((t0 - 1.2).abs() < 1e-14 && (t1 - 2.5).abs() < 1e-14);
        assert_eq!(src.value(1.1, x), 0.0);
    }

    #[test]
    fn separation_certificate() {
        let time = TimeBump::between(1.0, 1.5).unwrap();
        let at = |c: f64| BumpSource::new(time, [Profile::Bump { center: c, half_width: 0.5 }, Profile::Constant, Profile::Constant]);
        let null = 1.5f64.ln();
        assert!(spacelike_separated(&at(0.0), &at(1.0 + null + 0.01)));
        assert!(!spacelike_separated(&at(0.0), &at(1.0 + null - 0.01)));
    }
}
