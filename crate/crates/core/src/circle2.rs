//! Two-dimensional model on `(0, inf) x S^1`, `g = -dt^2 + t^2 dphi^2`, with
//! discrete angular modes `n in [-n_max, n_max]`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frw4::TimeGrid;
use crate::numerics::{fit_decay_rate, SPECTRAL_FLOOR};
use crate::numerics::modes::{green_column, moments, pair, sinh_over, Causal, RadialMeasure, TimeQuadrature, WaveStencil};
use crate::source::TimeBump;

const MEASURE: RadialMeasure = RadialMeasure::CIRCLE2;

pub const DEFAULT_N_MAX: usize = 128;

/// Mode amplitudes `phi~(t_i, n)`, laid out `[time][n + n_max]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CircleField {
    pub time: TimeGrid,
    pub n_max: usize,
    pub values: Vec<Complex64>,
    pub real: bool,
}

impl CircleField {
    pub fn new(time: TimeGrid, n_max: usize, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != time.n * (2 * n_max + 1) {
            return Err(Error::InvalidInput("value count does not match circle grid".into()));
        }
        let mut f = Self { time, n_max, values, real: false };
        f.real = f.reality_defect() <= crate::frw4::REALITY_TOL;
        Ok(f)
    }

    /// `phi~(t, n) = T(t) c_n` for a time profile and a mode spectrum.
    pub fn separable(time: &TimeGrid, n_max: usize, profile: impl Fn(f64) -> f64, spectrum: impl Fn(i64) -> Complex64) -> Result<Self> {
        let spec: Vec<Complex64> = (-(n_max as i64)..=n_max as i64).map(spectrum).collect();
        let values = (0..time.n)
            .flat_map(|i| {
                let tv = profile(time.t(i));
                spec.iter().map(move |c| c * tv).collect::<Vec<_>>()
            })
            .collect();
        Self::new(time.clone(), n_max, values)
    }

    pub fn modes(&self) -> usize {
        2 * self.n_max + 1
    }

    pub fn mode_number(&self, j: usize) -> i64 {
        j as i64 - self.n_max as i64
    }

    pub fn at(&self, ti: usize, n: i64) -> Complex64 {
        self.values[ti * self.modes() + (n + self.n_max as i64) as usize]
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        let m = self.modes();
        (0..self.time.n).map(|i| self.values[i * m + j]).collect()
    }

    pub fn reality_defect(&self) -> f64 {
        let m = self.modes();
        let peak = self.values.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if peak == 0.0 {
            return 0.0;
        }
        let mut worst = 0.0f64;
        for slice in self.values.chunks(m) {
            for j in 0..m {
                worst = worst.max((slice[m - 1 - j] - slice[j].conj()).norm());
            }
        }
        worst / peak
    }

    fn map_columns(&self, f: impl Fn(i64, Vec<Complex64>) -> Vec<Complex64> + Sync) -> Self {
        let m = self.modes();
        let cols: Vec<Vec<Complex64>> = (0..m)
            .into_par_iter()
            .map(|j| f(self.mode_number(j), self.column(j)))
            .collect();
        let mut values = vec![Complex64::default(); self.values.len()];
        for (j, col) in cols.iter().enumerate() {
            for (i, v) in col.iter().enumerate() {
                values[i * m + j] = *v;
            }
        }
        Self { time: self.time.clone(), n_max: self.n_max, values, real: self.real }
    }

    pub fn multiply_modes(&self, f: impl Fn(i64) -> Complex64) -> Self {
        let m = self.modes();
        let factors: Vec<Complex64> = (0..m).map(|j| f(self.mode_number(j))).collect();
        let values = self.values.iter().enumerate().map(|(i, v)| v * factors[i % m]).collect();
        Self { time: self.time.clone(), n_max: self.n_max, values, real: self.real }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.time != other.time || self.n_max != other.n_max {
            return Err(Error::InvalidInput("circle fields live on different grids".into()));
        }
        Ok(Self {
            time: self.time.clone(),
            n_max: self.n_max,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
            real: self.real && other.real,
        })
    }

    /// `||phi||^2 = (2 pi)^{-1} sum_n int dt t |phi~|^2`.
    pub fn norm(&self) -> f64 {
        let q = quadrature(&self.time);
        let mut acc = 0.0;
        for (i, slice) in self.values.chunks(self.modes()).enumerate() {
            let row: f64 = slice.iter().map(|z| z.norm_sqr()).sum();
            acc += q.simpson[i] * (MEASURE.volume_exponent() * q.s[i]).exp() * row;
        }
        (acc / (2.0 * PI)).sqrt()
    }
}

/// Angular spectra of analytic test functions on the circle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CircleSpectrum {
    /// Wrapped Gaussian centered at `phi0` with width `sigma`.
    Gaussian { phi0: f64, sigma: f64 },
    /// `e^{-rate |n|}`.
    Exponential { rate: f64 },
}

impl CircleSpectrum {
    pub fn coefficient(&self, n: i64) -> Complex64 {
        match *self {
            CircleSpectrum::Gaussian { phi0, sigma } => Complex64::from_polar(
                (2.0 * PI).sqrt() * sigma * (-0.5 * sigma * sigma * (n * n) as f64).exp(),
                n as f64 * phi0,
            ),
            CircleSpectrum::Exponential { rate } => Complex64::new((-rate * n.abs() as f64).exp(), 0.0),
        }
    }

    pub fn field(&self, time: &TimeGrid, n_max: usize, bump: &TimeBump) -> Result<CircleField> {
        CircleField::separable(time, n_max, |t| bump.value(t), |n| self.coefficient(n))
    }
}

fn quadrature(time: &TimeGrid) -> TimeQuadrature {
    TimeQuadrature::new(time.s_values(), time.ds())
}

/// `P~ = -(d_t^2 + (1/t) d_t + n^2/t^2)`.
pub fn wave2_apply(field: &CircleField) -> Result<CircleField> {
    let stencil = WaveStencil::new(field.time.n, field.time.ds())?;
    let s = field.time.s_values();
    Ok(field.map_columns(|n, col| stencil.apply(&s, MEASURE, (n * n) as f64, &col)))
}

/// `Delta~(t, tau, n) = sin(n ln(t/tau)) / n`, `ln(t/tau)` at `n = 0`.
pub fn mode_kernel2(t: f64, tau: f64, n: i64) -> Result<f64> {
    if !(t > 0.0 && tau > 0.0) {
        return Err(Error::Domain(format!("times must be positive, got t={t}, tau={tau}")));
    }
    Ok(sinh_over(MEASURE.nu2((n * n) as f64), (t / tau).ln()))
}

pub fn green2(field: &CircleField, which: Causal) -> Result<CircleField> {
    let m = field.modes();
    let nt = field.time.n;
    let edge = crate::frw4::SUPPORT_EDGE.min(nt);
    let peak = field.values.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if peak > 0.0 {
        let ends = field.values[..edge * m].iter().chain(&field.values[(nt - edge) * m..]);
        let ratio = ends.map(|z| z.norm()).fold(0.0, f64::max) / peak;
        if ratio > crate::frw4::SUPPORT_TOL {
            return Err(Error::Support { ratio });
        }
    }
    let q = quadrature(&field.time);
    Ok(field.map_columns(|n, col| green_column(&q, MEASURE, MEASURE.nu2((n * n) as f64), &col, which)))
}

fn pairing(phi: &CircleField, psi: &CircleField, weight: impl Fn(i64) -> f64) -> Result<Complex64> {
    if phi.time != psi.time || phi.n_max != psi.n_max {
        return Err(Error::InvalidInput("circle fields live on different grids".into()));
    }
    let q = quadrature(&phi.time);
    let m = phi.modes();
    let mom = |f: &CircleField| -> Vec<_> {
        (0..m)
            .into_par_iter()
            .map(|j| {
                let n = f.mode_number(j);
                moments(&q, MEASURE, MEASURE.nu2((n * n) as f64), &f.column(j))
            })
            .collect()
    };
    let (mp, mq) = (mom(phi), mom(psi));
    let mut acc = Complex64::default();
    for j in 0..m {
        acc += pair(&mp[m - 1 - j], &mq[j]) * weight(phi.mode_number(j));
    }
    Ok(acc / (2.0 * PI))
}

fn require_real(phi: &CircleField, psi: &CircleField) -> Result<()> {
    for f in [phi, psi] {
        if !f.real {
            return Err(Error::Reality(format!("conjugate-symmetry defect {:e}", f.reality_defect())));
        }
    }
    Ok(())
}

/// `omega_2(phi, psi) = -(2 pi)^{-1} sum_n int int t dt tau dtau phi~(t,-n) Delta~ psi~(tau,n)`.
pub fn symplectic2(phi: &CircleField, psi: &CircleField) -> Result<f64> {
    require_real(phi, psi)?;
    Ok(pairing(phi, psi, |_| 1.0)?.re)
}

/// `omega_2(S phi, S psi)` through the multiplier `sech(3 lambda n)`.
pub fn deformed_symplectic2(phi: &CircleField, psi: &CircleField, lambda: f64) -> Result<f64> {
    require_real(phi, psi)?;
    Ok(pairing(phi, psi, |n| sech(3.0 * lambda * n as f64))?.re)
}

/// `phi(angle) -> phi(angle - alpha)`.
pub fn rotate(field: &CircleField, alpha: f64) -> CircleField {
    field.multiply_modes(|n| Complex64::from_polar(1.0, n as f64 * alpha))
}

pub(crate) fn sech(x: f64) -> f64 {
    1.0 / x.cosh()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SDirection {
    S,
    SInverse,
}

/// Result of the tail-decay test guarding `S^{-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DomainReport {
    pub admissible: bool,
    pub rate: f64,
    pub threshold: f64,
    pub decay_margin: f64,
    /// Tail mode with the largest amplitude after `S^{-1}`.
    pub worst_mode: i64,
}

/// Fits the spectral tail `|n| >= n_max/2` of every time slice; the field is
/// admissible when the slowest decay beats `3 lambda / 2`. Amplitudes below
/// the relative noise floor count as decayed.
pub fn domain_check(field: &CircleField, lambda: f64) -> DomainReport {
    let threshold = 1.5 * lambda;
    let m = field.modes();
    let lo = (field.n_max / 2).max(1) as i64;
    let mut rate = f64::INFINITY;
    let mut worst_mode = 0;
    let mut worst_amp = 0.0;
    for slice in field.values.chunks(m) {
        let floor = SPECTRAL_FLOOR * slice.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let pts: Vec<(f64, f64)> = (0..m)
            .filter_map(|j| {
                let n = field.mode_number(j);
                let a = slice[j].norm();
                (n.abs() >= lo).then(|| (n.abs() as f64, if a > floor { a } else { 0.0 }))
            })
            .collect();
        rate = rate.min(fit_decay_rate(&pts));
        for j in 0..m {
            let n = field.mode_number(j);
            if n.abs() >= lo {
                let amp = slice[j].norm() * (3.0 * lambda * n as f64).cosh().sqrt();
                if amp > worst_amp {
                    worst_amp = amp;
                    worst_mode = n;
                }
            }
        }
    }
    DomainReport {
        admissible: rate > threshold,
        rate,
        threshold,
        decay_margin: rate - threshold,
        worst_mode,
    }
}

/// `S~ = sech(3 lambda n)^{1/2}` and its inverse.
pub fn smap2(field: &CircleField, lambda: f64, direction: SDirection) -> Result<CircleField> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidInput(format!("lambda = {lambda} must be finite and nonnegative")));
    }
    match direction {
        SDirection::S => Ok(field.multiply_modes(|n| Complex64::new(sech(3.0 * lambda * n as f64).sqrt(), 0.0))),
        SDirection::SInverse => {
            let r = domain_check(field, lambda);
            if !r.admissible {
                return Err(Error::DomainViolation { mode: r.worst_mode, rate: r.rate, threshold: r.threshold });
            }
            Ok(field.multiply_modes(|n| Complex64::new((3.0 * lambda * n as f64).cosh().sqrt(), 0.0)))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup(nt: usize) -> (TimeGrid, TimeBump) {
        (TimeGrid::new(1.0, 5.0, nt).unwrap(), TimeBump::between(1.3, 3.5).unwrap())
    }

    #[test]
    fn kernel_limits() {
        assert_eq!(mode_kernel2(2.0, 2.0, 5).unwrap(), 0.0);
        assert!((mode_kernel2(3.0, 1.0, 0).unwrap() - 3f64.ln()).abs() < 1e-15);
        assert!((mode_kernel2(3.0, 1.0, 2).unwrap() - (2.0 * 3f64.ln()).sin() / 2.0).abs() < 1e-15);
        assert!(mode_kernel2(-1.0, 1.0, 1).is_err());
    }

    #[test]
    fn homogeneous_solutions_are_annihilated() {
        let time = TimeGrid::new(1.0, 3.0, 400).unwrap();
        let f = CircleField::separable(&time, 4, |t| t.ln(), |n| if n == 0 { Complex64::new(1.0, 0.0) } else { Complex64::default() }).unwrap();
        assert!(wave2_apply(&f).unwrap().values.iter().all(|z| z.norm() < 1e-8));
        let n_max = 3;
        let values = (0..time.n)
            .flat_map(|i| {
                let s = time.s(i);
                (-n_max..=n_max).map(move |n| Complex64::from_polar(1.0, n as f64 * s))
            })
            .collect();
        let f = CircleField::new(time, n_max as usize, values).unwrap();
        assert!(wave2_apply(&f).unwrap().values.iter().all(|z| z.norm() < 1e-6));
    }

    #[test]
    fn green_identity_and_symplectic() {
        let (time, bump) = setup(512);
        let phi = CircleSpectrum::Gaussian { phi0: 0.3, sigma: 0.4 }.field(&time, 32, &bump).unwrap();
        let psi = CircleSpectrum::Gaussian { phi0: -1.0, sigma: 0.25 }
            .field(&time, 32, &TimeBump::between(1.6, 4.2).unwrap())
            .unwrap();
        for which in [Causal::Retarded, Causal::Advanced] {
            let r = wave2_apply(&green2(&phi, which).unwrap()).unwrap().sub(&phi).unwrap();
            assert!(r.norm() / phi.norm() < 1e-6, "{which:?}");
        }
        let w = symplectic2(&phi, &psi).unwrap();
        assert!(w.abs() > 1e-6);
        assert!(symplectic2(&phi, &phi).unwrap().abs() < 1e-12 * w.abs());
        assert!((symplectic2(&psi, &phi).unwrap() + w).abs() < 1e-12 * w.abs());
        let rw = symplectic2(&rotate(&phi, 0.7), &rotate(&psi, 0.7)).unwrap();
        assert!((rw - w).abs() < 1e-12 * w.abs());
    }

    #[test]
    fn smap_round_trips_and_domain() {
        let (time, bump) = setup(32);
        let lambda = 0.1;
        let phi = CircleSpectrum::Gaussian { phi0: 0.5, sigma: 0.3 }.field(&time, 64, &bump).unwrap();
        let s = smap2(&phi, lambda, SDirection::S).unwrap();
        for i in 0..time.n {
            assert_eq!(s.at(i, 0), phi.at(i, 0));
            for n in 1..=64 {
                assert!(s.at(i, n).norm() <= phi.at(i, n).norm());
            }
        }
        let back = smap2(&s, lambda, SDirection::SInverse).unwrap();
        for (a, b) in back.values.iter().zip(&phi.values) {
            assert!((a - b).norm() <= 1e-10 * b.norm().max(1e-300));
        }
        let slow = CircleSpectrum::Exponential { rate: lambda }.field(&time, 64, &bump).unwrap();
        let r = domain_check(&slow, lambda);
        assert!(!r.admissible && (r.rate - lambda).abs() < 1e-9);
        assert!(matches!(smap2(&slow, lambda, SDirection::SInverse), Err(Error::DomainViolation { .. })));
        assert!(domain_check(&smap2(&slow, lambda, SDirection::S).unwrap(), lambda).admissible);
        let zero = CircleField::new(time.clone(), 8, vec![Complex64::default(); time.n * 17]).unwrap();
        assert!(domain_check(&zero, lambda).admissible);
    }
}
