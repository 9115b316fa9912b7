//! Convergent deformation of the cosmological model along the twist axis
//! `x^1`: sech multipliers, their position-space kernel, deformed Green's
//! operators, symplectic and two-point structures.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circle2::{sech, DomainReport};
use crate::error::{Error, Result};
use crate::frw4::{self, Causal, Lattice, ModeState, SpectralField};
use crate::numerics::{fit_decay_rate, SPECTRAL_FLOOR};

/// Relative agreement required between the two deformed-symplectic paths.
pub const CROSS_CHECK_TOL: f64 = 1e-10;
/// Default bound on kernel mass lost outside a finite box.
pub const TAIL_MASS_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    Frw4,
    Circle2,
}

impl Model {
    pub fn dim(&self) -> usize {
        match self {
            Model::Frw4 => 4,
            Model::Circle2 => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeformationParams {
    pub lambda: f64,
    pub xi: f64,
    pub model: Model,
}

impl DeformationParams {
    pub fn new(lambda: f64, xi: f64, model: Model) -> Result<Self> {
        if !lambda.is_finite() || lambda < 0.0 {
            return Err(Error::InvalidInput(format!("lambda = {lambda} must be finite and >= 0")));
        }
        if !xi.is_finite() {
            return Err(Error::InvalidInput("nonfinite xi".into()));
        }
        Ok(Self { lambda, xi, model })
    }

    pub fn frw4(lambda: f64, xi: f64) -> Result<Self> {
        Self::new(lambda, xi, Model::Frw4)
    }

    /// Homothety constant of `t d_t`.
    pub fn c(&self) -> f64 {
        2.0
    }

    /// `sech(3 lambda k1)`.
    pub fn multiplier(&self, k1: f64) -> f64 {
        sech(3.0 * self.lambda * k1)
    }

    /// Width scale `6 lambda / pi` of the position kernel.
    pub fn kernel_length(&self) -> f64 {
        6.0 * self.lambda / PI
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SPower {
    Half,
    One,
    MinusHalf,
}

impl SPower {
    pub fn exponent(&self) -> f64 {
        match self {
            SPower::Half => 0.5,
            SPower::One => 1.0,
            SPower::MinusHalf => -0.5,
        }
    }
}

/// Tail-decay test along `k1`: per time slice, the envelope over the
/// transverse modes is fitted on `|k1| >= k1_max / 2`.
pub fn domain_check(field: &SpectralField, lambda: f64) -> DomainReport {
    let threshold = 1.5 * lambda;
    let l = &field.grid.lattice;
    let n1 = l.n[0];
    let lo = (n1 / 4).max(1) as i64;
    let mut rate = f64::INFINITY;
    let mut worst_mode = 0;
    let mut worst_amp = 0.0;
    for slice in field.values.chunks(field.nk()) {
        let peak = slice.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let mut env = vec![0.0f64; n1];
        for (idx, v) in slice.iter().enumerate() {
            let j = idx % n1;
            env[j] = env[j].max(v.norm());
        }
        let mut pts = Vec::new();
        for (j, &e) in env.iter().enumerate() {
            let m = l.mode(0, j);
            if m.abs() < lo {
                continue;
            }
            let k1 = l.wavenumber(0, j);
            pts.push((k1.abs(), if e > SPECTRAL_FLOOR * peak { e } else { 0.0 }));
            let amp = e * (3.0 * lambda * k1).cosh().sqrt();
            if amp > worst_amp {
                worst_amp = amp;
                worst_mode = m;
            }
        }
        rate = rate.min(fit_decay_rate(&pts));
    }
    DomainReport { admissible: rate > threshold, rate, threshold, decay_margin: rate - threshold, worst_mode }
}

/// Mode-wise multiplication by `sech(3 lambda k1)^p`.
pub fn smap(field: &SpectralField, params: &DeformationParams, power: SPower) -> Result<SpectralField> {
    if power == SPower::MinusHalf {
        let r = domain_check(field, params.lambda);
        if !r.admissible {
            return Err(Error::DomainViolation { mode: r.worst_mode, rate: r.rate, threshold: r.threshold });
        }
    }
    let l = &field.grid.lattice;
    let p = power.exponent();
    Ok(field.multiply_modes(|k| params.multiplier(l.k(k)[0]).powf(p)))
}

/// `1 / (6 lambda cosh(pi x / 6 lambda))`, the position form of `sech(3 lambda k1)`.
pub fn position_kernel(x1: f64, lambda: f64) -> Result<f64> {
    if lambda == 0.0 {
        return Err(Error::DegenerateKernel);
    }
    if !(lambda > 0.0) || !lambda.is_finite() || !x1.is_finite() {
        return Err(Error::InvalidInput(format!("kernel needs finite x and lambda > 0, got {x1}, {lambda}")));
    }
    Ok(1.0 / (6.0 * lambda * (PI * x1 / (6.0 * lambda)).cosh()))
}

/// Kernel mass inside `[-a, a]`.
pub fn kernel_mass(a: f64, lambda: f64) -> f64 {
    4.0 / PI * (PI * a / (12.0 * lambda)).tanh().atan()
}

/// Direct periodic convolution of one `x^1` line with the sech kernel, using
/// minimum-image separations.
pub fn convolve_line(samples: &[f64], dx: f64, lambda: f64, tol: f64) -> Result<Vec<f64>> {
    let n = samples.len();
    if lambda == 0.0 {
        return Ok(samples.to_vec());
    }
    let deficit = 1.0 - kernel_mass(0.5 * n as f64 * dx, lambda);
    if deficit > tol {
        return Err(Error::TailMass { deficit, tolerance: tol });
    }
    let table: Vec<f64> = (0..n)
        .map(|d| {
            let m = if d <= n / 2 { d as f64 } else { d as f64 - n as f64 };
            position_kernel(m * dx, lambda).map(|k| k * dx)
        })
        .collect::<Result<_>>()?;
    Ok((0..n)
        .into_par_iter()
        .map(|i| (0..n).map(|j| table[(i + n - j) % n] * samples[j]).sum())
        .collect())
}

/// `S^2 phi` in position space by direct convolution along `x^1`; returns
/// samples laid out like the field.
pub fn convolve_s2(field: &SpectralField, params: &DeformationParams, tol: f64) -> Result<Vec<f64>> {
    let x = field.to_position_real()?;
    let l = &field.grid.lattice;
    let n1 = l.n[0];
    let dx = l.spacing(0);
    let mut out = Vec::with_capacity(x.len());
    for line in x.chunks(n1) {
        out.extend(convolve_line(line, dx, params.lambda, tol)?);
    }
    Ok(out)
}

/// `Delta_{*,+-} = Delta_{+-} S^2`.
pub fn deformed_green(field: &SpectralField, params: &DeformationParams, which: Causal) -> Result<SpectralField> {
    frw4::green(&smap(field, params, SPower::One)?, params.xi, which)
}

/// `omega_*(phi, psi) = omega(S phi, S psi)`, evaluated from the deformed kernel
/// and cross-checked against the S-map path.
pub fn deformed_symplectic(phi: &SpectralField, psi: &SpectralField, params: &DeformationParams) -> Result<f64> {
    frw4::require_real(phi, psi)?;
    let l = &phi.grid.lattice;
    let (direct, terms) = frw4::weighted_pairing_scaled(phi, psi, params.xi, |k| params.multiplier(l.k(k)[0]))?;
    let direct = direct.re;
    let via = frw4::symplectic(&smap(phi, params, SPower::Half)?, &smap(psi, params, SPower::Half)?, params.xi)?;
    let scale = direct.abs().max(via.abs()).max(1e-6 * terms);
    if (direct - via).abs() > CROSS_CHECK_TOL * scale {
        return Err(Error::CrossCheck(format!("deformed symplectic form: kernel {direct} vs S-map {via}")));
    }
    Ok(direct)
}

/// `Omega~_2(t, tau, k) = u_k(t) conj(u_k(tau))`, divided by `cosh(3 lambda k1)`
/// when deformed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoPointKernel {
    pub state: ModeState,
    pub lambda: f64,
    pub deformed: bool,
}

impl TwoPointKernel {
    pub fn new(params: &DeformationParams, deformed: bool) -> Result<Self> {
        Ok(Self { state: ModeState::new(params.xi)?, lambda: params.lambda, deformed })
    }

    pub fn eval(&self, t: f64, tau: f64, k: [f64; 3]) -> Result<Complex64> {
        let k2 = k.iter().map(|v| v * v).sum();
        let base = self.state.two_point_kernel(t, tau, k2)?;
        Ok(if self.deformed { base * sech(3.0 * self.lambda * k[0]) } else { base })
    }
}

/// Projections `int ds e^{3s} e^{-+i mu s} phi~(s, k) / sqrt(2 mu)` per mode.
fn state_projections(field: &SpectralField, state: &ModeState, sign: f64) -> Result<Vec<Complex64>> {
    let q = frw4::quadrature(&field.grid);
    let l = &field.grid.lattice;
    (0..field.nk())
        .into_par_iter()
        .map(|k| {
            let mu = state.mu(l.k2(k))?;
            let norm = 1.0 / (2.0 * mu).sqrt();
            let mut acc = Complex64::default();
            for i in 0..field.nt() {
                let s = q.s[i];
                let w = q.simpson[i] * (3.0 * s).exp() * norm;
                acc += field.at(i, k) * Complex64::from_polar(w, sign * mu * s);
            }
            Ok(acc)
        })
        .collect()
}

/// `Omega_2(phi, psi)`, or its deformation with `sech(3 lambda k1)`.
pub fn two_point(phi: &SpectralField, psi: &SpectralField, params: &DeformationParams, deformed: bool) -> Result<Complex64> {
    phi.same_grid(psi)?;
    let state = ModeState::new(params.xi)?;
    let l = &phi.grid.lattice;
    state.check_grid(l)?;
    let a = state_projections(phi, &state, -1.0)?;
    let b = state_projections(psi, &state, 1.0)?;
    let w = l.momentum_weight();
    let mut acc = Complex64::default();
    for k in 0..phi.nk() {
        let m = if deformed { params.multiplier(l.k(k)[0]) } else { 1.0 };
        acc += a[l.negate_flat(k)] * b[k] * (w * m);
    }
    Ok(acc)
}

/// `P(t, k) = |u_k(t)|^2` over the lattice, divided by `cosh(3 lambda k1)`
/// when deformed.
pub fn power_spectrum(t: f64, lattice: &Lattice, params: &DeformationParams, deformed: bool) -> Result<Vec<f64>> {
    let state = ModeState::new(params.xi)?;
    (0..lattice.size())
        .map(|k| {
            let p = state.power(t, lattice.k2(k))?;
            Ok(if deformed { p * params.multiplier(lattice.k(k)[0]) } else { p })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FourPoint {
    pub omega_star: f64,
    pub two_point: Complex64,
    pub value: Complex64,
    /// `|value| / (N(phi1) N(phi2) |Omega_*(phi3, phi4)|)` with
    /// `N(phi) = Omega_*(phi, phi)^{1/2}`.
    pub normalized: f64,
}

/// `<[Phi(phi1), Phi(phi2)] Phi(phi3) Phi(phi4)> = i omega_*(phi1, phi2) Omega_*(phi3, phi4)`.
pub fn commutator_4pt(fields: [&SpectralField; 4], params: &DeformationParams) -> Result<FourPoint> {
    let [f1, f2, f3, f4] = fields;
    let omega_star = deformed_symplectic(f1, f2, params)?;
    let two = two_point(f3, f4, params, true)?;
    let value = Complex64::new(0.0, omega_star) * two;
    let n1 = two_point(f1, f1, params, true)?.re.sqrt();
    let n2 = two_point(f2, f2, params, true)?.re.sqrt();
    let denom = n1 * n2 * two.norm();
    let normalized = if denom > 0.0 { value.norm() / denom } else { 0.0 };
    Ok(FourPoint { omega_star, two_point: two, value, normalized })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frw4::{GridSpec, LatticeFft, TimeGrid};
    use crate::source::{BumpSource, Profile, TimeBump};

    fn grid(n1: usize, l1: f64, nt: usize) -> GridSpec {
        GridSpec::new(TimeGrid::new(1.0, 3.0, nt).unwrap(), Lattice::new([n1, 4, 1], [l1, 4.0, 1.0]).unwrap())
    }

    fn src(c: f64, t0: f64, t1: f64) -> BumpSource {
        BumpSource::new(
            TimeBump::between(t0, t1).unwrap(),
            [Profile::Bump { center: c, half_width: 1.0 }, Profile::Gaussian { center: 0.0, sigma: 0.6 }, Profile::Constant],
        )
    }

    #[test]
    fn multiplier_algebra() {
        let g = grid(64, 16.0, 16);
        let phi = src(0.0, 1.2, 2.5).to_field(&g);
        let p = DeformationParams::frw4(0.1, 0.25).unwrap();
        let zero = DeformationParams::frw4(0.0, 0.25).unwrap();
        assert_eq!(smap(&phi, &zero, SPower::One).unwrap(), phi);
        let twice = smap(&smap(&phi, &p, SPower::Half).unwrap(), &p, SPower::Half).unwrap();
        let once = smap(&phi, &p, SPower::One).unwrap();
        for (a, b) in twice.values.iter().zip(&once.values) {
            assert!((a - b).norm() <= 1e-12 * b.norm().max(1e-300));
        }
        let l = &g.lattice;
        for k in (0..g.nk()).filter(|&k| l.k(k)[0] == 0.0) {
            assert_eq!(once.at(5, k), phi.at(5, k));
        }
        assert!(DeformationParams::frw4(-0.1, 0.0).is_err());
    }

    #[test]
    fn kernel_normalization_and_transform() {
        assert!(matches!(position_kernel(0.0, 0.0), Err(Error::DegenerateKernel)));
        for lambda in [0.05, 0.1, 0.2] {
            assert!((position_kernel(0.0, lambda).unwrap() - 1.0 / (6.0 * lambda)).abs() < 1e-14);
            let l = Lattice::new([2048, 1, 1], [40.0, 1.0, 1.0]).unwrap();
            let dx = l.spacing(0);
            let mut data: Vec<Complex64> =
                (0..2048).map(|j| Complex64::new(position_kernel(l.coord(0, j), lambda).unwrap(), 0.0)).collect();
            let total: f64 = data.iter().map(|z| z.re * dx).sum();
            assert!((total - 1.0).abs() < 1e-8);
            LatticeFft::new(&l).to_spectral(&mut data);
            for (j, v) in data.iter().enumerate() {
                let k = l.wavenumber(0, j);
                let exact = sech(3.0 * lambda * k);
                if k.abs() <= 0.5 * PI / dx && exact > 1e-8 {
                    assert!((v.re - exact).abs() < 1e-6 * exact, "k={k}");
                }
            }
        }
        assert!((kernel_mass(1e6, 0.1) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn convolution_matches_multiplier() {
        let g = grid(512, 20.0, 8);
        let phi = src(0.5, 1.2, 2.5).to_field(&g);
        for lambda in [0.05, 0.1, 0.2] {
            let p = DeformationParams::frw4(lambda, 0.25).unwrap();
            let direct = convolve_s2(&phi, &p, TAIL_MASS_TOL).unwrap();
            let spectral = smap(&phi, &p, SPower::One).unwrap().to_position_real().unwrap();
            let num: f64 = direct.iter().zip(&spectral).map(|(a, b)| (a - b).powi(2)).sum();
            let den: f64 = spectral.iter().map(|b| b * b).sum();
            assert!((num / den).sqrt() < 1e-6, "lambda={lambda}");
            let dx = g.lattice.spacing(0);
            let line: Vec<f64> = (0..512).map(|j| crate::source::bump(g.lattice.coord(0, j) - 0.5)).collect();
            let out = convolve_line(&line, dx, lambda, TAIL_MASS_TOL).unwrap();
            assert!(out.iter().all(|&v| v > 0.0));
        }
        let narrow = grid(64, 1.0, 8);
        let p = DeformationParams::frw4(0.2, 0.25).unwrap();
        assert!(matches!(
            convolve_s2(&src(0.0, 1.2, 2.5).to_field(&narrow), &p, TAIL_MASS_TOL),
            Err(Error::TailMass { .. })
        ));
    }

    #[test]
    fn deformed_green_identity() {
        let g = grid(128, 16.0, 512);
        let phi = src(0.0, 1.3, 2.6).to_field(&g);
        let p = DeformationParams::frw4(0.1, 0.1).unwrap();
        let l = &g.lattice;
        for which in [Causal::Retarded, Causal::Advanced] {
            let out = frw4::wave_apply(&deformed_green(&phi, &p, which).unwrap(), p.xi).unwrap();
            let target = phi.multiply_modes(|k| p.multiplier(l.k(k)[0]));
            let r = frw4::norm(&out.sub(&target).unwrap()) / frw4::norm(&phi);
            assert!(r < 1e-6, "{which:?}: {r:e}");
        }
    }

    #[test]
    fn two_point_ccr_and_hermiticity() {
        let g = grid(64, 16.0, 256);
        let phi = src(-1.0, 1.2, 2.2).to_field(&g);
        let psi = src(1.5, 1.5, 2.8).to_field(&g);
        for lambda in [0.0, 0.1] {
            let p = DeformationParams::frw4(lambda, 0.25).unwrap();
            let ab = two_point(&phi, &psi, &p, true).unwrap();
            let ba = two_point(&psi, &phi, &p, true).unwrap();
            let w = deformed_symplectic(&phi, &psi, &p).unwrap();
            assert!((ab - ba - Complex64::new(0.0, w)).norm() < 1e-10 * ab.norm());
            assert!((ab - ba.conj()).norm() < 1e-10 * ab.norm());
        }
        let p0 = DeformationParams::frw4(0.0, 0.25).unwrap();
        assert_eq!(two_point(&phi, &psi, &p0, true).unwrap(), two_point(&phi, &psi, &p0, false).unwrap());
        let low = DeformationParams::frw4(0.1, 0.1).unwrap();
        assert!(matches!(two_point(&phi, &psi, &low, false), Err(Error::StateDomain { .. })));
    }

    #[test]
    fn power_ratio() {
        let l = Lattice::cubic(8, 5.0).unwrap();
        let p = DeformationParams::frw4(0.1, 0.25).unwrap();
        let a = power_spectrum(1.7, &l, &p, false).unwrap();
        let b = power_spectrum(1.7, &l, &p, true).unwrap();
        let st = ModeState::new(0.25).unwrap();
        for k in 0..l.size() {
            assert!((b[k] / a[k] - p.multiplier(l.k(k)[0])).abs() < 1e-12);
            let mu = st.mu(l.k2(k)).unwrap();
            assert!((a[k] - 1.0 / (2.0 * mu * 1.7 * 1.7)).abs() < 1e-15);
        }
    }

    #[test]
    fn inverse_requires_fast_decay() {
        let g = grid(128, 16.0, 16);
        let phi = src(0.0, 1.2, 2.5).to_field(&g);
        let p = DeformationParams::frw4(0.3, 0.25).unwrap();
        let s = smap(&phi, &p, SPower::Half).unwrap();
        let back = smap(&s, &p, SPower::MinusHalf).unwrap();
        let err = frw4::norm(&back.sub(&phi).unwrap()) / frw4::norm(&phi);
        assert!(err < 1e-10, "{err:e}");
        // a field with a slowly decaying k1 spectrum is rejected
        let slow = phi.multiply_modes(|k| (3.0 * p.lambda * g.lattice.k(k)[0]).cosh() * 1e-3);
        assert!(matches!(smap(&slow, &p, SPower::MinusHalf), Err(Error::DomainViolation { .. })));
    }
}
