//! Undeformed scalar field on `g = -dt^2 + t^2 dx^2` with curvature coupling
//! `xi`, in spatial Fourier space.

mod field;
mod fourier;
mod grid;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

pub use field::{SpectralField, REALITY_TOL};
pub use fourier::LatticeFft;
pub use grid::{GridSpec, Lattice, TimeGrid};

pub use crate::numerics::modes::Causal;
use crate::error::{Error, Result};
use crate::numerics::modes::{green_column, moments, pair, sinh_over, Moments, RadialMeasure, TimeQuadrature, WaveStencil};

const MEASURE: RadialMeasure = RadialMeasure::FRW4;

/// Time slices at each end that must be free of source support.
pub const SUPPORT_EDGE: usize = 3;
pub const SUPPORT_TOL: f64 = 1e-12;

/// Per-mode commutator function `Delta~(t, tau, k) = S_nu(ln(t/tau)) / (t tau)`,
/// `nu^2 = 1 - k^2 - 6 xi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeKernel {
    pub xi: f64,
}

impl ModeKernel {
    pub fn new(xi: f64) -> Result<Self> {
        if !xi.is_finite() {
            return Err(Error::InvalidInput("nonfinite xi".into()));
        }
        Ok(Self { xi })
    }

    pub fn nu2(&self, k2: f64) -> f64 {
        MEASURE.nu2(k2 + 6.0 * self.xi)
    }

    pub fn eval(&self, t: f64, tau: f64, k: f64) -> Result<f64> {
        if !(t > 0.0 && tau > 0.0) {
            return Err(Error::Domain(format!("times must be positive, got t={t}, tau={tau}")));
        }
        Ok(sinh_over(self.nu2(k * k), (t / tau).ln()) / (t * tau))
    }
}

pub fn mode_kernel_eval(t: f64, tau: f64, k: f64, xi: f64) -> Result<f64> {
    ModeKernel::new(xi)?.eval(t, tau, k)
}

/// Positive-frequency modes `u_k(t) = t^{-1} e^{-i mu ln t} / sqrt(2 mu)`,
/// `mu = sqrt(k^2 + 6 xi - 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeState {
    pub xi: f64,
}

impl ModeState {
    pub fn new(xi: f64) -> Result<Self> {
        if !xi.is_finite() {
            return Err(Error::InvalidInput("nonfinite xi".into()));
        }
        Ok(Self { xi })
    }

    pub fn mu(&self, k2: f64) -> Result<f64> {
        let q = k2 + 6.0 * self.xi;
        if q <= 1.0 {
            return Err(Error::StateDomain { value: q });
        }
        Ok((q - 1.0).sqrt())
    }

    pub fn mode(&self, t: f64, k2: f64) -> Result<Complex64> {
        let mu = self.mu(k2)?;
        Ok(Complex64::from_polar(1.0 / (t * (2.0 * mu).sqrt()), -mu * t.ln()))
    }

    /// `d/dt u_k(t)`.
    pub fn mode_dt(&self, t: f64, k2: f64) -> Result<Complex64> {
        let mu = self.mu(k2)?;
        Ok(self.mode(t, k2)? * Complex64::new(-1.0, -mu) / t)
    }

    /// `u_k(t) conj(u_k(tau))`.
    pub fn two_point_kernel(&self, t: f64, tau: f64, k2: f64) -> Result<Complex64> {
        Ok(self.mode(t, k2)? * self.mode(tau, k2)?.conj())
    }

    /// `|u_k(t)|^2 = 1 / (2 mu t^2)`.
    pub fn power(&self, t: f64, k2: f64) -> Result<f64> {
        Ok(1.0 / (2.0 * self.mu(k2)? * t * t))
    }

    /// Rejects grids containing modes below the branch point.
    pub fn check_grid(&self, lattice: &Lattice) -> Result<()> {
        let k2_min = (0..lattice.size()).map(|i| lattice.k2(i)).fold(f64::INFINITY, f64::min);
        self.mu(k2_min).map(|_| ())
    }
}

pub(crate) fn quadrature(grid: &GridSpec) -> TimeQuadrature {
    TimeQuadrature::new(grid.time.s_values(), grid.time.ds())
}

/// `P~ phi~ = -(d_t^2 + (3/t) d_t + (k^2 + 6 xi)/t^2) phi~`.
pub fn wave_apply(field: &SpectralField, xi: f64) -> Result<SpectralField> {
    let stencil = WaveStencil::new(field.nt(), field.grid.time.ds())?;
    let s = field.grid.time.s_values();
    let l = &field.grid.lattice;
    field.map_columns(|k, col| Ok(stencil.apply(&s, MEASURE, l.k2(k) + 6.0 * xi, &col)))
}

fn check_support(field: &SpectralField) -> Result<()> {
    let ratio = field.edge_ratio(SUPPORT_EDGE);
    if ratio > SUPPORT_TOL {
        return Err(Error::Support { ratio });
    }
    Ok(())
}

/// Retarded or advanced Green's operator.
pub fn green(field: &SpectralField, xi: f64, which: Causal) -> Result<SpectralField> {
    check_support(field)?;
    let kernel = ModeKernel::new(xi)?;
    let q = quadrature(&field.grid);
    let l = &field.grid.lattice;
    field.map_columns(|k, col| Ok(green_column(&q, MEASURE, kernel.nu2(l.k2(k)), &col, which)))
}

/// `Delta = Delta_+ - Delta_-`.
pub fn fundamental(field: &SpectralField, xi: f64) -> Result<SpectralField> {
    green(field, xi, Causal::Retarded)?.sub(&green(field, xi, Causal::Advanced)?)
}

/// Moments of every mode column against the homogeneous solutions.
pub(crate) fn field_moments(field: &SpectralField, xi: f64) -> Vec<Moments> {
    let kernel = ModeKernel { xi };
    let q = quadrature(&field.grid);
    let l = &field.grid.lattice;
    (0..field.nk())
        .into_par_iter()
        .map(|k| moments(&q, MEASURE, kernel.nu2(l.k2(k)), &field.column(k)))
        .collect()
}

/// `sum_k weight(k) w pair(phi(-k), psi(k))`, summed in index order.
pub(crate) fn weighted_pairing(
    phi: &SpectralField,
    psi: &SpectralField,
    xi: f64,
    weight: impl Fn(usize) -> f64,
) -> Result<Complex64> {
    weighted_pairing_scaled(phi, psi, xi, weight).map(|(v, _)| v)
}

/// As [`weighted_pairing`], also returning the sum of term magnitudes, the
/// scale of its round-off.
pub(crate) fn weighted_pairing_scaled(
    phi: &SpectralField,
    psi: &SpectralField,
    xi: f64,
    weight: impl Fn(usize) -> f64,
) -> Result<(Complex64, f64)> {
    phi.same_grid(psi)?;
    let (mp, mq) = (field_moments(phi, xi), field_moments(psi, xi));
    let l = &phi.grid.lattice;
    let w = l.momentum_weight();
    let mut acc = Complex64::default();
    let mut scale = 0.0;
    for k in 0..phi.nk() {
        let term = pair(&mp[l.negate_flat(k)], &mq[k]) * (w * weight(k));
        acc += term;
        scale += term.norm();
    }
    Ok((acc, scale))
}

pub(crate) fn require_real(phi: &SpectralField, psi: &SpectralField) -> Result<()> {
    for f in [phi, psi] {
        if !f.real {
            return Err(Error::Reality(format!(
                "conjugate-symmetry defect {:e}",
                f.reality_defect()
            )));
        }
    }
    Ok(())
}

/// `omega(phi, psi) = -int int sum_k phi~(t,-k) Delta~(t,tau,k) psi~(tau,k)`
/// with measures `t^3 dt`, `tau^3 dtau`, `d^3k/(2pi)^3`.
pub fn symplectic(phi: &SpectralField, psi: &SpectralField, xi: f64) -> Result<f64> {
    require_real(phi, psi)?;
    Ok(weighted_pairing(phi, psi, xi, |_| 1.0)?.re)
}

/// `||phi||^2 = sum_k w int dt t^3 |phi~|^2`.
pub fn norm(field: &SpectralField) -> f64 {
    let q = quadrature(&field.grid);
    let nk = field.nk();
    let w = field.grid.lattice.momentum_weight();
    let e = MEASURE.volume_exponent();
    let mut acc = 0.0;
    for (i, slice) in field.values.chunks(nk).enumerate() {
        let ti: f64 = slice.iter().map(|z| z.norm_sqr()).sum();
        acc += q.simpson[i] * (e * q.s[i]).exp() * ti;
    }
    (w * acc).sqrt()
}

/// A proper rotation that maps the lattice onto itself.
fn lattice_rotation(r: &[[f64; 3]; 3], l: &Lattice) -> Result<[[i64; 3]; 3]> {
    let mut out = [[0i64; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let v = r[i][j];
            if !v.is_finite() {
                return Err(Error::InvalidInput("nonfinite rotation".into()));
            }
            out[i][j] = v.round() as i64;
        }
    }
    for i in 0..3 {
        for j in 0..3 {
            let dot: f64 = (0..3).map(|m| r[m][i] * r[m][j]).sum();
            if (dot - if i == j { 1.0 } else { 0.0 }).abs() > 1e-12 {
                return Err(Error::InvalidInput("rotation matrix is not orthogonal".into()));
            }
        }
    }
    let det = r[0][0] * (r[1][1] * r[2][2] - r[1][2] * r[2][1]) - r[0][1] * (r[1][0] * r[2][2] - r[1][2] * r[2][0])
        + r[0][2] * (r[1][0] * r[2][1] - r[1][1] * r[2][0]);
    if (det - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidInput(format!("rotation determinant {det} != 1")));
    }
    let exact = (0..3).all(|i| (0..3).all(|j| (r[i][j] - out[i][j] as f64).abs() < 1e-12));
    if !exact {
        return Err(Error::InvalidInput("rotation is not a lattice symmetry".into()));
    }
    for i in 0..3 {
        for j in 0..3 {
            if out[i][j] != 0 && (l.n[i] != l.n[j] || l.len[i] != l.len[j]) {
                return Err(Error::InvalidInput("rotation mixes inequivalent lattice axes".into()));
            }
        }
    }
    Ok(out)
}

/// `phi~ -> e^{ik.a} phi~(R^{-1} k)` for lattice-realizable rotations `R`.
/// Nyquist components, which have no sign, take the real part of the phase.
pub fn act_euclidean(field: &SpectralField, r: &[[f64; 3]; 3], a: &[f64; 3]) -> Result<SpectralField> {
    let l = &field.grid.lattice;
    let ri = lattice_rotation(r, l)?;
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("nonfinite translation".into()));
    }
    let nk = l.size();
    let mut source = vec![0usize; nk];
    let mut phase = vec![Complex64::default(); nk];
    for (idx, (src, ph)) in source.iter_mut().zip(phase.iter_mut()).enumerate() {
        let j = l.unflat(idx);
        let m: [i64; 3] = [0, 1, 2].map(|ax| l.mode(ax, j[ax]));
        // R^{-1} = R^T
        let mut jr = [0usize; 3];
        for (ax, slot) in jr.iter_mut().enumerate() {
            let mm: i64 = (0..3).map(|b| ri[b][ax] * m[b]).sum();
            *slot = mm.rem_euclid(l.n[ax] as i64) as usize;
        }
        *src = l.flat(jr);
        let mut p = Complex64::new(1.0, 0.0);
        for ax in 0..3 {
            let ka = l.wavenumber(ax, j[ax]) * a[ax];
            p *= if l.is_nyquist(ax, j[ax]) { Complex64::new(ka.cos(), 0.0) } else { Complex64::from_polar(1.0, ka) };
        }
        *ph = p;
    }
    let mut values = vec![Complex64::default(); field.values.len()];
    for (out, inp) in values.chunks_mut(nk).zip(field.values.chunks(nk)) {
        for k in 0..nk {
            out[k] = phase[k] * inp[source[k]];
        }
    }
    Ok(SpectralField { grid: field.grid.clone(), values, real: field.real })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(nt: usize, n: usize) -> GridSpec {
        GridSpec::new(TimeGrid::new(1.0, 4.0, nt).unwrap(), Lattice::cubic(n, 6.0).unwrap())
    }

    fn bump(u: f64) -> f64 {
        if u.abs() < 1.0 {
            (-1.0 / (1.0 - u * u)).exp()
        } else {
            0.0
        }
    }

    fn source(grid: &GridSpec, c: [f64; 3]) -> SpectralField {
        let (s0, s1) = (grid.time.t_min.ln(), grid.time.t_max.ln());
        let (sc, w) = ((0.5 + 0.1 * c[0]) * (s0 + s1), 0.3 * (s1 - s0));
        SpectralField::from_fn(grid, |t, x| {
            let r2: f64 = (0..3).map(|a| (x[a] - c[a]).powi(2) / (0.5 + 0.2 * a as f64)).sum();
            bump((t.ln() - sc) / w) * (-r2).exp()
        })
    }

    #[test]
    fn kernel_properties() {
        let k = ModeKernel::new(0.0).unwrap();
        assert_eq!(k.eval(1.7, 1.7, 0.4).unwrap(), 0.0);
        assert!(k.eval(0.0, 1.0, 1.0).is_err());
        for (xi, kk) in [(0.0, 0.3), (0.25, 2.0), (0.1, 0.6)] {
            let k = ModeKernel::new(xi).unwrap();
            let (t, h) = (1.3, 1e-5);
            let d = (k.eval(t + h, t, kk).unwrap() - k.eval(t - h, t, kk).unwrap()) / (2.0 * h);
            assert!((d * t.powi(3) - 1.0).abs() < 1e-8);
            assert!((k.eval(2.0, 1.1, kk).unwrap() + k.eval(1.1, 2.0, kk).unwrap()).abs() < 1e-15);
        }
        let at = |kk: f64| ModeKernel::new(0.0).unwrap().eval(2.0, 1.0, kk).unwrap();
        let z = at(1.0);
        assert!((z - 2f64.ln() / 2.0).abs() < 1e-15);
        assert!((at(1.0 - 1e-9) - z).abs() < 1e-8 && (at(1.0 + 1e-9) - z).abs() < 1e-8);
    }

    #[test]
    fn state_wronskian_and_ccr() {
        let st = ModeState::new(0.25).unwrap();
        let kern = ModeKernel::new(0.25).unwrap();
        for (t, k2) in [(1.0, 0.0), (2.5, 3.0), (7.0, 0.2)] {
            let u = st.mode(t, k2).unwrap();
            let du = st.mode_dt(t, k2).unwrap();
            let w = u * du.conj() - u.conj() * du;
            assert!((w - Complex64::new(0.0, 1.0 / t.powi(3))).norm() < 1e-12 / t.powi(3));
            let tau = 1.4;
            let o = st.two_point_kernel(t, tau, k2).unwrap();
            assert!((-2.0 * o.im - kern.eval(t, tau, k2.sqrt()).unwrap()).abs() < 1e-13);
            assert!((st.power(t, k2).unwrap() - st.two_point_kernel(t, t, k2).unwrap().re).abs() < 1e-15);
        }
        assert!(matches!(ModeState::new(0.1).unwrap().mode(1.0, 0.1), Err(Error::StateDomain { .. })));
    }

    #[test]
    fn wave_operator_homogeneous_solutions() {
        let g = GridSpec::new(TimeGrid::new(1.0, 3.0, 200).unwrap(), Lattice::cubic(4, 6.0).unwrap());
        let xi = 0.05;
        let kern = ModeKernel::new(xi).unwrap();
        let t = g.time.t_values();
        let nk = g.nk();
        let mut values = vec![Complex64::default(); g.len()];
        for k in 0..nk {
            let nu2 = kern.nu2(g.lattice.k2(k));
            for (i, &ti) in t.iter().enumerate() {
                // t^{-1} S_nu(ln t) solves the mode equation on every branch
                values[i * nk + k] = Complex64::new(sinh_over(nu2, ti.ln()) / ti, 0.0);
            }
        }
        let f = SpectralField { grid: g.clone(), values, real: false };
        let out = wave_apply(&f, xi).unwrap();
        assert!(out.values.iter().all(|z| z.norm() < 1e-6));
        let z = wave_apply(&SpectralField::zeros(&g), xi).unwrap();
        assert!(z.values.iter().all(|v| *v == Complex64::default()));
        let short = GridSpec::new(TimeGrid::new(1.0, 3.0, 4).unwrap(), Lattice::cubic(2, 1.0).unwrap());
        assert!(matches!(wave_apply(&SpectralField::zeros(&short), 0.0), Err(Error::Stencil { .. })));
    }

    #[test]
    fn green_inverts_wave_operator() {
        let g = grid(512, 6);
        let phi = source(&g, [0.3, 0.0, -0.2]);
        for which in [Causal::Retarded, Causal::Advanced] {
            for xi in [0.0, 0.25] {
                let out = wave_apply(&green(&phi, xi, which).unwrap(), xi).unwrap();
                let res = norm(&out.sub(&phi).unwrap()) / norm(&phi);
                assert!(res < 1e-6, "{which:?} xi={xi}: {res:e}");
            }
        }
    }

    #[test]
    fn retarded_output_vanishes_before_source() {
        let g = grid(256, 4);
        let phi = source(&g, [0.0; 3]);
        let out = green(&phi, 0.1, Causal::Retarded).unwrap();
        let nk = g.nk();
        let first = (0..g.nt()).find(|&i| (0..nk).any(|k| phi.at(i, k).norm() > 0.0)).unwrap();
        for i in 0..first {
            for k in 0..nk {
                assert!(out.at(i, k).norm() < 1e-12);
            }
        }
        let bad = SpectralField::from_fn(&g, |t, _| t);
        assert!(matches!(green(&bad, 0.0, Causal::Retarded), Err(Error::Support { .. })));
    }

    #[test]
    fn symplectic_antisymmetry_and_degeneracy() {
        let g = grid(512, 8);
        let phi = source(&g, [0.5, 0.1, 0.0]);
        let psi = source(&g, [-0.4, 0.3, 0.2]);
        let xi = 0.1;
        let a = symplectic(&phi, &psi, xi).unwrap();
        let b = symplectic(&psi, &phi, xi).unwrap();
        assert!(a.abs() > 1e-6);
        assert!((a + b).abs() < 1e-12 * a.abs());
        assert!(symplectic(&phi, &phi, xi).unwrap().abs() < 1e-12 * a.abs());
        let exact = wave_apply(&psi, xi).unwrap();
        let d = symplectic(&phi, &exact, xi).unwrap();
        assert!(d.abs() < 1e-6 * norm(&phi) * norm(&exact), "{d:e}");
    }

    #[test]
    fn euclidean_action() {
        let g = grid(64, 16);
        let phi = source(&g, [0.5, 0.1, 0.0]);
        let psi = source(&g, [-0.4, 0.3, 0.2]);
        let id = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        assert_eq!(act_euclidean(&phi, &id, &[0.0; 3]).unwrap(), phi);
        let rot = [[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]];
        let w0 = symplectic(&phi, &psi, 0.0).unwrap();
        for (r, a) in [(id, [0.3, -0.2, 1.1]), (rot, [0.0; 3]), (rot, [0.5, 0.5, 0.0])] {
            let w = symplectic(&act_euclidean(&phi, &r, &a).unwrap(), &act_euclidean(&psi, &r, &a).unwrap(), 0.0)
                .unwrap();
            assert!((w - w0).abs() < 1e-8 * w0.abs(), "{w} {w0} {a:?}");
        }
        // lattice shift by one cell moves position samples by one index
        let dx = g.lattice.spacing(0);
        let shifted = act_euclidean(&phi, &id, &[dx, 0.0, 0.0]).unwrap().to_position_real().unwrap();
        let orig = phi.to_position_real().unwrap();
        let n = 16;
        for i in 0..g.len() {
            let j = i % n;
            let src = i - j + (j + n - 1) % n;
            assert!((shifted[i] - orig[src]).abs() < 1e-12);
        }
        let skew = [[1.0, 0.1, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        assert!(act_euclidean(&phi, &skew, &[0.0; 3]).is_err());
    }
}
