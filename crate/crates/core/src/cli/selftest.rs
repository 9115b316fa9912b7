use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::RunConfig;
use crate::circle2::{self, CircleSpectrum, SDirection};
use crate::deform::{self, DeformationParams, SPower};
use crate::diagnostics::{self, Form};
use crate::error::{Error, Result};
use crate::frw4::{self, Causal, GridSpec, Lattice, SpectralField, TimeGrid};
use crate::geometry::{classify_homothety, MetricSpec, VectorFieldSpec};
use crate::series::FormalSeries;
use crate::source::{spacelike_separated, BumpSource, Profile, TimeBump};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Below,
    Above,
}

/// One measured invariant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
    pub relation: Relation,
    pub pass: bool,
}

impl Check {
    fn below(name: &str, measured: f64, tolerance: f64) -> Self {
        Self { name: name.into(), measured, tolerance, relation: Relation::Below, pass: measured < tolerance }
    }

    fn above(name: &str, measured: f64, tolerance: f64) -> Self {
        Self { name: name.into(), measured, tolerance, relation: Relation::Above, pass: measured > tolerance }
    }

    fn holds(name: &str, ok: bool) -> Self {
        Self::below(name, if ok { 0.0 } else { 1.0 }, 0.5)
    }

    pub fn line(&self) -> String {
        let op = match self.relation {
            Relation::Below => "<",
            Relation::Above => ">",
        };
        format!(
            "[{}] {}: {:e} {op} {:e}",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.measured,
            self.tolerance
        )
    }
}

fn rel(a: &SpectralField, b: &SpectralField) -> Result<f64> {
    Ok(frw4::norm(&a.sub(b)?) / frw4::norm(b))
}

fn line_source(c: f64, w: f64, time: TimeBump) -> BumpSource {
    BumpSource::new(time, [Profile::Bump { center: c, half_width: w }, Profile::Gaussian { center: 0.0, sigma: 0.6 }, Profile::Constant])
}

fn series_check(order: usize) -> Result<Check> {
    let (cos, sec) = (FormalSeries::cos(order), FormalSeries::sec(order));
    let (s, s_inv) = (FormalSeries::sqrt_sec(order), FormalSeries::sqrt_cos(order));
    let one = FormalSeries::one(order);
    let ok = cos.mul(&sec)?.sub(&one)?.is_zero()
        && s.mul(&s)?.sub(&sec)?.is_zero()
        && s.mul(&s_inv)?.sub(&one)?.is_zero();
    Ok(Check::holds("series identities (exact)", ok))
}

fn homothety_check() -> Result<Check> {
    let mut cases = vec![(MetricSpec::Minkowski { dim: 4 }, VectorFieldSpec::Dilation)];
    for p in [0.5, 2.0 / 3.0, 1.0] {
        cases.push((MetricSpec::FrwPower { dim: 4, p }, VectorFieldSpec::FrwHomothety { p }));
    }
    let mut worst: f64 = 0.0;
    for (m, v) in &cases {
        let r = classify_homothety(m, v)?;
        worst = worst.max((r.c - 2.0).abs()).max(r.max_residual);
    }
    Ok(Check::below("homothety constant c = 2", worst, 1e-10))
}

fn green_checks(seed: u64) -> Result<Vec<Check>> {
    let grid = GridSpec::new(TimeGrid::new(1.0, 3.0, 512)?, Lattice::new([16, 4, 1], [8.0, 4.0, 1.0])?);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..3 {
        let t0 = rng.gen_range(1.1..1.6);
        let src = line_source(rng.gen_range(-1.0..1.0), rng.gen_range(1.0..2.0), TimeBump::between(t0, t0 + rng.gen_range(0.6..1.2))?);
        let phi = src.to_field(&grid);
        for which in [Causal::Retarded, Causal::Advanced] {
            let back = frw4::wave_apply(&frw4::green(&phi, 0.25, which)?, 0.25)?;
            worst = worst.max(rel(&back, &phi)?);
        }
    }
    let time = TimeGrid::new(1.0, 3.0, 512)?;
    let mut worst2: f64 = 0.0;
    for j in 0..3 {
        let bump = TimeBump::between(1.2 + 0.1 * j as f64, 2.4)?;
        let f = CircleSpectrum::Gaussian { phi0: 0.3 * j as f64, sigma: 0.4 }.field(&time, 32, &bump)?;
        for which in [Causal::Retarded, Causal::Advanced] {
            let back = circle2::wave2_apply(&circle2::green2(&f, which)?)?;
            worst2 = worst2.max(back.sub(&f)?.norm() / f.norm());
        }
    }
    Ok(vec![
        Check::below("frw4 Green identity", worst, 1e-6),
        Check::below("circle2 Green identity", worst2, 1e-6),
    ])
}

fn wronskian_check(seed: u64) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5752);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let (t, k, xi) = (rng.gen_range(1.0..5.0), rng.gen_range(0.0..10.0), rng.gen_range(0.0..1.0));
        let h = 1e-4 * t;
        let d4 = (frw4::mode_kernel_eval(t + h, t, k, xi)? - frw4::mode_kernel_eval(t - h, t, k, xi)?) / (2.0 * h);
        worst = worst.max((d4 * t.powi(3) - 1.0).abs());
        let n = k.round() as i64;
        let d2 = (circle2::mode_kernel2(t + h, t, n)? - circle2::mode_kernel2(t - h, t, n)?) / (2.0 * h);
        worst = worst.max((d2 * t - 1.0).abs());
    }
    Ok(Check::below("Wronskian normalization", worst, 1e-6))
}

fn degeneracy_check() -> Result<Check> {
    let grid = GridSpec::new(TimeGrid::new(1.0, 4.0, 512)?, Lattice::new([16, 8, 1], [8.0, 6.0, 1.0])?);
    let phi = line_source(0.4, 1.5, TimeBump::between(1.4, 3.0)?).to_field(&grid);
    let psi = line_source(-0.3, 1.2, TimeBump::between(1.6, 3.3)?).to_field(&grid);
    let exact = frw4::wave_apply(&psi, 0.25)?;
    let scale = frw4::norm(&phi) * frw4::norm(&exact);
    let p = DeformationParams::frw4(0.1, 0.25)?;
    let d = frw4::symplectic(&phi, &exact, 0.25)?.abs().max(deform::deformed_symplectic(&phi, &exact, &p)?.abs());
    Ok(Check::below("kernel degeneracy on P-exact sources", d / scale, 1e-6))
}

fn duality_checks() -> Result<Vec<Check>> {
    let grid = GridSpec::new(TimeGrid::new(1.0, 2.0, 4)?, Lattice::new([2048, 1, 1], [32.0, 1.0, 1.0])?);
    let phi = BumpSource::new(TimeBump::between(1.1, 1.9)?, [Profile::Bump { center: 0.0, half_width: 2.0 }, Profile::Constant, Profile::Constant])
        .to_field(&grid);
    let p = DeformationParams::frw4(0.1, 0.25)?;
    let spectral = deform::smap(&phi, &p, SPower::One)?.to_position_real()?;
    let direct = deform::convolve_s2(&phi, &p, deform::TAIL_MASS_TOL)?;
    let num: f64 = spectral.iter().zip(&direct).map(|(a, b)| (a - b).powi(2)).sum();
    let den: f64 = spectral.iter().map(|a| a * a).sum();
    let dx = grid.lattice.spacing(0);
    let n = grid.lattice.n[0];
    let mass: f64 = (0..n)
        .map(|j| {
            let m = if j <= n / 2 { j as f64 } else { j as f64 - n as f64 };
            deform::position_kernel(m * dx, p.lambda).map(|k| k * dx)
        })
        .sum::<Result<f64>>()?;
    Ok(vec![
        Check::below("S^2 multiplier vs sech convolution", (num / den).sqrt(), 1e-6),
        Check::below("sech kernel normalization", (mass - 1.0).abs(), 1e-8),
    ])
}

fn power_check() -> Result<Check> {
    let l = Lattice::new([32, 8, 8], [10.0, 6.0, 6.0])?;
    let p = DeformationParams::frw4(0.1, 0.25)?;
    let (a, b) = (deform::power_spectrum(2.0, &l, &p, false)?, deform::power_spectrum(2.0, &l, &p, true)?);
    let worst = (0..l.size())
        .map(|k| (b[k] / a[k] - p.multiplier(l.k(k)[0])).abs())
        .fold(0.0, f64::max);
    Ok(Check::below("deformed power-spectrum ratio", worst, 1e-12))
}

fn causality_checks() -> Result<Vec<Check>> {
    let grid = GridSpec::new(TimeGrid::new(1.0, 1f64.exp(), 128)?, Lattice::new([2048, 1, 1], [48.0, 1.0, 1.0])?);
    let src = BumpSource::new(TimeBump::between(1.1, 1.6)?, [Profile::Bump { center: 0.0, half_width: 2.5 }, Profile::Constant, Profile::Constant]);
    let zero = diagnostics::causality_leakage(&src, &grid, &DeformationParams::frw4(0.0, 0.25)?)?;
    let leak = diagnostics::causality_leakage(&src, &grid, &DeformationParams::frw4(0.1, 0.25)?)?;
    let rate_err = match (leak.fitted_rate, leak.expected_rate) {
        (Some(r), Some(e)) => (r / e - 1.0).abs(),
        _ => f64::INFINITY,
    };
    Ok(vec![
        Check::below("undeformed leakage", zero.masses.iter().cloned().fold(0.0, f64::max), 1e-10),
        Check::above("deformed leakage at the cone", leak.masses[0], 0.0),
        Check::below("leakage rate vs pi/(6 lambda)", rate_err, 0.2),
    ])
}

const X1_ROTATION: [[f64; 3]; 3] = [[1.0, 0.0, 0.0], [0.0, 0.0, -1.0], [0.0, 1.0, 0.0]];
const X1_TO_X2: [[f64; 3]; 3] = [[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]];
const IDENTITY: [[f64; 3]; 3] = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
const SHIFT: [f64; 3] = [0.37, -0.81, 1.1];

fn symmetry_checks(seed: u64) -> Result<Vec<Check>> {
    let grid = GridSpec::new(TimeGrid::new(1.0, 3.0, 32)?, Lattice::cubic(32, 3.0)?);
    let p = DeformationParams::frw4(0.1, 0.25)?;
    let d = |r: &[[f64; 3]; 3], a: &[f64; 3], form, trials| {
        diagnostics::symmetry_defect(r, a, form, &p, &grid, trials, seed).map(|d| d.max_defect)
    };
    let mut omega: f64 = 0.0;
    for (r, a) in [(&IDENTITY, &SHIFT), (&X1_ROTATION, &[0.0; 3]), (&X1_TO_X2, &[0.0; 3])] {
        omega = omega.max(d(r, a, Form::Omega, 2)?);
    }
    let star = d(&IDENTITY, &SHIFT, Form::OmegaStar, 2)?.max(d(&X1_ROTATION, &[0.0; 3], Form::OmegaStar, 2)?);
    Ok(vec![
        Check::below("omega Euclidean invariance", omega, 1e-8),
        Check::below("omega_star translation / x1-rotation invariance", star, 1e-8),
        Check::above("omega_star x1 -> x2 rotation witness", d(&X1_TO_X2, &[0.0; 3], Form::OmegaStar, 8)?, 0.01),
    ])
}

fn obstruction_checks(seed: u64) -> Result<Vec<Check>> {
    let grid = GridSpec::new(TimeGrid::new(1.0, 3.0, 256)?, Lattice::cubic(32, 3.0)?);
    let p = DeformationParams::frw4(0.0, 0.25)?;
    let (a, b) = diagnostics::trial_pair(&grid, seed, 0)?;
    let dil = diagnostics::obstruction_residual(&VectorFieldSpec::TimeDilation, &a, &b, &grid, &p)?;
    let half = diagnostics::obstruction_residual(&VectorFieldSpec::TimeDilation.scaled(0.5), &a, &b, &grid, &p)?;
    let kill = diagnostics::obstruction_residual(&VectorFieldSpec::translation_axis(4, 1), &a, &b, &grid, &p)?;
    Ok(vec![
        Check::below("obstruction lhs/omega = -6 for t d_t", (dil.ratio / dil.expected_ratio - 1.0).abs(), 1e-3),
        Check::below("obstruction linear in c_v", (half.lhs / dil.lhs - 0.5).abs() / 0.5, 1e-3),
        Check::below("obstruction vanishes for Killing d_1", kill.relative_residual, 1e-6),
    ])
}

fn circle_domain_checks() -> Result<Vec<Check>> {
    let time = TimeGrid::new(1.0, 5.0, 32)?;
    let bump = TimeBump::between(1.3, 3.5)?;
    let lambda = 0.1;
    let phi = CircleSpectrum::Gaussian { phi0: 0.5, sigma: 0.3 }.field(&time, 64, &bump)?;
    let back = circle2::smap2(&circle2::smap2(&phi, lambda, SDirection::S)?, lambda, SDirection::SInverse)?;
    let slow = CircleSpectrum::Exponential { rate: lambda }.field(&time, 64, &bump)?;
    let rejected = matches!(circle2::smap2(&slow, lambda, SDirection::SInverse), Err(Error::DomainViolation { .. }));
    Ok(vec![
        Check::below("circle S^-1 S round trip", back.sub(&phi)?.norm() / phi.norm(), 1e-10),
        Check::holds("circle S^-1 rejects slow spectral decay", rejected),
    ])
}

fn nonlocality_checks() -> Result<Vec<Check>> {
    let grid = GridSpec::new(TimeGrid::new(1.0, 2.0, 64)?, Lattice::new([2048, 4, 1], [16.0, 4.0, 1.0])?);
    let tb = TimeBump::between(1.2, 1.5)?;
    let w = 0.5;
    let a = line_source(0.0, w, tb);
    let b = line_source(2.0 * w + 0.01 + (1.5f64 / 1.2).ln(), w, TimeBump::between(1.25, 1.45)?);
    if !spacelike_separated(&a, &b) {
        return Err(Error::CrossCheck("nonlocality pair is not spacelike separated".into()));
    }
    let c = line_source(0.5, 3.0, tb);
    let d = BumpSource::new(
        TimeBump::between(1.3, 1.8)?,
        [Profile::Gaussian { center: -0.5, sigma: 1.5 }, Profile::Gaussian { center: 0.3, sigma: 0.8 }, Profile::Constant],
    );
    let f: Vec<SpectralField> = [a, b, c, d].iter().map(|s| s.to_field(&grid)).collect();
    let at = |lambda| -> Result<f64> {
        let p = DeformationParams::frw4(lambda, 0.25)?;
        Ok(deform::commutator_4pt([&f[0], &f[1], &f[2], &f[3]], &p)?.normalized)
    };
    Ok(vec![
        Check::above("4-point commutator nonzero at lambda = 0.1", at(0.1)?, 1e-6),
        Check::below("4-point commutator vanishes at lambda = 0", at(0.0)?, 1e-10),
    ])
}

fn gap_checks() -> Result<Vec<Check>> {
    let rows = diagnostics::formal_convergent_gap(&[0.0, 0.5 / 0.3, 2.0 / 0.3], 0.1, 8)?;
    Ok(vec![
        Check::below("formal gap at s = 0", rows[0].gap, f64::MIN_POSITIVE),
        Check::below("formal gap / remainder bound at s = 0.5", rows[1].gap / rows[1].bound.unwrap_or(0.0), 1.0),
        Check::above("formal gap at s = 2", rows[2].gap, 0.1),
    ])
}

/// Reduced-size run of every invariant, in a fixed order.
pub fn run_selftest(cfg: &RunConfig) -> Result<Vec<Check>> {
    let seed = cfg.seed;
    let probe = GridSpec::new(cfg.time_grid()?, Lattice::cubic(2, 1.0)?);
    frw4::wave_apply(&SpectralField::zeros(&probe), cfg.xi)?;
    let mut checks = vec![series_check(cfg.order)?, homothety_check()?];
    checks.extend(green_checks(seed)?);
    checks.push(wronskian_check(seed)?);
    checks.push(degeneracy_check()?);
    checks.extend(duality_checks()?);
    checks.push(power_check()?);
    checks.extend(causality_checks()?);
    checks.extend(symmetry_checks(seed)?);
    checks.extend(obstruction_checks(seed)?);
    checks.extend(circle_domain_checks()?);
    checks.extend(nonlocality_checks()?);
    checks.extend(gap_checks()?);
    Ok(checks)
}
