//! Full-size acceptance run: one line per criterion, nonzero exit on any failure.

use std::fs;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use twistqft::circle2::{self, CircleSpectrum, SDirection};
use twistqft::deform::{self, DeformationParams, SPower};
use twistqft::diagnostics::{self, Form};
use twistqft::frw4::{self, Causal, GridSpec, Lattice, SpectralField, TimeGrid};
use twistqft::geometry::{classify_homothety, MetricSpec, VectorFieldSpec};
use twistqft::series::FormalSeries;
use twistqft::source::{spacelike_separated, BumpSource, Profile, TimeBump};
use twistqft::{Error, Result};

const SEED: u64 = 20260;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { pass, detail })
}

fn within(elapsed: Duration, budget: f64) -> (bool, String) {
    let s = elapsed.as_secs_f64();
    (s < budget, format!("{s:.2}s / {budget}s"))
}

fn line_source(c: f64, w: f64, time: TimeBump) -> BumpSource {
    BumpSource::new(time, [Profile::Bump { center: c, half_width: w }, Profile::Gaussian { center: 0.0, sigma: 0.6 }, Profile::Constant])
}

fn c1() -> Result<Outcome> {
    let n = 8;
    let one = FormalSeries::one(n);
    let (cos, sec, s, s_inv) = (FormalSeries::cos(n), FormalSeries::sec(n), FormalSeries::sqrt_sec(n), FormalSeries::sqrt_cos(n));
    let ok = cos.mul(&sec)?.sub(&one)?.is_zero() && s.mul(&s)?.sub(&sec)?.is_zero() && s.mul(&s_inv)?.sub(&one)?.is_zero();
    outcome(ok, "cos*sec = 1, sqrt(sec)^2 = sec, S*S^-1 = 1 exactly at order 8".into())
}

fn c2() -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    let mut cases = vec![(MetricSpec::Minkowski { dim: 4 }, VectorFieldSpec::Dilation)];
    for p in [0.5, 2.0 / 3.0, 1.0] {
        cases.push((MetricSpec::FrwPower { dim: 4, p }, VectorFieldSpec::FrwHomothety { p }));
    }
    for (m, v) in &cases {
        let r = classify_homothety(m, v)?;
        worst = worst.max((r.c - 2.0).abs()).max(r.max_residual);
    }
    outcome(worst < 1e-10, format!("max |c - 2| / residual {worst:e} < 1e-10"))
}

fn c3() -> Result<Outcome> {
    let grid = GridSpec::new(TimeGrid::new(1.0, 3.0, 512)?, Lattice::new([16, 8, 4], [8.0, 6.0, 4.0])?);
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let t0 = rng.gen_range(1.05..1.6);
        let tb = TimeBump::between(t0, t0 + rng.gen_range(0.5..1.3))?;
        let src = BumpSource::new(
            tb,
            [
                Profile::Bump { center: rng.gen_range(-1.0..1.0), half_width: rng.gen_range(1.0..2.5) },
                Profile::Gaussian { center: rng.gen_range(-0.5..0.5), sigma: rng.gen_range(0.5..0.9) },
                Profile::Gaussian { center: 0.0, sigma: rng.gen_range(0.5..0.7) },
            ],
        );
        let phi = src.to_field(&grid);
        for which in [Causal::Retarded, Causal::Advanced] {
            let back = frw4::wave_apply(&frw4::green(&phi, 0.25, which)?, 0.25)?;
            worst = worst.max(frw4::norm(&back.sub(&phi)?) / frw4::norm(&phi));
        }
    }
    let time = TimeGrid::new(1.0, 3.0, 512)?;
    let mut worst2: f64 = 0.0;
    for _ in 0..10 {
        let t0 = rng.gen_range(1.05..1.6);
        let bump = TimeBump::between(t0, t0 + rng.gen_range(0.5..1.3))?;
        let spec = CircleSpectrum::Gaussian { phi0: rng.gen_range(-3.0..3.0), sigma: rng.gen_range(0.3..0.8) };
        let f = spec.field(&time, 64, &bump)?;
        for which in [Causal::Retarded, Causal::Advanced] {
            let back = circle2::wave2_apply(&circle2::green2(&f, which)?)?;
            worst2 = worst2.max(back.sub(&f)?.norm() / f.norm());
        }
    }
    outcome(worst < 1e-6 && worst2 < 1e-6, format!("frw4 {worst:e}, circle2 {worst2:e} < 1e-6 over 10 sources each"))
}

fn c4() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 4);
    let (mut w4, mut w2): (f64, f64) = (0.0, 0.0);
    for _ in 0..100 {
        let (t, k, xi) = (rng.gen_range(0.5..10.0), rng.gen_range(0.0..20.0), rng.gen_range(0.0..2.0));
        let h = 1e-4 * t;
        let d4 = (frw4::mode_kernel_eval(t + h, t, k, xi)? - frw4::mode_kernel_eval(t - h, t, k, xi)?) / (2.0 * h);
        w4 = w4.max((d4 * t.powi(3) - 1.0).abs());
        let n = k.round() as i64;
        let d2 = (circle2::mode_kernel2(t + h, t, n)? - circle2::mode_kernel2(t - h, t, n)?) / (2.0 * h);
        w2 = w2.max((d2 * t - 1.0).abs());
    }
    outcome(w4 < 1e-6 && w2 < 1e-6, format!("t^3 d_t K - 1: {w4:e}, t d_t K - 1: {w2:e} < 1e-6 over 100 triples"))
}

fn c5() -> Result<Outcome> {
    let grid = GridSpec::new(TimeGrid::new(1.0, 2.0, 4)?, Lattice::new([2048, 1, 1], [32.0, 1.0, 1.0])?);
    let src = BumpSource::new(TimeBump::between(1.1, 1.9)?, [Profile::Bump { center: 0.7, half_width: 2.0 }, Profile::Constant, Profile::Constant]);
    let phi = src.to_field(&grid);
    let dx = grid.lattice.spacing(0);
    let (mut l2, mut norm): (f64, f64) = (0.0, 0.0);
    for lambda in [0.05, 0.1, 0.2] {
        let p = DeformationParams::frw4(lambda, 0.25)?;
        let spectral = deform::smap(&phi, &p, SPower::One)?.to_position_real()?;
        let direct = deform::convolve_s2(&phi, &p, deform::TAIL_MASS_TOL)?;
        let num: f64 = spectral.iter().zip(&direct).map(|(a, b)| (a - b).powi(2)).sum();
        let den: f64 = spectral.iter().map(|a| a * a).sum();
        l2 = l2.max((num / den).sqrt());
        let mass: f64 = (-1024i64..1024).map(|m| deform::position_kernel(m as f64 * dx, lambda).map(|k| k * dx)).sum::<Result<f64>>()?;
        norm = norm.max((mass - 1.0).abs());
    }
    outcome(l2 < 1e-6 && norm < 1e-8, format!("L2 {l2:e} < 1e-6, |int K - 1| {norm:e} < 1e-8"))
}

fn c6() -> Result<Outcome> {
    let start = Instant::now();
    let l = Lattice::new([64, 16, 16], [20.0, 8.0, 8.0])?;
    let mut worst: f64 = 0.0;
    for (lambda, xi, t) in [(0.1, 0.25, 2.0), (0.2, 0.5, 1.3), (0.05, 1.0, 4.0)] {
        let p = DeformationParams::frw4(lambda, xi)?;
        let (a, b) = (deform::power_spectrum(t, &l, &p, false)?, deform::power_spectrum(t, &l, &p, true)?);
        for k in 0..l.size() {
            worst = worst.max((b[k] / a[k] - 1.0 / (3.0 * lambda * l.k(k)[0]).cosh()).abs());
        }
    }
    let (fast, time) = within(start.elapsed(), 5.0);
    outcome(worst < 1e-12 && fast, format!("max |ratio - sech| {worst:e} < 1e-12, {time}"))
}

fn c7() -> Result<Outcome> {
    let start = Instant::now();
    let src = BumpSource::new(TimeBump::between(1.1, 1.6)?, [Profile::Bump { center: 0.0, half_width: 2.5 }, Profile::Constant, Profile::Constant]);
    let grid = GridSpec::new(TimeGrid::new(1.0, 1f64.exp(), 128)?, Lattice::new([4096, 1, 1], [48.0, 1.0, 1.0])?);
    let zero = diagnostics::causality_leakage(&src, &grid, &DeformationParams::frw4(0.0, 0.25)?)?;
    let z = zero.masses.iter().cloned().fold(0.0, f64::max);
    let mut pass = z < 1e-10;
    let mut detail = format!("lambda=0 mass {z:e}");
    for lambda in [0.05, 0.1, 0.2] {
        let leak = diagnostics::causality_leakage(&src, &grid, &DeformationParams::frw4(lambda, 0.25)?)?;
        let expected = std::f64::consts::PI / (6.0 * lambda);
        let err = leak.fitted_rate.map_or(f64::INFINITY, |r| (r / expected - 1.0).abs());
        pass &= leak.masses[0] > 0.0 && err < 0.2;
        detail += &format!("; lambda={lambda} rate err {:.1}%", 100.0 * err);
    }
    let (fast, time) = within(start.elapsed(), 60.0);
    outcome(pass && fast, format!("{detail}, {time}"))
}

const X1_ROTATION: [[f64; 3]; 3] = [[1.0, 0.0, 0.0], [0.0, 0.0, -1.0], [0.0, 1.0, 0.0]];
const X1_TO_X2: [[f64; 3]; 3] = [[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]];
const X2_TO_X3: [[f64; 3]; 3] = [[1.0, 0.0, 0.0], [0.0, 0.0, 1.0], [0.0, -1.0, 0.0]];
const IDENTITY: [[f64; 3]; 3] = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

fn c8() -> Result<Outcome> {
    let grid = GridSpec::new(TimeGrid::new(1.0, 3.0, 32)?, Lattice::cubic(32, 3.0)?);
    let p = DeformationParams::frw4(0.1, 0.25)?;
    let d = |r: &[[f64; 3]; 3], a: [f64; 3], form, trials| diagnostics::symmetry_defect(r, &a, form, &p, &grid, trials, SEED).map(|d| d.max_defect);
    let shifts = [[0.37, -0.81, 1.1], [-1.2, 0.4, 0.0], [0.0, 0.0, 0.75]];
    let mut omega: f64 = 0.0;
    let mut star: f64 = 0.0;
    for a in shifts {
        omega = omega.max(d(&IDENTITY, a, Form::Omega, 3)?);
        star = star.max(d(&IDENTITY, a, Form::OmegaStar, 3)?);
    }
    for r in [&X1_ROTATION, &X2_TO_X3] {
        star = star.max(d(r, [0.0; 3], Form::OmegaStar, 3)?);
    }
    for r in [&X1_ROTATION, &X1_TO_X2, &X2_TO_X3] {
        omega = omega.max(d(r, [0.0; 3], Form::Omega, 3)?);
    }
    let witness = d(&X1_TO_X2, [0.0; 3], Form::OmegaStar, 8)?;
    outcome(
        omega < 1e-8 && star < 1e-8 && witness > 0.01,
        format!("omega {omega:e} < 1e-8, omega_star {star:e} < 1e-8, x1->x2 witness {witness:e} > 0.01"),
    )
}

fn c9() -> Result<Outcome> {
    let grid = GridSpec::new(TimeGrid::new(1.0, 3.0, 256)?, Lattice::cubic(32, 3.0)?);
    let p = DeformationParams::frw4(0.0, 0.25)?;
    let (mut ratio_err, mut killing): (f64, f64) = (0.0, 0.0);
    for trial in 0..3 {
        let (a, b) = diagnostics::trial_pair(&grid, SEED, trial)?;
        let r = diagnostics::obstruction_residual(&VectorFieldSpec::TimeDilation, &a, &b, &grid, &p)?;
        ratio_err = ratio_err.max((r.ratio / -6.0 - 1.0).abs());
        for v in [VectorFieldSpec::translation_axis(4, 1), VectorFieldSpec::translation_axis(4, 3), VectorFieldSpec::Rotation { axis: [0.0, 0.0, 1.0] }] {
            killing = killing.max(diagnostics::obstruction_residual(&v, &a, &b, &grid, &p)?.relative_residual);
        }
    }
    outcome(ratio_err < 1e-3 && killing < 1e-6, format!("|ratio/-6 - 1| {ratio_err:e} < 1e-3, Killing residual {killing:e} < 1e-6"))
}

fn c10() -> Result<Outcome> {
    let time = TimeGrid::new(1.0, 5.0, 32)?;
    let bump = TimeBump::between(1.3, 3.5)?;
    let mut round: f64 = 0.0;
    let mut rejected = true;
    for lambda in [0.05, 0.1, 0.2] {
        for spec in [CircleSpectrum::Gaussian { phi0: 0.5, sigma: 0.3 }, CircleSpectrum::Gaussian { phi0: -2.0, sigma: 0.5 }] {
            let phi = spec.field(&time, 64, &bump)?;
            let back = circle2::smap2(&circle2::smap2(&phi, lambda, SDirection::S)?, lambda, SDirection::SInverse)?;
            round = round.max(back.sub(&phi)?.norm() / phi.norm());
        }
        let slow = CircleSpectrum::Exponential { rate: lambda }.field(&time, 64, &bump)?;
        rejected &= matches!(circle2::smap2(&slow, lambda, SDirection::SInverse), Err(Error::DomainViolation { .. }));
    }
    outcome(round < 1e-10 && rejected, format!("round trip {round:e} < 1e-10, slow decay rejected: {rejected}"))
}

fn c11() -> Result<Outcome> {
    let grid = GridSpec::new(TimeGrid::new(1.0, 2.0, 64)?, Lattice::new([2048, 4, 1], [16.0, 4.0, 1.0])?);
    let tb = TimeBump::between(1.2, 1.5)?;
    let w = 0.5;
    let a = line_source(0.0, w, tb);
    let b = line_source(2.0 * w + 0.01 + (1.5f64 / 1.2).ln(), w, TimeBump::between(1.25, 1.45)?);
    let certified = spacelike_separated(&a, &b);
    let c = line_source(0.5, 3.0, tb);
    let d = BumpSource::new(
        TimeBump::between(1.3, 1.8)?,
        [Profile::Gaussian { center: -0.5, sigma: 1.5 }, Profile::Gaussian { center: 0.3, sigma: 0.8 }, Profile::Constant],
    );
    let f: Vec<SpectralField> = [a, b, c, d].iter().map(|s| s.to_field(&grid)).collect();
    let at = |lambda| -> Result<f64> {
        let p = DeformationParams::frw4(lambda, 0.25)?;
        Ok(deform::commutator_4pt([&f[0], &f[1], &f[2], &f[3]], &p)?.normalized.abs())
    };
    let (on, off) = (at(0.1)?, at(0.0)?);
    outcome(certified && on > 1e-6 && off < 1e-10, format!("spacelike {certified}, lambda=0.1 {on:e} > 1e-6, lambda=0 {off:e} < 1e-10"))
}

fn c12() -> Result<Outcome> {
    let root = std::env::temp_dir().join(format!("twistqft-acceptance-{}", std::process::id()));
    let run = |tag: &str| -> Result<Vec<Vec<u8>>> {
        let out = root.join(tag);
        let status = Command::new(env!("CARGO_BIN_EXE_twistqft"))
            .args(["selftest", "--set", &format!("seed={SEED}"), "--out"])
            .arg(&out)
            .env_remove("TWISTQFT_OUT")
            .output()?
            .status;
        if !status.success() {
            return Err(Error::CrossCheck(format!("selftest exited with {status}")));
        }
        ["selftest.json", "manifest.json"].iter().map(|f| Ok(fs::read(out.join(f))?)).collect()
    };
    let (a, b) = (run("a")?, run("b")?);
    let _ = fs::remove_dir_all(&root);
    outcome(a == b, "two selftest runs give byte-identical selftest.json and manifest.json".into())
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Result<Outcome>); 12] =
        [("C1", c1), ("C2", c2), ("C3", c3), ("C4", c4), ("C5", c5), ("C6", c6), ("C7", c7), ("C8", c8), ("C9", c9), ("C10", c10), ("C11", c11), ("C12", c12)];
    let budgets = [1.0, 1.0, 30.0, 1.0, f64::INFINITY, 5.0, 60.0, f64::INFINITY, f64::INFINITY, f64::INFINITY, f64::INFINITY, f64::INFINITY];
    let mut failed = 0;
    for ((name, f), budget) in criteria.iter().zip(budgets) {
        let start = Instant::now();
        let (pass, detail) = match f() {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        let secs = start.elapsed().as_secs_f64();
        let pass = pass && secs < budget;
        failed += usize::from(!pass);
        println!("[{}] {name}: {detail} ({secs:.2}s)", if pass { "PASS" } else { "FAIL" });
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
