//! Batch front end: `twistqft <command> [--config FILE] [--set key=value]...`.

mod config;
mod selftest;

pub use config::{parse_field, parse_metric, RunConfig, OUT_ENV};
pub use selftest::{run_selftest, Check};

use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;

use crate::circle2::{self, CircleField, CircleSpectrum, SDirection};
use crate::deform::{self, Model, SPower};
use crate::diagnostics;
use crate::error::{Error, Result};
use crate::frw4::{self, Causal, GridSpec, SpectralField};
use crate::geometry::{classify_homothety, scaling_facts};
use crate::io::ArtifactDir;
use crate::series::FormalSeries;
use crate::source::{BumpSource, Profile, TimeBump};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Homothety,
    Series,
    Kernel,
    Green,
    Symplectic,
    Deform,
    Spectrum,
    Causality,
    Symmetry,
    Residual,
    Gap,
    Selftest,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Homothety => "homothety",
            Command::Series => "series",
            Command::Kernel => "kernel",
            Command::Green => "green",
            Command::Symplectic => "symplectic",
            Command::Deform => "deform",
            Command::Spectrum => "spectrum",
            Command::Causality => "causality",
            Command::Symmetry => "symmetry",
            Command::Residual => "residual",
            Command::Gap => "gap",
            Command::Selftest => "selftest",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::value_variants().iter().copied().find(|c| c.name() == name)
    }
}

#[derive(Debug, Parser)]
#[command(name = "twistqft", version, about = "Scalar field experiments on twisted FRW backgrounds")]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    /// Flat `key = value` configuration file.
    #[arg(long, short)]
    pub config: Option<PathBuf>,
    /// Override a configuration key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Output directory; takes precedence over the environment and the config.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Resolves the configuration: defaults, file, overrides, then output location.
pub fn resolve_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    for kv in &cli.overrides {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::InvalidInput(format!("--set expects key=value, got {kv:?}")))?;
        cfg.set(k, v)?;
    }
    if let Ok(dir) = std::env::var(OUT_ENV) {
        if !dir.is_empty() {
            cfg.out = PathBuf::from(dir);
        }
    }
    if let Some(o) = &cli.out {
        cfg.out = o.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Runs a command with the configured degree of parallelism.
pub fn dispatch(command: Command, cfg: &RunConfig) -> Result<()> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
    pool.install(|| {
        let mut out = ArtifactDir::create(&cfg.out)?;
        match command {
            Command::Homothety => homothety(cfg, &mut out)?,
            Command::Series => series(cfg, &mut out)?,
            Command::Kernel => kernel(cfg, &mut out)?,
            Command::Green => green(cfg, &mut out)?,
            Command::Symplectic => symplectic(cfg, &mut out)?,
            Command::Deform => deform_cmd(cfg, &mut out)?,
            Command::Spectrum => spectrum(cfg, &mut out)?,
            Command::Causality => causality(cfg, &mut out)?,
            Command::Symmetry => symmetry(cfg, &mut out)?,
            Command::Residual => residual(cfg, &mut out)?,
            Command::Gap => gap(cfg, &mut out)?,
            Command::Selftest => {
                let checks = run_selftest(cfg)?;
                for c in &checks {
                    println!("{}", c.line());
                }
                out.json("selftest.json", &checks)?;
                let failed = checks.iter().filter(|c| !c.pass).count();
                out.finish(command.name(), &cfg.canonical(), cfg.seed)?;
                if failed > 0 {
                    return Err(Error::Tolerance(format!("{failed} of {} invariants failed", checks.len())));
                }
                return Ok(());
            }
        }
        out.finish(command.name(), &cfg.canonical(), cfg.seed)?;
        Ok(())
    })
}

/// Structured error record for the diagnostic stream.
pub fn error_json(e: &Error) -> String {
    json!({ "error": e.to_string(), "exit_code": e.exit_code() }).to_string()
}

/// Entry point of the binary; returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match resolve_config(&cli).and_then(|cfg| dispatch(cli.command, &cfg)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", error_json(&e));
            e.exit_code()
        }
    }
}

fn profile_pair(cfg: &RunConfig) -> Result<(TimeBump, TimeBump)> {
    let a = TimeBump::between(cfg.src_t0, cfg.src_t1)?;
    let b = TimeBump { s_center: a.s_center, s_half: 0.8 * a.s_half };
    Ok((a, b))
}

/// The configured bump source and its partner shifted by `src_sep` along `x^1`.
pub fn source_pair(cfg: &RunConfig) -> Result<(BumpSource, BumpSource)> {
    let (ta, tb) = profile_pair(cfg)?;
    let at = |c: f64, t: TimeBump| {
        BumpSource::new(t, [Profile::Bump { center: c, half_width: cfg.src_width }, Profile::Constant, Profile::Constant])
    };
    Ok((at(cfg.src_center, ta), at(cfg.src_center + cfg.src_sep, tb)))
}

fn circle_pair(cfg: &RunConfig) -> Result<(CircleField, CircleField)> {
    let time = cfg.time_grid()?;
    let (ta, tb) = profile_pair(cfg)?;
    let f = CircleSpectrum::Gaussian { phi0: cfg.src_center, sigma: cfg.src_width }.field(&time, cfg.n_max, &ta)?;
    let g = CircleSpectrum::Gaussian { phi0: cfg.src_center + cfg.src_sep, sigma: cfg.src_width }.field(&time, cfg.n_max, &tb)?;
    Ok((f, g))
}

fn frw_pair(cfg: &RunConfig) -> Result<(GridSpec, SpectralField, SpectralField)> {
    let grid = cfg.grid()?;
    let (a, b) = source_pair(cfg)?;
    let (f, g) = (a.to_field(&grid), b.to_field(&grid));
    Ok((grid, f, g))
}

fn rel(a: &SpectralField, b: &SpectralField) -> Result<f64> {
    Ok(frw4::norm(&a.sub(b)?) / frw4::norm(b))
}

fn rel2(a: &CircleField, b: &CircleField) -> Result<f64> {
    Ok(a.sub(b)?.norm() / b.norm())
}

fn linspace(hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.0];
    }
    (0..n).map(|i| hi * i as f64 / (n - 1) as f64).collect()
}

fn homothety(cfg: &RunConfig, out: &mut ArtifactDir) -> Result<()> {
    let metric = cfg.metric_spec()?;
    let field = cfg.field_spec(metric.dim())?;
    let report = classify_homothety(&metric, &field)?;
    let facts = if report.is_homothetic { Some(scaling_facts(&metric, &field)?) } else { None };
    println!("c = {} homothetic = {} killing = {}", report.c, report.is_homothetic, report.is_killing);
    out.json("homothety.json", &json!({ "metric": metric, "field": field, "report": report, "scaling": facts }))?;
    Ok(())
}

fn series(cfg: &RunConfig, out: &mut ArtifactDir) -> Result<()> {
    let n = cfg.order;
    let (cos, sec) = (FormalSeries::cos(n), FormalSeries::sec(n));
    let (s, s_inv) = (FormalSeries::sqrt_sec(n), FormalSeries::sqrt_cos(n));
    let one = FormalSeries::one(n);
    let identities = [
        ("cos*sec=1", cos.mul(&sec)?.sub(&one)?.is_zero()),
        ("sqrt_sec^2=sec", s.mul(&s)?.sub(&sec)?.is_zero()),
        ("S*S^-1=1", s.mul(&s_inv)?.sub(&one)?.is_zero()),
    ];
    for (name, ok) in identities {
        println!("{name}: {}", if ok { "exact" } else { "FAILED" });
    }
    out.json(
        "series.json",
        &json!({
            "order": n,
            "cos": cos, "sec": sec, "sqrt_sec": s, "sqrt_cos": s_inv,
            "identities": identities.iter().map(|(k, v)| json!({ "name": k, "holds": v })).collect::<Vec<_>>(),
        }),
    )?;
    if identities.iter().any(|(_, ok)| !ok) {
        return Err(Error::CrossCheck("series identity failed".into()));
    }
    Ok(())
}

fn kernel(cfg: &RunConfig, out: &mut ArtifactDir) -> Result<()> {
    let p = cfg.params()?;
    let ell = if p.lambda > 0.0 { p.kernel_length() } else { return Err(Error::DegenerateKernel) };
    let half = 12.0 * ell;
    let rows = (0..=480)
        .map(|i| {
            let x = -half + 2.0 * half * i as f64 / 480.0;
            Ok(vec![x, deform::position_kernel(x, p.lambda)?])
        })
        .collect::<Result<Vec<_>>>()?;
    out.csv("kernel.csv", &["x1", "kernel"], &rows)?;
    let mass = deform::kernel_mass(half, p.lambda);
    println!("kernel length {ell}, mass within +-{half}: {mass}");
    out.json("kernel.json", &json!({ "lambda": p.lambda, "length": ell, "window": half, "mass": mass }))?;
    Ok(())
}

fn green(cfg: &RunConfig, out: &mut ArtifactDir) -> Result<()> {
    let p = cfg.params()?;
    match cfg.model {
        Model::Frw4 => {
            let (_, phi, _) = frw_pair(cfg)?;
            let s2 = deform::smap(&phi, &p, SPower::One)?;
            let mut report = Vec::new();
            let mut retarded = None;
            for which in [Causal::Retarded, Causal::Advanced] {
                let g = frw4::green(&phi, p.xi, which)?;
                let gs = deform::deformed_green(&phi, &p, which)?;
                report.push(json!({
                    "which": format!("{which:?}").to_lowercase(),
                    "identity_residual": rel(&frw4::wave_apply(&g, p.xi)?, &phi)?,
                    "deformed_identity_residual": rel(&frw4::wave_apply(&gs, p.xi)?, &s2)?,
                }));
                retarded.get_or_insert(g);
            }
            let g = retarded.expect("retarded computed first");
            let rows: Vec<Vec<f64>> = (0..g.nt())
                .map(|i| {
                    let z: Complex64 = g.at(i, 0);
                    vec![g.grid.time.t(i), z.re, z.im]
                })
                .collect();
            out.csv("green_mode0.csv", &["t", "re", "im"], &rows)?;
            println!("{}", serde_json::to_string(&report).unwrap_or_default());
            out.json("green.json", &report)?;
        }
        Model::Circle2 => {
            let (phi, _) = circle_pair(cfg)?;
            let mut report = Vec::new();
            for which in [Causal::Retarded, Causal::Advanced] {
                let g = circle2::green2(&phi, which)?;
                report.push(json!({
                    "which": format!("{which:?}").to_lowercase(),
                    "identity_residual": rel2(&circle2::wave2_apply(&g)?, &phi)?,
                }));
            }
            println!("{}", serde_json::to_string(&report).unwrap_or_default());
            out.json("green.json", &report)?;
        }
    }
    Ok(())
}

fn symplectic(cfg: &RunConfig, out: &mut ArtifactDir) -> Result<()> {
    let (ab, ba, aa) = match cfg.model {
        Model::Frw4 => {
            let (_, f, g) = frw_pair(cfg)?;
            (frw4::symplectic(&f, &g, cfg.xi)?, frw4::symplectic(&g, &f, cfg.xi)?, frw4::symplectic(&f, &f, cfg.xi)?)
        }
        Model::Circle2 => {
            let (f, g) = circle_pair(cfg)?;
            (circle2::symplectic2(&f, &g)?, circle2::symplectic2(&g, &f)?, circle2::symplectic2(&f, &f)?)
        }
    };
    let antisym = (ab + ba).abs() / ab.abs().max(f64::MIN_POSITIVE);
    println!("omega = {ab}, antisymmetry defect = {antisym:e}");
    out.json("symplectic.json", &json!({ "omega": ab, "omega_swapped": ba, "omega_self": aa, "antisymmetry_defect": antisym }))?;
    Ok(())
}

fn deform_cmd(cfg: &RunConfig, out: &mut ArtifactDir) -> Result<()> {
    let p = cfg.params()?;
    let report = match cfg.model {
        Model::Frw4 => {
            let (_, f, g) = frw_pair(cfg)?;
            let s = deform::smap(&f, &p, SPower::Half)?;
            let back = deform::smap(&s, &p, SPower::MinusHalf)?;
            json!({
                "omega": frw4::symplectic(&f, &g, p.xi)?,
                "omega_star": deform::deformed_symplectic(&f, &g, &p)?,
                "round_trip": rel(&back, &f)?,
                "domain": deform::domain_check(&f, p.lambda),
            })
        }
        Model::Circle2 => {
            let (f, g) = circle_pair(cfg)?;
            let s = circle2::smap2(&f, p.lambda, SDirection::S)?;
            let back = circle2::smap2(&s, p.lambda, SDirection::SInverse)?;
            json!({
                "omega": circle2::symplectic2(&f, &g)?,
                "omega_star": circle2::deformed_symplectic2(&f, &g, p.lambda)?,
                "round_trip": rel2(&back, &f)?,
                "domain": circle2::domain_check(&f, p.lambda),
            })
        }
    };
    println!("{report}");
    out.json("deform.json", &report)?;
    Ok(())
}

fn spectrum(cfg: &RunConfig, out: &mut ArtifactDir) -> Result<()> {
    if cfg.model != Model::Frw4 {
        return Err(Error::InvalidInput("spectrum is defined for the frw4 model".into()));
    }
    let p = cfg.params()?;
    let grid = cfg.grid()?;
    let l = &grid.lattice;
    let t = cfg.t_max;
    let plain = deform::power_spectrum(t, l, &p, false)?;
    let deformed = deform::power_spectrum(t, l, &p, true)?;
    let mut idx: Vec<usize> = (0..l.n[0]).map(|j| l.flat([j, 0, 0])).collect();
    idx.sort_by(|&a, &b| l.k(a)[0].total_cmp(&l.k(b)[0]));
    let mut worst: f64 = 0.0;
    let rows: Vec<Vec<f64>> = idx
        .iter()
        .map(|&k| {
            let k1 = l.k(k)[0];
            let ratio = deformed[k] / plain[k];
            worst = worst.max((ratio - p.multiplier(k1)).abs());
            vec![k1, plain[k], deformed[k], ratio]
        })
        .collect();
    out.csv("spectrum.csv", &["k1", "power", "deformed_power", "ratio"], &rows)?;
    println!("max |ratio - sech(3 lambda k1)| = {worst:e}");
    out.json("spectrum.json", &json!({ "t": t, "lambda": p.lambda, "max_ratio_error": worst }))?;
    Ok(())
}

fn causality(cfg: &RunConfig, out: &mut ArtifactDir) -> Result<()> {
    if cfg.model != Model::Frw4 {
        return Err(Error::InvalidInput("causality is defined for the frw4 model".into()));
    }
    let p = cfg.params()?;
    let (src, _) = source_pair(cfg)?;
    let prof = diagnostics::causality_leakage(&src, &cfg.grid()?, &p)?;
    let fit = prof.fit_values();
    let rows: Vec<Vec<f64>> = prof
        .distances
        .iter()
        .zip(&prof.masses)
        .enumerate()
        .map(|(i, (&d, &m))| vec![d, m, fit.as_ref().map_or(f64::NAN, |f| f[i])])
        .collect();
    out.csv("leakage.csv", &["distance", "mass", "fit"], &rows)?;
    println!(
        "leakage at 0: {:e}, fitted rate {:?}, expected {:?}",
        prof.masses.first().copied().unwrap_or(0.0),
        prof.fitted_rate,
        prof.expected_rate
    );
    out.json("leakage.json", &prof)?;
    Ok(())
}

fn symmetry(cfg: &RunConfig, out: &mut ArtifactDir) -> Result<()> {
    if cfg.model != Model::Frw4 {
        return Err(Error::InvalidInput("symmetry is defined for the frw4 model".into()));
    }
    let r = cfg.rotation_matrix()?;
    let d = diagnostics::symmetry_defect(&r, &cfg.shift, cfg.form, &cfg.params()?, &cfg.grid()?, cfg.trials, cfg.seed)?;
    println!("max defect {:e} (trial {}, seed {})", d.max_defect, d.worst_trial, d.seed);
    out.json("symmetry.json", &json!({ "rotation": cfg.rotation, "shift": cfg.shift, "form": cfg.form, "result": d }))?;
    Ok(())
}

fn residual(cfg: &RunConfig, out: &mut ArtifactDir) -> Result<()> {
    if cfg.model != Model::Frw4 {
        return Err(Error::InvalidInput("residual is defined for the frw4 model".into()));
    }
    let grid = cfg.grid()?;
    let v = cfg.field_spec(4)?;
    let (a, b) = diagnostics::trial_pair(&grid, cfg.seed, 0)?;
    let r = diagnostics::obstruction_residual(&v, &a, &b, &grid, &cfg.params()?)?;
    println!("c_v = {}, lhs/omega = {}, expected {}", r.c_v, r.ratio, r.expected_ratio);
    out.json("residual.json", &json!({ "field": v, "report": r }))?;
    Ok(())
}

fn gap(cfg: &RunConfig, out: &mut ArtifactDir) -> Result<()> {
    let rows = diagnostics::formal_convergent_gap(&linspace(cfg.k1_max, cfg.k1_points), cfg.lambda, cfg.order)?;
    let csv: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| vec![r.k1, r.s, r.truncated, r.exact, r.gap, r.bound.unwrap_or(f64::NAN), f64::from(u8::from(r.divergent))])
        .collect();
    out.csv("gap.csv", &["k1", "s", "truncated", "exact", "gap", "bound", "divergent"], &csv)?;
    println!("{} rows, {} beyond the disc of convergence", rows.len(), rows.iter().filter(|r| r.divergent).count());
    out.json("gap.json", &rows)?;
    Ok(())
}

/// Serializable summary used by the library-level API and tests.
#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub command: String,
    pub out: PathBuf,
}

/// Parses and runs in-process, for embedding and tests.
pub fn run(command: Command, cfg: &RunConfig) -> Result<RunSummary> {
    cfg.validate()?;
    dispatch(command, cfg)?;
    Ok(RunSummary { command: command.name().into(), out: cfg.out.clone() })
}

