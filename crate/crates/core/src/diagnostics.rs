//! Quantified claims about the deformed theory: leakage outside the light
//! cone, symmetry defects, the homothety obstruction and the gap between
//! formal and convergent multipliers.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::deform::{deformed_green, deformed_symplectic, DeformationParams};
use crate::error::{Error, Result};
use crate::frw4::{self, act_euclidean, Causal, GridSpec, LatticeFft, SpectralField};
use crate::geometry::{classify_homothety, MetricSpec, VectorFieldSpec};
use crate::numerics::fit_exponential;
use crate::series::{mode_symbol_eval, OperatorSymbol, SymbolKind};
use crate::source::BumpSource;

/// Masses below this are at the round-off floor and excluded from fits.
pub const LEAKAGE_FIT_FLOOR: f64 = 1e-12;
/// Fits start this many kernel lengths past the causal region.
pub const LEAKAGE_FIT_START: f64 = 1.5;
/// Symmetry defects are relative to `max(|form|, floor)`.
pub const DEFECT_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LeakageProfile {
    pub lambda: f64,
    /// Observation time.
    pub time: f64,
    /// Causal region in `x^1` at the observation time.
    pub causal_interval: (f64, f64),
    pub distances: Vec<f64>,
    /// `L^2` norm of the response beyond each distance, relative to the total.
    pub masses: Vec<f64>,
    pub fitted_rate: Option<f64>,
    /// `ln` of the fitted mass at distance zero.
    pub fitted_log_amplitude: Option<f64>,
    pub expected_rate: Option<f64>,
}

impl LeakageProfile {
    /// Fitted exponential at each distance, when a fit exists.
    pub fn fit_values(&self) -> Option<Vec<f64>> {
        let (rate, c) = (self.fitted_rate?, self.fitted_log_amplitude?);
        Some(self.distances.iter().map(|d| (c - rate * d).exp()).collect())
    }
}

/// Relative `L^2` mass of `Delta_{*,+}(source)` on the last time slice outside
/// the causal region widened by each distance.
pub fn causality_leakage(source: &BumpSource, grid: &GridSpec, params: &DeformationParams) -> Result<LeakageProfile> {
    let (a, b) = source
        .x1_support()
        .ok_or_else(|| Error::InvalidInput("leakage needs a compactly supported x1 profile".into()))?;
    let field = source.to_field(grid);
    let out = deformed_green(&field, params, Causal::Retarded)?;
    let l = &grid.lattice;
    let nk = grid.nk();
    let last = grid.nt() - 1;
    let t_obs = grid.time.t(last);
    let mut slice = out.values[last * nk..].to_vec();
    LatticeFft::new(l).to_position(&mut slice);

    let n1 = l.n[0];
    let mut column = vec![0.0; n1];
    for (idx, v) in slice.iter().enumerate() {
        column[idx % n1] += v.norm_sqr();
    }
    let total: f64 = column.iter().sum();
    let reach = (t_obs / source.time.support().0).ln();
    let interval = (a - reach, b + reach);
    let period = l.len[0];
    let dist: Vec<f64> = (0..n1)
        .map(|j| {
            let x = l.coord(0, j);
            [x - period, x, x + period]
                .iter()
                .map(|&y| (interval.0 - y).max(y - interval.1).max(0.0))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let mass_beyond = |d: f64| -> f64 {
        let m: f64 = column.iter().zip(&dist).filter(|(_, &x)| x > d).map(|(c, _)| c).sum();
        if total > 0.0 {
            (m / total).sqrt()
        } else {
            0.0
        }
    };
    let max_dist = dist.iter().cloned().fold(0.0, f64::max);

    let (distances, fit, expected_rate) = if params.lambda == 0.0 {
        let d: Vec<f64> = [0.0, 0.05, 0.1, 0.2, 0.5].into_iter().filter(|&d| d < max_dist).collect();
        (d, None, None)
    } else {
        let ell = params.kernel_length();
        let d: Vec<f64> = (0..).map(|j| j as f64 * 0.25 * ell).take_while(|&d| d < max_dist).collect();
        let pts: Vec<(f64, f64)> = d
            .iter()
            .map(|&x| (x, mass_beyond(x)))
            .filter(|&(x, m)| x >= LEAKAGE_FIT_START * ell && m > LEAKAGE_FIT_FLOOR)
            .collect();
        (d, fit_exponential(&pts), Some(1.0 / ell))
    };
    let masses = distances.iter().map(|&d| mass_beyond(d)).collect();
    Ok(LeakageProfile {
        lambda: params.lambda,
        time: t_obs,
        causal_interval: interval,
        distances,
        masses,
        fitted_rate: fit.map(|f| f.0),
        fitted_log_amplitude: fit.map(|f| f.1),
        expected_rate,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Form {
    Omega,
    OmegaStar,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymmetryDefect {
    pub seed: u64,
    pub trials: usize,
    pub max_defect: f64,
    pub worst_trial: usize,
    pub defects: Vec<f64>,
}

/// Gaussians narrower than this many spacings alias at the Nyquist mode.
pub const MIN_SIGMA_SPACINGS: f64 = 2.1;
/// Gaussians must decay over this many widths before the periodic boundary.
pub const BOX_SIGMAS: f64 = 7.0;

/// Random source pair for `trial`, reproducible from `(seed, trial)`.
///
/// Widths are bounded below by the lattice spacing and above by the box so
/// that the sources are band-limited and periodic to round-off.
pub fn trial_pair(grid: &GridSpec, seed: u64, trial: usize) -> Result<(BumpSource, BumpSource)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    let (t0, t1) = (grid.time.t_min, grid.time.t_max);
    let margin = ((t1 / t0).ln() * 0.05).exp();
    let l = &grid.lattice;
    let dx = (0..3).map(|a| l.spacing(a)).fold(0.0, f64::max);
    let half_box = 0.5 * l.len.iter().cloned().fold(f64::INFINITY, f64::min);
    let lo = MIN_SIGMA_SPACINGS * dx;
    let hi = (1.25 * lo).min((half_box - dx) / BOX_SIGMAS);
    if hi < lo {
        return Err(Error::Resolution(format!(
            "box half-width {half_box} cannot hold Gaussians of width {lo}; use more lattice points"
        )));
    }
    let a = BumpSource::random(&mut rng, t0 * margin, t1 / margin, dx, (lo, hi));
    let b = BumpSource::random(&mut rng, t0 * margin, t1 / margin, dx, (lo, hi));
    Ok((a, b))
}

fn evaluate(form: Form, phi: &SpectralField, psi: &SpectralField, params: &DeformationParams) -> Result<f64> {
    match form {
        Form::Omega => frw4::symplectic(phi, psi, params.xi),
        Form::OmegaStar => deformed_symplectic(phi, psi, params),
    }
}

/// Largest relative change of `form` under `(R, a)` over seeded random pairs.
pub fn symmetry_defect(
    r: &[[f64; 3]; 3],
    a: &[f64; 3],
    form: Form,
    params: &DeformationParams,
    grid: &GridSpec,
    trials: usize,
    seed: u64,
) -> Result<SymmetryDefect> {
    if trials == 0 {
        return Err(Error::InvalidInput("at least one trial is required".into()));
    }
    let defects: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let (p, q) = trial_pair(grid, seed, trial)?;
            let (phi, psi) = (p.to_field(grid), q.to_field(grid));
            let before = evaluate(form, &phi, &psi, params)?;
            let after = evaluate(form, &act_euclidean(&phi, r, a)?, &act_euclidean(&psi, r, a)?, params)?;
            Ok((after - before).abs() / before.abs().max(DEFECT_FLOOR))
        })
        .collect::<Result<_>>()?;
    let (worst_trial, max_defect) = defects
        .iter()
        .cloned()
        .enumerate()
        .fold((0, 0.0), |acc, (i, d)| if d > acc.1 { (i, d) } else { acc });
    Ok(SymmetryDefect { seed, trials, max_defect, worst_trial, defects })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObstructionReport {
    pub c_v: f64,
    pub omega: f64,
    /// `omega(L_v phi, psi) + omega(phi, L_v psi)`.
    pub lhs: f64,
    /// `-c_v (D/2 + 1) omega(phi, psi)`.
    pub rhs: f64,
    pub ratio: f64,
    pub expected_ratio: f64,
    /// `|lhs - rhs| / |omega|`.
    pub relative_residual: f64,
}

/// Checks `omega(L_v phi, psi) + omega(phi, L_v psi) = -c_v (D/2 + 1) omega(phi, psi)`
/// on the four-dimensional model, with `L_v` applied to analytic gradients.
pub fn obstruction_residual(
    v: &VectorFieldSpec,
    phi: &BumpSource,
    psi: &BumpSource,
    grid: &GridSpec,
    params: &DeformationParams,
) -> Result<ObstructionReport> {
    let metric = MetricSpec::FrwLinear;
    let report = classify_homothety(&metric, v)?;
    if !report.is_homothetic {
        return Err(Error::NotHomothetic { residual: report.max_residual });
    }
    let c_v = if report.is_killing { 0.0 } else { report.c };
    let affine = v.affine(4)?;
    let (f, g) = (phi.to_field(grid), psi.to_field(grid));
    let (lf, lg) = (phi.lie_derivative_field(grid, &affine)?, psi.lie_derivative_field(grid, &affine)?);
    let omega = frw4::symplectic(&f, &g, params.xi)?;
    let lhs = frw4::symplectic(&lf, &g, params.xi)? + frw4::symplectic(&f, &lg, params.xi)?;
    let expected_ratio = -c_v * (metric.dim() as f64 / 2.0 + 1.0);
    let rhs = expected_ratio * omega;
    Ok(ObstructionReport {
        c_v,
        omega,
        lhs,
        rhs,
        ratio: lhs / omega,
        expected_ratio,
        relative_residual: (lhs - rhs).abs() / omega.abs(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapRow {
    pub k1: f64,
    /// `3 lambda k1`.
    pub s: f64,
    pub truncated: f64,
    pub exact: f64,
    pub gap: f64,
    /// Cauchy bound on the truncation error; absent outside the disc of convergence.
    pub bound: Option<f64>,
    pub divergent: bool,
}

/// `max_{|w| = r} |cos w|^{-1/2}`, sampled on the circle.
fn cauchy_max(r: f64) -> f64 {
    (0..=720)
        .map(|j| {
            let w = Complex64::from_polar(r, 2.0 * PI * j as f64 / 720.0);
            1.0 / w.cos().norm().sqrt()
        })
        .fold(0.0, f64::max)
}

/// Remainder bound for the order-`n` Taylor polynomial of `sec^{1/2}` at `|u|`.
pub fn remainder_bound(u: f64, n: usize) -> Option<f64> {
    let u = u.abs();
    if u >= FRAC_PI_2 {
        return None;
    }
    let r = 0.5 * (u + FRAC_PI_2);
    let q = u / r;
    Some(cauchy_max(r) * q.powi(n as i32 + 1) / (1.0 - q))
}

/// Truncated versus exact `sech(3 lambda k1)^{1/2}` across `k1_values`.
pub fn formal_convergent_gap(k1_values: &[f64], lambda: f64, order: usize) -> Result<Vec<GapRow>> {
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(Error::InvalidInput(format!("lambda = {lambda} must be finite and >= 0")));
    }
    let sym = OperatorSymbol::new(SymbolKind::SqrtSecMultiplier, 3.0)?;
    k1_values
        .iter()
        .map(|&k1| {
            let s = 3.0 * lambda * k1;
            let truncated = mode_symbol_eval(&sym, k1, lambda, false, order)?;
            let exact = mode_symbol_eval(&sym, k1, lambda, true, order)?;
            Ok(GapRow {
                k1,
                s,
                truncated,
                exact,
                gap: (truncated - exact).abs(),
                bound: remainder_bound(s, order),
                divergent: s.abs() >= FRAC_PI_2,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gap_examples() {
        let rows = formal_convergent_gap(&[0.0, 0.5 / 0.3, 2.0 / 0.3], 0.1, 8).unwrap();
        assert_eq!(rows[0].gap, 0.0);
        assert!(rows[1].gap < rows[1].bound.unwrap());
        assert!(rows[2].gap > 0.1 && rows[2].divergent && rows[2].bound.is_none());
    }

    #[test]
    fn bound_dominates_inside_disc() {
        for s in [0.1, 0.4, 0.8, 1.2, 1.5] {
            for n in [2usize, 4, 8] {
                let r = formal_convergent_gap(&[s / 0.3], 0.1, n).unwrap().remove(0);
                assert!(r.gap <= r.bound.unwrap(), "s={s} n={n}: {} > {:?}", r.gap, r.bound);
            }
        }
    }
}
