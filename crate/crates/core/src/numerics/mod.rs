//! Shared numerical kernels: finite-difference stencils, quadrature rules and
//! the per-mode radial propagator used by both cosmological models.

pub mod modes;
pub mod quadrature;
pub mod stencil;

/// Solves a small dense linear system by Gaussian elimination with partial
/// pivoting. `a` is row-major `n x n`.
pub(crate) fn solve_dense(mut a: Vec<f64>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    debug_assert_eq!(a.len(), n * n);
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| {
            a[i * n + col]
                .abs()
                .partial_cmp(&a[j * n + col].abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if a[pivot * n + col].abs() < 1e-300 {
            return None;
        }
        if pivot != col {
            for k in 0..n {
                a.swap(col * n + k, pivot * n + k);
            }
            b.swap(col, pivot);
        }
        for row in col + 1..n {
            let f = a[row * n + col] / a[col * n + col];
            if f != 0.0 {
                for k in col..n {
                    a[row * n + k] -= f * a[col * n + k];
                }
                b[row] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in row + 1..n {
            acc -= a[row * n + k] * x[k];
        }
        x[row] = acc / a[row * n + row];
    }
    Some(x)
}

/// Spectral magnitudes below this fraction of their slice peak are treated as
/// numerically zero by tail fits.
pub const SPECTRAL_FLOOR: f64 = 1e-13;

/// Least-squares fit `ln m = c - rate x` over `(x, m)` samples with `m > 0`;
/// returns `(rate, c)`, or `None` with fewer than two distinct usable `x`.
pub fn fit_exponential(points: &[(f64, f64)]) -> Option<(f64, f64)> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(_, m)| *m > 0.0)
        .map(|&(x, m)| (x, m.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    Some((-slope, my - slope * mx))
}

/// Exponential decay rate of `(x, m)` samples. Zero magnitudes are ignored;
/// with fewer than two usable samples the decay is treated as infinite.
pub fn fit_decay_rate(points: &[(f64, f64)]) -> f64 {
    fit_exponential(points).map_or(f64::INFINITY, |(rate, _)| rate)
}
