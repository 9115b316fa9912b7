use std::ops::{Add, Mul};

use super::solve_dense;

/// Composite Simpson weights for `n` equispaced points of spacing `h`.
///
/// Odd `n` uses the plain rule; even `n` closes the last three intervals with
/// Simpson's 3/8 rule.
pub fn simpson_weights(n: usize, h: f64) -> Vec<f64> {
    let mut w = vec![0.0; n];
    match n {
        0 | 1 => return w,
        2 => {
            w[0] = h / 2.0;
            w[1] = h / 2.0;
            return w;
        }
        3 => {
            w[0] = h / 3.0;
            w[1] = 4.0 * h / 3.0;
            w[2] = h / 3.0;
            return w;
        }
        _ => {}
    }
    let simpson_end = if n % 2 == 1 { n - 1 } else { n - 4 };
    let mut i = 0;
    while i < simpson_end {
        w[i] += h / 3.0;
        w[i + 1] += 4.0 * h / 3.0;
        w[i + 2] += h / 3.0;
        i += 2;
    }
    if n % 2 == 0 {
        let s = simpson_end;
        w[s] += 3.0 * h / 8.0;
        w[s + 1] += 9.0 * h / 8.0;
        w[s + 2] += 9.0 * h / 8.0;
        w[s + 3] += 3.0 * h / 8.0;
    }
    w
}

/// Weights integrating the interpolant through nodes at `offsets` (in units of
/// the spacing) over the unit interval `[0, 1]`.
pub fn interval_weights(offsets: &[f64]) -> Vec<f64> {
    let m = offsets.len();
    let mut a = vec![0.0; m * m];
    let mut b = vec![0.0; m];
    for p in 0..m {
        for (j, &x) in offsets.iter().enumerate() {
            a[p * m + j] = x.powi(p as i32);
        }
        b[p] = 1.0 / (p as f64 + 1.0);
    }
    solve_dense(a, b).expect("distinct nodes")
}

/// Running integral `F_i = int_{x_0}^{x_i} f` on a uniform grid.
///
/// Each interval is integrated with a six-node interpolant (sixth order,
/// centered where possible). The error is smooth along the grid, so the result
/// can be differentiated by finite differences without amplifying an
/// odd/even pattern.
#[derive(Debug, Clone)]
pub struct CumulativeRule {
    h: f64,
    rows: Vec<(usize, Vec<f64>)>,
}

impl CumulativeRule {
    pub const WIDTH: usize = 6;

    pub fn new(n: usize, h: f64) -> Self {
        let width = Self::WIDTH.min(n);
        let mut rows = Vec::with_capacity(n.saturating_sub(1));
        for i in 0..n.saturating_sub(1) {
            let start = i.saturating_sub(width / 2 - 1).min(n - width);
            let offsets: Vec<f64> = (0..width).map(|j| (start + j) as f64 - i as f64).collect();
            rows.push((start, interval_weights(&offsets)));
        }
        Self { h, rows }
    }

    pub fn integrate<T>(&self, f: &[T]) -> Vec<T>
    where
        T: Copy + Default + Add<Output = T> + Mul<f64, Output = T>,
    {
        let mut out = Vec::with_capacity(f.len());
        let mut acc = T::default();
        out.push(acc);
        for (start, w) in &self.rows {
            let mut seg = T::default();
            for (j, &wj) in w.iter().enumerate() {
                seg = seg + f[start + j] * wj;
            }
            acc = acc + seg * self.h;
            out.push(acc);
        }
        out
    }
}
