use std::ops::{Add, Mul};

use crate::error::{Error, Result};

/// Fornberg's recursion for finite-difference weights.
///
/// Returns `w[m][j]`, the weight of `nodes[j]` in the approximation of the
/// `m`-th derivative at `z`, for `m = 0..=max_deriv`.
pub fn fd_weights(z: f64, nodes: &[f64], max_deriv: usize) -> Vec<Vec<f64>> {
    let n = nodes.len();
    let mut c = vec![vec![0.0; n]; max_deriv + 1];
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(max_deriv);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - z;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// A derivative operator on a uniform 1-D grid: centered windows in the
/// interior, shifted one-sided windows near the ends.
#[derive(Debug, Clone)]
pub struct UniformDerivative {
    width: usize,
    rows: Vec<(usize, Vec<f64>)>,
}

impl UniformDerivative {
    /// `order`-th derivative with `width` nodes per window on `n` points of spacing `h`.
    pub fn new(n: usize, h: f64, order: usize, width: usize) -> Result<Self> {
        if n < width {
            return Err(Error::Resolution(format!(
                "{n} points cannot hold a {width}-point stencil"
            )));
        }
        if width <= order {
            return Err(Error::InvalidInput(format!(
                "stencil width {width} too small for derivative order {order}"
            )));
        }
        let half = width / 2;
        let offsets: Vec<f64> = (0..width).map(|j| j as f64).collect();
        let mut rows = Vec::with_capacity(n);
        for i in 0..n {
            let start = i.saturating_sub(half).min(n - width);
            let w = fd_weights((i - start) as f64, &offsets, order);
            let scale = h.powi(order as i32);
            rows.push((start, w[order].iter().map(|x| x / scale).collect()));
        }
        Ok(Self { width, rows })
    }

    /// Centered `width`-point windows in the interior and one-sided
    /// `edge_width`-point windows where the centered window does not fit.
    pub fn with_edges(n: usize, h: f64, order: usize, width: usize, edge_width: usize) -> Result<Self> {
        let mut d = Self::new(n, h, order, width)?;
        if edge_width <= width || n < edge_width {
            return Ok(d);
        }
        let half = width / 2;
        let offsets: Vec<f64> = (0..edge_width).map(|j| j as f64).collect();
        let scale = h.powi(order as i32);
        for i in (0..n).filter(|&i| i < half || i + half >= n) {
            let start = if i < half { 0 } else { n - edge_width };
            let w = fd_weights((i - start) as f64, &offsets, order);
            d.rows[i] = (start, w[order].iter().map(|x| x / scale).collect());
        }
        Ok(d)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Applies the operator to samples taken with stride `stride` starting at `offset`.
    pub fn apply_strided<T>(&self, data: &[T], offset: usize, stride: usize, out: &mut [T])
    where
        T: Copy + Default + Add<Output = T> + Mul<f64, Output = T>,
    {
        for (i, (start, w)) in self.rows.iter().enumerate() {
            let mut acc = T::default();
            for (j, &wj) in w.iter().enumerate() {
                acc = acc + data[offset + (start + j) * stride] * wj;
            }
            out[offset + i * stride] = acc;
        }
    }

    pub fn apply<T>(&self, data: &[T]) -> Vec<T>
    where
        T: Copy + Default + Add<Output = T> + Mul<f64, Output = T>,
    {
        let mut out = vec![T::default(); data.len()];
        self.apply_strided(data, 0, 1, &mut out);
        out
    }
}
