//! Star product of the abelian twist generated by two commuting vector fields.
//!
//! Functions are sampled on a uniform grid in `(s, x)` with `s = ln t`, where
//! the Killing field `X_1 = d/dx` and the homothety `X_2 = t d/dt = d/ds` act
//! as partial derivatives along the grid axes. With `Theta^{12} = 1` the order-`r`
//! bidifferential term is
//! `(i/2)^r / r! * sum_j C(r, j) (-1)^{r-j} [X_1^j X_2^{r-j} h][X_2^j X_1^{r-j} k]`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::stencil::UniformDerivative;

/// Uniform sample grid for the formal sector. Index `is * nx + ix`.
#[derive(Debug, Clone)]
pub struct StarGrid {
    pub s0: f64,
    pub ds: f64,
    pub ns: usize,
    pub x0: f64,
    pub dx: f64,
    pub nx: usize,
    /// Nodes per finite-difference window.
    pub stencil: usize,
}

impl StarGrid {
    pub fn new(s_range: (f64, f64), ns: usize, x_range: (f64, f64), nx: usize) -> Result<Self> {
        if ns < 2 || nx < 2 || s_range.1 <= s_range.0 || x_range.1 <= x_range.0 {
            return Err(Error::InvalidInput("degenerate star-product grid".into()));
        }
        Ok(Self {
            s0: s_range.0,
            ds: (s_range.1 - s_range.0) / (ns - 1) as f64,
            ns,
            x0: x_range.0,
            dx: (x_range.1 - x_range.0) / (nx - 1) as f64,
            nx,
            stencil: 9,
        })
    }

    pub fn with_stencil(mut self, width: usize) -> Self {
        self.stencil = width;
        self
    }

    pub fn len(&self) -> usize {
        self.ns * self.nx
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn point(&self, idx: usize) -> (f64, f64) {
        let (is, ix) = (idx / self.nx, idx % self.nx);
        (self.s0 + is as f64 * self.ds, self.x0 + ix as f64 * self.dx)
    }

    /// Samples `f(t, x)` at every grid point.
    pub fn sample(&self, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        (0..self.len())
            .map(|i| {
                let (s, x) = self.point(i);
                f(s.exp(), x)
            })
            .collect()
    }
}

/// `sum_n lambda^n orders[n]`, each order a complex sampled function.
#[derive(Debug, Clone)]
pub struct StarExpansion {
    pub orders: Vec<Vec<Complex64>>,
}

impl StarExpansion {
    /// Embeds a real function as an order-`order` expansion with only the
    /// `lambda^0` term.
    pub fn from_real(samples: &[f64], order: usize) -> Self {
        let mut orders = vec![vec![Complex64::new(0.0, 0.0); samples.len()]; order + 1];
        for (o, &v) in orders[0].iter_mut().zip(samples) {
            *o = Complex64::new(v, 0.0);
        }
        Self { orders }
    }

    pub fn order(&self) -> usize {
        self.orders.len() - 1
    }

    /// Largest pointwise modulus at order `n`.
    pub fn sup_at(&self, n: usize) -> f64 {
        self.orders[n].iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

struct Derivatives {
    dx: UniformDerivative,
    ds: UniformDerivative,
    nx: usize,
    ns: usize,
}

impl Derivatives {
    fn new(grid: &StarGrid) -> Result<Self> {
        if grid.nx < grid.stencil || grid.ns < grid.stencil {
            return Err(Error::Resolution(format!(
                "star-product grid {}x{} is smaller than the {}-point stencil",
                grid.ns, grid.nx, grid.stencil
            )));
        }
        Ok(Self {
            dx: UniformDerivative::new(grid.nx, grid.dx, 1, grid.stencil)?,
            ds: UniformDerivative::new(grid.ns, grid.ds, 1, grid.stencil)?,
            nx: grid.nx,
            ns: grid.ns,
        })
    }

    fn along_x(&self, f: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::default(); f.len()];
        for is in 0..self.ns {
            self.dx.apply_strided(f, is * self.nx, 1, &mut out);
        }
        out
    }

    fn along_s(&self, f: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::default(); f.len()];
        for ix in 0..self.nx {
            self.ds.apply_strided(f, ix, self.nx, &mut out);
        }
        out
    }

    /// `table[a][b] = X_1^a X_2^b f` for `a + b <= max`.
    fn table(&self, f: &[Complex64], max: usize) -> Vec<Vec<Vec<Complex64>>> {
        let mut t: Vec<Vec<Vec<Complex64>>> = Vec::with_capacity(max + 1);
        for a in 0..=max {
            let mut row: Vec<Vec<Complex64>> = Vec::with_capacity(max + 1 - a);
            for b in 0..=max - a {
                let v = match (a, b) {
                    (0, 0) => f.to_vec(),
                    (0, _) => self.along_s(&row[b - 1]),
                    _ => self.along_x(&t[a - 1][b]),
                };
                row.push(v);
            }
            t.push(row);
        }
        t
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// Star product of two expansions, truncated at `order`.
pub fn star_series(
    grid: &StarGrid,
    a: &StarExpansion,
    b: &StarExpansion,
    order: usize,
) -> Result<StarExpansion> {
    let len = grid.len();
    if a.orders.iter().chain(&b.orders).any(|o| o.len() != len) {
        return Err(Error::InvalidInput("expansion does not match grid".into()));
    }
    let d = Derivatives::new(grid)?;
    let ta: Vec<_> = (0..=a.order().min(order)).map(|p| d.table(&a.orders[p], order - p)).collect();
    let tb: Vec<_> = (0..=b.order().min(order)).map(|q| d.table(&b.orders[q], order - q)).collect();

    let mut out = vec![vec![Complex64::default(); len]; order + 1];
    let half_i = Complex64::new(0.0, 0.5);
    for (p, da) in ta.iter().enumerate() {
        for (q, db) in tb.iter().enumerate() {
            for r in 0..=order.saturating_sub(p + q) {
                if p + q + r > order {
                    continue;
                }
                let fact: f64 = (1..=r).map(|v| v as f64).product();
                let pref = half_i.powu(r as u32) / fact;
                let target = &mut out[p + q + r];
                for j in 0..=r {
                    let c = pref * binomial(r, j) * if (r - j) % 2 == 0 { 1.0 } else { -1.0 };
                    let left = &da[j][r - j];
                    let right = &db[r - j][j];
                    for i in 0..len {
                        target[i] += c * left[i] * right[i];
                    }
                }
            }
        }
    }
    Ok(StarExpansion { orders: out })
}

/// `h * k` up to `lambda^order`; order 0 is the pointwise product.
pub fn star_product(grid: &StarGrid, h: &[f64], k: &[f64], order: usize) -> Result<StarExpansion> {
    star_series(
        grid,
        &StarExpansion::from_real(h, order),
        &StarExpansion::from_real(k, order),
        order,
    )
}
