use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Time samples uniform in `s = ln t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t_min: f64,
    pub t_max: f64,
    pub n: usize,
}

impl TimeGrid {
    pub fn new(t_min: f64, t_max: f64, n: usize) -> Result<Self> {
        if !(t_min > 0.0) || !t_max.is_finite() || t_max <= t_min {
            return Err(Error::InvalidInput(format!(
                "time grid needs 0 < t_min < t_max, got [{t_min}, {t_max}]"
            )));
        }
        if n < 2 {
            return Err(Error::InvalidInput("time grid needs at least 2 points".into()));
        }
        Ok(Self { t_min, t_max, n })
    }

    pub fn ds(&self) -> f64 {
        (self.t_max / self.t_min).ln() / (self.n - 1) as f64
    }

    pub fn s(&self, i: usize) -> f64 {
        self.t_min.ln() + i as f64 * self.ds()
    }

    pub fn t(&self, i: usize) -> f64 {
        self.s(i).exp()
    }

    pub fn s_values(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.s(i)).collect()
    }

    pub fn t_values(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.t(i)).collect()
    }
}

/// Periodic spatial box `[-L/2, L/2)^3` with `n[a]` points per axis; axis 0 is
/// the twist axis `x^1` and is stored contiguously.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    pub n: [usize; 3],
    pub len: [f64; 3],
}

impl Lattice {
    pub fn new(n: [usize; 3], len: [f64; 3]) -> Result<Self> {
        if n.iter().any(|&v| v == 0) || len.iter().any(|&l| !(l > 0.0) || !l.is_finite()) {
            return Err(Error::InvalidInput("lattice needs positive sizes and lengths".into()));
        }
        Ok(Self { n, len })
    }

    pub fn cubic(n: usize, len: f64) -> Result<Self> {
        Self::new([n; 3], [len; 3])
    }

    pub fn size(&self) -> usize {
        self.n.iter().product()
    }

    pub fn volume(&self) -> f64 {
        self.len.iter().product()
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.len[axis] / self.n[axis] as f64
    }

    pub fn cell_volume(&self) -> f64 {
        (0..3).map(|a| self.spacing(a)).product()
    }

    pub fn origin(&self, axis: usize) -> f64 {
        -0.5 * self.len[axis]
    }

    pub fn coord(&self, axis: usize, j: usize) -> f64 {
        self.origin(axis) + j as f64 * self.spacing(axis)
    }

    /// Signed mode number of FFT index `j`.
    pub fn mode(&self, axis: usize, j: usize) -> i64 {
        let n = self.n[axis];
        if j <= n / 2 {
            j as i64
        } else {
            j as i64 - n as i64
        }
    }

    pub fn is_nyquist(&self, axis: usize, j: usize) -> bool {
        self.n[axis] % 2 == 0 && j == self.n[axis] / 2
    }

    pub fn wavenumber(&self, axis: usize, j: usize) -> f64 {
        2.0 * PI * self.mode(axis, j) as f64 / self.len[axis]
    }

    /// Index of `-k` along one axis.
    pub fn negate(&self, axis: usize, j: usize) -> usize {
        (self.n[axis] - j) % self.n[axis]
    }

    pub fn flat(&self, j: [usize; 3]) -> usize {
        (j[2] * self.n[1] + j[1]) * self.n[0] + j[0]
    }

    pub fn unflat(&self, mut idx: usize) -> [usize; 3] {
        let j0 = idx % self.n[0];
        idx /= self.n[0];
        [j0, idx % self.n[1], idx / self.n[1]]
    }

    /// Wavevector at flat index.
    pub fn k(&self, idx: usize) -> [f64; 3] {
        let j = self.unflat(idx);
        [self.wavenumber(0, j[0]), self.wavenumber(1, j[1]), self.wavenumber(2, j[2])]
    }

    pub fn k2(&self, idx: usize) -> f64 {
        self.k(idx).iter().map(|v| v * v).sum()
    }

    /// Flat index of `-k`.
    pub fn negate_flat(&self, idx: usize) -> usize {
        let j = self.unflat(idx);
        self.flat([self.negate(0, j[0]), self.negate(1, j[1]), self.negate(2, j[2])])
    }

    /// Position of flat spatial index.
    pub fn x(&self, idx: usize) -> [f64; 3] {
        let j = self.unflat(idx);
        [self.coord(0, j[0]), self.coord(1, j[1]), self.coord(2, j[2])]
    }

    /// Weight of one momentum sample in `int d^3k / (2 pi)^3`.
    pub fn momentum_weight(&self) -> f64 {
        1.0 / self.volume()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub time: TimeGrid,
    pub lattice: Lattice,
}

impl GridSpec {
    pub fn new(time: TimeGrid, lattice: Lattice) -> Self {
        Self { time, lattice }
    }

    pub fn nt(&self) -> usize {
        self.time.n
    }

    pub fn nk(&self) -> usize {
        self.lattice.size()
    }

    pub fn len(&self) -> usize {
        self.nt() * self.nk()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
