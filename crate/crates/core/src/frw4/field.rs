use num_complex::Complex64;
use rayon::prelude::*;

use super::fourier::LatticeFft;
use super::grid::GridSpec;
use crate::error::{Error, Result};

/// Relative tolerance for conjugate symmetry of real fields.
pub const REALITY_TOL: f64 = 1e-10;

/// Mode amplitudes `phi~(t_i, k)`, laid out `[time][k3][k2][k1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    pub grid: GridSpec,
    pub values: Vec<Complex64>,
    pub real: bool,
}

impl SpectralField {
    pub fn new(grid: GridSpec, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidInput(format!(
                "{} values for a grid of {}",
                values.len(),
                grid.len()
            )));
        }
        let mut f = Self { grid, values, real: false };
        f.real = f.reality_defect() <= REALITY_TOL;
        Ok(f)
    }

    pub fn zeros(grid: &GridSpec) -> Self {
        Self {
            values: vec![Complex64::default(); grid.len()],
            grid: grid.clone(),
            real: true,
        }
    }

    /// Transforms real position samples, laid out like the spectral values.
    pub fn from_position(grid: &GridSpec, samples: &[f64]) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::InvalidInput("sample count does not match grid".into()));
        }
        let fft = LatticeFft::new(&grid.lattice);
        let mut values: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        values
            .par_chunks_mut(grid.nk())
            .for_each(|slice| fft.to_spectral(slice));
        Ok(Self { grid: grid.clone(), values, real: true })
    }

    /// Samples `f(t, x)` on the grid and transforms.
    pub fn from_fn(grid: &GridSpec, f: impl Fn(f64, [f64; 3]) -> f64 + Sync) -> Self {
        let nk = grid.nk();
        let samples: Vec<f64> = (0..grid.len())
            .into_par_iter()
            .map(|i| f(grid.time.t(i / nk), grid.lattice.x(i % nk)))
            .collect();
        Self::from_position(grid, &samples).expect("sizes match")
    }

    pub fn to_position(&self) -> Vec<Complex64> {
        let fft = LatticeFft::new(&self.grid.lattice);
        let mut out = self.values.clone();
        out.par_chunks_mut(self.grid.nk()).for_each(|slice| fft.to_position(slice));
        out
    }

    /// Position samples of a real field.
    pub fn to_position_real(&self) -> Result<Vec<f64>> {
        if !self.real {
            return Err(Error::Reality("position samples requested for a complex field".into()));
        }
        Ok(self.to_position().into_iter().map(|z| z.re).collect())
    }

    /// `max |phi~(-k) - conj phi~(k)| / max |phi~|`.
    pub fn reality_defect(&self) -> f64 {
        let nk = self.grid.nk();
        let l = &self.grid.lattice;
        let peak = self.values.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if peak == 0.0 {
            return 0.0;
        }
        let mut worst = 0.0f64;
        for slice in self.values.chunks(nk) {
            for (idx, v) in slice.iter().enumerate() {
                worst = worst.max((slice[l.negate_flat(idx)] - v.conj()).norm());
            }
        }
        worst / peak
    }

    pub fn nt(&self) -> usize {
        self.grid.nt()
    }

    pub fn nk(&self) -> usize {
        self.grid.nk()
    }

    pub fn at(&self, ti: usize, k: usize) -> Complex64 {
        self.values[ti * self.nk() + k]
    }

    pub fn column(&self, k: usize) -> Vec<Complex64> {
        let nk = self.nk();
        (0..self.nt()).map(|i| self.values[i * nk + k]).collect()
    }

    /// Replaces every mode column by `f(k, column)`, in parallel over modes.
    pub fn map_columns<F>(&self, f: F) -> Result<Self>
    where
        F: Fn(usize, Vec<Complex64>) -> Result<Vec<Complex64>> + Sync,
    {
        let nk = self.nk();
        let cols: Vec<Vec<Complex64>> = (0..nk)
            .into_par_iter()
            .map(|k| f(k, self.column(k)))
            .collect::<Result<_>>()?;
        let mut values = vec![Complex64::default(); self.values.len()];
        for (k, col) in cols.iter().enumerate() {
            for (i, v) in col.iter().enumerate() {
                values[i * nk + k] = *v;
            }
        }
        Ok(Self { grid: self.grid.clone(), values, real: self.real })
    }

    /// Multiplies each mode by `m(k)`, constant in time.
    pub fn multiply_modes(&self, m: impl Fn(usize) -> f64) -> Self {
        let nk = self.nk();
        let factors: Vec<f64> = (0..nk).map(m).collect();
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| v * factors[i % nk])
            .collect();
        Self { grid: self.grid.clone(), values, real: self.real }
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v * c).collect(),
            real: self.real,
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_grid(other)?;
        Ok(Self {
            grid: self.grid.clone(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
            real: self.real && other.real,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-1.0))
    }

    pub fn same_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::InvalidInput("fields live on different grids".into()));
        }
        Ok(())
    }

    /// Largest modulus on the first and last `edge` time slices relative to
    /// the overall peak.
    pub fn edge_ratio(&self, edge: usize) -> f64 {
        let nk = self.nk();
        let nt = self.nt();
        let peak = self.values.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if peak == 0.0 {
            return 0.0;
        }
        let edge = edge.min(nt);
        let head = &self.values[..edge * nk];
        let tail = &self.values[(nt - edge) * nk..];
        head.iter().chain(tail).map(|z| z.norm()).fold(0.0, f64::max) / peak
    }
}
