//! Lattice Fourier pair `f~(k) = dV sum_x e^{ikx} f(x)`,
//! `f(x) = V^{-1} sum_k e^{-ikx} f~(k)`.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::grid::Lattice;

pub struct LatticeFft {
    lattice: Lattice,
    forward: [Arc<dyn Fft<f64>>; 3],
    inverse: [Arc<dyn Fft<f64>>; 3],
}

impl std::fmt::Debug for LatticeFft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LatticeFft").field("lattice", &self.lattice).finish()
    }
}

impl LatticeFft {
    pub fn new(lattice: &Lattice) -> Self {
        let mut planner = FftPlanner::new();
        let n = lattice.n;
        Self {
            lattice: lattice.clone(),
            forward: [0, 1, 2].map(|a| planner.plan_fft_forward(n[a])),
            inverse: [0, 1, 2].map(|a| planner.plan_fft_inverse(n[a])),
        }
    }

    fn phase(&self, sign: f64) -> Vec<Complex64> {
        let l = &self.lattice;
        (0..l.size())
            .map(|idx| {
                let k = l.k(idx);
                let kx0: f64 = (0..3).map(|a| k[a] * l.origin(a)).sum();
                Complex64::from_polar(1.0, sign * kx0)
            })
            .collect()
    }

    fn along_axes(&self, plans: &[Arc<dyn Fft<f64>>; 3], data: &mut [Complex64]) {
        let n = self.lattice.n;
        let stride = [1, n[0], n[0] * n[1]];
        for axis in 0..3 {
            if n[axis] == 1 {
                continue;
            }
            if axis == 0 {
                plans[0].process(data);
                continue;
            }
            let mut buf = vec![Complex64::default(); n[axis]];
            let lines = data.len() / n[axis];
            for line in 0..lines {
                let inner = line % stride[axis];
                let outer = line / stride[axis];
                let base = outer * stride[axis] * n[axis] + inner;
                for (j, b) in buf.iter_mut().enumerate() {
                    *b = data[base + j * stride[axis]];
                }
                plans[axis].process(&mut buf);
                for (j, b) in buf.iter().enumerate() {
                    data[base + j * stride[axis]] = *b;
                }
            }
        }
    }

    /// Position samples to spectral amplitudes.
    pub fn to_spectral(&self, x: &mut [Complex64]) {
        self.along_axes(&self.inverse, x);
        let dv = self.lattice.cell_volume();
        for (v, p) in x.iter_mut().zip(self.phase(1.0)) {
            *v *= p * dv;
        }
    }

    /// Spectral amplitudes to position samples.
    pub fn to_position(&self, k: &mut [Complex64]) {
        let inv_v = 1.0 / self.lattice.volume();
        for (v, p) in k.iter_mut().zip(self.phase(-1.0)) {
            *v *= p * inv_v;
        }
        self.along_axes(&self.forward, k);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_transform_matches_closed_form() {
        let l = Lattice::new([32, 32, 30], [10.0, 10.0, 10.0]).unwrap();
        let fft = LatticeFft::new(&l);
        let c = [0.4, -0.3, 0.2];
        let mut data: Vec<Complex64> = (0..l.size())
            .map(|i| {
                let x = l.x(i);
                let r2: f64 = (0..3).map(|a| (x[a] - c[a]).powi(2)).sum();
                Complex64::new((-r2).exp(), 0.0)
            })
            .collect();
        let orig = data.clone();
        fft.to_spectral(&mut data);
        let pi3 = std::f64::consts::PI.powf(1.5);
        for (i, v) in data.iter().enumerate() {
            let k = l.k(i);
            let k2: f64 = k.iter().map(|x| x * x).sum();
            let kc: f64 = (0..3).map(|a| k[a] * c[a]).sum();
            let exact = Complex64::from_polar(pi3 * (-k2 / 4.0).exp(), kc);
            assert!((v - exact).norm() < 1e-6, "{i}");
        }
        fft.to_position(&mut data);
        for (a, b) in data.iter().zip(&orig) {
            assert!((a - b).norm() < 1e-12);
        }
    }
}
