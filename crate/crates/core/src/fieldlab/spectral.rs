use std::f64::consts::TAU;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::{Field2D, FieldError, Grid2D};

/// FFT plans, wavenumbers and the 2/3 mask for one grid.
pub struct Spectral {
    grid: Grid2D,
    fwd_x: Arc<dyn Fft<f64>>,
    inv_x: Arc<dyn Fft<f64>>,
    fwd_y: Arc<dyn Fft<f64>>,
    inv_y: Arc<dyn Fft<f64>>,
    kx: Vec<f64>,
    ky: Vec<f64>,
    /// Wavenumbers for odd derivatives, with the Nyquist mode dropped.
    kx_odd: Vec<f64>,
    ky_odd: Vec<f64>,
    keep_x: Vec<bool>,
    keep_y: Vec<bool>,
}

fn wavenumbers(n: usize, l: f64) -> (Vec<f64>, Vec<f64>, Vec<bool>) {
    let mut k = Vec::with_capacity(n);
    let mut odd = Vec::with_capacity(n);
    let mut keep = Vec::with_capacity(n);
    for m in 0..n {
        let signed = if m <= n / 2 { m as i64 } else { m as i64 - n as i64 };
        let kv = TAU / l * signed as f64;
        k.push(kv);
        odd.push(if m == n / 2 { 0.0 } else { kv });
        keep.push(3 * signed.unsigned_abs() < n as u64);
    }
    (k, odd, keep)
}

impl Spectral {
    pub fn new(grid: Grid2D) -> Self {
        let mut planner = FftPlanner::new();
        let (kx, kx_odd, keep_x) = wavenumbers(grid.nx, grid.lx);
        let (ky, ky_odd, keep_y) = wavenumbers(grid.ny, grid.ly);
        Spectral {
            grid,
            fwd_x: planner.plan_fft_forward(grid.nx),
            inv_x: planner.plan_fft_inverse(grid.nx),
            fwd_y: planner.plan_fft_forward(grid.ny),
            inv_y: planner.plan_fft_inverse(grid.ny),
            kx,
            ky,
            kx_odd,
            ky_odd,
            keep_x,
            keep_y,
        }
    }

    pub fn grid(&self) -> Grid2D {
        self.grid
    }

    fn rows(fft: &Arc<dyn Fft<f64>>, data: &mut [Complex64]) {
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            let n = fft.len();
            data.par_chunks_mut(n * 16).for_each(|chunk| fft.process(chunk));
        }
        #[cfg(not(feature = "parallel"))]
        fft.process(data);
    }

    fn transform(&self, data: &mut [Complex64], inverse: bool) {
        let (nx, ny) = (self.grid.nx, self.grid.ny);
        let (fx, fy) = if inverse {
            (&self.inv_x, &self.inv_y)
        } else {
            (&self.fwd_x, &self.fwd_y)
        };
        Self::rows(fx, data);
        let mut cols = vec![Complex64::default(); data.len()];
        for j in 0..ny {
            for i in 0..nx {
                cols[i * ny + j] = data[j * nx + i];
            }
        }
        Self::rows(fy, &mut cols);
        for j in 0..ny {
            for i in 0..nx {
                data[j * nx + i] = cols[i * ny + j];
            }
        }
    }

    pub fn forward(&self, values: &[f64]) -> Vec<Complex64> {
        let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.transform(&mut data, false);
        data
    }

    /// Inverse transform, normalized, keeping the real part.
    pub fn inverse(&self, spectrum: &[Complex64]) -> Vec<f64> {
        let mut data = spectrum.to_vec();
        self.transform(&mut data, true);
        let scale = 1.0 / self.grid.len() as f64;
        data.iter().map(|c| c.re * scale).collect()
    }

    fn map_modes(&self, s: &[Complex64], f: impl Fn(usize, usize, Complex64) -> Complex64) -> Vec<Complex64> {
        let nx = self.grid.nx;
        s.iter().enumerate().map(|(k, &c)| f(k % nx, k / nx, c)).collect()
    }

    pub fn dx_hat(&self, s: &[Complex64]) -> Vec<Complex64> {
        self.map_modes(s, |i, _, c| c * Complex64::new(0.0, self.kx_odd[i]))
    }

    pub fn dy_hat(&self, s: &[Complex64]) -> Vec<Complex64> {
        self.map_modes(s, |_, j, c| c * Complex64::new(0.0, self.ky_odd[j]))
    }

    /// `|k|²` of mode `(i, j)`.
    pub fn k2(&self, i: usize, j: usize) -> f64 {
        self.kx[i] * self.kx[i] + self.ky[j] * self.ky[j]
    }

    pub fn keeps(&self, i: usize, j: usize) -> bool {
        self.keep_x[i] && self.keep_y[j]
    }

    /// Zeroes the upper third of modes in each direction.
    pub fn dealias(&self, s: &mut [Complex64]) {
        let nx = self.grid.nx;
        for (k, c) in s.iter_mut().enumerate() {
            if !self.keeps(k % nx, k / nx) {
                *c = Complex64::default();
            }
        }
    }

    pub fn dx(&self, f: &Field2D) -> Field2D {
        self.field(self.inverse(&self.dx_hat(&self.forward(&f.values))))
    }

    pub fn dy(&self, f: &Field2D) -> Field2D {
        self.field(self.inverse(&self.dy_hat(&self.forward(&f.values))))
    }

    pub fn laplacian(&self, f: &Field2D) -> Field2D {
        let s = self.forward(&f.values);
        self.field(self.inverse(&self.map_modes(&s, |i, j, c| -self.k2(i, j) * c)))
    }

    pub(crate) fn field(&self, values: Vec<f64>) -> Field2D {
        Field2D {
            grid: self.grid,
            values,
        }
    }

    /// `ĝ / (1 + |k|²)`.
    pub fn helmholtz_hat(&self, s: &[Complex64]) -> Vec<Complex64> {
        self.map_modes(s, |i, j, c| c / (1.0 + self.k2(i, j)))
    }

    /// `-ĝ / |k|²` with the zero mode set to zero.
    pub fn poisson_hat(&self, s: &[Complex64]) -> Vec<Complex64> {
        self.map_modes(s, |i, j, c| {
            let k2 = self.k2(i, j);
            if k2 == 0.0 {
                Complex64::default()
            } else {
                -c / k2
            }
        })
    }

    /// Solves `(1 - Δ) u = g`.
    pub fn helmholtz_solve(&self, g: &Field2D) -> Field2D {
        self.field(self.inverse(&self.helmholtz_hat(&self.forward(&g.values))))
    }

    /// Solves `Δ u = g` for zero-mean `g`; the solution has zero mean.
    pub fn poisson_solve(&self, g: &Field2D) -> Result<Field2D, FieldError> {
        let (mean, linf) = (g.mean(), g.linf());
        if mean.abs() > 1e-10 * linf {
            return Err(FieldError::Compatibility { mean, linf });
        }
        Ok(self.field(self.inverse(&self.poisson_hat(&self.forward(&g.values)))))
    }

    /// Grid bracket `f_x g_y - g_x f_y`, products formed at the nodes; with
    /// `dealias` both inputs and the product are restricted to the lower
    /// two thirds of the spectrum.
    pub fn bracket(&self, f: &Field2D, g: &Field2D, dealias: bool) -> Field2D {
        let mut fs = self.forward(&f.values);
        let mut gs = self.forward(&g.values);
        if dealias {
            self.dealias(&mut fs);
            self.dealias(&mut gs);
        }
        let fx = self.inverse(&self.dx_hat(&fs));
        let fy = self.inverse(&self.dy_hat(&fs));
        let gx = self.inverse(&self.dx_hat(&gs));
        let gy = self.inverse(&self.dy_hat(&gs));
        let prod: Vec<f64> = (0..fx.len()).map(|k| fx[k] * gy[k] - gx[k] * fy[k]).collect();
        self.field(self.project(prod, dealias))
    }

    /// Applies the 2/3 mask to node values when `dealias` is set.
    pub(crate) fn project(&self, values: Vec<f64>, dealias: bool) -> Vec<f64> {
        if !dealias {
            return values;
        }
        let mut s = self.forward(&values);
        self.dealias(&mut s);
        self.inverse(&s)
    }
}

pub fn helmholtz_solve(g: &Field2D) -> Field2D {
    Spectral::new(g.grid).helmholtz_solve(g)
}

pub fn poisson_solve(g: &Field2D) -> Result<Field2D, FieldError> {
    Spectral::new(g.grid).poisson_solve(g)
}
