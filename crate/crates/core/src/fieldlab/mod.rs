//! Periodic-grid numerics: sampled fields, a dealiased pseudo-spectral RK4
//! integrator for the two advected combinations `G± = ψ - Δψ ± Δφ`,
//! conservation monitoring and vector-potential reconstruction.

mod io;
mod potential;
mod sim;
mod spectral;

pub use io::{read_eulf, read_trace, write_eulf, write_trace, SnapshotEntry, Trace, TraceManifest};
pub use potential::{curl_consistency, flux_divergence_check, potential_reconstruct, Potentials};
pub use sim::{
    conserved, random_state, sample, sample_pair, step, ConservationLog, Conserved, Dealias, Drift, RandomSpec, Run,
    SimOptions, SimState, Stepper,
};
pub use spectral::{helmholtz_solve, poisson_solve, Spectral};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::ModelError;
use crate::symcore::EvalError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FieldError {
    #[error("bad grid {nx}x{ny} on {lx}x{ly}: sizes must be powers of two >= 32 and lengths positive")]
    BadGrid { nx: usize, ny: usize, lx: f64, ly: f64 },
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("field `{what}` has {got} values, expected {expected}")]
    Length { what: String, expected: usize, got: usize },
    #[error("non-finite value in `{what}` at node ({i}, {j})")]
    NonFinite { what: String, i: usize, j: usize },
    #[error("expression is singular at grid node (x, y) = ({x}, {y})")]
    Singular { x: f64, y: f64 },
    #[error("`{what}` is not periodic on the box: mismatch {gap:e}")]
    NotPeriodic { what: String, gap: f64 },
    #[error("Poisson data has mean {mean:e} against max |g| = {linf:e}")]
    Compatibility { mean: f64, linf: f64 },
    #[error("time step {dt} exceeds the CFL limit {limit}")]
    Cfl { dt: f64, limit: f64 },
    #[error("non-finite state after step {step} at t = {t}: {what}")]
    NaN { step: usize, t: f64, what: String },
    #[error("psi has mean {mean:e}; the curl constraints need zero-mean psi")]
    NonZeroMeanPsi { mean: f64 },
    #[error("trajectory is unusable: {0}")]
    Trajectory(String),
    #[error("malformed data: {0}")]
    Format(String),
    #[error("i/o: {0}")]
    Io(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl From<std::io::Error> for FieldError {
    fn from(e: std::io::Error) -> Self {
        FieldError::Io(e.to_string())
    }
}

/// Uniform periodic grid on `[0, lx) x [0, ly)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid2D {
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
}

impl Grid2D {
    pub fn new(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Self, FieldError> {
        let ok_n = |n: usize| n >= 32 && n.is_power_of_two();
        let ok_l = |l: f64| l.is_finite() && l > 0.0;
        if !(ok_n(nx) && ok_n(ny) && ok_l(lx) && ok_l(ly)) {
            return Err(FieldError::BadGrid { nx, ny, lx, ly });
        }
        Ok(Grid2D { nx, ny, lx, ly })
    }

    /// `n x n` grid on the `2π`-periodic square.
    pub fn square(n: usize) -> Result<Self, FieldError> {
        Grid2D::new(n, n, std::f64::consts::TAU, std::f64::consts::TAU)
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn hx(&self) -> f64 {
        self.lx / self.nx as f64
    }

    pub fn hy(&self) -> f64 {
        self.ly / self.ny as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.hx()
    }

    pub fn y(&self, j: usize) -> f64 {
        j as f64 * self.hy()
    }

    pub fn area(&self) -> f64 {
        self.lx * self.ly
    }

    /// Area element of the trapezoidal rule.
    pub fn cell(&self) -> f64 {
        self.hx() * self.hy()
    }
}

/// Real node values on a [`Grid2D`], row-major with `x` varying fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct Field2D {
    pub grid: Grid2D,
    pub values: Vec<f64>,
}

impl Field2D {
    pub fn new(grid: Grid2D, values: Vec<f64>) -> Result<Self, FieldError> {
        Self::checked("field", grid, values)
    }

    pub(crate) fn checked(what: &str, grid: Grid2D, values: Vec<f64>) -> Result<Self, FieldError> {
        if values.len() != grid.len() {
            return Err(FieldError::Length {
                what: what.to_string(),
                expected: grid.len(),
                got: values.len(),
            });
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(FieldError::NonFinite {
                what: what.to_string(),
                i: k % grid.nx,
                j: k / grid.nx,
            });
        }
        Ok(Field2D { grid, values })
    }

    pub fn zeros(grid: Grid2D) -> Self {
        Field2D {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn from_fn(grid: Grid2D, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                values.push(f(grid.x(i), grid.y(j)));
            }
        }
        Field2D { grid, values }
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.grid.nx + i]
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn linf(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Trapezoidal integral over the box.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field2D {
        Field2D {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_with(&self, other: &Field2D, f: impl Fn(f64, f64) -> f64) -> Result<Field2D, FieldError> {
        if self.grid != other.grid {
            return Err(FieldError::GridMismatch);
        }
        Ok(Field2D {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn max_abs_diff(&self, other: &Field2D) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// CSV rows `x,y,value`.
    pub fn to_csv(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::from("x,y,value\n");
        for j in 0..self.grid.ny {
            for i in 0..self.grid.nx {
                let _ = writeln!(
                    out,
                    "{:.17e},{:.17e},{:.17e}",
                    self.grid.x(i),
                    self.grid.y(j),
                    self.at(i, j)
                );
            }
        }
        out
    }
}
