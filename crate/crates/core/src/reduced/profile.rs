use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::symcore::FuncBinding;

use super::ReducedError;

/// Uniform grid of `n` nodes on `[min, max]`, endpoints included.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

impl Grid1D {
    pub fn new(min: f64, max: f64, n: usize) -> Result<Self, ReducedError> {
        if n < 8 || !(max > min) {
            return Err(ReducedError::BadGrid { n, min, max });
        }
        Ok(Grid1D { min, max, n })
    }

    pub fn h(&self) -> f64 {
        (self.max - self.min) / (self.n - 1) as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        if i + 1 == self.n {
            self.max
        } else {
            self.min + i as f64 * self.h()
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.node(i)).collect()
    }

    /// Same interval with twice as many intervals.
    pub fn refined(&self) -> Grid1D {
        Grid1D {
            n: 2 * (self.n - 1) + 1,
            ..*self
        }
    }
}

/// Samples of a reduced profile on a uniform grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Profile1D {
    /// Name of the independent variable, `s` or `r`.
    pub var: String,
    pub grid: Grid1D,
    /// Time at which the profile was computed, for `t`-parametric reductions.
    pub t: Option<f64>,
    pub values: Vec<f64>,
}

impl Profile1D {
    pub fn with_t(mut self, t: f64) -> Self {
        self.t = Some(t);
        self
    }

    /// Largest deviation from `f` at the nodes.
    pub fn max_error(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.grid
            .nodes()
            .iter()
            .zip(&self.values)
            .map(|(&s, &v)| (v - f(s)).abs())
            .fold(0.0, f64::max)
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("{},value\n", self.var);
        for (s, v) in self.grid.nodes().iter().zip(&self.values) {
            let _ = writeln!(out, "{s:.17e},{v:.17e}");
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Profile1D, ReducedError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| ReducedError::Csv("empty input".into()))?;
        let var = match header.trim() {
            "s,value" => "s",
            "r,value" => "r",
            other => return Err(ReducedError::Csv(format!("unexpected header `{other}`"))),
        };
        let mut nodes = Vec::new();
        let mut values = Vec::new();
        for (i, line) in lines.enumerate() {
            let (a, b) = line
                .split_once(',')
                .ok_or_else(|| ReducedError::Csv(format!("row {}: expected two columns", i + 1)))?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| ReducedError::Csv(format!("row {}: {e}", i + 1)))
            };
            nodes.push(parse(a)?);
            values.push(parse(b)?);
        }
        let n = nodes.len();
        let grid = Grid1D::new(
            nodes.first().copied().unwrap_or(0.0),
            nodes.last().copied().unwrap_or(0.0),
            n,
        )?;
        let h = grid.h();
        for (i, &s) in nodes.iter().enumerate() {
            if (s - grid.node(i)).abs() > 1e-9 * (1.0 + h) {
                return Err(ReducedError::Csv(format!("row {}: grid is not uniform", i + 1)));
            }
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(ReducedError::Csv(format!("row {}: non-finite value", i + 1)));
        }
        Ok(Profile1D {
            var: var.to_string(),
            grid,
            t: None,
            values,
        })
    }

    /// Residual of `c0 u - c2 u''` against `rhs` at interior nodes, using the
    /// same three-point stencil as the solvers.
    pub fn discrete_residual(&self, c0: f64, c2: f64, rhs: &[f64]) -> f64 {
        let h2 = self.grid.h().powi(2);
        let u = &self.values;
        (1..u.len() - 1)
            .map(|i| {
                let lap = (u[i + 1] - 2.0 * u[i] + u[i - 1]) / h2;
                let r = c0 * u[i] - c2 * lap - rhs[i];
                r.abs() / (1.0 + rhs[i].abs() + (c0 * u[i]).abs() + (c2 * lap).abs())
            })
            .fold(0.0, f64::max)
    }
}

fn sample(f: &FuncBinding, grid: &Grid1D) -> Result<Vec<f64>, ReducedError> {
    if f.arity() != 1 {
        return Err(crate::symcore::EvalError::Arity {
            name: f.name().to_string(),
            expected: 1,
            got: f.arity(),
        }
        .into());
    }
    grid.nodes()
        .into_iter()
        .map(|s| {
            let v = f.value(&[s], &[0]).unwrap_or(f64::NAN);
            if v.is_finite() {
                Ok(v)
            } else {
                Err(ReducedError::NonFinite {
                    name: f.name().to_string(),
                    at: s,
                })
            }
        })
        .collect()
}

/// Solves `c0 u - c2 u'' = rhs` with Dirichlet data by the Thomas algorithm.
/// Requires `c0 >= 0`, `c2 > 0`, so the system is diagonally dominant.
fn solve_dirichlet(grid: &Grid1D, c0: f64, c2: f64, rhs: &[f64], boundary: (f64, f64)) -> Vec<f64> {
    let n = grid.n;
    let m = n - 2;
    let h2 = grid.h().powi(2);
    let off = -c2 / h2;
    let diag = c0 + 2.0 * c2 / h2;
    let mut d: Vec<f64> = rhs[1..n - 1].to_vec();
    d[0] -= off * boundary.0;
    d[m - 1] -= off * boundary.1;

    let mut cp = vec![0.0; m];
    let mut dp = vec![0.0; m];
    cp[0] = off / diag;
    dp[0] = d[0] / diag;
    for i in 1..m {
        let denom = diag - off * cp[i - 1];
        assert!(denom.abs() > 0.0, "tridiagonal system became singular");
        cp[i] = off / denom;
        dp[i] = (d[i] - off * dp[i - 1]) / denom;
    }
    let mut u = vec![0.0; n];
    u[0] = boundary.0;
    u[n - 1] = boundary.1;
    u[m] = dp[m - 1];
    for i in (0..m - 1).rev() {
        u[i + 1] = dp[i] - cp[i] * u[i + 2];
    }
    u
}

fn diffusion(a: f64, b: f64) -> Result<f64, ReducedError> {
    let d = a * a + b * b;
    if !(d > 0.0) || !d.is_finite() {
        return Err(ReducedError::Degenerate(d));
    }
    Ok(d)
}

/// `V - (A² + B²) V'' = F(s)` on `grid` with `V` fixed at both ends.
pub fn solve_v(f: &FuncBinding, a: f64, b: f64, grid: Grid1D, boundary: (f64, f64)) -> Result<Profile1D, ReducedError> {
    let d = diffusion(a, b)?;
    let rhs = sample(f, &grid)?;
    Ok(Profile1D {
        var: "s".into(),
        grid,
        t: None,
        values: solve_dirichlet(&grid, 1.0, d, &rhs, boundary),
    })
}

/// `(A² + B²) W'' = G(s)` on `grid` with `W` fixed at both ends.
pub fn solve_w(g: &FuncBinding, a: f64, b: f64, grid: Grid1D, boundary: (f64, f64)) -> Result<Profile1D, ReducedError> {
    let d = diffusion(a, b)?;
    let rhs: Vec<f64> = sample(g, &grid)?.into_iter().map(|v| -v).collect();
    Ok(Profile1D {
        var: "s".into(),
        grid,
        t: None,
        values: solve_dirichlet(&grid, 0.0, d, &rhs, boundary),
    })
}
