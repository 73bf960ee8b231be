//! Invariant reductions: the ODEs for the moving-frame profiles `V`, `W`,
//! the radial equations for `Q`, `R`, and superposition of invariant
//! solutions.

mod profile;
mod superpose;

pub use profile::{solve_v, solve_w, Grid1D, Profile1D};
pub use superpose::{superpose, superposition_check};

use thiserror::Error;

use crate::model::{evaluate, Exclusion, ModelError, Residual, ResidualReport, SamplePlan, SolutionPair};
use crate::symcore::{EvalError, Expr, FuncBinding};

#[derive(Debug, Error)]
pub enum ReducedError {
    #[error("grid needs n >= 8 nodes and max > min (got n = {n}, [{min}, {max}])")]
    BadGrid { n: usize, min: f64, max: f64 },
    #[error("diffusion coefficient A^2 + B^2 = {0} must be positive")]
    Degenerate(f64),
    #[error("exponent b must be nonzero")]
    ZeroExponent,
    #[error("right-hand side `{name}` is not finite at {at}")]
    NonFinite { name: String, at: f64 },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("`{0}` carries no invariant decomposition")]
    NotInvariant(String),
    #[error("fixed parts differ: {0}")]
    MismatchedFixedParts(String),
    #[error("precondition failed: {what} (max scaled residual {linf:.3e})")]
    Precondition { what: String, linf: f64 },
    #[error("malformed profile CSV: {0}")]
    Csv(String),
}

/// Exponent `a = (b² - 2b - 4) / (2b)` of the power solutions `t^a r^b`.
pub fn power_exponent(b: f64) -> Result<f64, ReducedError> {
    if b == 0.0 {
        return Err(ReducedError::ZeroExponent);
    }
    Ok((b * b - 2.0 * b - 4.0) / (2.0 * b))
}

fn radial_derivatives(f: &FuncBinding) -> impl Fn(u32, u32) -> Expr + '_ {
    let args = vec![Expr::radius(), Expr::t()];
    move |i, j| Expr::func_derivative(f.name(), args.clone(), vec![i, j])
}

/// `r²Q_rrr - 2rtQ_rrt + rQ_rr - 2tQ_rt - r²Q_r + 2rtQ_t + 3Q_r` at
/// `r = √(x² + y²)`. Evaluate it with `q` bound.
pub fn residual_q(q: &FuncBinding) -> Expr {
    let d = radial_derivatives(q);
    let (r, t) = (Expr::radius(), Expr::t());
    let r2 = r.square();
    let rt = &r * &t;
    &r2 * d(3, 0) - 2.0 * &rt * d(2, 1) + &r * d(2, 0) - 2.0 * &t * d(1, 1) - &r2 * d(1, 0)
        + 2.0 * &rt * d(0, 1)
        + 3.0 * d(1, 0)
}

/// `2rtR_rrt - r²R_rrr + 2tR_rt - rR_rr + 5R_r` at `r = √(x² + y²)`.
pub fn residual_r(rf: &FuncBinding) -> Expr {
    let d = radial_derivatives(rf);
    let (r, t) = (Expr::radius(), Expr::t());
    2.0 * &r * &t * d(2, 1) - r.square() * d(3, 0) + 2.0 * &t * d(1, 1) - &r * d(2, 0) + 5.0 * d(1, 0)
}

/// Samples a radial residual (from [`residual_q`] or [`residual_r`]) away
/// from the origin.
pub fn radial_report(
    name: &str,
    residual: &Expr,
    f: &FuncBinding,
    plan: &SamplePlan,
    tol: f64,
) -> Result<ResidualReport, ReducedError> {
    let support = SolutionPair::zero().with_exclusions([Exclusion::Origin { radius: 0.05 }]);
    let points = plan.draw(&support)?;
    let bindings = crate::symcore::Bindings::new().with_func(f.clone());
    Ok(evaluate(name, &[Residual::new(name, residual.clone())], &bindings, &points, tol)?.with_subject(f.name()))
}
