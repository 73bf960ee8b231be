//! The two-field system in all of its residual forms, candidate solution
//! pairs, and pointwise residual checks over seeded sample sets.

mod check;
mod forms;
mod pair;

pub use check::{check, evaluate, EquationStats, Form, ResidualReport, SamplePlan};
pub use forms::{
    constraints_partial, eu_equations, flux_components, psys_equations, residual_ab, residual_div, residual_eu,
    residual_psys, residual_truncated, truncated_equations, BracketEquation, Fluxes, LinComb, Residual,
};
pub use pair::{Exclusion, InvariantParts, SolutionPair};

use thiserror::Error;

use crate::symcore::EvalError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("non-finite value in `{equation}` at (x, y, t) = {point:?}")]
    Singular { equation: String, point: [f64; 3] },
    #[error("could only draw {got} of {wanted} sample points outside the exclusion set")]
    Sampling { wanted: usize, got: usize },
}

#[cfg(test)]
mod tests;
