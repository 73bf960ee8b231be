use crate::model::{
    check, eu_equations, evaluate, truncated_equations, BracketEquation, Form, Residual, ResidualReport, SamplePlan,
    SolutionPair,
};
use crate::symcore::{laplacian, rotation_derivative, Bindings, Expr};

use super::{characteristic, Generator, LieError};

fn merged(g: &Generator, sp: &SolutionPair) -> Result<Bindings, LieError> {
    Ok(sp.bindings.merged(&g.bindings)?)
}

/// Linearization of `equations` at `sp` in the direction of the
/// characteristic of `g`. `sp` must solve `equations` at `tol` first.
pub fn linearized_check(
    g: &Generator,
    sp: &SolutionPair,
    form: &str,
    equations: &[BracketEquation],
    plan: &SamplePlan,
    tol: f64,
) -> Result<ResidualReport, LieError> {
    let points = plan.draw(sp)?;
    let base: Vec<Residual> = equations
        .iter()
        .map(|e| Residual::new(e.name, e.residual(&sp.psi, &sp.phi)))
        .collect();
    let on_shell = evaluate(form, &base, &sp.bindings, &points, tol)?;
    if !on_shell.pass {
        return Err(LieError::Precondition {
            what: format!("`{}` does not solve {form}", sp.name),
            linf: on_shell.max_linf(),
            report: Box::new(on_shell),
        });
    }
    let q = characteristic(g, &sp.psi, &sp.phi);
    let lin: Vec<Residual> = equations
        .iter()
        .map(|e| {
            Residual::new(
                &format!("d{}", e.name),
                e.linearized(&sp.psi, &sp.phi, &q.q_psi, &q.q_phi),
            )
        })
        .collect();
    let bindings = merged(g, sp)?;
    Ok(evaluate(form, &lin, &bindings, &points, tol)?
        .with_generator(&g.name)
        .with_subject(&sp.name))
}

/// Symmetry condition of `g` for the full system on the solution `sp`.
pub fn symmetry_check(
    g: &Generator,
    sp: &SolutionPair,
    plan: &SamplePlan,
    tol: f64,
) -> Result<ResidualReport, LieError> {
    linearized_check(g, sp, "EU", &eu_equations(), plan, tol)
}

/// Same as [`symmetry_check`] for the truncated system.
pub fn symmetry_check_truncated(
    g: &Generator,
    sp: &SolutionPair,
    plan: &SamplePlan,
    tol: f64,
) -> Result<ResidualReport, LieError> {
    linearized_check(g, sp, "TRUNC", &truncated_equations(), plan, tol)
}

/// Whether `sp` is invariant under `g`: both characteristic components
/// vanish at the sample points.
pub fn invariance_check(
    g: &Generator,
    sp: &SolutionPair,
    plan: &SamplePlan,
    tol: f64,
) -> Result<ResidualReport, LieError> {
    let points = plan.draw(sp)?;
    let q = characteristic(g, &sp.psi, &sp.phi);
    let res = [Residual::new("Q_psi", q.q_psi), Residual::new("Q_phi", q.q_phi)];
    let bindings = merged(g, sp)?;
    Ok(evaluate("INV", &res, &bindings, &points, tol)?
        .with_generator(&g.name)
        .with_subject(&sp.name))
}

/// Extra conditions under which `Xab` maps solutions to solutions:
/// `C1 = rot[(1-b)(ψ-Δψ) + a(φ-Δφ)]`, `C2 = rot[a Δψ + (1-b) Δφ]` with
/// `rot f = y f_x - x f_y`.
pub fn partial_constraint_xab(sp: &SolutionPair, a: f64, b: f64) -> (Expr, Expr) {
    let lpsi = laplacian(&sp.psi);
    let lphi = laplacian(&sp.phi);
    let c = 1.0 - b;
    let f1 = c * (&sp.psi - &lpsi) + a * (&sp.phi - &lphi);
    let f2 = a * &lpsi + c * &lphi;
    (rotation_derivative(&f1), rotation_derivative(&f2))
}

pub(crate) fn require(report: ResidualReport, what: &str) -> Result<(), LieError> {
    if report.pass {
        Ok(())
    } else {
        Err(LieError::Precondition {
            what: what.to_string(),
            linf: report.max_linf(),
            report: Box::new(report),
        })
    }
}

pub(crate) fn require_solution(sp: &SolutionPair, plan: &SamplePlan, tol: f64) -> Result<(), LieError> {
    require(
        check(&Form::Eu, sp, plan, tol)?,
        &format!("`{}` does not solve EU", sp.name),
    )
}
