use crate::model::{evaluate, Form, Residual, SamplePlan, SolutionPair};
use crate::symcore::{Expr, FuncBinding, Var};

use super::checks::{partial_constraint_xab, require, require_solution};
use super::{Builtin, Generator, LieError};

/// Tolerance used when an orbit map verifies its preconditions.
pub const PRECONDITION_TOL: f64 = 1e-8;

/// `(ψ, φ) ∘ (X, Y, T)` with the exclusions pulled back through the map.
fn pulled_back(sp: &SolutionPair, name: &str, x: &Expr, y: &Expr, t: &Expr) -> SolutionPair {
    let mut out = sp.with_fields(name, sp.psi.substitute_vars(x, y, t), sp.phi.substitute_vars(x, y, t));
    out.exclusions = sp.exclusions.iter().map(|e| e.mapped(x, y, t)).collect();
    out
}

fn rotated_coords(angle: &Expr) -> (Expr, Expr) {
    let (x, y) = (Expr::x(), Expr::y());
    let (c, s) = (angle.cos(), angle.sin());
    (&x * &c + &y * &s, -(&x * &s) + &y * &c)
}

/// Moving-frame family: `Ψ = ψ(x - A, y - B, t)`,
/// `Φ = x B' - y A' - (A B' - A' B) / 2 + φ(x - A, y - B, t)`.
pub fn orbit_x1(sp: &SolutionPair, a: &FuncBinding, b: &FuncBinding) -> Result<SolutionPair, LieError> {
    for f in [a, b] {
        if f.arity() != 1 {
            return Err(LieError::BadParameters {
                name: "X1".into(),
                reason: format!("`{}` must be a function of t alone", f.name()),
            });
        }
        if f.max_order() < 1 {
            return Err(LieError::MissingDerivative(f.name().to_string()));
        }
    }
    let a_name = sp.fresh_func_name(a.name());
    let a = a.renamed(&a_name);
    let with_a = sp.clone().with_func(a.clone());
    let b = b.renamed(&with_a.fresh_func_name(b.name()));
    let base = with_a.with_func(b.clone());

    let t = Expr::t();
    let ae = a.apply(vec![t.clone()]);
    let be = b.apply(vec![t.clone()]);
    let (at, bt) = (ae.diff(Var::T, 1), be.diff(Var::T, 1));
    let mut out = pulled_back(
        &base,
        &format!("{}.x1", sp.name),
        &(Expr::x() - &ae),
        &(Expr::y() - &be),
        &t,
    );
    let drift = Expr::x() * &bt - Expr::y() * &at - 0.5 * (&ae * &bt - &at * &be);
    out.phi = drift + out.phi;
    Ok(out)
}

/// Rotating family: fields composed with a rotation by `λt`, plus
/// `λ r² / 2` on `φ`.
pub fn orbit_x2(sp: &SolutionPair, lambda: f64) -> SolutionPair {
    let mut out = xab_transform(sp, 0.0, 1.0, lambda);
    out.name = format!("{}.x2", sp.name);
    out
}

/// The `Xab` map without its precondition: rotation by `λt` plus
/// `aλ r²/2` on `ψ` and `bλ r²/2` on `φ`.
pub fn xab_transform(sp: &SolutionPair, a: f64, b: f64, lambda: f64) -> SolutionPair {
    if lambda == 0.0 {
        return sp.clone();
    }
    let (x, y) = rotated_coords(&(lambda * Expr::t()));
    let mut out = pulled_back(sp, &format!("{}.xab", sp.name), &x, &y, &Expr::t());
    let r2_half = 0.5 * lambda * Expr::radius_squared();
    if a != 0.0 {
        out.psi = out.psi + a * &r2_half;
    }
    if b != 0.0 {
        out.phi = out.phi + b * &r2_half;
    }
    out
}

/// `Xab` orbit with the preconditions checked over the default sample plan.
pub fn orbit_xab(sp: &SolutionPair, a: f64, b: f64, lambda: f64) -> Result<SolutionPair, LieError> {
    orbit_xab_with(sp, a, b, lambda, &SamplePlan::default(), PRECONDITION_TOL)
}

/// `Xab` orbit; `sp` must solve the system and both constraints from
/// [`partial_constraint_xab`] over `plan`.
pub fn orbit_xab_with(
    sp: &SolutionPair,
    a: f64,
    b: f64,
    lambda: f64,
    plan: &SamplePlan,
    tol: f64,
) -> Result<SolutionPair, LieError> {
    require_solution(sp, plan, tol)?;
    let (c1, c2) = partial_constraint_xab(sp, a, b);
    let points = plan.draw(sp)?;
    let report = evaluate(
        "XAB",
        &[Residual::new("C1", c1), Residual::new("C2", c2)],
        &sp.bindings,
        &points,
        tol,
    )?
    .with_subject(&sp.name);
    require(report, &format!("`{}` violates the Xab({a},{b}) constraints", sp.name))?;
    Ok(xab_transform(sp, a, b, lambda))
}

/// `(λψ, φ)`; `sp` must solve the system and satisfy `[ψ, Δψ] = 0`.
pub fn orbit_scale_psi(sp: &SolutionPair, lambda: f64) -> Result<SolutionPair, LieError> {
    orbit_scale_psi_with(sp, lambda, &SamplePlan::default(), PRECONDITION_TOL)
}

pub fn orbit_scale_psi_with(
    sp: &SolutionPair,
    lambda: f64,
    plan: &SamplePlan,
    tol: f64,
) -> Result<SolutionPair, LieError> {
    require_solution(sp, plan, tol)?;
    let pdp = crate::model::check(&Form::Pdp, sp, plan, tol)?;
    let mut first = pdp.clone();
    first.equations.truncate(1);
    first.pass = first.equations.iter().all(|e| e.linf <= tol);
    require(first, &format!("`{}` violates [psi, lap psi] = 0", sp.name))?;
    Ok(sp.with_fields(&format!("{}.scaled", sp.name), lambda * &sp.psi, sp.phi.clone()))
}

fn scaled(f: &FuncBinding, lambda: f64) -> FuncBinding {
    let g = f.clone();
    FuncBinding::new(f.name(), 1, f.max_order(), move |args, orders| {
        lambda * g.call(args, orders)
    })
}

/// Finite orbit of a builtin generator at parameter `λ`.
///
/// Translations shift by `λ`, `Rot` rotates by the angle `λ`, the shifts add
/// `λ` (or `λ q(t)`), `X1` uses `λA`, `λB`, `X2` and `Xab` use the rotation
/// rate `λ`, and `Xpp` multiplies `ψ` by `λ`. `X3` has no finite orbit.
pub fn orbit(g: &Generator, sp: &SolutionPair, lambda: f64) -> Result<SolutionPair, LieError> {
    let (x, y, t) = (Expr::x(), Expr::y(), Expr::t());
    let name = format!("{}.{}", sp.name, g.name);
    Ok(match g.builtin() {
        Builtin::Tx => pulled_back(sp, &name, &(&x - lambda), &y, &t),
        Builtin::Ty => pulled_back(sp, &name, &x, &(&y - lambda), &t),
        Builtin::Tt => pulled_back(sp, &name, &x, &y, &(&t - lambda)),
        Builtin::Rot => {
            let (xr, yr) = rotated_coords(&Expr::constant(-lambda));
            pulled_back(sp, &name, &xr, &yr, &t)
        }
        Builtin::PsiShift => sp.with_fields(&name, &sp.psi + lambda, sp.phi.clone()),
        Builtin::PhiShift(q) => {
            let q = q.renamed(&sp.fresh_func_name(q.name()));
            let qe = q.apply(vec![t]);
            sp.with_fields(&name, sp.psi.clone(), &sp.phi + lambda * qe)
                .with_func(q)
        }
        Builtin::X1(a, b) => orbit_x1(sp, &scaled(a, lambda), &scaled(b, lambda))?.renamed(&name),
        Builtin::X2 => orbit_x2(sp, lambda).renamed(&name),
        Builtin::Xab(a, b) => orbit_xab(sp, *a, *b, lambda)?.renamed(&name),
        Builtin::Xpp => orbit_scale_psi(sp, lambda)?.renamed(&name),
        Builtin::X3 => return Err(LieError::NoFiniteOrbit(g.name.clone())),
    })
}
