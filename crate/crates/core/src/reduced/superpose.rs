use std::collections::BTreeMap;

use crate::model::{check, Form, InvariantParts, ResidualReport, SamplePlan, SolutionPair};
use crate::symcore::{Expr, Tape};

use super::ReducedError;

/// Renames the functions of `sp` that clash with bindings of `other`.
fn disjoint_from(sp: &SolutionPair, other: &SolutionPair) -> SolutionPair {
    let mut renames = BTreeMap::new();
    let mut out = sp.clone();
    for f in sp.bindings.funcs() {
        if let Some(g) = other.bindings.func(f.name()) {
            if !g.same_as(f) {
                let mut k = 2;
                let fresh = loop {
                    let name = format!("{}_{k}", f.name());
                    if !other.bindings.has_func(&name) && !sp.bindings.has_func(&name) {
                        break name;
                    }
                    k += 1;
                };
                renames.insert(f.name().to_string(), fresh);
            }
        }
    }
    if renames.is_empty() {
        return out;
    }
    let map = |n: &str| renames.get(n).cloned();
    out.psi = sp.psi.rename_funcs(&map);
    out.phi = sp.phi.rename_funcs(&map);
    out.invariant = sp.invariant.as_ref().map(|inv| InvariantParts {
        generator: inv.generator.clone(),
        fixed_psi: inv.fixed_psi.rename_funcs(&map),
        fixed_phi: inv.fixed_phi.rename_funcs(&map),
    });
    let mut bindings = crate::symcore::Bindings::new();
    for (k, v) in sp.bindings.params() {
        bindings.set_param(k, v);
    }
    for f in sp.bindings.funcs() {
        bindings.bind(match renames.get(f.name()) {
            Some(n) => f.renamed(n),
            None => f.clone(),
        });
    }
    out.bindings = bindings;
    out
}

fn scaled_sum(c1: f64, a: &Expr, c2: f64, b: &Expr, c0: f64, fixed: &Expr) -> Expr {
    let mut out = c1 * a + c2 * b;
    if c0 != 0.0 {
        out = out + c0 * fixed;
    }
    out
}

/// `α + c₁ Z⁽¹⁾ + c₂ Z⁽²⁾` for two invariant solutions `α + Z⁽ⁱ⁾` of the
/// same generator. Fixed parts are compared numerically over `plan`.
pub fn superpose(
    sp1: &SolutionPair,
    sp2: &SolutionPair,
    c1: f64,
    c2: f64,
    plan: &SamplePlan,
) -> Result<SolutionPair, ReducedError> {
    let inv1 = sp1
        .invariant
        .as_ref()
        .ok_or_else(|| ReducedError::NotInvariant(sp1.name.clone()))?;
    let sp2 = disjoint_from(sp2, sp1);
    let inv2 = sp2
        .invariant
        .as_ref()
        .ok_or_else(|| ReducedError::NotInvariant(sp2.name.clone()))?;
    if inv1.generator != inv2.generator {
        return Err(ReducedError::MismatchedFixedParts(format!(
            "generators `{}` and `{}`",
            inv1.generator, inv2.generator
        )));
    }
    let bindings = sp1.bindings.merged(&sp2.bindings)?;
    let tape = Tape::compile(
        &[
            inv1.fixed_psi.clone(),
            inv1.fixed_phi.clone(),
            inv2.fixed_psi.clone(),
            inv2.fixed_phi.clone(),
        ],
        &bindings,
    )?;
    let mut probe = sp1.clone();
    probe.exclusions.extend(sp2.exclusions.iter().cloned());
    for p in plan.draw(&probe)? {
        let v = tape.eval(p);
        for k in 0..2 {
            if (v[k] - v[k + 2]).abs() > 1e-12 * (1.0 + v[k].abs()) {
                return Err(ReducedError::MismatchedFixedParts(format!(
                    "{} differs at {p:?}: {} vs {}",
                    if k == 0 { "psi" } else { "phi" },
                    v[k],
                    v[k + 2]
                )));
            }
        }
    }
    let c0 = 1.0 - c1 - c2;
    let mut out = SolutionPair::new(
        &format!("{}*{}+{}*{}", c1, sp1.name, c2, sp2.name),
        scaled_sum(c1, &sp1.psi, c2, &sp2.psi, c0, &inv1.fixed_psi),
        scaled_sum(c1, &sp1.phi, c2, &sp2.phi, c0, &inv1.fixed_phi),
    )
    .with_invariant(inv1.clone());
    out.bindings = bindings;
    out.exclusions = probe.exclusions;
    Ok(out)
}

/// Checks that both inputs solve the system, then reports the full-system
/// residual of their superposition.
pub fn superposition_check(
    sp1: &SolutionPair,
    sp2: &SolutionPair,
    c1: f64,
    c2: f64,
    plan: &SamplePlan,
    tol: f64,
) -> Result<ResidualReport, ReducedError> {
    for sp in [sp1, sp2] {
        let r = check(&Form::Eu, sp, plan, tol)?;
        if !r.pass {
            return Err(ReducedError::Precondition {
                what: format!("`{}` does not solve EU", sp.name),
                linf: r.max_linf(),
            });
        }
    }
    let combined = superpose(sp1, sp2, c1, c2, plan)?;
    Ok(check(&Form::Eu, &combined, plan, tol)?)
}
