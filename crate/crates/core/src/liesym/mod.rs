//! Symmetry generators of the two-field system, their characteristics,
//! linearized symmetry checks, and finite orbit maps.

mod checks;
mod orbit;

pub use checks::{
    invariance_check, linearized_check, partial_constraint_xab, symmetry_check, symmetry_check_truncated,
};
pub use orbit::{
    orbit, orbit_scale_psi, orbit_scale_psi_with, orbit_x1, orbit_x2, orbit_xab, orbit_xab_with, xab_transform,
    PRECONDITION_TOL,
};

use std::fmt;

use thiserror::Error;

use crate::model::{ModelError, ResidualReport};
use crate::symcore::{Bindings, EvalError, Expr, FieldVar, FuncBinding, Var};

#[derive(Debug, Error)]
pub enum LieError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("unknown generator `{0}`")]
    Unknown(String),
    #[error("generator `{name}`: {reason}")]
    BadParameters { name: String, reason: String },
    #[error("function `{0}` needs at least a first derivative binding")]
    MissingDerivative(String),
    #[error("`{0}` has no finite orbit map")]
    NoFiniteOrbit(String),
    #[error("precondition failed: {what} (max scaled residual {linf:.3e})")]
    Precondition {
        what: String,
        linf: f64,
        report: Box<ResidualReport>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GeneratorKind {
    /// Components depend on `(x, y, t, ψ, φ)` only.
    Point,
    /// `ζ` also depends on first derivatives of the fields.
    Generalized,
}

/// `ξ ∂x + η ∂y + τ ∂t + ζ_ψ ∂ψ + ζ_φ ∂φ`.
///
/// `ζ` components may contain jet coordinates ([`Expr::jet`]); all other
/// components are expressions in `(x, y, t)` only.
#[derive(Clone, Debug)]
pub struct Generator {
    pub name: String,
    pub kind: GeneratorKind,
    pub xi: Expr,
    pub eta: Expr,
    pub tau: Expr,
    pub zeta_psi: Expr,
    pub zeta_phi: Expr,
    pub bindings: Bindings,
    builtin: Builtin,
}

/// Characteristic `Q_a = ζ_a - ξ ∂x u_a - η ∂y u_a - τ ∂t u_a` evaluated on a pair.
#[derive(Clone, Debug)]
pub struct Characteristic {
    pub q_psi: Expr,
    pub q_phi: Expr,
}

/// Built-in generators. Opaque functions are passed as one-argument
/// bindings of `t`.
#[derive(Clone, Debug)]
pub enum Builtin {
    Tx,
    Ty,
    Tt,
    Rot,
    PsiShift,
    PhiShift(FuncBinding),
    X1(FuncBinding, FuncBinding),
    X2,
    Xab(f64, f64),
    Xpp,
    X3,
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Builtin::Tx => write!(f, "Tx"),
            Builtin::Ty => write!(f, "Ty"),
            Builtin::Tt => write!(f, "Tt"),
            Builtin::Rot => write!(f, "Rot"),
            Builtin::PsiShift => write!(f, "PsiShift"),
            Builtin::PhiShift(q) => write!(f, "PhiShift({})", q.name()),
            Builtin::X1(a, b) => write!(f, "X1({},{})", a.name(), b.name()),
            Builtin::X2 => write!(f, "X2"),
            Builtin::Xab(a, b) => write!(f, "Xab({a},{b})"),
            Builtin::Xpp => write!(f, "Xpp"),
            Builtin::X3 => write!(f, "X3"),
        }
    }
}

/// Names accepted by [`Generator::parse`].
pub const BUILTIN_NAMES: [&str; 11] = [
    "Tx", "Ty", "Tt", "Rot", "PsiShift", "PhiShift", "X1", "X2", "Xab", "Xpp", "X3",
];

/// Prefix given to function bindings owned by a generator, so that they do
/// not collide with the functions of the pair being acted on.
pub const FUNC_PREFIX: &str = "gen.";

impl Builtin {
    /// Exact symmetries of the full system (every builtin except `Xab` with
    /// `(a, b) ≠ (0, 1)`, `Xpp` and `X3`).
    pub fn is_exact(&self) -> bool {
        match self {
            Builtin::Xab(a, b) => *a == 0.0 && *b == 1.0,
            Builtin::Xpp | Builtin::X3 => false,
            _ => true,
        }
    }
}

fn time_func(f: &FuncBinding, label: &str) -> Result<FuncBinding, LieError> {
    if f.arity() != 1 {
        return Err(LieError::BadParameters {
            name: label.to_string(),
            reason: format!("`{}` must be a function of t alone", f.name()),
        });
    }
    Ok(f.renamed(&format!("{FUNC_PREFIX}{}", f.name())))
}

pub fn builtin(b: Builtin) -> Result<Generator, LieError> {
    let (x, y, t) = (Expr::x(), Expr::y(), Expr::t());
    let zero = Expr::zero;
    let r2_half = 0.5 * Expr::radius_squared();
    let mut bindings = Bindings::new();
    let (xi, eta, tau, zp, zf) = match &b {
        Builtin::Tx => (Expr::one(), zero(), zero(), zero(), zero()),
        Builtin::Ty => (zero(), Expr::one(), zero(), zero(), zero()),
        Builtin::Tt => (zero(), zero(), Expr::one(), zero(), zero()),
        Builtin::Rot => (y.clone(), -x.clone(), zero(), zero(), zero()),
        Builtin::PsiShift => (zero(), zero(), zero(), Expr::one(), zero()),
        Builtin::PhiShift(q) => {
            let q = time_func(q, "PhiShift")?;
            let qe = q.apply(vec![t.clone()]);
            bindings.bind(q);
            (zero(), zero(), zero(), zero(), qe)
        }
        Builtin::X1(a, bf) => {
            let a = time_func(a, "X1")?;
            let bf = time_func(bf, "X1")?;
            let ae = a.apply(vec![t.clone()]);
            let be = bf.apply(vec![t.clone()]);
            let zf = &x * be.diff(Var::T, 1) - &y * ae.diff(Var::T, 1);
            bindings.bind(a);
            bindings.bind(bf);
            (ae, be, zero(), zero(), zf)
        }
        Builtin::X2 => (-(&t * &y), &t * &x, zero(), zero(), r2_half),
        Builtin::Xab(a, bc) => {
            if *a == 0.0 && *bc == 0.0 {
                return Err(LieError::BadParameters {
                    name: "Xab".into(),
                    reason: "a and b must not both vanish".into(),
                });
            }
            (-(&t * &y), &t * &x, zero(), *a * &r2_half, *bc * &r2_half)
        }
        Builtin::Xpp => (zero(), zero(), zero(), Expr::psi(), zero()),
        Builtin::X3 => (
            zero(),
            zero(),
            zero(),
            Expr::jet(FieldVar::Psi, [0, 1, 0]),
            Expr::jet(FieldVar::Phi, [1, 0, 0]),
        ),
    };
    let kind = if zp.has_jet_derivatives() || zf.has_jet_derivatives() {
        GeneratorKind::Generalized
    } else {
        GeneratorKind::Point
    };
    Ok(Generator {
        name: b.to_string(),
        kind,
        xi,
        eta,
        tau,
        zeta_psi: zp,
        zeta_phi: zf,
        bindings,
        builtin: b,
    })
}

impl Generator {
    pub fn builtin(&self) -> &Builtin {
        &self.builtin
    }

    /// Parses `Name` or `Name(p1,p2)` with numeric parameters. `X1` and
    /// `PhiShift` take their functions from `funcs` by the names `A`, `B`
    /// and `q`.
    pub fn parse(spec: &str, funcs: &[FuncBinding]) -> Result<Generator, LieError> {
        let spec = spec.trim();
        let (name, params) = match spec.find('(') {
            Some(i) if spec.ends_with(')') => {
                let inner = &spec[i + 1..spec.len() - 1];
                let params = inner
                    .split(',')
                    .map(|p| p.trim().parse::<f64>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| LieError::BadParameters {
                        name: spec.to_string(),
                        reason: e.to_string(),
                    })?;
                (&spec[..i], params)
            }
            Some(_) => return Err(LieError::Unknown(spec.to_string())),
            None => (spec, Vec::new()),
        };
        let want = |n: usize| -> Result<(), LieError> {
            if params.len() == n {
                Ok(())
            } else {
                Err(LieError::BadParameters {
                    name: name.to_string(),
                    reason: format!("expected {n} numeric parameters, got {}", params.len()),
                })
            }
        };
        let func = |n: &str| -> Result<FuncBinding, LieError> {
            funcs
                .iter()
                .find(|f| f.name() == n)
                .cloned()
                .ok_or_else(|| LieError::BadParameters {
                    name: name.to_string(),
                    reason: format!("missing function `{n}`"),
                })
        };
        let b = match name {
            "Tx" => Builtin::Tx,
            "Ty" => Builtin::Ty,
            "Tt" => Builtin::Tt,
            "Rot" => Builtin::Rot,
            "PsiShift" => Builtin::PsiShift,
            "PhiShift" => Builtin::PhiShift(func("q")?),
            "X1" => Builtin::X1(func("A")?, func("B")?),
            "X2" => Builtin::X2,
            "Xab" => {
                want(2)?;
                Builtin::Xab(params[0], params[1])
            }
            "Xpp" => Builtin::Xpp,
            "X3" => Builtin::X3,
            _ => return Err(LieError::Unknown(spec.to_string())),
        };
        if !matches!(b, Builtin::Xab(..)) {
            want(0)?;
        }
        builtin(b)
    }

    /// Whether two generators have identical components.
    pub fn same_components(&self, other: &Generator) -> bool {
        self.xi == other.xi
            && self.eta == other.eta
            && self.tau == other.tau
            && self.zeta_psi == other.zeta_psi
            && self.zeta_phi == other.zeta_phi
    }
}

/// Substitutes the pair into the characteristic of `g`.
pub fn characteristic(g: &Generator, psi: &Expr, phi: &Expr) -> Characteristic {
    let q = |zeta: &Expr, u: &Expr| {
        zeta.substitute_jets(psi, phi)
            - &g.xi * u.diff(Var::X, 1)
            - &g.eta * u.diff(Var::Y, 1)
            - &g.tau * u.diff(Var::T, 1)
    };
    Characteristic {
        q_psi: q(&g.zeta_psi, psi),
        q_phi: q(&g.zeta_phi, phi),
    }
}

#[cfg(test)]
mod tests;
