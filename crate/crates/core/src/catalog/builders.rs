use crate::model::{Exclusion, InvariantParts, SolutionPair};
use crate::symcore::{Expr, FuncBinding, Tape, Var};

use super::CatalogError;

/// Time window over which `A² + B² > 0` is required.
pub const T_WINDOW: [f64; 2] = [0.1, 2.0];

fn expect_arity(f: &FuncBinding, arity: usize, role: &str) -> Result<FuncBinding, CatalogError> {
    if f.arity() != arity {
        return Err(CatalogError::BadFunc {
            name: role.to_string(),
            reason: format!("expected {arity} argument(s), got {}", f.arity()),
        });
    }
    Ok(f.renamed(role))
}

/// Solutions invariant under the moving-frame generator with functions
/// `A(t)`, `B(t)`: `ψ = V(s, t)` and `φ = quadratic + W(s, t)` with
/// `s = B x - A y`. `W = None` stands for `W = 0`.
pub fn x1_invariant(
    v: &FuncBinding,
    w: Option<&FuncBinding>,
    a: &FuncBinding,
    b: &FuncBinding,
) -> Result<SolutionPair, CatalogError> {
    let v = expect_arity(v, 2, "V")?;
    let w = w.map(|w| expect_arity(w, 2, "W")).transpose()?;
    let a = expect_arity(a, 1, "A")?;
    let b = expect_arity(b, 1, "B")?;
    for f in [&a, &b] {
        if f.max_order() < 1 {
            return Err(CatalogError::BadFunc {
                name: f.name().to_string(),
                reason: "needs a first derivative".into(),
            });
        }
    }

    let t = Expr::t();
    let (x, y) = (Expr::x(), Expr::y());
    let ae = a.apply(vec![t.clone()]);
    let be = b.apply(vec![t.clone()]);
    let (at, bt) = (ae.diff(Var::T, 1), be.diff(Var::T, 1));

    let norm = ae.square() + be.square();
    let n = 64;
    let mut bindings = crate::symcore::Bindings::new()
        .with_func(a.clone())
        .with_func(b.clone());
    let tape = Tape::compile(std::slice::from_ref(&norm), &bindings)?;
    for i in 0..=n {
        let tv = T_WINDOW[0] + (T_WINDOW[1] - T_WINDOW[0]) * i as f64 / n as f64;
        let d = tape.eval([0.0, 0.0, tv])[0];
        if !(d > 0.0) {
            return Err(CatalogError::Degenerate(format!("A² + B² = {d} at t = {tv}")));
        }
    }

    let s = &be * &x - &ae * &y;
    let quad =
        0.5 / &norm * ((&at * &be + &ae * &bt) * (x.square() - y.square()) - 2.0 * &x * &y * (&ae * &at - &be * &bt));
    let psi = v.apply(vec![s.clone(), t.clone()]);
    let mut phi = quad.clone();
    bindings.bind(v);
    if let Some(w) = w {
        phi = phi + w.apply(vec![s, t]);
        bindings.bind(w);
    }
    let mut sp = SolutionPair::new("x1_invariant", psi, phi).with_invariant(InvariantParts {
        generator: "X1(A,B)".into(),
        fixed_psi: Expr::zero(),
        fixed_phi: quad,
    });
    sp.bindings = bindings;
    Ok(sp)
}

/// Rotation-invariant solutions `ψ = Q(r, t)`, `φ = r²θ/(2t) + R(r, t)`.
/// `None` stands for the zero function.
pub fn x2_invariant(q: Option<&FuncBinding>, r: Option<&FuncBinding>) -> Result<SolutionPair, CatalogError> {
    let (rad, t) = (Expr::radius(), Expr::t());
    let spiral = Expr::radius_squared() * Expr::angle() / (2.0 * &t);
    let mut psi = Expr::zero();
    let mut phi = spiral.clone();
    let mut funcs = Vec::new();
    if let Some(q) = q {
        let q = expect_arity(q, 2, "Q")?;
        psi = q.apply(vec![rad.clone(), t.clone()]);
        funcs.push(q);
    }
    if let Some(r) = r {
        let r = expect_arity(r, 2, "R")?;
        phi = phi + r.apply(vec![rad, t]);
        funcs.push(r);
    }
    let mut sp = SolutionPair::new("x2_invariant", psi, phi)
        .with_exclusions(Exclusion::polar())
        .with_exclusions([Exclusion::SmallTime { min: 0.05 }])
        .with_invariant(InvariantParts {
            generator: "X2".into(),
            fixed_psi: Expr::zero(),
            fixed_phi: spiral,
        });
    for f in funcs {
        sp = sp.with_func(f);
    }
    Ok(sp)
}

/// Time-independent pair `ψ = f(v)`, `φ = g(v)` of a single spatial
/// variable `v`.
pub fn static_pair(f: &FuncBinding, g: &FuncBinding, var: Var) -> Result<SolutionPair, CatalogError> {
    if var == Var::T {
        return Err(CatalogError::BadFunc {
            name: "f".into(),
            reason: "static pairs depend on x or y".into(),
        });
    }
    let f = expect_arity(f, 1, "f")?;
    let g = expect_arity(g, 1, "g")?;
    let v = Expr::var(var);
    Ok(
        SolutionPair::new("static_pair", f.apply(vec![v.clone()]), g.apply(vec![v]))
            .with_func(f)
            .with_func(g),
    )
}

/// Members of the conditional (contact-generator invariant) families.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Conditional {
    SinExp,
    ExpSin,
    ExpExpKappa,
    ExpParab,
    LinExp,
}

/// Numeric parameters of a conditional family. `s1`, `s2` are the signs;
/// `phase` shifts sine arguments and `offset` is added to `ψ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConditionalParams {
    pub k: f64,
    pub kappa: f64,
    pub s1: f64,
    pub s2: f64,
    pub phase: f64,
    pub offset: f64,
}

impl Default for ConditionalParams {
    fn default() -> Self {
        ConditionalParams {
            k: 1.0,
            kappa: 0.5,
            s1: 1.0,
            s2: 1.0,
            phase: 0.0,
            offset: 0.0,
        }
    }
}

/// The five conditional families, with `γ(t)`, `T(t)` and `T₁(t)`.
pub fn conditional_family(
    family: Conditional,
    p: &ConditionalParams,
    gamma: &FuncBinding,
    big_t: &FuncBinding,
    t1: &FuncBinding,
) -> Result<SolutionPair, CatalogError> {
    for (s, name) in [(p.s1, "s1"), (p.s2, "s2")] {
        if s != 1.0 && s != -1.0 {
            return Err(CatalogError::NotASign {
                name: name.into(),
                value: s,
            });
        }
    }
    match family {
        Conditional::ExpExpKappa if p.kappa.abs() >= 1.0 => {
            return Err(CatalogError::OutOfRange {
                name: "kappa".into(),
                value: p.kappa,
                min: -1.0,
                max: 1.0,
            })
        }
        Conditional::LinExp if p.k == 0.0 => {
            return Err(CatalogError::OutOfRange {
                name: "k".into(),
                value: 0.0,
                min: f64::MIN_POSITIVE,
                max: f64::INFINITY,
            })
        }
        _ => {}
    }
    let gamma = expect_arity(gamma, 1, "gamma")?;
    let big_t = expect_arity(big_t, 1, "T")?;
    let t1 = expect_arity(t1, 1, "T1")?;
    let (x, y, t) = (Expr::x(), Expr::y(), Expr::t());
    let g = gamma.apply(vec![t.clone()]);
    let gt = g.diff(Var::T, 1);
    let tt = big_t.apply(vec![t.clone()]);
    let drift = -(&gt * &y) + &tt;
    let k = p.k;
    let (psi, phi, funcs) = match family {
        Conditional::SinExp => (
            (k * (&x - &g) + p.phase).sin(),
            (p.s1 * (1.0 + k * k).sqrt() * &y).exp() + drift,
            vec![gamma, big_t],
        ),
        Conditional::ExpSin => (
            (p.s1 * (1.0 + k * k).sqrt() * (&x - &g)).exp(),
            (k * &y + p.phase).sin() + drift,
            vec![gamma, big_t],
        ),
        Conditional::ExpExpKappa => (
            (p.s1 * (1.0 - p.kappa * p.kappa).sqrt() * (&x - &g)).exp(),
            (p.s2 * p.kappa * &y).exp() + drift,
            vec![gamma, big_t],
        ),
        Conditional::ExpParab => {
            let t1e = t1.apply(vec![t.clone()]);
            (
                &g * (p.s1 * &x).exp(),
                k * y.square() + &y * t1e + &tt,
                vec![gamma, big_t, t1],
            )
        }
        Conditional::LinExp => (&g + k * &x, (p.s1 * &y).exp() + &gt * &y / k, vec![gamma]),
    };
    let psi = if p.offset != 0.0 { psi + p.offset } else { psi };
    let mut sp = SolutionPair::new("conditional", psi, phi);
    for f in funcs {
        sp = sp.with_func(f);
    }
    Ok(sp)
}

/// `ψ = 3x² + y²`, `φ = e^{-x}`.
pub fn xab_example() -> SolutionPair {
    SolutionPair::new(
        "xab_example",
        3.0 * Expr::x().square() + Expr::y().square(),
        (-Expr::x()).exp(),
    )
}

/// `ψ = c₁ sin(k(x-t)) + c₂ sin(k(y-t)) + c₃`, `φ = x - y`.
pub fn ab_trig(c1: f64, c2: f64, c3: f64, k: f64) -> SolutionPair {
    let (x, y, t) = (Expr::x(), Expr::y(), Expr::t());
    SolutionPair::new(
        "ab_trig",
        c1 * (k * (&x - &t)).sin() + c2 * (k * (&y - &t)).sin() + c3,
        &x - &y,
    )
}

/// `ψ = 2t - θ`, `φ = r²`.
pub fn ab_spiral() -> SolutionPair {
    SolutionPair::new("ab_spiral", 2.0 * Expr::t() - Expr::angle(), Expr::radius_squared())
        .with_exclusions(Exclusion::polar())
}

/// `ψ = Ψ(y - t)`, `φ = x`.
pub fn ab_traveling(profile: &FuncBinding) -> Result<SolutionPair, CatalogError> {
    let profile = expect_arity(profile, 1, "Psi")?;
    if profile.max_order() < 2 {
        return Err(CatalogError::BadFunc {
            name: "Psi".into(),
            reason: "needs two derivative orders".into(),
        });
    }
    Ok(SolutionPair::new("ab_traveling", profile.apply(vec![Expr::y() - Expr::t()]), Expr::x()).with_func(profile))
}
