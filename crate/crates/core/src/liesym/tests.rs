use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::model::{check, Exclusion, Form, SamplePlan, SolutionPair};
use crate::symcore::{Expr, FieldVar, FuncBinding, Tape, Var};

fn gauss() -> SolutionPair {
    let x = Expr::x();
    SolutionPair::new("static_gauss", (-(x.square())).exp(), 1.0 / (1.0 + x.square()))
}

fn spiral() -> SolutionPair {
    SolutionPair::new("spiral", 2.0 * Expr::t() - Expr::angle(), Expr::radius_squared())
        .with_exclusions(Exclusion::polar())
}

fn trig() -> SolutionPair {
    let (x, y, t) = (Expr::x(), Expr::y(), Expr::t());
    let k = 1.5;
    SolutionPair::new(
        "trig",
        (k * (&x - &t)).sin() + 2.0 * (k * (&y - &t)).sin() + 0.5,
        &x - &y,
    )
}

fn xab_example() -> SolutionPair {
    SolutionPair::new(
        "ellipse_exp",
        3.0 * Expr::x().square() + Expr::y().square(),
        (-Expr::x()).exp(),
    )
}

fn time_fn(name: &str, e: Expr) -> FuncBinding {
    FuncBinding::of_time(name, &e, 5).unwrap()
}

fn x1() -> Generator {
    builtin(Builtin::X1(
        time_fn("A", Expr::t().sin()),
        time_fn("B", Expr::t().square()),
    ))
    .unwrap()
}

fn exact_generators() -> Vec<Generator> {
    vec![
        builtin(Builtin::Tx).unwrap(),
        builtin(Builtin::Ty).unwrap(),
        builtin(Builtin::Tt).unwrap(),
        builtin(Builtin::Rot).unwrap(),
        builtin(Builtin::PsiShift).unwrap(),
        builtin(Builtin::PhiShift(time_fn("q", Expr::t().cos()))).unwrap(),
        x1(),
        builtin(Builtin::X2).unwrap(),
        builtin(Builtin::Xab(0.0, 1.0)).unwrap(),
    ]
}

fn points(n: usize, seed: u64) -> Vec<[f64; 3]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            [
                rng.gen_range(-2.0..2.0),
                rng.gen_range(0.2..2.0),
                rng.gen_range(0.1..2.0),
            ]
        })
        .collect()
}

fn assert_fields_equal(a: &SolutionPair, b: &SolutionPair, tol: f64) {
    let ta = Tape::compile(&[a.psi.clone(), a.phi.clone()], &a.bindings).unwrap();
    let tb = Tape::compile(&[b.psi.clone(), b.phi.clone()], &b.bindings).unwrap();
    for p in points(50, 11) {
        let (va, vb) = (ta.eval(p), tb.eval(p));
        for k in 0..2 {
            assert!(
                (va[k] - vb[k]).abs() <= tol * (1.0 + va[k].abs()),
                "{p:?}: {va:?} vs {vb:?}"
            );
        }
    }
}

#[test]
fn builtin_components() {
    let rot = builtin(Builtin::Rot).unwrap();
    assert_eq!(rot.xi, Expr::y());
    assert_eq!(rot.eta, -Expr::x());
    assert!(rot.tau.is_zero() && rot.zeta_psi.is_zero() && rot.zeta_phi.is_zero());

    let x2 = builtin(Builtin::X2).unwrap();
    let p = [0.7, -1.3, 1.9];
    let v = |e: &Expr| e.eval_closed(p).unwrap();
    assert_eq!(v(&x2.xi), -1.9 * -1.3);
    assert_eq!(v(&x2.eta), 1.9 * 0.7);
    assert!((v(&x2.zeta_phi) - 0.5 * (0.49 + 1.69)).abs() < 1e-15);
    assert!(x2.zeta_psi.is_zero());

    assert!(builtin(Builtin::Xab(0.0, 1.0)).unwrap().same_components(&x2));
    assert!(!builtin(Builtin::Xab(1.0, 1.0)).unwrap().same_components(&x2));
    assert!(builtin(Builtin::Xab(0.0, 0.0)).is_err());

    assert_eq!(builtin(Builtin::X3).unwrap().kind, GeneratorKind::Generalized);
    assert_eq!(builtin(Builtin::Xpp).unwrap().kind, GeneratorKind::Point);
    assert_eq!(x1().bindings.funcs().count(), 2);
}

#[test]
fn parse_by_name() {
    let g = Generator::parse("Xab(1, 2)", &[]).unwrap();
    assert!(matches!(g.builtin(), Builtin::Xab(a, b) if *a == 1.0 && *b == 2.0));
    assert!(Generator::parse("X2", &[])
        .unwrap()
        .same_components(&builtin(Builtin::X2).unwrap()));
    let funcs = [time_fn("A", Expr::one()), time_fn("B", Expr::t())];
    assert!(Generator::parse("X1", &funcs).is_ok());
    assert!(matches!(
        Generator::parse("X1", &funcs[..1]),
        Err(LieError::BadParameters { .. })
    ));
    assert!(matches!(Generator::parse("X9", &[]), Err(LieError::Unknown(_))));
    assert!(matches!(
        Generator::parse("Xab(1)", &[]),
        Err(LieError::BadParameters { .. })
    ));
    assert!(matches!(
        Generator::parse("Rot(1)", &[]),
        Err(LieError::BadParameters { .. })
    ));
    for name in BUILTIN_NAMES {
        let spec = if name == "Xab" {
            "Xab(1,0)".to_string()
        } else {
            name.to_string()
        };
        let all = [funcs[0].clone(), funcs[1].clone(), time_fn("q", Expr::t())];
        assert!(Generator::parse(&spec, &all).is_ok(), "{name}");
    }
}

#[test]
fn characteristic_examples() {
    let tx = builtin(Builtin::Tx).unwrap();
    let q = characteristic(&tx, &Expr::x(), &Expr::zero());
    assert!(q.q_psi.is_const(-1.0));
    assert!(q.q_phi.is_zero());

    let g = x1();
    let sp = trig();
    let q = characteristic(&g, &sp.psi, &sp.phi);
    let b = sp.bindings.merged(&g.bindings).unwrap();
    for p in points(20, 1) {
        let t = p[2];
        let (a, bb, at, bt) = (t.sin(), t * t, t.cos(), 2.0 * t);
        let psi_x = sp.psi.diff(Var::X, 1).eval(p, &b).unwrap();
        let psi_y = sp.psi.diff(Var::Y, 1).eval(p, &b).unwrap();
        let (phi_x, phi_y) = (1.0, -1.0);
        let want_psi = -a * psi_x - bb * psi_y;
        let want_phi = p[0] * bt - p[1] * at - a * phi_x - bb * phi_y;
        assert!((q.q_psi.eval(p, &b).unwrap() - want_psi).abs() < 1e-12);
        assert!((q.q_phi.eval(p, &b).unwrap() - want_phi).abs() < 1e-12);
    }

    let x3 = builtin(Builtin::X3).unwrap();
    let sp = gauss();
    let q = characteristic(&x3, &sp.psi, &sp.phi);
    assert_eq!(q.q_psi, sp.psi.diff(Var::Y, 1));
    assert_eq!(q.q_phi, sp.phi.diff(Var::X, 1));
    assert!(x3.zeta_psi == Expr::jet(FieldVar::Psi, [0, 1, 0]));
}

#[test]
fn exact_generators_pass_on_catalog_style_solutions() {
    let plan = SamplePlan::default().with_points(60);
    for sp in [gauss(), spiral(), trig(), xab_example()] {
        for g in exact_generators() {
            let r = symmetry_check(&g, &sp, &plan, 1e-8).unwrap();
            assert!(r.pass, "{} on {}: {:e}", g.name, sp.name, r.max_linf());
            assert_eq!(r.generator.as_deref(), Some(g.name.as_str()));
        }
    }
}

#[test]
fn exact_generators_pass_on_truncated_solutions() {
    let plan = SamplePlan::default().with_points(60);
    let psi_fn = FuncBinding::from_expr("Psi", &[Var::X], &Expr::x().tanh(), 8).unwrap();
    let traveling =
        SolutionPair::new("traveling", psi_fn.apply(vec![Expr::y() - Expr::t()]), Expr::x()).with_func(psi_fn);
    for sp in [traveling, gauss(), trig()] {
        for g in exact_generators() {
            let r = symmetry_check_truncated(&g, &sp, &plan, 1e-8).unwrap();
            assert!(r.pass, "{} on {}: {:e}", g.name, sp.name, r.max_linf());
        }
    }
}

#[test]
fn partial_generators_are_not_exact() {
    let plan = SamplePlan::default();
    let r = symmetry_check(&builtin(Builtin::Xab(1.0, 0.0)).unwrap(), &gauss(), &plan, 1e-8).unwrap();
    assert!(!r.pass);
    assert!(r.max_linf() > 1e-3);
    assert!(!builtin(Builtin::Xab(1.0, 0.0)).unwrap().builtin().is_exact());
    assert!(builtin(Builtin::Xab(0.0, 1.0)).unwrap().builtin().is_exact());
}

#[test]
fn symmetry_check_requires_a_solution() {
    let bad = SolutionPair::new("xy2", Expr::x() * Expr::y().square(), Expr::zero());
    let err = symmetry_check(&builtin(Builtin::Tx).unwrap(), &bad, &SamplePlan::default(), 1e-8).unwrap_err();
    assert!(matches!(err, LieError::Precondition { .. }));
}

#[test]
fn invariance_examples() {
    let plan = SamplePlan::default();
    let r2 = Expr::radius_squared();
    let sp = SolutionPair::new("x2_inv", r2.clone(), &r2 * Expr::angle() / (2.0 * Expr::t()))
        .with_exclusions(Exclusion::polar());
    assert!(
        invariance_check(&builtin(Builtin::X2).unwrap(), &sp, &plan, 1e-10)
            .unwrap()
            .pass
    );

    let sp = SolutionPair::new("x", Expr::x(), Expr::zero());
    assert!(
        !invariance_check(&builtin(Builtin::Rot).unwrap(), &sp, &plan, 1e-10)
            .unwrap()
            .pass
    );

    // A = 1, B = t: ψ = V(t x - y), φ = (x² - y² + 2 t x y) / (2 (1 + t²)).
    let g = builtin(Builtin::X1(time_fn("A", Expr::one()), time_fn("B", Expr::t()))).unwrap();
    let (x, y, t) = (Expr::x(), Expr::y(), Expr::t());
    let s = &t * &x - &y;
    let phi = (x.square() - y.square() + 2.0 * &t * &x * &y) / (2.0 * (1.0 + t.square()));
    let sp = SolutionPair::new("x1_inv", s.sin(), phi);
    assert!(invariance_check(&g, &sp, &plan, 1e-10).unwrap().pass);
}

#[test]
fn orbit_x1_examples() {
    let zero = FuncBinding::constant("A", 1, 0.0);
    let id = orbit_x1(&gauss(), &zero, &zero.renamed("B")).unwrap();
    assert_fields_equal(&id, &gauss(), 1e-14);

    let out = orbit_x1(
        &gauss(),
        &time_fn("A", Expr::t().sin()),
        &time_fn("B", Expr::t().square()),
    )
    .unwrap();
    let r = check(&Form::Eu, &out, &SamplePlan::default(), 1e-8).unwrap();
    assert!(r.pass, "{:e}", r.max_linf());

    let c = 0.8;
    let shifted = orbit_x1(
        &gauss(),
        &FuncBinding::constant("A", 1, c),
        &FuncBinding::constant("B", 1, 0.0),
    )
    .unwrap();
    let tx = orbit(&builtin(Builtin::Tx).unwrap(), &gauss(), c).unwrap();
    assert_fields_equal(&shifted, &tx, 1e-14);

    let no_deriv = FuncBinding::new("A", 1, 0, |a, _| a[0]);
    assert!(matches!(
        orbit_x1(&gauss(), &no_deriv, &zero),
        Err(LieError::MissingDerivative(_))
    ));
}

#[test]
fn orbit_x1_avoids_name_clashes() {
    let a = time_fn("A", Expr::t());
    let sp = gauss().with_func(a.clone());
    let out = orbit_x1(&sp, &time_fn("A", Expr::t().cos()), &time_fn("B", Expr::t())).unwrap();
    assert!(out.bindings.has_func("A") && out.bindings.has_func("A1") && out.bindings.has_func("B"));
}

#[test]
fn orbit_x2_examples() {
    assert_fields_equal(&orbit_x2(&gauss(), 0.0), &gauss(), 0.0);

    let out = orbit_x2(&gauss(), 1.0);
    let (x, y, t) = (Expr::x(), Expr::y(), Expr::t());
    let xr = &x * t.cos() + &y * t.sin();
    let want = SolutionPair::new(
        "displayed",
        (-(xr.square())).exp(),
        1.0 / (1.0 + xr.square()) + 0.5 * Expr::radius_squared(),
    );
    assert_fields_equal(&out, &want, 1e-14);
    assert!(check(&Form::Eu, &out, &SamplePlan::default(), 1e-8).unwrap().pass);

    let composed = orbit_x2(&orbit_x2(&gauss(), 0.4), -1.1);
    assert_fields_equal(&composed, &orbit_x2(&gauss(), -0.7), 1e-12);
}

#[test]
fn orbit_xab_resolves_the_worked_example() {
    let sp = xab_example();
    let plan = SamplePlan::default();
    assert!(check(&Form::Eu, &sp, &plan, 1e-9).unwrap().pass);
    for (a, b) in [(1.0, 1.0), (2.0, 1.0), (-0.5, 1.0)] {
        let out = orbit_xab(&sp, a, b, 0.5).unwrap();
        let r = check(&Form::Eu, &out, &plan, 1e-8).unwrap();
        assert!(r.pass, "({a},{b}): {:e}", r.max_linf());
    }
    // (1, 2) violates the constraints, and the raw map indeed breaks the system.
    assert!(matches!(
        orbit_xab(&sp, 1.0, 2.0, 0.5),
        Err(LieError::Precondition { .. })
    ));
    let raw = xab_transform(&sp, 1.0, 2.0, 0.5);
    let r = check(&Form::Eu, &raw, &plan, 1e-8).unwrap();
    assert!(!r.pass && r.max_linf() > 1e-3);

    assert_fields_equal(&orbit_xab(&sp, 0.0, 1.0, 0.5).unwrap(), &orbit_x2(&sp, 0.5), 0.0);
    assert_fields_equal(&orbit_xab(&sp, 1.0, 1.0, 0.0).unwrap(), &sp, 0.0);
}

#[test]
fn xab_constraints() {
    let sp = trig();
    let (c1, c2) = partial_constraint_xab(&sp, 0.0, 1.0);
    assert!(c1.is_zero() && c2.is_zero());

    let plan = SamplePlan::default().with_points(50);
    let eval = |sp: &SolutionPair, a: f64, b: f64| {
        let (c1, c2) = partial_constraint_xab(sp, a, b);
        let pts = plan.draw(sp).unwrap();
        crate::model::evaluate(
            "XAB",
            &[
                crate::model::Residual::new("C1", c1),
                crate::model::Residual::new("C2", c2),
            ],
            &sp.bindings,
            &pts,
            1e-10,
        )
        .unwrap()
    };

    // a = 0, b = 2 with ψ - Δψ and Δφ radial
    let r2 = Expr::radius_squared();
    let sp = SolutionPair::new("radial", &r2 + Expr::x().exp(), r2.square() + Expr::y());
    assert!(eval(&sp, 0.0, 2.0).pass);

    // b = 1 - a needs ψ + φ radial; b = 1 + a needs ψ - φ radial
    let g = Expr::x() * Expr::y().sin();
    let plus = SolutionPair::new("sum_radial", &r2 * Expr::t() + &g, r2.square() - &g);
    assert!(eval(&plus, 0.7, 0.3).pass);
    assert!(!eval(&plus, 0.7, 1.7).pass);
    let minus = SolutionPair::new("diff_radial", &r2 * Expr::t() + &g, &g - r2.square());
    assert!(eval(&minus, 0.7, 1.7).pass);
}

#[test]
fn orbit_scale_psi_examples() {
    let sp = spiral();
    assert_fields_equal(&orbit_scale_psi(&sp, 1.0).unwrap(), &sp, 0.0);
    for lambda in [-3.0, 0.0] {
        let out = orbit_scale_psi(&sp, lambda).unwrap();
        assert!(check(&Form::Eu, &out, &SamplePlan::default(), 1e-8).unwrap().pass);
    }
    let bad = SolutionPair::new("xy2", Expr::x() * Expr::y().square(), Expr::zero());
    assert!(matches!(orbit_scale_psi(&bad, 2.0), Err(LieError::Precondition { .. })));
}

#[test]
fn invariant_solutions_are_fixed_points() {
    let r2 = Expr::radius_squared();
    let x2_inv = SolutionPair::new("x2_inv", r2.clone(), &r2 * Expr::angle() / (2.0 * Expr::t()))
        .with_exclusions(Exclusion::polar());
    let out = orbit_x2(&x2_inv, 0.3);
    let plan = SamplePlan::default().with_points(100);
    let ta = Tape::compile(&[x2_inv.psi.clone(), x2_inv.phi.clone()], &x2_inv.bindings).unwrap();
    let tb = Tape::compile(&[out.psi.clone(), out.phi.clone()], &out.bindings).unwrap();
    for p in plan.draw(&out).unwrap() {
        // the rotated angle has its own branch cut
        if x2_inv.is_excluded(p, 0.0).unwrap() || p[1].atan2(p[0]) - 0.3 * p[2] <= -std::f64::consts::PI {
            continue;
        }
        let (a, b) = (ta.eval(p), tb.eval(p));
        assert!(
            (a[0] - b[0]).abs() < 1e-12 && (a[1] - b[1]).abs() < 1e-9 * (1.0 + a[1].abs()),
            "{p:?}"
        );
    }

    let (a, b) = (time_fn("A", Expr::one()), time_fn("B", Expr::t()));
    let (x, y, t) = (Expr::x(), Expr::y(), Expr::t());
    let phi = (x.square() - y.square() + 2.0 * &t * &x * &y) / (2.0 * (1.0 + t.square()));
    let x1_inv = SolutionPair::new("x1_inv", (&t * &x - &y).sin(), phi);
    let out = orbit_x1(&x1_inv, &a, &b).unwrap();
    // the orbit is the fixed point only up to a function of t added to φ
    let ta = Tape::compile(&[x1_inv.psi.clone(), x1_inv.phi.clone()], &x1_inv.bindings).unwrap();
    let tb = Tape::compile(&[out.psi.clone(), out.phi.clone()], &out.bindings).unwrap();
    for p in points(30, 5) {
        let (u, v) = (ta.eval(p), tb.eval(p));
        assert!((u[0] - v[0]).abs() < 1e-12);
        let q = [0.3, -0.4, p[2]];
        let (uq, vq) = (ta.eval(q), tb.eval(q));
        assert!(((u[1] - v[1]) - (uq[1] - vq[1])).abs() < 1e-12);
    }
}

#[test]
fn generic_orbits() {
    let plan = SamplePlan::default().with_points(80);
    for g in exact_generators() {
        for sp in [gauss(), trig()] {
            let out = orbit(&g, &sp, 0.6).unwrap();
            let r = check(&Form::Eu, &out, &plan, 1e-7).unwrap();
            assert!(r.pass, "{} on {}: {:e}", g.name, sp.name, r.max_linf());
        }
    }
    let err = orbit(&builtin(Builtin::X3).unwrap(), &gauss(), 1.0).unwrap_err();
    assert!(matches!(err, LieError::NoFiniteOrbit(_)));
}
