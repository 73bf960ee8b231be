use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::symcore::{Expr, FuncBinding, Tape, Var};

fn points(n: usize, seed: u64) -> Vec<[f64; 3]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            [
                rng.gen_range(-2.0..2.0),
                rng.gen_range(0.3..2.0),
                rng.gen_range(0.1..2.0),
            ]
        })
        .collect()
}

fn values(exprs: &[Expr], sp: &SolutionPair, p: [f64; 3]) -> Vec<f64> {
    Tape::compile(exprs, &sp.bindings).unwrap().eval(p)
}

fn gauss_pair() -> SolutionPair {
    let x = Expr::x();
    SolutionPair::new("static_gauss", (-(x.square())).exp(), 1.0 / (1.0 + x.square()))
}

fn tanh_binding() -> FuncBinding {
    FuncBinding::from_expr("Psi", &[Var::X], &Expr::x().tanh(), 6).unwrap()
}

#[test]
fn zero_pair_has_zero_residuals_in_every_form() {
    let sp = SolutionPair::zero();
    let (r1, r2) = residual_eu(&sp);
    assert!(r1.is_zero() && r2.is_zero());
    let (d1, d2) = residual_div(&sp);
    assert!(d1.is_zero() && d2.is_zero());
    let (t1, t2) = residual_truncated(&sp);
    assert!(t1.is_zero() && t2.is_zero());
    let (p1, p2, p3) = residual_psys(&sp);
    assert!(p1.is_zero() && p2.is_zero() && p3.is_zero());
    let f = flux_components(&sp);
    for e in [f.j0, f.jx, f.jy, f.k0, f.kx, f.ky] {
        assert!(e.is_zero());
    }
    let report = check(&Form::Eu, &sp, &SamplePlan::default(), 1e-9).unwrap();
    assert!(report.pass);
    assert_eq!(report.max_linf(), 0.0);
}

#[test]
fn static_gaussian_pair_solves_the_system() {
    let r = check(&Form::Eu, &gauss_pair(), &SamplePlan::default(), 1e-9).unwrap();
    assert!(r.pass, "{r:?}");
    assert_eq!(r.samples, 200);
}

#[test]
fn non_solution_residual_matches_finite_differences() {
    // ψ = x y², φ = 0 is time independent, so R1 = [ψ, ψ - Δψ] = -[ψ, Δψ].
    let sp = SolutionPair::new("xy2", Expr::x() * Expr::y().square(), Expr::zero());
    let (r1, _) = residual_eu(&sp);
    let psi = |x: f64, y: f64| x * y * y;
    let h = 1e-3;
    let lap =
        |x: f64, y: f64| (psi(x + h, y) + psi(x - h, y) + psi(x, y + h) + psi(x, y - h) - 4.0 * psi(x, y)) / (h * h);
    let g = |x: f64, y: f64| psi(x, y) - lap(x, y);
    let dx = |f: &dyn Fn(f64, f64) -> f64, x: f64, y: f64| (f(x + h, y) - f(x - h, y)) / (2.0 * h);
    let dy = |f: &dyn Fn(f64, f64) -> f64, x: f64, y: f64| (f(x, y + h) - f(x, y - h)) / (2.0 * h);
    for p in points(10, 1) {
        let (x, y) = (p[0], p[1]);
        let fd = dx(&psi, x, y) * dy(&g, x, y) - dx(&g, x, y) * dy(&psi, x, y);
        let sym = r1.eval(p, &sp.bindings).unwrap();
        assert!((sym - fd).abs() <= 1e-4 * (1.0 + fd.abs()), "{sym} vs {fd}");
        assert!(sym.abs() > 1e-3 || (x * y).abs() < 1e-3);
    }
}

#[test]
fn harmonic_stream_function_alone_is_a_solution() {
    // ψ = x y has Δψ = 0, so with φ = 0 both residuals vanish identically.
    let sp = SolutionPair::new("xy", Expr::x() * Expr::y(), Expr::zero());
    assert!(check(&Form::Eu, &sp, &SamplePlan::default(), 1e-12).unwrap().pass);
}

#[test]
fn flux_form_is_a_linear_combination_of_advective_form() {
    let sp = SolutionPair::new("trig", Expr::x().sin() + Expr::y().cos(), Expr::x() - Expr::y());
    let (r1, r2) = residual_eu(&sp);
    let (d1, d2) = residual_div(&sp);
    for p in points(100, 2) {
        let v = values(&[r1.clone(), r2.clone(), d1.clone(), d2.clone()], &sp, p);
        let scale = 1.0 + v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        assert!((v[2] + 0.5 * (v[0] + v[1])).abs() <= 1e-9 * scale);
        assert!((v[3] - 0.5 * (v[0] - v[1])).abs() <= 1e-9 * scale);
    }
}

#[test]
fn flux_density_and_divergence_consistency() {
    let sp = SolutionPair::new("r2", Expr::radius_squared(), Expr::zero());
    let f = flux_components(&sp);
    for p in points(10, 3) {
        let j0 = f.j0.eval(p, &sp.bindings).unwrap();
        assert!((j0 - (4.0 - p[0] * p[0] - p[1] * p[1])).abs() < 1e-12);
    }
    let sp = SolutionPair::new(
        "generic",
        (Expr::x() * Expr::t()).sin() * Expr::y(),
        Expr::x().cos() * (Expr::y() + Expr::t()).exp(),
    );
    let f = flux_components(&sp);
    let (d1, d2) = residual_div(&sp);
    let div_j = f.j0.diff(Var::T, 1) + f.jx.diff(Var::X, 1) + f.jy.diff(Var::Y, 1);
    let div_k = f.k0.diff(Var::T, 1) + f.kx.diff(Var::X, 1) + f.ky.diff(Var::Y, 1);
    for p in points(20, 4) {
        let v = values(&[div_j.clone(), d1.clone(), div_k.clone(), d2.clone()], &sp, p);
        assert!((v[0] - v[1]).abs() <= 1e-12 * (1.0 + v[0].abs()));
        assert!((v[2] - v[3]).abs() <= 1e-12 * (1.0 + v[2].abs()));
    }
}

#[test]
fn traveling_profile_solves_truncated_system() {
    let psi_fn = tanh_binding();
    let sp = SolutionPair::new("traveling", psi_fn.apply(vec![Expr::y() - Expr::t()]), Expr::x()).with_func(psi_fn);
    let r = check(&Form::Trunc, &sp, &SamplePlan::default(), 1e-10).unwrap();
    assert!(r.pass, "{r:?}");

    let bad = SolutionPair::new("sin_sin", Expr::x().sin(), Expr::y().sin());
    let r = check(&Form::Trunc, &bad, &SamplePlan::default(), 1e-6).unwrap();
    assert!(!r.pass);
    assert!(r.equations[0].linf > 1e-3);
}

#[test]
fn partial_constraints() {
    let radial = SolutionPair::new("radial", Expr::radius_squared(), Expr::radius_squared().square());
    let r = check(&Form::Pdp, &radial, &SamplePlan::default(), 1e-12).unwrap();
    assert!(r.pass);

    let ell = SolutionPair::new(
        "ellipse",
        3.0 * Expr::x().square() + Expr::y().square(),
        (-Expr::x()).exp(),
    );
    let (c1, c2) = constraints_partial(&ell);
    assert!(
        c1.is_zero()
            || check(&Form::Pdp, &ell, &SamplePlan::default(), 1e-12)
                .unwrap()
                .equations[0]
                .linf
                == 0.0
    );
    // [ψ, Δφ] = [3x² + y², e^{-x}] = 2y e^{-x} is not zero
    assert!(c2.eval([0.0, 1.0, 0.0], &ell.bindings).unwrap().abs() > 1.0);

    let bad = SolutionPair::new("xy2", Expr::x() * Expr::y().square(), Expr::zero());
    let (c1, _) = constraints_partial(&bad);
    // [x y², 2x] = -4 x y
    assert!((c1.eval([0.5, 1.5, 0.0], &bad.bindings).unwrap() + 3.0).abs() < 1e-12);
}

#[test]
fn spiral_solves_psys_and_ab() {
    let sp = SolutionPair::new("spiral", 2.0 * Expr::t() - Expr::angle(), Expr::radius_squared())
        .with_exclusions(Exclusion::polar());
    assert!(check(&Form::Psys, &sp, &SamplePlan::default(), 1e-10).unwrap().pass);
    let form = Form::Ab {
        a: Some(FuncBinding::constant("A", 1, 0.0)),
        b: Some(FuncBinding::constant("B", 1, 4.0)),
    };
    let r = check(&form, &sp, &SamplePlan::default(), 1e-10).unwrap();
    assert!(r.pass, "{r:?}");
    assert_eq!(r.equations.len(), 3);
}

#[test]
fn trig_waves_solve_ab_with_linear_a() {
    let (c1, c2, c3, k) = (1.0, 2.0, 0.5, 3.0);
    let (x, y, t) = (Expr::x(), Expr::y(), Expr::t());
    let psi = c1 * (k * (&x - &t)).sin() + c2 * (k * (&y - &t)).sin() + c3;
    let sp = SolutionPair::new("trig", psi, &x - &y);
    let a = FuncBinding::from_expr("A", &[Var::X], &(-k * k * (Expr::x() - c3)), 4).unwrap();
    let form = Form::Ab {
        a: Some(a),
        b: Some(FuncBinding::constant("B", 1, 0.0)),
    };
    let r = check(&form, &sp, &SamplePlan::default(), 1e-10).unwrap();
    assert!(r.pass, "{r:?}");
}

#[test]
fn traveling_profile_first_ab_residual_only() {
    let psi_fn = tanh_binding();
    let sp = SolutionPair::new("traveling", psi_fn.apply(vec![Expr::y() - Expr::t()]), Expr::x()).with_func(psi_fn);
    let (first, second, third) = residual_ab(&sp, None, None);
    assert!(second.is_none() && third.is_none());
    for p in points(20, 5) {
        assert!(first.eval(p, &sp.bindings).unwrap().abs() < 1e-14);
    }
    let r = check(&Form::Ab { a: None, b: None }, &sp, &SamplePlan::default(), 1e-12).unwrap();
    assert!(r.pass);
    assert_eq!(r.equations.len(), 1);
}

#[test]
fn perturbation_is_detected_with_worst_point() {
    let base = SolutionPair::new("spiral", 2.0 * Expr::t() - Expr::angle(), Expr::radius_squared())
        .with_exclusions(Exclusion::polar());
    assert!(check(&Form::Eu, &base, &SamplePlan::default(), 1e-8).unwrap().pass);
    let bumped = base.with_fields(
        "spiral+x3",
        base.psi.clone() + 1e-3 * Expr::x().powi(3),
        base.phi.clone(),
    );
    let r = check(&Form::Eu, &bumped, &SamplePlan::default(), 1e-8).unwrap();
    assert!(!r.pass);
    let worst = &r.equations[0];
    assert!(worst.linf > 1e-8);
    assert!(worst.worst_point[0].abs() <= 3.0 && worst.worst_point[2] >= 0.1);
}

#[test]
fn check_is_deterministic_and_respects_exclusions() {
    let sp = SolutionPair::new("spiral", 2.0 * Expr::t() - Expr::angle(), Expr::radius_squared())
        .with_exclusions(Exclusion::polar());
    let plan = SamplePlan::default();
    let pts = plan.draw(&sp).unwrap();
    for p in &pts {
        assert!(p[0].hypot(p[1]) >= 0.05);
        assert!(std::f64::consts::PI - p[1].atan2(p[0]).abs() >= 0.05);
    }
    let a = check(&Form::Eu, &sp, &plan, 1e-9).unwrap();
    let b = check(&Form::Eu, &sp, &plan, 1e-9).unwrap();
    assert_eq!(a.to_json(), b.to_json());
    let c = check(&Form::Eu, &sp, &plan.clone().with_seed(7), 1e-9).unwrap();
    assert_ne!(a.equations[0].worst_point, c.equations[0].worst_point);
}

#[test]
fn singular_points_are_reported() {
    let sp = SolutionPair::new("pole", Expr::y() / Expr::x(), Expr::x() * Expr::y());
    let pts = [[0.0, 1.0, 1.0]];
    let err = evaluate("EU", &Form::Eu.residuals(&sp), &sp.bindings, &pts, 1e-9).unwrap_err();
    assert!(matches!(err, ModelError::Singular { point, .. } if point == [0.0, 1.0, 1.0]));
}

#[test]
fn unbound_function_is_an_error() {
    let sp = SolutionPair::new("q", Expr::func("Q", vec![Expr::t()]) * Expr::x(), Expr::zero());
    let err = check(&Form::Eu, &sp, &SamplePlan::default(), 1e-9).unwrap_err();
    assert!(matches!(
        err,
        ModelError::Eval(crate::symcore::EvalError::UnboundFunc(_))
    ));
}

#[test]
fn report_json_schema() {
    let r = check(&Form::Eu, &gauss_pair(), &SamplePlan::default().with_points(5), 1e-9).unwrap();
    let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
    for key in ["form", "samples", "tol", "equations", "pass"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    let eq = &v["equations"][0];
    for key in ["name", "linf", "l2", "worst_point"] {
        assert!(eq.get(key).is_some(), "missing {key}");
    }
    assert_eq!(eq["worst_point"].as_array().unwrap().len(), 3);
    let back: ResidualReport = serde_json::from_str(&r.to_json()).unwrap();
    assert_eq!(back, r);
}
