use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

fn random_points(n: usize, seed: u64) -> Vec<[f64; 3]> {
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

fn central_difference(e: &Expr, b: &Bindings, p: [f64; 3], v: Var) -> f64 {
    let h = f64::EPSILON.cbrt() * (1.0 + p[v.index()].abs());
    let mut lo = p;
    let mut hi = p;
    lo[v.index()] -= h;
    hi[v.index()] += h;
    (e.eval(hi, b).unwrap() - e.eval(lo, b).unwrap()) / (2.0 * h)
}

fn second_difference(e: &Expr, b: &Bindings, p: [f64; 3], v: Var) -> f64 {
    let h = f64::EPSILON.powf(0.25) * (1.0 + p[v.index()].abs());
    let mut lo = p;
    let mut hi = p;
    lo[v.index()] -= h;
    hi[v.index()] += h;
    (e.eval(hi, b).unwrap() - 2.0 * e.eval(p, b).unwrap() + e.eval(lo, b).unwrap()) / (h * h)
}

fn gamma_sin() -> FuncBinding {
    FuncBinding::of_time("gamma", &Expr::t().sin(), 6).unwrap()
}

/// A spread of the expression shapes that occur in the solution catalog.
fn sample_exprs() -> Vec<(Expr, Bindings)> {
    let (x, y, t) = (Expr::x(), Expr::y(), Expr::t());
    let g = gamma_sin();
    let gb = Bindings::new().with_func(g.clone());
    let gamma = g.apply(vec![t.clone()]);
    vec![
        ((-(x.square())).exp(), Bindings::new()),
        (1.0 / (1.0 + x.square()), Bindings::new()),
        ((3.0 * (&x - &gamma)).sin() + (2.0_f64.sqrt() * &y).exp(), gb.clone()),
        (Expr::radius_squared() * Expr::angle() / (2.0 * &t), Bindings::new()),
        (2.0 * &t - Expr::angle(), Bindings::new()),
        (t.powf(-2.5) * Expr::radius(), Bindings::new()),
        ((&x * t.cos() + &y * t.sin()).square().ln(), Bindings::new()),
        ((&x * &y).tanh() * gamma.clone(), gb),
    ]
}

#[test]
fn power_rule() {
    let x = Expr::x();
    let d = (&x * &x).diff(Var::X, 1);
    for p in random_points(10, 1) {
        assert!(close(d.eval_closed(p).unwrap(), 2.0 * p[0], 1e-15));
    }
}

#[test]
fn opaque_function_chain_rule() {
    let a = FuncBinding::of_time("A", &Expr::t().cos(), 4).unwrap();
    let b = Bindings::new().with_func(a.clone());
    let e = a.apply(vec![Expr::t()]) * Expr::x();
    let d = e.diff(Var::T, 1);
    match d.node() {
        Node::Binary(Binary::Mul, l, r) => {
            assert!(matches!(l.node(), Node::Func { orders, .. } if orders == &vec![1]));
            assert_eq!(r, &Expr::x());
        }
        other => panic!("unexpected shape {other:?}"),
    }
    let p = [1.5, 0.0, 0.7];
    assert!(close(d.eval(p, &b).unwrap(), -0.7f64.sin() * 1.5, 1e-15));
}

#[test]
fn chain_rule_through_moving_argument() {
    let g = gamma_sin();
    let b = Bindings::new().with_func(g.clone());
    let k = 2.5;
    let e = (k * (Expr::x() - g.apply(vec![Expr::t()]))).sin();
    let d = e.diff(Var::T, 1);
    for p in random_points(10, 2) {
        let expect = -k * p[2].cos() * (k * (p[0] - p[2].sin())).cos();
        assert!(close(d.eval(p, &b).unwrap(), expect, 1e-13));
    }
}

#[test]
fn bracket_examples() {
    let (x, y) = (Expr::x(), Expr::y());
    let br = bracket(&x.square(), &y);
    assert_eq!(br.eval_closed([3.0, -1.0, 0.0]).unwrap(), 6.0);

    let f = x.sin() * y.exp();
    let self_br = bracket(&f, &f);
    for p in random_points(20, 3) {
        assert_eq!(self_br.eval_closed(p).unwrap(), 0.0);
    }

    let psi = 2.0 * Expr::t() - Expr::angle();
    let phi = Expr::radius_squared();
    for p in random_points(20, 4) {
        assert!(close(bracket(&psi, &phi).eval_closed(p).unwrap(), 2.0, 1e-13));
    }
}

#[test]
fn laplacian_examples() {
    let (x, y) = (Expr::x(), Expr::y());
    let l = laplacian(&(x.square() + y.square()));
    assert_eq!(l.as_const(), Some(4.0));

    let la = laplacian(&Expr::angle());
    for p in random_points(50, 5) {
        assert!(la.eval_closed(p).unwrap().abs() < 1e-13);
    }

    let lg = laplacian(&(-(x.square())).exp());
    for p in random_points(20, 6) {
        let expect = (4.0 * p[0] * p[0] - 2.0) * (-p[0] * p[0]).exp();
        assert!(close(lg.eval_closed(p).unwrap(), expect, 1e-14));
    }
}

#[test]
fn eval_examples() {
    let e = Expr::x() * Expr::y() + Expr::t();
    assert_eq!(e.eval_closed([2.0, 3.0, 1.0]).unwrap(), 7.0);
    let d3 = Expr::x().exp().diff(Var::X, 3);
    assert!(close(
        d3.eval_closed([1.0, 0.0, 0.0]).unwrap(),
        std::f64::consts::E,
        1e-15
    ));
}

#[test]
fn quadratic_phi_term_matches_finite_differences() {
    // hyperbolic part of the moving-frame invariant potential, A = cos t, B = sin t
    let a = FuncBinding::of_time("A", &Expr::t().cos(), 6).unwrap();
    let b = FuncBinding::of_time("B", &Expr::t().sin(), 6).unwrap();
    let bind = Bindings::new().with_func(a.clone()).with_func(b.clone());
    let (x, y, t) = (Expr::x(), Expr::y(), Expr::t());
    let ae = a.apply(vec![t.clone()]);
    let be = b.apply(vec![t.clone()]);
    let at = ae.diff(Var::T, 1);
    let bt = be.diff(Var::T, 1);
    let quad = 0.5 / (ae.square() + be.square())
        * ((&at * &be + &ae * &bt) * (x.square() - y.square()) - 2.0 * &x * &y * (&ae * &at - &be * &bt));
    let closed = |x: f64, y: f64, t: f64| {
        let (a, b, at, bt) = (t.cos(), t.sin(), -t.sin(), t.cos());
        0.5 / (a * a + b * b) * ((at * b + a * bt) * (x * x - y * y) - 2.0 * x * y * (a * at - b * bt))
    };
    let p = [1.0, 1.0, 0.0];
    assert!(close(quad.eval(p, &bind).unwrap(), closed(1.0, 1.0, 0.0), 1e-14));
    let h = 1e-5;
    let fd_t = (closed(1.0, 1.0, h) - closed(1.0, 1.0, -h)) / (2.0 * h);
    assert!(close(quad.diff(Var::T, 1).eval(p, &bind).unwrap(), fd_t, 1e-8));
}

#[test]
fn unbound_symbols_are_errors() {
    let e = Expr::param("k") * Expr::x();
    assert_eq!(e.eval_closed([1.0, 0.0, 0.0]), Err(EvalError::UnboundParam("k".into())));
    let f = Expr::func("q", vec![Expr::t()]);
    assert_eq!(f.eval_closed([0.0; 3]), Err(EvalError::UnboundFunc("q".into())));
    let q = FuncBinding::of_time("q", &Expr::t().exp(), 1).unwrap();
    let b = Bindings::new().with_func(q);
    assert!(f.diff(Var::T, 1).eval([0.0; 3], &b).is_ok());
    assert!(matches!(
        f.diff(Var::T, 2).eval([0.0; 3], &b),
        Err(EvalError::UnboundOrder { order: 2, max: 1, .. })
    ));
    assert_eq!(Expr::psi().eval_closed([0.0; 3]), Err(EvalError::UnresolvedJet));
}

#[test]
fn non_finite_values_propagate() {
    let e = Expr::x().ln();
    assert!(e.eval_closed([-1.0, 0.0, 0.0]).unwrap().is_nan());
    let r = 1.0 / Expr::x();
    assert!(r.eval_closed([0.0, 0.0, 0.0]).unwrap().is_infinite());
}

#[test]
fn simplify_examples() {
    let f = Expr::y().sin();
    let g = Expr::x().exp();
    let raw = Expr::raw_binary(
        Binary::Add,
        Expr::raw_binary(Binary::Mul, Expr::zero(), f.clone()),
        g.clone(),
    );
    assert_eq!(raw.simplify(), g);

    let pow1 = Expr::raw_binary(Binary::Pow, Expr::x(), Expr::one());
    assert_eq!(pow1.simplify(), Expr::x());

    let nn = Expr::raw_unary(Unary::Neg, Expr::raw_unary(Unary::Neg, Expr::y()));
    assert_eq!(nn.simplify(), Expr::y());

    let h = Expr::x().sin() * Expr::y().exp();
    let s = bracket(&h, &h).simplify();
    for p in random_points(50, 7) {
        assert_eq!(s.eval_closed(p).unwrap(), 0.0);
    }
}

#[test]
fn simplify_preserves_values() {
    for (e, b) in sample_exprs() {
        let d = e.diff(Var::X, 1).diff(Var::Y, 1);
        let s = d.simplify();
        for p in random_points(20, 8) {
            assert!(close(d.eval(p, &b).unwrap(), s.eval(p, &b).unwrap(), 1e-13));
        }
    }
}

#[test]
fn clairaut_on_sample_expressions() {
    for (e, b) in sample_exprs() {
        let xy = e.diff(Var::X, 1).diff(Var::Y, 1);
        let yx = e.diff(Var::Y, 1).diff(Var::X, 1);
        let xt = e.diff(Var::X, 1).diff(Var::T, 1);
        let tx = e.diff(Var::T, 1).diff(Var::X, 1);
        for p in random_points(100, 9) {
            let (a, c) = (xy.eval(p, &b).unwrap(), yx.eval(p, &b).unwrap());
            assert!(close(a, c, 1e-9), "{e}: {a} vs {c}");
            let (a, c) = (xt.eval(p, &b).unwrap(), tx.eval(p, &b).unwrap());
            assert!(close(a, c, 1e-9), "{e}: {a} vs {c}");
        }
    }
}

#[test]
fn symbolic_derivatives_match_finite_differences() {
    for (e, b) in sample_exprs() {
        for p in random_points(20, 10) {
            for v in Var::ALL {
                let sym = e.diff(v, 1).eval(p, &b).unwrap();
                let fd = central_difference(&e, &b, p, v);
                assert!(close(sym, fd, 1e-6), "{e} d{v:?}: {sym} vs {fd}");
                let sym2 = e.diff(v, 2).eval(p, &b).unwrap();
                let fd2 = second_difference(&e, &b, p, v);
                assert!(close(sym2, fd2, 1e-6), "{e} d²{v:?}: {sym2} vs {fd2}");
            }
        }
    }
}

#[test]
fn atan2_gradient_is_exact() {
    let th = Expr::angle();
    let tx = th.diff(Var::X, 1);
    let ty = th.diff(Var::Y, 1);
    for p in random_points(20, 11) {
        let r2 = p[0] * p[0] + p[1] * p[1];
        assert!(close(tx.eval_closed(p).unwrap(), -p[1] / r2, 1e-15));
        assert!(close(ty.eval_closed(p).unwrap(), p[0] / r2, 1e-15));
    }
}

#[test]
fn jets_substitute_to_field_derivatives() {
    let q = Expr::jet(FieldVar::Psi, [0, 1, 0]) + Expr::jet(FieldVar::Phi, [1, 0, 0]);
    assert!(q.has_jet_derivatives());
    let psi = Expr::x() * Expr::y().square();
    let phi = Expr::x().sin();
    let s = q.substitute_jets(&psi, &phi);
    assert!(!s.has_jets());
    let p = [0.3, 1.2, 0.0];
    assert!(close(s.eval_closed(p).unwrap(), 2.0 * 0.3 * 1.2 + 0.3f64.cos(), 1e-15));
    // d/dx of a jet raises its order
    let d = Expr::psi().diff(Var::X, 2);
    assert_eq!(d, Expr::jet(FieldVar::Psi, [2, 0, 0]));
}

#[test]
fn parameter_derivative() {
    let e = Expr::param("eps") * Expr::x() + Expr::param("eps").square();
    let d = e.diff_param("eps");
    let b = Bindings::new().with_param("eps", 0.5);
    assert!(close(d.eval([2.0, 0.0, 0.0], &b).unwrap(), 3.0, 1e-15));
}

#[test]
fn tape_shares_common_subexpressions() {
    let e = (Expr::x().sin() * Expr::y()).exp();
    let a = e.clone() + e.clone();
    let b = (Expr::x().sin() * Expr::y()).exp() * 3.0;
    let tape = Tape::compile(&[a, b], &Bindings::new()).unwrap();
    // x, sin x, y, product, exp, sum, 3, scaled
    assert_eq!(tape.len(), 8);
}

#[test]
fn evaluation_is_deterministic_across_threads() {
    let (e, b) = sample_exprs().pop().unwrap();
    let d = e.diff(Var::X, 2);
    let p = [0.4, 0.9, 1.3];
    let here = d.eval(p, &b).unwrap();
    let there = std::thread::spawn(move || d.eval(p, &b).unwrap()).join().unwrap();
    assert_eq!(here.to_bits(), there.to_bits());
}

mod props {
    use proptest::prelude::*;

    use super::super::*;

    fn poly_trig() -> impl Strategy<Value = Expr> {
        (-3.0..3.0f64, -3.0..3.0f64, 0.1..2.0f64, 0.1..2.0f64).prop_map(|(a, b, k, m)| {
            (k * Expr::x() + a).sin() * (m * Expr::y()).cos() + b * Expr::x() * Expr::y().square()
        })
    }

    proptest! {
        #[test]
        fn bracket_is_bilinear_and_antisymmetric(
            f in poly_trig(), g in poly_trig(), h in poly_trig(),
            x in -2.0..2.0f64, y in -2.0..2.0f64,
        ) {
            let p = [x, y, 0.0];
            let lhs = bracket(&(&f + &g), &h).eval_closed(p).unwrap();
            let rhs = bracket(&f, &h).eval_closed(p).unwrap() + bracket(&g, &h).eval_closed(p).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()));
            let fg = bracket(&f, &g).eval_closed(p).unwrap();
            let gf = bracket(&g, &f).eval_closed(p).unwrap();
            prop_assert!((fg + gf).abs() <= 1e-10 * (1.0 + fg.abs()));
        }

        #[test]
        fn mixed_partials_commute(f in poly_trig(), x in -2.0..2.0f64, y in -2.0..2.0f64) {
            let p = [x, y, 0.0];
            let a = f.diff(Var::X, 2).diff(Var::Y, 1).eval_closed(p).unwrap();
            let b = f.diff(Var::Y, 1).diff(Var::X, 2).eval_closed(p).unwrap();
            prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()));
        }
    }
}
