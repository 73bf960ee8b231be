//! Symbolic expressions over the independent variables `(x, y, t)`.
//!
//! An [`Expr`] is an immutable, reference-counted tree. Besides the usual
//! elementary functions it carries three kinds of symbolic leaves:
//!
//! * named numeric parameters ([`Node::Param`]),
//! * opaque function applications such as `A(t)` or `V(s, t)` together with a
//!   multi-index of partial derivative orders ([`Node::Func`]),
//! * jet coordinates `∂^{i,j,k} ψ` / `∂^{i,j,k} φ` of the two dependent
//!   fields ([`Node::Jet`]), used by symmetry generators whose components
//!   depend on the unknowns and their derivatives.
//!
//! Differentiation is exact and closed on all of these. Numeric values come
//! from compiling one or more expressions into a [`Tape`] against a set of
//! [`Bindings`].

mod diff;
mod eval;
mod func;
mod simplify;

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use eval::{Bindings, EvalError, Tape};
pub use func::FuncBinding;

/// Independent variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Var {
    X,
    Y,
    T,
}

impl Var {
    pub const ALL: [Var; 3] = [Var::X, Var::Y, Var::T];

    pub fn index(self) -> usize {
        match self {
            Var::X => 0,
            Var::Y => 1,
            Var::T => 2,
        }
    }
}

/// Dependent field of the two-field system.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FieldVar {
    Psi,
    Phi,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Unary {
    Neg,
    Sin,
    Cos,
    Exp,
    Ln,
    Sqrt,
}

/// Binary operators. `Atan2(a, b)` is the angle of the point `(b, a)`,
/// i.e. the first operand plays the role of `y`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Binary {
    Add,
    Mul,
    Div,
    Pow,
    Atan2,
}

#[derive(Debug, PartialEq)]
pub enum Node {
    Const(f64),
    Var(Var),
    Param(Arc<str>),
    /// Opaque function `name(args...)` differentiated `orders[i]` times in its
    /// `i`-th slot.
    Func {
        name: Arc<str>,
        args: Vec<Expr>,
        orders: Vec<u32>,
    },
    /// Formal derivative `∂x^a ∂y^b ∂t^c` of a dependent field.
    Jet {
        field: FieldVar,
        orders: [u32; 3],
    },
    Unary(Unary, Expr),
    Binary(Binary, Expr, Expr),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Expr(Arc<Node>);

impl Expr {
    pub fn node(&self) -> &Node {
        &self.0
    }

    pub(crate) fn ptr(&self) -> *const Node {
        Arc::as_ptr(&self.0)
    }

    pub fn from_node(node: Node) -> Expr {
        Expr(Arc::new(node))
    }

    pub fn constant(c: f64) -> Expr {
        Expr::from_node(Node::Const(c))
    }

    pub fn zero() -> Expr {
        Expr::constant(0.0)
    }

    pub fn one() -> Expr {
        Expr::constant(1.0)
    }

    pub fn var(v: Var) -> Expr {
        Expr::from_node(Node::Var(v))
    }

    pub fn x() -> Expr {
        Expr::var(Var::X)
    }

    pub fn y() -> Expr {
        Expr::var(Var::Y)
    }

    pub fn t() -> Expr {
        Expr::var(Var::T)
    }

    pub fn param(name: &str) -> Expr {
        Expr::from_node(Node::Param(Arc::from(name)))
    }

    /// Undifferentiated opaque function application.
    pub fn func(name: &str, args: Vec<Expr>) -> Expr {
        let orders = vec![0; args.len()];
        Expr::func_derivative(name, args, orders)
    }

    pub fn func_derivative(name: &str, args: Vec<Expr>, orders: Vec<u32>) -> Expr {
        assert_eq!(args.len(), orders.len(), "one derivative order per argument");
        Expr::from_node(Node::Func {
            name: Arc::from(name),
            args,
            orders,
        })
    }

    pub fn jet(field: FieldVar, orders: [u32; 3]) -> Expr {
        Expr::from_node(Node::Jet { field, orders })
    }

    pub fn psi() -> Expr {
        Expr::jet(FieldVar::Psi, [0, 0, 0])
    }

    pub fn phi() -> Expr {
        Expr::jet(FieldVar::Phi, [0, 0, 0])
    }

    pub fn as_const(&self) -> Option<f64> {
        match self.node() {
            Node::Const(c) => Some(*c),
            _ => None,
        }
    }

    pub fn is_const(&self, value: f64) -> bool {
        self.as_const() == Some(value)
    }

    pub fn is_zero(&self) -> bool {
        self.is_const(0.0)
    }

    // Raw constructors build the node verbatim; the named builders below
    // fold constants and apply 0/1 identities.

    pub fn raw_unary(op: Unary, a: Expr) -> Expr {
        Expr::from_node(Node::Unary(op, a))
    }

    pub fn raw_binary(op: Binary, a: Expr, b: Expr) -> Expr {
        Expr::from_node(Node::Binary(op, a, b))
    }

    pub fn unary(op: Unary, a: Expr) -> Expr {
        if let Some(c) = a.as_const() {
            return Expr::constant(eval::apply_unary(op, c));
        }
        if op == Unary::Neg {
            if let Node::Unary(Unary::Neg, inner) = a.node() {
                return inner.clone();
            }
        }
        Expr::raw_unary(op, a)
    }

    pub fn binary(op: Binary, a: Expr, b: Expr) -> Expr {
        if let (Some(ca), Some(cb)) = (a.as_const(), b.as_const()) {
            return Expr::constant(eval::apply_binary(op, ca, cb));
        }
        match op {
            Binary::Add => {
                if a.is_zero() {
                    return b;
                }
                if b.is_zero() {
                    return a;
                }
            }
            Binary::Mul => {
                if a.is_zero() || b.is_zero() {
                    return Expr::zero();
                }
                if a.is_const(1.0) {
                    return b;
                }
                if b.is_const(1.0) {
                    return a;
                }
                if a.is_const(-1.0) {
                    return Expr::unary(Unary::Neg, b);
                }
                if b.is_const(-1.0) {
                    return Expr::unary(Unary::Neg, a);
                }
                // c1 * (c2 * e) -> (c1 c2) * e
                if let (Some(c1), Node::Binary(Binary::Mul, l, r)) = (a.as_const(), b.node()) {
                    if let Some(c2) = l.as_const() {
                        return Expr::binary(Binary::Mul, Expr::constant(c1 * c2), r.clone());
                    }
                }
                if b.as_const().is_some() {
                    return Expr::binary(Binary::Mul, b, a);
                }
            }
            Binary::Div => {
                if a.is_zero() {
                    return Expr::zero();
                }
                if b.is_const(1.0) {
                    return a;
                }
            }
            Binary::Pow => {
                if b.is_zero() {
                    return Expr::one();
                }
                if b.is_const(1.0) {
                    return a;
                }
                if a.is_const(1.0) {
                    return Expr::one();
                }
            }
            Binary::Atan2 => {}
        }
        Expr::raw_binary(op, a, b)
    }

    pub fn sin(&self) -> Expr {
        Expr::unary(Unary::Sin, self.clone())
    }

    pub fn cos(&self) -> Expr {
        Expr::unary(Unary::Cos, self.clone())
    }

    pub fn exp(&self) -> Expr {
        Expr::unary(Unary::Exp, self.clone())
    }

    pub fn ln(&self) -> Expr {
        Expr::unary(Unary::Ln, self.clone())
    }

    pub fn sqrt(&self) -> Expr {
        Expr::unary(Unary::Sqrt, self.clone())
    }

    pub fn pow(&self, e: Expr) -> Expr {
        Expr::binary(Binary::Pow, self.clone(), e)
    }

    pub fn powi(&self, n: i32) -> Expr {
        self.pow(Expr::constant(n as f64))
    }

    pub fn powf(&self, p: f64) -> Expr {
        self.pow(Expr::constant(p))
    }

    pub fn square(&self) -> Expr {
        self.powi(2)
    }

    /// Angle of the point `(x_arg, y_arg)` in `(-π, π]`.
    pub fn atan2(y_arg: Expr, x_arg: Expr) -> Expr {
        Expr::binary(Binary::Atan2, y_arg, x_arg)
    }

    pub fn tanh(&self) -> Expr {
        // 1 - 2 / (exp(2u) + 1), finite for all real u
        1.0 - 2.0 / ((2.0 * self.clone()).exp() + 1.0)
    }

    pub fn sum<I: IntoIterator<Item = Expr>>(terms: I) -> Expr {
        terms.into_iter().fold(Expr::zero(), |acc, e| acc + e)
    }

    /// Polar radius `sqrt(x² + y²)`.
    pub fn radius() -> Expr {
        Expr::radius_squared().sqrt()
    }

    pub fn radius_squared() -> Expr {
        Expr::x().square() + Expr::y().square()
    }

    /// Polar angle `atan2(y, x)`.
    pub fn angle() -> Expr {
        Expr::atan2(Expr::y(), Expr::x())
    }

    /// Flattens top-level sums (through negations) into their summands.
    pub fn additive_terms(&self) -> Vec<Expr> {
        let mut out = Vec::new();
        collect_terms(self, false, &mut out);
        out
    }

    /// Whether any jet coordinate occurs in the tree.
    pub fn has_jets(&self) -> bool {
        self.any_node(&mut |n| matches!(n, Node::Jet { .. }))
    }

    /// Whether a jet coordinate of order ≥ 1 occurs in the tree.
    pub fn has_jet_derivatives(&self) -> bool {
        self.any_node(&mut |n| matches!(n, Node::Jet { orders, .. } if orders.iter().any(|&o| o > 0)))
    }

    /// Names of all opaque functions referenced by the tree.
    pub fn func_names(&self) -> Vec<String> {
        let mut names = std::collections::BTreeSet::new();
        self.any_node(&mut |n| {
            if let Node::Func { name, .. } = n {
                names.insert(name.to_string());
            }
            false
        });
        names.into_iter().collect()
    }

    fn any_node(&self, pred: &mut dyn FnMut(&Node) -> bool) -> bool {
        let mut seen = std::collections::HashSet::new();
        let mut stack = vec![self.clone()];
        while let Some(e) = stack.pop() {
            if !seen.insert(e.ptr()) {
                continue;
            }
            if pred(e.node()) {
                return true;
            }
            match e.node() {
                Node::Func { args, .. } => stack.extend(args.iter().cloned()),
                Node::Unary(_, a) => stack.push(a.clone()),
                Node::Binary(_, a, b) => {
                    stack.push(a.clone());
                    stack.push(b.clone());
                }
                _ => {}
            }
        }
        false
    }
}

fn collect_terms(e: &Expr, negate: bool, out: &mut Vec<Expr>) {
    match e.node() {
        Node::Binary(Binary::Add, a, b) => {
            collect_terms(a, negate, out);
            collect_terms(b, negate, out);
        }
        Node::Unary(Unary::Neg, a) => collect_terms(a, !negate, out),
        _ => out.push(if negate { -e.clone() } else { e.clone() }),
    }
}

impl From<f64> for Expr {
    fn from(c: f64) -> Expr {
        Expr::constant(c)
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::unary(Unary::Neg, self)
    }
}

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::unary(Unary::Neg, self.clone())
    }
}

macro_rules! impl_binop {
    ($trait:ident, $method:ident, $build:expr) => {
        impl $trait<Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                $build(self, rhs)
            }
        }
        impl $trait<&Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                $build(self, rhs.clone())
            }
        }
        impl $trait<Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                $build(self.clone(), rhs)
            }
        }
        impl $trait<&Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                $build(self.clone(), rhs.clone())
            }
        }
        impl $trait<f64> for Expr {
            type Output = Expr;
            fn $method(self, rhs: f64) -> Expr {
                $build(self, Expr::constant(rhs))
            }
        }
        impl $trait<f64> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: f64) -> Expr {
                $build(self.clone(), Expr::constant(rhs))
            }
        }
        impl $trait<Expr> for f64 {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                $build(Expr::constant(self), rhs)
            }
        }
        impl $trait<&Expr> for f64 {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                $build(Expr::constant(self), rhs.clone())
            }
        }
    };
}

impl_binop!(Add, add, |a, b| Expr::binary(Binary::Add, a, b));
impl_binop!(Sub, sub, |a, b: Expr| Expr::binary(Binary::Add, a, -b));
impl_binop!(Mul, mul, |a, b| Expr::binary(Binary::Mul, a, b));
impl_binop!(Div, div, |a, b| Expr::binary(Binary::Div, a, b));

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            Node::Const(c) => write!(f, "{c}"),
            Node::Var(Var::X) => f.write_str("x"),
            Node::Var(Var::Y) => f.write_str("y"),
            Node::Var(Var::T) => f.write_str("t"),
            Node::Param(p) => f.write_str(p),
            Node::Func { name, args, orders } => {
                f.write_str(name)?;
                if orders.iter().any(|&o| o > 0) {
                    let o: Vec<String> = orders.iter().map(|o| o.to_string()).collect();
                    write!(f, "^({})", o.join(","))?;
                }
                f.write_str("(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
            Node::Jet { field, orders } => {
                let base = match field {
                    FieldVar::Psi => "psi",
                    FieldVar::Phi => "phi",
                };
                f.write_str(base)?;
                let subs: String = ["x", "y", "t"]
                    .iter()
                    .zip(orders)
                    .map(|(v, &n)| v.repeat(n as usize))
                    .collect();
                if !subs.is_empty() {
                    write!(f, "_{subs}")?;
                }
                Ok(())
            }
            Node::Unary(Unary::Neg, a) => write!(f, "-({a})"),
            Node::Unary(op, a) => {
                let name = match op {
                    Unary::Sin => "sin",
                    Unary::Cos => "cos",
                    Unary::Exp => "exp",
                    Unary::Ln => "ln",
                    Unary::Sqrt => "sqrt",
                    Unary::Neg => unreachable!(),
                };
                write!(f, "{name}({a})")
            }
            Node::Binary(Binary::Atan2, a, b) => write!(f, "atan2({a}, {b})"),
            Node::Binary(op, a, b) => {
                let sym = match op {
                    Binary::Add => "+",
                    Binary::Mul => "*",
                    Binary::Div => "/",
                    Binary::Pow => "^",
                    Binary::Atan2 => unreachable!(),
                };
                write!(f, "({a} {sym} {b})")
            }
        }
    }
}

/// Poisson bracket `[f, g] = f_x g_y - g_x f_y`.
pub fn bracket(f: &Expr, g: &Expr) -> Expr {
    let fx = f.diff(Var::X, 1);
    let fy = f.diff(Var::Y, 1);
    let gx = g.diff(Var::X, 1);
    let gy = g.diff(Var::Y, 1);
    fx * gy - gx * fy
}

/// Planar Laplacian `f_xx + f_yy`.
pub fn laplacian(f: &Expr) -> Expr {
    f.diff(Var::X, 2) + f.diff(Var::Y, 2)
}

/// Rotation generator applied to `f`: `y f_x - x f_y`.
pub fn rotation_derivative(f: &Expr) -> Expr {
    Expr::y() * f.diff(Var::X, 1) - Expr::x() * f.diff(Var::Y, 1)
}

#[cfg(test)]
mod tests;
