use std::collections::HashMap;

use super::{Binary, Expr, FieldVar, Node, Unary, Var};

#[derive(Clone, Copy)]
enum Wrt<'a> {
    Var(Var),
    Param(&'a str),
}

struct Differ<'a> {
    wrt: Wrt<'a>,
    memo: HashMap<*const Node, Expr>,
}

impl Differ<'_> {
    fn d(&mut self, e: &Expr) -> Expr {
        if let Some(done) = self.memo.get(&e.ptr()) {
            return done.clone();
        }
        let out = match e.node() {
            Node::Const(_) => Expr::zero(),
            Node::Var(v) => match self.wrt {
                Wrt::Var(w) if w == *v => Expr::one(),
                _ => Expr::zero(),
            },
            Node::Param(p) => match self.wrt {
                Wrt::Param(name) if name == &**p => Expr::one(),
                _ => Expr::zero(),
            },
            Node::Func { name, args, orders } => {
                let mut total = Expr::zero();
                for (i, arg) in args.iter().enumerate() {
                    let da = self.d(arg);
                    if da.is_zero() {
                        continue;
                    }
                    let mut raised = orders.clone();
                    raised[i] += 1;
                    total = total + Expr::func_derivative(name, args.clone(), raised) * da;
                }
                total
            }
            Node::Jet { field, orders } => match self.wrt {
                Wrt::Var(v) => {
                    let mut raised = *orders;
                    raised[v.index()] += 1;
                    Expr::jet(*field, raised)
                }
                Wrt::Param(_) => Expr::zero(),
            },
            Node::Unary(op, a) => {
                let da = self.d(a);
                if da.is_zero() {
                    Expr::zero()
                } else {
                    match op {
                        Unary::Neg => -da,
                        Unary::Sin => a.cos() * da,
                        Unary::Cos => -(a.sin() * da),
                        Unary::Exp => e.clone() * da,
                        Unary::Ln => da / a,
                        Unary::Sqrt => da / (2.0 * e.clone()),
                    }
                }
            }
            Node::Binary(op, a, b) => {
                let da = self.d(a);
                let db = self.d(b);
                match op {
                    Binary::Add => da + db,
                    Binary::Mul => da * b + a * db,
                    Binary::Div => da / b - a * db / b.square(),
                    Binary::Pow => {
                        if let Some(c) = b.as_const() {
                            c * a.powf(c - 1.0) * da
                        } else {
                            e.clone() * (db * a.ln() + b * da / a)
                        }
                    }
                    // d atan2(u, v) = (v du - u dv) / (u² + v²)
                    Binary::Atan2 => {
                        if da.is_zero() && db.is_zero() {
                            Expr::zero()
                        } else {
                            (b * da - a * db) / (a.square() + b.square())
                        }
                    }
                }
            }
        };
        self.memo.insert(e.ptr(), out.clone());
        out
    }
}

impl Expr {
    /// Exact `n`-th partial derivative with respect to `v`.
    pub fn diff(&self, v: Var, n: u32) -> Expr {
        let mut out = self.clone();
        for _ in 0..n {
            out = Differ {
                wrt: Wrt::Var(v),
                memo: HashMap::new(),
            }
            .d(&out);
        }
        out
    }

    /// Mixed partial derivative `∂x^a ∂y^b ∂t^c`.
    pub fn diff_multi(&self, orders: [u32; 3]) -> Expr {
        Var::ALL
            .iter()
            .zip(orders)
            .fold(self.clone(), |e, (&v, n)| e.diff(v, n))
    }

    /// Exact derivative with respect to a named parameter.
    pub fn diff_param(&self, name: &str) -> Expr {
        Differ {
            wrt: Wrt::Param(name),
            memo: HashMap::new(),
        }
        .d(self)
    }

    /// Bottom-up rewrite. `f` may replace a node outright; otherwise the node
    /// is rebuilt from its rewritten children through the folding builders.
    pub fn rewrite(&self, f: &mut dyn FnMut(&Node) -> Option<Expr>) -> Expr {
        let mut memo = HashMap::new();
        rewrite_rec(self, f, &mut memo)
    }

    /// Replaces `x`, `y`, `t` by the given expressions simultaneously.
    pub fn substitute_vars(&self, x: &Expr, y: &Expr, t: &Expr) -> Expr {
        self.rewrite(&mut |n| match n {
            Node::Var(Var::X) => Some(x.clone()),
            Node::Var(Var::Y) => Some(y.clone()),
            Node::Var(Var::T) => Some(t.clone()),
            Node::Jet { .. } => panic!("cannot change coordinates under a formal jet coordinate"),
            _ => None,
        })
    }

    /// Replaces every jet coordinate `∂^α ψ`, `∂^α φ` by the corresponding
    /// derivative of the given fields.
    pub fn substitute_jets(&self, psi: &Expr, phi: &Expr) -> Expr {
        let mut cache: HashMap<(FieldVar, [u32; 3]), Expr> = HashMap::new();
        self.rewrite(&mut |n| match n {
            Node::Jet { field, orders } => Some(
                cache
                    .entry((*field, *orders))
                    .or_insert_with(|| match field {
                        FieldVar::Psi => psi.diff_multi(*orders),
                        FieldVar::Phi => phi.diff_multi(*orders),
                    })
                    .clone(),
            ),
            _ => None,
        })
    }

    /// Renames opaque functions, including inside the arguments of other
    /// function applications. `map` returns `None` to keep a name.
    pub fn rename_funcs(&self, map: &dyn Fn(&str) -> Option<String>) -> Expr {
        rename_rec(self, map, &mut HashMap::new())
    }

    /// Replaces a named parameter by an expression.
    pub fn substitute_param(&self, name: &str, value: &Expr) -> Expr {
        self.rewrite(&mut |n| match n {
            Node::Param(p) if &**p == name => Some(value.clone()),
            _ => None,
        })
    }
}

fn rename_rec(e: &Expr, map: &dyn Fn(&str) -> Option<String>, memo: &mut HashMap<*const Node, Expr>) -> Expr {
    if let Some(done) = memo.get(&e.ptr()) {
        return done.clone();
    }
    let out = match e.node() {
        Node::Const(_) | Node::Var(_) | Node::Param(_) | Node::Jet { .. } => e.clone(),
        Node::Func { name, args, orders } => {
            let args = args.iter().map(|a| rename_rec(a, map, memo)).collect();
            let name = map(name).unwrap_or_else(|| name.to_string());
            Expr::func_derivative(&name, args, orders.clone())
        }
        Node::Unary(op, a) => Expr::raw_unary(*op, rename_rec(a, map, memo)),
        Node::Binary(op, a, b) => Expr::raw_binary(*op, rename_rec(a, map, memo), rename_rec(b, map, memo)),
    };
    memo.insert(e.ptr(), out.clone());
    out
}

fn rewrite_rec(e: &Expr, f: &mut dyn FnMut(&Node) -> Option<Expr>, memo: &mut HashMap<*const Node, Expr>) -> Expr {
    if let Some(done) = memo.get(&e.ptr()) {
        return done.clone();
    }
    let out = match f(e.node()) {
        Some(replaced) => replaced,
        None => match e.node() {
            Node::Const(_) | Node::Var(_) | Node::Param(_) | Node::Jet { .. } => e.clone(),
            Node::Func { name, args, orders } => {
                let args = args.iter().map(|a| rewrite_rec(a, f, memo)).collect();
                Expr::func_derivative(name, args, orders.clone())
            }
            Node::Unary(op, a) => Expr::unary(*op, rewrite_rec(a, f, memo)),
            Node::Binary(op, a, b) => {
                let a = rewrite_rec(a, f, memo);
                let b = rewrite_rec(b, f, memo);
                Expr::binary(*op, a, b)
            }
        },
    };
    memo.insert(e.ptr(), out.clone());
    out
}
