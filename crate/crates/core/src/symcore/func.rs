use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use super::{Bindings, EvalError, Expr, Tape, Var};

type EvalFn = dyn Fn(&[f64], &[u32]) -> f64 + Send + Sync;

/// Numeric realization of an opaque function and its partial derivatives.
///
/// The evaluator receives the argument values and a derivative multi-index
/// (one order per argument). Orders above `max_order` (total) are never
/// requested: compiling an expression that needs them fails.
#[derive(Clone)]
pub struct FuncBinding {
    name: Arc<str>,
    arity: usize,
    max_order: u32,
    f: Arc<EvalFn>,
}

impl fmt::Debug for FuncBinding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "FuncBinding({}/{}, order ≤ {})",
            self.name, self.arity, self.max_order
        )
    }
}

impl FuncBinding {
    pub const MAX_ARITY: usize = 4;

    pub fn new<F>(name: &str, arity: usize, max_order: u32, f: F) -> Self
    where
        F: Fn(&[f64], &[u32]) -> f64 + Send + Sync + 'static,
    {
        assert!((1..=Self::MAX_ARITY).contains(&arity), "arity must be in 1..=4");
        FuncBinding {
            name: Arc::from(name),
            arity,
            max_order,
            f: Arc::new(f),
        }
    }

    /// A function that is constant in all arguments; all derivatives vanish.
    pub fn constant(name: &str, arity: usize, value: f64) -> Self {
        FuncBinding::new(name, arity, u32::MAX, move |_, orders| {
            if orders.iter().all(|&o| o == 0) {
                value
            } else {
                0.0
            }
        })
    }

    /// Binds a closed-form expression. Argument `i` is fed into the variable
    /// `slots[i]`; every derivative of total order `≤ max_order` is
    /// differentiated symbolically and compiled up front.
    pub fn from_expr(name: &str, slots: &[Var], expr: &Expr, max_order: u32) -> Result<Self, EvalError> {
        let arity = slots.len();
        let mut tapes: HashMap<Vec<u32>, Tape> = HashMap::new();
        let mut frontier = vec![(vec![0u32; arity], expr.clone())];
        let empty = Bindings::new();
        while let Some((orders, e)) = frontier.pop() {
            if tapes.contains_key(&orders) {
                continue;
            }
            tapes.insert(orders.clone(), Tape::compile(std::slice::from_ref(&e), &empty)?);
            if orders.iter().sum::<u32>() < max_order {
                for (i, &v) in slots.iter().enumerate() {
                    let mut next = orders.clone();
                    next[i] += 1;
                    if !tapes.contains_key(&next) {
                        frontier.push((next, e.diff(v, 1)));
                    }
                }
            }
        }
        let slots = slots.to_vec();
        Ok(FuncBinding::new(name, arity, max_order, move |args, orders| {
            let mut point = [0.0; 3];
            for (v, &a) in slots.iter().zip(args) {
                point[v.index()] = a;
            }
            tapes[orders].eval(point)[0]
        }))
    }

    /// One-argument convenience over [`FuncBinding::from_expr`] with the
    /// argument fed into `t`.
    pub fn of_time(name: &str, expr: &Expr, max_order: u32) -> Result<Self, EvalError> {
        FuncBinding::from_expr(name, &[Var::T], expr, max_order)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn max_order(&self) -> u32 {
        self.max_order
    }

    /// Same evaluator under a different name.
    pub fn renamed(&self, name: &str) -> Self {
        FuncBinding {
            name: Arc::from(name),
            ..self.clone()
        }
    }

    /// Whether both bindings share the same evaluator and name.
    pub fn same_as(&self, other: &FuncBinding) -> bool {
        self.name == other.name && Arc::ptr_eq(&self.f, &other.f)
    }

    /// Value or derivative at `args`; `None` when the order is not bound.
    pub fn value(&self, args: &[f64], orders: &[u32]) -> Option<f64> {
        if args.len() != self.arity || orders.len() != self.arity {
            return None;
        }
        if orders.iter().sum::<u32>() > self.max_order {
            return None;
        }
        Some((self.f)(args, orders))
    }

    pub(crate) fn call(&self, args: &[f64], orders: &[u32]) -> f64 {
        (self.f)(args, orders)
    }

    /// Application of this function to argument expressions.
    pub fn apply(&self, args: Vec<Expr>) -> Expr {
        assert_eq!(args.len(), self.arity);
        Expr::func(&self.name, args)
    }
}
