use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use super::{Binary, Expr, FuncBinding, Node, Unary};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("unbound parameter `{0}`")]
    UnboundParam(String),
    #[error("unbound function `{0}`")]
    UnboundFunc(String),
    #[error("function `{name}` needs derivative order {order} but is bound only up to order {max}")]
    UnboundOrder { name: String, order: u32, max: u32 },
    #[error("function `{name}` applied to {got} arguments, binding takes {expected}")]
    Arity { name: String, expected: usize, got: usize },
    #[error("expression still contains formal field coordinates")]
    UnresolvedJet,
    #[error("binding conflict: `{0}` is already bound to a different value")]
    Conflict(String),
}

/// Numeric values for the parameters and opaque functions of an expression.
#[derive(Clone, Default)]
pub struct Bindings {
    params: BTreeMap<String, f64>,
    funcs: BTreeMap<String, FuncBinding>,
}

impl std::fmt::Debug for Bindings {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Bindings")
            .field("params", &self.params)
            .field("funcs", &self.funcs.keys().collect::<Vec<_>>())
            .finish()
    }
}

impl Bindings {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_param(mut self, name: &str, value: f64) -> Self {
        self.set_param(name, value);
        self
    }

    pub fn with_func(mut self, f: FuncBinding) -> Self {
        self.bind(f);
        self
    }

    pub fn set_param(&mut self, name: &str, value: f64) {
        self.params.insert(name.to_string(), value);
    }

    /// Binds (or rebinds) a function under its own name.
    pub fn bind(&mut self, f: FuncBinding) {
        self.funcs.insert(f.name().to_string(), f);
    }

    pub fn param(&self, name: &str) -> Option<f64> {
        self.params.get(name).copied()
    }

    pub fn func(&self, name: &str) -> Option<&FuncBinding> {
        self.funcs.get(name)
    }

    pub fn has_func(&self, name: &str) -> bool {
        self.funcs.contains_key(name)
    }

    pub fn params(&self) -> impl Iterator<Item = (&str, f64)> {
        self.params.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn funcs(&self) -> impl Iterator<Item = &FuncBinding> {
        self.funcs.values()
    }

    /// Union of two binding sets. Identical entries are shared; a name bound
    /// to two different values is an error.
    pub fn merged(&self, other: &Bindings) -> Result<Bindings, EvalError> {
        let mut out = self.clone();
        for (k, v) in &other.params {
            match out.params.get(k) {
                Some(old) if old.to_bits() != v.to_bits() => return Err(EvalError::Conflict(k.clone())),
                _ => {
                    out.params.insert(k.clone(), *v);
                }
            }
        }
        for (k, f) in &other.funcs {
            match out.funcs.get(k) {
                Some(old) if !old.same_as(f) => return Err(EvalError::Conflict(k.clone())),
                _ => {
                    out.funcs.insert(k.clone(), f.clone());
                }
            }
        }
        Ok(out)
    }
}

#[derive(Clone, Debug)]
enum Op {
    Const(f64),
    Var(usize),
    Func {
        binding: usize,
        args: Vec<usize>,
        orders: Vec<u32>,
    },
    Unary(Unary, usize),
    Binary(Binary, usize, usize),
}

#[derive(Hash, PartialEq, Eq)]
enum Key {
    Const(u64),
    Var(usize),
    Func(usize, Vec<usize>, Vec<u32>),
    Unary(Unary, usize),
    Binary(Binary, usize, usize),
}

/// Straight-line program evaluating one or more expressions at a point.
///
/// Shared subtrees (by pointer and by structure) are evaluated once.
#[derive(Clone, Debug)]
pub struct Tape {
    ops: Vec<Op>,
    roots: Vec<usize>,
    funcs: Vec<FuncBinding>,
}

struct Compiler<'a> {
    bindings: &'a Bindings,
    ops: Vec<Op>,
    by_ptr: HashMap<*const Node, usize>,
    by_key: HashMap<Key, usize>,
    funcs: Vec<FuncBinding>,
    func_index: HashMap<String, usize>,
}

impl Compiler<'_> {
    fn push(&mut self, key: Key, op: Op) -> usize {
        if let Some(&i) = self.by_key.get(&key) {
            return i;
        }
        let i = self.ops.len();
        self.ops.push(op);
        self.by_key.insert(key, i);
        i
    }

    fn compile(&mut self, e: &Expr) -> Result<usize, EvalError> {
        if let Some(&i) = self.by_ptr.get(&e.ptr()) {
            return Ok(i);
        }
        let i = match e.node() {
            Node::Const(c) => self.push(Key::Const(c.to_bits()), Op::Const(*c)),
            Node::Var(v) => self.push(Key::Var(v.index()), Op::Var(v.index())),
            Node::Param(p) => {
                let c = self
                    .bindings
                    .param(p)
                    .ok_or_else(|| EvalError::UnboundParam(p.to_string()))?;
                self.push(Key::Const(c.to_bits()), Op::Const(c))
            }
            Node::Func { name, args, orders } => {
                let binding = self
                    .bindings
                    .func(name)
                    .ok_or_else(|| EvalError::UnboundFunc(name.to_string()))?;
                if binding.arity() != args.len() {
                    return Err(EvalError::Arity {
                        name: name.to_string(),
                        expected: binding.arity(),
                        got: args.len(),
                    });
                }
                let order: u32 = orders.iter().sum();
                if order > binding.max_order() {
                    return Err(EvalError::UnboundOrder {
                        name: name.to_string(),
                        order,
                        max: binding.max_order(),
                    });
                }
                let b = match self.func_index.get(&**name) {
                    Some(&b) => b,
                    None => {
                        self.funcs.push(binding.clone());
                        self.func_index.insert(name.to_string(), self.funcs.len() - 1);
                        self.funcs.len() - 1
                    }
                };
                let arg_ids = args.iter().map(|a| self.compile(a)).collect::<Result<Vec<_>, _>>()?;
                self.push(
                    Key::Func(b, arg_ids.clone(), orders.clone()),
                    Op::Func {
                        binding: b,
                        args: arg_ids,
                        orders: orders.clone(),
                    },
                )
            }
            Node::Jet { .. } => return Err(EvalError::UnresolvedJet),
            Node::Unary(op, a) => {
                let a = self.compile(a)?;
                self.push(Key::Unary(*op, a), Op::Unary(*op, a))
            }
            Node::Binary(op, a, b) => {
                let a = self.compile(a)?;
                let b = self.compile(b)?;
                self.push(Key::Binary(*op, a, b), Op::Binary(*op, a, b))
            }
        };
        self.by_ptr.insert(e.ptr(), i);
        Ok(i)
    }
}

pub(crate) fn apply_unary(op: Unary, a: f64) -> f64 {
    match op {
        Unary::Neg => -a,
        Unary::Sin => a.sin(),
        Unary::Cos => a.cos(),
        Unary::Exp => a.exp(),
        Unary::Ln => a.ln(),
        Unary::Sqrt => a.sqrt(),
    }
}

pub(crate) fn apply_binary(op: Binary, a: f64, b: f64) -> f64 {
    match op {
        Binary::Add => a + b,
        Binary::Mul => a * b,
        Binary::Div => a / b,
        Binary::Pow => {
            if b == b.trunc() && b.abs() <= 64.0 {
                a.powi(b as i32)
            } else {
                a.powf(b)
            }
        }
        Binary::Atan2 => a.atan2(b),
    }
}

impl Tape {
    pub fn compile(exprs: &[Expr], bindings: &Bindings) -> Result<Tape, EvalError> {
        let mut c = Compiler {
            bindings,
            ops: Vec::new(),
            by_ptr: HashMap::new(),
            by_key: HashMap::new(),
            funcs: Vec::new(),
            func_index: HashMap::new(),
        };
        let roots = exprs.iter().map(|e| c.compile(e)).collect::<Result<Vec<_>, _>>()?;
        Ok(Tape {
            ops: c.ops,
            roots,
            funcs: c.funcs,
        })
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn outputs(&self) -> usize {
        self.roots.len()
    }

    /// Evaluates all roots at `point = [x, y, t]`.
    pub fn eval(&self, point: [f64; 3]) -> Vec<f64> {
        let mut scratch = Vec::with_capacity(self.ops.len());
        let mut out = vec![0.0; self.roots.len()];
        self.eval_into(point, &mut scratch, &mut out);
        out
    }

    pub fn eval_into(&self, point: [f64; 3], scratch: &mut Vec<f64>, out: &mut [f64]) {
        scratch.clear();
        let mut argbuf = [0.0f64; 4];
        for op in &self.ops {
            let v = match op {
                Op::Const(c) => *c,
                Op::Var(i) => point[*i],
                Op::Func { binding, args, orders } => {
                    for (slot, &a) in argbuf.iter_mut().zip(args) {
                        *slot = scratch[a];
                    }
                    self.funcs[*binding].call(&argbuf[..args.len()], orders)
                }
                Op::Unary(u, a) => apply_unary(*u, scratch[*a]),
                Op::Binary(b, l, r) => apply_binary(*b, scratch[*l], scratch[*r]),
            };
            scratch.push(v);
        }
        for (o, &r) in out.iter_mut().zip(&self.roots) {
            *o = scratch[r];
        }
    }
}

impl Expr {
    /// Evaluates at `point = [x, y, t]`. Non-finite results are returned as-is.
    pub fn eval(&self, point: [f64; 3], bindings: &Bindings) -> Result<f64, EvalError> {
        Ok(Tape::compile(std::slice::from_ref(self), bindings)?.eval(point)[0])
    }

    /// Evaluates an expression without parameters or opaque functions.
    pub fn eval_closed(&self, point: [f64; 3]) -> Result<f64, EvalError> {
        self.eval(point, &Bindings::new())
    }
}
