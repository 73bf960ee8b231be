//! Closed-form solutions and solution families of the two-field system.
//!
//! Every entry of [`entries`] builds a [`SolutionPair`] from numeric
//! parameters and optional function overrides, together with the residual
//! forms it is expected to satisfy.

mod builders;

pub use builders::{
    ab_spiral, ab_traveling, ab_trig, conditional_family, static_pair, x1_invariant, x2_invariant, xab_example,
    Conditional, ConditionalParams, T_WINDOW,
};

use std::collections::BTreeMap;

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::liesym::{builtin, Builtin, Generator, LieError};
use crate::model::{Form, SolutionPair};
use crate::reduced::power_exponent;
use crate::symcore::{EvalError, Expr, FuncBinding, Var};

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("unknown catalog entry `{0}`")]
    UnknownId(String),
    #[error("entry `{id}` has no parameter `{name}`")]
    UnknownParam { id: String, name: String },
    #[error("parameter `{name}` = {value} outside [{min}, {max}]")]
    OutOfRange {
        name: String,
        value: f64,
        min: f64,
        max: f64,
    },
    #[error("parameter `{name}` must be +1 or -1, got {value}")]
    NotASign { name: String, value: f64 },
    #[error("cannot parse parameter `{0}`; expected name=number")]
    BadValue(String),
    #[error("function `{name}`: {reason}")]
    BadFunc { name: String, reason: String },
    #[error("degenerate frame: {0}")]
    Degenerate(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Generator(#[from] LieError),
}

/// One numeric parameter of an entry.
#[derive(Clone, Debug, Serialize)]
pub struct ParamSpec {
    pub name: &'static str,
    pub default: f64,
    pub min: f64,
    pub max: f64,
    /// Only `+1` and `-1` are valid.
    pub sign: bool,
    pub doc: &'static str,
}

const fn real(name: &'static str, default: f64, min: f64, max: f64, doc: &'static str) -> ParamSpec {
    ParamSpec {
        name,
        default,
        min,
        max,
        sign: false,
        doc,
    }
}

const fn sign(name: &'static str, doc: &'static str) -> ParamSpec {
    ParamSpec {
        name,
        default: 1.0,
        min: -1.0,
        max: 1.0,
        sign: true,
        doc,
    }
}

/// A replaceable function of an entry.
#[derive(Clone, Debug, Serialize)]
pub struct FuncSpec {
    pub name: &'static str,
    pub args: &'static str,
    pub default: &'static str,
}

/// Parameter values and function overrides for [`CatalogEntry::build`].
#[derive(Clone, Debug, Default)]
pub struct Params {
    pub values: BTreeMap<String, f64>,
    pub funcs: Vec<FuncBinding>,
}

impl Params {
    pub fn new() -> Self {
        Params::default()
    }

    pub fn set(mut self, name: &str, value: f64) -> Self {
        self.values.insert(name.to_string(), value);
        self
    }

    pub fn func(mut self, f: FuncBinding) -> Self {
        self.funcs.retain(|g| g.name() != f.name());
        self.funcs.push(f);
        self
    }

    /// Parses `k=v,k=v`.
    pub fn parse(text: &str) -> Result<Params, CatalogError> {
        let mut p = Params::new();
        for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| CatalogError::BadValue(item.to_string()))?;
            let value = v
                .trim()
                .parse::<f64>()
                .map_err(|_| CatalogError::BadValue(item.to_string()))?;
            p.values.insert(k.trim().to_string(), value);
        }
        Ok(p)
    }
}

/// Output of a catalog build.
#[derive(Clone, Debug)]
pub struct Built {
    pub pair: SolutionPair,
    /// Residual forms the pair satisfies; the first one is the full system.
    pub forms: Vec<Form>,
    /// Generator the pair is invariant under, if any.
    pub invariant: Option<Generator>,
}

type Builder = fn(&Resolved) -> Result<Built, CatalogError>;

pub struct CatalogEntry {
    pub id: &'static str,
    pub params: Vec<ParamSpec>,
    pub funcs: Vec<FuncSpec>,
    pub provenance: &'static str,
    builder: Builder,
}

impl std::fmt::Debug for CatalogEntry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CatalogEntry").field("id", &self.id).finish()
    }
}

/// Validated parameters with defaults filled in.
pub struct Resolved {
    values: BTreeMap<&'static str, f64>,
    funcs: Vec<FuncBinding>,
}

impl Resolved {
    pub fn get(&self, name: &str) -> f64 {
        self.values[name]
    }

    fn func_or(&self, name: &str, default: impl FnOnce() -> FuncBinding) -> FuncBinding {
        self.funcs
            .iter()
            .find(|f| f.name() == name)
            .cloned()
            .unwrap_or_else(default)
    }
}

/// JSON-friendly description of an entry.
#[derive(Clone, Debug, Serialize)]
pub struct EntryInfo {
    pub id: &'static str,
    pub params: Vec<ParamSpec>,
    pub funcs: Vec<FuncSpec>,
    pub provenance: &'static str,
}

impl CatalogEntry {
    pub fn info(&self) -> EntryInfo {
        EntryInfo {
            id: self.id,
            params: self.params.clone(),
            funcs: self.funcs.clone(),
            provenance: self.provenance,
        }
    }

    pub fn resolve(&self, p: &Params) -> Result<Resolved, CatalogError> {
        for name in p.values.keys() {
            if !self.params.iter().any(|s| s.name == name) {
                return Err(CatalogError::UnknownParam {
                    id: self.id.to_string(),
                    name: name.clone(),
                });
            }
        }
        for f in &p.funcs {
            if !self.funcs.iter().any(|s| s.name == f.name()) {
                return Err(CatalogError::UnknownParam {
                    id: self.id.to_string(),
                    name: f.name().to_string(),
                });
            }
        }
        let mut values = BTreeMap::new();
        for s in &self.params {
            let v = p.values.get(s.name).copied().unwrap_or(s.default);
            if s.sign {
                if v != 1.0 && v != -1.0 {
                    return Err(CatalogError::NotASign {
                        name: s.name.to_string(),
                        value: v,
                    });
                }
            } else if !(v >= s.min && v <= s.max) {
                return Err(CatalogError::OutOfRange {
                    name: s.name.to_string(),
                    value: v,
                    min: s.min,
                    max: s.max,
                });
            }
            values.insert(s.name, v);
        }
        Ok(Resolved {
            values,
            funcs: p.funcs.clone(),
        })
    }

    pub fn build(&self, p: &Params) -> Result<Built, CatalogError> {
        let r = self.resolve(p)?;
        let mut built = (self.builder)(&r)?;
        built.pair.name = self.id.to_string();
        Ok(built)
    }

    pub fn build_default(&self) -> Result<Built, CatalogError> {
        self.build(&Params::new())
    }

    /// Uniform draw inside the schema; signs are drawn from `{-1, +1}`.
    pub fn random_params<R: Rng>(&self, rng: &mut R) -> Params {
        let mut p = Params::new();
        for s in &self.params {
            let v = if s.sign {
                if rng.gen_bool(0.5) {
                    1.0
                } else {
                    -1.0
                }
            } else if s.max > s.min {
                rng.gen_range(s.min..=s.max)
            } else {
                s.min
            };
            p.values.insert(s.name.to_string(), v);
        }
        p
    }
}

fn time_fn(name: &str, e: Expr) -> FuncBinding {
    FuncBinding::of_time(name, &e, 6).expect("closed-form time function compiles")
}

fn st_fn(name: &str, e: Expr) -> FuncBinding {
    FuncBinding::from_expr(name, &[Var::X, Var::T], &e, 5).expect("closed-form profile compiles")
}

fn eu(pair: SolutionPair) -> Built {
    Built {
        pair,
        forms: vec![Form::Eu],
        invariant: None,
    }
}

fn x1_built(r: &Resolved, a: FuncBinding, b: FuncBinding) -> Result<Built, CatalogError> {
    let a = r.func_or("A", || a);
    let b = r.func_or("B", || b);
    let v = r.func_or("V", || st_fn("V", Expr::x()));
    let w = r.funcs.iter().find(|f| f.name() == "W");
    let pair = x1_invariant(&v, w, &a, &b)?;
    Ok(Built {
        pair,
        forms: vec![Form::Eu],
        invariant: Some(builtin(Builtin::X1(a, b))?),
    })
}

fn x2_built(q: Option<FuncBinding>, rf: Option<FuncBinding>) -> Result<Built, CatalogError> {
    Ok(Built {
        pair: x2_invariant(q.as_ref(), rf.as_ref())?,
        forms: vec![Form::Eu],
        invariant: Some(builtin(Builtin::X2)?),
    })
}

fn conditional(r: &Resolved, family: Conditional) -> Result<Built, CatalogError> {
    let get = |n: &str| r.values.get(n).copied();
    let p = ConditionalParams {
        k: get("k").unwrap_or(1.0),
        kappa: get("kappa").unwrap_or(0.5),
        s1: get("s1").unwrap_or(1.0),
        s2: get("s2").unwrap_or(1.0),
        phase: get("phase").unwrap_or(0.0),
        offset: get("offset").unwrap_or(0.0),
    };
    let gamma = r.func_or("gamma", || time_fn("gamma", Expr::t().sin()));
    let big_t = r.func_or("T", || time_fn("T", Expr::t().cos()));
    let t1 = r.func_or("T1", || time_fn("T1", Expr::t().square()));
    Ok(eu(conditional_family(family, &p, &gamma, &big_t, &t1)?))
}

const GAMMA_T: [FuncSpec; 2] = [
    FuncSpec {
        name: "gamma",
        args: "t",
        default: "sin t",
    },
    FuncSpec {
        name: "T",
        args: "t",
        default: "cos t",
    },
];

/// All catalog entries.
pub fn entries() -> Vec<CatalogEntry> {
    let x1_funcs = |a: &'static str, b: &'static str| {
        vec![
            FuncSpec {
                name: "A",
                args: "t",
                default: a,
            },
            FuncSpec {
                name: "B",
                args: "t",
                default: b,
            },
            FuncSpec {
                name: "V",
                args: "s,t",
                default: "s",
            },
            FuncSpec {
                name: "W",
                args: "s,t",
                default: "0",
            },
        ]
    };
    vec![
        CatalogEntry {
            id: "x1_uniform",
            params: vec![real("A0", 1.0, 0.2, 2.0, "amplitude"), sign("sign", "B = sign * A")],
            funcs: x1_funcs("A0 e^t", "sign A0 e^t"),
            provenance: "moving-frame invariant solution, uniform magnetic field with exponential growth in a hyperbolic flow",
            builder: |r| {
                let (a0, s) = (r.get("A0"), r.get("sign"));
                x1_built(r, time_fn("A", a0 * Expr::t().exp()), time_fn("B", s * a0 * Expr::t().exp()))
            },
        },
        CatalogEntry {
            id: "x1_rotating",
            params: vec![real("A0", 1.0, 0.2, 2.0, "amplitude"), real("omega", 1.0, -3.0, 3.0, "rotation frequency")],
            funcs: x1_funcs("A0 cos(omega t)", "A0 sin(omega t)"),
            provenance: "moving-frame invariant solution, magnetic field rotating at omega in a flow rotating at 2 omega",
            builder: |r| {
                let (a0, w) = (r.get("A0"), r.get("omega"));
                x1_built(
                    r,
                    time_fn("A", a0 * (w * Expr::t()).cos()),
                    time_fn("B", a0 * (w * Expr::t()).sin()),
                )
            },
        },
        CatalogEntry {
            id: "x2_spiral",
            params: vec![],
            funcs: vec![],
            provenance: "rotation-invariant solution with Q = R = 0: the bare spiral potential r^2 theta / (2t)",
            builder: |_| x2_built(None, None),
        },
        CatalogEntry {
            id: "x2_power_R",
            params: vec![
                real("b", 2.0, 0.5, 3.0, "radial exponent of R = t^a r^b, a = (b^2 - 2b - 4) / (2b)"),
                real("c", 1.0, -2.0, 2.0, "Q = c t r^2"),
            ],
            funcs: vec![],
            provenance: "rotation-invariant solution with power-law R and Q = c t r^2",
            builder: |r| {
                let (b, c) = (r.get("b"), r.get("c"));
                let a = power_exponent(b).map_err(|_| CatalogError::OutOfRange {
                    name: "b".into(),
                    value: b,
                    min: 0.5,
                    max: 3.0,
                })?;
                let (x, t) = (Expr::x(), Expr::t());
                let rf = st_fn("R", t.powf(a) * x.powf(b));
                let q = st_fn("Q", c * &t * x.square());
                x2_built(Some(q), Some(rf))
            },
        },
        CatalogEntry {
            id: "cond_sin_exp",
            params: vec![
                real("k", 1.0, -2.0, 2.0, "wave number"),
                sign("s1", "sign of the exponent"),
                real("phase", 0.0, -3.2, 3.2, "phase of the sine"),
                real("offset", 0.0, -2.0, 2.0, "constant added to psi"),
            ],
            funcs: GAMMA_T.to_vec(),
            provenance: "contact-generator invariant family: psi = sin(k(x - gamma)), phi = exp(s1 sqrt(1+k^2) y) - gamma' y + T",
            builder: |r| conditional(r, Conditional::SinExp),
        },
        CatalogEntry {
            id: "cond_exp_sin",
            params: vec![
                real("k", 1.0, -2.0, 2.0, "wave number"),
                sign("s1", "sign of the exponent"),
                real("phase", 0.0, -3.2, 3.2, "phase of the sine"),
                real("offset", 0.0, -2.0, 2.0, "constant added to psi"),
            ],
            funcs: GAMMA_T.to_vec(),
            provenance: "contact-generator invariant family: psi = exp(s1 sqrt(1+k^2)(x - gamma)), phi = sin(ky) - gamma' y + T",
            builder: |r| conditional(r, Conditional::ExpSin),
        },
        CatalogEntry {
            id: "cond_exp_exp_kappa",
            params: vec![
                real("kappa", 0.5, -0.95, 0.95, "|kappa| < 1"),
                sign("s1", "sign of the psi exponent"),
                sign("s2", "sign of the phi exponent"),
                real("offset", 0.0, -2.0, 2.0, "constant added to psi"),
            ],
            funcs: GAMMA_T.to_vec(),
            provenance: "contact-generator invariant family: psi = exp(s1 sqrt(1-kappa^2)(x - gamma)), phi = exp(s2 kappa y) - gamma' y + T",
            builder: |r| conditional(r, Conditional::ExpExpKappa),
        },
        CatalogEntry {
            id: "cond_exp_parab",
            params: vec![
                real("k", 1.0, -2.0, 2.0, "curvature of phi"),
                sign("s1", "sign of the exponent"),
                real("offset", 0.0, -2.0, 2.0, "constant added to psi"),
            ],
            funcs: vec![
                GAMMA_T[0].clone(),
                GAMMA_T[1].clone(),
                FuncSpec {
                    name: "T1",
                    args: "t",
                    default: "t^2",
                },
            ],
            provenance: "contact-generator invariant family: psi = gamma exp(s1 x), phi = k y^2 + y T1 + T",
            builder: |r| conditional(r, Conditional::ExpParab),
        },
        CatalogEntry {
            id: "cond_lin_exp",
            params: vec![
                real("k", 1.0, 0.2, 2.0, "slope of psi, nonzero"),
                sign("s1", "sign of the exponent"),
                real("offset", 0.0, -2.0, 2.0, "constant added to psi"),
            ],
            funcs: vec![GAMMA_T[0].clone()],
            provenance: "contact-generator invariant family: psi = gamma + k x, phi = exp(s1 y) + gamma' y / k",
            builder: |r| conditional(r, Conditional::LinExp),
        },
        CatalogEntry {
            id: "static_gauss",
            params: vec![],
            funcs: vec![],
            provenance: "static pair psi = exp(-x^2), phi = 1 / (1 + x^2) used as the seed of the rotating family",
            builder: |_| {
                let x = Expr::x();
                let f = FuncBinding::from_expr("f", &[Var::X], &(-(x.square())).exp(), 6)?;
                let g = FuncBinding::from_expr("g", &[Var::X], &(1.0 / (1.0 + x.square())), 6)?;
                Ok(eu(static_pair(&f, &g, Var::X)?))
            },
        },
        CatalogEntry {
            id: "static_equal",
            params: vec![sign("sign", "phi = sign * psi")],
            funcs: vec![],
            provenance: "static pair with phi = +-psi, the only scaling-invariant configuration",
            builder: |r| {
                let x = Expr::x();
                let prof = (-(x.square())).exp() * (2.0 * &x).cos();
                let f = FuncBinding::from_expr("f", &[Var::X], &prof, 6)?;
                let g = FuncBinding::from_expr("g", &[Var::X], &(r.get("sign") * prof), 6)?;
                Ok(eu(static_pair(&f, &g, Var::X)?))
            },
        },
        CatalogEntry {
            id: "xab_example",
            params: vec![],
            funcs: vec![],
            provenance: "psi = 3x^2 + y^2, phi = exp(-x); satisfies the Xab(a, 1) constraints",
            builder: |_| Ok(eu(xab_example())),
        },
        CatalogEntry {
            id: "ab_trig",
            params: vec![
                real("c1", 1.0, -2.0, 2.0, "amplitude of the x wave"),
                real("c2", 2.0, -2.0, 2.0, "amplitude of the y wave"),
                real("c3", 0.0, -2.0, 2.0, "offset"),
                real("k", 3.0, -3.0, 3.0, "wave number"),
            ],
            funcs: vec![],
            provenance: "elementary solution of the reduced first-order system, crossing sine waves in a uniform flow",
            builder: |r| {
                let (c1, c2, c3, k) = (r.get("c1"), r.get("c2"), r.get("c3"), r.get("k"));
                let a = FuncBinding::from_expr("A", &[Var::X], &(-k * k * (Expr::x() - c3)), 4)?;
                Ok(Built {
                    pair: ab_trig(c1, c2, c3, k),
                    forms: vec![
                        Form::Eu,
                        Form::Psys,
                        Form::Ab {
                            a: Some(a),
                            b: Some(FuncBinding::constant("B", 1, 0.0)),
                        },
                    ],
                    invariant: None,
                })
            },
        },
        CatalogEntry {
            id: "ab_spiral",
            params: vec![],
            funcs: vec![],
            provenance: "elementary solution of the reduced first-order system, psi = 2t - theta, phi = r^2",
            builder: |_| {
                Ok(Built {
                    pair: ab_spiral(),
                    forms: vec![
                        Form::Eu,
                        Form::Psys,
                        Form::Ab {
                            a: Some(FuncBinding::constant("A", 1, 0.0)),
                            b: Some(FuncBinding::constant("B", 1, 4.0)),
                        },
                    ],
                    invariant: None,
                })
            },
        },
        CatalogEntry {
            id: "ab_traveling",
            params: vec![],
            funcs: vec![FuncSpec {
                name: "Psi",
                args: "u",
                default: "tanh u",
            }],
            provenance: "elementary solution of the reduced first-order system, psi = Psi(y - t), phi = x",
            builder: |r| {
                let prof = r.func_or("Psi", || {
                    FuncBinding::from_expr("Psi", &[Var::X], &Expr::x().tanh(), 6).expect("tanh compiles")
                });
                Ok(Built {
                    pair: ab_traveling(&prof)?,
                    forms: vec![
                        Form::Eu,
                        Form::Trunc,
                        Form::Ab {
                            a: None,
                            b: Some(FuncBinding::constant("B", 1, 0.0)),
                        },
                    ],
                    invariant: None,
                })
            },
        },
    ]
}

pub fn ids() -> Vec<&'static str> {
    entries().iter().map(|e| e.id).collect()
}

pub fn lookup(id: &str) -> Result<CatalogEntry, CatalogError> {
    entries()
        .into_iter()
        .find(|e| e.id == id)
        .ok_or_else(|| CatalogError::UnknownId(id.to_string()))
}

/// Builds an entry with default parameters.
pub fn build(id: &str) -> Result<Built, CatalogError> {
    lookup(id)?.build_default()
}
