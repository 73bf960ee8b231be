use std::f64::consts::PI;

use crate::symcore::{Bindings, EvalError, Expr, FuncBinding, Tape};

/// A region of `(x, y, t)` on which a pair is singular or discontinuous.
#[derive(Clone, Debug)]
pub enum Exclusion {
    /// Disk `r < radius` around the origin.
    Origin { radius: f64 },
    /// Band `π - |θ| < guard` around the branch cut of `atan2(y, x)`.
    AngleCut { guard: f64 },
    /// Slab `|t| < min`.
    SmallTime { min: f64 },
    /// Pre-image of `inner` under the coordinate map `(x, y, t) ↦ (x', y', t')`.
    Mapped {
        x: Expr,
        y: Expr,
        t: Expr,
        inner: Box<Exclusion>,
    },
}

impl Exclusion {
    /// Default exclusions of anything built from `atan2(y, x)`.
    pub fn polar() -> Vec<Exclusion> {
        vec![Exclusion::Origin { radius: 0.05 }, Exclusion::AngleCut { guard: 0.05 }]
    }

    /// `guard` widens every region by that much (radius, angle or time).
    pub fn contains(&self, p: [f64; 3], bindings: &Bindings, guard: f64) -> Result<bool, EvalError> {
        Ok(match self {
            Exclusion::Origin { radius } => p[0].hypot(p[1]) < radius + guard,
            Exclusion::AngleCut { guard: band } => PI - p[1].atan2(p[0]).abs() < band + guard,
            Exclusion::SmallTime { min } => p[2].abs() < min + guard,
            Exclusion::Mapped { x, y, t, inner } => {
                let tape = Tape::compile(&[x.clone(), y.clone(), t.clone()], bindings)?;
                let q = tape.eval(p);
                if q.iter().any(|v| !v.is_finite()) {
                    return Ok(true);
                }
                inner.contains([q[0], q[1], q[2]], bindings, guard)?
            }
        })
    }

    /// Pulls this region back through a coordinate map.
    pub fn mapped(&self, x: &Expr, y: &Expr, t: &Expr) -> Exclusion {
        Exclusion::Mapped {
            x: x.clone(),
            y: y.clone(),
            t: t.clone(),
            inner: Box::new(self.clone()),
        }
    }
}

/// Decomposition `ψ = α₁ + Z₁`, `φ = α₂ + Z₂` of an invariant solution into a
/// fixed part and a part ranging over a linear space.
#[derive(Clone, Debug)]
pub struct InvariantParts {
    pub generator: String,
    pub fixed_psi: Expr,
    pub fixed_phi: Expr,
}

/// Candidate solution `(ψ, φ)` of the two-field system.
#[derive(Clone, Debug)]
pub struct SolutionPair {
    pub name: String,
    pub psi: Expr,
    pub phi: Expr,
    pub bindings: Bindings,
    pub exclusions: Vec<Exclusion>,
    pub invariant: Option<InvariantParts>,
}

impl SolutionPair {
    pub fn new(name: &str, psi: Expr, phi: Expr) -> Self {
        SolutionPair {
            name: name.to_string(),
            psi,
            phi,
            bindings: Bindings::new(),
            exclusions: Vec::new(),
            invariant: None,
        }
    }

    pub fn zero() -> Self {
        SolutionPair::new("zero", Expr::zero(), Expr::zero())
    }

    pub fn with_func(mut self, f: FuncBinding) -> Self {
        self.bindings.bind(f);
        self
    }

    pub fn with_param(mut self, name: &str, value: f64) -> Self {
        self.bindings.set_param(name, value);
        self
    }

    pub fn with_exclusions(mut self, ex: impl IntoIterator<Item = Exclusion>) -> Self {
        self.exclusions.extend(ex);
        self
    }

    pub fn with_invariant(mut self, parts: InvariantParts) -> Self {
        self.invariant = Some(parts);
        self
    }

    pub fn renamed(mut self, name: &str) -> Self {
        self.name = name.to_string();
        self
    }

    /// Same bindings and exclusions, new field expressions. Invariant
    /// metadata is dropped.
    pub fn with_fields(&self, name: &str, psi: Expr, phi: Expr) -> Self {
        SolutionPair {
            name: name.to_string(),
            psi,
            phi,
            bindings: self.bindings.clone(),
            exclusions: self.exclusions.clone(),
            invariant: None,
        }
    }

    pub fn is_excluded(&self, p: [f64; 3], guard: f64) -> Result<bool, EvalError> {
        for ex in &self.exclusions {
            if ex.contains(p, &self.bindings, guard)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// `(ψ, φ)` at a point.
    pub fn eval(&self, p: [f64; 3]) -> Result<(f64, f64), EvalError> {
        let tape = Tape::compile(&[self.psi.clone(), self.phi.clone()], &self.bindings)?;
        let v = tape.eval(p);
        Ok((v[0], v[1]))
    }

    /// A binding name not yet used by this pair, derived from `stem`.
    pub fn fresh_func_name(&self, stem: &str) -> String {
        if !self.bindings.has_func(stem) {
            return stem.to_string();
        }
        (1..)
            .map(|i| format!("{stem}{i}"))
            .find(|n| !self.bindings.has_func(n))
            .expect("unbounded search")
    }
}
