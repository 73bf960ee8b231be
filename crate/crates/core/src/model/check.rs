use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::symcore::{Bindings, Expr, FuncBinding, Tape};

use super::forms::*;
use super::{ModelError, SolutionPair};

/// Which residual set to evaluate.
#[derive(Clone, Debug)]
pub enum Form {
    Eu,
    Div,
    Trunc,
    Psys,
    Pdp,
    /// Reduced first-order form; `Δψ - A(ψ)` and `Δφ - B(ψ)` are checked
    /// only for the functions supplied.
    Ab {
        a: Option<FuncBinding>,
        b: Option<FuncBinding>,
    },
}

impl Form {
    pub fn name(&self) -> &'static str {
        match self {
            Form::Eu => "EU",
            Form::Div => "DIV",
            Form::Trunc => "TRUNC",
            Form::Psys => "PSYS",
            Form::Pdp => "PDP",
            Form::Ab { .. } => "AB",
        }
    }

    pub fn residuals(&self, sp: &SolutionPair) -> Vec<Residual> {
        match self {
            Form::Eu => {
                let (r1, r2) = residual_eu(sp);
                vec![Residual::new("R1", r1), Residual::new("R2", r2)]
            }
            Form::Div => {
                let (d1, d2) = residual_div(sp);
                vec![Residual::new("D1", d1), Residual::new("D2", d2)]
            }
            Form::Trunc => {
                let (t1, t2) = residual_truncated(sp);
                vec![Residual::new("T1", t1), Residual::new("T2", t2)]
            }
            Form::Psys => {
                let (p1, p2, p3) = residual_psys(sp);
                vec![
                    Residual::new("P1", p1),
                    Residual::new("P2", p2),
                    Residual::new("P3", p3),
                ]
            }
            Form::Pdp => {
                let (c1, c2) = constraints_partial(sp);
                vec![Residual::new("psi_lap_psi", c1), Residual::new("psi_lap_phi", c2)]
            }
            Form::Ab { a, b } => {
                let (first, second, third) = residual_ab(sp, a.as_ref(), b.as_ref());
                let mut out = vec![Residual::new("AB1", first)];
                out.extend(second.map(|e| Residual::new("AB2", e)));
                out.extend(third.map(|e| Residual::new("AB3", e)));
                out
            }
        }
    }

    fn bindings(&self, sp: &SolutionPair) -> Result<Bindings, ModelError> {
        let mut b = sp.bindings.clone();
        if let Form::Ab { a, b: bf } = self {
            for f in a.iter().chain(bf) {
                b = b.merged(&Bindings::new().with_func(f.clone()))?;
            }
        }
        Ok(b)
    }
}

/// Seeded uniform sampling of a box in `(x, y, t)`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SamplePlan {
    pub x: [f64; 2],
    pub y: [f64; 2],
    pub t: [f64; 2],
    pub points: usize,
    pub seed: u64,
    /// Extra margin added to every exclusion region.
    pub guard: f64,
}

impl Default for SamplePlan {
    fn default() -> Self {
        SamplePlan {
            x: [-3.0, 3.0],
            y: [-3.0, 3.0],
            t: [0.1, 2.0],
            points: 200,
            seed: 0x5EED,
            guard: 0.0,
        }
    }
}

impl SamplePlan {
    pub fn with_points(mut self, n: usize) -> Self {
        self.points = n;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Draws the sample set, skipping points inside the pair's exclusions.
    pub fn draw(&self, sp: &SolutionPair) -> Result<Vec<[f64; 3]>, ModelError> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut out = Vec::with_capacity(self.points);
        let max_attempts = 1000 * self.points.max(1);
        for _ in 0..max_attempts {
            if out.len() == self.points {
                break;
            }
            let p = [draw(&mut rng, self.x), draw(&mut rng, self.y), draw(&mut rng, self.t)];
            if !sp.is_excluded(p, self.guard)? {
                out.push(p);
            }
        }
        if out.len() < self.points {
            return Err(ModelError::Sampling {
                wanted: self.points,
                got: out.len(),
            });
        }
        Ok(out)
    }
}

fn draw(rng: &mut ChaCha8Rng, range: [f64; 2]) -> f64 {
    if range[1] > range[0] {
        rng.gen_range(range[0]..range[1])
    } else {
        range[0]
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct EquationStats {
    pub name: String,
    /// Largest scaled residual `|R| / (1 + max |term|)`.
    pub linf: f64,
    /// Root mean square of the scaled residual.
    pub l2: f64,
    pub worst_point: [f64; 3],
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ResidualReport {
    pub form: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subject: Option<String>,
    pub samples: usize,
    pub tol: f64,
    pub equations: Vec<EquationStats>,
    pub pass: bool,
}

impl ResidualReport {
    /// Builds a report from per-equation statistics; `pass` iff every `linf`
    /// is within `tol`.
    pub fn from_stats(form: &str, samples: usize, tol: f64, equations: Vec<EquationStats>) -> Self {
        let pass = equations.iter().all(|e| e.linf <= tol);
        ResidualReport {
            form: form.to_string(),
            generator: None,
            subject: None,
            samples,
            tol,
            equations,
            pass,
        }
    }

    pub fn with_generator(mut self, g: &str) -> Self {
        self.generator = Some(g.to_string());
        self
    }

    pub fn with_subject(mut self, s: &str) -> Self {
        self.subject = Some(s.to_string());
        self
    }

    pub fn max_linf(&self) -> f64 {
        self.equations.iter().map(|e| e.linf).fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Evaluates residuals at the given points.
///
/// Each residual is split into its top-level summands; a point passes when
/// `|Σ terms| ≤ tol · (1 + max |term|)`.
pub fn evaluate(
    form: &str,
    residuals: &[Residual],
    bindings: &Bindings,
    points: &[[f64; 3]],
    tol: f64,
) -> Result<ResidualReport, ModelError> {
    let mut roots: Vec<Expr> = Vec::new();
    let mut spans = Vec::with_capacity(residuals.len());
    for r in residuals {
        let terms = r.expr.additive_terms();
        spans.push(roots.len()..roots.len() + terms.len());
        roots.extend(terms);
    }
    let tape = Tape::compile(&roots, bindings)?;

    let per_point = |p: &[f64; 3]| -> Result<Vec<f64>, ModelError> {
        let mut scratch = Vec::with_capacity(tape.len());
        let mut vals = vec![0.0; roots.len()];
        tape.eval_into(*p, &mut scratch, &mut vals);
        spans
            .iter()
            .zip(residuals)
            .map(|(span, r)| {
                let terms = &vals[span.clone()];
                let sum: f64 = terms.iter().sum();
                let scale = terms.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                if !sum.is_finite() || !scale.is_finite() {
                    return Err(ModelError::Singular {
                        equation: r.name.clone(),
                        point: *p,
                    });
                }
                Ok(sum.abs() / (1.0 + scale))
            })
            .collect()
    };

    #[cfg(feature = "parallel")]
    let scaled: Vec<Vec<f64>> = {
        use rayon::prelude::*;
        points.par_iter().map(per_point).collect::<Result<_, _>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let scaled: Vec<Vec<f64>> = points.iter().map(per_point).collect::<Result<_, _>>()?;

    let stats = residuals
        .iter()
        .enumerate()
        .map(|(k, r)| {
            let mut linf = 0.0;
            let mut worst = points.first().copied().unwrap_or([0.0; 3]);
            let mut sq = 0.0;
            for (p, v) in points.iter().zip(&scaled) {
                let s = v[k];
                sq += s * s;
                if s > linf {
                    linf = s;
                    worst = *p;
                }
            }
            EquationStats {
                name: r.name.clone(),
                linf,
                l2: if points.is_empty() {
                    0.0
                } else {
                    (sq / points.len() as f64).sqrt()
                },
                worst_point: worst,
            }
        })
        .collect();
    Ok(ResidualReport::from_stats(form, points.len(), tol, stats))
}

/// Evaluates the residual set `form` of `sp` over the points of `plan`.
pub fn check(form: &Form, sp: &SolutionPair, plan: &SamplePlan, tol: f64) -> Result<ResidualReport, ModelError> {
    let points = plan.draw(sp)?;
    let bindings = form.bindings(sp)?;
    Ok(evaluate(form.name(), &form.residuals(sp), &bindings, &points, tol)?.with_subject(&sp.name))
}
