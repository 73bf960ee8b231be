use std::path::{Path, PathBuf};

use eulerlab::catalog::{self, Built, Params};
use eulerlab::fieldlab::{
    conserved, curl_consistency, flux_divergence_check, potential_reconstruct, random_state, read_trace, sample_pair,
    write_eulf, write_trace, ConservationLog, Drift, SimState, Stepper,
};
use eulerlab::liesym::{orbit, symmetry_check, symmetry_check_truncated, Generator};
use eulerlab::model::{check, ResidualReport, SolutionPair};
use eulerlab::reduced::{power_exponent, radial_report, residual_r, solve_v, solve_w, superposition_check, Grid1D};
use eulerlab::symcore::{Expr, FuncBinding, Var};
use serde_json::{json, Value};

use crate::config::{ConservationTol, RunConfig};
use crate::error::CliError;

pub struct Outcome {
    /// What was checked, in words.
    pub checked: String,
    pub pass: bool,
    pub result: Value,
}

impl Outcome {
    pub fn envelope(&self, cfg: &RunConfig) -> Value {
        json!({
            "command": cfg.command,
            "checked": self.checked,
            "pass": self.pass,
            "config": cfg,
            "result": self.result,
        })
    }
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report serializes")
}

fn required<'a>(v: &'a Option<String>, flag: &str) -> Result<&'a str, CliError> {
    v.as_deref().ok_or_else(|| CliError::Input(format!("missing --{flag}")))
}

fn build(id: &str, params: &std::collections::BTreeMap<String, f64>) -> Result<(Built, &'static str), CliError> {
    let entry = catalog::lookup(id)?;
    let p = Params {
        values: params.clone(),
        funcs: Vec::new(),
    };
    Ok((entry.build(&p)?, entry.provenance))
}

fn built_from(cfg: &RunConfig) -> Result<(Built, &'static str), CliError> {
    build(required(&cfg.id, "id")?, &cfg.params)
}

/// Builtin generator from the config; `X1` and `PhiShift` get the functions
/// `A = a sin t`, `B = b t²` and `q = a cos t`.
fn generator(cfg: &RunConfig) -> Result<Generator, CliError> {
    let name = required(&cfg.generator, "generator")?;
    let [a, b] = cfg.generator_params;
    let t = Expr::t();
    let funcs = [
        FuncBinding::of_time("A", &(a * t.sin()), 6),
        FuncBinding::of_time("B", &(b * t.square()), 6),
        FuncBinding::of_time("q", &(a * t.cos()), 6),
    ]
    .into_iter()
    .collect::<Result<Vec<_>, _>>()
    .map_err(eulerlab::liesym::LieError::from)?;
    let spec = if name == "Xab" {
        format!("Xab({a},{b})")
    } else {
        name.to_string()
    };
    Ok(Generator::parse(&spec, &funcs)?)
}

fn describe(sp: &SolutionPair) -> Value {
    json!({
        "name": sp.name,
        "psi": sp.psi.to_string(),
        "phi": sp.phi.to_string(),
        "functions": sp.bindings.funcs().map(|f| f.name().to_string()).collect::<Vec<_>>(),
    })
}

pub fn execute(cfg: &RunConfig) -> Result<Outcome, CliError> {
    match cfg.command.as_str() {
        "catalog list" => Ok(Outcome {
            checked: "catalog contents".into(),
            pass: true,
            result: to_value(&catalog::entries().iter().map(|e| e.info()).collect::<Vec<_>>()),
        }),
        "catalog verify" => catalog_verify(cfg),
        "symmetry check" => symmetry(cfg),
        "orbit" => orbit_cmd(cfg),
        "reduce power" => reduce_power(cfg),
        "reduce bvp" => reduce_bvp(cfg),
        "reduce superpose" => reduce_superpose(cfg),
        "simulate" => simulate(cfg),
        "conserve" => conserve(cfg),
        "potential" => potential(cfg),
        other => Err(CliError::Input(format!("unknown command `{other}`"))),
    }
}

fn catalog_verify(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let (built, provenance) = built_from(cfg)?;
    let tol = cfg.tol.unwrap_or(1e-8);
    let plan = cfg.sample_plan();
    let reports = built
        .forms
        .iter()
        .map(|f| check(f, &built.pair, &plan, tol))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Outcome {
        checked: format!("residuals of `{}` ({provenance})", built.pair.name),
        pass: reports.iter().all(|r| r.pass),
        result: json!({ "pair": describe(&built.pair), "reports": reports }),
    })
}

fn symmetry(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let (built, _) = built_from(cfg)?;
    let g = generator(cfg)?;
    let plan = cfg.sample_plan();
    let tol = cfg.tol.unwrap_or(1e-8);
    let (report, system) = if cfg.truncated {
        (
            symmetry_check_truncated(&g, &built.pair, &plan, tol)?,
            "truncated system",
        )
    } else {
        (symmetry_check(&g, &built.pair, &plan, tol)?, "full system")
    };
    Ok(Outcome {
        checked: format!(
            "linearized {system} along the characteristic of {} on `{}`",
            g.name, built.pair.name
        ),
        pass: report.pass,
        result: to_value(&report),
    })
}

fn orbit_cmd(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let (built, _) = built_from(cfg)?;
    let g = generator(cfg)?;
    let mapped = orbit(&g, &built.pair, cfg.lambda)?;
    let mut result = json!({ "generator": g.name, "lambda": cfg.lambda, "pair": describe(&mapped) });
    let mut pass = true;
    if cfg.verify {
        let report = check(&built.forms[0], &mapped, &cfg.sample_plan(), cfg.tol.unwrap_or(1e-7))?;
        pass = report.pass;
        result["verification"] = to_value(&report);
    }
    Ok(Outcome {
        checked: format!(
            "finite orbit of {} at lambda = {} from `{}`",
            g.name, cfg.lambda, built.pair.name
        ),
        pass,
        result,
    })
}

fn reduce_power(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let b = cfg.reduce.exponent;
    let a = power_exponent(b)?;
    let identity = 2.0 * a * b - b * b + 2.0 * b + 4.0;
    let r = FuncBinding::from_expr("R", &[Var::X, Var::T], &(Expr::t().powf(a) * Expr::x().powf(b)), 5)
        .map_err(eulerlab::reduced::ReducedError::from)?;
    let report = radial_report("R", &residual_r(&r), &r, &cfg.sample_plan(), cfg.tol.unwrap_or(1e-9))?;
    let identity_ok = identity.abs() <= 1e-12 * (1.0 + b * b);
    Ok(Outcome {
        checked: format!("radial equation for R = t^a r^b with b = {b}"),
        pass: identity_ok && report.pass,
        result: json!({ "a": a, "b": b, "identity_residual": identity, "report": report }),
    })
}

fn reduce_bvp(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let r = &cfg.reduce;
    let [ca, cb] = r.coef;
    let d = ca * ca + cb * cb;
    let k = r.wavenumber;
    let s = Expr::x();
    let (exact, rhs): (Box<dyn Fn(f64) -> f64>, FuncBinding) = match r.kind.as_str() {
        "v" => (
            Box::new(move |x: f64| (k * x).sin()),
            FuncBinding::from_expr("F", &[Var::X], &((1.0 + d * k * k) * (k * &s).sin()), 2)
                .map_err(eulerlab::reduced::ReducedError::from)?,
        ),
        "w" => (
            Box::new(move |x: f64| (k * x).sin() + 0.3 * x),
            FuncBinding::from_expr("G", &[Var::X], &(-d * k * k * (k * &s).sin()), 2)
                .map_err(eulerlab::reduced::ReducedError::from)?,
        ),
        other => return Err(CliError::Input(format!("--kind must be `v` or `w`, got `{other}`"))),
    };
    let mut grid = Grid1D::new(0.0, 3.0, r.nodes)?;
    let mut errors = Vec::new();
    let mut finest = None;
    for _ in 0..r.levels.max(2) {
        let bc = (exact(grid.min), exact(grid.max));
        let p = if r.kind == "v" {
            solve_v(&rhs, ca, cb, grid, bc)?
        } else {
            solve_w(&rhs, ca, cb, grid, bc)?
        };
        errors.push(p.max_error(&exact));
        finest = Some(p);
        grid = grid.refined();
    }
    let ratios: Vec<f64> = errors.windows(2).map(|w| w[0] / w[1]).collect();
    if let (Some(dir), Some(p)) = (&cfg.trace, &finest) {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("profile.csv"), p.to_csv())?;
    }
    Ok(Outcome {
        checked: format!(
            "second-order convergence of the {} profile solver on sin({k} s)",
            r.kind
        ),
        pass: ratios.iter().all(|q| (q - 4.0).abs() <= 0.5),
        result: json!({ "errors": errors, "ratios": ratios }),
    })
}

fn reduce_superpose(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let (first, _) = built_from(cfg)?;
    let (second, _) = build(required(&cfg.reduce.with, "with")?, &cfg.reduce.with_params)?;
    let [c1, c2] = cfg.reduce.weights;
    let report = superposition_check(
        &first.pair,
        &second.pair,
        c1,
        c2,
        &cfg.sample_plan(),
        cfg.tol.unwrap_or(1e-7),
    )?;
    Ok(Outcome {
        checked: format!(
            "affine combination {c1}, {c2} of invariant solutions `{}` and `{}`",
            first.pair.name, second.pair.name
        ),
        pass: report.pass,
        result: to_value(&report),
    })
}

fn drift_ok(d: &Drift, tol: &ConservationTol) -> bool {
    d.j0 <= tol.j0 && d.k0 <= tol.k0 && d.cp <= tol.casimir && d.cm <= tol.casimir
}

fn trace_dir(cfg: &RunConfig) -> PathBuf {
    cfg.trace.clone().unwrap_or_else(|| PathBuf::from("trace"))
}

fn simulate(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let grid = cfg.grid()?;
    let mut options = cfg.sim_options();
    let s0 = if cfg.sim.init == "random" {
        random_state(grid, &cfg.random_spec(), options)?
    } else {
        let (built, _) = build(&cfg.sim.init, &cfg.params)?;
        let (psi, phi, drift) = sample_pair(&built.pair, grid, cfg.sim.t0)?;
        options.drift = drift;
        SimState::from_fields(psi, phi, cfg.sim.t0, options)?
    };
    let stepper = Stepper::new(grid);
    let limit = stepper.cfl_limit(&s0);
    let run = stepper.run(&s0, cfg.sim.dt, cfg.sim.steps, cfg.sim.every)?;
    let dir = trace_dir(cfg);
    write_trace(&dir, cfg.sim.dt, cfg.sim.steps, cfg.sim.every, &run.snapshots, &run.log)?;
    let drift = run.log.drift();
    Ok(Outcome {
        checked: format!(
            "conserved integrals over {} RK4 steps from `{}` data",
            cfg.sim.steps, cfg.sim.init
        ),
        pass: drift_ok(&drift, &cfg.conservation),
        result: json!({
            "cfl_limit": limit,
            "drift_velocity": options.drift,
            "t_final": run.last.t,
            "snapshots": run.snapshots.len(),
            "drift": drift,
            "first": run.log.values.first(),
            "last": run.log.values.last(),
            "trace": dir,
        }),
    })
}

fn require_trace(cfg: &RunConfig) -> Result<&Path, CliError> {
    cfg.trace
        .as_deref()
        .ok_or_else(|| CliError::Input("missing --trace".into()))
}

fn conserve(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let trace = read_trace(require_trace(cfg)?)?;
    let mut log = ConservationLog::new(trace.manifest.grid.area());
    for s in &trace.states {
        log.push(s.t, conserved(s))?;
    }
    let stored_gap = log
        .values
        .iter()
        .zip(&trace.log.values)
        .map(|(a, b)| {
            let d = (a.j0 - b.j0).abs() + (a.k0 - b.k0).abs() + (a.cp - b.cp).abs() + (a.cm - b.cm).abs();
            d / (1.0 + a.cp + a.cm)
        })
        .fold(0.0, f64::max);
    let consistent = log.values.len() == trace.log.values.len() && stored_gap <= 1e-12;
    let drift = log.drift();
    let flux: ResidualReport = flux_divergence_check(&trace.states)?;
    Ok(Outcome {
        checked: "conserved integrals and local conservation laws on a stored trajectory".into(),
        pass: consistent && flux.pass && drift_ok(&drift, &cfg.conservation),
        result: json!({
            "drift": drift,
            "log_matches_trace": consistent,
            "flux": flux,
        }),
    })
}

fn potential(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let dir = require_trace(cfg)?;
    let trace = read_trace(dir)?;
    let pot = potential_reconstruct(&trace.states)?;
    let report = curl_consistency(&trace.states, &pot)?;
    let out = dir.join("potential");
    std::fs::create_dir_all(&out)?;
    for (k, series) in pot.p.iter().enumerate() {
        for (s, f) in trace.states.iter().zip(series) {
            std::fs::write(out.join(format!("p{}_{:06}.eulf", k + 1, s.steps)), write_eulf(f, s.t))?;
        }
    }
    Ok(Outcome {
        checked: "curl constraints of the reconstructed vector potentials".into(),
        pass: report.pass,
        result: json!({ "report": report, "dumps": out }),
    })
}
