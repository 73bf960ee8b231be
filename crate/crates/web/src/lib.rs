use eulerlab::catalog::{self, Params};
use eulerlab::fieldlab::{conserved, random_state, ConservationLog, Grid2D, RandomSpec, SimOptions, SimState, Stepper};
use eulerlab::liesym::{orbit, Generator};
use eulerlab::model::{check, SamplePlan, SolutionPair};
use eulerlab::symcore::{Expr, FuncBinding, Tape};
use wasm_bindgen::prelude::*;

/// Half-width of the square shown by [`orbit_field`].
const VIEW: f64 = 3.0;

fn generator(name: &str, a: f64, b: f64) -> Result<Generator, String> {
    let t = Expr::t();
    let funcs = [
        FuncBinding::of_time("A", &(a * t.sin()), 6),
        FuncBinding::of_time("B", &(b * t.square()), 6),
        FuncBinding::of_time("q", &(a * t.cos()), 6),
    ]
    .into_iter()
    .collect::<Result<Vec<_>, _>>()
    .map_err(|e| e.to_string())?;
    let spec = if name == "Xab" {
        format!("Xab({a},{b})")
    } else {
        name.to_string()
    };
    Generator::parse(&spec, &funcs).map_err(|e| e.to_string())
}

fn built(id: &str, params: &str) -> Result<catalog::Built, String> {
    let entry = catalog::lookup(id).map_err(|e| e.to_string())?;
    let params = Params::parse(params).map_err(|e| e.to_string())?;
    entry.build(&params).map_err(|e| e.to_string())
}

pub fn catalog_json() -> String {
    let infos: Vec<_> = catalog::entries().iter().map(|e| e.info()).collect();
    serde_json::to_string(&infos).expect("catalog serializes")
}

pub fn verify_json(id: &str, params: &str) -> Result<String, String> {
    let b = built(id, params)?;
    let plan = SamplePlan::default();
    let reports = b
        .forms
        .iter()
        .map(|f| check(f, &b.pair, &plan, 1e-8))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    Ok(serde_json::to_string(&reports).expect("reports serialize"))
}

/// `ψ` and `φ` of `pair` on an `n × n` raster of `[-3, 3]²`, row by row from
/// the top. Excluded or singular points are NaN.
pub fn raster(pair: &SolutionPair, n: usize, t: f64) -> Result<Vec<f64>, String> {
    let tape = Tape::compile(&[pair.psi.clone(), pair.phi.clone()], &pair.bindings).map_err(|e| e.to_string())?;
    let mut out = vec![f64::NAN; 2 * n * n];
    let h = 2.0 * VIEW / (n.max(2) - 1) as f64;
    for r in 0..n {
        for c in 0..n {
            let p = [-VIEW + c as f64 * h, VIEW - r as f64 * h, t];
            if pair.is_excluded(p, 0.0).map_err(|e| e.to_string())? {
                continue;
            }
            let v = tape.eval(p);
            out[r * n + c] = v[0];
            out[n * n + r * n + c] = v[1];
        }
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
pub fn orbit_raster(
    id: &str,
    params: &str,
    generator_name: &str,
    a: f64,
    b: f64,
    lambda: f64,
    n: usize,
    t: f64,
) -> Result<Vec<f64>, String> {
    let base = built(id, params)?;
    let g = generator(generator_name, a, b)?;
    let image = orbit(&g, &base.pair, lambda).map_err(|e| e.to_string())?;
    raster(&image, n, t)
}

#[wasm_bindgen]
pub fn catalog() -> String {
    catalog_json()
}

/// Residual reports of a catalog entry, as JSON.
#[wasm_bindgen]
pub fn verify(id: &str, params: &str) -> Result<String, JsError> {
    verify_json(id, params).map_err(|e| JsError::new(&e))
}

/// `ψ` then `φ` of the image of a catalog entry under a finite group
/// transformation, sampled for display.
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn orbit_field(
    id: &str,
    params: &str,
    generator: &str,
    a: f64,
    b: f64,
    lambda: f64,
    n: usize,
    t: f64,
) -> Result<Vec<f64>, JsError> {
    orbit_raster(id, params, generator, a, b, lambda, n, t).map_err(|e| JsError::new(&e))
}

/// A periodic run from random data, stepped from the page.
#[wasm_bindgen]
pub struct Simulation {
    stepper: Stepper,
    state: SimState,
    dt: f64,
    log: ConservationLog,
}

impl Simulation {
    pub fn create(n: usize, seed: u64, amplitude: f64) -> Result<Simulation, String> {
        let grid = Grid2D::square(n).map_err(|e| e.to_string())?;
        let spec = RandomSpec {
            seed,
            amplitude,
            ..RandomSpec::default()
        };
        let state = random_state(grid, &spec, SimOptions::default()).map_err(|e| e.to_string())?;
        let stepper = Stepper::new(grid);
        let dt = 0.3 * stepper.cfl_limit(&state);
        let mut log = ConservationLog::new(grid.area());
        log.push(state.t, conserved(&state)).map_err(|e| e.to_string())?;
        Ok(Simulation {
            stepper,
            state,
            dt,
            log,
        })
    }

    pub fn advance(&mut self, steps: usize) -> Result<(), String> {
        for _ in 0..steps {
            self.state = self.stepper.step(&self.state, self.dt).map_err(|e| e.to_string())?;
            self.log
                .push(self.state.t, conserved(&self.state))
                .map_err(|e| e.to_string())?;
        }
        Ok(())
    }

    pub fn drift_json(&self) -> String {
        serde_json::to_string(&self.log.drift()).expect("drift serializes")
    }
}

#[wasm_bindgen]
impl Simulation {
    #[wasm_bindgen(constructor)]
    pub fn new(n: usize, seed: u64, amplitude: f64) -> Result<Simulation, JsError> {
        Simulation::create(n, seed, amplitude).map_err(|e| JsError::new(&e))
    }

    pub fn step(&mut self, steps: usize) -> Result<(), JsError> {
        self.advance(steps).map_err(|e| JsError::new(&e))
    }

    pub fn time(&self) -> f64 {
        self.state.t
    }

    pub fn size(&self) -> usize {
        self.state.grid().nx
    }

    /// One of `psi`, `phi`, `gp`, `gm`, row-major with `x` fastest.
    pub fn field(&self, name: &str) -> Vec<f64> {
        match name {
            "phi" => self.state.phi.values.clone(),
            "gp" => self.state.gp.values.clone(),
            "gm" => self.state.gm.values.clone(),
            _ => self.state.psi.values.clone(),
        }
    }

    /// Relative drift of the conserved integrals since the start, as JSON.
    pub fn drift(&self) -> String {
        self.drift_json()
    }
}
