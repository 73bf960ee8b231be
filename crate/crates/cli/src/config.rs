use std::collections::BTreeMap;
use std::path::PathBuf;

use eulerlab::fieldlab::{Dealias, Grid2D, RandomSpec, SimOptions};
use eulerlab::model::SamplePlan;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Everything a run depends on. Command-line flags are folded into this
/// structure before anything executes, so a saved config reproduces a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: String,
    pub id: Option<String>,
    pub params: BTreeMap<String, f64>,
    pub generator: Option<String>,
    /// Numeric generator parameters: `(a, b)` of `Xab`, amplitudes of the
    /// default `X1` functions `A = a sin t`, `B = b t²` and of `q = a cos t`.
    pub generator_params: [f64; 2],
    pub lambda: f64,
    pub verify: bool,
    pub truncated: bool,
    pub plan: PlanSpec,
    pub grid: GridSpec,
    pub sim: SimSpec,
    pub reduce: ReduceSpec,
    pub trace: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub seed: u64,
    pub tol: Option<f64>,
    pub conservation: ConservationTol,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            command: String::new(),
            id: None,
            params: BTreeMap::new(),
            generator: None,
            generator_params: [1.0, 1.0],
            lambda: 0.0,
            verify: false,
            truncated: false,
            plan: PlanSpec::default(),
            grid: GridSpec::default(),
            sim: SimSpec::default(),
            reduce: ReduceSpec::default(),
            trace: None,
            out: None,
            seed: 0x5EED,
            tol: None,
            conservation: ConservationTol::default(),
        }
    }
}

/// Sample box; the seed comes from [`RunConfig::seed`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlanSpec {
    pub x: [f64; 2],
    pub y: [f64; 2],
    pub t: [f64; 2],
    pub points: usize,
}

impl Default for PlanSpec {
    fn default() -> Self {
        let p = SamplePlan::default();
        PlanSpec {
            x: p.x,
            y: p.y,
            t: p.t,
            points: p.points,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            nx: 64,
            ny: 64,
            lx: std::f64::consts::TAU,
            ly: std::f64::consts::TAU,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimSpec {
    /// `random` or a catalog id sampled at `t0`.
    pub init: String,
    pub t0: f64,
    pub dt: f64,
    pub steps: usize,
    pub every: usize,
    pub kmax: usize,
    pub amplitude: f64,
    pub zero_mean_psi: bool,
    pub dealias: Dealias,
}

impl Default for SimSpec {
    fn default() -> Self {
        let r = RandomSpec::default();
        SimSpec {
            init: "random".into(),
            t0: 0.0,
            dt: 0.005,
            steps: 200,
            every: 1,
            kmax: r.kmax,
            amplitude: r.amplitude,
            zero_mean_psi: r.zero_mean_psi,
            dealias: Dealias::TwoThirds,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReduceSpec {
    /// Radial exponent `b` of `R = t^a r^b`.
    pub exponent: f64,
    /// `v` or `w`.
    pub kind: String,
    pub coef: [f64; 2],
    pub wavenumber: f64,
    pub nodes: usize,
    pub levels: usize,
    pub with: Option<String>,
    pub with_params: BTreeMap<String, f64>,
    pub weights: [f64; 2],
}

impl Default for ReduceSpec {
    fn default() -> Self {
        ReduceSpec {
            exponent: 2.0,
            kind: "v".into(),
            coef: [1.0, 0.5],
            wavenumber: 2.0,
            nodes: 21,
            levels: 4,
            with: None,
            with_params: BTreeMap::new(),
            weights: [0.5, 0.5],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConservationTol {
    pub j0: f64,
    pub k0: f64,
    pub casimir: f64,
}

impl Default for ConservationTol {
    fn default() -> Self {
        ConservationTol {
            j0: 1e-8,
            k0: 1e-10,
            casimir: 1e-4,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Input(format!("config: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn sample_plan(&self) -> SamplePlan {
        SamplePlan {
            x: self.plan.x,
            y: self.plan.y,
            t: self.plan.t,
            points: self.plan.points,
            seed: self.seed,
            guard: 0.0,
        }
    }

    pub fn grid(&self) -> Result<Grid2D, CliError> {
        Ok(Grid2D::new(self.grid.nx, self.grid.ny, self.grid.lx, self.grid.ly)?)
    }

    pub fn sim_options(&self) -> SimOptions {
        SimOptions {
            dealias: self.sim.dealias,
            drift: [0.0, 0.0],
            truncated: self.truncated,
        }
    }

    pub fn random_spec(&self) -> RandomSpec {
        RandomSpec {
            kmax: self.sim.kmax,
            amplitude: self.sim.amplitude,
            seed: self.seed,
            zero_mean_psi: self.sim.zero_mean_psi,
        }
    }
}
