mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use eulerlab::catalog::Params;
use eulerlab::fieldlab::Dealias;

use config::RunConfig;
use error::{CliError, EXIT_PARAM};

#[derive(Parser, Debug)]
#[command(
    name = "eulerlab",
    version,
    about = "Symmetry, solution and conservation checks for the two-field plasma model"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List or verify closed-form solutions.
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
    /// Linearized symmetry checks.
    Symmetry {
        #[command(subcommand)]
        action: SymmetryAction,
    },
    /// Map a catalog solution along the finite orbit of a generator.
    Orbit {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        gen: GeneratorArgs,
        #[arg(long, allow_hyphen_values = true)]
        lambda: Option<f64>,
        /// Check the transformed pair against the full system.
        #[arg(long)]
        verify: bool,
    },
    /// Reduced equations: power-law exponents, boundary-value solvers, superposition.
    Reduce {
        #[command(subcommand)]
        action: ReduceAction,
    },
    /// Run the pseudo-spectral solver and store a trace directory.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Recompute conservation diagnostics from a stored trace.
    Conserve {
        #[command(flatten)]
        common: Common,
    },
    /// Reconstruct the vector potentials of a stored trace.
    Potential {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Subcommand, Debug)]
enum CatalogAction {
    List {
        #[command(flatten)]
        common: Common,
    },
    Verify {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Subcommand, Debug)]
enum SymmetryAction {
    Check {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        gen: GeneratorArgs,
    },
}

#[derive(Subcommand, Debug)]
enum ReduceAction {
    /// Exponent `a` of `R = t^a r^b` and the radial residual of that profile.
    Power {
        #[command(flatten)]
        common: Common,
        #[arg(long = "exponent", allow_hyphen_values = true)]
        exponent: Option<f64>,
    },
    /// Convergence study of the V or W boundary-value solver on a manufactured solution.
    Bvp {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        kind: Option<String>,
        #[arg(long = "coef-a", allow_hyphen_values = true)]
        coef_a: Option<f64>,
        #[arg(long = "coef-b", allow_hyphen_values = true)]
        coef_b: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        wavenumber: Option<f64>,
        #[arg(long)]
        nodes: Option<usize>,
        #[arg(long)]
        levels: Option<usize>,
    },
    /// Affine combination of two invariant catalog solutions.
    Superpose {
        #[command(flatten)]
        common: Common,
        /// Second catalog id.
        #[arg(long)]
        with: Option<String>,
        /// Parameters of the second entry, `k=v[,k=v]`.
        #[arg(long = "with-param")]
        with_param: Vec<String>,
        #[arg(long, allow_hyphen_values = true)]
        c1: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        c2: Option<f64>,
    },
}

#[derive(Args, Debug, Default)]
struct Common {
    /// JSON RunConfig; flags given on the command line override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    id: Option<String>,
    /// Parameters `k=v[,k=v]`; may be repeated.
    #[arg(long = "param")]
    params: Vec<String>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Report file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Trace directory.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Add wall-clock timing to the report, in its own field.
    #[arg(long)]
    timing: bool,
    /// Write the effective RunConfig to this file.
    #[arg(long = "save-config")]
    save_config: Option<PathBuf>,
}

#[derive(Args, Debug, Default)]
struct GeneratorArgs {
    #[arg(long)]
    generator: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    a: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    b: Option<f64>,
    /// Use the truncated system.
    #[arg(long)]
    truncated: bool,
}

#[derive(Args, Debug, Default)]
struct SimArgs {
    #[arg(long)]
    nx: Option<usize>,
    #[arg(long)]
    ny: Option<usize>,
    #[arg(long)]
    lx: Option<f64>,
    #[arg(long)]
    ly: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    /// Snapshot cadence in steps.
    #[arg(long)]
    every: Option<usize>,
    /// `random` or a catalog id.
    #[arg(long)]
    init: Option<String>,
    #[arg(long)]
    t0: Option<f64>,
    #[arg(long)]
    kmax: Option<usize>,
    #[arg(long)]
    amplitude: Option<f64>,
    /// Give ψ a nonzero mean in random initial data.
    #[arg(long = "nonzero-mean")]
    nonzero_mean: bool,
    #[arg(long = "no-dealias")]
    no_dealias: bool,
    #[arg(long)]
    truncated: bool,
}

fn parse_params(items: &[String]) -> Result<Vec<(String, f64)>, CliError> {
    let mut out = Vec::new();
    for item in items {
        out.extend(Params::parse(item)?.values);
    }
    Ok(out)
}

impl Common {
    fn apply(&self, cfg: &mut RunConfig) -> Result<(), CliError> {
        if let Some(id) = &self.id {
            cfg.id = Some(id.clone());
        }
        cfg.params.extend(parse_params(&self.params)?);
        if self.tol.is_some() {
            cfg.tol = self.tol;
        }
        if let Some(n) = self.samples {
            cfg.plan.points = n;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if self.out.is_some() {
            cfg.out = self.out.clone();
        }
        if self.trace.is_some() {
            cfg.trace = self.trace.clone();
        }
        Ok(())
    }
}

impl GeneratorArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        if let Some(g) = &self.generator {
            cfg.generator = Some(g.clone());
        }
        if let Some(a) = self.a {
            cfg.generator_params[0] = a;
        }
        if let Some(b) = self.b {
            cfg.generator_params[1] = b;
        }
        cfg.truncated |= self.truncated;
    }
}

impl SimArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        let g = &mut cfg.grid;
        g.nx = self.nx.unwrap_or(g.nx);
        g.ny = self.ny.unwrap_or(g.ny);
        g.lx = self.lx.unwrap_or(g.lx);
        g.ly = self.ly.unwrap_or(g.ly);
        let s = &mut cfg.sim;
        s.dt = self.dt.unwrap_or(s.dt);
        s.steps = self.steps.unwrap_or(s.steps);
        s.every = self.every.unwrap_or(s.every);
        s.t0 = self.t0.unwrap_or(s.t0);
        s.kmax = self.kmax.unwrap_or(s.kmax);
        s.amplitude = self.amplitude.unwrap_or(s.amplitude);
        if let Some(init) = &self.init {
            s.init = init.clone();
        }
        if self.nonzero_mean {
            s.zero_mean_psi = false;
        }
        if self.no_dealias {
            s.dealias = Dealias::Off;
        }
        cfg.truncated |= self.truncated;
    }
}

fn base(common: &Common, command: &str) -> Result<RunConfig, CliError> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::from_json(&std::fs::read_to_string(path)?)?,
        None => RunConfig::default(),
    };
    cfg.command = command.to_string();
    common.apply(&mut cfg)?;
    Ok(cfg)
}

fn configure(cli: &Cli) -> Result<(RunConfig, &Common), CliError> {
    Ok(match &cli.command {
        Command::Catalog { action } => match action {
            CatalogAction::List { common } => (base(common, "catalog list")?, common),
            CatalogAction::Verify { common } => (base(common, "catalog verify")?, common),
        },
        Command::Symmetry {
            action: SymmetryAction::Check { common, gen },
        } => {
            let mut cfg = base(common, "symmetry check")?;
            gen.apply(&mut cfg);
            (cfg, common)
        }
        Command::Orbit {
            common,
            gen,
            lambda,
            verify,
        } => {
            let mut cfg = base(common, "orbit")?;
            gen.apply(&mut cfg);
            cfg.lambda = lambda.unwrap_or(cfg.lambda);
            cfg.verify |= *verify;
            (cfg, common)
        }
        Command::Reduce { action } => match action {
            ReduceAction::Power { common, exponent } => {
                let mut cfg = base(common, "reduce power")?;
                cfg.reduce.exponent = exponent.unwrap_or(cfg.reduce.exponent);
                (cfg, common)
            }
            ReduceAction::Bvp {
                common,
                kind,
                coef_a,
                coef_b,
                wavenumber,
                nodes,
                levels,
            } => {
                let mut cfg = base(common, "reduce bvp")?;
                let r = &mut cfg.reduce;
                if let Some(k) = kind {
                    r.kind = k.clone();
                }
                r.coef[0] = coef_a.unwrap_or(r.coef[0]);
                r.coef[1] = coef_b.unwrap_or(r.coef[1]);
                r.wavenumber = wavenumber.unwrap_or(r.wavenumber);
                r.nodes = nodes.unwrap_or(r.nodes);
                r.levels = levels.unwrap_or(r.levels);
                (cfg, common)
            }
            ReduceAction::Superpose {
                common,
                with,
                with_param,
                c1,
                c2,
            } => {
                let mut cfg = base(common, "reduce superpose")?;
                let r = &mut cfg.reduce;
                if with.is_some() {
                    r.with = with.clone();
                }
                r.with_params.extend(parse_params(with_param)?);
                r.weights[0] = c1.unwrap_or(r.weights[0]);
                r.weights[1] = c2.unwrap_or(r.weights[1]);
                (cfg, common)
            }
        },
        Command::Simulate { common, sim } => {
            let mut cfg = base(common, "simulate")?;
            sim.apply(&mut cfg);
            (cfg, common)
        }
        Command::Conserve { common } => (base(common, "conserve")?, common),
        Command::Potential { common } => (base(common, "potential")?, common),
    })
}

fn init_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var("EULERLAB_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| CliError::Input(format!("EULERLAB_THREADS must be a positive integer, got `{v}`")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .map_err(|e| CliError::Input(e.to_string()))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool, CliError> {
    init_threads()?;
    let (cfg, common) = configure(&cli)?;
    if let Some(path) = &common.save_config {
        std::fs::write(path, cfg.to_json())?;
    }
    let start = Instant::now();
    let outcome = commands::execute(&cfg)?;
    let mut report = outcome.envelope(&cfg);
    if common.timing {
        report["timing"] = serde_json::json!({ "elapsed_ms": start.elapsed().as_secs_f64() * 1e3 });
    }
    let text = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    match &cfg.out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(outcome.pass)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PARAM } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(error::EXIT_FAIL as u8),
        Err(e) => {
            eprintln!("error: {e}");
            let detail = serde_json::json!({ "error": e.to_string(), "exit_code": e.exit_code() });
            println!("{}", serde_json::to_string_pretty(&detail).expect("error serializes"));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
