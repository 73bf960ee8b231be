use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::model::SolutionPair;
use crate::symcore::{Bindings, Expr, Tape};

use super::{Field2D, FieldError, Grid2D, Spectral};

const CFL: f64 = 0.5;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dealias {
    #[default]
    TwoThirds,
    Off,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SimOptions {
    pub dealias: Dealias,
    /// Uniform background gradient: `φ = φ̃ + drift[0] x + drift[1] y`.
    #[serde(default)]
    pub drift: [f64; 2],
    /// Evolve the system without the `[ψ, Δφ]` coupling, where both `G±`
    /// are carried by `φ` alone.
    #[serde(default)]
    pub truncated: bool,
}

impl SimOptions {
    fn dealiased(&self) -> bool {
        self.dealias == Dealias::TwoThirds
    }
}

/// Solver state: the advected fields `G± = ψ - Δψ ± Δφ̃` plus the
/// recovered `ψ` and zero-mean periodic part `φ̃` of `φ`.
#[derive(Clone, Debug, PartialEq)]
pub struct SimState {
    pub t: f64,
    pub steps: usize,
    pub gp: Field2D,
    pub gm: Field2D,
    pub psi: Field2D,
    pub phi: Field2D,
    /// Step size of the step that produced this state.
    pub dt: Option<f64>,
    pub options: SimOptions,
}

impl SimState {
    pub fn grid(&self) -> Grid2D {
        self.gp.grid
    }

    pub fn zero(grid: Grid2D, options: SimOptions) -> SimState {
        let z = Field2D::zeros(grid);
        SimState {
            t: 0.0,
            steps: 0,
            gp: z.clone(),
            gm: z.clone(),
            psi: z.clone(),
            phi: z,
            dt: None,
            options,
        }
    }

    /// State with the given `ψ` and periodic `φ̃`; the mean of `φ̃` is gauged away.
    pub fn from_fields(psi: Field2D, phi: Field2D, t: f64, options: SimOptions) -> Result<SimState, FieldError> {
        let psi = Field2D::checked("psi", psi.grid, psi.values)?;
        let phi = Field2D::checked("phi", phi.grid, phi.values)?;
        if psi.grid != phi.grid {
            return Err(FieldError::GridMismatch);
        }
        let spec = Spectral::new(psi.grid);
        let lpsi = spec.laplacian(&psi);
        let lphi = spec.laplacian(&phi);
        let gp = Field2D::checked(
            "Gp",
            psi.grid,
            (0..psi.values.len())
                .map(|k| psi.values[k] - lpsi.values[k] + lphi.values[k])
                .collect(),
        )?;
        let gm = Field2D::checked(
            "Gm",
            psi.grid,
            (0..psi.values.len())
                .map(|k| psi.values[k] - lpsi.values[k] - lphi.values[k])
                .collect(),
        )?;
        Ok(SimState::from_g_with(&spec, gp, gm, t, options))
    }

    pub fn from_g(gp: Field2D, gm: Field2D, t: f64, options: SimOptions) -> Result<SimState, FieldError> {
        let gp = Field2D::checked("Gp", gp.grid, gp.values)?;
        let gm = Field2D::checked("Gm", gm.grid, gm.values)?;
        if gp.grid != gm.grid {
            return Err(FieldError::GridMismatch);
        }
        Ok(SimState::from_g_with(&Spectral::new(gp.grid), gp, gm, t, options))
    }

    pub(crate) fn from_g_with(spec: &Spectral, gp: Field2D, gm: Field2D, t: f64, options: SimOptions) -> SimState {
        let (psi, phi) = recover(spec, &spec.forward(&gp.values), &spec.forward(&gm.values));
        SimState {
            t,
            steps: 0,
            psi: spec.field(spec.inverse(&psi)),
            phi: spec.field(spec.inverse(&phi)),
            gp,
            gm,
            dt: None,
            options,
        }
    }
}

/// `(ψ̂, φ̂)` from the transforms of `G±`.
fn recover(
    spec: &Spectral,
    sp: &[rustfft::num_complex::Complex64],
    sm: &[rustfft::num_complex::Complex64],
) -> (
    Vec<rustfft::num_complex::Complex64>,
    Vec<rustfft::num_complex::Complex64>,
) {
    let half_sum: Vec<_> = sp.iter().zip(sm).map(|(a, b)| (a + b) * 0.5).collect();
    let half_diff: Vec<_> = sp.iter().zip(sm).map(|(a, b)| (a - b) * 0.5).collect();
    (spec.helmholtz_hat(&half_sum), spec.poisson_hat(&half_diff))
}

/// Evaluates `e` at every node at time `t`.
pub fn sample(e: &Expr, grid: Grid2D, t: f64, bindings: &Bindings) -> Result<Field2D, FieldError> {
    let tape = Tape::compile(std::slice::from_ref(e), bindings)?;
    let mut values = Vec::with_capacity(grid.len());
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let (x, y) = (grid.x(i), grid.y(j));
            let v = tape.eval([x, y, t])[0];
            if !v.is_finite() {
                return Err(FieldError::Singular { x, y });
            }
            values.push(v);
        }
    }
    Ok(Field2D { grid, values })
}

/// Samples a pair on the periodic box at time `t`. A linear part of `φ` is
/// split off as the uniform drift; everything else must be periodic.
/// Returns `(ψ, φ̃, drift)`.
pub fn sample_pair(sp: &SolutionPair, grid: Grid2D, t: f64) -> Result<(Field2D, Field2D, [f64; 2]), FieldError> {
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let (x, y) = (grid.x(i), grid.y(j));
            if sp.is_excluded([x, y, t], 0.0)? {
                return Err(FieldError::Singular { x, y });
            }
        }
    }
    let tape = Tape::compile(&[sp.psi.clone(), sp.phi.clone()], &sp.bindings)?;
    let at = |x: f64, y: f64| tape.eval([x, y, t]);
    let (lx, ly) = (grid.lx, grid.ly);
    let origin = at(0.0, 0.0);
    let drift = [(at(lx, 0.0)[1] - origin[1]) / lx, (at(0.0, ly)[1] - origin[1]) / ly];

    let mut gaps = [0.0f64; 2];
    let mut probe = |a: Vec<f64>, b: Vec<f64>, jump: f64| {
        for k in 0..2 {
            let expected = if k == 1 { jump } else { 0.0 };
            let gap = (b[k] - a[k] - expected).abs() / (1.0 + a[k].abs() + b[k].abs());
            gaps[k] = gaps[k].max(if gap.is_nan() { f64::INFINITY } else { gap });
        }
    };
    for j in 0..grid.ny {
        let y = grid.y(j);
        probe(at(0.0, y), at(lx, y), drift[0] * lx);
    }
    for i in 0..grid.nx {
        let x = grid.x(i);
        probe(at(x, 0.0), at(x, ly), drift[1] * ly);
    }
    for (k, name) in ["psi", "phi"].iter().enumerate() {
        if gaps[k] > 1e-9 {
            return Err(FieldError::NotPeriodic {
                what: name.to_string(),
                gap: gaps[k],
            });
        }
    }

    let psi = sample(&sp.psi, grid, t, &sp.bindings)?;
    let mut phi = sample(&sp.phi, grid, t, &sp.bindings)?;
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            phi.values[j * grid.nx + i] -= drift[0] * grid.x(i) + drift[1] * grid.y(j);
        }
    }
    Ok((psi, phi, drift))
}

/// Dealiased pseudo-spectral RK4 integrator bound to one grid.
pub struct Stepper {
    spec: Spectral,
}

/// Output of [`Stepper::run`]: snapshots every `every` steps, initial state
/// included, and the conservation log sampled at the same times.
#[derive(Clone, Debug)]
pub struct Run {
    pub last: SimState,
    pub snapshots: Vec<SimState>,
    pub log: ConservationLog,
}

impl Stepper {
    pub fn new(grid: Grid2D) -> Self {
        Stepper {
            spec: Spectral::new(grid),
        }
    }

    pub fn spectral(&self) -> &Spectral {
        &self.spec
    }

    /// Node gradients of `φ ± ψ` (or `φ` when truncated), drift included.
    fn carrier_gradients(
        &self,
        psi: &[rustfft::num_complex::Complex64],
        phi: &[rustfft::num_complex::Complex64],
        sign: f64,
        options: &SimOptions,
    ) -> (Vec<f64>, Vec<f64>) {
        let a: Vec<_> = if options.truncated {
            phi.to_vec()
        } else {
            phi.iter().zip(psi).map(|(f, p)| f + p * sign).collect()
        };
        let mut ax = self.spec.inverse(&self.spec.dx_hat(&a));
        let mut ay = self.spec.inverse(&self.spec.dy_hat(&a));
        ax.iter_mut().for_each(|v| *v += options.drift[0]);
        ay.iter_mut().for_each(|v| *v += options.drift[1]);
        (ax, ay)
    }

    fn spectra(&self, gp: &[f64], gm: &[f64], dealias: bool) -> [Vec<rustfft::num_complex::Complex64>; 2] {
        let mut sp = self.spec.forward(gp);
        let mut sm = self.spec.forward(gm);
        if dealias {
            self.spec.dealias(&mut sp);
            self.spec.dealias(&mut sm);
        }
        [sp, sm]
    }

    /// `(-[a₊, G₊], -[a₋, G₋])` at the nodes.
    fn tendencies(&self, gp: &[f64], gm: &[f64], options: &SimOptions) -> [Vec<f64>; 2] {
        let dealias = options.dealiased();
        let [sp, sm] = self.spectra(gp, gm, dealias);
        let (psi, phi) = recover(&self.spec, &sp, &sm);
        let out = |sign: f64, g: &[rustfft::num_complex::Complex64]| {
            let (ax, ay) = self.carrier_gradients(&psi, &phi, sign, options);
            let gx = self.spec.inverse(&self.spec.dx_hat(g));
            let gy = self.spec.inverse(&self.spec.dy_hat(g));
            let prod: Vec<f64> = (0..gx.len()).map(|k| -(ax[k] * gy[k] - gx[k] * ay[k])).collect();
            self.spec.project(prod, dealias)
        };
        [out(1.0, &sp), out(-1.0, &sm)]
    }

    /// Largest step allowed by `dt ≤ 0.5 min(hx, hy) / max |∇(φ ± ψ)|`.
    pub fn cfl_limit(&self, state: &SimState) -> f64 {
        let [sp, sm] = self.spectra(&state.gp.values, &state.gm.values, state.options.dealiased());
        let (psi, phi) = recover(&self.spec, &sp, &sm);
        let mut speed = 0.0f64;
        for sign in [1.0, -1.0] {
            let (ax, ay) = self.carrier_gradients(&psi, &phi, sign, &state.options);
            for (a, b) in ax.iter().zip(&ay) {
                speed = speed.max(a.hypot(*b));
            }
        }
        let h = self.spec.grid().hx().min(self.spec.grid().hy());
        if speed > 0.0 {
            CFL * h / speed
        } else {
            f64::INFINITY
        }
    }

    /// One classical RK4 step of size `dt`.
    pub fn step(&self, state: &SimState, dt: f64) -> Result<SimState, FieldError> {
        if state.grid() != self.spec.grid() {
            return Err(FieldError::GridMismatch);
        }
        let limit = self.cfl_limit(state);
        if !(dt > 0.0) || dt > limit {
            return Err(FieldError::Cfl { dt, limit });
        }
        let o = &state.options;
        let (g0p, g0m) = (&state.gp.values, &state.gm.values);
        let axpy = |g: &[f64], k: &[f64], h: f64| -> Vec<f64> { g.iter().zip(k).map(|(a, b)| a + h * b).collect() };

        let [k1p, k1m] = self.tendencies(g0p, g0m, o);
        let [k2p, k2m] = self.tendencies(&axpy(g0p, &k1p, dt / 2.0), &axpy(g0m, &k1m, dt / 2.0), o);
        let [k3p, k3m] = self.tendencies(&axpy(g0p, &k2p, dt / 2.0), &axpy(g0m, &k2m, dt / 2.0), o);
        let [k4p, k4m] = self.tendencies(&axpy(g0p, &k3p, dt), &axpy(g0m, &k3m, dt), o);
        let combine = |g: &[f64], k1: &[f64], k2: &[f64], k3: &[f64], k4: &[f64]| -> Vec<f64> {
            (0..g.len())
                .map(|i| g[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
                .collect()
        };
        let gp = combine(g0p, &k1p, &k2p, &k3p, &k4p);
        let gm = combine(g0m, &k1m, &k2m, &k3m, &k4m);
        let t = state.t + dt;
        let steps = state.steps + 1;
        for (name, g) in [("Gp", &gp), ("Gm", &gm)] {
            if let Some(k) = g.iter().position(|v| !v.is_finite()) {
                let grid = self.spec.grid();
                return Err(FieldError::NaN {
                    step: steps,
                    t,
                    what: format!("{name} at node ({}, {})", k % grid.nx, k / grid.nx),
                });
            }
        }
        let grid = self.spec.grid();
        let mut next = SimState::from_g_with(&self.spec, self.spec.field(gp), Field2D { grid, values: gm }, t, *o);
        next.steps = steps;
        next.dt = Some(dt);
        Ok(next)
    }

    pub fn run(&self, state: &SimState, dt: f64, steps: usize, every: usize) -> Result<Run, FieldError> {
        let every = every.max(1);
        let mut log = ConservationLog::new(state.grid().area());
        let mut snapshots = vec![state.clone()];
        log.push(state.t, conserved(state))?;
        let mut current = state.clone();
        for n in 1..=steps {
            current = self.step(&current, dt)?;
            if n % every == 0 {
                log.push(current.t, conserved(&current))?;
                snapshots.push(current.clone());
            }
        }
        Ok(Run {
            last: current,
            snapshots,
            log,
        })
    }
}

pub fn step(state: &SimState, dt: f64) -> Result<SimState, FieldError> {
    Stepper::new(state.grid()).step(state, dt)
}

/// `(∫∫(Δψ - ψ), ∫∫Δφ, ∫∫G₊², ∫∫G₋²)` by the trapezoidal rule.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Conserved {
    pub j0: f64,
    pub k0: f64,
    pub cp: f64,
    pub cm: f64,
}

impl Conserved {
    pub fn as_tuple(&self) -> (f64, f64, f64, f64) {
        (self.j0, self.k0, self.cp, self.cm)
    }
}

pub fn conserved(state: &SimState) -> Conserved {
    let cell = state.grid().cell();
    let (gp, gm) = (&state.gp.values, &state.gm.values);
    let mut c = Conserved::default();
    for k in 0..gp.len() {
        c.j0 -= 0.5 * (gp[k] + gm[k]);
        c.k0 += 0.5 * (gp[k] - gm[k]);
        c.cp += gp[k] * gp[k];
        c.cm += gm[k] * gm[k];
    }
    Conserved {
        j0: c.j0 * cell,
        k0: c.k0 * cell,
        cp: c.cp * cell,
        cm: c.cm * cell,
    }
}

/// Largest relative drift of each monitored quantity from its first sample.
/// `J0` and `K0` are measured against `sqrt(area (Cp + Cm) / 2)`, which bounds
/// `∫∫|Δψ - ψ|` and `∫∫|Δφ|` at the first sample.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Drift {
    pub j0: f64,
    pub k0: f64,
    pub cp: f64,
    pub cm: f64,
}

/// Equally spaced samples of [`Conserved`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConservationLog {
    pub area: f64,
    pub times: Vec<f64>,
    pub values: Vec<Conserved>,
}

impl ConservationLog {
    pub fn new(area: f64) -> Self {
        ConservationLog {
            area,
            times: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn push(&mut self, t: f64, c: Conserved) -> Result<(), FieldError> {
        let (a, b, p, m) = c.as_tuple();
        if ![t, a, b, p, m].iter().all(|v| v.is_finite()) {
            return Err(FieldError::Trajectory(format!(
                "non-finite conservation sample at t = {t}"
            )));
        }
        if let [.., t0, t1] = self.times[..] {
            let (h, h_new) = (t1 - t0, t - t1);
            if (h_new - h).abs() > 1e-9 * h.abs().max(1e-300) {
                return Err(FieldError::Trajectory(format!("unequal spacing: {h} then {h_new}")));
            }
        } else if let [t0] = self.times[..] {
            if !(t > t0) {
                return Err(FieldError::Trajectory(format!("time {t} does not follow {t0}")));
            }
        }
        self.times.push(t);
        self.values.push(c);
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,J0,K0,Cp,Cm\n");
        for (t, c) in self.times.iter().zip(&self.values) {
            let _ = writeln!(out, "{t:.17e},{:.17e},{:.17e},{:.17e},{:.17e}", c.j0, c.k0, c.cp, c.cm);
        }
        out
    }

    pub fn from_csv(text: &str, area: f64) -> Result<Self, FieldError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        match lines.next().map(str::trim) {
            Some("t,J0,K0,Cp,Cm") => {}
            other => return Err(FieldError::Format(format!("unexpected header {other:?}"))),
        }
        let mut log = ConservationLog::new(area);
        for (row, line) in lines.enumerate() {
            let v: Vec<f64> = line
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|e| FieldError::Format(format!("row {}: {e}", row + 1)))?;
            if v.len() != 5 {
                return Err(FieldError::Format(format!("row {}: expected 5 columns", row + 1)));
            }
            log.push(
                v[0],
                Conserved {
                    j0: v[1],
                    k0: v[2],
                    cp: v[3],
                    cm: v[4],
                },
            )?;
        }
        Ok(log)
    }

    pub fn drift(&self) -> Drift {
        let Some(first) = self.values.first() else {
            return Drift::default();
        };
        let norm = (self.area * (first.cp + first.cm) / 2.0).sqrt();
        let rel = |d: f64, s: f64| if s > 0.0 { d / s } else { d };
        let mut out = Drift::default();
        for c in &self.values {
            out.j0 = out.j0.max(rel((c.j0 - first.j0).abs(), norm));
            out.k0 = out.k0.max(rel((c.k0 - first.k0).abs(), norm));
            out.cp = out.cp.max(rel((c.cp - first.cp).abs(), first.cp));
            out.cm = out.cm.max(rel((c.cm - first.cm).abs(), first.cm));
        }
        out
    }
}

/// Band-limited random initial data: Fourier sums over wavevectors with
/// `0 < |m| ≤ kmax` (integer mode numbers), scaled to `max |ψ| = max |φ̃| = amplitude`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomSpec {
    pub kmax: usize,
    pub amplitude: f64,
    pub seed: u64,
    /// When false, `ψ` gets a mean of `amplitude / 2`.
    pub zero_mean_psi: bool,
}

impl Default for RandomSpec {
    fn default() -> Self {
        RandomSpec {
            kmax: 4,
            amplitude: 0.1,
            seed: 1,
            zero_mean_psi: true,
        }
    }
}

pub fn random_state(grid: Grid2D, spec: &RandomSpec, options: SimOptions) -> Result<SimState, FieldError> {
    let limit = grid.nx.min(grid.ny) / 3;
    if spec.kmax == 0 || spec.kmax >= limit || !(spec.amplitude.is_finite()) {
        return Err(FieldError::Trajectory(format!(
            "random data needs 0 < kmax < {limit} and a finite amplitude"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let km = spec.kmax as i64;
    let mut field = || {
        let mut modes = Vec::new();
        for mx in 0..=km {
            for my in -km..=km {
                if (mx == 0 && my <= 0) || mx * mx + my * my > km * km {
                    continue;
                }
                let decay = 1.0 / (1.0 + (mx * mx + my * my) as f64);
                modes.push((
                    mx as f64,
                    my as f64,
                    rng.gen_range(-1.0..1.0) * decay,
                    rng.gen_range(-1.0..1.0) * decay,
                ));
            }
        }
        let (kx, ky) = (std::f64::consts::TAU / grid.lx, std::f64::consts::TAU / grid.ly);
        let f = Field2D::from_fn(grid, |x, y| {
            modes
                .iter()
                .map(|&(mx, my, a, b)| {
                    let arg = mx * kx * x + my * ky * y;
                    a * arg.cos() + b * arg.sin()
                })
                .sum()
        });
        let scale = f.linf();
        f.map(|v| if scale > 0.0 { spec.amplitude * v / scale } else { 0.0 })
    };
    let mut psi = field();
    let phi = field();
    if !spec.zero_mean_psi {
        psi = psi.map(|v| v + 0.5 * spec.amplitude);
    }
    SimState::from_fields(psi, phi, 0.0, options)
}
