use crate::model::{EquationStats, ResidualReport};

use super::{Field2D, FieldError, SimState, Spectral};

const FLUX_TOL: f64 = 1e-4;
const CURL_TOL: f64 = 1e-6;

/// Vector potentials `P₁..P₄` at the snapshot times of a trajectory.
#[derive(Clone, Debug, PartialEq)]
pub struct Potentials {
    pub times: Vec<f64>,
    pub p: [Vec<Field2D>; 4],
}

/// Node values needed by the flux and potential right-hand sides.
struct Parts {
    psi: Vec<f64>,
    psi_x: Vec<f64>,
    psi_y: Vec<f64>,
    phi_x: Vec<f64>,
    phi_y: Vec<f64>,
    lap_psi: Vec<f64>,
    lap_phi: Vec<f64>,
}

impl Parts {
    fn of(spec: &Spectral, s: &SimState) -> Parts {
        let ps = spec.forward(&s.psi.values);
        let fs = spec.forward(&s.phi.values);
        let shift = |mut v: Vec<f64>, c: f64| {
            v.iter_mut().for_each(|x| *x += c);
            v
        };
        let n = s.psi.values.len();
        Parts {
            psi: s.psi.values.clone(),
            psi_x: spec.inverse(&spec.dx_hat(&ps)),
            psi_y: spec.inverse(&spec.dy_hat(&ps)),
            phi_x: shift(spec.inverse(&spec.dx_hat(&fs)), s.options.drift[0]),
            phi_y: shift(spec.inverse(&spec.dy_hat(&fs)), s.options.drift[1]),
            lap_psi: (0..n)
                .map(|k| s.psi.values[k] - 0.5 * (s.gp.values[k] + s.gm.values[k]))
                .collect(),
            lap_phi: (0..n).map(|k| 0.5 * (s.gp.values[k] - s.gm.values[k])).collect(),
        }
    }

    fn build(&self, f: impl Fn(usize) -> f64) -> Vec<f64> {
        (0..self.psi.len()).map(f).collect()
    }
}

fn consistent(traj: &[SimState]) -> Result<f64, FieldError> {
    let first = traj
        .first()
        .ok_or_else(|| FieldError::Trajectory("empty trajectory".into()))?;
    for s in traj {
        if s.grid() != first.grid() {
            return Err(FieldError::GridMismatch);
        }
        if s.options != first.options {
            return Err(FieldError::Trajectory("snapshots use different solver options".into()));
        }
    }
    let Some(second) = traj.get(1) else {
        return Ok(0.0);
    };
    let h = second.t - first.t;
    if !(h > 0.0) {
        return Err(FieldError::Trajectory("times must increase".into()));
    }
    for w in traj.windows(2) {
        if ((w[1].t - w[0].t) - h).abs() > 1e-9 * h {
            return Err(FieldError::Trajectory(format!(
                "unequal spacing at t = {}: {} vs {h}",
                w[0].t,
                w[1].t - w[0].t
            )));
        }
    }
    Ok(h)
}

fn potential_rates(spec: &Spectral, s: &SimState) -> [Vec<f64>; 4] {
    let q = Parts::of(spec, s);
    let dealias = s.options.dealias == super::Dealias::TwoThirds;
    let l = |k: usize| q.lap_psi[k] - q.psi[k];
    [
        q.build(|k| q.psi_x[k] * q.lap_phi[k] - q.phi_x[k] * l(k)),
        q.build(|k| q.psi_y[k] * q.lap_phi[k] - q.phi_y[k] * l(k)),
        q.build(|k| q.psi_x[k] * q.lap_psi[k] - q.phi_x[k] * q.lap_phi[k]),
        q.build(|k| q.psi_y[k] * q.lap_psi[k] - q.phi_y[k] * q.lap_phi[k]),
    ]
    .map(|v| spec.project(v, dealias))
}

/// Integrates the potential system along `traj` with the trapezoidal rule,
/// starting from `P₁ = ∂yχ, P₂ = -∂xχ` with `Δχ = Δψ - ψ` and
/// `P₃ = ∂yχ', P₄ = -∂xχ'` with `Δχ' = Δφ`.
pub fn potential_reconstruct(traj: &[SimState]) -> Result<Potentials, FieldError> {
    let h = consistent(traj)?;
    for s in traj {
        let (mean, linf) = (s.psi.mean(), s.psi.linf());
        if mean.abs() > 1e-10 * linf.max(1.0) {
            return Err(FieldError::NonZeroMeanPsi { mean });
        }
    }
    let first = &traj[0];
    let spec = Spectral::new(first.grid());
    let q = Parts::of(&spec, first);
    let stream = |density: Vec<f64>| -> [Vec<f64>; 2] {
        let chi = spec.poisson_hat(&spec.forward(&density));
        [
            spec.inverse(&spec.dy_hat(&chi)),
            spec.inverse(&spec.dx_hat(&chi)).into_iter().map(|v| -v).collect(),
        ]
    };
    let [p1, p2] = stream(q.build(|k| q.lap_psi[k] - q.psi[k]));
    let [p3, p4] = stream(q.lap_phi.clone());

    let mut current = [p1, p2, p3, p4];
    let mut out: [Vec<Field2D>; 4] = Default::default();
    let mut rates = potential_rates(&spec, first);
    for (k, p) in current.iter().enumerate() {
        out[k].push(spec.field(p.clone()));
    }
    for s in &traj[1..] {
        let next = potential_rates(&spec, s);
        for k in 0..4 {
            for (i, v) in current[k].iter_mut().enumerate() {
                *v += 0.5 * h * (rates[k][i] + next[k][i]);
            }
            out[k].push(spec.field(current[k].clone()));
        }
        rates = next;
    }
    Ok(Potentials {
        times: traj.iter().map(|s| s.t).collect(),
        p: out,
    })
}

fn stats(name: &str, per_snapshot: &[(f64, [f64; 3])]) -> EquationStats {
    let mut linf = 0.0;
    let mut worst = per_snapshot.first().map(|p| p.1).unwrap_or([0.0; 3]);
    let mut sq = 0.0;
    for &(v, p) in per_snapshot {
        sq += v * v;
        if v > linf {
            linf = v;
            worst = p;
        }
    }
    EquationStats {
        name: name.to_string(),
        linf,
        l2: if per_snapshot.is_empty() {
            0.0
        } else {
            (sq / per_snapshot.len() as f64).sqrt()
        },
        worst_point: worst,
    }
}

/// Largest `|res|` over `scale`, with the node where it occurs.
fn relative(res: &[f64], scale: f64, s: &SimState) -> (f64, [f64; 3]) {
    let (k, m) = res.iter().enumerate().fold(
        (0, 0.0f64),
        |acc, (k, v)| if v.abs() > acc.1 { (k, v.abs()) } else { acc },
    );
    let g = s.grid();
    let point = [g.x(k % g.nx), g.y(k / g.nx), s.t];
    let v = if m == 0.0 {
        0.0
    } else if scale > 0.0 {
        m / scale
    } else {
        f64::INFINITY
    };
    (v, point)
}

/// Checks `-∂xP₂ + ∂yP₁ = Δψ - ψ` and `-∂xP₄ + ∂yP₃ = Δφ` at every
/// snapshot, relative to the largest value of the right-hand side.
pub fn curl_consistency(traj: &[SimState], pot: &Potentials) -> Result<ResidualReport, FieldError> {
    consistent(traj)?;
    if pot.times.len() != traj.len() || pot.p.iter().any(|p| p.len() != traj.len()) {
        return Err(FieldError::Trajectory("potentials do not match the trajectory".into()));
    }
    let spec = Spectral::new(traj[0].grid());
    let mut first = Vec::new();
    let mut second = Vec::new();
    for (n, s) in traj.iter().enumerate() {
        let q = Parts::of(&spec, s);
        for (pair, target, out) in [
            ((0, 1), q.build(|k| q.lap_psi[k] - q.psi[k]), &mut first),
            ((2, 3), q.lap_phi.clone(), &mut second),
        ] {
            let curl_y = spec.dy(&pot.p[pair.0][n]);
            let curl_x = spec.dx(&pot.p[pair.1][n]);
            let res: Vec<f64> = (0..target.len())
                .map(|k| curl_y.values[k] - curl_x.values[k] - target[k])
                .collect();
            let scale = target.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            out.push(relative(&res, scale, s));
        }
    }
    Ok(ResidualReport::from_stats(
        "CURL",
        traj.len() * traj[0].grid().len(),
        CURL_TOL,
        vec![stats("P1P2", &first), stats("P3P4", &second)],
    ))
}

/// Verifies `∂t J0 + div J = 0` and `∂t K0 + div K = 0` on a stored
/// trajectory: centered differences in time at interior snapshots, spectral
/// derivatives in space. Each snapshot is scaled by the largest of
/// `max |∂t density|`, `max |div flux|` and the two partial derivatives
/// making up the divergence.
pub fn flux_divergence_check(traj: &[SimState]) -> Result<ResidualReport, FieldError> {
    let h = consistent(traj)?;
    if traj.len() < 3 {
        return Err(FieldError::Trajectory("need at least three snapshots".into()));
    }
    let spec = Spectral::new(traj[0].grid());
    let dealias = traj[0].options.dealias == super::Dealias::TwoThirds;
    let parts: Vec<Parts> = traj.iter().map(|s| Parts::of(&spec, s)).collect();
    let densities = |q: &Parts| -> [Vec<f64>; 2] { [q.build(|k| q.lap_psi[k] - q.psi[k]), q.lap_phi.clone()] };
    let max = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    // Each divergence comes with the size of its two partial derivatives.
    let divergences = |q: &Parts| -> [(Vec<f64>, f64); 2] {
        let jx = q.build(|k| q.psi_y[k] * q.lap_phi[k] - q.phi_y[k] * q.lap_psi[k] + q.psi[k] * q.phi_y[k]);
        let jy = q.build(|k| q.phi_x[k] * q.lap_psi[k] - q.psi_x[k] * q.lap_phi[k] - q.psi[k] * q.phi_x[k]);
        let kx = q.build(|k| q.psi_y[k] * q.lap_psi[k] - q.phi_y[k] * q.lap_phi[k]);
        let ky = q.build(|k| q.phi_x[k] * q.lap_phi[k] - q.psi_x[k] * q.lap_psi[k]);
        let div = |fx: Vec<f64>, fy: Vec<f64>| -> (Vec<f64>, f64) {
            let a = spec.inverse(&spec.dx_hat(&spec.forward(&spec.project(fx, dealias))));
            let b = spec.inverse(&spec.dy_hat(&spec.forward(&spec.project(fy, dealias))));
            (a.iter().zip(&b).map(|(u, v)| u + v).collect(), max(&a).max(max(&b)))
        };
        [div(jx, jy), div(kx, ky)]
    };
    let mut per: [Vec<(f64, [f64; 3])>; 2] = Default::default();
    for n in 1..traj.len() - 1 {
        let before = densities(&parts[n - 1]);
        let after = densities(&parts[n + 1]);
        let divs = divergences(&parts[n]);
        for c in 0..2 {
            let dt: Vec<f64> = after[c]
                .iter()
                .zip(&before[c])
                .map(|(a, b)| (a - b) / (2.0 * h))
                .collect();
            let (div, terms) = &divs[c];
            let res: Vec<f64> = dt.iter().zip(div).map(|(a, b)| a + b).collect();
            per[c].push(relative(&res, max(&dt).max(max(div)).max(*terms), &traj[n]));
        }
    }
    Ok(ResidualReport::from_stats(
        "FLUX",
        (traj.len() - 2) * traj[0].grid().len(),
        FLUX_TOL,
        vec![stats("J", &per[0]), stats("K", &per[1])],
    ))
}
