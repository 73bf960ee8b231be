use crate::symcore::{bracket, laplacian, Expr, FuncBinding, Var};

use super::SolutionPair;

/// Named residual expression. Its top-level summands set the scale used for
/// relative tolerances.
#[derive(Clone, Debug)]
pub struct Residual {
    pub name: String,
    pub expr: Expr,
}

impl Residual {
    pub fn new(name: &str, expr: Expr) -> Self {
        Residual {
            name: name.to_string(),
            expr,
        }
    }
}

/// `a ψ + b Δψ + c φ + d Δφ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinComb {
    pub psi: f64,
    pub lap_psi: f64,
    pub phi: f64,
    pub lap_phi: f64,
}

impl LinComb {
    pub const fn new(psi: f64, lap_psi: f64, phi: f64, lap_phi: f64) -> Self {
        LinComb {
            psi,
            lap_psi,
            phi,
            lap_phi,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.psi == 0.0 && self.lap_psi == 0.0 && self.phi == 0.0 && self.lap_phi == 0.0
    }

    pub fn apply(&self, psi: &Expr, phi: &Expr) -> Expr {
        let mut out = Expr::zero();
        if self.psi != 0.0 {
            out = out + self.psi * psi;
        }
        if self.lap_psi != 0.0 {
            out = out + self.lap_psi * laplacian(psi);
        }
        if self.phi != 0.0 {
            out = out + self.phi * phi;
        }
        if self.lap_phi != 0.0 {
            out = out + self.lap_phi * laplacian(phi);
        }
        out
    }
}

/// Equation of the shape `∂t L(u) + Σ [M_k(u), N_k(u)] = 0` with linear
/// `L`, `M_k`, `N_k`. Every form of the system except the flux form fits.
#[derive(Clone, Debug)]
pub struct BracketEquation {
    pub name: &'static str,
    pub dt: LinComb,
    pub brackets: Vec<(LinComb, LinComb)>,
}

impl BracketEquation {
    pub fn residual(&self, psi: &Expr, phi: &Expr) -> Expr {
        let mut out = if self.dt.is_zero() {
            Expr::zero()
        } else {
            self.dt.apply(psi, phi).diff(Var::T, 1)
        };
        for (m, n) in &self.brackets {
            out = out + bracket(&m.apply(psi, phi), &n.apply(psi, phi));
        }
        out
    }

    /// Directional (Gateaux) derivative of the residual at `(ψ, φ)` in the
    /// direction `(δψ, δφ)`.
    pub fn linearized(&self, psi: &Expr, phi: &Expr, dpsi: &Expr, dphi: &Expr) -> Expr {
        let mut out = if self.dt.is_zero() {
            Expr::zero()
        } else {
            self.dt.apply(dpsi, dphi).diff(Var::T, 1)
        };
        for (m, n) in &self.brackets {
            out = out
                + bracket(&m.apply(dpsi, dphi), &n.apply(psi, phi))
                + bracket(&m.apply(psi, phi), &n.apply(dpsi, dphi));
        }
        out
    }
}

const PSI: LinComb = LinComb::new(1.0, 0.0, 0.0, 0.0);
const LAP_PSI: LinComb = LinComb::new(0.0, 1.0, 0.0, 0.0);
const PHI: LinComb = LinComb::new(0.0, 0.0, 1.0, 0.0);
const LAP_PHI: LinComb = LinComb::new(0.0, 0.0, 0.0, 1.0);
const HELM_PSI: LinComb = LinComb::new(1.0, -1.0, 0.0, 0.0);
const G_PLUS: LinComb = LinComb::new(1.0, -1.0, 0.0, 1.0);
const G_MINUS: LinComb = LinComb::new(1.0, -1.0, 0.0, -1.0);

/// `∂t G± + [φ ± ψ, G±]` with `G± = ψ - Δψ ± Δφ`.
pub fn eu_equations() -> [BracketEquation; 2] {
    [
        BracketEquation {
            name: "R1",
            dt: G_PLUS,
            brackets: vec![(LinComb::new(1.0, 0.0, 1.0, 0.0), G_PLUS)],
        },
        BracketEquation {
            name: "R2",
            dt: G_MINUS,
            brackets: vec![(LinComb::new(-1.0, 0.0, 1.0, 0.0), G_MINUS)],
        },
    ]
}

/// System without the `[ψ, Δφ]` coupling.
pub fn truncated_equations() -> [BracketEquation; 2] {
    [
        BracketEquation {
            name: "T1",
            dt: HELM_PSI,
            brackets: vec![(PHI, HELM_PSI)],
        },
        BracketEquation {
            name: "T2",
            dt: LAP_PHI,
            brackets: vec![(PHI, LAP_PHI)],
        },
    ]
}

/// System restricted to `[ψ, Δψ] = 0`, where the φ equation decouples.
pub fn psys_equations() -> [BracketEquation; 3] {
    [
        BracketEquation {
            name: "P1",
            dt: HELM_PSI,
            brackets: vec![(PHI, HELM_PSI), (PSI, LAP_PHI)],
        },
        BracketEquation {
            name: "P2",
            dt: LAP_PHI,
            brackets: vec![(PHI, LAP_PHI)],
        },
        BracketEquation {
            name: "P3",
            dt: LinComb::new(0.0, 0.0, 0.0, 0.0),
            brackets: vec![(PSI, LAP_PSI)],
        },
    ]
}

pub fn residual_eu(sp: &SolutionPair) -> (Expr, Expr) {
    let [a, b] = eu_equations();
    (a.residual(&sp.psi, &sp.phi), b.residual(&sp.psi, &sp.phi))
}

pub fn residual_truncated(sp: &SolutionPair) -> (Expr, Expr) {
    let [a, b] = truncated_equations();
    (a.residual(&sp.psi, &sp.phi), b.residual(&sp.psi, &sp.phi))
}

pub fn residual_psys(sp: &SolutionPair) -> (Expr, Expr, Expr) {
    let [a, b, c] = psys_equations();
    (
        a.residual(&sp.psi, &sp.phi),
        b.residual(&sp.psi, &sp.phi),
        c.residual(&sp.psi, &sp.phi),
    )
}

/// `([ψ, Δψ], [ψ, Δφ])`.
pub fn constraints_partial(sp: &SolutionPair) -> (Expr, Expr) {
    let lpsi = laplacian(&sp.psi);
    let lphi = laplacian(&sp.phi);
    (bracket(&sp.psi, &lpsi), bracket(&sp.psi, &lphi))
}

/// Densities and fluxes of the two conserved currents.
#[derive(Clone, Debug)]
pub struct Fluxes {
    pub j0: Expr,
    pub jx: Expr,
    pub jy: Expr,
    pub k0: Expr,
    pub kx: Expr,
    pub ky: Expr,
}

impl Fluxes {
    pub fn divergence_j(&self) -> Expr {
        self.j0.diff(Var::T, 1) + self.jx.diff(Var::X, 1) + self.jy.diff(Var::Y, 1)
    }

    pub fn divergence_k(&self) -> Expr {
        self.k0.diff(Var::T, 1) + self.kx.diff(Var::X, 1) + self.ky.diff(Var::Y, 1)
    }
}

pub fn flux_components(sp: &SolutionPair) -> Fluxes {
    let (psi, phi) = (&sp.psi, &sp.phi);
    let lpsi = laplacian(psi);
    let lphi = laplacian(phi);
    let (psi_x, psi_y) = (psi.diff(Var::X, 1), psi.diff(Var::Y, 1));
    let (phi_x, phi_y) = (phi.diff(Var::X, 1), phi.diff(Var::Y, 1));
    Fluxes {
        j0: &lpsi - psi,
        jx: &psi_y * &lphi - &phi_y * &lpsi + psi * &phi_y,
        jy: &phi_x * &lpsi - &psi_x * &lphi - psi * &phi_x,
        k0: lphi.clone(),
        kx: &psi_y * &lpsi - &phi_y * &lphi,
        ky: &phi_x * &lphi - &psi_x * &lpsi,
    }
}

/// Conservation-law form `(∂t J0 + div J, ∂t K0 + div K)`.
pub fn residual_div(sp: &SolutionPair) -> (Expr, Expr) {
    let f = flux_components(sp);
    (f.divergence_j(), f.divergence_k())
}

/// `(ψ_t - [ψ, φ], Δψ - A(ψ), Δφ - B(ψ))`; the last two only when the
/// corresponding function is supplied.
pub fn residual_ab(
    sp: &SolutionPair,
    a: Option<&FuncBinding>,
    b: Option<&FuncBinding>,
) -> (Expr, Option<Expr>, Option<Expr>) {
    let first = sp.psi.diff(Var::T, 1) - bracket(&sp.psi, &sp.phi);
    let second = a.map(|a| laplacian(&sp.psi) - a.apply(vec![sp.psi.clone()]));
    let third = b.map(|b| laplacian(&sp.phi) - b.apply(vec![sp.psi.clone()]));
    (first, second, third)
}
