//! Plane incident waves and their analytic tractions on the circle.

use crate::dtn::{BackgroundMedium, DtnOperator, WaveNumbers};
use crate::Result;
use num_complex::Complex64;

type C = Complex64;

/// Pressure or shear plane-wave incidence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum WaveKind {
    P,
    S,
}

/// Incident wave specification: kind plus incidence angle θ^in.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Incidence {
    pub kind: WaveKind,
    pub angle: f64,
}

impl Incidence {
    pub fn direction(&self) -> [f64; 2] {
        [self.angle.cos(), self.angle.sin()]
    }
}

/// u_p^in = d e^{i k_p x·d},  u_s^in = d^⊥ e^{i k_s x·d}.
pub fn incident_field(inc: Incidence, waves: &WaveNumbers, points: &[[f64; 2]]) -> Vec<[C; 2]> {
    let d = inc.direction();
    let dperp = [-d[1], d[0]];
    let (k, pol) = match inc.kind {
        WaveKind::P => (waves.kp, d),
        WaveKind::S => (waves.ks, dperp),
    };
    points
        .iter()
        .map(|&[x, y]| {
            let phase = C::new(0.0, k * (x * d[0] + y * d[1])).exp();
            [pol[0] * phase, pol[1] * phase]
        })
        .collect()
}

/// Analytic traction T_{λ0,μ0} u^in = 2μ0 ∂_ν u + λ0 ν div u − μ0 ν^⊥ curl u
/// at points R(cos θ, sin θ). For P waves div u = i k_p e^{i k_p x·d} and
/// curl u = 0; for S waves div u = 0 and curl u = i k_s e^{i k_s x·d}.
pub fn incident_traction(
    inc: Incidence,
    waves: &WaveNumbers,
    medium: &BackgroundMedium,
    thetas: &[f64],
) -> Vec<[C; 2]> {
    let d = inc.direction();
    let dperp = [-d[1], d[0]];
    let r = medium.radius;
    thetas
        .iter()
        .map(|&th| {
            let nu = [th.cos(), th.sin()];
            let nu_perp = [-nu[1], nu[0]];
            let x = [r * nu[0], r * nu[1]];
            match inc.kind {
                WaveKind::P => {
                    let ikp = C::new(0.0, waves.kp);
                    let phase = (ikp * (x[0] * d[0] + x[1] * d[1])).exp();
                    let nu_dot_d = nu[0] * d[0] + nu[1] * d[1];
                    // 2μ0 (ν·d) ik_p d + λ0 ik_p ν, all times the phase
                    let f = ikp * phase;
                    [
                        f * (2.0 * medium.mu0 * nu_dot_d * d[0] + medium.lambda0 * nu[0]),
                        f * (2.0 * medium.mu0 * nu_dot_d * d[1] + medium.lambda0 * nu[1]),
                    ]
                }
                WaveKind::S => {
                    let iks = C::new(0.0, waves.ks);
                    let phase = (iks * (x[0] * d[0] + x[1] * d[1])).exp();
                    let nu_dot_d = nu[0] * d[0] + nu[1] * d[1];
                    // 2μ0 (ν·d) ik_s d^⊥ − μ0 ik_s ν^⊥, all times the phase
                    let f = iks * phase;
                    [
                        f * medium.mu0 * (2.0 * nu_dot_d * dperp[0] - nu_perp[0]),
                        f * medium.mu0 * (2.0 * nu_dot_d * dperp[1] - nu_perp[1]),
                    ]
                }
            }
        })
        .collect()
}

/// The transparent-boundary datum g = T u^in − B u^in on the DtN grid.
pub fn boundary_load(
    inc: Incidence,
    waves: &WaveNumbers,
    medium: &BackgroundMedium,
    dtn: &DtnOperator,
) -> Result<Vec<[C; 2]>> {
    let p = dtn.boundary_points;
    let thetas: Vec<f64> = (0..p).map(|m| dtn.theta(m)).collect();
    let points: Vec<[f64; 2]> = thetas
        .iter()
        .map(|&th| [medium.radius * th.cos(), medium.radius * th.sin()])
        .collect();
    let trace = incident_field(inc, waves, &points);
    let traction = incident_traction(inc, waves, medium, &thetas);
    let b_of_trace = dtn.apply(&trace, false)?;
    Ok(traction
        .iter()
        .zip(&b_of_trace)
        .map(|(t, b)| [t[0] - b[0], t[1] - b[1]])
        .collect())
}
