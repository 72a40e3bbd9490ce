//! Multi-frequency Landweber reconstruction: step rules, stopping rules,
//! the adjoint-state gradient steps, and the sweep driver.
//!
//! The sweep runs frequency-outer, direction-middle, Landweber-inner, with
//! warm hand-offs between stages. Each inner iteration solves the forward
//! problem at the current iterate, forms the data residual, solves the one
//! adjoint problem that shares the factorization, projects the gradient
//! integrands onto the nodal space, applies the step rule, and keeps the
//! real part.

use crate::dtn::BackgroundMedium;
use crate::fem::{
    gradient_raw, DiskMesh, FemSystem, Incidence, MaterialField, MaterialIncrement, WaveKind,
};
use crate::scenarios::{NearFieldDataset, RecordData};
use crate::solver::{boundary_inner_scalar, phaseless, FieldSolution, ForwardModel};
use crate::{Error, Result};
use num_complex::Complex64;
use std::sync::Arc;
use std::time::Instant;

type C = Complex64;

/// Relaxation (step size) rule.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum StepSize {
    /// α = value (or value/ω with `per_omega`).
    Scalar { value: f64, per_omega: bool },
    /// α(ω) = (scale/ω)·[[2+λ0/μ0, λ0/μ0, 0], [λ0/μ0, 2+λ0/μ0, 0], [0,0,1]],
    /// the stiffness-tensor-shaped matrix; `scale` is 0.01 in the standard
    /// configuration.
    Matrix { scale: f64 },
}

impl StepSize {
    /// The 3×3 step matrix at a given frequency.
    pub fn matrix_at(&self, omega: f64, medium: &BackgroundMedium) -> [[f64; 3]; 3] {
        match *self {
            StepSize::Scalar { value, per_omega } => {
                let a = if per_omega { value / omega } else { value };
                [[a, 0.0, 0.0], [0.0, a, 0.0], [0.0, 0.0, a]]
            }
            StepSize::Matrix { scale } => {
                let r = medium.lambda0 / medium.mu0;
                let f = scale / omega;
                [
                    [f * (2.0 + r), f * r, 0.0],
                    [f * r, f * (2.0 + r), 0.0],
                    [0.0, 0.0, f],
                ]
            }
        }
    }
}

/// Frequency/direction/inner-iteration schedule of the sweep.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SweepSchedule {
    pub frequencies: Vec<f64>,
    pub directions: Vec<f64>,
    pub inner_iterations: usize,
}

impl SweepSchedule {
    pub fn new(frequencies: Vec<f64>, directions: Vec<f64>, inner_iterations: usize) -> Result<Self> {
        if frequencies.is_empty() || directions.is_empty() {
            return Err(Error::InvalidArgument(
                "schedule needs at least one frequency and one direction".into(),
            ));
        }
        if frequencies.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument(
                "frequencies must be strictly increasing".into(),
            ));
        }
        Ok(SweepSchedule {
            frequencies,
            directions,
            inner_iterations,
        })
    }

    /// ω_min..ω_max in n equal steps, with the standard direction grid
    /// θ_j = 2(j−1)π/M.
    pub fn equispaced(omega_min: f64, omega_max: f64, n: usize, m: usize, l: usize) -> Result<Self> {
        let frequencies = if n == 1 {
            vec![omega_min]
        } else {
            (0..n)
                .map(|i| omega_min + (omega_max - omega_min) * i as f64 / (n - 1) as f64)
                .collect()
        };
        let directions = (0..m)
            .map(|j| 2.0 * std::f64::consts::PI * j as f64 / m as f64)
            .collect();
        SweepSchedule::new(frequencies, directions, l)
    }
}

/// When to leave the inner Landweber loop.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum StoppingRule {
    /// Always run the scheduled L iterations.
    FixedCount,
    /// Discrepancy principle: stop once ‖data − sim‖ ≤ τ·δ with the
    /// per-record absolute noise level δ = delta_rel·‖data‖.
    Discrepancy {
        tau: f64,
        eta0: f64,
        delta_rel: f64,
    },
}

impl StoppingRule {
    /// τ must respect τ > 2(1+η0)/(1−2η0) for η0 < 1/2.
    pub fn discrepancy(tau: f64, eta0: f64, delta_rel: f64) -> Result<Self> {
        if !(0.0..0.5).contains(&eta0) {
            return Err(Error::InvalidArgument(format!(
                "eta0 must lie in [0, 1/2), got {eta0}"
            )));
        }
        let bound = 2.0 * (1.0 + eta0) / (1.0 - 2.0 * eta0);
        if tau <= bound {
            return Err(Error::InvalidArgument(format!(
                "tau = {tau} violates the bound tau > {bound:.4}"
            )));
        }
        if delta_rel < 0.0 {
            return Err(Error::InvalidArgument("delta must be nonnegative".into()));
        }
        Ok(StoppingRule::Discrepancy {
            tau,
            eta0,
            delta_rel,
        })
    }
}

/// Which unknowns are updated and which data feeds the residual.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Variant {
    pub phaseless: bool,
    pub density_only: bool,
}

impl Variant {
    pub const FULL: Variant = Variant {
        phaseless: false,
        density_only: false,
    };
    pub const PHASELESS: Variant = Variant {
        phaseless: true,
        density_only: false,
    };
    pub const DENSITY: Variant = Variant {
        phaseless: false,
        density_only: true,
    };
    pub const DENSITY_PHASELESS: Variant = Variant {
        phaseless: true,
        density_only: true,
    };
}

/// Reference fields for reconstruction-error reporting.
#[derive(Debug, Clone)]
pub struct GroundTruth {
    pub q_lambda: Vec<f64>,
    pub q_mu: Vec<f64>,
    pub q_rho: Vec<f64>,
    norms: [f64; 3],
}

impl GroundTruth {
    pub fn new(mesh: &DiskMesh, q_lambda: Vec<f64>, q_mu: Vec<f64>, q_rho: Vec<f64>) -> Self {
        let norms = [
            mesh.l2_norm(&q_lambda),
            mesh.l2_norm(&q_mu),
            mesh.l2_norm(&q_rho),
        ];
        GroundTruth {
            q_lambda,
            q_mu,
            q_rho,
            norms,
        }
    }

    /// Relative errors e_q = ‖q − q̃‖_{L²} / ‖q‖_{L²} (NaN for zero truth).
    pub fn errors(&self, mesh: &DiskMesh, q: &MaterialField) -> [f64; 3] {
        let mut out = [f64::NAN; 3];
        for (c, (truth, recon)) in [
            (&self.q_lambda, &q.q_lambda),
            (&self.q_mu, &q.q_mu),
            (&self.q_rho, &q.q_rho),
        ]
        .iter()
        .enumerate()
        {
            if self.norms[c] > 0.0 {
                let diff: Vec<f64> = truth.iter().zip(recon.iter()).map(|(a, b)| a - b).collect();
                out[c] = mesh.l2_norm(&diff) / self.norms[c];
            }
        }
        out
    }
}

/// One row per inner iteration of the sweep.
#[derive(Debug, Clone)]
pub struct TraceRow {
    pub i: usize,
    pub j: usize,
    pub l: usize,
    pub omega: f64,
    pub theta: f64,
    /// ‖data − simulated‖ at the iterate the solve was done with.
    pub residual: f64,
    pub e_q: [f64; 3],
    pub seconds: f64,
}

/// Per-stage stopping bookkeeping for the discrepancy analysis.
#[derive(Debug, Clone)]
pub struct StageRecord {
    pub i: usize,
    pub j: usize,
    pub omega: f64,
    pub theta: f64,
    /// Residuals observed before each update, in order.
    pub residuals: Vec<f64>,
    /// Number of updates performed when the discrepancy rule fired.
    pub stop_index: Option<usize>,
    pub tau_delta: f64,
}

#[derive(Debug, Clone, Default)]
pub struct IterationTrace {
    pub rows: Vec<TraceRow>,
    pub stages: Vec<StageRecord>,
}

impl IterationTrace {
    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> Result<()> {
        writeln!(
            out,
            "i,j,l,omega,theta,residual,e_qlambda,e_qmu,e_qrho,seconds"
        )?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                r.i, r.j, r.l, r.omega, r.theta, r.residual, r.e_q[0], r.e_q[1], r.e_q[2], r.seconds
            )?;
        }
        Ok(())
    }
}

/// Result of one Landweber step evaluation.
pub struct StepOutcome {
    pub increment: MaterialIncrement,
    /// ‖data − simulated‖ in the boundary norm, before the update.
    pub residual: f64,
    pub forward: FieldSolution,
}

enum DataView<'a> {
    Complex(&'a [[C; 2]]),
    Phaseless(&'a [f64]),
}

fn data_norm(weight: f64, data: &DataView) -> f64 {
    match data {
        DataView::Complex(v) => (v
            .iter()
            .map(|z| z[0].norm_sqr() + z[1].norm_sqr())
            .sum::<f64>()
            * weight)
            .sqrt(),
        DataView::Phaseless(v) => (v.iter().map(|x| x * x).sum::<f64>() * weight).sqrt(),
    }
}

/// Full-data Landweber step: solve forward at q, adjoint with
/// h = data − simulated trace, project the gradient fields, and apply the
/// step rule with the real-part projection.
pub fn gradient_step(
    model: &ForwardModel,
    data_trace: &[[C; 2]],
    q: &MaterialField,
    incidence: Incidence,
    step: &StepSize,
) -> Result<StepOutcome> {
    landweber_step(model, &DataView::Complex(data_trace), q, incidence, step, Variant::FULL)
}

/// Phaseless step per the squared-magnitude map: adjoint datum ħ·ũ and a
/// doubled update.
pub fn gradient_step_phaseless(
    model: &ForwardModel,
    data_sq: &[f64],
    q: &MaterialField,
    incidence: Incidence,
    step: &StepSize,
) -> Result<StepOutcome> {
    landweber_step(
        model,
        &DataView::Phaseless(data_sq),
        q,
        incidence,
        step,
        Variant::PHASELESS,
    )
}

/// Density-only step: only the ρ component of the gradient is assembled
/// and applied; q_λ = q_μ stay fixed.
pub fn gradient_step_density(
    model: &ForwardModel,
    data_trace: &[[C; 2]],
    q: &MaterialField,
    incidence: Incidence,
    step: &StepSize,
) -> Result<StepOutcome> {
    landweber_step(
        model,
        &DataView::Complex(data_trace),
        q,
        incidence,
        step,
        Variant::DENSITY,
    )
}

fn landweber_step(
    model: &ForwardModel,
    data: &DataView,
    q: &MaterialField,
    incidence: Incidence,
    step: &StepSize,
    variant: Variant,
) -> Result<StepOutcome> {
    let sys: FemSystem = model.assemble(q)?;
    let forward = model.solve_forward(&sys, incidence)?;
    let weight = crate::fem::boundary_weight(&model.mesh);

    let (residual, adjoint_datum, amplitude) = match data {
        DataView::Complex(d) => {
            if d.len() != forward.trace.len() {
                return Err(Error::DimensionMismatch {
                    what: "data trace",
                    expected: forward.trace.len(),
                    got: d.len(),
                });
            }
            let h: Vec<[C; 2]> = d
                .iter()
                .zip(&forward.trace)
                .map(|(a, b)| [a[0] - b[0], a[1] - b[1]])
                .collect();
            let r = (h
                .iter()
                .map(|z| z[0].norm_sqr() + z[1].norm_sqr())
                .sum::<f64>()
                * weight)
                .sqrt();
            (r, h, 1.0)
        }
        DataView::Phaseless(d) => {
            if d.len() != forward.trace.len() {
                return Err(Error::DimensionMismatch {
                    what: "phaseless data",
                    expected: forward.trace.len(),
                    got: d.len(),
                });
            }
            let sim = phaseless(&forward.trace);
            let hs: Vec<f64> = d.iter().zip(&sim).map(|(a, b)| a - b).collect();
            let r = boundary_inner_scalar(weight, &hs, &hs).sqrt();
            // adjoint datum ħ·ũ, pointwise
            let datum: Vec<[C; 2]> = hs
                .iter()
                .zip(&forward.trace)
                .map(|(s, t)| [t[0] * *s, t[1] * *s])
                .collect();
            (r, datum, 2.0)
        }
    };

    let adj = model.solve_adjoint(&sys, &adjoint_datum)?;
    let raw = gradient_raw(
        &model.mesh,
        &model.medium,
        model.waves.omega,
        &forward.u,
        &adj.phi_bar,
    );
    let n = model.mesh.num_nodes();
    let alpha = step.matrix_at(model.waves.omega, &model.medium);
    let mut inc = MaterialIncrement {
        d_lambda: vec![0.0; n],
        d_mu: vec![0.0; n],
        d_rho: vec![0.0; n],
    };
    for k in 0..n {
        let m = model.mesh.lumped_mass[k];
        // L²-projection onto the nodal space, then Re{·}
        let g = [
            raw[0][k].re / m,
            raw[1][k].re / m,
            raw[2][k].re / m,
        ];
        if variant.density_only {
            inc.d_rho[k] = amplitude * alpha[2][2] * g[2];
        } else {
            inc.d_lambda[k] =
                amplitude * (alpha[0][0] * g[0] + alpha[0][1] * g[1] + alpha[0][2] * g[2]);
            inc.d_mu[k] =
                amplitude * (alpha[1][0] * g[0] + alpha[1][1] * g[1] + alpha[1][2] * g[2]);
            inc.d_rho[k] =
                amplitude * (alpha[2][0] * g[0] + alpha[2][1] * g[1] + alpha[2][2] * g[2]);
        }
    }
    Ok(StepOutcome {
        increment: inc,
        residual,
        forward,
    })
}

/// Sweep configuration shared by the three algorithm variants.
pub struct SweepConfig<'a> {
    pub mesh: Arc<DiskMesh>,
    pub medium: BackgroundMedium,
    pub schedule: &'a SweepSchedule,
    pub step: &'a StepSize,
    pub stopping: &'a StoppingRule,
    pub variant: Variant,
    pub incidence_kind: WaveKind,
}

/// A sweep abort: the error plus everything computed up to it, so partial
/// traces and iterates can still be persisted.
#[derive(Debug)]
pub struct SweepFailure {
    pub error: Error,
    pub q: MaterialField,
    pub trace: IterationTrace,
}

impl std::fmt::Display for SweepFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "sweep aborted after {} iterations: {}", self.trace.rows.len(), self.error)
    }
}

impl std::error::Error for SweepFailure {}

/// Runs the triple loop with warm hand-offs. The iterate leaving stage
/// (i, j) is the iterate entering the next stage, bitwise. On solver
/// failure the partial trace and iterate ride along in the error.
pub fn run_sweep(
    cfg: &SweepConfig,
    data: &NearFieldDataset,
    initial: MaterialField,
    truth: Option<&GroundTruth>,
    progress: Option<&(dyn Fn(&TraceRow) + Sync)>,
) -> std::result::Result<(MaterialField, IterationTrace), Box<SweepFailure>> {
    let mut q = initial;
    let mut trace = IterationTrace::default();
    macro_rules! fail {
        ($e:expr) => {
            return Err(Box::new(SweepFailure {
                error: $e,
                q,
                trace,
            }))
        };
    }
    if let Err(e) = data.check_covers(&cfg.schedule.frequencies, &cfg.schedule.directions) {
        fail!(e);
    }
    if data.boundary_points != cfg.mesh.boundary_points() {
        fail!(Error::ScheduleMismatch(format!(
            "dataset has {} boundary points, inversion mesh has {}",
            data.boundary_points,
            cfg.mesh.boundary_points()
        )));
    }
    if data.is_phaseless() && !cfg.variant.phaseless {
        fail!(Error::ScheduleMismatch(
            "phaseless dataset cannot drive the full-data algorithm".into(),
        ));
    }

    let mask = cfg.mesh.support_mask();

    for (i, &omega) in cfg.schedule.frequencies.iter().enumerate() {
        let model = match ForwardModel::new(cfg.mesh.clone(), cfg.medium, omega) {
            Ok(m) => m,
            Err(e) => fail!(e),
        };
        let weight = crate::fem::boundary_weight(&cfg.mesh);
        for (j, &theta) in cfg.schedule.directions.iter().enumerate() {
            let incidence = Incidence {
                kind: cfg.incidence_kind,
                angle: theta,
            };
            let record = match data.record(i, j) {
                Ok(r) => r,
                Err(e) => fail!(e),
            };
            // Phaseless runs on complex data square it on the fly.
            let squared;
            let view = match (record, cfg.variant.phaseless) {
                (RecordData::Complex(v), false) => DataView::Complex(v),
                (RecordData::Complex(v), true) => {
                    squared = v
                        .iter()
                        .map(|z| z[0].norm_sqr() + z[1].norm_sqr())
                        .collect::<Vec<f64>>();
                    DataView::Phaseless(&squared)
                }
                (RecordData::Phaseless(v), true) => DataView::Phaseless(v),
                (RecordData::Phaseless(_), false) => unreachable!("checked above"),
            };
            let tau_delta = match cfg.stopping {
                StoppingRule::Discrepancy {
                    tau, delta_rel, ..
                } => tau * delta_rel * data_norm(weight, &view),
                StoppingRule::FixedCount => f64::NAN,
            };
            let mut residuals = Vec::new();
            let mut stop_index = None;
            for l in 1..=cfg.schedule.inner_iterations {
                let t0 = Instant::now();
                let outcome =
                    match landweber_step(&model, &view, &q, incidence, cfg.step, cfg.variant) {
                        Ok(o) => o,
                        Err(e) => {
                            trace.stages.push(StageRecord {
                                i,
                                j,
                                omega,
                                theta,
                                residuals,
                                stop_index,
                                tau_delta,
                            });
                            fail!(e);
                        }
                    };
                residuals.push(outcome.residual);
                let stopped = matches!(cfg.stopping, StoppingRule::Discrepancy { .. })
                    && outcome.residual <= tau_delta;
                if !stopped {
                    q.apply_increment(&outcome.increment, &mask);
                } else {
                    stop_index = Some(l - 1);
                }
                let e_q = truth
                    .map(|t| t.errors(&cfg.mesh, &q))
                    .unwrap_or([f64::NAN; 3]);
                let row = TraceRow {
                    i,
                    j,
                    l,
                    omega,
                    theta,
                    residual: outcome.residual,
                    e_q,
                    seconds: t0.elapsed().as_secs_f64(),
                };
                if let Some(cb) = progress {
                    cb(&row);
                }
                trace.rows.push(row);
                if stopped {
                    break;
                }
            }
            trace.stages.push(StageRecord {
                i,
                j,
                omega,
                theta,
                residuals,
                stop_index,
                tau_delta,
            });
        }
    }
    Ok((q, trace))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_matrix_shape_and_spd() {
        let medium = BackgroundMedium::default();
        let m = StepSize::Matrix { scale: 0.01 }.matrix_at(1.0, &medium);
        // λ0/μ0 = 2: [[4,2,0],[2,4,0],[0,0,1]]/100
        assert!((m[0][0] - 0.04).abs() < 1e-15);
        assert!((m[0][1] - 0.02).abs() < 1e-15);
        assert!((m[2][2] - 0.01).abs() < 1e-15);
        assert_eq!(m[0][2], 0.0);
        // symmetric positive definite: leading minors positive
        let d1 = m[0][0];
        let d2 = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        let d3 = d2 * m[2][2];
        assert!(d1 > 0.0 && d2 > 0.0 && d3 > 0.0);
        assert_eq!(m[0][1], m[1][0]);

        let s = StepSize::Scalar {
            value: 0.01,
            per_omega: true,
        }
        .matrix_at(4.0, &medium);
        assert!((s[0][0] - 0.0025).abs() < 1e-18);
    }

    #[test]
    fn schedule_validation() {
        assert!(SweepSchedule::new(vec![1.0, 1.0], vec![0.0], 1).is_err());
        assert!(SweepSchedule::new(vec![2.0, 1.0], vec![0.0], 1).is_err());
        assert!(SweepSchedule::new(vec![], vec![0.0], 1).is_err());
        let s = SweepSchedule::equispaced(1.0, 10.0, 10, 16, 10).unwrap();
        assert_eq!(s.frequencies.len(), 10);
        assert!((s.frequencies[9] - 10.0).abs() < 1e-15);
        assert!((s.directions[1] - std::f64::consts::PI / 8.0).abs() < 1e-15);
    }

    #[test]
    fn discrepancy_tau_bound() {
        // η0 = 0.1 → τ > 2.75
        assert!(StoppingRule::discrepancy(2.7, 0.1, 0.05).is_err());
        assert!(StoppingRule::discrepancy(3.0, 0.1, 0.05).is_ok());
        assert!(StoppingRule::discrepancy(3.0, 0.6, 0.05).is_err());
    }
}
