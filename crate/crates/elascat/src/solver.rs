//! Forward, adjoint and derivative boundary-value solves.
//!
//! The adjoint problem has exactly the forward operator acting on the
//! conjugated field (all volume coefficients are real and the DtN adjoint
//! is conjugation-wrapped), so one factorization per (q, ω) serves the
//! forward solve, the adjoint solve, and every derivative application.

use crate::dtn::{wave_numbers, BackgroundMedium, DtnOperator, WaveNumbers};
use crate::fem::{
    assemble_system, boundary_load, boundary_weight, derivative_volume_load, incident_field,
    load_from_boundary, trace_of, DiskMesh, FemSystem, Incidence, MaterialField,
};
use crate::{Error, Result};
use num_complex::Complex64;
use std::sync::Arc;

type C = Complex64;

/// Everything fixed per (mesh, medium, frequency): the DtN operator and
/// the quadrature frame. Immutable and shareable across threads.
pub struct ForwardModel {
    pub mesh: Arc<DiskMesh>,
    pub medium: BackgroundMedium,
    pub waves: WaveNumbers,
    pub dtn: Arc<DtnOperator>,
}

impl ForwardModel {
    pub fn new(mesh: Arc<DiskMesh>, medium: BackgroundMedium, omega: f64) -> Result<Self> {
        if (mesh.radius - medium.radius).abs() > 1e-12 * medium.radius {
            return Err(Error::InvalidArgument(
                "mesh radius and medium radius disagree".into(),
            ));
        }
        let waves = wave_numbers(&medium, omega)?;
        let nt = crate::dtn::default_truncation(&waves);
        let dtn = Arc::new(DtnOperator::with_truncation(
            medium,
            omega,
            nt,
            mesh.boundary_points(),
        )?);
        Ok(ForwardModel {
            mesh,
            medium,
            waves,
            dtn,
        })
    }

    /// Assembles (without factorizing yet) the system for a material state.
    pub fn assemble(&self, q: &MaterialField) -> Result<FemSystem> {
        assemble_system(&self.mesh, q, &self.medium, &self.waves, &self.dtn)
    }

    /// Total-field solve with plane-wave incidence: the transparent
    /// boundary load is g = T u^in − B u^in.
    pub fn solve_forward(&self, sys: &FemSystem, incidence: Incidence) -> Result<FieldSolution> {
        let g = boundary_load(incidence, &self.waves, &self.medium, &self.dtn)?;
        let rhs = load_from_boundary(&self.mesh, &g);
        let (u, residual) = sys.solve(&rhs)?;
        let trace = trace_of(&self.mesh, &u);
        Ok(FieldSolution {
            u,
            trace,
            omega: self.waves.omega,
            incidence,
            material_snapshot: sys.material_snapshot,
            residual,
        })
    }

    /// Adjoint solve with boundary datum `h`: the conjugated field φ̄
    /// satisfies the forward operator with load (h̄, ·)_{Γ_R}.
    pub fn solve_adjoint(&self, sys: &FemSystem, h: &[[C; 2]]) -> Result<AdjointSolution> {
        if h.len() != self.mesh.boundary_points() {
            return Err(Error::DimensionMismatch {
                what: "adjoint boundary datum",
                expected: self.mesh.boundary_points(),
                got: h.len(),
            });
        }
        let h_bar: Vec<[C; 2]> = h.iter().map(|v| [v[0].conj(), v[1].conj()]).collect();
        let rhs = load_from_boundary(&self.mesh, &h_bar);
        let (phi_bar, residual) = sys.solve(&rhs)?;
        Ok(AdjointSolution {
            phi_bar,
            datum: h.to_vec(),
            omega: self.waves.omega,
            material_snapshot: sys.material_snapshot,
            residual,
        })
    }

    /// Fréchet derivative applied to a perturbation: solves
    /// `a_q(w, v) − ∫ Bw·v̄ = −a_{δq−1}(u, v)` and returns the trace of w.
    pub fn derivative_apply(
        &self,
        sys: &FemSystem,
        base: &FieldSolution,
        dq: (&[f64], &[f64], &[f64]),
    ) -> Result<Vec<[C; 2]>> {
        let rhs = derivative_volume_load(&self.mesh, &self.medium, self.waves.omega, dq, &base.u);
        let (w, _res) = sys.solve(&rhs)?;
        Ok(trace_of(&self.mesh, &w))
    }

    /// Incident field sampled at the mesh nodes.
    pub fn incident_on_nodes(&self, incidence: Incidence) -> Vec<C> {
        let vals = incident_field(incidence, &self.waves, &self.mesh.nodes);
        let mut out = Vec::with_capacity(2 * vals.len());
        for v in vals {
            out.push(v[0]);
            out.push(v[1]);
        }
        out
    }

    /// L²(Γ_R) inner product on the boundary grid (trapezoidal).
    pub fn boundary_inner(&self, a: &[[C; 2]], b: &[[C; 2]]) -> C {
        boundary_inner(boundary_weight(&self.mesh), a, b)
    }

    pub fn boundary_norm(&self, a: &[[C; 2]]) -> f64 {
        let w = boundary_weight(&self.mesh);
        (a.iter()
            .map(|v| v[0].norm_sqr() + v[1].norm_sqr())
            .sum::<f64>()
            * w)
            .sqrt()
    }
}

/// ⟨a, b⟩ = weight · Σ_m a_m · conj(b_m).
pub fn boundary_inner(weight: f64, a: &[[C; 2]], b: &[[C; 2]]) -> C {
    let mut acc = C::new(0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        acc += x[0] * y[0].conj() + x[1] * y[1].conj();
    }
    weight * acc
}

/// Real pairing for phaseless (scalar) boundary data.
pub fn boundary_inner_scalar(weight: f64, a: &[f64], b: &[f64]) -> f64 {
    weight * a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>()
}

/// Solved total displacement field.
#[derive(Debug, Clone)]
pub struct FieldSolution {
    /// Nodal values, dof = 2·node + component.
    pub u: Vec<C>,
    /// Restriction to the boundary ring (exact).
    pub trace: Vec<[C; 2]>,
    pub omega: f64,
    pub incidence: Incidence,
    pub material_snapshot: u64,
    /// Relative linear-system residual of the solve.
    pub residual: f64,
}

/// The near-field measurement N(q) = u|_{Γ_R}.
pub fn near_field(solution: &FieldSolution) -> &[[C; 2]] {
    &solution.trace
}

/// Pointwise squared magnitude of a boundary trace: F(q) = |u|².
pub fn phaseless(trace: &[[C; 2]]) -> Vec<f64> {
    trace
        .iter()
        .map(|v| v[0].norm_sqr() + v[1].norm_sqr())
        .collect()
}

/// Solved adjoint state. The linear solve produces φ̄; the adjoint field
/// itself is the conjugate.
#[derive(Debug, Clone)]
pub struct AdjointSolution {
    pub phi_bar: Vec<C>,
    pub datum: Vec<[C; 2]>,
    pub omega: f64,
    pub material_snapshot: u64,
    pub residual: f64,
}

impl AdjointSolution {
    pub fn phi(&self) -> Vec<C> {
        self.phi_bar.iter().map(|z| z.conj()).collect()
    }
}
