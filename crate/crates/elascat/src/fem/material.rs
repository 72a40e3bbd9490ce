//! Nodal material perturbation fields (q_λ, q_μ, q_ρ).

use super::mesh::DiskMesh;

/// Lower bound enforced on every field value: q > −1 + ε keeps the
/// perturbed coefficients strictly positive.
pub const LOWER_BOUND: f64 = -1.0 + 1e-6;

/// Piecewise-linear nodal samples of the three perturbations. Values are
/// clamped to the admissible set on every construction and update, and the
/// support mask keeps them zero in the annulus next to `Γ_R`.
#[derive(Debug, Clone, PartialEq)]
pub struct MaterialField {
    pub q_lambda: Vec<f64>,
    pub q_mu: Vec<f64>,
    pub q_rho: Vec<f64>,
    snapshot: u64,
}

/// Real nodal update produced by one Landweber step (already step-sized).
#[derive(Debug, Clone)]
pub struct MaterialIncrement {
    pub d_lambda: Vec<f64>,
    pub d_mu: Vec<f64>,
    pub d_rho: Vec<f64>,
}

impl MaterialField {
    pub fn zeros(num_nodes: usize) -> Self {
        let mut f = MaterialField {
            q_lambda: vec![0.0; num_nodes],
            q_mu: vec![0.0; num_nodes],
            q_rho: vec![0.0; num_nodes],
            snapshot: 0,
        };
        f.refresh_snapshot();
        f
    }

    /// Builds from raw nodal samples, applying the support mask and clamp.
    pub fn from_samples(
        mesh: &DiskMesh,
        q_lambda: Vec<f64>,
        q_mu: Vec<f64>,
        q_rho: Vec<f64>,
    ) -> Self {
        let mask = mesh.support_mask();
        let apply = |mut v: Vec<f64>| -> Vec<f64> {
            for (x, m) in v.iter_mut().zip(&mask) {
                *x = (*x * m).max(LOWER_BOUND);
            }
            v
        };
        let mut f = MaterialField {
            q_lambda: apply(q_lambda),
            q_mu: apply(q_mu),
            q_rho: apply(q_rho),
            snapshot: 0,
        };
        f.refresh_snapshot();
        f
    }

    pub fn num_nodes(&self) -> usize {
        self.q_lambda.len()
    }

    /// Identifier of the current values, used in solver diagnostics.
    pub fn snapshot_id(&self) -> u64 {
        self.snapshot
    }

    pub fn component(&self, c: usize) -> &[f64] {
        match c {
            0 => &self.q_lambda,
            1 => &self.q_mu,
            _ => &self.q_rho,
        }
    }

    /// q += mask·increment, then clamp. The mask multiplies the update, so
    /// fields never grow support toward the boundary.
    pub fn apply_increment(&mut self, inc: &MaterialIncrement, mask: &[f64]) {
        debug_assert_eq!(inc.d_lambda.len(), self.q_lambda.len());
        for (c, d) in [
            (&mut self.q_lambda, &inc.d_lambda),
            (&mut self.q_mu, &inc.d_mu),
            (&mut self.q_rho, &inc.d_rho),
        ] {
            for ((q, &dv), &m) in c.iter_mut().zip(d.iter()).zip(mask) {
                *q = (*q + m * dv).max(LOWER_BOUND);
            }
        }
        self.refresh_snapshot();
    }

    fn refresh_snapshot(&mut self) {
        let mut h = 0xcbf29ce484222325u64;
        let mut eat = |v: &[f64]| {
            for x in v {
                h ^= x.to_bits();
                h = h.wrapping_mul(0x100000001b3);
            }
        };
        eat(&self.q_lambda);
        eat(&self.q_mu);
        eat(&self.q_rho);
        self.snapshot = h;
    }
}
