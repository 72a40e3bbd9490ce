//! P1 vector-element assembly of the variational form
//! `a_q(u,v) − ∫_{Γ_R} (Bu)·v̄ ds` on a ring mesh.
//!
//! Element integrals use the exact closed forms for affine elements with
//! linearly interpolated coefficients; the same quadrature backs the
//! derivative volume loads and the gradient integrands, which is what makes
//! the discrete adjoint identity hold to round-off.

use super::material::MaterialField;
use super::mesh::DiskMesh;
use crate::dtn::{BackgroundMedium, DtnOperator, WaveNumbers};
use crate::linalg::{BlockFactor, BlockTridiag, CsrBlock};
use crate::{Error, Result};
use num_complex::Complex64;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, OnceLock};

type C = Complex64;

/// Geometry of one affine element: area and the constant basis gradients.
#[derive(Debug, Clone, Copy)]
struct ElemGeom {
    area: f64,
    /// ∇φ_i
    b: [[f64; 2]; 3],
}

fn elem_geom(mesh: &DiskMesh, tri: [u32; 3]) -> ElemGeom {
    let p = [
        mesh.nodes[tri[0] as usize],
        mesh.nodes[tri[1] as usize],
        mesh.nodes[tri[2] as usize],
    ];
    let two_a = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1])
        - (p[1][1] - p[0][1]) * (p[2][0] - p[0][0]);
    let rot = |v: [f64; 2]| [-v[1], v[0]];
    let e0 = rot([p[2][0] - p[1][0], p[2][1] - p[1][1]]);
    let e1 = rot([p[0][0] - p[2][0], p[0][1] - p[2][1]]);
    let e2 = rot([p[1][0] - p[0][0], p[1][1] - p[0][1]]);
    ElemGeom {
        area: 0.5 * two_a,
        b: [
            [e0[0] / two_a, e0[1] / two_a],
            [e1[0] / two_a, e1[1] / two_a],
            [e2[0] / two_a, e2[1] / two_a],
        ],
    }
}

/// ∫_e φ_i φ_j dx for unit-area scaling: multiply by `area`.
#[inline]
fn pair_product(i: usize, j: usize) -> f64 {
    if i == j {
        1.0 / 6.0
    } else {
        1.0 / 12.0
    }
}

/// ∫_e φ_i φ_j φ_k dx / area.
#[inline]
fn triple_product(i: usize, j: usize, k: usize) -> f64 {
    if i == j && j == k {
        1.0 / 10.0
    } else if i == j || j == k || i == k {
        1.0 / 30.0
    } else {
        1.0 / 60.0
    }
}

/// Which pieces of the volume form to include (used by tests and the
/// perturbation loads).
#[derive(Debug, Clone, Copy)]
pub struct VolumeParts {
    pub div: bool,
    pub strain: bool,
    pub mass: bool,
}

impl VolumeParts {
    pub fn all() -> Self {
        VolumeParts {
            div: true,
            strain: true,
            mass: true,
        }
    }
}

/// Local 6×6 (real) element matrix of the selected parts of `a_q` with
/// coefficient fields sampled at the element nodes.
fn element_matrix(
    geom: &ElemGeom,
    q_l: [f64; 3],
    q_m: [f64; 3],
    q_r: [f64; 3],
    medium: &BackgroundMedium,
    omega: f64,
    parts: VolumeParts,
) -> [[f64; 6]; 6] {
    let mut k = [[0.0f64; 6]; 6];
    let a = geom.area;
    let lam = medium.lambda0 * (1.0 + (q_l[0] + q_l[1] + q_l[2]) / 3.0);
    let mu = medium.mu0 * (1.0 + (q_m[0] + q_m[1] + q_m[2]) / 3.0);
    let rho_w2 = medium.rho0 * omega * omega;
    for i in 0..3 {
        for j in 0..3 {
            let bij = geom.b[i][0] * geom.b[j][0] + geom.b[i][1] * geom.b[j][1];
            // mass with linear density coefficient
            let mut mass_ij = 0.0;
            if parts.mass {
                mass_ij = pair_product(i, j);
                for (kk, qv) in q_r.iter().enumerate() {
                    mass_ij += qv * triple_product(i, j, kk);
                }
                mass_ij *= a;
            }
            for c_row in 0..2 {
                for c_col in 0..2 {
                    let mut v = 0.0;
                    if parts.div {
                        v += lam * a * geom.b[i][c_row] * geom.b[j][c_col];
                    }
                    if parts.strain {
                        let delta = if c_row == c_col { 1.0 } else { 0.0 };
                        v += mu * a * (bij * delta + geom.b[i][c_col] * geom.b[j][c_row]);
                    }
                    if parts.mass && c_row == c_col {
                        v -= rho_w2 * mass_ij;
                    }
                    k[2 * i + c_row][2 * j + c_col] = v;
                }
            }
        }
    }
    k
}

/// Assembled (and lazily factorized) system for one (q, ω) pair.
pub struct FemSystem {
    pub mesh: Arc<DiskMesh>,
    pub omega: f64,
    pub material_snapshot: u64,
    sys: BlockTridiag,
    factor: OnceLock<std::result::Result<BlockFactor, String>>,
    factor_count: AtomicUsize,
}

/// Boundary quadrature weight 2πR/P of the uniform trapezoidal rule.
pub fn boundary_weight(mesh: &DiskMesh) -> f64 {
    2.0 * std::f64::consts::PI * mesh.radius / mesh.boundary_points() as f64
}

/// Assembles `a_q − DtN` into ring-blocked storage.
pub fn assemble_system(
    mesh: &Arc<DiskMesh>,
    q: &MaterialField,
    medium: &BackgroundMedium,
    waves: &WaveNumbers,
    dtn: &DtnOperator,
) -> Result<FemSystem> {
    if q.num_nodes() != mesh.num_nodes() {
        return Err(Error::DimensionMismatch {
            what: "material field",
            expected: mesh.num_nodes(),
            got: q.num_nodes(),
        });
    }
    if dtn.boundary_points != mesh.boundary_points() {
        return Err(Error::DimensionMismatch {
            what: "DtN grid vs mesh boundary ring",
            expected: mesh.boundary_points(),
            got: dtn.boundary_points,
        });
    }
    if (dtn.waves.omega - waves.omega).abs() > 0.0 || dtn.medium != *medium {
        return Err(Error::InvalidArgument(
            "DtN operator was built for a different medium or frequency".into(),
        ));
    }

    let nrings = mesh.num_rings();
    let sizes: Vec<usize> = (0..nrings)
        .map(|r| 2 * (mesh.ring_offsets[r + 1] - mesh.ring_offsets[r]))
        .collect();

    // Per-element local matrices in element order, then a deterministic
    // sequential scatter into per-ring triplet buffers.
    let locals = crate::par::map_ordered(&mesh.triangles, |&tri| {
        let geom = elem_geom(mesh, tri);
        let pick = |f: &[f64]| [f[tri[0] as usize], f[tri[1] as usize], f[tri[2] as usize]];
        element_matrix(
            &geom,
            pick(&q.q_lambda),
            pick(&q.q_mu),
            pick(&q.q_rho),
            medium,
            waves.omega,
            VolumeParts::all(),
        )
    });

    let mut diag_trip: Vec<Vec<(u32, u32, C)>> = (0..nrings).map(|_| Vec::new()).collect();
    let mut upper_trip: Vec<Vec<(u32, u32, C)>> = (0..nrings - 1).map(|_| Vec::new()).collect();
    let mut lower_trip: Vec<Vec<(u32, u32, C)>> = (0..nrings - 1).map(|_| Vec::new()).collect();

    for (tri, local) in mesh.triangles.iter().zip(&locals) {
        let rings: [usize; 3] = [
            mesh.ring_of(tri[0] as usize),
            mesh.ring_of(tri[1] as usize),
            mesh.ring_of(tri[2] as usize),
        ];
        let local_dof = |v: usize, comp: usize| -> (usize, u32) {
            let ring = rings[v];
            let idx = tri[v] as usize - mesh.ring_offsets[ring];
            (ring, (2 * idx + comp) as u32)
        };
        for vi in 0..3 {
            for ci in 0..2 {
                let (ri, di) = local_dof(vi, ci);
                for vj in 0..3 {
                    for cj in 0..2 {
                        let (rj, dj) = local_dof(vj, cj);
                        let val = C::new(local[2 * vi + ci][2 * vj + cj], 0.0);
                        if ri == rj {
                            diag_trip[ri].push((di, dj, val));
                        } else if rj == ri + 1 {
                            upper_trip[ri].push((di, dj, val));
                        } else {
                            debug_assert_eq!(ri, rj + 1);
                            lower_trip[rj].push((di, dj, val));
                        }
                    }
                }
            }
        }
    }

    let diag: Vec<CsrBlock> = diag_trip
        .iter_mut()
        .enumerate()
        .map(|(r, t)| CsrBlock::from_triplets(sizes[r], sizes[r], t))
        .collect();
    let upper: Vec<CsrBlock> = upper_trip
        .iter_mut()
        .enumerate()
        .map(|(r, t)| CsrBlock::from_triplets(sizes[r], sizes[r + 1], t))
        .collect();
    let lower: Vec<CsrBlock> = lower_trip
        .iter_mut()
        .enumerate()
        .map(|(r, t)| CsrBlock::from_triplets(sizes[r + 1], sizes[r], t))
        .collect();

    // Boundary term −∫(Bu)·v̄ ds with the lumped trapezoidal pairing: a
    // dense block on the last ring only.
    let mut dense = dtn.boundary_matrix().clone();
    dense.scale(-boundary_weight(mesh));

    let sys = BlockTridiag {
        sizes,
        diag,
        upper,
        lower,
        dense_last: Some(dense),
    };
    Ok(FemSystem {
        mesh: mesh.clone(),
        omega: waves.omega,
        material_snapshot: q.snapshot_id(),
        sys,
        factor: OnceLock::new(),
        factor_count: AtomicUsize::new(0),
    })
}

impl FemSystem {
    pub fn dof(&self) -> usize {
        self.sys.dof()
    }

    /// K·x for residual checks and tests.
    pub fn matvec(&self, x: &[C]) -> Vec<C> {
        self.sys.matvec(x)
    }

    /// Number of factorizations performed (the forward/adjoint pair must
    /// report 1).
    pub fn factor_count(&self) -> usize {
        self.factor_count.load(Ordering::Relaxed)
    }

    fn factorized(&self) -> Result<&BlockFactor> {
        let slot = self.factor.get_or_init(|| {
            self.factor_count.fetch_add(1, Ordering::Relaxed);
            self.sys.factor().map_err(|e| e.to_string())
        });
        match slot {
            Ok(f) => Ok(f),
            Err(msg) => Err(Error::SolverFailure {
                omega: self.omega,
                snapshot: self.material_snapshot,
                detail: msg.clone(),
            }),
        }
    }

    /// Direct solve with iterative refinement; fails loudly if the relative
    /// residual cannot be pushed below 1e-10.
    pub fn solve(&self, rhs: &[C]) -> Result<(Vec<C>, f64)> {
        let f = self.factorized()?;
        let bnorm = crate::linalg::vec_norm(rhs);
        if bnorm == 0.0 {
            return Ok((vec![C::new(0.0, 0.0); rhs.len()], 0.0));
        }
        let mut x = f.solve(&self.sys, rhs);
        let mut rel = 0.0;
        for round in 0..3 {
            let ax = self.sys.matvec(&x);
            let r: Vec<C> = rhs.iter().zip(&ax).map(|(b, a)| b - a).collect();
            rel = crate::linalg::vec_norm(&r) / bnorm;
            if rel <= 1e-12 || round == 2 {
                break;
            }
            let dx = f.solve(&self.sys, &r);
            for (xi, di) in x.iter_mut().zip(dx) {
                *xi += di;
            }
        }
        if rel > 1e-10 {
            return Err(Error::SolverFailure {
                omega: self.omega,
                snapshot: self.material_snapshot,
                detail: format!("relative residual {rel:.3e} after refinement"),
            });
        }
        Ok((x, rel))
    }
}

/// Restriction of a nodal field to the boundary ring (exact).
pub fn trace_of(mesh: &DiskMesh, u: &[C]) -> Vec<[C; 2]> {
    mesh.boundary_ring
        .iter()
        .map(|&n| [u[2 * n as usize], u[2 * n as usize + 1]])
        .collect()
}

/// Load functional of a boundary density: (g, v)_{Γ_R} with the lumped
/// trapezoidal rule, i.e. weight·g at each boundary node.
pub fn load_from_boundary(mesh: &DiskMesh, g: &[[C; 2]]) -> Vec<C> {
    let w = boundary_weight(mesh);
    let mut load = vec![C::new(0.0, 0.0); 2 * mesh.num_nodes()];
    for (m, &n) in mesh.boundary_ring.iter().enumerate() {
        load[2 * n as usize] = w * g[m][0];
        load[2 * n as usize + 1] = w * g[m][1];
    }
    load
}

/// Applies the selected volume parts of `a_q` to a nodal field without
/// assembling a matrix. Test/diagnostic path.
pub fn volume_part_matvec(
    mesh: &DiskMesh,
    q: &MaterialField,
    medium: &BackgroundMedium,
    omega: f64,
    parts: VolumeParts,
    x: &[C],
) -> Vec<C> {
    let mut y = vec![C::new(0.0, 0.0); 2 * mesh.num_nodes()];
    for &tri in &mesh.triangles {
        let geom = elem_geom(mesh, tri);
        let pick = |f: &[f64]| [f[tri[0] as usize], f[tri[1] as usize], f[tri[2] as usize]];
        let k = element_matrix(
            &geom,
            pick(&q.q_lambda),
            pick(&q.q_mu),
            pick(&q.q_rho),
            medium,
            omega,
            parts,
        );
        for vi in 0..3 {
            for ci in 0..2 {
                let gi = 2 * tri[vi] as usize + ci;
                let mut acc = C::new(0.0, 0.0);
                for vj in 0..3 {
                    for cj in 0..2 {
                        let gj = 2 * tri[vj] as usize + cj;
                        acc += k[2 * vi + ci][2 * vj + cj] * x[gj];
                    }
                }
                y[gi] += acc;
            }
        }
    }
    y
}

/// Volume load `v ↦ −a_{δq−1}(u, v)`: the derivative problem right-hand
/// side, with perturbation coefficients λ0·δq_λ, 2μ0·δq_μ, −ρ0·ω²·δq_ρ.
pub fn derivative_volume_load(
    mesh: &DiskMesh,
    medium: &BackgroundMedium,
    omega: f64,
    dq: (&[f64], &[f64], &[f64]),
    u: &[C],
) -> Vec<C> {
    let contributions = crate::par::map_ordered(&mesh.triangles, |&tri| {
        let geom = elem_geom(mesh, tri);
        let pick3 = |f: &[f64]| [f[tri[0] as usize], f[tri[1] as usize], f[tri[2] as usize]];
        let dql = pick3(dq.0);
        let dqm = pick3(dq.1);
        let dqr = pick3(dq.2);
        let uu: [[C; 2]; 3] = [
            [u[2 * tri[0] as usize], u[2 * tri[0] as usize + 1]],
            [u[2 * tri[1] as usize], u[2 * tri[1] as usize + 1]],
            [u[2 * tri[2] as usize], u[2 * tri[2] as usize + 1]],
        ];
        let (div_u, e_u) = element_div_strain(&geom, &uu);
        let a = geom.area;
        let lam_bar = medium.lambda0 * (dql[0] + dql[1] + dql[2]) / 3.0;
        let mu_bar = medium.mu0 * (dqm[0] + dqm[1] + dqm[2]) / 3.0;
        let rho_w2 = medium.rho0 * omega * omega;
        let mut local = [[C::new(0.0, 0.0); 2]; 3];
        for j in 0..3 {
            for c in 0..2 {
                // λ term: −λ0 δq̄_λ A div(u) b_j[c]
                let mut v = -lam_bar * a * div_u * geom.b[j][c];
                // strain term: −2 μ0 δq̄_μ A (E(u)·b_j)[c]
                let eb = e_u[c][0] * geom.b[j][0] + e_u[c][1] * geom.b[j][1];
                v -= 2.0 * mu_bar * a * eb;
                // mass term: +ρ0 ω² Σ_i u[(i,c)] Σ_k δq_ρ[k] ∫φ_iφ_jφ_k
                let mut mass = C::new(0.0, 0.0);
                for i in 0..3 {
                    let mut w = 0.0;
                    for (kk, qv) in dqr.iter().enumerate() {
                        w += qv * triple_product(i, j, kk);
                    }
                    mass += uu[i][c] * (w * a);
                }
                v += rho_w2 * mass;
                local[j][c] = v;
            }
        }
        local
    });
    let mut load = vec![C::new(0.0, 0.0); 2 * mesh.num_nodes()];
    for (tri, local) in mesh.triangles.iter().zip(&contributions) {
        for j in 0..3 {
            for c in 0..2 {
                load[2 * tri[j] as usize + c] += local[j][c];
            }
        }
    }
    load
}

fn element_div_strain(geom: &ElemGeom, uu: &[[C; 2]; 3]) -> (C, [[C; 2]; 2]) {
    let mut div = C::new(0.0, 0.0);
    let mut grad = [[C::new(0.0, 0.0); 2]; 2];
    for i in 0..3 {
        for a in 0..2 {
            for bdir in 0..2 {
                grad[a][bdir] += uu[i][a] * geom.b[i][bdir];
            }
        }
        div += uu[i][0] * geom.b[i][0] + uu[i][1] * geom.b[i][1];
    }
    let strain = [
        [grad[0][0], 0.5 * (grad[0][1] + grad[1][0])],
        [0.5 * (grad[0][1] + grad[1][0]), grad[1][1]],
    ];
    (div, strain)
}

/// Raw (mass-weighted) adjoint-gradient fields: for each node k the three
/// components of ∫ over adjacent elements of
/// {−λ0 div(u)div(φ̄), −2μ0 E(u):E(φ̄), ρ0ω² u·φ̄}·φ_k dx,
/// evaluated with the same element quadrature as the assembly. Dividing by
/// the lumped masses gives the L²-projected nodal gradient field.
pub fn gradient_raw(
    mesh: &DiskMesh,
    medium: &BackgroundMedium,
    omega: f64,
    u: &[C],
    phi_bar: &[C],
) -> [Vec<C>; 3] {
    let contributions = crate::par::map_ordered(&mesh.triangles, |&tri| {
        let geom = elem_geom(mesh, tri);
        let take = |f: &[C], v: usize| [f[2 * tri[v] as usize], f[2 * tri[v] as usize + 1]];
        let uu = [take(u, 0), take(u, 1), take(u, 2)];
        let pp = [take(phi_bar, 0), take(phi_bar, 1), take(phi_bar, 2)];
        let (div_u, e_u) = element_div_strain(&geom, &uu);
        let (div_p, e_p) = element_div_strain(&geom, &pp);
        let a3 = geom.area / 3.0;
        let g_lam = -medium.lambda0 * div_u * div_p * a3;
        let mut ee = C::new(0.0, 0.0);
        for r in 0..2 {
            for c in 0..2 {
                ee += e_u[r][c] * e_p[r][c];
            }
        }
        let g_mu = -2.0 * medium.mu0 * ee * a3;
        let rho_w2 = medium.rho0 * omega * omega;
        let mut g_rho = [C::new(0.0, 0.0); 3];
        for k in 0..3 {
            let mut acc = C::new(0.0, 0.0);
            for i in 0..3 {
                for j in 0..3 {
                    let dot = uu[i][0] * pp[j][0] + uu[i][1] * pp[j][1];
                    acc += dot * triple_product(i, j, k);
                }
            }
            g_rho[k] = rho_w2 * acc * geom.area;
        }
        (g_lam, g_mu, g_rho)
    });
    let n = mesh.num_nodes();
    let mut out = [
        vec![C::new(0.0, 0.0); n],
        vec![C::new(0.0, 0.0); n],
        vec![C::new(0.0, 0.0); n],
    ];
    for (tri, (g_lam, g_mu, g_rho)) in mesh.triangles.iter().zip(&contributions) {
        for k in 0..3 {
            let node = tri[k] as usize;
            out[0][node] += *g_lam;
            out[1][node] += *g_mu;
            out[2][node] += g_rho[k];
        }
    }
    out
}
