//! Concentric-ring triangulations of the disk `B_R`.
//!
//! Ring `j` of `⌈P·j/J⌉` nodes sits at radius `R·j/J`; the outermost ring
//! is exactly the `P` uniform boundary angles `θ_m = 2πm/P`, matching the
//! DtN grid. Nodes are stored ring by ring, so every triangle couples at
//! most two adjacent rings and the assembled system is block tridiagonal.

use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct DiskMesh {
    pub radius: f64,
    pub refinement_level: u32,
    /// Node coordinates, ring-major starting with the center node.
    pub nodes: Vec<[f64; 2]>,
    /// CCW-oriented node index triples.
    pub triangles: Vec<[u32; 3]>,
    /// Node indices on `Γ_R` in angular order; length equals the DtN grid.
    pub boundary_ring: Vec<u32>,
    /// First node index of each ring (ring 0 is the center); one past the
    /// end appended.
    pub ring_offsets: Vec<usize>,
    /// Lumped P1 masses Σ_e A_e/3 per node.
    pub lumped_mass: Vec<f64>,
}

/// Grid size used at a given mesh refinement level.
pub fn boundary_points_for_level(level: u32) -> usize {
    64usize << level
}

fn ring_stagger(j: usize, rings: usize) -> f64 {
    if (rings - j) % 2 == 0 {
        0.0
    } else {
        0.5
    }
}

/// Builds the ring triangulation with `J = (P/4)·2^level` rings.
pub fn build_disk_mesh(radius: f64, refinement_level: u32, boundary_points: usize) -> Result<DiskMesh> {
    let p = boundary_points;
    if !p.is_power_of_two() || p < 16 {
        return Err(Error::InvalidArgument(format!(
            "boundary point count must be a power of two >= 16, got {p}"
        )));
    }
    if !(radius > 0.0) {
        return Err(Error::Domain(format!("radius must be positive, got {radius}")));
    }
    let rings = (p / 4) << refinement_level;

    let mut nodes: Vec<[f64; 2]> = Vec::new();
    let mut ring_offsets: Vec<usize> = Vec::new();
    ring_offsets.push(0);
    nodes.push([0.0, 0.0]);
    ring_offsets.push(1);
    let mut ring_counts: Vec<usize> = vec![1];
    for j in 1..=rings {
        let n_j = if j == rings {
            p
        } else {
            ((p * j + rings - 1) / rings).max(4)
        };
        let r = radius * j as f64 / rings as f64;
        // Consecutive rings are mutually half-staggered; aligned rings
        // force full-spacing cross diagonals. Parity is anchored so the
        // boundary ring lands on the exact DtN angles.
        let offset = ring_stagger(j, rings);
        for m in 0..n_j {
            let th = 2.0 * std::f64::consts::PI * (m as f64 + offset) / n_j as f64;
            nodes.push([r * th.cos(), r * th.sin()]);
        }
        ring_counts.push(n_j);
        ring_offsets.push(nodes.len());
    }

    let mut triangles: Vec<[u32; 3]> = Vec::new();
    // Center fan.
    {
        let base = ring_offsets[1];
        let n1 = ring_counts[1];
        for k in 0..n1 {
            triangles.push([0, (base + k) as u32, (base + (k + 1) % n1) as u32]);
        }
    }
    // Ring-to-ring bridges. Each step creates the triangle whose new
    // diagonal is angularly shorter, which keeps cross edges near half a
    // spacing instead of a full one.
    for j in 1..rings {
        let (ia, na) = (ring_offsets[j], ring_counts[j]);
        let (ib, nb) = (ring_offsets[j + 1], ring_counts[j + 1]);
        let off_a = ring_stagger(j, rings);
        let off_b = ring_stagger(j + 1, rings);
        let angle_a = |i: usize| (i as f64 + off_a) / na as f64;
        // Start the outer walk at the node best aligned with the first
        // inner node; otherwise the closing fan at the angular seam can
        // create a full-spacing diagonal.
        let mut k0 = 0usize;
        let mut best = f64::INFINITY;
        for k in 0..nb {
            let mut d = (k as f64 + off_b) / nb as f64 - angle_a(0);
            d -= d.round();
            if d.abs() < best {
                best = d.abs();
                k0 = k;
            }
        }
        let base = {
            let mut d = (k0 as f64 + off_b) / nb as f64 - angle_a(0);
            d -= d.round();
            angle_a(0) + d
        };
        let angle_b = |k: usize| base + k as f64 / nb as f64;
        let bnode = |k: usize| (ib + (k0 + k) % nb) as u32;
        let mut i = 0usize;
        let mut k = 0usize;
        while i < na || k < nb {
            let advance_outer = if k >= nb {
                false
            } else if i >= na {
                true
            } else {
                let d_outer = (angle_b(k + 1) - angle_a(i)).abs();
                let d_inner = (angle_a(i + 1) - angle_b(k)).abs();
                d_outer <= d_inner
            };
            if advance_outer {
                triangles.push([(ia + i % na) as u32, bnode(k), bnode(k + 1)]);
                k += 1;
            } else {
                triangles.push([(ia + i % na) as u32, bnode(k), (ia + (i + 1) % na) as u32]);
                i += 1;
            }
        }
    }

    let boundary_ring: Vec<u32> = (ring_offsets[rings]..ring_offsets[rings + 1])
        .map(|i| i as u32)
        .collect();
    debug_assert_eq!(boundary_ring.len(), p);

    let mut mesh = DiskMesh {
        radius,
        refinement_level,
        nodes,
        triangles,
        boundary_ring,
        ring_offsets,
        lumped_mass: Vec::new(),
    };
    mesh.lumped_mass = mesh.compute_lumped_mass();

    for (t, tri) in mesh.triangles.iter().enumerate() {
        if mesh.triangle_area(*tri) <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "degenerate triangle {t} in generated mesh (P = {p}, level = {refinement_level})"
            )));
        }
    }
    Ok(mesh)
}

impl DiskMesh {
    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_rings(&self) -> usize {
        self.ring_offsets.len() - 1
    }

    pub fn boundary_points(&self) -> usize {
        self.boundary_ring.len()
    }

    /// Ring index of a node (the center counts as ring 0).
    pub fn ring_of(&self, node: usize) -> usize {
        match self.ring_offsets.binary_search(&node) {
            Ok(r) => r.min(self.num_rings() - 1),
            Err(r) => r - 1,
        }
    }

    pub fn nodes_in_ring(&self, ring: usize) -> std::ops::Range<usize> {
        self.ring_offsets[ring]..self.ring_offsets[ring + 1]
    }

    pub fn triangle_area(&self, tri: [u32; 3]) -> f64 {
        let a = self.nodes[tri[0] as usize];
        let b = self.nodes[tri[1] as usize];
        let c = self.nodes[tri[2] as usize];
        0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))
    }

    pub fn total_area(&self) -> f64 {
        self.triangles
            .iter()
            .map(|&t| self.triangle_area(t))
            .sum()
    }

    pub fn max_element_diameter(&self) -> f64 {
        let mut best = 0.0f64;
        for &t in &self.triangles {
            for (u, v) in [(0, 1), (1, 2), (2, 0)] {
                let a = self.nodes[t[u] as usize];
                let b = self.nodes[t[v] as usize];
                let d = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
                best = best.max(d);
            }
        }
        best
    }

    fn compute_lumped_mass(&self) -> Vec<f64> {
        let mut m = vec![0.0f64; self.num_nodes()];
        for &t in &self.triangles {
            let a3 = self.triangle_area(t) / 3.0;
            for &n in &t {
                m[n as usize] += a3;
            }
        }
        m
    }

    /// Consistent-mass L² norm of a nodal scalar field.
    pub fn l2_norm(&self, field: &[f64]) -> f64 {
        assert_eq!(field.len(), self.num_nodes());
        let mut acc = 0.0f64;
        for &t in &self.triangles {
            let a = self.triangle_area(t);
            let f = [
                field[t[0] as usize],
                field[t[1] as usize],
                field[t[2] as usize],
            ];
            let s = f[0] + f[1] + f[2];
            acc += a / 12.0 * (s * s + f[0] * f[0] + f[1] * f[1] + f[2] * f[2]);
        }
        acc.max(0.0).sqrt()
    }

    /// Smooth radial cutoff that is 1 inside 0.8R, 0 beyond 0.9R; the
    /// material support stays strictly inside the disk.
    pub fn support_mask(&self) -> Vec<f64> {
        self.nodes
            .iter()
            .map(|&[x, y]| {
                let r = (x * x + y * y).sqrt() / self.radius;
                let t = (r - 0.8) / 0.1;
                if t <= 0.0 {
                    1.0
                } else if t >= 1.0 {
                    0.0
                } else {
                    1.0 - t * t * (3.0 - 2.0 * t)
                }
            })
            .collect()
    }

    pub fn write_nodes_csv<W: std::io::Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "id,x,y")?;
        for (i, n) in self.nodes.iter().enumerate() {
            writeln!(out, "{},{},{}", i, n[0], n[1])?;
        }
        Ok(())
    }

    pub fn write_triangles_csv<W: std::io::Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "n1,n2,n3")?;
        for t in &self.triangles {
            writeln!(out, "{},{},{}", t[0], t[1], t[2])?;
        }
        Ok(())
    }

    /// Field export: one `x,y,value` row per node.
    pub fn write_field_csv<W: std::io::Write>(&self, field: &[f64], mut out: W) -> Result<()> {
        writeln!(out, "x,y,value")?;
        for (n, v) in self.nodes.iter().zip(field) {
            writeln!(out, "{},{},{}", n[0], n[1], v)?;
        }
        Ok(())
    }
}
