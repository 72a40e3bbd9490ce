//! Complex dense kernels and the ring-blocked direct solver.
//!
//! The concentric-ring meshes produced by [`crate::fem::build_disk_mesh`]
//! couple each ring only to its neighbours, so the assembled system is
//! block tridiagonal with one dense block per ring (the DtN term densifies
//! only the outermost block). Factorization is a block Thomas sweep with
//! partially pivoted LU on each Schur-complemented diagonal block; only the
//! per-ring LU factors are stored, the off-diagonal coupling stays sparse.
//!
//! Real and imaginary parts live in separate arrays so the axpy inner loops
//! vectorize without shuffles.

use crate::{Error, Result};
use num_complex::Complex64;

/// Dense complex matrix, row major, split re/im storage.
#[derive(Debug, Clone)]
pub struct CMat {
    nr: usize,
    nc: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl CMat {
    pub fn zeros(nr: usize, nc: usize) -> Self {
        CMat {
            nr,
            nc,
            re: vec![0.0; nr * nc],
            im: vec![0.0; nr * nc],
        }
    }

    #[inline]
    pub fn nrows(&self) -> usize {
        self.nr
    }

    #[inline]
    pub fn ncols(&self) -> usize {
        self.nc
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        let k = i * self.nc + j;
        Complex64::new(self.re[k], self.im[k])
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        let k = i * self.nc + j;
        self.re[k] = v.re;
        self.im[k] = v.im;
    }

    #[inline]
    pub fn add_at(&mut self, i: usize, j: usize, v: Complex64) {
        let k = i * self.nc + j;
        self.re[k] += v.re;
        self.im[k] += v.im;
    }

    /// Multiplies every entry by a real factor.
    pub fn scale(&mut self, f: f64) {
        for v in self.re.iter_mut() {
            *v *= f;
        }
        for v in self.im.iter_mut() {
            *v *= f;
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        let nc = self.nc;
        let (lo, hi) = (a.min(b), a.max(b));
        let (head_re, tail_re) = self.re.split_at_mut(hi * nc);
        let (head_im, tail_im) = self.im.split_at_mut(hi * nc);
        head_re[lo * nc..lo * nc + nc].swap_with_slice(&mut tail_re[..nc]);
        head_im[lo * nc..lo * nc + nc].swap_with_slice(&mut tail_im[..nc]);
    }
}

/// y -= l * x  on split complex slices.
#[inline]
fn axpy_sub(yr: &mut [f64], yi: &mut [f64], xr: &[f64], xi: &[f64], lr: f64, li: f64) {
    for k in 0..yr.len() {
        let (ar, ai) = (xr[k], xi[k]);
        yr[k] -= lr * ar - li * ai;
        yi[k] -= lr * ai + li * ar;
    }
}

/// LU factors of one dense block, partial pivoting, stored packed.
#[derive(Debug, Clone)]
pub struct LuBlock {
    m: CMat,
    piv: Vec<u32>,
}

impl LuBlock {
    /// Factors `m` in place. Fails on a (numerically) zero pivot.
    pub fn factor(mut m: CMat) -> std::result::Result<Self, usize> {
        let n = m.nr;
        assert_eq!(m.nr, m.nc, "LU needs a square block");
        let mut piv = vec![0u32; n];
        let nc = m.nc;
        let mut col_scratch_re = vec![0.0f64; n];
        let mut col_scratch_im = vec![0.0f64; n];
        for k in 0..n {
            // Pivot search down column k.
            let mut best = k;
            let mut best_mag = -1.0f64;
            for i in k..n {
                let mag = m.re[i * nc + k].abs() + m.im[i * nc + k].abs();
                if mag > best_mag {
                    best_mag = mag;
                    best = i;
                }
            }
            if best_mag < 1e-280 {
                return Err(k);
            }
            piv[k] = best as u32;
            m.swap_rows(k, best);

            let d = m.get(k, k);
            let dinv = Complex64::new(1.0, 0.0) / d;
            // Stage the multipliers so the trailing update borrows cleanly.
            for i in k + 1..n {
                let l = m.get(i, k) * dinv;
                m.set(i, k, l);
                col_scratch_re[i] = l.re;
                col_scratch_im[i] = l.im;
            }
            let tail = k + 1;
            if tail >= n {
                continue;
            }
            let width = n - tail;
            let (pivot_re, rest_re) = m.re.split_at_mut(tail * nc);
            let (pivot_im, rest_im) = m.im.split_at_mut(tail * nc);
            let prow_re = &pivot_re[k * nc + tail..k * nc + n];
            let prow_im = &pivot_im[k * nc + tail..k * nc + n];
            let update = |row0: usize, rows_re: &mut [f64], rows_im: &mut [f64]| {
                for (r, (row_re, row_im)) in rows_re
                    .chunks_mut(nc)
                    .zip(rows_im.chunks_mut(nc))
                    .enumerate()
                {
                    let i = row0 + r;
                    axpy_sub(
                        &mut row_re[tail..n],
                        &mut row_im[tail..n],
                        prow_re,
                        prow_im,
                        col_scratch_re[i],
                        col_scratch_im[i],
                    );
                }
            };
            if width >= 96 {
                par_row_update(rest_re, rest_im, nc, tail, &update);
            } else {
                update(tail, rest_re, rest_im);
            }
        }
        Ok(LuBlock { m, piv })
    }

    pub fn dim(&self) -> usize {
        self.m.nr
    }

    /// Solves in place for one right-hand side.
    pub fn solve_vec(&self, b: &mut [Complex64]) {
        let n = self.m.nr;
        let nc = self.m.nc;
        debug_assert_eq!(b.len(), n);
        for k in 0..n {
            b.swap(k, self.piv[k] as usize);
        }
        // Forward: unit lower triangle.
        for k in 0..n {
            let xk = b[k];
            if xk == Complex64::new(0.0, 0.0) {
                continue;
            }
            for i in k + 1..n {
                let l = Complex64::new(self.m.re[i * nc + k], self.m.im[i * nc + k]);
                b[i] -= l * xk;
            }
        }
        // Backward.
        for k in (0..n).rev() {
            let d = Complex64::new(self.m.re[k * nc + k], self.m.im[k * nc + k]);
            let xk = b[k] / d;
            b[k] = xk;
            for i in 0..k {
                let u = Complex64::new(self.m.re[i * nc + k], self.m.im[i * nc + k]);
                b[i] -= u * xk;
            }
        }
    }

    /// Solves for a dense multi-column right-hand side, panel-parallel.
    pub fn solve_multi(&self, b: &CMat) -> CMat {
        let n = self.m.nr;
        assert_eq!(b.nr, n);
        let m = b.nc;
        let panel = 48usize;
        let panels = crate::par::map_index_chunks(m, panel, |c0, c1| {
            let w = c1 - c0;
            // Gather panel into contiguous row-major scratch.
            let mut sre = vec![0.0f64; n * w];
            let mut sim = vec![0.0f64; n * w];
            for i in 0..n {
                let src = i * b.nc + c0;
                sre[i * w..(i + 1) * w].copy_from_slice(&b.re[src..src + w]);
                sim[i * w..(i + 1) * w].copy_from_slice(&b.im[src..src + w]);
            }
            self.substitute_panel(&mut sre, &mut sim, w);
            (sre, sim)
        });
        let mut out = CMat::zeros(n, m);
        let mut c0 = 0usize;
        for (sre, sim) in panels {
            let w = sre.len() / n;
            for i in 0..n {
                let dst = i * m + c0;
                out.re[dst..dst + w].copy_from_slice(&sre[i * w..(i + 1) * w]);
                out.im[dst..dst + w].copy_from_slice(&sim[i * w..(i + 1) * w]);
            }
            c0 += w;
        }
        out
    }

    fn substitute_panel(&self, sre: &mut [f64], sim: &mut [f64], w: usize) {
        let n = self.m.nr;
        let nc = self.m.nc;
        for k in 0..n {
            let p = self.piv[k] as usize;
            if p != k {
                let (a, b) = if k < p { (k, p) } else { (p, k) };
                let (head_re, tail_re) = sre.split_at_mut(b * w);
                let (head_im, tail_im) = sim.split_at_mut(b * w);
                head_re[a * w..a * w + w].swap_with_slice(&mut tail_re[..w]);
                head_im[a * w..a * w + w].swap_with_slice(&mut tail_im[..w]);
            }
        }
        for k in 0..n {
            let (done_re, todo_re) = sre.split_at_mut((k + 1) * w);
            let (done_im, todo_im) = sim.split_at_mut((k + 1) * w);
            let krow_re = &done_re[k * w..];
            let krow_im = &done_im[k * w..];
            for (r, (row_re, row_im)) in todo_re
                .chunks_mut(w)
                .zip(todo_im.chunks_mut(w))
                .enumerate()
            {
                let i = k + 1 + r;
                let lk = i * nc + k;
                axpy_sub(row_re, row_im, krow_re, krow_im, self.m.re[lk], self.m.im[lk]);
            }
        }
        for k in (0..n).rev() {
            let d = Complex64::new(self.m.re[k * nc + k], self.m.im[k * nc + k]);
            let dinv = Complex64::new(1.0, 0.0) / d;
            {
                let row_re = &mut sre[k * w..(k + 1) * w];
                let row_im = &mut sim[k * w..(k + 1) * w];
                for t in 0..w {
                    let v = Complex64::new(row_re[t], row_im[t]) * dinv;
                    row_re[t] = v.re;
                    row_im[t] = v.im;
                }
            }
            let (todo_re, done_re) = sre.split_at_mut(k * w);
            let (todo_im, done_im) = sim.split_at_mut(k * w);
            let krow_re = &done_re[..w];
            let krow_im = &done_im[..w];
            for (i, (row_re, row_im)) in todo_re
                .chunks_mut(w)
                .zip(todo_im.chunks_mut(w))
                .enumerate()
            {
                let uk = i * nc + k;
                axpy_sub(row_re, row_im, krow_re, krow_im, self.m.re[uk], self.m.im[uk]);
            }
        }
    }
}

#[cfg(feature = "parallel")]
fn par_row_update<F>(rest_re: &mut [f64], rest_im: &mut [f64], nc: usize, row0: usize, f: &F)
where
    F: Fn(usize, &mut [f64], &mut [f64]) + Sync,
{
    use rayon::prelude::*;
    let rows_per_chunk = 16usize;
    let chunk = rows_per_chunk * nc;
    rest_re
        .par_chunks_mut(chunk)
        .zip(rest_im.par_chunks_mut(chunk))
        .enumerate()
        .for_each(|(k, (cre, cim))| f(row0 + k * rows_per_chunk, cre, cim));
}

#[cfg(not(feature = "parallel"))]
fn par_row_update<F>(rest_re: &mut [f64], rest_im: &mut [f64], _nc: usize, row0: usize, f: &F)
where
    F: Fn(usize, &mut [f64], &mut [f64]),
{
    f(row0, rest_re, rest_im);
}

/// Sparse complex block in CSR form.
#[derive(Debug, Clone)]
pub struct CsrBlock {
    nr: usize,
    nc: usize,
    row_ptr: Vec<u32>,
    cols: Vec<u32>,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl CsrBlock {
    /// Builds from triplets; duplicates are summed. Consumes the buffer.
    pub fn from_triplets(nr: usize, nc: usize, trip: &mut Vec<(u32, u32, Complex64)>) -> Self {
        trip.sort_unstable_by_key(|&(r, c, _)| ((r as u64) << 32) | c as u64);
        let mut rows = Vec::with_capacity(trip.len());
        let mut cols = Vec::with_capacity(trip.len());
        let mut re = Vec::with_capacity(trip.len());
        let mut im = Vec::with_capacity(trip.len());
        for &(r, c, v) in trip.iter() {
            debug_assert!((r as usize) < nr && (c as usize) < nc);
            if rows.last() == Some(&r) && cols.last() == Some(&c) {
                let k = cols.len() - 1;
                re[k] += v.re;
                im[k] += v.im;
            } else {
                rows.push(r);
                cols.push(c);
                re.push(v.re);
                im.push(v.im);
            }
        }
        let mut row_ptr = vec![0u32; nr + 1];
        for &r in &rows {
            row_ptr[r as usize + 1] += 1;
        }
        for r in 0..nr {
            row_ptr[r + 1] += row_ptr[r];
        }
        trip.clear();
        CsrBlock {
            nr,
            nc,
            row_ptr,
            cols,
            re,
            im,
        }
    }

    pub fn nrows(&self) -> usize {
        self.nr
    }

    pub fn ncols(&self) -> usize {
        self.nc
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    /// y += A·x
    pub fn matvec_add(&self, x: &[Complex64], y: &mut [Complex64]) {
        debug_assert_eq!(x.len(), self.nc);
        debug_assert_eq!(y.len(), self.nr);
        for r in 0..self.nr {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in self.row_ptr[r] as usize..self.row_ptr[r + 1] as usize {
                acc += Complex64::new(self.re[k], self.im[k]) * x[self.cols[k] as usize];
            }
            y[r] += acc;
        }
    }

    /// d += A, densified.
    pub fn add_into_dense(&self, d: &mut CMat) {
        assert_eq!(d.nr, self.nr);
        assert_eq!(d.nc, self.nc);
        for r in 0..self.nr {
            for k in self.row_ptr[r] as usize..self.row_ptr[r + 1] as usize {
                let idx = r * d.nc + self.cols[k] as usize;
                d.re[idx] += self.re[k];
                d.im[idx] += self.im[k];
            }
        }
    }

    pub fn to_dense(&self) -> CMat {
        let mut d = CMat::zeros(self.nr, self.nc);
        self.add_into_dense(&mut d);
        d
    }

    /// s -= A·t (sparse × dense), parallel over row chunks of `s`.
    pub fn dense_product_sub(&self, t: &CMat, s: &mut CMat) {
        assert_eq!(self.nc, t.nr);
        assert_eq!(s.nr, self.nr);
        assert_eq!(s.nc, t.nc);
        let w = s.nc;
        let rows_per_chunk = 8usize;
        let chunk = rows_per_chunk * w;
        let row_ptr = &self.row_ptr;
        let cols = &self.cols;
        let are = &self.re;
        let aim = &self.im;
        // Split borrows: iterate the two planes in lockstep.
        let s_nc = s.nc;
        let sre = &mut s.re;
        let sim = &mut s.im;
        let body = |r0: usize, cre: &mut [f64], cim: &mut [f64]| {
            for (off, (row_re, row_im)) in
                cre.chunks_mut(s_nc).zip(cim.chunks_mut(s_nc)).enumerate()
            {
                let r = r0 + off;
                for k in row_ptr[r] as usize..row_ptr[r + 1] as usize {
                    let c = cols[k] as usize;
                    axpy_sub(
                        row_re,
                        row_im,
                        &t.re[c * w..c * w + w],
                        &t.im[c * w..c * w + w],
                        are[k],
                        aim[k],
                    );
                }
            }
        };
        par_plane_chunks(sre, sim, chunk, rows_per_chunk, &body);
    }
}

#[cfg(feature = "parallel")]
fn par_plane_chunks<F>(re: &mut [f64], im: &mut [f64], chunk: usize, rows_per_chunk: usize, f: &F)
where
    F: Fn(usize, &mut [f64], &mut [f64]) + Sync,
{
    use rayon::prelude::*;
    re.par_chunks_mut(chunk)
        .zip(im.par_chunks_mut(chunk))
        .enumerate()
        .for_each(|(k, (cre, cim))| f(k * rows_per_chunk, cre, cim));
}

#[cfg(not(feature = "parallel"))]
fn par_plane_chunks<F>(re: &mut [f64], im: &mut [f64], _chunk: usize, _rows_per_chunk: usize, f: &F)
where
    F: Fn(usize, &mut [f64], &mut [f64]),
{
    f(0, re, im);
}

/// Block-tridiagonal complex system in ring order.
#[derive(Debug, Clone)]
pub struct BlockTridiag {
    /// Degrees of freedom per ring.
    pub sizes: Vec<usize>,
    /// Diagonal blocks D_j, sparse.
    pub diag: Vec<CsrBlock>,
    /// Super-diagonal blocks E_j (ring j to ring j+1).
    pub upper: Vec<CsrBlock>,
    /// Sub-diagonal blocks C_j (ring j+1 to ring j).
    pub lower: Vec<CsrBlock>,
    /// Dense addition to the last diagonal block (the DtN boundary term).
    pub dense_last: Option<CMat>,
}

impl BlockTridiag {
    pub fn dof(&self) -> usize {
        self.sizes.iter().sum()
    }

    fn offsets(&self) -> Vec<usize> {
        let mut off = Vec::with_capacity(self.sizes.len() + 1);
        let mut acc = 0;
        for &s in &self.sizes {
            off.push(acc);
            acc += s;
        }
        off.push(acc);
        off
    }

    /// y = A·x
    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        let off = self.offsets();
        let nb = self.sizes.len();
        let mut y = vec![Complex64::new(0.0, 0.0); self.dof()];
        for j in 0..nb {
            let (a, b) = (off[j], off[j + 1]);
            // Work around aliasing: accumulate into a scratch then copy.
            let mut acc = vec![Complex64::new(0.0, 0.0); b - a];
            self.diag[j].matvec_add(&x[a..b], &mut acc);
            if j + 1 < nb {
                self.upper[j].matvec_add(&x[off[j + 1]..off[j + 2]], &mut acc);
            }
            if j > 0 {
                self.lower[j - 1].matvec_add(&x[off[j - 1]..off[j]], &mut acc);
            }
            y[a..b].copy_from_slice(&acc);
        }
        if let Some(d) = &self.dense_last {
            let a = off[nb - 1];
            let n = self.sizes[nb - 1];
            for r in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for c in 0..n {
                    acc += d.get(r, c) * x[a + c];
                }
                y[a + r] += acc;
            }
        }
        y
    }

    /// Block Thomas factorization. Returns the per-ring LU factors.
    pub fn factor(&self) -> Result<BlockFactor> {
        let nb = self.sizes.len();
        let mut lus: Vec<LuBlock> = Vec::with_capacity(nb);
        for j in 0..nb {
            let mut s = self.diag[j].to_dense();
            if j + 1 == nb {
                if let Some(d) = &self.dense_last {
                    assert_eq!(d.nr, s.nr);
                    for k in 0..s.re.len() {
                        s.re[k] += d.re[k];
                        s.im[k] += d.im[k];
                    }
                }
            }
            if j > 0 {
                // S_j = D_j - C_{j-1} · S_{j-1}^{-1} E_{j-1}
                let e = self.upper[j - 1].to_dense();
                let t = lus[j - 1].solve_multi(&e);
                self.lower[j - 1].dense_product_sub(&t, &mut s);
            }
            let lu = LuBlock::factor(s).map_err(|col| Error::SolverFailure {
                omega: f64::NAN,
                snapshot: 0,
                detail: format!("zero pivot in ring {j}, column {col}"),
            })?;
            lus.push(lu);
        }
        Ok(BlockFactor {
            sizes: self.sizes.clone(),
            lus,
        })
    }
}

/// Factorized block-tridiagonal operator.
pub struct BlockFactor {
    sizes: Vec<usize>,
    lus: Vec<LuBlock>,
}

impl BlockFactor {
    /// Solves A·x = b given the factorization and the original couplings.
    pub fn solve(&self, sys: &BlockTridiag, b: &[Complex64]) -> Vec<Complex64> {
        let nb = self.sizes.len();
        let off = sys.offsets();
        debug_assert_eq!(b.len(), *off.last().unwrap());

        // Forward sweep: z_j = b_j - C_{j-1} S_{j-1}^{-1} z_{j-1}
        let mut z: Vec<Vec<Complex64>> = Vec::with_capacity(nb);
        for j in 0..nb {
            let mut zj = b[off[j]..off[j + 1]].to_vec();
            if j > 0 {
                let mut w = z[j - 1].clone();
                self.lus[j - 1].solve_vec(&mut w);
                let mut corr = vec![Complex64::new(0.0, 0.0); zj.len()];
                sys.lower[j - 1].matvec_add(&w, &mut corr);
                for (t, c) in zj.iter_mut().zip(corr) {
                    *t -= c;
                }
            }
            z.push(zj);
        }
        // Backward sweep: x_j = S_j^{-1} (z_j - E_j x_{j+1})
        let mut x = vec![Complex64::new(0.0, 0.0); b.len()];
        for j in (0..nb).rev() {
            let mut rhs = std::mem::take(&mut z[j]);
            if j + 1 < nb {
                let mut corr = vec![Complex64::new(0.0, 0.0); rhs.len()];
                sys.upper[j].matvec_add(&x[off[j + 1]..off[j + 2]], &mut corr);
                for (t, c) in rhs.iter_mut().zip(corr) {
                    *t -= c;
                }
            }
            self.lus[j].solve_vec(&mut rhs);
            x[off[j]..off[j + 1]].copy_from_slice(&rhs);
        }
        x
    }
}

pub fn vec_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}
