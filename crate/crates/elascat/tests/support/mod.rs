//! Shared test oracles: an extended-precision (double-double) ascending
//! series for the Bessel/Hankel functions, analytic cylinder-mode
//! solutions of the background Navier equation, and the printed
//! closed-form DtN mode entries. These provide the independent reference
//! values the production paths are checked against.
#![allow(dead_code)]

use elascat::dtn::{BackgroundMedium, WaveNumbers};
use elascat::specfun::hankel1;
use num_complex::Complex64;

type C = Complex64;

// ---------------------------------------------------------------------
// double-double arithmetic
// ---------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
pub struct DD {
    pub hi: f64,
    pub lo: f64,
}

const DD_GAMMA: DD = DD {
    hi: 0.5772156649015329,
    lo: -4.942915152430645e-18,
};
const DD_PI: DD = DD {
    hi: 3.141592653589793,
    lo: 1.2246467991473532e-16,
};

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl DD {
    pub fn from(x: f64) -> DD {
        DD { hi: x, lo: 0.0 }
    }

    pub fn zero() -> DD {
        DD { hi: 0.0, lo: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn neg(self) -> DD {
        DD {
            hi: -self.hi,
            lo: -self.lo,
        }
    }

    pub fn add(self, o: DD) -> DD {
        let (s, e) = two_sum(self.hi, o.hi);
        let e = e + self.lo + o.lo;
        let (hi, lo) = quick_two_sum(s, e);
        DD { hi, lo }
    }

    pub fn sub(self, o: DD) -> DD {
        self.add(o.neg())
    }

    pub fn mul(self, o: DD) -> DD {
        let (p, e) = two_prod(self.hi, o.hi);
        let e = e + self.hi * o.lo + self.lo * o.hi;
        let (hi, lo) = quick_two_sum(p, e);
        DD { hi, lo }
    }

    pub fn mul_f64(self, x: f64) -> DD {
        let (p, e) = two_prod(self.hi, x);
        let e = e + self.lo * x;
        let (hi, lo) = quick_two_sum(p, e);
        DD { hi, lo }
    }

    pub fn div(self, o: DD) -> DD {
        let q1 = self.hi / o.hi;
        let r1 = self.sub(o.mul_f64(q1));
        let q2 = r1.hi / o.hi;
        let r2 = r1.sub(o.mul_f64(q2));
        let q3 = r2.hi / o.hi;
        let (s, e) = two_sum(q1, q2);
        let (hi, lo) = quick_two_sum(s, e + q3);
        DD { hi, lo }
    }

    pub fn div_f64(self, x: f64) -> DD {
        self.div(DD::from(x))
    }

    pub fn abs_hi(self) -> f64 {
        self.hi.abs()
    }
}

/// Complex number with double-double parts.
#[derive(Debug, Clone, Copy)]
pub struct DDC {
    pub re: DD,
    pub im: DD,
}

impl DDC {
    pub fn new(re: DD, im: DD) -> DDC {
        DDC { re, im }
    }

    pub fn to_c64(self) -> C {
        C::new(self.re.to_f64(), self.im.to_f64())
    }

    pub fn add(self, o: DDC) -> DDC {
        DDC::new(self.re.add(o.re), self.im.add(o.im))
    }

    pub fn sub(self, o: DDC) -> DDC {
        DDC::new(self.re.sub(o.re), self.im.sub(o.im))
    }

    pub fn mul(self, o: DDC) -> DDC {
        DDC::new(
            self.re.mul(o.re).sub(self.im.mul(o.im)),
            self.re.mul(o.im).add(self.im.mul(o.re)),
        )
    }

    pub fn div(self, o: DDC) -> DDC {
        // scale to dodge |o|² overflow at extreme magnitudes
        let s = o.re.abs_hi().max(o.im.abs_hi());
        let (a, b) = (self.re.div_f64(s), self.im.div_f64(s));
        let (c, d) = (o.re.div_f64(s), o.im.div_f64(s));
        let den = c.mul(c).add(d.mul(d));
        DDC::new(
            a.mul(c).add(b.mul(d)).div(den),
            b.mul(c).sub(a.mul(d)).div(den),
        )
    }
}

// ---------------------------------------------------------------------
// ascending-series Bessel oracle
// ---------------------------------------------------------------------

fn dd_factorial(n: u32) -> DD {
    let mut f = DD::from(1.0);
    for k in 2..=n as u64 {
        f = f.mul_f64(k as f64);
    }
    f
}

fn dd_harmonic(n: u32) -> DD {
    let mut h = DD::zero();
    for k in 1..=n as u64 {
        h = h.add(DD::from(1.0).div_f64(k as f64));
    }
    h
}

/// ψ(m) = −γ + Σ_{j=1}^{m−1} 1/j.
fn dd_digamma_int(m: u32) -> DD {
    dd_harmonic(m - 1).sub(DD_GAMMA)
}

fn dd_pow(base: DD, n: u32) -> DD {
    let mut p = DD::from(1.0);
    for _ in 0..n {
        p = p.mul(base);
    }
    p
}

/// J_n(t) by the ascending series, summed in double-double.
pub fn oracle_j(n: u32, t: f64) -> DD {
    let half = DD::from(t).div_f64(2.0);
    let x2 = half.mul(half); // (t/2)²
    let mut term = dd_pow(half, n).div(dd_factorial(n));
    let mut sum = term;
    for k in 1u32..400 {
        term = term
            .mul(x2)
            .div_f64(-(k as f64 * (n + k) as f64));
        sum = sum.add(term);
        if term.abs_hi() < 1e-40 * sum.abs_hi() + 1e-320 {
            break;
        }
    }
    sum
}

/// Y_n(t) by the standard logarithmic series, summed in double-double.
/// The ln(t/2) coefficient enters at f64 accuracy, which is far below the
/// oracle's comparison tolerance.
pub fn oracle_y(n: u32, t: f64) -> DD {
    let half = DD::from(t).div_f64(2.0);
    let x2 = half.mul(half);
    let log_term = DD::from((t / 2.0).ln());

    // (2/π) ln(t/2) J_n(t); γ enters through the ψ values below
    let s1 = log_term.mul(oracle_j(n, t)).mul_f64(2.0).div(DD_PI);

    // −(1/π) Σ_{k=0}^{n−1} (n−1−k)!/k! (t/2)^{2k−n}
    let mut s2 = DD::zero();
    if n > 0 {
        // (t/2)^{2k−n} starting at k = 0
        let mut pw = DD::from(1.0).div(dd_pow(half, n));
        for k in 0..n {
            let c = dd_factorial(n - 1 - k).div(dd_factorial(k));
            s2 = s2.add(c.mul(pw));
            pw = pw.mul(x2);
        }
        s2 = s2.div(DD_PI);
    }

    // −(1/π) Σ_k (−1)^k [ψ(k+1)+ψ(n+k+1)]/(k!(n+k)!) (t/2)^{2k+n}
    let mut term = dd_pow(half, n).div(dd_factorial(n)); // magnitude part
    let mut psi_a = dd_digamma_int(1);
    let mut psi_b = dd_digamma_int(n + 1);
    let mut s3 = term.mul(psi_a.add(psi_b));
    for k in 1u32..400 {
        term = term
            .mul(x2)
            .div_f64(-(k as f64 * (n + k) as f64));
        psi_a = psi_a.add(DD::from(1.0).div_f64(k as f64));
        psi_b = psi_b.add(DD::from(1.0).div_f64((n + k) as f64));
        let contrib = term.mul(psi_a.add(psi_b));
        s3 = s3.add(contrib);
        if term.abs_hi() * (psi_a.abs_hi() + psi_b.abs_hi()) < 1e-40 * s3.abs_hi() + 1e-320 {
            break;
        }
    }
    s3 = s3.div(DD_PI);

    s1.sub(s2).sub(s3)
}

/// H_n^(1)(t) = J + iY for any integer order via the reflection identity.
pub fn oracle_h(n: i32, t: f64) -> DDC {
    let na = n.unsigned_abs();
    let mut v = DDC::new(oracle_j(na, t), oracle_y(na, t));
    if n < 0 && na % 2 == 1 {
        v = DDC::new(v.re.neg(), v.im.neg());
    }
    v
}

/// d/dt H_n^(1)(t) through the recurrence H' = H_{n−1} − (n/t) H_n.
pub fn oracle_dh(n: i32, t: f64) -> DDC {
    let prev = oracle_h(n - 1, t);
    let cur = oracle_h(n, t);
    let f = DD::from(n as f64).div_f64(t);
    DDC::new(prev.re.sub(f.mul(cur.re)), prev.im.sub(f.mul(cur.im)))
}

/// α_n(t) = H'/H evaluated fully in double-double.
pub fn oracle_alpha(n: i32, t: f64) -> C {
    oracle_dh(n, t).div(oracle_h(n, t)).to_c64()
}

/// H_n''/H_n via the five-point recurrence (independent of the ODE
/// identity the production β_n uses): H'' = (H_{n−2} − 2H_n + H_{n+2})/4.
pub fn oracle_beta(n: i32, t: f64) -> C {
    let m2 = oracle_h(n - 2, t);
    let p2 = oracle_h(n + 2, t);
    let h = oracle_h(n, t);
    let num = DDC::new(
        m2.re.add(p2.re).sub(h.re.mul_f64(2.0)).div_f64(4.0),
        m2.im.add(p2.im).sub(h.im.mul_f64(2.0)).div_f64(4.0),
    );
    num.div(h).to_c64()
}

// ---------------------------------------------------------------------
// analytic cylinder modes of the background medium
// ---------------------------------------------------------------------

/// Radial basis of a single-mode solution: regular (J, interior) or
/// outgoing (H^(1), radiating exterior).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RadialBasis {
    Regular,
    Outgoing,
}

/// u = grad(c_p F_n(k_p r) e^{inθ}) + curl⃗(c_s F_n(k_s r) e^{inθ}),
/// an exact solution of the homogeneous Navier equation.
#[derive(Debug, Clone, Copy)]
pub struct CylinderMode {
    pub n: i32,
    pub coef_p: C,
    pub coef_s: C,
    pub basis: RadialBasis,
}

fn radial_fn(basis: RadialBasis, n: i32, z: f64) -> (C, C) {
    let v = hankel1(n, z).expect("radial basis eval");
    match basis {
        RadialBasis::Outgoing => (v.h, v.dh),
        RadialBasis::Regular => (C::new(v.h.re, 0.0), C::new(v.dh.re, 0.0)),
    }
}

impl CylinderMode {
    /// Cartesian displacement at polar (r, θ).
    pub fn displacement(&self, waves: &WaveNumbers, r: f64, theta: f64) -> [C; 2] {
        let i_n = C::new(0.0, self.n as f64);
        let (fp, dfp) = radial_fn(self.basis, self.n, waves.kp * r);
        let (fs, dfs) = radial_fn(self.basis, self.n, waves.ks * r);
        let phase = C::new(0.0, self.n as f64 * theta).exp();
        let u_r = self.coef_p * waves.kp * dfp + self.coef_s * i_n / r * fs;
        let u_t = self.coef_p * i_n / r * fp - self.coef_s * waves.ks * dfs;
        let (s, c) = theta.sin_cos();
        [
            (c * u_r - s * u_t) * phase,
            (s * u_r + c * u_t) * phase,
        ]
    }

    /// Cartesian traction ν·σ_{0,0}(u) on the circle of radius r.
    pub fn traction(
        &self,
        medium: &BackgroundMedium,
        waves: &WaveNumbers,
        r: f64,
        theta: f64,
    ) -> [C; 2] {
        let n = self.n;
        let i_n = C::new(0.0, n as f64);
        let second = |f: C, df: C, z: f64| -> C {
            // F'' from the Bessel ODE
            (C::new((n as f64 * n as f64) / (z * z) - 1.0, 0.0)) * f - df / z
        };
        let (fp, dfp) = radial_fn(self.basis, n, waves.kp * r);
        let (fs, dfs) = radial_fn(self.basis, n, waves.ks * r);
        let ddp = second(fp, dfp, waves.kp * r);
        let dds = second(fs, dfs, waves.ks * r);

        let phase = C::new(0.0, n as f64 * theta).exp();
        // ∂_r u in the rotated frame
        let dr_r = self.coef_p * waves.kp * waves.kp * ddp
            + self.coef_s * i_n * (waves.ks * dfs / r - fs / (r * r));
        let dr_t = self.coef_p * i_n * (waves.kp * dfp / r - fp / (r * r))
            - self.coef_s * waves.ks * waves.ks * dds;
        // div u = −k_p² φ_p, curl u = k_s² φ_s
        let div = -self.coef_p * waves.kp * waves.kp * fp;
        let curl = self.coef_s * waves.ks * waves.ks * fs;

        let t_r = 2.0 * medium.mu0 * dr_r + medium.lambda0 * div;
        let t_t = 2.0 * medium.mu0 * dr_t - medium.mu0 * curl;
        let (s, c) = theta.sin_cos();
        [
            (c * t_r - s * t_t) * phase,
            (s * t_r + c * t_t) * phase,
        ]
    }

    /// Trace sampled on the uniform P-point ring at radius R.
    pub fn boundary_trace(&self, waves: &WaveNumbers, radius: f64, p: usize) -> Vec<[C; 2]> {
        (0..p)
            .map(|m| {
                let th = 2.0 * std::f64::consts::PI * m as f64 / p as f64;
                self.displacement(waves, radius, th)
            })
            .collect()
    }

    pub fn boundary_traction(
        &self,
        medium: &BackgroundMedium,
        waves: &WaveNumbers,
        p: usize,
    ) -> Vec<[C; 2]> {
        (0..p)
            .map(|m| {
                let th = 2.0 * std::f64::consts::PI * m as f64 / p as f64;
                self.traction(medium, waves, medium.radius, th)
            })
            .collect()
    }
}

// ---------------------------------------------------------------------
// printed closed-form DtN entries (cross-check)
// ---------------------------------------------------------------------

/// The closed-form W_n entries with oracle Hankel ratios, in the
/// convention of the direct solve (multiplied back by R relative to the
/// printed 1/(RΛ_n) prefactor, with μ read as μ0).
pub fn closed_form_w(waves: &WaveNumbers, medium: &BackgroundMedium, n: i32) -> [[C; 2]; 2] {
    let ap = oracle_alpha(n, waves.tp);
    let as_ = oracle_alpha(n, waves.ts);
    let nf = n as f64;
    let lam = C::new(nf * nf, 0.0) - waves.tp * ap * waves.ts * as_;
    let rho_w2_r2 = medium.rho0 * waves.omega * waves.omega * medium.radius * medium.radius;
    let mu = medium.mu0;
    let i = C::new(0.0, 1.0);
    let w11 = (-2.0 * mu * lam + rho_w2_r2 * waves.ts * as_) / lam;
    let w22 = (-2.0 * mu * lam + rho_w2_r2 * waves.tp * ap) / lam;
    let w12 = (-2.0 * i * nf * mu * lam + i * nf * rho_w2_r2) / lam;
    [[w11, w12], [-w12, w22]]
}

// ---------------------------------------------------------------------
// misc helpers
// ---------------------------------------------------------------------

pub fn rel_err_c(a: C, b: C) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

pub fn trace_diff_norm(weight: f64, a: &[[C; 2]], b: &[[C; 2]]) -> f64 {
    (a.iter()
        .zip(b)
        .map(|(x, y)| (x[0] - y[0]).norm_sqr() + (x[1] - y[1]).norm_sqr())
        .sum::<f64>()
        * weight)
        .sqrt()
}

pub fn trace_norm(weight: f64, a: &[[C; 2]]) -> f64 {
    (a.iter()
        .map(|x| x[0].norm_sqr() + x[1].norm_sqr())
        .sum::<f64>()
        * weight)
        .sqrt()
}
