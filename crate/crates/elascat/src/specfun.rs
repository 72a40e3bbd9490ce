//! Cylindrical special functions: Hankel functions of the first kind for
//! integer order and positive real argument, plus the logarithmic-derivative
//! ratios α_n and β_n used by the DtN mode matrices.
//!
//! `J_n` comes from the backward (Miller) recurrence with the even-order
//! normalization sum; forward recurrence on `J_n` is unstable for n > t.
//! `Y_n` comes from forward recurrence seeded by `Y_0`, `Y_1`, which are
//! evaluated by ascending series for t < 12 and by the large-argument
//! Hankel expansion beyond that.

use crate::{Error, Result};
use num_complex::Complex64;

/// Largest supported order. The DtN truncation never exceeds this at the
/// wave numbers of interest (k_s·R ≤ 11 gives N_t ≤ 23).
pub const MAX_ORDER: i32 = 64;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Value of `H_n^(1)` and its first derivative at one point.
#[derive(Debug, Clone, Copy)]
pub struct HankelValue {
    pub order: i32,
    pub argument: f64,
    /// H_n^(1)(t) = J_n(t) + i·Y_n(t)
    pub h: Complex64,
    /// d/dt H_n^(1)(t)
    pub dh: Complex64,
}

/// Computes `H_n^(1)(t)` and its derivative for integer `n`, real `t > 0`.
///
/// Negative orders use `H_{-n} = (-1)^n H_n`.
pub fn hankel1(n: i32, t: f64) -> Result<HankelValue> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!(
            "hankel1 requires t > 0, got t = {t}"
        )));
    }
    let na = n.unsigned_abs() as usize;
    if na as i32 > MAX_ORDER {
        return Err(Error::OrderOverflow {
            order: n,
            max: MAX_ORDER,
        });
    }

    // One extra order so the derivative recurrence has H_{n+? } available
    // and so H_1 exists even for n = 0.
    let m = na.max(1);
    let j = bessel_j_sequence(m, t);
    let y = bessel_y_sequence(m, t)?;

    let h_abs = Complex64::new(j[na], y[na]);
    let dh_abs = if na == 0 {
        // H_0' = -H_1
        -Complex64::new(j[1], y[1])
    } else {
        // H_n' = H_{n-1} - (n/t) H_n
        Complex64::new(j[na - 1], y[na - 1]) - (na as f64 / t) * h_abs
    };

    let (h, dh) = if n < 0 && na % 2 == 1 {
        (-h_abs, -dh_abs)
    } else {
        (h_abs, dh_abs)
    };

    Ok(HankelValue {
        order: n,
        argument: t,
        h,
        dh,
    })
}

/// α_n(t) = H_n'(t) / H_n(t). Even in the order.
pub fn alpha_n(n: i32, t: f64) -> Result<Complex64> {
    let v = hankel1(n, t)?;
    // Scale before dividing: |H_n|² can overflow f64 for large order at
    // small argument even though the ratio is moderate.
    let s = v.h.re.abs().max(v.h.im.abs());
    Ok((v.dh / s) / (v.h / s))
}

/// β_n(t) = H_n''(t) / H_n(t), via the Bessel ODE identity
/// β_n = n²/t² − 1 − α_n/t (no second-derivative differencing).
pub fn beta_n(n: i32, t: f64) -> Result<Complex64> {
    let a = alpha_n(n, t)?;
    let nn = (n as f64) * (n as f64);
    Ok(Complex64::new(nn / (t * t) - 1.0, 0.0) - a / t)
}

/// J_0..J_m by backward recurrence with normalization.
fn bessel_j_sequence(m: usize, t: f64) -> Vec<f64> {
    // Start well above both the order and the turning point.
    let start = m.max(t.ceil() as usize) + 42;
    let mut vals = vec![0.0f64; start + 2];
    vals[start + 1] = 0.0;
    vals[start] = 1e-300;
    for k in (1..=start).rev() {
        let next = (2.0 * k as f64 / t) * vals[k] - vals[k + 1];
        vals[k - 1] = next;
        if next.abs() > 1e250 {
            // Rescale everything computed so far to dodge overflow.
            for v in vals[k - 1..].iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    // J_0 + 2 J_2 + 2 J_4 + ... = 1
    let mut norm = vals[0];
    let mut k = 2;
    while k <= start {
        norm += 2.0 * vals[k];
        k += 2;
    }
    let scale = 1.0 / norm;
    vals.truncate(m + 1);
    for v in vals.iter_mut() {
        *v *= scale;
    }
    vals
}

/// Y_0..Y_m by forward recurrence from the seed values.
fn bessel_y_sequence(m: usize, t: f64) -> Result<Vec<f64>> {
    let (y0, y1) = if t < 12.0 {
        y0_y1_series(t)
    } else {
        y0_y1_asymptotic(t)
    };
    let mut vals = vec![0.0f64; m + 1];
    vals[0] = y0;
    if m >= 1 {
        vals[1] = y1;
    }
    for k in 1..m {
        vals[k + 1] = (2.0 * k as f64 / t) * vals[k] - vals[k - 1];
        if !vals[k + 1].is_finite() {
            return Err(Error::OrderOverflow {
                order: (k + 1) as i32,
                max: MAX_ORDER,
            });
        }
    }
    Ok(vals)
}

/// Ascending series for Y_0, Y_1 (usable up to t ≈ 12 before cancellation
/// eats into the last digits).
fn y0_y1_series(t: f64) -> (f64, f64) {
    let x2 = 0.25 * t * t;
    let log_half_t = (0.5 * t).ln();

    // J_0 and the harmonic-weighted companion sum.
    let mut term = 1.0f64;
    let mut j0 = 1.0f64;
    let mut s0 = 0.0f64;
    let mut hk = 0.0f64;
    for k in 1..200 {
        term *= -x2 / ((k * k) as f64);
        hk += 1.0 / k as f64;
        j0 += term;
        s0 += term * hk;
        if term.abs() < 1e-20 * j0.abs().max(1.0) {
            break;
        }
    }
    let y0 = (2.0 / std::f64::consts::PI) * ((log_half_t + EULER_GAMMA) * j0 - s0);

    // J_1 and the ψ-weighted companion sum:
    // Y_1 = (2/π) ln(t/2) J_1 − (2/(πt))
    //       − (1/π) Σ_k (−1)^k [ψ(k+1)+ψ(k+2)] (t/2)^{2k+1} / (k!(k+1)!)
    let half_t = 0.5 * t;
    let mut term = half_t; // (t/2)^{2k+1}/(k!(k+1)!) at k = 0
    let mut j1 = term;
    let mut psi_a = -EULER_GAMMA; // ψ(k+1)
    let mut psi_b = 1.0 - EULER_GAMMA; // ψ(k+2)
    let mut s1 = term * (psi_a + psi_b);
    for k in 1..200 {
        term *= -x2 / ((k * (k + 1)) as f64);
        psi_a += 1.0 / k as f64;
        psi_b += 1.0 / (k + 1) as f64;
        j1 += term;
        s1 += term * (psi_a + psi_b);
        if term.abs() < 1e-20 * j1.abs().max(1.0) {
            break;
        }
    }
    let pi = std::f64::consts::PI;
    let y1 = (2.0 / pi) * log_half_t * j1 - 2.0 / (pi * t) - s1 / pi;
    (y0, y1)
}

/// Large-argument Hankel expansion, optimally truncated; the minimal term
/// is O(e^{-2t}), far below f64 round-off for t ≥ 12.
fn y0_y1_asymptotic(t: f64) -> (f64, f64) {
    let h0 = hankel_asymptotic(0.0, t);
    let h1 = hankel_asymptotic(1.0, t);
    (h0.im, h1.im)
}

fn hankel_asymptotic(nu: f64, t: f64) -> Complex64 {
    let four_nu2 = 4.0 * nu * nu;
    let mut sum = Complex64::new(1.0, 0.0);
    let mut ak = 1.0f64;
    let mut ik = Complex64::new(1.0, 0.0);
    let mut prev = f64::INFINITY;
    for k in 1..60 {
        let odd = (2 * k - 1) as f64;
        ak *= (four_nu2 - odd * odd) / (k as f64 * 8.0);
        ik *= Complex64::new(0.0, 1.0);
        let mag = (ak / t.powi(k as i32)).abs();
        if mag >= prev || mag < 1e-18 {
            break;
        }
        sum += ik * ak / t.powi(k as i32);
        prev = mag;
    }
    let phase = t - nu * std::f64::consts::FRAC_PI_2 - std::f64::consts::FRAC_PI_4;
    let amp = (2.0 / (std::f64::consts::PI * t)).sqrt();
    amp * Complex64::new(phase.cos(), phase.sin()) * sum
}
