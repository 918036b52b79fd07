//! Bessel functions of the first kind for real order `alpha >= -1/2`.
//!
//! Three regimes:
//!
//! * ascending power series when the terms do not cancel badly,
//! * Hankel's asymptotic expansion when its smallest term is below
//!   double-precision resolution,
//! * Miller's backward recurrence in order otherwise, normalised with the
//!   Neumann-type identity `(x/2)^nu = sum_k (nu + 2k) Gamma(nu + k) / k! J_{nu+2k}(x)`.

use std::f64::consts::{FRAC_PI_4, PI};

use statrs::function::gamma::{gamma, ln_gamma};

use crate::error::{Error, Result};

/// Smallest supported order.
pub const MIN_ORDER: f64 = -0.5;

const ORDER_SLACK: f64 = 1e-12;

/// `J_alpha(x)` for `alpha >= -1/2`, `x >= 0`.
pub fn bessel_j(alpha: f64, x: f64) -> Result<f64> {
    if !alpha.is_finite() || alpha < MIN_ORDER - ORDER_SLACK {
        return Err(Error::Domain(format!("Bessel order {alpha} < -1/2")));
    }
    if !x.is_finite() || x < 0.0 {
        return Err(Error::Domain(format!("Bessel argument {x} must be finite and >= 0")));
    }
    if x == 0.0 && alpha < 0.0 {
        return Err(Error::Domain(format!("J_{alpha}(0) is unbounded")));
    }
    Ok(bessel_j_unchecked(alpha.max(MIN_ORDER), x))
}

/// Same as [`bessel_j`] without argument validation. Used on hot paths where
/// the caller already guarantees `alpha >= -1/2` and `x >= 0`.
pub(crate) fn bessel_j_unchecked(alpha: f64, x: f64) -> f64 {
    if x == 0.0 {
        return if alpha == 0.0 { 1.0 } else { 0.0 };
    }
    if x >= 20.0 {
        if let Some(v) = hankel_asymptotic(alpha, x) {
            return v;
        }
    }
    if x <= 25.0 + alpha {
        if let Some(v) = power_series(alpha, x) {
            return v;
        }
    }
    miller_recurrence(alpha, x)
}

/// Ascending series. Returns `None` when cancellation would cost more than
/// ~1e-14 absolute accuracy.
fn power_series(alpha: f64, x: f64) -> Option<f64> {
    let half = 0.5 * x;
    let lead = (alpha * half.ln() - ln_gamma(alpha + 1.0)).exp();
    if lead == 0.0 {
        return Some(0.0);
    }
    let z = -half * half;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut peak = 1.0_f64;
    let mut k = 0.0;
    loop {
        k += 1.0;
        term *= z / (k * (alpha + k));
        sum += term;
        peak = peak.max(term.abs());
        if term.abs() <= 1e-17 * sum.abs().max(1e-300) && k > 2.0 {
            break;
        }
        if k > 500.0 {
            return None;
        }
    }
    if peak * lead * f64::EPSILON * 4.0 > 1e-14 {
        return None;
    }
    Some(lead * sum)
}

/// Hankel expansion `J = sqrt(2/(pi x)) (P cos chi - Q sin chi)`.
fn hankel_asymptotic(alpha: f64, x: f64) -> Option<f64> {
    let mu = 4.0 * alpha * alpha;
    let eight_x = 8.0 * x;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0_f64;
    let mut converged = false;
    for k in 1..200 {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        let next = term * (mu - odd * odd) / (kf * eight_x);
        if next == 0.0 {
            converged = true;
            break;
        }
        if next.abs() > term.abs() {
            // terms started growing: the expansion is exhausted
            break;
        }
        term = next;
        // a_k enters P for even k, Q for odd k, with alternating signs
        match k % 4 {
            1 => q += term,
            2 => p -= term,
            3 => q -= term,
            _ => p += term,
        }
        if term.abs() < 1e-17 {
            converged = true;
            break;
        }
    }
    if !converged {
        return None;
    }
    // chi = x - (alpha/2 + 1/4) pi, expanded to keep the large argument exact
    let phase = (0.5 * alpha) * PI + FRAC_PI_4;
    let (sx, cx) = x.sin_cos();
    let (sp, cp) = phase.sin_cos();
    let cos_chi = cx * cp + sx * sp;
    let sin_chi = sx * cp - cx * sp;
    Some((2.0 / (PI * x)).sqrt() * (p * cos_chi - q * sin_chi))
}

/// Miller's algorithm: recur downward from a high order, then normalise.
fn miller_recurrence(alpha: f64, x: f64) -> f64 {
    let floor = alpha.floor();
    let nu = alpha - floor; // in [0, 1)
    let target = floor as i64; // >= -1
    let base = target.max(0) as usize;

    let start = (x + 30.0 + 12.0 * x.cbrt()).ceil() as usize;
    let mut top = start.max(base + 20);
    if top % 2 == 1 {
        top += 1;
    }

    // normalisation coefficients c_m for J_{nu+2m}
    let coeff = |m: usize, g: f64| -> f64 {
        if m == 0 {
            g
        } else {
            (nu + 2.0 * m as f64) * g
        }
    };
    // g_m = Gamma(nu + m) / m!, with g_0 := Gamma(nu + 1) for the m = 0 slot
    let mut g_vals = Vec::with_capacity(top / 2 + 1);
    let g0 = gamma(nu + 1.0);
    g_vals.push(g0);
    let mut g = g0; // Gamma(nu+1)/1! = g_1
    for m in 1..=top / 2 {
        if m > 1 {
            let mf = (m - 1) as f64;
            g *= (nu + mf) / (mf + 1.0);
        }
        g_vals.push(g);
    }

    let mut j_next = 0.0_f64; // J_{nu+k+1}
    let mut j_curr = 1e-300_f64; // J_{nu+k}
    let mut norm = 0.0_f64;
    let mut at_base = 0.0_f64;
    let mut at_base_plus = 0.0_f64;
    let two_over_x = 2.0 / x;

    let mut k = top;
    loop {
        if k.is_multiple_of(2) {
            norm += coeff(k / 2, g_vals[k / 2]) * j_curr;
        }
        if k == base {
            at_base = j_curr;
            at_base_plus = j_next;
        }
        if k == 0 {
            break;
        }
        let j_prev = two_over_x * (nu + k as f64) * j_curr - j_next;
        j_next = j_curr;
        j_curr = j_prev;
        k -= 1;
        if j_curr.abs() > 1e250 {
            let s = 1e-250;
            j_curr *= s;
            j_next *= s;
            norm *= s;
            at_base *= s;
            at_base_plus *= s;
        }
    }

    let scale = (nu * (0.5 * x).ln()).exp() / norm;
    if target >= 0 {
        at_base * scale
    } else {
        // alpha = nu - 1 with nu in [1/2, 1)
        let j_nu = at_base * scale;
        let j_nu1 = at_base_plus * scale;
        two_over_x * nu * j_nu - j_nu1
    }
}

/// The first `m` positive zeros of `J_alpha`, increasing.
///
/// The first two are bracketed by scanning; later ones use the monotone
/// spacing of consecutive zeros (decreasing to pi for `alpha > 1/2`,
/// increasing to pi for `alpha < 1/2`) to bracket each zero directly.
pub fn bessel_zeros(alpha: f64, m: usize) -> Result<Vec<f64>> {
    if !alpha.is_finite() || alpha < MIN_ORDER - ORDER_SLACK {
        return Err(Error::Domain(format!("Bessel order {alpha} < -1/2")));
    }
    let alpha = alpha.max(MIN_ORDER);
    let f = |x: f64| bessel_j_unchecked(alpha, x);
    let mut zeros: Vec<f64> = Vec::with_capacity(m);
    let mut x = if alpha > 0.0 { alpha } else { 1e-3 };
    while zeros.len() < m {
        if zeros.len() >= 2 {
            let n = zeros.len();
            let last = zeros[n - 1];
            let d = last - zeros[n - 2];
            let lo = last + d.min(PI) - 1e-3;
            let hi = last + d.max(PI) + 1e-3;
            let (flo, fhi) = (f(lo), f(hi));
            if flo * fhi < 0.0 {
                zeros.push(refine_root(&f, lo, hi, flo));
                continue;
            }
            x = last + 0.1;
        }
        // scan for the next sign change
        let step = 0.2;
        let mut fx = f(x);
        loop {
            let x2 = x + step;
            let f2 = f(x2);
            if fx == 0.0 {
                zeros.push(x);
                x = x2;
                break;
            }
            if fx * f2 < 0.0 {
                zeros.push(refine_root(&f, x, x2, fx));
                x = x2;
                break;
            }
            x = x2;
            fx = f2;
        }
    }
    Ok(zeros)
}

fn refine_root(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, mut flo: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    // pick the endpoint with the smaller residual
    if f(lo).abs() <= f(hi).abs() {
        lo
    } else {
        hi
    }
}

/// McMahon's leading-order estimate of the `k`-th zero, useful as a sanity
/// reference for large `k`.
pub fn mcmahon_estimate(alpha: f64, k: usize) -> f64 {
    let beta = (k as f64 + 0.5 * alpha - 0.25) * PI;
    let mu = 4.0 * alpha * alpha;
    beta - (mu - 1.0) / (8.0 * beta)
}
