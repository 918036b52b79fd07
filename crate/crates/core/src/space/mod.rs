//! `H^s` norms, Bessel potentials and weighted Lebesgue norms of radial
//! profiles. Every integral over `R^n` is reduced to
//! `c_n int_0^inf (.) r^(n-1) dr` with `c_n = 2 pi^(n/2) / Gamma(n/2)`.

mod rule;

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use statrs::function::gamma::{gamma, ln_gamma};

use crate::error::{Error, Result};
use crate::hankel::{check_dimension, HankelPlan, RadialProfile};

pub use rule::{PhysicalRule, STENCIL};

/// Relative size of the last grid sample above which a profile counts as
/// not decayed at the cutoff.
pub const TAIL_TOLERANCE: f64 = 1e-12;

/// Surface area of the unit sphere in `R^n`.
pub fn sphere_area(n: u32) -> f64 {
    let h = n as f64 / 2.0;
    2.0 * PI.powf(h) / gamma(h)
}

/// Dimension, smoothness order and the transform of order `n/2 - 1`.
#[derive(Debug, Clone)]
pub struct SobolevContext {
    n: u32,
    s: f64,
    plan: Arc<HankelPlan>,
}

impl SobolevContext {
    pub fn new(n: u32, s: f64, plan: Arc<HankelPlan>) -> Result<Self> {
        check_dimension(&plan, n)?;
        if !s.is_finite() {
            return Err(Error::InvalidArgument(format!("smoothness order {s}")));
        }
        Ok(Self { n, s, plan })
    }

    /// Same dimension and plan, different order.
    pub fn with_order(&self, s: f64) -> Self {
        Self { n: self.n, s, plan: self.plan.clone() }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn plan(&self) -> &Arc<HankelPlan> {
        &self.plan
    }

    fn physical(&self, u: &RadialProfile) -> Result<()> {
        if **u.grid() != **self.plan.grid() {
            return Err(Error::GridMismatch("profile is not on the context's physical grid".into()));
        }
        Ok(())
    }

    /// `c_n sum_k w_k rho_k^(n-1) m(rho_k) Hu_k Hv_k` on the dual grid.
    fn spectral_form(&self, u: &RadialProfile, v: &RadialProfile, m: impl Fn(f64) -> f64) -> Result<f64> {
        self.physical(u)?;
        self.physical(v)?;
        let hu = self.plan.apply(u)?;
        let hv = if std::ptr::eq(u, v) { hu.clone() } else { self.plan.apply(v)? };
        let dual = self.plan.dual_grid();
        let dim = self.n as f64;
        let sum: f64 = dual
            .nodes()
            .iter()
            .zip(dual.weights())
            .zip(hu.values().iter().zip(hv.values()))
            .map(|((&rho, &w), (&a, &b))| w * rho.powf(dim - 1.0) * m(rho) * a * b)
            .sum();
        Ok(sphere_area(self.n) * sum)
    }
}

/// `(2 pi)^-n int (1 + |w|^2)^s u_hat v_hat dw`.
pub fn hs_inner(ctx: &SobolevContext, u: &RadialProfile, v: &RadialProfile) -> Result<f64> {
    let s = ctx.s;
    ctx.spectral_form(u, v, |rho| (1.0 + rho * rho).powf(s))
}

/// `||u||_{H^s}` from the Fourier side.
pub fn hs_norm(ctx: &SobolevContext, u: &RadialProfile) -> Result<f64> {
    Ok(hs_inner(ctx, u, u)?.max(0.0).sqrt())
}

/// Homogeneous seminorm `((2 pi)^-n int |w|^(2s) |u_hat|^2 dw)^(1/2)`.
pub fn hs_seminorm(ctx: &SobolevContext, u: &RadialProfile) -> Result<f64> {
    let s = ctx.s;
    Ok(ctx.spectral_form(u, u, |rho| rho.powf(2.0 * s))?.max(0.0).sqrt())
}

/// Transform, multiply by `m(rho)`, transform back.
pub fn apply_multiplier(plan: &HankelPlan, u: &RadialProfile, m: impl Fn(f64) -> f64) -> Result<RadialProfile> {
    let spectrum = plan.apply(u)?;
    let weighted = spectrum.map(|rho, v| m(rho) * v)?;
    plan.apply(&weighted)
}

/// Bessel potential `A^s u`, the multiplier `(1 + rho^2)^(s/2)`.
pub fn apply_as(ctx: &SobolevContext, u: &RadialProfile) -> Result<RadialProfile> {
    ctx.physical(u)?;
    if ctx.s == 0.0 {
        return Ok(u.clone());
    }
    let h = 0.5 * ctx.s;
    apply_multiplier(&ctx.plan, u, |rho| (1.0 + rho * rho).powf(h))
}

fn check_tail(u: &RadialProfile) -> Result<()> {
    let peak = u.max_abs();
    let tail = u.values().last().copied().unwrap_or(0.0).abs();
    if tail > TAIL_TOLERANCE * peak {
        return Err(Error::TailNotDecayed { tail, peak });
    }
    Ok(())
}

/// `(c_n int_0^inf r^(c+n-1) |u_0(r)|^q dr)^(1/q)`.
pub fn weighted_lq_norm(n: u32, q: f64, c: f64, u: &RadialProfile) -> Result<f64> {
    Ok(weighted_lq_integral(n, q, c, u)?.powf(1.0 / q))
}

/// `c_n int_0^inf r^(c+n-1) |u_0(r)|^q dr`.
pub fn weighted_lq_integral(n: u32, q: f64, c: f64, u: &RadialProfile) -> Result<f64> {
    if !(c + n as f64 > 0.0) {
        return Err(Error::Domain(format!("weight exponent c = {c} needs c + n > 0")));
    }
    if !(q >= 1.0) {
        return Err(Error::Domain(format!("Lebesgue exponent q = {q} < 1")));
    }
    check_tail(u)?;
    let rule = u.grid().physical_rule();
    let g: Vec<f64> = rule.sample(u.values()).into_iter().map(|v| v.abs().powf(q)).collect();
    let g0 = rule.sample_origin(u.values()).abs().powf(q);
    Ok(sphere_area(n) * rule.integrate(c + n as f64 - 1.0, &g, g0))
}

/// Plain `L^2(R^n)` norm from the physical side.
pub fn l2_norm(n: u32, u: &RadialProfile) -> f64 {
    let sq: Vec<f64> = u.values().iter().map(|v| v * v).collect();
    (sphere_area(n) * u.grid().integrate_radial(n as f64, &sq)).max(0.0).sqrt()
}

/// `int_{R^n} A^s u A^t v dx`.
pub fn l2_pairing(ctx_s: &SobolevContext, ctx_t: &SobolevContext, u: &RadialProfile, v: &RadialProfile) -> Result<f64> {
    if ctx_s.n != ctx_t.n {
        return Err(Error::InvalidArgument(format!("dimensions differ: {} vs {}", ctx_s.n, ctx_t.n)));
    }
    u.ensure_same_grid(v)?;
    let asu = apply_as(ctx_s, u)?;
    let atv = apply_as(ctx_t, v)?;
    let prod: Vec<f64> = asu.values().iter().zip(atv.values()).map(|(a, b)| a * b).collect();
    Ok(sphere_area(ctx_s.n) * u.grid().integrate_radial(ctx_s.n as f64, &prod))
}

/// Both sides of the interpolation bound
/// `int |x|^c |u|^q <= (int |u|^r)^theta (int |x|^(c/(1-theta)) |u|^qt)^(1-theta)`
/// for `q = theta r + (1 - theta) qt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolderCheck {
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs - lhs`, nonnegative when the bound holds
    pub slack: f64,
}

pub fn holder_interpolation(n: u32, c: f64, r: f64, q_tilde: f64, theta: f64, u: &RadialProfile) -> Result<HolderCheck> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::Domain(format!("theta = {theta} outside (0, 1)")));
    }
    let q = theta * r + (1.0 - theta) * q_tilde;
    let c_tilde = c / (1.0 - theta);
    let lhs = weighted_lq_integral(n, q, c, u)?;
    let first = weighted_lq_integral(n, r, 0.0, u)?;
    let second = weighted_lq_integral(n, q_tilde, c_tilde, u)?;
    let rhs = first.powf(theta) * second.powf(1.0 - theta);
    Ok(HolderCheck { lhs, rhs, slack: rhs - lhs })
}

/// Largest Gram condition number accepted by [`hs_orthonormal_basis`].
pub const MAX_GRAM_CONDITION: f64 = 1e12;

/// `L_m^alpha(r^2) e^(-r^2/2)` for `m = 0..k`, scaled to unit `L^2(r^(2 alpha + 1) dr)` norm.
///
/// These span the same space as `r^(2m) e^(-r^2/2)` and are eigenfunctions of
/// the Fourier-Bessel transform with eigenvalue `(-1)^m`.
pub fn laguerre_seeds(alpha: f64, k: usize, r: f64) -> Vec<f64> {
    let x = r * r;
    let damp = (-0.5 * x).exp();
    let mut out = Vec::with_capacity(k);
    let (mut prev, mut cur) = (0.0, 1.0);
    for m in 0..k {
        let mf = m as f64;
        let norm = (2.0 * (ln_gamma(mf + 1.0) - ln_gamma(mf + alpha + 1.0))).exp().sqrt();
        out.push(cur * damp * norm);
        let next = ((2.0 * mf + 1.0 + alpha - x) * cur - (mf + alpha) * prev) / (mf + 1.0);
        prev = cur;
        cur = next;
    }
    out
}

/// `k` profiles spanning `{r^(2j) e^(-r^2/2) : j < k}`, orthonormal in `H^s`.
pub fn hs_orthonormal_basis(ctx: &SobolevContext, k: usize) -> Result<Vec<RadialProfile>> {
    if k == 0 {
        return Err(Error::InvalidArgument("basis dimension must be positive".into()));
    }
    let grid = ctx.plan.grid().clone();
    let alpha = ctx.plan.alpha();
    let samples: Vec<Vec<f64>> = grid.nodes().iter().map(|&r| laguerre_seeds(alpha, k, r)).collect();
    let mut basis = (0..k)
        .map(|j| RadialProfile::new(grid.clone(), samples.iter().map(|row| row[j]).collect()))
        .collect::<Result<Vec<_>>>()?;
    // Cholesky orthonormalisation, repeated once to clean up rounding
    for pass in 0..2 {
        let gram = gram_matrix(ctx, &basis)?;
        if pass == 0 {
            let eig = SymmetricEigen::new(gram.clone()).eigenvalues;
            let (lo, hi) = eig.iter().fold((f64::INFINITY, 0.0_f64), |(l, h), &e| (l.min(e), h.max(e)));
            let cond = if lo > 0.0 { hi / lo } else { f64::INFINITY };
            if cond > MAX_GRAM_CONDITION {
                return Err(Error::IllConditioned(cond));
            }
        }
        let chol = gram.cholesky().ok_or(Error::IllConditioned(f64::INFINITY))?;
        let inv_l = chol.l().try_inverse().ok_or(Error::IllConditioned(f64::INFINITY))?;
        basis = (0..k)
            .map(|i| {
                let values = (0..grid.size())
                    .map(|node| (0..=i).map(|j| inv_l[(i, j)] * basis[j].values()[node]).sum())
                    .collect();
                RadialProfile::new(grid.clone(), values)
            })
            .collect::<Result<Vec<_>>>()?;
    }
    Ok(basis)
}

/// `H^s` Gram matrix of a family of physical-side profiles.
pub fn gram_matrix(ctx: &SobolevContext, family: &[RadialProfile]) -> Result<DMatrix<f64>> {
    for u in family {
        ctx.physical(u)?;
    }
    let spectra = family.iter().map(|u| ctx.plan.apply(u)).collect::<Result<Vec<_>>>()?;
    let dual = ctx.plan.dual_grid();
    let dim = ctx.n as f64;
    let weight: Vec<f64> = dual
        .nodes()
        .iter()
        .zip(dual.weights())
        .map(|(&rho, &w)| sphere_area(ctx.n) * w * rho.powf(dim - 1.0) * (1.0 + rho * rho).powf(ctx.s))
        .collect();
    let k = family.len();
    let mut gram = DMatrix::zeros(k, k);
    for i in 0..k {
        for j in 0..=i {
            let v: f64 = weight
                .iter()
                .zip(spectra[i].values().iter().zip(spectra[j].values()))
                .map(|(w, (a, b))| w * a * b)
                .sum();
            gram[(i, j)] = v;
            gram[(j, i)] = v;
        }
    }
    Ok(gram)
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub(crate) fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; m];
    let mut w = vec![0.0; m];
    for i in 0..m.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=m {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = m as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[m - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[m - 1 - i] = w[i];
    }
    (x, w)
}
