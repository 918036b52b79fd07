//! Admissibility and numerical exploration of the radial embedding
//! `H^s_rad(R^n) -> L^q(R^n, |x|^c dx)`.

use std::collections::BTreeMap;
use std::fmt;
use std::fmt::Write as _;
use std::sync::Arc;

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::config;
use crate::decarli::{admissible_l_params, DeCarliParams};
use crate::error::{Error, Result};
use crate::hankel::{HankelPlan, RadialProfile};
use crate::space::{
    gauss_legendre, hs_norm, hs_orthonormal_basis, hs_seminorm, sphere_area, weighted_lq_norm, SobolevContext,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmbeddingParams {
    pub n: u32,
    pub s: f64,
    pub q: f64,
    pub c: f64,
}

impl EmbeddingParams {
    pub fn new(n: u32, s: f64, q: f64, c: f64) -> Self {
        Self { n, s, q, c }
    }

    /// `2 (n + c) / (n - 2s)`, infinite for `s >= n/2`.
    pub fn critical_exponent(&self) -> f64 {
        let n = self.n as f64;
        if 2.0 * self.s >= n {
            f64::INFINITY
        } else {
            2.0 * (n + self.c) / (n - 2.0 * self.s)
        }
    }
}

/// One strict inequality with its signed distance to the boundary
/// (positive when satisfied).
#[derive(Debug, Clone, PartialEq)]
pub struct Condition {
    pub label: String,
    pub satisfied: bool,
    pub margin: f64,
}

impl Condition {
    pub fn strict(label: impl Into<String>, margin: f64) -> Self {
        Self { label: label.into(), satisfied: margin > 0.0, margin }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdmissibilityReport {
    pub overall: bool,
    pub conditions: Vec<Condition>,
}

impl AdmissibilityReport {
    pub fn from_conditions(conditions: Vec<Condition>) -> Self {
        Self { overall: conditions.iter().all(|c| c.satisfied), conditions }
    }

    pub fn get(&self, label: &str) -> Option<&Condition> {
        self.conditions.iter().find(|c| c.label == label)
    }

    pub fn margin(&self, label: &str) -> f64 {
        self.get(label).map_or(f64::NAN, |c| c.margin)
    }
}

impl fmt::Display for AdmissibilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self.conditions.iter().map(|c| c.label.len()).max().unwrap_or(0);
        for c in &self.conditions {
            let flag = if c.satisfied { "ok" } else { "FAIL" };
            writeln!(f, "{:<width$}  {:>4}  margin {:+.6e}", c.label, flag, c.margin)?;
        }
        write!(f, "admissible: {}", if self.overall { "yes" } else { "no" })
    }
}

pub const COND_S_POSITIVE: &str = "s > 0";
pub const COND_S_BELOW_HALF_N: &str = "s < n/2";
pub const COND_Q_ABOVE_TWO: &str = "q > 2";
pub const COND_Q_SUBCRITICAL: &str = "q < 2(n+c)/(n-2s)";
pub const COND_C_LOWER: &str = "c > -2s";
pub const COND_C_UPPER: &str = "c < (n-1)(q-2)/2";

/// Strict conditions of the weighted radial embedding.
pub fn check_embedding(params: &EmbeddingParams) -> AdmissibilityReport {
    let n = params.n as f64;
    let EmbeddingParams { s, q, c, .. } = *params;
    let critical = params.critical_exponent();
    let q_margin = if critical.is_finite() { critical - q } else { f64::NEG_INFINITY };
    AdmissibilityReport::from_conditions(vec![
        Condition::strict(COND_S_POSITIVE, s),
        Condition::strict(COND_S_BELOW_HALF_N, n / 2.0 - s),
        Condition::strict(COND_Q_ABOVE_TWO, q - 2.0),
        Condition::strict(COND_Q_SUBCRITICAL, q_margin),
        Condition::strict(COND_C_LOWER, c + 2.0 * s),
        Condition::strict(COND_C_UPPER, (n - 1.0) * (q - 2.0) / 2.0 - c),
    ])
}

/// Exponents of the boundedness argument: an operator `L^alpha_{nu,mu}`
/// bounded `L^p -> L^q`, the power `sigma` moved onto the profile, and the
/// decay exponent `gamma = s p / (2 - p)` of the remaining Hölder factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProofChain {
    pub operator: DeCarliParams,
    pub p: f64,
    pub sigma: f64,
    pub gamma: f64,
}

pub fn proof_chain_params(params: &EmbeddingParams) -> Result<ProofChain> {
    let report = check_embedding(params);
    if !report.overall {
        return Err(Error::Domain(format!("embedding parameters not admissible:\n{report}")));
    }
    let n = params.n as f64;
    let EmbeddingParams { s, q, c, .. } = *params;
    let p = n * q / (n * q - n - c);
    let sigma = (n - 1.0) / p;
    let alpha = n / 2.0 - 1.0;
    let nu = alpha + 1.0 - sigma;
    let mu = -2.0 * alpha - 1.0 + (c + n - 1.0) / q + sigma;
    let operator = DeCarliParams::new(alpha, nu, mu)?;
    let adm = admissible_l_params(&operator, p, q)?;
    if !adm.admissible {
        return Err(Error::Domain(format!("derived operator not bounded: {adm:?}")));
    }
    if !(p > 2.0 * n / (2.0 * s + n) && p < 2.0) {
        return Err(Error::Domain(format!("derived p = {p} outside (2n/(2s+n), 2)")));
    }
    Ok(ProofChain { operator, p, sigma, gamma: s * p / (2.0 - p) })
}

/// `int_0^inf (1 + r^2)^(-gamma) r^(n-1) dr` truncated at a doubling cutoff.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailIntegral {
    pub value: f64,
    /// relative change from the last cutoff doubling
    pub last_change: f64,
    pub log_cutoff: f64,
    pub converged: bool,
}

/// Integrates on `r = e^t`; each doubling of the cutoff adds one panel of
/// width `ln 2` in `t`, so very slow algebraic tails stay affordable.
pub fn tail_integral(n: u32, gamma: f64, tol: f64, max_doublings: usize) -> TailIntegral {
    let dim = n as f64;
    let (gx, gw) = gauss_legendre(16);
    let log1p_exp2 = |t: f64| if t > 0.0 { 2.0 * t + (-2.0 * t).exp().ln_1p() } else { (2.0 * t).exp().ln_1p() };
    let integrand = |t: f64| (dim * t - gamma * log1p_exp2(t)).exp();
    let panel = |a: f64, b: f64| {
        let h = 0.5 * (b - a);
        let m = 0.5 * (a + b);
        gx.iter().zip(&gw).map(|(&x, &w)| h * w * integrand(m + h * x)).sum::<f64>()
    };
    let start = -40.0;
    let mut value = (dim * start).exp() / dim;
    let mut t = start;
    let first_cut = 10f64.ln();
    while t < first_cut {
        let next = (t + 0.25).min(first_cut);
        value += panel(t, next);
        t = next;
    }
    let step = 2f64.ln();
    let mut last_change = f64::INFINITY;
    for _ in 0..max_doublings {
        let inc = panel(t, t + step);
        t += step;
        value += inc;
        last_change = inc / value;
        if last_change < tol {
            return TailIntegral { value, last_change, log_cutoff: t, converged: true };
        }
    }
    TailIntegral { value, last_change, log_cutoff: t, converged: false }
}

/// `||u||_{L^q(|x|^c)} / ||u||_{H^s}`.
pub fn verify_inequality(ctx: &SobolevContext, params: &EmbeddingParams, u: &RadialProfile) -> Result<f64> {
    if ctx.n() != params.n || ctx.s() != params.s {
        return Err(Error::InvalidArgument("context does not match the embedding parameters".into()));
    }
    let denom = hs_norm(ctx, u)?;
    if denom < 1e-14 {
        return Err(Error::Domain(format!("H^s norm {denom:.3e} too small for a ratio")));
    }
    Ok(weighted_lq_norm(params.n, params.q, params.c, u)? / denom)
}

/// Profiles `sum_j g_j e_j` with standard normal `g_j` over an
/// `H^s`-orthonormal basis of dimension `k`.
pub fn random_profiles(ctx: &SobolevContext, k: usize, count: usize, seed: u64) -> Result<Vec<RadialProfile>> {
    let basis = hs_orthonormal_basis(ctx, k)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let coeffs: Vec<f64> = (0..k).map(|_| StandardNormal.sample(&mut rng)).collect();
            combine(&basis, &coeffs)
        })
        .collect()
}

pub(crate) fn combine(basis: &[RadialProfile], coeffs: &[f64]) -> Result<RadialProfile> {
    let grid = basis[0].grid().clone();
    let values = (0..grid.size()).map(|i| basis.iter().zip(coeffs).map(|(b, c)| c * b.values()[i]).sum()).collect();
    RadialProfile::new(grid, values)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorOptions {
    pub k: usize,
    pub seeds: usize,
    pub max_iter: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for EstimatorOptions {
    fn default() -> Self {
        Self {
            k: config::BASIS_DIM,
            seeds: config::ESTIMATOR_SEEDS,
            max_iter: config::ESTIMATOR_MAX_ITER,
            tol: config::ESTIMATOR_TOLERANCE,
            seed: config::SEED,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BestConstant {
    pub c_est: f64,
    pub argmax: RadialProfile,
    pub coeffs: Vec<f64>,
    /// best ratio reached from each start, in seed order
    pub per_start: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Maximises `||u||_{L^q(|x|^c)} / ||u||_{H^s}` over the span of an
/// `H^s`-orthonormal basis, so the denominator is the coefficient norm.
///
/// Each start runs projected ascent on the unit sphere with the full step
/// `a <- grad F(a) / |grad F(a)|` for `F(a) = ||u_a||_q^q`; convexity of `F`
/// makes every step non-decreasing.
pub fn estimate_best_constant(
    params: &EmbeddingParams,
    plan: Arc<HankelPlan>,
    opts: &EstimatorOptions,
) -> Result<BestConstant> {
    let report = check_embedding(params);
    if !report.overall {
        return Err(Error::Domain(format!("embedding parameters not admissible:\n{report}")));
    }
    if opts.seeds == 0 {
        return Err(Error::InvalidArgument("need at least one start".into()));
    }
    let ctx = SobolevContext::new(params.n, params.s, plan)?;
    let basis = hs_orthonormal_basis(&ctx, opts.k)?;
    let rule = ctx.plan().grid().physical_rule();
    let k = opts.k;
    let q = params.q;
    let beta = params.c + params.n as f64 - 1.0;
    let cn = sphere_area(params.n);
    let weights: Vec<f64> = rule.power_weights(beta).into_iter().map(|w| cn * w).collect();
    let origin_weight = cn * rule.origin_cutoff().powf(beta + 1.0) / (beta + 1.0);
    let at_points: Vec<Vec<f64>> = basis.iter().map(|e| rule.sample(e.values())).collect();
    let at_origin: Vec<f64> = basis.iter().map(|e| rule.sample_origin(e.values())).collect();

    let objective = |a: &DVector<f64>| -> (f64, DVector<f64>) {
        let mut grad = DVector::zeros(k);
        let mut total = 0.0;
        let mut add = |w: f64, vals: &dyn Fn(usize) -> f64| {
            let u: f64 = (0..k).map(|j| a[j] * vals(j)).sum();
            let au = u.abs();
            total += w * au.powf(q);
            let d = w * q * au.powf(q - 2.0) * u;
            for j in 0..k {
                grad[j] += d * vals(j);
            }
        };
        for (i, &w) in weights.iter().enumerate() {
            add(w, &|j| at_points[j][i]);
        }
        add(origin_weight, &|j| at_origin[j]);
        (total, grad)
    };

    let runs: Vec<(f64, DVector<f64>, usize, bool)> = (0..opts.seeds)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(i as u64));
            let mut a = DVector::from_fn(k, |_, _| StandardNormal.sample(&mut rng));
            a /= a.norm();
            let (mut f, mut g) = objective(&a);
            let mut log_ratio = f.ln() / q;
            for it in 1..=opts.max_iter {
                let gn = g.norm();
                if gn == 0.0 {
                    return (log_ratio.exp(), a, it, false);
                }
                a = &g / gn;
                (f, g) = objective(&a);
                let next = f.ln() / q;
                let change = (next - log_ratio).abs();
                log_ratio = next;
                if change < opts.tol {
                    return (log_ratio.exp(), a, it, true);
                }
            }
            (log_ratio.exp(), a, opts.max_iter, false)
        })
        .collect();

    let per_start: Vec<f64> = runs.iter().map(|r| r.0).collect();
    let best = runs
        .iter()
        .enumerate()
        .fold(0, |b, (i, r)| if r.0 > runs[b].0 { i } else { b });
    let (_, a, _, _) = &runs[best];
    let coeffs: Vec<f64> = a.iter().copied().collect();
    let argmax = combine(&basis, &coeffs)?;
    // report the ratio through the public norms
    let c_est = verify_inequality(&ctx, params, &argmax)?;
    Ok(BestConstant {
        c_est,
        argmax,
        coeffs,
        per_start,
        iterations: runs.iter().map(|r| r.2).max().unwrap_or(0),
        converged: runs.iter().all(|r| r.3),
    })
}

/// One rung of the dilation ladder `u_lambda(r) = lambda^((n-2s)/2) phi(lambda r)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConcentrationRow {
    pub lambda: f64,
    pub hs_norm: f64,
    pub hs_seminorm: f64,
    pub lq_norm: f64,
    /// spectrum still negligible near the top of the dual grid
    pub resolved: bool,
}

impl ConcentrationRow {
    /// `||u||_{L^q(|x|^c)} / |u|_{H^s}` with the homogeneous seminorm.
    pub fn ratio(&self) -> f64 {
        self.lq_norm / self.hs_seminorm
    }
}

/// Spectral energy fraction above `0.9 rho_max` tolerated for a resolved rung.
pub const RESOLUTION_TOLERANCE: f64 = 1e-10;

pub fn concentration_probe(
    ctx: &SobolevContext,
    params: &EmbeddingParams,
    phi: &RadialProfile,
    lambdas: &[f64],
) -> Result<Vec<ConcentrationRow>> {
    if ctx.n() != params.n || ctx.s() != params.s {
        return Err(Error::InvalidArgument("context does not match the embedding parameters".into()));
    }
    let plan = ctx.plan();
    let grid = plan.grid();
    let last = *grid.nodes().last().expect("non-empty grid");
    let dual = plan.dual_grid();
    let rho_top = 0.9 * dual.nodes().last().expect("non-empty grid");
    let exponent = (params.n as f64 - 2.0 * params.s) / 2.0;
    lambdas
        .iter()
        .map(|&lambda| {
            if !(lambda > 0.0) {
                return Err(Error::InvalidArgument(format!("dilation {lambda} must be positive")));
            }
            let points: Vec<f64> = grid.nodes().iter().map(|&r| lambda * r).collect();
            let inside: Vec<f64> = points.iter().map(|&x| x.min(last)).collect();
            let vals = plan.interpolate(phi, &inside)?;
            let scale = lambda.powf(exponent);
            let values = points.iter().zip(vals).map(|(&x, v)| if x > last { 0.0 } else { scale * v }).collect();
            let u = RadialProfile::new(grid.clone(), values)?;
            let spectrum = plan.apply(&u)?;
            let (mut top, mut total) = (0.0, 0.0);
            for ((&rho, &w), &h) in dual.nodes().iter().zip(dual.weights()).zip(spectrum.values()) {
                let e = w * rho.powf(params.n as f64 - 1.0) * h * h;
                total += e;
                if rho > rho_top {
                    top += e;
                }
            }
            Ok(ConcentrationRow {
                lambda,
                hs_norm: hs_norm(ctx, &u)?,
                hs_seminorm: hs_seminorm(ctx, &u)?,
                lq_norm: weighted_lq_norm(params.n, params.q, params.c, &u)?,
                resolved: top <= RESOLUTION_TOLERANCE * total,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub params: EmbeddingParams,
    pub admissible: bool,
    pub margin_low_c: f64,
    pub margin_high_c: f64,
    pub margin_q: f64,
    /// `None` for inadmissible tuples
    pub c_est: Option<f64>,
    pub converged: bool,
}

pub const SWEEP_HEADER: &str = "n,s,q,c,admissible,margin_low_c,margin_high_c,margin_q,C_est";

/// Admissibility margins and best-constant estimates for each tuple. Plans
/// are shared per dimension; tuples run as independent tasks.
pub fn sweep(tuples: &[EmbeddingParams], size: usize, cutoff: f64, opts: &EstimatorOptions) -> Result<Vec<SweepRow>> {
    let mut plans = BTreeMap::new();
    for t in tuples {
        if let std::collections::btree_map::Entry::Vacant(slot) = plans.entry(t.n) {
            slot.insert(Arc::new(HankelPlan::new(t.n as f64 / 2.0 - 1.0, size, cutoff)?));
        }
    }
    tuples
        .par_iter()
        .map(|t| {
            let report = check_embedding(t);
            let margin_q = report.margin(COND_Q_ABOVE_TWO).min(report.margin(COND_Q_SUBCRITICAL));
            let (c_est, converged) = if report.overall {
                let best = estimate_best_constant(t, plans[&t.n].clone(), opts)?;
                (Some(best.c_est), best.converged)
            } else {
                (None, true)
            };
            Ok(SweepRow {
                params: *t,
                admissible: report.overall,
                margin_low_c: report.margin(COND_C_LOWER),
                margin_high_c: report.margin(COND_C_UPPER),
                margin_q,
                c_est,
                converged,
            })
        })
        .collect()
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for r in rows {
        let p = r.params;
        let c_est = r.c_est.map_or(String::new(), |v| format!("{v:.12e}"));
        let _ = writeln!(
            out,
            "{},{},{},{},{},{:.12e},{:.12e},{:.12e},{}",
            p.n, p.s, p.q, p.c, r.admissible, r.margin_low_c, r.margin_high_c, r.margin_q, c_est
        );
    }
    out
}
