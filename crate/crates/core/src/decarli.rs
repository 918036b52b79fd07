//! The operators `L^alpha_{nu,mu} f(y) = y^mu int_0^inf (xy)^nu f(x) J_alpha(xy) dx`,
//! their `L^p(0,inf) -> L^q(0,inf)` admissibility test and the two scaling
//! identities used to move powers of `x` and `y` between parameters.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hankel::{HankelPlan, RadialProfile, MIN_ORDER};

/// Tolerance for the identity `mu = 1/p' - 1/q`.
pub const MU_TOLERANCE: f64 = 1e-12;

/// Relative size of `|x^nu f(x)|` at the last node above which the
/// quadrature counts as truncated.
pub const DECAY_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeCarliParams {
    pub alpha: f64,
    pub nu: f64,
    pub mu: f64,
}

impl DeCarliParams {
    pub fn new(alpha: f64, nu: f64, mu: f64) -> Result<Self> {
        if !(alpha >= MIN_ORDER) {
            return Err(Error::Domain(format!("order alpha = {alpha} < -1/2")));
        }
        if !(nu.is_finite() && mu.is_finite()) {
            return Err(Error::InvalidArgument(format!("nu = {nu}, mu = {mu}")));
        }
        Ok(Self { alpha, nu, mu })
    }

    /// `(alpha, alpha + 1, -2 alpha - 1)`: the Fourier-Bessel transform.
    pub fn hankel(alpha: f64) -> Result<Self> {
        Self::new(alpha, alpha + 1.0, -2.0 * alpha - 1.0)
    }
}

/// Quadrature of `L f` at every dual node, using the physical grid and the
/// transform kernel of `plan`.
pub fn apply_l(params: &DeCarliParams, plan: &HankelPlan, f: &RadialProfile) -> Result<RadialProfile> {
    if (params.alpha - plan.alpha()).abs() > 1e-12 {
        return Err(Error::GridMismatch(format!(
            "operator order {} vs plan order {}",
            params.alpha,
            plan.alpha()
        )));
    }
    let grid = plan.grid();
    if **f.grid() != **grid {
        return Err(Error::GridMismatch("apply_l expects a physical-side profile".into()));
    }
    let DeCarliParams { nu, mu, .. } = *params;
    let xs = grid.nodes();
    let decayed: Vec<f64> = xs.iter().zip(f.values()).map(|(&x, &v)| (x.powf(nu) * v).abs()).collect();
    let peak = decayed.iter().fold(0.0_f64, |m, &v| m.max(v));
    let tail = *decayed.last().expect("non-empty grid");
    if tail > DECAY_TOLERANCE * peak {
        return Err(Error::TailNotDecayed { tail, peak });
    }
    let wf: Vec<f64> = grid.weights().iter().zip(f.values()).map(|(w, v)| w * v).collect();
    let dual = plan.dual_grid();
    let out = dual
        .nodes()
        .par_iter()
        .enumerate()
        .map(|(m, &y)| {
            let sum: f64 = plan
                .kernel_row(m)
                .iter()
                .zip(xs)
                .zip(&wf)
                .map(|((&j, &x), &g)| (x * y).powf(nu) * j * g)
                .sum();
            y.powf(mu) * sum
        })
        .collect();
    RadialProfile::new(dual.clone(), out)
}

/// Signed slack of each inequality in the admissibility test; nonnegative
/// (and `mu_gap` within tolerance) when the operator is bounded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LAdmissibility {
    pub admissible: bool,
    /// `1/p' - 1/q`
    pub mu_target: f64,
    /// `mu - (1/p' - 1/q)`
    pub mu_gap: f64,
    /// `nu - (-alpha - 1/p')`, must be > 0
    pub nu_lower_slack: f64,
    /// `1/2 - max(1/p' - 1/q, 0) - nu`, must be >= 0
    pub nu_upper_slack: f64,
}

/// Boundedness test `L^p -> L^q` for `1 <= p <= q <= inf` (`q = inf` allowed).
pub fn admissible_l_params(params: &DeCarliParams, p: f64, q: f64) -> Result<LAdmissibility> {
    if !(p >= 1.0) || p.is_nan() {
        return Err(Error::Domain(format!("p = {p} < 1")));
    }
    if !(p <= q) {
        return Err(Error::Domain(format!("p = {p} > q = {q}")));
    }
    if params.alpha < MIN_ORDER {
        return Err(Error::Domain(format!("order alpha = {} < -1/2", params.alpha)));
    }
    let inv_p_conj = 1.0 - 1.0 / p;
    let inv_q = if q.is_infinite() { 0.0 } else { 1.0 / q };
    let mu_target = inv_p_conj - inv_q;
    let mu_gap = params.mu - mu_target;
    let nu_lower_slack = params.nu + params.alpha + inv_p_conj;
    let nu_upper_slack = 0.5 - mu_target.max(0.0) - params.nu;
    let admissible = mu_gap.abs() <= MU_TOLERANCE && nu_lower_slack > 0.0 && nu_upper_slack >= 0.0;
    Ok(LAdmissibility { admissible, mu_target, mu_gap, nu_lower_slack, nu_upper_slack })
}

fn max_discrepancy(a: &RadialProfile, b: &RadialProfile) -> f64 {
    a.values().iter().zip(b.values()).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
}

/// `max_y |y^e L_{nu,mu} f(y) - L_{nu,mu+e} f(y)|`.
pub fn check_invariance_1(params: &DeCarliParams, plan: &HankelPlan, f: &RadialProfile, e: f64) -> Result<f64> {
    let left = apply_l(params, plan, f)?.map(|y, v| y.powf(e) * v)?;
    let shifted = DeCarliParams { mu: params.mu + e, ..*params };
    let right = apply_l(&shifted, plan, f)?;
    Ok(max_discrepancy(&left, &right))
}

/// `max_y |L_{nu,mu} f(y) - L_{nu-sigma,mu+sigma}(x^sigma f)(y)|`.
pub fn check_invariance_2(params: &DeCarliParams, plan: &HankelPlan, f: &RadialProfile, sigma: f64) -> Result<f64> {
    let left = apply_l(params, plan, f)?;
    let moved = DeCarliParams { nu: params.nu - sigma, mu: params.mu + sigma, ..*params };
    let xf = f.map(|x, v| x.powf(sigma) * v)?;
    let right = apply_l(&moved, plan, &xf)?;
    Ok(max_discrepancy(&left, &right))
}

/// Ratios `||L f_lambda||_q / ||f_lambda||_p` over dilations `f_lambda(x) = f(lambda x)`.
///
/// Substituting `x -> x / lambda` gives `L f_lambda(y) = lambda^(mu-1) (L f)(y / lambda)`,
/// so the ratio scales exactly like `lambda^(mu - (1/p' - 1/q))`; it is
/// dilation-invariant only on the admissible line.
#[derive(Debug, Clone, PartialEq)]
pub struct NecessityProbe {
    pub lambdas: Vec<f64>,
    pub ratios: Vec<f64>,
    /// `mu - (1/p' - 1/q)`
    pub predicted_exponent: f64,
    /// `max |ratio(lambda) / (ratio(1) lambda^exponent) - 1|` over the ladder
    pub max_relative_deviation: f64,
    pub monotone: bool,
}

pub fn necessity_probe(
    params: &DeCarliParams,
    plan: &HankelPlan,
    p: f64,
    q: f64,
    f: impl Fn(f64) -> f64,
    lambdas: &[f64],
) -> Result<NecessityProbe> {
    if lambdas.is_empty() || lambdas.iter().any(|&l| !(l > 0.0)) {
        return Err(Error::InvalidArgument("dilation ladder must be positive and non-empty".into()));
    }
    if q.is_infinite() {
        return Err(Error::InvalidArgument("probe needs finite q".into()));
    }
    let report = admissible_l_params(params, p, q)?;
    let mut ratios = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        let f_lambda = RadialProfile::from_fn(plan.grid().clone(), |x| f(lambda * x))?;
        // ||f_lambda||_p from the closure itself on the sub-node rule
        let rule = plan.grid().physical_rule();
        let g: Vec<f64> = rule.points().iter().map(|&x| f(lambda * x).abs().powf(p)).collect();
        let norm_f = rule.integrate(0.0, &g, f(0.0).abs().powf(p)).powf(1.0 / p);
        let lf = apply_l(params, plan, &f_lambda)?;
        let dual_rule = plan.dual_grid().physical_rule();
        let h: Vec<f64> = dual_rule.sample(lf.values()).into_iter().map(|v| v.abs().powf(q)).collect();
        let h0 = dual_rule.sample_origin(lf.values()).abs().powf(q);
        let norm_lf = dual_rule.integrate(0.0, &h, h0).powf(1.0 / q);
        ratios.push(norm_lf / norm_f);
    }
    let exponent = report.mu_gap;
    let base = ratios[0] / lambdas[0].powf(exponent);
    let max_relative_deviation = lambdas
        .iter()
        .zip(&ratios)
        .map(|(&l, &r)| (r / (base * l.powf(exponent)) - 1.0).abs())
        .fold(0.0, f64::max);
    let monotone = ratios.windows(2).all(|w| if exponent > 0.0 { w[1] > w[0] } else { w[1] < w[0] });
    Ok(NecessityProbe {
        lambdas: lambdas.to_vec(),
        ratios,
        predicted_exponent: exponent,
        max_relative_deviation,
        monotone,
    })
}
