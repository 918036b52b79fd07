//! The weighted Hamiltonian system
//!
//! ```text
//! -Lap u + u = |x|^a |v|^(p-2) v
//! -Lap v + v = |x|^b |u|^(q-2) u
//! ```
//!
//! with its admissibility conditions, the split `s + t = 2`, the functional
//! `Phi(u, v) = int A^s u A^t v - int H(x, u, v)` and the decomposition of
//! `H^s x H^t` into the eigenspaces `E^+` and `E^-` of its quadratic part.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::embedding::{AdmissibilityReport, Condition};
use crate::error::{Error, Result};
use crate::hankel::{HankelPlan, RadialProfile};
use crate::solver::{CriticalPoint, GalerkinBasis};
use crate::space::{apply_multiplier, hs_norm, l2_pairing, weighted_lq_integral, weighted_lq_norm, SobolevContext};

/// `(n, p, q, a, b)` plus the split `(s, t)`, `s + t = 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemParams {
    pub n: u32,
    pub p: f64,
    pub q: f64,
    pub a: f64,
    pub b: f64,
    pub s: f64,
    pub t: f64,
}

impl ProblemParams {
    /// Validates the conditions and picks `s` at the middle of its feasible interval.
    pub fn new(n: u32, p: f64, q: f64, a: f64, b: f64) -> Result<Self> {
        let report = check_conditions(n, p, q, a, b);
        if !report.overall {
            return Err(Error::Domain(format!("system parameters not admissible:\n{report}")));
        }
        let split = choose_st(n, p, q, a, b)?;
        Ok(Self { n, p, q, a, b, s: split.s, t: split.t })
    }

    /// Overrides `s` (and `t = 2 - s`) inside the feasible interval.
    pub fn with_s(self, s: f64) -> Result<Self> {
        let split = choose_st(self.n, self.p, self.q, self.a, self.b)?;
        if !(s > split.lower && s < split.upper) {
            return Err(Error::Domain(format!("s = {s} outside the feasible interval ({}, {})", split.lower, split.upper)));
        }
        Ok(Self { s, t: 2.0 - s, ..self })
    }

    pub fn is_symmetric(&self) -> bool {
        self.p == self.q && self.a == self.b && self.s == self.t
    }

    /// Parses a key=value configuration (see [`RawParams::parse`]) and
    /// validates it.
    pub fn parse(text: &str) -> Result<Self> {
        RawParams::parse(text)?.build()
    }

    pub fn to_config(&self) -> String {
        format!("n={} p={} q={} a={} b={} s={}", self.n, self.p, self.q, self.a, self.b, self.s)
    }
}

impl fmt::Display for ProblemParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_config())
    }
}

/// Unvalidated `(n, p, q, a, b)` and an optional split `s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawParams {
    pub n: u32,
    pub p: f64,
    pub q: f64,
    pub a: f64,
    pub b: f64,
    pub s: Option<f64>,
}

impl RawParams {
    /// Parses `key=value` pairs separated by whitespace (spaces around `=`
    /// are allowed); `#` starts a comment. Keys `n p q a b` are required,
    /// `s` is optional.
    pub fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("");
            let line = line.split('=').map(str::trim).collect::<Vec<_>>().join("=");
            for token in line.split_whitespace() {
                let (key, value) =
                    token.split_once('=').ok_or_else(|| Error::Parse(format!("expected key=value, got {token:?}")))?;
                let key = key.trim();
                if !matches!(key, "n" | "p" | "q" | "a" | "b" | "s") {
                    return Err(Error::Parse(format!("unknown key {key:?}")));
                }
                if map.insert(key.to_string(), value.trim().to_string()).is_some() {
                    return Err(Error::Parse(format!("duplicate key {key:?}")));
                }
            }
        }
        let real = |key: &str| -> Result<f64> {
            let raw = map.get(key).ok_or_else(|| Error::Parse(format!("missing key {key:?}")))?;
            let v: f64 = raw.parse().map_err(|_| Error::Parse(format!("{key}={raw} is not a number")))?;
            if !v.is_finite() {
                return Err(Error::Parse(format!("{key}={raw} is not finite")));
            }
            Ok(v)
        };
        let raw_n = map.get("n").ok_or_else(|| Error::Parse("missing key \"n\"".into()))?;
        let n: u32 = raw_n.parse().map_err(|_| Error::Parse(format!("n={raw_n} is not a positive integer")))?;
        let s = if map.contains_key("s") { Some(real("s")?) } else { None };
        Ok(Self { n, p: real("p")?, q: real("q")?, a: real("a")?, b: real("b")?, s })
    }

    pub fn report(&self) -> AdmissibilityReport {
        check_conditions(self.n, self.p, self.q, self.a, self.b)
    }

    /// Validated parameters, with the requested split if any.
    pub fn build(&self) -> Result<ProblemParams> {
        let params = ProblemParams::new(self.n, self.p, self.q, self.a, self.b)?;
        match self.s {
            Some(s) => params.with_s(s),
            None => Ok(params),
        }
    }
}

pub const COND_P_ABOVE_TWO: &str = "(2) p > 2";
pub const COND_Q_ABOVE_TWO: &str = "(2) q > 2";
pub const COND_SUPERLINEAR: &str = "(2) 1/p + 1/q < 1";
pub const COND_A_POSITIVE: &str = "(3) a > 0";
pub const COND_A_UPPER: &str = "(3) a < (n-1)(p-2)/2";
pub const COND_B_POSITIVE: &str = "(3) b > 0";
pub const COND_B_UPPER: &str = "(3) b < (n-1)(q-2)/2";
pub const COND_SUBCRITICAL: &str = "(4) (n+a)/p + (n+b)/q > n-2";
pub const COND_Q_HIGH_DIM: &str = "(5) q < 2(n+b)/(n-4) if n >= 5";
pub const COND_P_HIGH_DIM: &str = "(5) p < 2(n+a)/(n-4) if n >= 5";

/// Conditions (2)-(5), each a strict inequality with its margin. The
/// high-dimension bounds hold vacuously (margin `+inf`) for `n <= 4`.
pub fn check_conditions(n: u32, p: f64, q: f64, a: f64, b: f64) -> AdmissibilityReport {
    let nf = n as f64;
    let high_dim = |exp: f64, w: f64| if n >= 5 { 2.0 * (nf + w) / (nf - 4.0) - exp } else { f64::INFINITY };
    let mut conditions = vec![
        Condition::strict(COND_P_ABOVE_TWO, p - 2.0),
        Condition::strict(COND_Q_ABOVE_TWO, q - 2.0),
        Condition::strict(COND_SUPERLINEAR, 1.0 - 1.0 / p - 1.0 / q),
        Condition::strict(COND_A_POSITIVE, a),
        Condition::strict(COND_A_UPPER, (nf - 1.0) * (p - 2.0) / 2.0 - a),
        Condition::strict(COND_B_POSITIVE, b),
        Condition::strict(COND_B_UPPER, (nf - 1.0) * (q - 2.0) / 2.0 - b),
        Condition::strict(COND_SUBCRITICAL, (nf + a) / p + (nf + b) / q - (nf - 2.0)),
        Condition::strict(COND_Q_HIGH_DIM, high_dim(q, b)),
        Condition::strict(COND_P_HIGH_DIM, high_dim(p, a)),
    ];
    if n < 2 {
        conditions.insert(0, Condition::strict("n >= 2", nf - 1.5));
    }
    AdmissibilityReport::from_conditions(conditions)
}

/// Open interval of admissible `s` and its midpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StSplit {
    pub lower: f64,
    pub upper: f64,
    pub s: f64,
    pub t: f64,
}

/// `s` with `0 < s, t < n/2`, `s + t = 2`, `q < 2(n+b)/(n-2s)` and `p < 2(n+a)/(n-2t)`.
pub fn choose_st(n: u32, p: f64, q: f64, a: f64, b: f64) -> Result<StSplit> {
    let nf = n as f64;
    let lower = [0.0, (nf - 2.0 * (nf + b) / q) / 2.0, 2.0 - nf / 2.0].into_iter().fold(f64::NEG_INFINITY, f64::max);
    let upper = [nf / 2.0, 2.0 - (nf - 2.0 * (nf + a) / p) / 2.0, 2.0].into_iter().fold(f64::INFINITY, f64::min);
    if !(lower < upper) {
        return Err(Error::EmptyFeasibleInterval { lower, upper });
    }
    let s = 0.5 * (lower + upper);
    Ok(StSplit { lower, upper, s, t: 2.0 - s })
}

/// `z = (u, v)` on one physical grid.
#[derive(Debug, Clone)]
pub struct StatePair {
    pub u: RadialProfile,
    pub v: RadialProfile,
}

impl StatePair {
    pub fn new(u: RadialProfile, v: RadialProfile) -> Result<Self> {
        u.ensure_same_grid(&v)?;
        Ok(Self { u, v })
    }

    pub fn zeros(plan: &HankelPlan) -> Self {
        Self { u: RadialProfile::zeros(plan.grid().clone()), v: RadialProfile::zeros(plan.grid().clone()) }
    }

    pub fn scaled(&self, cu: f64, cv: f64) -> Self {
        Self { u: self.u.scaled(cu), v: self.v.scaled(cv) }
    }

    pub fn add(&self, other: &StatePair) -> Result<Self> {
        Ok(Self { u: self.u.axpy(1.0, &other.u)?, v: self.v.axpy(1.0, &other.v)? })
    }
}

/// Problem parameters bound to a transform plan of order `n/2 - 1`.
#[derive(Debug, Clone)]
pub struct SystemContext {
    params: ProblemParams,
    ctx_s: SobolevContext,
    ctx_t: SobolevContext,
}

impl SystemContext {
    pub fn new(params: ProblemParams, plan: Arc<HankelPlan>) -> Result<Self> {
        let ctx_s = SobolevContext::new(params.n, params.s, plan)?;
        let ctx_t = ctx_s.with_order(params.t);
        Ok(Self { params, ctx_s, ctx_t })
    }

    pub fn params(&self) -> &ProblemParams {
        &self.params
    }

    pub fn plan(&self) -> &Arc<HankelPlan> {
        self.ctx_s.plan()
    }

    pub fn ctx_s(&self) -> &SobolevContext {
        &self.ctx_s
    }

    pub fn ctx_t(&self) -> &SobolevContext {
        &self.ctx_t
    }

    /// `A^(-t) A^s`, the multiplier `(1 + rho^2)^((s-t)/2)`.
    pub fn lift(&self, u: &RadialProfile) -> Result<RadialProfile> {
        let h = 0.5 * (self.params.s - self.params.t);
        if h == 0.0 {
            return Ok(u.clone());
        }
        apply_multiplier(self.plan(), u, |rho| (1.0 + rho * rho).powf(h))
    }

    /// `A^(-s) A^t`, inverse of [`SystemContext::lift`].
    pub fn unlift(&self, v: &RadialProfile) -> Result<RadialProfile> {
        let h = 0.5 * (self.params.t - self.params.s);
        if h == 0.0 {
            return Ok(v.clone());
        }
        apply_multiplier(self.plan(), v, |rho| (1.0 + rho * rho).powf(h))
    }

    /// `Q(z) = int A^s u A^t v`.
    pub fn quadratic_part(&self, z: &StatePair) -> Result<f64> {
        l2_pairing(&self.ctx_s, &self.ctx_t, &z.u, &z.v)
    }

    /// Symmetric bilinear form with `B[z, z] = Q(z)`.
    pub fn bilinear(&self, z: &StatePair, w: &StatePair) -> Result<f64> {
        let a = l2_pairing(&self.ctx_s, &self.ctx_t, &z.u, &w.v)?;
        let b = l2_pairing(&self.ctx_s, &self.ctx_t, &w.u, &z.v)?;
        Ok(0.5 * (a + b))
    }

    /// `int H(x, u, v) = int |x|^b |u|^q / q + |x|^a |v|^p / p`.
    pub fn hamiltonian_integral(&self, z: &StatePair) -> Result<f64> {
        let ProblemParams { n, p, q, a, b, .. } = self.params;
        Ok(weighted_lq_integral(n, q, b, &z.u)? / q + weighted_lq_integral(n, p, a, &z.v)? / p)
    }

    /// `||z||_E^2 = ||u||_{H^s}^2 + ||v||_{H^t}^2`.
    pub fn energy_norm(&self, z: &StatePair) -> Result<f64> {
        Ok(hs_norm(&self.ctx_s, &z.u)?.hypot(hs_norm(&self.ctx_t, &z.v)?))
    }

    /// The point `(u, A^(-t) A^s u)` of `E^+`.
    pub fn positive_direction(&self, u: &RadialProfile) -> Result<StatePair> {
        StatePair::new(u.clone(), self.lift(u)?)
    }
}

/// `Phi(z) = Q(z) - int H(x, u, v)`.
pub fn phi(sys: &SystemContext, z: &StatePair) -> Result<f64> {
    Ok(sys.quadratic_part(z)? - sys.hamiltonian_integral(z)?)
}

/// Gradient of `Phi` in Galerkin coordinates `(coeffs_u, coeffs_v)`.
pub fn grad_phi(basis: &GalerkinBasis, coeffs: &[f64]) -> Result<Vec<f64>> {
    basis.gradient(coeffs)
}

/// `z = z^+ + z^-` with `z^+ in E^+` and `z^- in E^-`.
pub fn eigen_split(sys: &SystemContext, z: &StatePair) -> Result<(StatePair, StatePair)> {
    let u_tilde = sys.unlift(&z.v)?;
    let plus_u = z.u.axpy(1.0, &u_tilde)?.scaled(0.5);
    let minus_u = z.u.axpy(-1.0, &u_tilde)?.scaled(0.5);
    let plus = StatePair::new(plus_u.clone(), sys.lift(&plus_u)?)?;
    let minus = StatePair::new(minus_u.clone(), sys.lift(&minus_u)?.scaled(-1.0))?;
    Ok((plus, minus))
}

/// `max(p, q) + 1`.
pub fn default_scaling_exponent(params: &ProblemParams) -> f64 {
    params.p.max(params.q) + 1.0
}

/// `T_lambda(u, v) = (lambda^mu u, lambda^nu v)`, `mu = (m - q)/q`, `nu = (m - p)/p`.
pub fn scaling_t(params: &ProblemParams, m: f64, lambda: f64, z: &StatePair) -> Result<StatePair> {
    if !(m > params.p.max(params.q)) {
        return Err(Error::Domain(format!("scaling exponent m = {m} must exceed max(p, q)")));
    }
    if !(lambda > 0.0) {
        return Err(Error::Domain(format!("lambda = {lambda} must be positive")));
    }
    let (mu, nu) = scaling_powers(params, m);
    Ok(z.scaled(lambda.powf(mu), lambda.powf(nu)))
}

pub fn scaling_powers(params: &ProblemParams, m: f64) -> (f64, f64) {
    ((m - params.q) / params.q, (m - params.p) / params.p)
}

/// A-priori bound ratios and the Hamiltonian identity at a Galerkin point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsReport {
    /// `||v||_{H^t} / (||u||^(q-1)_{L^q(|x|^b)} + 1)`
    pub v_bound_ratio: f64,
    /// `||u||_{H^s} / (||v||^(p-1)_{L^p(|x|^a)} + 1)`
    pub u_bound_ratio: f64,
    /// `|(pq/(p+q) - 1) int H - (Phi(z) - Phi'(z) w)|`
    pub identity_residual: f64,
    pub hamiltonian: f64,
    /// true when `z = 0`, where the ratios carry no information
    pub degenerate: bool,
}

/// Diagnostics of the Palais-Smale bounds at `cp`. The identity uses
/// `w = (pq/(p+q)) (u/q, v/p)`, for which
/// `Phi(z) - Phi'(z) w = (pq/(p+q) - 1) int H` holds for every `z`.
pub fn ps_diagnostics(basis: &GalerkinBasis, cp: &CriticalPoint) -> Result<PsReport> {
    let sys = basis.system();
    let ProblemParams { n, p, q, a, b, .. } = *sys.params();
    let coeffs = cp.coeffs();
    let z = basis.state(&coeffs)?;
    let hamiltonian = sys.hamiltonian_integral(&z)?;
    let kappa = p * q / (p + q);
    let k = basis.k();
    let grad = basis.gradient(&coeffs)?;
    let directional: f64 = (0..k)
        .map(|i| grad[i] * kappa * coeffs[i] / q + grad[k + i] * kappa * coeffs[k + i] / p)
        .sum();
    let phi_value = basis.phi(&coeffs)?;
    let identity_residual = ((kappa - 1.0) * hamiltonian - (phi_value - directional)).abs();
    let v_norm = hs_norm(sys.ctx_t(), &z.v)?;
    let u_norm = hs_norm(sys.ctx_s(), &z.u)?;
    let lu = weighted_lq_norm(n, q, b, &z.u)?;
    let lv = weighted_lq_norm(n, p, a, &z.v)?;
    Ok(PsReport {
        v_bound_ratio: v_norm / (lu.powf(q - 1.0) + 1.0),
        u_bound_ratio: u_norm / (lv.powf(p - 1.0) + 1.0),
        identity_residual,
        hamiltonian,
        degenerate: coeffs.iter().all(|&c| c == 0.0),
    })
}

/// Minimum of `Phi` over `directions` random points of `E^+` in the
/// Galerkin space with `||z||_E = radius`. With orthonormal `e` and `f`,
/// `E^+` is `coeffs_v = coeffs_u` and `||z||_E = sqrt(2) |coeffs_u|`.
pub fn small_sphere_minimum(basis: &GalerkinBasis, radius: f64, directions: usize, seed: u64) -> Result<f64> {
    if !(radius > 0.0) || directions == 0 {
        return Err(Error::InvalidArgument(format!("radius {radius} and {directions} directions")));
    }
    let k = basis.k();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut lowest = f64::INFINITY;
    for _ in 0..directions {
        let a: Vec<f64> = (0..k).map(|_| StandardNormal.sample(&mut rng)).collect();
        let norm = a.iter().map(|x| x * x).sum::<f64>().sqrt() * 2f64.sqrt();
        let scale = radius / norm;
        let coeffs: Vec<f64> = a.iter().chain(&a).map(|x| scale * x).collect();
        lowest = lowest.min(basis.phi(&coeffs)?);
    }
    Ok(lowest)
}

/// One entry of the `Phi(T_lambda z)` table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LadderRow {
    /// 0 for `z = 0`, then the sampled states
    pub sample: usize,
    pub lambda: f64,
    pub phi: f64,
}

/// `Phi(T_lambda z)` for `lambda = 1, 2, 4, ..., 2^(rungs-1)`, for `z = 0` and
/// `samples` random unit-coefficient states.
pub fn scaling_ladder(basis: &GalerkinBasis, samples: usize, rungs: usize, seed: u64) -> Result<Vec<LadderRow>> {
    let params = basis.system().params();
    let (mu, nu) = scaling_powers(params, default_scaling_exponent(params));
    let k = basis.k();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut states = vec![vec![0.0; 2 * k]];
    for _ in 0..samples {
        let z: Vec<f64> = (0..2 * k).map(|_| StandardNormal.sample(&mut rng)).collect();
        let norm = z.iter().map(|x| x * x).sum::<f64>().sqrt();
        states.push(z.into_iter().map(|x| x / norm).collect());
    }
    let mut rows = Vec::with_capacity(states.len() * rungs);
    for (sample, z) in states.iter().enumerate() {
        for rung in 0..rungs {
            let lambda = 2f64.powi(rung as i32);
            let (su, sv) = (lambda.powf(mu), lambda.powf(nu));
            let scaled: Vec<f64> = z.iter().enumerate().map(|(i, c)| if i < k { su * c } else { sv * c }).collect();
            rows.push(LadderRow { sample, lambda, phi: basis.phi(&scaled)? });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn condition_examples() {
        assert!(check_conditions(3, 4.0, 4.0, 0.5, 0.5).overall);
        let r = check_conditions(3, 4.0, 4.0, 0.0, 0.0);
        assert!(!r.overall);
        assert!(!r.get(COND_A_POSITIVE).unwrap().satisfied);
        let high = check_conditions(6, 3.0, 3.0, 0.1, 0.1);
        assert!(high.overall, "{high}");
        assert!((high.margin(COND_Q_HIGH_DIM) - 3.1).abs() < 1e-12);
        assert!((high.margin(COND_SUBCRITICAL) - (2.0 * 6.1 / 3.0 - 4.0)).abs() < 1e-12);
        assert_eq!(check_conditions(4, 4.0, 4.0, 0.5, 0.5).margin(COND_Q_HIGH_DIM), f64::INFINITY);
    }

    #[test]
    fn split_examples() {
        let a = choose_st(3, 4.0, 4.0, 0.5, 0.5).unwrap();
        assert!((a.lower - 0.625).abs() < 1e-15 && (a.upper - 1.375).abs() < 1e-15);
        assert_eq!((a.s, a.t), (1.0, 1.0));
        let b = choose_st(6, 3.0, 3.0, 0.1, 0.1).unwrap();
        assert!((b.s - 1.0).abs() < 1e-15 && b.lower < 1.0 && b.upper > 1.0);
        let c = choose_st(3, 3.0, 6.0, 0.4, 1.2).unwrap();
        assert!((c.s + c.t - 2.0).abs() == 0.0 && c.lower < c.s && c.s < c.upper);
        assert!(matches!(choose_st(3, 10.0, 10.0, 0.5, 0.5), Err(Error::EmptyFeasibleInterval { .. })));
    }

    #[test]
    fn config_roundtrip() {
        let p = ProblemParams::parse("n=3 p=4 q=4 a=0.5 b=0.5").unwrap();
        assert_eq!((p.s, p.t), (1.0, 1.0));
        assert_eq!(ProblemParams::parse(&p.to_config()).unwrap(), p);
        let o = ProblemParams::parse("# default\nn=3 p=4\nq=4 a=0.5 b=0.5 s=0.9").unwrap();
        assert_eq!(o.s, 0.9);
        assert!((o.t - 1.1).abs() < 1e-15);
        assert_eq!(ProblemParams::parse("n = 3\np= 4 q =4\na = 0.5 b = 0.5").unwrap(), p);
        assert!(matches!(ProblemParams::parse("n=3 p=4 q=4 a=0.5"), Err(Error::Parse(_))));
        assert!(matches!(ProblemParams::parse("n=3 p=x q=4 a=0.5 b=0.5"), Err(Error::Parse(_))));
        assert!(matches!(ProblemParams::parse("n=3 p=4 q=4 a=0 b=0"), Err(Error::Domain(_))));
        assert!(ProblemParams::parse("n=3 p=4 q=4 a=0.5 b=0.5 s=1.5").is_err());
    }

    fn gaussian_system() -> (SystemContext, RadialProfile, RadialProfile) {
        let plan = Arc::new(HankelPlan::new(0.5, 256, 30.0).unwrap());
        let params = ProblemParams::new(3, 3.0, 6.0, 0.4, 1.2).unwrap();
        let sys = SystemContext::new(params, plan.clone()).unwrap();
        let u = RadialProfile::from_fn(plan.grid().clone(), |r| (-0.5 * r * r).exp()).unwrap();
        let v = RadialProfile::from_fn(plan.grid().clone(), |r| (1.0 - r * r) * (-r * r).exp()).unwrap();
        (sys, u, v)
    }

    #[test]
    fn eigen_split_reconstructs_and_separates_signs() {
        let (sys, u, v) = gaussian_system();
        let z = StatePair::new(u, v).unwrap();
        let (plus, minus) = eigen_split(&sys, &z).unwrap();
        let back = plus.add(&minus).unwrap();
        for (a, b) in back.u.values().iter().zip(z.u.values()).chain(back.v.values().iter().zip(z.v.values())) {
            assert!((a - b).abs() < 1e-10);
        }
        assert!(sys.quadratic_part(&plus).unwrap() > 0.0);
        assert!(sys.quadratic_part(&minus).unwrap() < 0.0);
        assert!(sys.bilinear(&plus, &minus).unwrap().abs() < 1e-10);
    }

    #[test]
    fn lift_and_unlift_are_inverse() {
        let (sys, u, _) = gaussian_system();
        let back = sys.unlift(&sys.lift(&u).unwrap()).unwrap();
        for (a, b) in back.values().iter().zip(u.values()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn quadratic_part_scales_exactly() {
        let (sys, u, v) = gaussian_system();
        let params = *sys.params();
        let z = StatePair::new(u, v).unwrap();
        let m = default_scaling_exponent(&params);
        let (mu, nu) = scaling_powers(&params, m);
        let q0 = sys.quadratic_part(&z).unwrap();
        for lambda in [0.5, 2.0, 8.0] {
            let zl = scaling_t(&params, m, lambda, &z).unwrap();
            let want = lambda.powf(mu + nu) * q0;
            assert!((sys.quadratic_part(&zl).unwrap() - want).abs() <= 1e-10 * want.abs().max(1.0));
        }
        assert!(scaling_t(&params, params.q, 2.0, &z).is_err());
        assert!(scaling_t(&params, m, 0.0, &z).is_err());
    }

    #[test]
    fn phi_is_even() {
        let (sys, u, v) = gaussian_system();
        let z = StatePair::new(u, v).unwrap();
        assert_eq!(phi(&sys, &z).unwrap(), phi(&sys, &z.scaled(-1.0, -1.0)).unwrap());
    }
}
