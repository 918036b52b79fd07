use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::GalerkinBasis;
use crate::config;
use crate::error::{Error, Result};
use crate::system::{default_scaling_exponent, scaling_powers};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Converged,
    MaxIterations,
    /// no step reduced the residual, or progress stalled
    Diverged,
}

/// A Galerkin point with its gradient sup-norm and functional value.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticalPoint {
    pub coeffs_u: Vec<f64>,
    pub coeffs_v: Vec<f64>,
    pub residual: f64,
    pub phi_value: f64,
    pub iterations: usize,
    pub status: SolveStatus,
    /// a singular Jacobian forced at least one pseudo-inverse step
    pub used_pseudo_inverse: bool,
}

impl CriticalPoint {
    pub fn coeffs(&self) -> Vec<f64> {
        self.coeffs_u.iter().chain(&self.coeffs_v).copied().collect()
    }

    pub fn converged(&self) -> bool {
        self.status == SolveStatus::Converged
    }

    /// `-z`, a critical point whenever `z` is since `Phi` is even.
    pub fn negated(&self) -> Self {
        Self {
            coeffs_u: self.coeffs_u.iter().map(|c| -c).collect(),
            coeffs_v: self.coeffs_v.iter().map(|c| -c).collect(),
            ..self.clone()
        }
    }

    /// Euclidean coefficient distance, equal to the `H^s x H^t` distance up
    /// to the orthonormality error of the basis.
    pub fn distance(&self, other: &CriticalPoint) -> f64 {
        distance(&self.coeffs(), &other.coeffs())
    }
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self { tol: config::TOLERANCE, max_iter: config::MAX_NEWTON_ITER }
    }
}

const NEWTON_HALVINGS: usize = 12;
const LM_TRIES: usize = 12;
/// the merit must drop by this fraction over `STALL_WINDOW` iterations
const STALL_WINDOW: usize = 10;
const STALL_DECREASE: f64 = 0.01;

/// Solves `J d = -g`; falls back to an SVD pseudo-inverse when the LU
/// factorisation is singular or produces a non-finite step.
fn newton_direction(jac: DMatrix<f64>, g: &DVector<f64>) -> (DVector<f64>, bool) {
    let rhs = -g;
    if let Some(d) = jac.clone().lu().solve(&rhs) {
        if d.iter().all(|x| x.is_finite()) {
            return (d, false);
        }
    }
    let svd = jac.svd(true, true);
    let eps = 1e-12 * svd.singular_values.max();
    let d = svd.solve(&rhs, eps).unwrap_or_else(|_| DVector::zeros(g.len()));
    (d, true)
}

/// Farrell-type deflation `m(z) = prod_i (|z - z_i|^-2 + 1)`. The deflated
/// Newton step is the plain step scaled by `1 / (1 - grad ln m . d)`.
struct Deflation<'a> {
    roots: &'a [Vec<f64>],
}

impl Deflation<'_> {
    fn factor(&self, z: &[f64]) -> f64 {
        self.roots.iter().map(|r| 1.0 / distance(z, r).powi(2).max(1e-300) + 1.0).product()
    }

    fn grad_log(&self, z: &[f64]) -> DVector<f64> {
        let mut g = DVector::zeros(z.len());
        for r in self.roots {
            let d2 = distance(z, r).powi(2).max(1e-300);
            let scale = -2.0 / (d2 * d2) / (1.0 / d2 + 1.0);
            for i in 0..z.len() {
                g[i] += scale * (z[i] - r[i]);
            }
        }
        g
    }
}

fn iterate(basis: &GalerkinBasis, initial: &[f64], opts: &NewtonOptions, deflation: &Deflation) -> Result<CriticalPoint> {
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance {} must be positive", opts.tol)));
    }
    let mut z = initial.to_vec();
    let mut g = basis.gradient(&z)?;
    let mut residual = sup(&g);
    let merit = |z: &[f64], g: &[f64]| deflation.factor(z) * g.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut current = merit(&z, &g);
    let mut used_pinv = false;
    let mut iterations = 0;
    let mut history = vec![current];
    let mut status = SolveStatus::MaxIterations;
    while iterations < opts.max_iter {
        if residual < opts.tol {
            status = SolveStatus::Converged;
            break;
        }
        iterations += 1;
        let (mut d, pinv) = newton_direction(basis.hessian(&z)?, &DVector::from_column_slice(&g));
        used_pinv |= pinv;
        if !deflation.roots.is_empty() {
            let denom = 1.0 - deflation.grad_log(&z).dot(&d);
            if denom.abs() > 1e-12 {
                d /= denom;
            }
        }
        let candidate = |d: &DVector<f64>, step: f64| -> Result<(Vec<f64>, Vec<f64>, f64)> {
            let trial: Vec<f64> = z.iter().zip(d.iter()).map(|(a, b)| a + step * b).collect();
            let gt = basis.gradient(&trial)?;
            let m = merit(&trial, &gt);
            Ok((trial, gt, if m.is_finite() { m } else { f64::INFINITY }))
        };
        let mut accepted = None;
        let mut step = 1.0;
        for _ in 0..=NEWTON_HALVINGS {
            let c = candidate(&d, step)?;
            if c.2 < current {
                accepted = Some(c);
                break;
            }
            step *= 0.5;
        }
        if accepted.is_none() {
            // Levenberg-Marquardt steps on |grad Phi|^2 with growing damping
            let hess = basis.hessian(&z)?;
            let normal = hess.tr_mul(&hess);
            let rhs = -hess.tr_mul(&DVector::from_column_slice(&g));
            let mut damping = 1e-6 * normal.diagonal().max();
            for _ in 0..LM_TRIES {
                let mut shifted = normal.clone();
                for i in 0..shifted.nrows() {
                    shifted[(i, i)] += damping;
                }
                if let Some(dl) = shifted.cholesky().map(|c| c.solve(&rhs)) {
                    let c = candidate(&dl, 1.0)?;
                    if c.2 < current {
                        accepted = Some(c);
                        break;
                    }
                }
                damping *= 10.0;
            }
        }
        let (trial, gt, m) = match accepted {
            Some(a) => a,
            None => {
                status = SolveStatus::Diverged;
                break;
            }
        };
        z = trial;
        g = gt;
        residual = sup(&g);
        current = m;
        history.push(m);
        let stalled = history.len() > STALL_WINDOW && m > (1.0 - STALL_DECREASE) * history[history.len() - 1 - STALL_WINDOW];
        if stalled && residual >= opts.tol {
            status = SolveStatus::Diverged;
            break;
        }
    }
    if status == SolveStatus::MaxIterations && residual < opts.tol {
        status = SolveStatus::Converged;
    }
    let k = basis.k();
    Ok(CriticalPoint {
        coeffs_u: z[..k].to_vec(),
        coeffs_v: z[k..].to_vec(),
        residual,
        phi_value: basis.phi(&z)?,
        iterations,
        status,
        used_pseudo_inverse: used_pinv,
    })
}

/// Damped Newton iteration on `grad Phi = 0` in the `2k` coefficients.
/// The result is returned whether or not it converged; see its status.
pub fn newton_solve(basis: &GalerkinBasis, initial: &[f64], opts: &NewtonOptions) -> Result<CriticalPoint> {
    iterate(basis, initial, opts, &Deflation { roots: &[] })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOptions {
    /// number of distinct nontrivial points wanted
    pub target: usize,
    pub budget: usize,
    /// starts run in parallel between merges of the found set
    pub round_size: usize,
    pub seed: u64,
    pub newton: NewtonOptions,
    /// minimum coefficient distance between accepted points
    pub delta: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            target: 1,
            budget: config::START_BUDGET,
            round_size: 8,
            seed: config::SEED,
            newton: NewtonOptions::default(),
            delta: config::DEFLATION_RADIUS,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    /// one representative per pair `+-z`, sorted by increasing `Phi`; at
    /// most `target` of them (the lowest values when a round found more)
    pub points: Vec<CriticalPoint>,
    pub starts_used: usize,
    /// `target - points.len()` when the budget ran out first
    pub shortfall: usize,
}

/// Dilation ladder applied to the starts, cycling with the start index.
const START_LADDER: [f64; 4] = [1.0, 4.0, 16.0, 64.0];
/// Search interval of `ln t` in the ray maximisation.
const RAY_RANGE: f64 = 12.0;

/// Initial point for start `index`: a random direction biased towards
/// `E^+` (where `coeffs_v = coeffs_u`), dilated by `T_lambda` and then moved
/// to the maximum of `Phi` along its ray. Start 0 is the first basis pair
/// `(e_1, f_1)`, which leads to the positive ground state.
pub fn start_point(basis: &GalerkinBasis, seed: u64, index: usize) -> Result<Vec<f64>> {
    let k = basis.k();
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(index as u64));
    let mut plus: Vec<f64> = (0..k).map(|_| StandardNormal.sample(&mut rng)).collect();
    let mut minus: Vec<f64> = (0..k).map(|_| StandardNormal.sample(&mut rng)).collect();
    if index == 0 {
        plus = (0..k).map(|j| if j == 0 { 1.0 } else { 0.0 }).collect();
        minus = vec![0.0; k];
    }
    let norm = plus.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-300);
    let params = basis.system().params();
    let (mu, nu) = scaling_powers(params, default_scaling_exponent(params));
    let lambda = START_LADDER[index % START_LADDER.len()];
    let (su, sv) = (lambda.powf(mu), lambda.powf(nu));
    let mut z = vec![0.0; 2 * k];
    for j in 0..k {
        let a = plus[j] / norm;
        let b = 0.2 * minus[j] / norm / (k as f64).sqrt();
        z[j] = su * (a + b);
        z[k + j] = sv * (a - b);
    }
    ray_maximum(basis, &z)
}

/// `t z` maximising `Phi(t z)` over `t > 0`. The map is unimodal in `t`
/// when the quadratic part of `z` is positive; otherwise `z` is returned.
fn ray_maximum(basis: &GalerkinBasis, z: &[f64]) -> Result<Vec<f64>> {
    let along = |log_t: f64| -> Result<f64> {
        let t = log_t.exp();
        basis.phi(&z.iter().map(|c| t * c).collect::<Vec<_>>())
    };
    let (mut lo, mut hi) = (-RAY_RANGE, RAY_RANGE);
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let (mut f1, mut f2) = (along(x1)?, along(x2)?);
    while hi - lo > 1e-6 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = along(x2)?;
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = along(x1)?;
        }
    }
    let t = (0.5 * (lo + hi)).exp();
    if along(0.5 * (lo + hi))? <= 0.0 {
        return Ok(z.to_vec());
    }
    Ok(z.iter().map(|c| t * c).collect())
}

/// Multi-start deflated Newton search for distinct nontrivial critical points.
///
/// Starts run in rounds of `round_size`; inside a round every start sees the
/// same deflation set (zero and `+-z` for each accepted `z`), and results are
/// merged in start order afterwards, so the outcome does not depend on
/// thread scheduling.
pub fn find_multiple(basis: &GalerkinBasis, opts: &SearchOptions) -> Result<SearchResult> {
    if opts.target == 0 {
        return Err(Error::InvalidArgument("target count must be at least 1".into()));
    }
    if opts.round_size == 0 {
        return Err(Error::InvalidArgument("round size must be at least 1".into()));
    }
    let k = basis.k();
    let mut found: Vec<CriticalPoint> = Vec::new();
    let mut used = 0;
    while found.len() < opts.target && used < opts.budget {
        let count = opts.round_size.min(opts.budget - used);
        let mut roots = vec![vec![0.0; 2 * k]];
        for cp in &found {
            roots.push(cp.coeffs());
            roots.push(cp.negated().coeffs());
        }
        let results: Vec<Result<CriticalPoint>> = (used..used + count)
            .into_par_iter()
            .map(|i| {
                let z0 = start_point(basis, opts.seed, i)?;
                let deflated = iterate(basis, &z0, &opts.newton, &Deflation { roots: &roots })?;
                // polish without deflation so the residual refers to grad Phi itself
                let polished = iterate(basis, &deflated.coeffs(), &opts.newton, &Deflation { roots: &[] })?;
                Ok(CriticalPoint { iterations: deflated.iterations + polished.iterations, ..polished })
            })
            .collect();
        used += count;
        for cp in results {
            let cp = cp?;
            if !cp.converged() {
                continue;
            }
            let nontrivial = cp.coeffs().iter().map(|x| x * x).sum::<f64>().sqrt() > opts.delta;
            let fresh = found.iter().all(|f| f.distance(&cp) > opts.delta && f.negated().distance(&cp) > opts.delta);
            if nontrivial && fresh {
                let cp = if basis.u_at_origin(&cp.coeffs())? < 0.0 { cp.negated() } else { cp };
                found.push(cp);
            }
        }
    }
    found.sort_by(|a, b| a.phi_value.total_cmp(&b.phi_value));
    found.truncate(opts.target);
    let shortfall = opts.target.saturating_sub(found.len());
    Ok(SearchResult { points: found, starts_used: used, shortfall })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::hankel::HankelPlan;
    use crate::solver::build_basis;
    use crate::system::{ProblemParams, SystemContext};

    fn default_basis(k: usize) -> GalerkinBasis {
        let plan = Arc::new(HankelPlan::new(0.5, 256, 30.0).unwrap());
        let sys = SystemContext::new(ProblemParams::new(3, 4.0, 4.0, 0.5, 0.5).unwrap(), plan).unwrap();
        build_basis(&sys, k).unwrap()
    }

    #[test]
    fn zero_start_stays_trivial() {
        let b = default_basis(6);
        let cp = newton_solve(&b, &[0.0; 12], &NewtonOptions::default()).unwrap();
        assert!(cp.converged() && cp.residual < 1e-14 && cp.iterations == 0);
    }

    #[test]
    fn ground_state_from_first_start() {
        let b = default_basis(8);
        let z0 = start_point(&b, 1, 0).unwrap();
        let cp = newton_solve(&b, &z0, &NewtonOptions::default()).unwrap();
        assert!(cp.converged(), "{:?} {}", cp.status, cp.residual);
        assert!(cp.phi_value > 0.0);
        let neg = cp.negated();
        let g = b.gradient(&neg.coeffs()).unwrap();
        assert!(sup(&g) < 1e-10);
        assert_eq!(b.phi(&neg.coeffs()).unwrap(), cp.phi_value);
    }

    #[test]
    fn rejects_nonpositive_tolerance() {
        let b = default_basis(2);
        let opts = NewtonOptions { tol: 0.0, ..Default::default() };
        assert!(newton_solve(&b, &[0.0; 4], &opts).is_err());
    }

    #[test]
    fn deflation_factor_blows_up_at_roots() {
        let roots = vec![vec![1.0, 0.0], vec![0.0, 0.0]];
        let d = Deflation { roots: &roots };
        assert!(d.factor(&[1.0 + 1e-8, 0.0]) > 1e15);
        assert!((d.factor(&[100.0, 100.0]) - 1.0).abs() < 1e-3);
        // gradient of ln m against differences
        let z = [0.3, 0.7];
        let g = d.grad_log(&z);
        for i in 0..2 {
            let mut zp = z;
            let mut zm = z;
            zp[i] += 1e-6;
            zm[i] -= 1e-6;
            let fd = (d.factor(&zp).ln() - d.factor(&zm).ln()) / 2e-6;
            assert!((fd - g[i]).abs() < 1e-6 * g.amax());
        }
    }

    #[test]
    fn search_is_reproducible_and_distinct() {
        let b = default_basis(8);
        let opts = SearchOptions { target: 2, budget: 16, ..Default::default() };
        let first = find_multiple(&b, &opts).unwrap();
        let second = find_multiple(&b, &opts).unwrap();
        assert_eq!(first, second);
        assert_eq!(first.shortfall, 0);
        let pts = &first.points;
        assert!(pts[0].distance(&pts[1]) > opts.delta && pts[0].negated().distance(&pts[1]) > opts.delta);
        assert!(pts[0].phi_value < pts[1].phi_value);
        assert!(pts.iter().all(|p| b.u_at_origin(&p.coeffs()).unwrap() > 0.0));
        assert!(find_multiple(&b, &SearchOptions { target: 0, ..opts }).is_err());
    }
}
