use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;
use statrs::function::gamma::ln_gamma;

use super::bessel::{bessel_j_unchecked, MIN_ORDER};
use super::grid::{RadialGrid, RadialProfile};
use crate::error::{Error, Result};

/// Smallest plan size accepted by [`HankelPlan::new`].
pub const MIN_PLAN_SIZE: usize = 8;

/// Discrete, self-inverse Fourier-Bessel transform
/// `H f(y) = y^(-2 alpha - 1) int_0^inf (x y)^(alpha + 1) f(x) J_alpha(x y) dx`.
///
/// Physical nodes are `r_k = j_k R / S`, dual nodes `rho_k = j_k / R` with
/// `S = j_{alpha,N+1}`. The dual grid is itself the physical grid of cutoff
/// `S / R`, so one symmetric kernel `J_alpha(j_m j_k / S)` serves both
/// directions and applying the plan twice returns to the starting grid.
#[derive(Debug)]
pub struct HankelPlan {
    alpha: f64,
    grid: Arc<RadialGrid>,
    dual_grid: Arc<RadialGrid>,
    kernel: Vec<f64>,
}

impl HankelPlan {
    pub fn new(alpha: f64, size: usize, cutoff: f64) -> Result<Self> {
        if !(alpha >= MIN_ORDER) {
            return Err(Error::Domain(format!("transform order {alpha} < -1/2")));
        }
        if size < MIN_PLAN_SIZE {
            return Err(Error::InvalidArgument(format!("plan size {size} < {MIN_PLAN_SIZE}")));
        }
        if !(cutoff > 0.0 && cutoff.is_finite()) {
            return Err(Error::InvalidArgument(format!("cutoff {cutoff} must be positive")));
        }
        let grid = RadialGrid::new(alpha, size, cutoff)?;
        let s = grid.last_zero;
        let dual = RadialGrid::from_zeros(alpha, s / cutoff, grid.zeros.clone(), s);
        let zeros = &grid.zeros;
        let kernel: Vec<f64> = (0..size)
            .into_par_iter()
            .flat_map_iter(|m| {
                let jm = zeros[m];
                zeros.iter().map(move |&jk| bessel_j_unchecked(alpha, jm * jk / s))
            })
            .collect();
        Ok(Self { alpha, grid: Arc::new(grid), dual_grid: Arc::new(dual), kernel })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn size(&self) -> usize {
        self.grid.size()
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn dual_grid(&self) -> &Arc<RadialGrid> {
        &self.dual_grid
    }

    /// Row `m` of the kernel, `J_alpha(j_m j_k / S)` for all `k`.
    pub(crate) fn kernel_row(&self, m: usize) -> &[f64] {
        let n = self.size();
        &self.kernel[m * n..(m + 1) * n]
    }

    /// Source and target grids for a profile living on either side.
    fn direction(&self, f: &RadialProfile) -> Result<(&Arc<RadialGrid>, &Arc<RadialGrid>)> {
        if **f.grid() == *self.grid {
            Ok((&self.grid, &self.dual_grid))
        } else if **f.grid() == *self.dual_grid {
            Ok((&self.dual_grid, &self.grid))
        } else {
            Err(Error::GridMismatch(format!(
                "profile grid (alpha {}, N {}, R {}) belongs to neither side of the plan",
                f.grid().alpha(),
                f.grid().size(),
                f.grid().cutoff()
            )))
        }
    }

    /// `x_k^(alpha+1) w_k f_k`: the quadrature-weighted source samples.
    fn weighted_source(&self, source: &RadialGrid, f: &[f64]) -> Vec<f64> {
        source
            .nodes()
            .iter()
            .zip(source.weights())
            .zip(f)
            .map(|((&x, &w), &v)| x.powf(self.alpha + 1.0) * w * v)
            .collect()
    }

    /// Transforms a profile on either grid onto the other one.
    pub fn apply(&self, f: &RadialProfile) -> Result<RadialProfile> {
        let (source, target) = self.direction(f)?;
        let src = self.weighted_source(source, f.values());
        let out: Vec<f64> = (0..self.size())
            .into_par_iter()
            .map(|m| {
                let acc: f64 = self
                    .kernel_row(m).iter().zip(&src).map(|(k, s)| k * s).sum();
                target.nodes()[m].powf(-self.alpha) * acc
            })
            .collect();
        RadialProfile::new(target.clone(), out)
    }

    /// Evaluates the continuous transform of `f` at arbitrary points of the
    /// opposite domain, using the same quadrature as [`HankelPlan::apply`].
    pub fn transform_at(&self, f: &RadialProfile, points: &[f64]) -> Result<Vec<f64>> {
        let (source, _) = self.direction(f)?;
        let src = self.weighted_source(source, f.values());
        let alpha = self.alpha;
        let small_limit = (-ln_gamma(alpha + 1.0) - alpha * 2f64.ln()).exp();
        let out = points
            .par_iter()
            .map(|&y| {
                if y < 0.0 {
                    return f64::NAN;
                }
                source
                    .nodes()
                    .iter()
                    .zip(&src)
                    .map(|(&x, &s)| {
                        // y^(-alpha) J_alpha(x y), with its finite limit at y -> 0
                        let k = if y * x < 1e-8 {
                            small_limit * x.powf(alpha)
                        } else {
                            y.powf(-alpha) * bessel_j_unchecked(alpha, x * y)
                        };
                        k * s
                    })
                    .sum()
            })
            .collect::<Vec<f64>>();
        if out.iter().any(|v| v.is_nan()) {
            return Err(Error::Domain("evaluation points must be >= 0".into()));
        }
        Ok(out)
    }

    /// Band-limited interpolation of a physical-side (or dual-side) profile at
    /// arbitrary radii of its own domain.
    pub fn interpolate(&self, f: &RadialProfile, points: &[f64]) -> Result<Vec<f64>> {
        let spectrum = self.apply(f)?;
        self.transform_at(&spectrum, points)
    }
}

/// Fourier transform of a radial function in `R^n`:
/// `u_hat(|w|) = (2 pi)^(n/2) H_{n/2-1}(u_0)(|w|)`, returned on the dual grid.
pub fn radial_fourier(plan: &HankelPlan, dim: u32, u: &RadialProfile) -> Result<RadialProfile> {
    check_dimension(plan, dim)?;
    if **u.grid() != **plan.grid() {
        return Err(Error::GridMismatch("radial_fourier expects a physical-side profile".into()));
    }
    let h = plan.apply(u)?;
    Ok(h.scaled((2.0 * PI).powf(dim as f64 / 2.0)))
}

pub(crate) fn check_dimension(plan: &HankelPlan, dim: u32) -> Result<()> {
    if dim < 2 {
        return Err(Error::Domain(format!("dimension {dim} < 2")));
    }
    let expected = dim as f64 / 2.0 - 1.0;
    if (plan.alpha() - expected).abs() > 1e-12 {
        return Err(Error::GridMismatch(format!(
            "grid order {} does not match n/2 - 1 = {expected} for n = {dim}",
            plan.alpha()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel_l2(a: &[f64], b: &[f64], grid: &RadialGrid, dim: f64) -> f64 {
        let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).collect();
        let sq: Vec<f64> = b.iter().map(|y| y * y).collect();
        (grid.integrate_radial(dim, &diff) / grid.integrate_radial(dim, &sq)).sqrt()
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(HankelPlan::new(0.0, 4, 10.0).is_err());
        assert!(HankelPlan::new(0.0, 16, -1.0).is_err());
        assert!(HankelPlan::new(-1.0, 16, 10.0).is_err());
    }

    #[test]
    fn zero_profile_maps_to_zero() {
        let plan = HankelPlan::new(0.5, 64, 20.0).unwrap();
        let z = RadialProfile::zeros(plan.grid().clone());
        let out = plan.apply(&z).unwrap();
        assert!(out.values().iter().all(|&v| v == 0.0));
        assert_eq!(**out.grid(), **plan.dual_grid());
    }

    #[test]
    fn gaussian_is_fixed() {
        for &alpha in &[0.0, 0.5, 1.0, 1.5, 2.0] {
            let plan = HankelPlan::new(alpha, 256, 30.0).unwrap();
            let g = RadialProfile::from_fn(plan.grid().clone(), |r| (-0.5 * r * r).exp()).unwrap();
            let out = plan.apply(&g).unwrap();
            for (&rho, &v) in plan.dual_grid().nodes().iter().zip(out.values()) {
                assert!((v - (-0.5 * rho * rho).exp()).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn laguerre_functions_are_eigenfunctions() {
        // H[L_j^alpha(r^2) e^{-r^2/2}] = (-1)^j L_j^alpha(rho^2) e^{-rho^2/2}
        let alpha = 0.5;
        let plan = HankelPlan::new(alpha, 256, 30.0).unwrap();
        let lag2 = |x: f64| 0.5 * (x * x - 2.0 * (alpha + 2.0) * x + (alpha + 1.0) * (alpha + 2.0));
        let f = RadialProfile::from_fn(plan.grid().clone(), |r| lag2(r * r) * (-0.5 * r * r).exp()).unwrap();
        let out = plan.apply(&f).unwrap();
        for (&rho, &v) in plan.dual_grid().nodes().iter().zip(out.values()) {
            assert!((v - lag2(rho * rho) * (-0.5 * rho * rho).exp()).abs() < 1e-10);
        }
    }

    #[test]
    fn roundtrip_returns_to_physical_grid() {
        let plan = HankelPlan::new(1.0, 128, 20.0).unwrap();
        let f = RadialProfile::from_fn(plan.grid().clone(), |r| (-r).exp() * (1.0 + r)).unwrap();
        let back = plan.apply(&plan.apply(&f).unwrap()).unwrap();
        assert_eq!(**back.grid(), **plan.grid());
        assert!(rel_l2(back.values(), f.values(), plan.grid(), 4.0) < 1e-10);
    }

    #[test]
    fn interpolation_reproduces_band_limited_profiles() {
        let plan = HankelPlan::new(0.5, 128, 20.0).unwrap();
        let f = RadialProfile::from_fn(plan.grid().clone(), |r| (-0.5 * r * r).exp()).unwrap();
        let pts = [0.0, 0.05, 0.37, 1.0, 2.5, 4.0];
        let got = plan.interpolate(&f, &pts).unwrap();
        for (&r, &v) in pts.iter().zip(&got) {
            assert!((v - (-0.5 * r * r).exp()).abs() < 1e-10, "r {r}: {v}");
        }
    }

    #[test]
    fn radial_fourier_checks_order() {
        let plan = HankelPlan::new(0.5, 64, 20.0).unwrap();
        let u = RadialProfile::zeros(plan.grid().clone());
        assert!(radial_fourier(&plan, 3, &u).is_ok());
        assert!(matches!(radial_fourier(&plan, 2, &u), Err(Error::GridMismatch(_))));
    }
}
