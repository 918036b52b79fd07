use super::gauss_legendre;
use crate::hankel::RadialGrid;

/// Lagrange stencil width used to carry grid samples onto sub-nodes.
pub const STENCIL: usize = 10;
const POINTS_PER_PANEL: usize = 8;
const ORIGIN_PANELS: i32 = 30;

/// Quadrature for `int_0^{r_N} r^beta G(r, u(r)) dr` with `G` an arbitrary
/// (non band-limited) function of grid-sampled profiles.
///
/// Samples are carried to Gauss-Legendre sub-nodes on every node interval by
/// local degree-9 Lagrange interpolation. The first interval `(0, r_1)` is
/// split into geometrically graded panels so that `r^beta` with `beta > -1`
/// is integrated accurately; the remaining sliver `(0, eps)` is added in
/// closed form from the value at the origin.
#[derive(Debug, Clone)]
pub struct PhysicalRule {
    points: Vec<f64>,
    weights: Vec<f64>,
    stencils: Vec<(usize, [f64; STENCIL])>,
    origin: (usize, [f64; STENCIL]),
    eps: f64,
}

fn lagrange(nodes: &[f64], t: f64) -> [f64; STENCIL] {
    let mut out = [0.0; STENCIL];
    for (j, o) in out.iter_mut().enumerate() {
        let mut l = 1.0;
        for (m, &xm) in nodes.iter().enumerate() {
            if m != j {
                l *= (t - xm) / (nodes[j] - xm);
            }
        }
        *o = l;
    }
    out
}

impl PhysicalRule {
    pub fn new(grid: &RadialGrid) -> Self {
        let nodes = grid.nodes();
        let n = nodes.len();
        let width = STENCIL.min(n);
        let (gx, gw) = gauss_legendre(POINTS_PER_PANEL);
        let stencil_start = |k: usize| k.saturating_sub(width / 2 - 1).min(n - width);
        let coefficients = |start: usize, t: f64| {
            let mut c = [0.0; STENCIL];
            c[..width].copy_from_slice(&lagrange(&nodes[start..start + width], t)[..width]);
            c
        };

        let mut points = Vec::new();
        let mut weights = Vec::new();
        let mut stencils = Vec::new();
        let mut panel = |lo: f64, hi: f64, start: usize| {
            let half = 0.5 * (hi - lo);
            let mid = 0.5 * (hi + lo);
            for (&x, &w) in gx.iter().zip(&gw) {
                let t = mid + half * x;
                points.push(t);
                weights.push(half * w);
                stencils.push((start, coefficients(start, t)));
            }
        };

        let first = nodes[0];
        for j in (0..ORIGIN_PANELS).rev() {
            let hi = first * 0.5f64.powi(j);
            panel(0.5 * hi, hi, 0);
        }
        for k in 0..n - 1 {
            panel(nodes[k], nodes[k + 1], stencil_start(k));
        }
        let eps = first * 0.5f64.powi(ORIGIN_PANELS);
        let origin = (0, coefficients(0, 0.0));
        Self { points, weights, stencils, origin, eps }
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Weights for `int dr` at [`PhysicalRule::points`].
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Radius below which the integrand is replaced by its origin value.
    pub fn origin_cutoff(&self) -> f64 {
        self.eps
    }

    /// Interpolates grid samples onto the rule's points.
    pub fn sample(&self, values: &[f64]) -> Vec<f64> {
        self.stencils.iter().map(|(start, c)| dot(&values[*start..], c)).collect()
    }

    /// Extrapolated value at `r = 0`.
    pub fn sample_origin(&self, values: &[f64]) -> f64 {
        dot(&values[self.origin.0..], &self.origin.1)
    }

    /// `int_0^{r_N} r^beta g(r) dr`, `g` given at the rule's points and at the origin.
    pub fn integrate(&self, beta: f64, g: &[f64], g_origin: f64) -> f64 {
        let bulk: f64 = self
            .points
            .iter()
            .zip(&self.weights)
            .zip(g)
            .map(|((&t, &w), &v)| w * t.powf(beta) * v)
            .sum();
        bulk + g_origin * self.eps.powf(beta + 1.0) / (beta + 1.0)
    }

    /// `t_i^beta w_i` for repeated integration against the same power.
    pub fn power_weights(&self, beta: f64) -> Vec<f64> {
        self.points.iter().zip(&self.weights).map(|(&t, &w)| w * t.powf(beta)).collect()
    }
}

fn dot(values: &[f64], c: &[f64; STENCIL]) -> f64 {
    values.iter().zip(c).map(|(v, c)| v * c).sum()
}
