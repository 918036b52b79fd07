use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::sync::{Arc, OnceLock};

use super::bessel::{bessel_j_unchecked, bessel_zeros, MIN_ORDER};
use crate::error::{Error, Result};
use crate::space::PhysicalRule;

/// Sampling nodes on `(0, R)` for one Bessel order.
///
/// Nodes sit on scaled zeros of `J_alpha`: `r_k = j_{alpha,k} R / j_{alpha,N+1}`.
/// `weights` integrate `int_0^R F(r) dr` for integrands of the form
/// `F(r) = r g(r) h(r)` with `g`, `h` band-limited Fourier-Bessel series of
/// order `alpha` (the Dini-type rule that makes the discrete transform
/// orthogonal). For other integrands see [`crate::space::PhysicalRule`].
#[derive(Debug, Clone)]
pub struct RadialGrid {
    alpha: f64,
    cutoff: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    /// the Bessel zeros `j_{alpha,1..=N}`
    pub(crate) zeros: Vec<f64>,
    /// `j_{alpha,N+1}`
    pub(crate) last_zero: f64,
    rule: OnceLock<PhysicalRule>,
}

impl PartialEq for RadialGrid {
    fn eq(&self, other: &Self) -> bool {
        self.alpha == other.alpha && self.cutoff == other.cutoff && self.nodes.len() == other.nodes.len()
    }
}

impl RadialGrid {
    pub fn new(alpha: f64, size: usize, cutoff: f64) -> Result<Self> {
        if !(alpha >= MIN_ORDER) {
            return Err(Error::Domain(format!("grid order {alpha} < -1/2")));
        }
        if size < 1 {
            return Err(Error::InvalidArgument("grid size must be positive".into()));
        }
        if !(cutoff > 0.0 && cutoff.is_finite()) {
            return Err(Error::InvalidArgument(format!("cutoff {cutoff} must be positive")));
        }
        let mut zeros = bessel_zeros(alpha, size + 1)?;
        let last_zero = zeros.pop().expect("size + 1 zeros");
        Ok(Self::from_zeros(alpha, cutoff, zeros, last_zero))
    }

    /// Grid whose nodes are `j_k / R` for the given zeros: the frequency-side
    /// partner of a grid of cutoff `R`.
    pub(crate) fn from_zeros(alpha: f64, cutoff: f64, zeros: Vec<f64>, last_zero: f64) -> Self {
        let scale = cutoff / last_zero;
        let nodes: Vec<f64> = zeros.iter().map(|&j| j * scale).collect();
        let weights = zeros
            .iter()
            .zip(&nodes)
            .map(|(&j, &r)| {
                let jp = bessel_j_unchecked(alpha + 1.0, j);
                2.0 * cutoff * cutoff / (last_zero * last_zero * jp * jp * r)
            })
            .collect();
        Self { alpha, cutoff, nodes, weights, zeros, last_zero, rule: OnceLock::new() }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn size(&self) -> usize {
        self.nodes.len()
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Sub-node quadrature for integrands that are not band-limited, built
    /// on first use.
    pub fn physical_rule(&self) -> &PhysicalRule {
        self.rule.get_or_init(|| PhysicalRule::new(self))
    }

    /// `int_0^R F(r) r^(n-1) dr` with the grid rule, for `F` given on the nodes.
    pub fn integrate_radial(&self, dim: f64, values: &[f64]) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .zip(values)
            .map(|((&r, &w), &f)| w * r.powf(dim - 1.0) * f)
            .sum()
    }
}

/// Samples `u_0(r_k)` of a radial function `u(x) = u_0(|x|)`.
#[derive(Debug, Clone)]
pub struct RadialProfile {
    grid: Arc<RadialGrid>,
    values: Vec<f64>,
}

impl RadialProfile {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.size() {
            return Err(Error::InvalidArgument(format!(
                "profile has {} values for a grid of size {}",
                values.len(),
                grid.size()
            )));
        }
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite profile value at node {bad}")));
        }
        Ok(Self { grid, values })
    }

    /// Samples `f` at every node.
    pub fn from_fn(grid: Arc<RadialGrid>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.nodes().iter().map(|&r| f(r)).collect();
        Self::new(grid, values)
    }

    pub fn zeros(grid: Arc<RadialGrid>) -> Self {
        let n = grid.size();
        Self { grid, values: vec![0.0; n] }
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Same grid, values mapped pointwise (node radius, value).
    pub fn map(&self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let values = self.grid.nodes().iter().zip(&self.values).map(|(&r, &v)| f(r, v)).collect();
        Self::new(self.grid.clone(), values)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { grid: self.grid.clone(), values: self.values.iter().map(|v| v * factor).collect() }
    }

    /// `self + factor * other`.
    pub fn axpy(&self, factor: f64, other: &RadialProfile) -> Result<Self> {
        self.ensure_same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + factor * b).collect();
        Ok(Self { grid: self.grid.clone(), values })
    }

    pub fn ensure_same_grid(&self, other: &RadialProfile) -> Result<()> {
        if *self.grid != *other.grid {
            return Err(Error::GridMismatch("profiles live on different grids".into()));
        }
        Ok(())
    }

    /// CSV with header `r,value` and 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,value\n");
        for (r, v) in self.grid.nodes().iter().zip(&self.values) {
            let _ = writeln!(out, "{r:.16e},{v:.16e}");
        }
        out
    }

    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        w.write_all(self.to_csv().as_bytes())?;
        Ok(())
    }

    /// Parses CSV written by [`RadialProfile::to_csv`]. The node column must
    /// match the grid to 1e-12 relative.
    pub fn read_csv(grid: Arc<RadialGrid>, reader: impl BufRead) -> Result<Self> {
        let mut lines = reader.lines();
        let header = lines.next().ok_or_else(|| Error::Parse("empty profile CSV".into()))??;
        if header.trim() != "r,value" {
            return Err(Error::Parse(format!("unexpected header {header:?}")));
        }
        let mut values = Vec::with_capacity(grid.size());
        for (k, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let (r, v) = line
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("line {}: expected two columns", k + 2)))?;
            let r: f64 = r.trim().parse().map_err(|e| Error::Parse(format!("line {}: {e}", k + 2)))?;
            let v: f64 = v.trim().parse().map_err(|e| Error::Parse(format!("line {}: {e}", k + 2)))?;
            let node = *grid
                .nodes()
                .get(values.len())
                .ok_or_else(|| Error::Parse("more rows than grid nodes".into()))?;
            if (r - node).abs() > 1e-12 * node.max(1.0) {
                return Err(Error::GridMismatch(format!("row {} radius {r} != node {node}", k + 2)));
            }
            values.push(v);
        }
        Self::new(grid, values)
    }
}
