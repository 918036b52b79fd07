use nalgebra::{DMatrix, DVector};

use crate::embedding::combine;
use crate::error::{Error, Result};
use crate::hankel::RadialProfile;
use crate::space::{apply_as, gram_matrix, hs_orthonormal_basis, sphere_area};
use crate::system::{StatePair, SystemContext};

/// Galerkin space `E_k = span{(e_j, 0)} + span{(0, f_j)}` with `e_j`
/// orthonormal in `H^s` and `f_j = A^(-t) A^s e_j`.
///
/// Coefficient vectors are laid out as `(coeffs_u, coeffs_v)`, length `2k`.
/// The basis functions are also kept on the sub-node quadrature points so
/// that `Phi`, its gradient and Hessian are evaluated without transforms.
#[derive(Debug, Clone)]
pub struct GalerkinBasis {
    sys: SystemContext,
    e: Vec<RadialProfile>,
    f: Vec<RadialProfile>,
    /// `M_ij = int A^s e_i A^t f_j`
    pairing: DMatrix<f64>,
    /// basis values, one row per quadrature point (origin last)
    e_pts: DMatrix<f64>,
    f_pts: DMatrix<f64>,
    /// `c_n r^(b+n-1) dr` and `c_n r^(a+n-1) dr` quadrature weights
    wb: DVector<f64>,
    wa: DVector<f64>,
}

/// `|x|^e`, with a multiplication chain for integer exponents.
fn pow_abs(x: f64, e: f64) -> f64 {
    if e.fract() == 0.0 && e.abs() < 16.0 {
        x.abs().powi(e as i32)
    } else {
        x.abs().powf(e)
    }
}

pub fn build_basis(sys: &SystemContext, k: usize) -> Result<GalerkinBasis> {
    let e = hs_orthonormal_basis(sys.ctx_s(), k)?;
    let f = e.iter().map(|ej| sys.lift(ej)).collect::<Result<Vec<_>>>()?;
    let ase = e.iter().map(|ej| apply_as(sys.ctx_s(), ej)).collect::<Result<Vec<_>>>()?;
    let atf = f.iter().map(|fj| apply_as(sys.ctx_t(), fj)).collect::<Result<Vec<_>>>()?;
    let params = *sys.params();
    let grid = sys.plan().grid().clone();
    let cn = sphere_area(params.n);
    let dim = params.n as f64;
    let measure: Vec<f64> = grid.nodes().iter().zip(grid.weights()).map(|(&r, &w)| cn * w * r.powf(dim - 1.0)).collect();
    let pairing = DMatrix::from_fn(k, k, |i, j| {
        measure.iter().zip(ase[i].values().iter().zip(atf[j].values())).map(|(m, (a, b))| m * a * b).sum()
    });

    let rule = grid.physical_rule();
    let points = rule.points().len();
    let sample = |family: &[RadialProfile]| {
        let mut m = DMatrix::zeros(points + 1, k);
        for (j, g) in family.iter().enumerate() {
            for (i, v) in rule.sample(g.values()).into_iter().enumerate() {
                m[(i, j)] = v;
            }
            m[(points, j)] = rule.sample_origin(g.values());
        }
        m
    };
    let weights = |w: f64| {
        let beta = w + dim - 1.0;
        let mut out: Vec<f64> = rule.power_weights(beta).into_iter().map(|x| cn * x).collect();
        out.push(cn * rule.origin_cutoff().powf(beta + 1.0) / (beta + 1.0));
        DVector::from_vec(out)
    };
    Ok(GalerkinBasis {
        sys: sys.clone(),
        e_pts: sample(&e),
        f_pts: sample(&f),
        e,
        f,
        pairing,
        wb: weights(params.b),
        wa: weights(params.a),
    })
}

impl GalerkinBasis {
    pub fn k(&self) -> usize {
        self.e.len()
    }

    pub fn system(&self) -> &SystemContext {
        &self.sys
    }

    pub fn e(&self) -> &[RadialProfile] {
        &self.e
    }

    pub fn f(&self) -> &[RadialProfile] {
        &self.f
    }

    pub fn pairing(&self) -> &DMatrix<f64> {
        &self.pairing
    }

    /// `H^s` Gram matrix of `e` and `H^t` Gram matrix of `f`.
    pub fn gram_matrices(&self) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
        Ok((gram_matrix(self.sys.ctx_s(), &self.e)?, gram_matrix(self.sys.ctx_t(), &self.f)?))
    }

    fn split<'a>(&self, coeffs: &'a [f64]) -> Result<(&'a [f64], &'a [f64])> {
        let k = self.k();
        if coeffs.len() != 2 * k {
            return Err(Error::InvalidArgument(format!("expected {} coefficients, got {}", 2 * k, coeffs.len())));
        }
        if let Some(i) = coeffs.iter().position(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite coefficient at index {i}")));
        }
        Ok(coeffs.split_at(k))
    }

    /// `(u, v)` on the physical grid.
    pub fn state(&self, coeffs: &[f64]) -> Result<StatePair> {
        let (cu, cv) = self.split(coeffs)?;
        StatePair::new(combine(&self.e, cu)?, combine(&self.f, cv)?)
    }

    fn at_points(&self, coeffs: &[f64]) -> Result<(DVector<f64>, DVector<f64>)> {
        let (cu, cv) = self.split(coeffs)?;
        Ok((&self.e_pts * DVector::from_column_slice(cu), &self.f_pts * DVector::from_column_slice(cv)))
    }

    /// `Phi` in coefficients: `a^T M b - int H`.
    pub fn phi(&self, coeffs: &[f64]) -> Result<f64> {
        let (cu, cv) = self.split(coeffs)?;
        let (u, v) = self.at_points(coeffs)?;
        let p = self.sys.params();
        let quad = DVector::from_column_slice(cu).dot(&(&self.pairing * DVector::from_column_slice(cv)));
        let h: f64 = self.wb.iter().zip(u.iter()).map(|(w, x)| w * pow_abs(*x, p.q)).sum::<f64>() / p.q
            + self.wa.iter().zip(v.iter()).map(|(w, x)| w * pow_abs(*x, p.p)).sum::<f64>() / p.p;
        Ok(quad - h)
    }

    /// `(M b - int H_u e_i, M^T a - int H_v f_i)`.
    pub fn gradient(&self, coeffs: &[f64]) -> Result<Vec<f64>> {
        let (cu, cv) = self.split(coeffs)?;
        let (u, v) = self.at_points(coeffs)?;
        let p = self.sys.params();
        let hu = DVector::from_iterator(u.len(), self.wb.iter().zip(u.iter()).map(|(w, x)| w * pow_abs(*x, p.q - 2.0) * x));
        let hv = DVector::from_iterator(v.len(), self.wa.iter().zip(v.iter()).map(|(w, x)| w * pow_abs(*x, p.p - 2.0) * x));
        let gu = &self.pairing * DVector::from_column_slice(cv) - self.e_pts.tr_mul(&hu);
        let gv = self.pairing.tr_mul(&DVector::from_column_slice(cu)) - self.f_pts.tr_mul(&hv);
        Ok(gu.iter().chain(gv.iter()).copied().collect())
    }

    /// `[[-int H_uu e_i e_j, M], [M^T, -int H_vv f_i f_j]]`.
    pub fn hessian(&self, coeffs: &[f64]) -> Result<DMatrix<f64>> {
        let k = self.k();
        let (u, v) = self.at_points(coeffs)?;
        let p = self.sys.params();
        let du: Vec<f64> = self.wb.iter().zip(u.iter()).map(|(w, x)| w * (p.q - 1.0) * pow_abs(*x, p.q - 2.0)).collect();
        let dv: Vec<f64> = self.wa.iter().zip(v.iter()).map(|(w, x)| w * (p.p - 1.0) * pow_abs(*x, p.p - 2.0)).collect();
        let weighted = |m: &DMatrix<f64>, d: &[f64]| {
            let mut scaled = m.clone();
            for (mut row, &di) in scaled.row_iter_mut().zip(d) {
                row *= di;
            }
            m.tr_mul(&scaled)
        };
        let mut h = DMatrix::zeros(2 * k, 2 * k);
        h.view_mut((0, 0), (k, k)).copy_from(&(-weighted(&self.e_pts, &du)));
        h.view_mut((k, k), (k, k)).copy_from(&(-weighted(&self.f_pts, &dv)));
        h.view_mut((0, k), (k, k)).copy_from(&self.pairing);
        h.view_mut((k, 0), (k, k)).copy_from(&self.pairing.transpose());
        Ok(h)
    }

    /// Value of `u` at the origin, used to fix a sign convention.
    pub fn u_at_origin(&self, coeffs: &[f64]) -> Result<f64> {
        let (u, _) = self.at_points(coeffs)?;
        Ok(u[u.len() - 1])
    }
}
