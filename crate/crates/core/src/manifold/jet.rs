use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

/// Singular value ratio below which a Jacobian counts as rank deficient.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// Tolerance of the tangency check on inputs to the second fundamental form.
pub const TANGENCY_TOLERANCE: f64 = 1e-8;

/// Position and derivatives of a chart map at one point, together with the
/// inverse Gram matrix used by every projection.
#[derive(Debug, Clone, PartialEq)]
pub struct AmbientJet {
    pub x: DVector<f64>,
    /// n×k matrix of first partials.
    pub jac: DMatrix<f64>,
    hess: Vec<DVector<f64>>,
    gram_inv: DMatrix<f64>,
    condition: f64,
}

impl AmbientJet {
    pub(crate) fn new(
        chart: usize,
        coords: &[f64],
        x: DVector<f64>,
        jac: DMatrix<f64>,
        hess: Vec<DVector<f64>>,
    ) -> Result<Self> {
        let k = jac.ncols();
        let (smin, smax) = if k == 1 {
            let s = jac.column(0).norm();
            (s, s)
        } else {
            let sv = jac.clone().singular_values();
            (sv.min(), sv.max())
        };
        let condition = if smax > 0.0 { smin / smax } else { 0.0 };
        let gram_inv = (jac.transpose() * &jac).try_inverse();
        match gram_inv {
            Some(gram_inv) if smax > 0.0 && condition >= RANK_TOLERANCE && smin.is_finite() => Ok(Self {
                x,
                jac,
                hess,
                gram_inv,
                condition,
            }),
            _ => Err(Error::RankDeficient {
                chart,
                coords: coords.to_vec(),
                ratio: condition,
            }),
        }
    }

    /// Intrinsic dimension k.
    pub fn dim(&self) -> usize {
        self.jac.ncols()
    }

    /// Ambient dimension n.
    pub fn ambient_dim(&self) -> usize {
        self.jac.nrows()
    }

    /// ∂²φ/∂uᵢ∂uⱼ.
    pub fn hess(&self, i: usize, j: usize) -> &DVector<f64> {
        &self.hess[i * self.dim() + j]
    }

    /// Ratio of smallest to largest singular value of the Jacobian.
    pub fn condition(&self) -> f64 {
        self.condition
    }

    /// Chart velocity `(JᵀJ)⁻¹Jᵀv`.
    pub fn pullback(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.gram_inv * (self.jac.tr_mul(v))
    }

    /// Ambient vector `J·c` for a chart velocity `c`.
    pub fn push_forward(&self, c: &DVector<f64>) -> DVector<f64> {
        &self.jac * c
    }

    /// Orthogonal projection onto the tangent space.
    pub fn project_tangent(&self, v: &DVector<f64>) -> DVector<f64> {
        self.push_forward(&self.pullback(v))
    }

    /// Component of `v` normal to the tangent space.
    pub fn project_normal(&self, v: &DVector<f64>) -> DVector<f64> {
        v - self.project_tangent(v)
    }

    fn check_tangent(&self, v: &DVector<f64>) -> Result<()> {
        let residual = self.project_normal(v).norm();
        if residual > TANGENCY_TOLERANCE * v.norm().max(1.0) {
            return Err(Error::NotTangent { residual });
        }
        Ok(())
    }

    /// Second fundamental form `A(a, b) = (D_a b)^N` for tangent `a`, `b`.
    pub fn second_fundamental_form(&self, a: &DVector<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_tangent(a)?;
        self.check_tangent(b)?;
        let ca = self.pullback(a);
        let cb = self.pullback(b);
        let k = self.dim();
        let mut v = DVector::zeros(self.ambient_dim());
        for i in 0..k {
            for j in 0..k {
                let w = ca[i] * cb[j];
                if w != 0.0 {
                    v.axpy(w, self.hess(i, j), 1.0);
                }
            }
        }
        Ok(self.project_normal(&v))
    }

    /// Orthonormal tangent basis by Gram–Schmidt on the Jacobian columns,
    /// in column order.
    pub fn orthonormal_tangent_basis(&self) -> Vec<DVector<f64>> {
        let mut basis: Vec<DVector<f64>> = Vec::with_capacity(self.dim());
        for col in self.jac.column_iter() {
            let mut v = col.into_owned();
            // Two passes keep the basis orthogonal to rounding level.
            for _ in 0..2 {
                for e in &basis {
                    let c = e.dot(&v);
                    v.axpy(-c, e, 1.0);
                }
            }
            let n = v.norm();
            basis.push(v / n);
        }
        basis
    }
}
