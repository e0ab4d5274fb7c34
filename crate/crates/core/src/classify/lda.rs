//! Linear discriminant analysis with a shared, ridge-regularized covariance
//! inverted through its singular value decomposition.

use nalgebra::DMatrix;
use ndarray::{Array1, Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{from_dmatrix, to_dmatrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdaState {
    /// `n_classes × d`
    pub means: Array2<f64>,
    pub log_priors: Vec<f64>,
    /// `n_classes × d`, rows are `Σ⁻¹ μ_c`.
    pub coef: Array2<f64>,
    /// `−½ μ_cᵀ Σ⁻¹ μ_c + ln π_c`
    pub intercept: Array1<f64>,
}

impl LdaState {
    pub fn fit(x: ArrayView2<'_, f64>, y: &[usize], n_classes: usize, ridge: f64) -> Result<Self> {
        let (n, d) = x.dim();
        let mut counts = vec![0usize; n_classes];
        let mut means = Array2::<f64>::zeros((n_classes, d));
        for (row, &c) in x.rows().into_iter().zip(y) {
            counts[c] += 1;
            let mut m = means.row_mut(c);
            m += &row;
        }
        for (mut m, &c) in means.rows_mut().into_iter().zip(&counts) {
            m /= c as f64;
        }

        // pooled within-class covariance, denominator n − C (at least 1)
        let mut centered = x.to_owned();
        for (mut row, &c) in centered.rows_mut().into_iter().zip(y) {
            row -= &means.row(c);
        }
        let denom = n.saturating_sub(n_classes).max(1) as f64;
        let mut cov = centered.t().dot(&centered) / denom;
        cov.diag_mut().mapv_inplace(|v| v + ridge);

        let svd = to_dmatrix(cov.view()).svd(true, true);
        let (u, vt) = match (svd.u, svd.v_t) {
            (Some(u), Some(vt)) => (u, vt),
            _ => return Err(Error::Numeric("covariance decomposition failed".into())),
        };
        let s_max = svd.singular_values.max();
        if !(s_max.is_finite() && s_max > 0.0) {
            return Err(Error::Numeric("degenerate pooled covariance".into()));
        }
        let inv_s = DMatrix::from_diagonal(
            &svd.singular_values
                .map(|s| if s > s_max * 1e-15 { 1.0 / s } else { 0.0 }),
        );
        let precision = from_dmatrix(&(vt.transpose() * inv_s * u.transpose()));

        let coef = means.dot(&precision);
        let log_priors: Vec<f64> = counts.iter().map(|&c| (c as f64 / n as f64).ln()).collect();
        let intercept = Array1::from_iter(
            (coef.axis_iter(Axis(0)))
                .zip(means.axis_iter(Axis(0)))
                .zip(&log_priors)
                .map(|((w, m), lp)| -0.5 * w.dot(&m) + lp),
        );
        Ok(LdaState {
            means,
            log_priors,
            coef,
            intercept,
        })
    }

    pub fn scores(&self, x: ArrayView2<'_, f64>) -> Array2<f64> {
        x.dot(&self.coef.t()) + self.intercept.view().insert_axis(Axis(0))
    }
}
