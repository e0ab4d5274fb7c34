//! Principal component analysis through the SVD of the centered data.

use nalgebra::SVD;
use ndarray::{Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::featurize::{ColumnTag, FeatureMatrix};
use crate::linalg::{column_means, to_dmatrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    /// `target_dim × d`, orthonormal rows.
    pub components: Array2<f64>,
    /// Non-increasing.
    pub explained_variance: Vec<f64>,
}

impl PcaModel {
    pub fn target_dim(&self) -> usize {
        self.components.nrows()
    }

    pub fn input_dim(&self) -> usize {
        self.components.ncols()
    }

    fn check_width(&self, d: usize) -> Result<()> {
        if d != self.input_dim() {
            return Err(Error::shape(format!(
                "PCA fitted on {} columns, got {d}",
                self.input_dim()
            )));
        }
        Ok(())
    }

    /// `(X − mean) · Pᵀ`
    pub fn transform(&self, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        self.check_width(x.ncols())?;
        let mean = ndarray::ArrayView1::from(&self.mean[..]);
        let centered = &x - &mean.insert_axis(Axis(0));
        Ok(centered.dot(&self.components.t()))
    }

    /// `scores · P + mean`
    pub fn inverse_transform(&self, scores: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        if scores.ncols() != self.target_dim() {
            return Err(Error::shape(format!(
                "expected {} component scores, got {}",
                self.target_dim(),
                scores.ncols()
            )));
        }
        let mean = ndarray::ArrayView1::from(&self.mean[..]);
        Ok(scores.dot(&self.components) + mean.insert_axis(Axis(0)))
    }

    pub fn transform_features(&self, x: &FeatureMatrix) -> Result<FeatureMatrix> {
        let values = self.transform(x.values.view())?;
        Ok(FeatureMatrix {
            values,
            provenance: (0..self.target_dim()).map(ColumnTag::Component).collect(),
            doc_ids: x.doc_ids.clone(),
        })
    }
}

pub fn pca_fit(x: ArrayView2<'_, f64>, target_dim: usize) -> Result<PcaModel> {
    let (n, d) = x.dim();
    if n < 2 {
        return Err(Error::invalid("PCA needs at least two rows"));
    }
    if target_dim == 0 || target_dim > n.min(d) {
        return Err(Error::invalid(format!(
            "PCA target dimension {target_dim} must lie in 1..={}",
            n.min(d)
        )));
    }
    let mean = column_means(x);
    let centered = &x - &ndarray::ArrayView1::from(&mean[..]).insert_axis(Axis(0));
    let svd = SVD::new(to_dmatrix(centered.view()), false, true);
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::Numeric("SVD did not produce right singular vectors".into()))?;
    let sv = svd.singular_values;

    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&a, &b| sv[b].total_cmp(&sv[a]).then(a.cmp(&b)));

    let mut components = Array2::zeros((target_dim, d));
    let mut explained_variance = Vec::with_capacity(target_dim);
    for (r, &i) in order.iter().take(target_dim).enumerate() {
        let row = v_t.row(i);
        let pivot = (0..d)
            .max_by(|&a, &b| row[a].abs().total_cmp(&row[b].abs()).then(b.cmp(&a)))
            .expect("d >= 1");
        let sign = if row[pivot] < 0.0 { -1.0 } else { 1.0 };
        for c in 0..d {
            components[[r, c]] = sign * row[c];
        }
        explained_variance.push(sv[i] * sv[i] / (n as f64 - 1.0));
    }
    Ok(PcaModel {
        mean,
        components,
        explained_variance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn gaussian_cloud(n: usize, d: usize, seed: u64) -> Array2<f64> {
        let mut rng = crate::seed::rng(seed);
        Array2::from_shape_fn((n, d), |_| rng.sample(StandardNormal))
    }

    #[test]
    fn rank_one_line() {
        let t: Vec<f64> = (0..50).map(|i| i as f64 * 0.3 - 4.0).collect();
        let x = Array2::from_shape_fn((50, 3), |(i, j)| [1.0, -2.0, 0.5][j] * t[i] + [3.0, 1.0, -1.0][j]);
        let m = pca_fit(x.view(), 3).unwrap();
        let total: f64 = m.explained_variance.iter().sum();
        assert!(m.explained_variance[0] / total >= 0.9999);
    }

    #[test]
    fn isotropic_cloud_has_flat_spectrum() {
        let x = gaussian_cloud(5000, 4, 21);
        let m = pca_fit(x.view(), 4).unwrap();
        let ev = &m.explained_variance;
        assert!(ev.windows(2).all(|w| w[0] >= w[1]));
        assert!(ev[0] / ev[3] <= 1.3, "{ev:?}");
    }

    #[test]
    fn full_rank_reconstruction_and_orthonormality() {
        let x = gaussian_cloud(40, 6, 2);
        let m = pca_fit(x.view(), 6).unwrap();
        let gram = m.components.dot(&m.components.t());
        for i in 0..6 {
            for j in 0..6 {
                assert_abs_diff_eq!(gram[[i, j]], if i == j { 1.0 } else { 0.0 }, epsilon = 1e-10);
            }
        }
        let back = m.inverse_transform(m.transform(x.view()).unwrap().view()).unwrap();
        for (a, b) in back.iter().zip(x.iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-8);
        }
    }

    #[test]
    fn score_variance_equals_explained_variance() {
        let x = gaussian_cloud(200, 5, 4).mapv(|v| v * 2.0) + 1.0;
        let m = pca_fit(x.view(), 3).unwrap();
        let s = m.transform(x.view()).unwrap();
        for c in 0..3 {
            let var = s.column(c).var(1.0);
            assert_abs_diff_eq!(var, m.explained_variance[c], epsilon = 1e-8);
        }
        let at_mean = Array2::from_shape_vec((1, 5), m.mean.clone()).unwrap();
        assert!(m.transform(at_mean.view()).unwrap().iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn sign_convention() {
        let x = gaussian_cloud(100, 4, 6);
        let m = pca_fit(x.view(), 4).unwrap();
        for row in m.components.rows() {
            let max = row
                .iter()
                .copied()
                .fold(0.0f64, |a, v| if v.abs() > a.abs() { v } else { a });
            assert!(max > 0.0);
        }
    }

    #[test]
    fn errors() {
        let x = gaussian_cloud(5, 3, 1);
        assert!(pca_fit(x.view(), 4).is_err());
        assert!(pca_fit(x.slice(ndarray::s![..1, ..]), 1).is_err());
        let m = pca_fit(x.view(), 2).unwrap();
        assert!(matches!(
            m.transform(gaussian_cloud(2, 4, 0).view()),
            Err(Error::Shape(_))
        ));
    }
}
