//! Randomized dependence coefficient: empirical copula, random sinusoidal
//! features, largest canonical correlation.

use nalgebra::{Cholesky, DMatrix};
use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::to_dmatrix;
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RdcConfig {
    /// Number of random projections per side.
    pub k: usize,
    /// Standard deviation of the projection weights and biases.
    pub s: f64,
    pub seed: u64,
    /// Added to both covariance blocks before whitening.
    pub ridge: f64,
}

impl Default for RdcConfig {
    fn default() -> Self {
        RdcConfig {
            k: 20,
            s: 1.0 / 6.0,
            seed: 0,
            ridge: 1e-8,
        }
    }
}

impl RdcConfig {
    pub fn with_seed(self, seed: u64) -> Self {
        RdcConfig { seed, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Config("rdc k must be at least 1".into()));
        }
        if !(self.s > 0.0 && self.s.is_finite()) {
            return Err(Error::Config(format!("rdc scale s must be positive, got {}", self.s)));
        }
        if !(self.ridge > 0.0 && self.ridge.is_finite()) {
            return Err(Error::Config(format!("rdc ridge must be positive, got {}", self.ridge)));
        }
        Ok(())
    }
}

/// Column-wise empirical CDF: each value becomes `rank / n`, tied values
/// share their average rank. Outputs lie in `(0, 1]`.
pub fn copula_transform(samples: ArrayView2<'_, f64>) -> Array2<f64> {
    let (n, p) = samples.dim();
    let mut out = Array2::zeros((n, p));
    let mut order: Vec<usize> = Vec::with_capacity(n);
    for c in 0..p {
        let col = samples.column(c);
        order.clear();
        order.extend(0..n);
        order.sort_by(|&a, &b| col[a].total_cmp(&col[b]));
        let mut start = 0;
        while start < n {
            let mut end = start + 1;
            while end < n && col[order[end]] == col[order[start]] {
                end += 1;
            }
            // ranks start+1 ..= end share their mean
            let rank = (start + 1 + end) as f64 / 2.0;
            for &i in &order[start..end] {
                out[[i, c]] = rank / n as f64;
            }
            start = end;
        }
    }
    out
}

/// Projection weights for one side: `weights` is `p × k`, `bias` has `k` entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
}

impl Projection {
    /// Column `j` is drawn from its own stream seeded by `(seed, j)`.
    pub fn draw(p: usize, config: &RdcConfig) -> Projection {
        let normal = Normal::new(0.0, config.s).expect("validated scale");
        let mut weights = Array2::zeros((p, config.k));
        let mut bias = Array1::zeros(config.k);
        for j in 0..config.k {
            let mut rng = seed::rng(seed::derive(config.seed, "rdc-projection", &[j as u64]));
            for i in 0..p {
                weights[[i, j]] = normal.sample(&mut rng);
            }
            bias[j] = normal.sample(&mut rng);
        }
        Projection { weights, bias }
    }

    /// `sin(U w_j + b_j)` for every column `j`.
    pub fn apply(&self, copula: ArrayView2<'_, f64>) -> Array2<f64> {
        let mut z = copula.dot(&self.weights);
        z += &self.bias.view().insert_axis(Axis(0));
        z.mapv_inplace(f64::sin);
        z
    }
}

/// `n × k` random sinusoidal features of a copula sample.
pub fn random_projection(copula: ArrayView2<'_, f64>, config: &RdcConfig) -> Array2<f64> {
    Projection::draw(copula.ncols(), config).apply(copula)
}

fn centered_covariance(a: &Array2<f64>) -> Array2<f64> {
    let n = a.nrows() as f64;
    a.t().dot(a) / (n - 1.0)
}

fn center(a: ArrayView2<'_, f64>) -> Array2<f64> {
    let mean = a.mean_axis(Axis(0)).expect("non-empty");
    &a - &mean.insert_axis(Axis(0))
}

/// Largest canonical correlation between the columns of `a` and `b`, with
/// `ridge` added to both auto-covariance blocks. Computed as the top singular
/// value of `L_a⁻¹ C_ab L_b⁻ᵀ` where `L` are Cholesky factors, which equals
/// the square root of the top eigenvalue of `C_aa⁻¹ C_ab C_bb⁻¹ C_ba`.
pub fn largest_canonical_correlation(a: ArrayView2<'_, f64>, b: ArrayView2<'_, f64>, ridge: f64) -> Result<f64> {
    let n = a.nrows();
    if b.nrows() != n {
        return Err(Error::shape(format!(
            "canonical correlation: {n} vs {} rows",
            b.nrows()
        )));
    }
    if n <= 1 {
        return Err(Error::invalid("canonical correlation needs at least two rows"));
    }
    let (pa, pb) = (a.ncols(), b.ncols());
    let ac = center(a);
    let bc = center(b);
    let mut caa = to_dmatrix(centered_covariance(&ac).view());
    let mut cbb = to_dmatrix(centered_covariance(&bc).view());
    let cab = to_dmatrix((ac.t().dot(&bc) / (n as f64 - 1.0)).view());
    caa += DMatrix::identity(pa, pa) * ridge;
    cbb += DMatrix::identity(pb, pb) * ridge;

    let la = Cholesky::new(caa)
        .ok_or_else(|| Error::Numeric("covariance block of A is not positive definite".into()))?
        .unpack();
    let lb = Cholesky::new(cbb)
        .ok_or_else(|| Error::Numeric("covariance block of B is not positive definite".into()))?
        .unpack();
    let left = la
        .solve_lower_triangular(&cab)
        .ok_or_else(|| Error::Numeric("singular whitening factor".into()))?;
    let whitened = lb
        .solve_lower_triangular(&left.transpose())
        .ok_or_else(|| Error::Numeric("singular whitening factor".into()))?;
    let top = whitened.singular_values().iter().copied().fold(0.0, f64::max);
    if !top.is_finite() {
        return Err(Error::Numeric("non-finite canonical correlation".into()));
    }
    Ok(top.clamp(0.0, 1.0))
}

/// Seeds for the two sides are derived from `config.seed` on separate streams.
pub fn side_configs(config: &RdcConfig) -> (RdcConfig, RdcConfig) {
    (
        config.with_seed(seed::derive(config.seed, "rdc-side", &[0])),
        config.with_seed(seed::derive(config.seed, "rdc-side", &[1])),
    )
}

/// RDC between two samples whose copula transforms are already computed.
pub fn rdc_from_copulas(cx: ArrayView2<'_, f64>, cy: ArrayView2<'_, f64>, config: &RdcConfig) -> Result<f64> {
    let (xc, yc) = side_configs(config);
    let fx = random_projection(cx, &xc);
    let fy = random_projection(cy, &yc);
    largest_canonical_correlation(fx.view(), fy.view(), config.ridge)
}

/// Randomized dependence coefficient between `x` (n×p) and `y` (n×q), in `[0, 1]`.
pub fn rdc(x: ArrayView2<'_, f64>, y: ArrayView2<'_, f64>, config: &RdcConfig) -> Result<f64> {
    config.validate()?;
    if x.nrows() != y.nrows() {
        return Err(Error::shape(format!("rdc: {} vs {} rows", x.nrows(), y.nrows())));
    }
    if x.nrows() <= 1 {
        return Err(Error::invalid("rdc needs at least two rows"));
    }
    let cx = copula_transform(x);
    let cy = copula_transform(y);
    rdc_from_copulas(cx.view(), cy.view(), config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    #[test]
    fn copula_hand_ranks() {
        let c = copula_transform(array![[3.0], [1.0], [2.0]].view());
        assert_abs_diff_eq!(c[[0, 0]], 1.0);
        assert_abs_diff_eq!(c[[1, 0]], 1.0 / 3.0);
        assert_abs_diff_eq!(c[[2, 0]], 2.0 / 3.0);
    }

    #[test]
    fn copula_ties_average() {
        let c = copula_transform(array![[5.0], [5.0]].view());
        assert_eq!(c.column(0).to_vec(), vec![0.75, 0.75]);
        let c = copula_transform(array![[1.0], [2.0], [2.0], [3.0]].view());
        assert_eq!(c.column(0).to_vec(), vec![0.25, 0.625, 0.625, 1.0]);
    }

    #[test]
    fn copula_increasing_column() {
        let x = Array2::from_shape_fn((5, 1), |(i, _)| i as f64 * 2.0);
        let c = copula_transform(x.view());
        for i in 0..5 {
            assert_abs_diff_eq!(c[[i, 0]], (i + 1) as f64 / 5.0);
        }
    }

    #[test]
    fn projection_vanishes_with_scale() {
        let u = Array2::from_shape_fn((10, 2), |(i, j)| (i + j) as f64 / 12.0);
        let cfg = RdcConfig {
            s: 1e-14,
            ..Default::default()
        };
        let z = random_projection(u.view(), &cfg);
        assert!(z.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn projection_is_deterministic() {
        let u = Array2::from_shape_fn((10, 3), |(i, j)| ((i * 7 + j) % 10) as f64 / 10.0);
        let cfg = RdcConfig::default().with_seed(42);
        assert_eq!(random_projection(u.view(), &cfg), random_projection(u.view(), &cfg));
    }

    #[test]
    fn projection_hand_weights() {
        let p = Projection {
            weights: array![[1.0]],
            bias: array![0.0],
        };
        let z = p.apply(array![[0.5]].view());
        assert_abs_diff_eq!(z[[0, 0]], 0.5f64.sin(), epsilon = 1e-15);
        assert_abs_diff_eq!(z[[0, 0]], 0.4794, epsilon = 1e-4);
    }

    #[test]
    fn cca_self_and_constant() {
        let a = Array2::from_shape_fn((50, 3), |(i, j)| {
            ((i * (j + 3)) as f64 * 0.37).sin() + j as f64 * 0.01 * i as f64
        });
        let rho = largest_canonical_correlation(a.view(), a.view(), 1e-8).unwrap();
        assert_abs_diff_eq!(rho, 1.0, epsilon = 1e-6);

        let b = Array2::from_elem((50, 3), 2.0);
        let rho = largest_canonical_correlation(a.view(), b.view(), 1e-8).unwrap();
        assert_abs_diff_eq!(rho, 0.0, epsilon = 1e-6);
    }

    #[test]
    fn cca_one_column_is_abs_pearson() {
        let x: Vec<f64> = (0..40).map(|i| ((i as f64) * 0.7).cos() + 0.1 * i as f64).collect();
        let y: Vec<f64> = (0..40).map(|i| ((i as f64) * 1.3).sin() - 0.05 * i as f64).collect();
        let pearson = |a: &[f64], b: &[f64]| {
            let n = a.len() as f64;
            let ma = a.iter().sum::<f64>() / n;
            let mb = b.iter().sum::<f64>() / n;
            let cov: f64 = a.iter().zip(b).map(|(p, q)| (p - ma) * (q - mb)).sum();
            let va: f64 = a.iter().map(|p| (p - ma).powi(2)).sum();
            let vb: f64 = b.iter().map(|q| (q - mb).powi(2)).sum();
            cov / (va * vb).sqrt()
        };
        let a = Array2::from_shape_vec((40, 1), x.clone()).unwrap();
        let b = Array2::from_shape_vec((40, 1), y.clone()).unwrap();
        let rho = largest_canonical_correlation(a.view(), b.view(), 1e-12).unwrap();
        assert_abs_diff_eq!(rho, pearson(&x, &y).abs(), epsilon = 1e-8);

        let lin = a.mapv(|v| 2.0 * v + 1.0);
        let rho = largest_canonical_correlation(a.view(), lin.view(), 1e-12).unwrap();
        assert_abs_diff_eq!(rho, 1.0, epsilon = 1e-8);
    }

    #[test]
    fn cca_needs_two_rows() {
        let a = array![[1.0]];
        assert!(largest_canonical_correlation(a.view(), a.view(), 1e-8).is_err());
    }

    #[test]
    fn rdc_rejects_mismatched_rows() {
        let x = Array2::zeros((5, 1));
        let y = Array2::zeros((6, 1));
        assert!(matches!(
            rdc(x.view(), y.view(), &RdcConfig::default()),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn rdc_constant_column_is_near_zero() {
        let x = Array2::from_shape_fn((100, 1), |(i, _)| i as f64);
        let y = Array2::from_elem((100, 1), 3.0);
        let r = rdc(x.view(), y.view(), &RdcConfig::default()).unwrap();
        assert!(r < 1e-3, "{r}");
    }
}
