use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GnbState {
    /// Per class, per feature.
    pub means: Vec<Vec<f64>>,
    pub variances: Vec<Vec<f64>>,
    pub log_priors: Vec<f64>,
}

impl GnbState {
    /// Per-class maximum likelihood moments. Every variance is inflated by
    /// `smoothing × max_j Var(X_j)`.
    pub fn fit(x: ArrayView2<'_, f64>, y: &[usize], n_classes: usize, smoothing: f64) -> Self {
        let (n, d) = x.dim();
        let max_var = x.columns().into_iter().map(|c| c.var(0.0)).fold(0.0, f64::max);
        let epsilon = if max_var > 0.0 { smoothing * max_var } else { smoothing };

        let mut counts = vec![0usize; n_classes];
        let mut means = vec![vec![0.0; d]; n_classes];
        for (i, row) in x.rows().into_iter().enumerate() {
            counts[y[i]] += 1;
            means[y[i]].iter_mut().zip(row).for_each(|(m, v)| *m += v);
        }
        for (m, &c) in means.iter_mut().zip(&counts) {
            m.iter_mut().for_each(|v| *v /= c as f64);
        }
        let mut variances = vec![vec![0.0; d]; n_classes];
        for (i, row) in x.rows().into_iter().enumerate() {
            let c = y[i];
            for j in 0..d {
                let t = row[j] - means[c][j];
                variances[c][j] += t * t;
            }
        }
        for (v, &c) in variances.iter_mut().zip(&counts) {
            v.iter_mut().for_each(|s| *s = *s / c as f64 + epsilon);
        }
        let log_priors = counts.iter().map(|&c| (c as f64 / n as f64).ln()).collect();
        GnbState {
            means,
            variances,
            log_priors,
        }
    }

    /// Joint log-likelihood per class for one row.
    pub fn log_scores(&self, row: &[f64]) -> Vec<f64> {
        let ln_2pi = (2.0 * std::f64::consts::PI).ln();
        self.means
            .iter()
            .zip(&self.variances)
            .zip(&self.log_priors)
            .map(|((m, v), lp)| {
                let mut s = 0.0;
                for j in 0..row.len() {
                    let t = row[j] - m[j];
                    s += ln_2pi + v[j].ln() + t * t / v[j];
                }
                lp - 0.5 * s
            })
            .collect()
    }
}
