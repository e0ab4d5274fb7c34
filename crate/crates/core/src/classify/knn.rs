use ndarray::{Array2, ArrayView2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::linalg::sq_dist;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnState {
    pub k: usize,
    pub x: Array2<f64>,
    /// Class index per training row.
    pub y: Vec<usize>,
    pub n_classes: usize,
}

impl KnnState {
    pub fn fit(x: ArrayView2<'_, f64>, y: &[usize], n_classes: usize, k: usize) -> Self {
        KnnState {
            k,
            x: x.to_owned(),
            y: y.to_vec(),
            n_classes,
        }
    }

    /// Majority vote among the `min(k, n)` nearest rows. Equal distances go
    /// to the lower training index, equal votes to the lower class index.
    pub fn predict(&self, q: ArrayView2<'_, f64>) -> Vec<usize> {
        let kk = self.k.min(self.y.len());
        let train: Vec<Vec<f64>> = self.x.rows().into_iter().map(|r| r.to_vec()).collect();
        (0..q.nrows())
            .into_par_iter()
            .map(|r| {
                let row = q.row(r).to_vec();
                let mut d: Vec<(f64, usize)> = train.iter().enumerate().map(|(i, t)| (sq_dist(&row, t), i)).collect();
                d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                let mut votes = vec![0usize; self.n_classes];
                for &(_, i) in &d[..kk] {
                    votes[self.y[i]] += 1;
                }
                let mut best = 0;
                for c in 1..self.n_classes {
                    if votes[c] > votes[best] {
                        best = c;
                    }
                }
                best
            })
            .collect()
    }
}
