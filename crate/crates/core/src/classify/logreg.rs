//! Multinomial logistic regression, full-batch gradient descent with an
//! Armijo backtracking line search.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRegState {
    /// `n_classes × d`
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub grad_norm: f64,
}

#[derive(Debug, Clone)]
pub struct LogRegFit {
    pub state: LogRegState,
    /// Objective value before the first step and after every accepted step.
    pub objective_trace: Vec<f64>,
}

struct Problem<'a> {
    x: ArrayView2<'a, f64>,
    y: &'a [usize],
    onehot: Array2<f64>,
    inv_c: f64,
}

impl Problem<'_> {
    fn logits(&self, w: &Array2<f64>, b: &Array1<f64>) -> Array2<f64> {
        self.x.dot(&w.t()) + b.view().insert_axis(Axis(0))
    }

    /// Summed cross-entropy plus `‖W‖² / (2C)`; also returns softmax probabilities.
    fn objective(&self, w: &Array2<f64>, b: &Array1<f64>) -> (f64, Array2<f64>) {
        let mut p = self.logits(w, b);
        let mut loss = 0.0;
        for (mut row, &target) in p.rows_mut().into_iter().zip(self.y) {
            let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let z_true = row[target];
            row.mapv_inplace(|z| (z - max).exp());
            let sum = row.sum();
            loss += max + sum.ln() - z_true;
            row.mapv_inplace(|e| e / sum);
        }
        loss += 0.5 * self.inv_c * w.iter().map(|v| v * v).sum::<f64>();
        (loss, p)
    }

    fn gradient(&self, w: &Array2<f64>, p: &Array2<f64>) -> (Array2<f64>, Array1<f64>) {
        let resid = p - &self.onehot;
        let gw = resid.t().dot(&self.x) + w * self.inv_c;
        let gb = resid.sum_axis(Axis(0));
        (gw, gb)
    }
}

fn sq_norm(gw: &Array2<f64>, gb: &Array1<f64>) -> f64 {
    gw.iter().chain(gb.iter()).map(|v| v * v).sum()
}

/// Weights, bias and their gradients at the previous iterate.
type Snapshot = (Array2<f64>, Array1<f64>, Array2<f64>, Array1<f64>);

/// `y` holds class indices `0..n_classes`.
pub fn train(x: ArrayView2<'_, f64>, y: &[usize], n_classes: usize, c: f64, max_iter: usize, tol: f64) -> LogRegFit {
    let d = x.ncols();
    let mut onehot = Array2::zeros((x.nrows(), n_classes));
    for (i, &k) in y.iter().enumerate() {
        onehot[[i, k]] = 1.0;
    }
    let prob = Problem {
        x,
        y,
        onehot,
        inv_c: 1.0 / c,
    };

    let mut w = Array2::zeros((n_classes, d));
    let mut b = Array1::zeros(n_classes);
    let (mut f, mut p) = prob.objective(&w, &b);
    let (mut gw, mut gb) = prob.gradient(&w, &p);
    let mut g2 = sq_norm(&gw, &gb);
    let mut trace = vec![f];
    let mut step = 1.0 / (1.0 + x.nrows() as f64);
    let mut prev: Option<Snapshot> = None;
    let mut iterations = 0;

    while iterations < max_iter && g2.sqrt() >= tol {
        // Barzilai-Borwein trial step, then halve until sufficient decrease
        if let Some((pw, pb, pgw, pgb)) = &prev {
            let sw = &w - pw;
            let sb = &b - pb;
            let yw = &gw - pgw;
            let yb = &gb - pgb;
            let sy: f64 = (&sw * &yw).sum() + (&sb * &yb).sum();
            let ss: f64 = sq_norm(&sw, &sb);
            if sy > 0.0 && ss > 0.0 {
                step = ss / sy;
            }
        }
        let mut accepted = None;
        for _ in 0..60 {
            let nw = &w - &(&gw * step);
            let nb = &b - &(&gb * step);
            let (nf, np) = prob.objective(&nw, &nb);
            if nf <= f - 1e-4 * step * g2 {
                accepted = Some((nw, nb, nf, np));
                break;
            }
            step *= 0.5;
        }
        let Some((nw, nb, nf, np)) = accepted else {
            break;
        };
        prev = Some((w, b, gw.clone(), gb.clone()));
        w = nw;
        b = nb;
        f = nf;
        p = np;
        let g = prob.gradient(&w, &p);
        gw = g.0;
        gb = g.1;
        g2 = sq_norm(&gw, &gb);
        trace.push(f);
        iterations += 1;
    }

    let grad_norm = g2.sqrt();
    LogRegFit {
        state: LogRegState {
            weights: w,
            bias: b,
            iterations,
            converged: grad_norm < tol,
            grad_norm,
        },
        objective_trace: trace,
    }
}

impl LogRegState {
    pub fn scores(&self, x: ArrayView2<'_, f64>) -> Array2<f64> {
        x.dot(&self.weights.t()) + self.bias.view().insert_axis(Axis(0))
    }
}
