//! Soft-margin SVMs trained by SMO on the dual, combined one-vs-rest.
//!
//! The binary solver uses second-order working-set selection and stops when
//! the maximal KKT violation `max_{I_up} −y_t G_t − min_{I_low} −y_t G_t`
//! falls below the tolerance.

use ndarray::{Array2, ArrayView2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::depmeasure::gaussian;
use crate::linalg::{dot, median_in_place, sq_dist};

const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Kernel {
    Linear,
    /// `exp(−‖a − b‖² / σ)`
    Gaussian {
        sigma: f64,
    },
}

impl Kernel {
    #[inline]
    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        match *self {
            Kernel::Linear => dot(a, b),
            Kernel::Gaussian { sigma } => gaussian(sq_dist(a, b), sigma),
        }
    }
}

/// Dense Gram matrix, row-major.
pub fn gram(x: ArrayView2<'_, f64>, kernel: Kernel) -> Vec<f64> {
    let n = x.nrows();
    let rows: Vec<Vec<f64>> = x.rows().into_iter().map(|r| r.to_vec()).collect();
    let upper: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| (i..n).map(|j| kernel.eval(&rows[i], &rows[j])).collect())
        .collect();
    let mut k = vec![0.0; n * n];
    for (i, row) in upper.iter().enumerate() {
        for (off, &v) in row.iter().enumerate() {
            let j = i + off;
            k[i * n + j] = v;
            k[j * n + i] = v;
        }
    }
    k
}

/// Median squared pairwise distance of the training rows, or `None` when
/// every row coincides.
pub fn median_sq_distance(x: ArrayView2<'_, f64>) -> Option<f64> {
    let mut d = crate::linalg::pairwise_sq_dists(x);
    let m = median_in_place(&mut d)?;
    (m > 0.0).then_some(m)
}

#[derive(Debug, Clone)]
pub struct BinarySolution {
    pub alpha: Vec<f64>,
    /// Decision function is `Σ α_i y_i K(x_i, x) − rho`.
    pub rho: f64,
    pub iterations: usize,
    /// Final maximal violating-pair gap.
    pub gap: f64,
}

/// Solve `min ½ αᵀQα − eᵀα` s.t. `0 ≤ α ≤ c`, `yᵀα = 0`, with
/// `Q_ij = y_i y_j K_ij`. `y` entries are ±1.
pub fn smo(k: &[f64], y: &[f64], c: f64, tol: f64, max_iter: usize) -> BinarySolution {
    let n = y.len();
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let q = |i: usize, j: usize| y[i] * y[j] * k[i * n + j];
    let is_up = |a: f64, yi: f64| (yi > 0.0 && a < c) || (yi < 0.0 && a > 0.0);
    let is_low = |a: f64, yi: f64| (yi > 0.0 && a > 0.0) || (yi < 0.0 && a < c);

    let mut iterations = 0;
    let mut gap = f64::INFINITY;
    while iterations < max_iter {
        // i: maximal −y G over I_up
        let mut gmax = f64::NEG_INFINITY;
        let mut i_sel = None;
        for t in 0..n {
            if is_up(alpha[t], y[t]) {
                let v = -y[t] * grad[t];
                if v > gmax {
                    gmax = v;
                    i_sel = Some(t);
                }
            }
        }
        // j: second-order choice over I_low; gmin tracks the violation
        let mut gmin = f64::INFINITY;
        let mut j_sel = None;
        let mut best_obj = f64::INFINITY;
        if let Some(i) = i_sel {
            for t in 0..n {
                if !is_low(alpha[t], y[t]) {
                    continue;
                }
                let v = -y[t] * grad[t];
                if v < gmin {
                    gmin = v;
                }
                let b = gmax - v;
                if b > 0.0 {
                    let a = k[i * n + i] + k[t * n + t] - 2.0 * k[i * n + t];
                    let a = if a > 0.0 { a } else { TAU };
                    let obj = -(b * b) / a;
                    if obj <= best_obj {
                        best_obj = obj;
                        j_sel = Some(t);
                    }
                }
            }
        }
        gap = gmax - gmin;
        let (Some(i), Some(j)) = (i_sel, j_sel) else {
            break;
        };
        if gap < tol {
            break;
        }
        iterations += 1;

        let (ai_old, aj_old) = (alpha[i], alpha[j]);
        if y[i] != y[j] {
            let quad = {
                let v = q(i, i) + q(j, j) + 2.0 * q(i, j);
                if v > 0.0 {
                    v
                } else {
                    TAU
                }
            };
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let quad = {
                let v = q(i, i) + q(j, j) - 2.0 * q(i, j);
                if v > 0.0 {
                    v
                } else {
                    TAU
                }
            };
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }

        let (di, dj) = (alpha[i] - ai_old, alpha[j] - aj_old);
        for (t, g) in grad.iter_mut().enumerate() {
            *g += q(t, i) * di + q(t, j) * dj;
        }
    }

    // rho from free variables, else the midpoint of the feasible interval
    let mut free_sum = 0.0;
    let mut free_n = 0usize;
    let mut ub = f64::INFINITY;
    let mut lb = f64::NEG_INFINITY;
    for t in 0..n {
        let yg = y[t] * grad[t];
        if alpha[t] > 0.0 && alpha[t] < c {
            free_sum += yg;
            free_n += 1;
        } else if (alpha[t] >= c && y[t] < 0.0) || (alpha[t] <= 0.0 && y[t] > 0.0) {
            ub = ub.min(yg);
        } else {
            lb = lb.max(yg);
        }
    }
    let rho = if free_n > 0 {
        free_sum / free_n as f64
    } else {
        0.5 * (ub + lb)
    };
    BinarySolution {
        alpha,
        rho,
        iterations,
        gap,
    }
}

/// Maximal KKT violation of a dual point, recomputed from scratch.
pub fn kkt_gap(k: &[f64], y: &[f64], c: f64, alpha: &[f64]) -> f64 {
    let n = y.len();
    let grad: Vec<f64> = (0..n)
        .map(|t| (0..n).map(|s| y[t] * y[s] * k[t * n + s] * alpha[s]).sum::<f64>() - 1.0)
        .collect();
    let mut gmax = f64::NEG_INFINITY;
    let mut gmin = f64::INFINITY;
    for t in 0..n {
        let v = -y[t] * grad[t];
        let up = (y[t] > 0.0 && alpha[t] < c) || (y[t] < 0.0 && alpha[t] > 0.0);
        let low = (y[t] > 0.0 && alpha[t] > 0.0) || (y[t] < 0.0 && alpha[t] < c);
        if up {
            gmax = gmax.max(v);
        }
        if low {
            gmin = gmin.min(v);
        }
    }
    (gmax - gmin).max(0.0)
}

/// One-vs-rest machines sharing one set of support vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmState {
    pub kernel: Kernel,
    /// Rows with a non-zero multiplier in at least one machine.
    pub support_vectors: Array2<f64>,
    /// `n_classes × n_sv`, entries `α_i y_i`.
    pub dual_coef: Array2<f64>,
    /// Per machine; decision value is `coef · k(sv, x) − rho`.
    pub rho: Vec<f64>,
    /// Primal weights `n_classes × d`, present for the linear kernel.
    pub primal: Option<Array2<f64>>,
    pub iterations: Vec<usize>,
}

impl SvmState {
    pub fn fit(
        x: ArrayView2<'_, f64>,
        y: &[usize],
        n_classes: usize,
        kernel: Kernel,
        c: f64,
        tol: f64,
        max_iter: usize,
    ) -> SvmState {
        let n = x.nrows();
        let k = gram(x, kernel);
        let solutions: Vec<BinarySolution> = (0..n_classes)
            .into_par_iter()
            .map(|cls| {
                let yy: Vec<f64> = y.iter().map(|&l| if l == cls { 1.0 } else { -1.0 }).collect();
                smo(&k, &yy, c, tol, max_iter)
            })
            .collect();

        let sv_idx: Vec<usize> = (0..n).filter(|&i| solutions.iter().any(|s| s.alpha[i] > 0.0)).collect();
        let mut dual_coef = Array2::zeros((n_classes, sv_idx.len()));
        for (cls, sol) in solutions.iter().enumerate() {
            for (col, &i) in sv_idx.iter().enumerate() {
                let yi = if y[i] == cls { 1.0 } else { -1.0 };
                dual_coef[[cls, col]] = sol.alpha[i] * yi;
            }
        }
        let support_vectors = x.select(ndarray::Axis(0), &sv_idx);
        let primal = matches!(kernel, Kernel::Linear).then(|| dual_coef.dot(&support_vectors));
        SvmState {
            kernel,
            support_vectors,
            dual_coef,
            rho: solutions.iter().map(|s| s.rho).collect(),
            primal,
            iterations: solutions.iter().map(|s| s.iterations).collect(),
        }
    }

    /// `m × n_classes` decision values.
    pub fn decision_values(&self, x: ArrayView2<'_, f64>) -> Array2<f64> {
        let m = x.nrows();
        let classes = self.rho.len();
        if let Some(w) = &self.primal {
            let mut out = x.dot(&w.t());
            for mut row in out.rows_mut() {
                row.iter_mut().zip(&self.rho).for_each(|(v, r)| *v -= r);
            }
            return out;
        }
        let svs: Vec<Vec<f64>> = self.support_vectors.rows().into_iter().map(|r| r.to_vec()).collect();
        let rows: Vec<Vec<f64>> = (0..m)
            .into_par_iter()
            .map(|r| {
                let q = x.row(r).to_vec();
                let kv: Vec<f64> = svs.iter().map(|s| self.kernel.eval(s, &q)).collect();
                (0..classes)
                    .map(|c| dot(self.dual_coef.row(c).as_slice().expect("standard layout"), &kv) - self.rho[c])
                    .collect()
            })
            .collect();
        Array2::from_shape_fn((m, classes), |(i, c)| rows[i][c])
    }

    pub fn n_support(&self) -> usize {
        self.support_vectors.nrows()
    }
}
