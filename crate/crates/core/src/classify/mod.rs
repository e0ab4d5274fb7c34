//! The six classifiers: k-NN, Gaussian naive Bayes, multinomial logistic
//! regression, linear and Gaussian SVMs, and LDA.

mod gnb;
mod knn;
mod lda;
pub mod logreg;
pub mod svm;

use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::depmeasure::SigmaPolicy;
use crate::error::{Error, Result};

pub use gnb::GnbState;
pub use knn::KnnState;
pub use lda::LdaState;
pub use logreg::LogRegState;
pub use svm::{Kernel, SvmState};

pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ClassifierKind {
    Knn,
    Gnb,
    LogReg,
    Lsvm,
    Gsvm,
    Lda,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 6] = [
        ClassifierKind::Knn,
        ClassifierKind::Gnb,
        ClassifierKind::LogReg,
        ClassifierKind::Lsvm,
        ClassifierKind::Gsvm,
        ClassifierKind::Lda,
    ];

    /// Identifier used in configs and file names.
    pub fn key(self) -> &'static str {
        match self {
            ClassifierKind::Knn => "knn",
            ClassifierKind::Gnb => "gnb",
            ClassifierKind::LogReg => "logreg",
            ClassifierKind::Lsvm => "lsvm",
            ClassifierKind::Gsvm => "gsvm",
            ClassifierKind::Lda => "lda",
        }
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClassifierKind::Knn => "k-NN",
            ClassifierKind::Gnb => "G-NB",
            ClassifierKind::LogReg => "Log",
            ClassifierKind::Lsvm => "L-SVM",
            ClassifierKind::Gsvm => "G-SVM",
            ClassifierKind::Lda => "LDA",
        })
    }
}

impl FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        Ok(match norm.as_str() {
            "knn" => ClassifierKind::Knn,
            "gnb" | "naivebayes" => ClassifierKind::Gnb,
            "log" | "logreg" | "logistic" => ClassifierKind::LogReg,
            "lsvm" | "linearsvm" => ClassifierKind::Lsvm,
            "gsvm" | "rbfsvm" | "gaussiansvm" => ClassifierKind::Gsvm,
            "lda" => ClassifierKind::Lda,
            _ => return Err(Error::Config(format!("unknown classifier '{s}'"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum KnnWeighting {
    #[default]
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HyperParams {
    pub knn_k: usize,
    pub knn_weighting: KnnWeighting,
    /// Shared by logistic regression and both SVMs.
    pub c: f64,
    pub svm_sigma_policy: SigmaPolicy,
    pub gnb_var_smoothing: f64,
    pub lda_ridge: f64,
    pub max_iter: usize,
    pub logreg_tol: f64,
    pub svm_tol: f64,
}

impl Default for HyperParams {
    fn default() -> Self {
        HyperParams {
            knn_k: 5,
            knn_weighting: KnnWeighting::Uniform,
            c: 1.0,
            svm_sigma_policy: SigmaPolicy::MedianHeuristic,
            gnb_var_smoothing: 1e-9,
            lda_ridge: 1e-6,
            max_iter: 1000,
            logreg_tol: 1e-6,
            svm_tol: 1e-3,
        }
    }
}

impl HyperParams {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be positive, got {v}")))
            }
        };
        if self.knn_k == 0 {
            return Err(Error::Config("knn_k must be at least 1".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::Config("max_iter must be at least 1".into()));
        }
        positive("c", self.c)?;
        positive("gnb_var_smoothing", self.gnb_var_smoothing)?;
        positive("lda_ridge", self.lda_ridge)?;
        positive("logreg_tol", self.logreg_tol)?;
        positive("svm_tol", self.svm_tol)?;
        if let SigmaPolicy::Fixed(s) = self.svm_sigma_policy {
            positive("svm sigma", s)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ModelParams {
    Knn(KnnState),
    Gnb(GnbState),
    LogReg(LogRegState),
    Svm(SvmState),
    Lda(LdaState),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub version: u32,
    pub kind: ClassifierKind,
    pub hyper: HyperParams,
    /// Distinct training labels in ascending order; predictions are drawn
    /// from this list and score ties resolve to the earlier entry.
    pub classes: Vec<usize>,
    pub feature_dim: usize,
    pub seed: u64,
    pub params: ModelParams,
}

/// Train a classifier. Every trainer is deterministic; `seed` is recorded
/// with the model.
pub fn fit(
    kind: ClassifierKind,
    x: ArrayView2<'_, f64>,
    y: &[usize],
    hp: &HyperParams,
    seed: u64,
) -> Result<TrainedModel> {
    hp.validate()?;
    let (n, d) = x.dim();
    if y.len() != n {
        return Err(Error::shape(format!("{n} rows but {} labels", y.len())));
    }
    if d == 0 {
        return Err(Error::invalid("feature matrix has no columns"));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("feature matrix contains non-finite values"));
    }
    let mut classes = y.to_vec();
    classes.sort_unstable();
    classes.dedup();
    if classes.len() < 2 {
        return Err(Error::invalid(format!(
            "training data needs at least 2 classes, found {}",
            classes.len()
        )));
    }
    if n < classes.len() {
        return Err(Error::invalid(format!("{n} rows for {} classes", classes.len())));
    }
    let yi: Vec<usize> = y
        .iter()
        .map(|l| classes.binary_search(l).expect("label from class list"))
        .collect();
    let nc = classes.len();

    let params = match kind {
        ClassifierKind::Knn => ModelParams::Knn(KnnState::fit(x, &yi, nc, hp.knn_k)),
        ClassifierKind::Gnb => ModelParams::Gnb(GnbState::fit(x, &yi, nc, hp.gnb_var_smoothing)),
        ClassifierKind::LogReg => {
            let fit = logreg::train(x, &yi, nc, hp.c, hp.max_iter, hp.logreg_tol);
            if fit.state.weights.iter().any(|v| !v.is_finite()) {
                return Err(Error::Numeric("logistic regression diverged".into()));
            }
            if !fit.state.converged {
                log::warn!(
                    "logistic regression stopped after {} iterations with gradient norm {:.3e}",
                    fit.state.iterations,
                    fit.state.grad_norm
                );
            }
            ModelParams::LogReg(fit.state)
        }
        ClassifierKind::Lsvm | ClassifierKind::Gsvm => {
            let kernel = if kind == ClassifierKind::Lsvm {
                Kernel::Linear
            } else {
                let sigma = match hp.svm_sigma_policy {
                    SigmaPolicy::Fixed(s) => s,
                    SigmaPolicy::MedianHeuristic => svm::median_sq_distance(x).ok_or_else(|| {
                        Error::invalid("median heuristic needs distinct training rows; use a fixed sigma")
                    })?,
                };
                Kernel::Gaussian { sigma }
            };
            let state = SvmState::fit(
                x,
                &yi,
                nc,
                kernel,
                hp.c,
                hp.svm_tol,
                hp.max_iter.saturating_mul(n.max(1)),
            );
            if state.rho.iter().chain(state.dual_coef.iter()).any(|v| !v.is_finite()) {
                return Err(Error::Numeric("SVM solver produced non-finite values".into()));
            }
            ModelParams::Svm(state)
        }
        ClassifierKind::Lda => ModelParams::Lda(LdaState::fit(x, &yi, nc, hp.lda_ridge)?),
    };
    Ok(TrainedModel {
        version: MODEL_VERSION,
        kind,
        hyper: hp.clone(),
        classes,
        feature_dim: d,
        seed,
        params,
    })
}

fn argmax_rows(scores: &Array2<f64>) -> Vec<usize> {
    scores
        .rows()
        .into_iter()
        .map(|row| {
            let mut best = 0;
            for (c, &v) in row.iter().enumerate().skip(1) {
                if v > row[best] {
                    best = c;
                }
            }
            best
        })
        .collect()
}

impl TrainedModel {
    /// Class-index predictions (positions in `classes`).
    pub fn predict_indices(&self, x: ArrayView2<'_, f64>) -> Result<Vec<usize>> {
        if x.ncols() != self.feature_dim {
            return Err(Error::shape(format!(
                "model expects {} features, got {}",
                self.feature_dim,
                x.ncols()
            )));
        }
        if x.nrows() == 0 {
            return Ok(Vec::new());
        }
        Ok(match &self.params {
            ModelParams::Knn(s) => s.predict(x),
            ModelParams::Gnb(s) => x
                .rows()
                .into_iter()
                .map(|r| {
                    let scores = s.log_scores(&r.to_vec());
                    let mut best = 0;
                    for c in 1..scores.len() {
                        if scores[c] > scores[best] {
                            best = c;
                        }
                    }
                    best
                })
                .collect(),
            ModelParams::LogReg(s) => argmax_rows(&s.scores(x)),
            ModelParams::Svm(s) => argmax_rows(&s.decision_values(x)),
            ModelParams::Lda(s) => argmax_rows(&s.scores(x)),
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<TrainedModel> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let model: TrainedModel = serde_json::from_str(&text)?;
        if model.version != MODEL_VERSION {
            return Err(Error::invalid(format!(
                "unsupported model version {} (expected {MODEL_VERSION})",
                model.version
            )));
        }
        Ok(model)
    }
}

/// Labels drawn from `model.classes`.
pub fn predict(model: &TrainedModel, x: ArrayView2<'_, f64>) -> Result<Vec<usize>> {
    Ok(model
        .predict_indices(x)?
        .into_iter()
        .map(|i| model.classes[i])
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Latency {
    pub median: f64,
    pub min: f64,
    pub max: f64,
    pub repeats: usize,
}

/// Wall-clock seconds of full `predict` calls.
pub fn predict_latency(model: &TrainedModel, x: ArrayView2<'_, f64>, repeats: usize) -> Result<Latency> {
    if repeats < 3 {
        return Err(Error::Config(format!(
            "latency needs at least 3 repeats, got {repeats}"
        )));
    }
    let mut times = Vec::with_capacity(repeats);
    for _ in 0..repeats {
        let start = Instant::now();
        let out = predict(model, x)?;
        std::hint::black_box(out);
        times.push(start.elapsed().as_secs_f64());
    }
    let min = times.iter().copied().fold(f64::INFINITY, f64::min);
    let max = times.iter().copied().fold(0.0, f64::max);
    let median = crate::linalg::median_in_place(&mut times).expect("repeats >= 3");
    Ok(Latency {
        median,
        min,
        max,
        repeats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed;
    use ndarray::{array, Array2};
    use rand::Rng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn column_major_input_matches_row_major() {
        let (x, y) = blobs(20, 4.0, 31);
        let xf = x.t().as_standard_layout().into_owned().reversed_axes();
        assert!(!xf.is_standard_layout());
        for kind in ClassifierKind::ALL {
            let hp = HyperParams::default();
            let a = fit(kind, x.view(), &y, &hp, 1).unwrap();
            let b = fit(kind, xf.view(), &y, &hp, 1).unwrap();
            assert_eq!(
                predict(&a, x.view()).unwrap(),
                predict(&b, xf.view()).unwrap(),
                "{kind}"
            );
        }
    }

    fn blobs(n_per: usize, sep: f64, s: u64) -> (Array2<f64>, Vec<usize>) {
        let centers = [[0.0, 0.0], [sep, 0.0], [0.0, sep]];
        let mut rng = seed::rng(s);
        let n = 3 * n_per;
        let mut x = Array2::zeros((n, 2));
        let mut y = Vec::with_capacity(n);
        for i in 0..n {
            let c = i % 3;
            for j in 0..2 {
                let z: f64 = StandardNormal.sample(&mut rng);
                x[[i, j]] = centers[c][j] + z;
            }
            y.push(c);
        }
        (x, y)
    }

    fn xor(n: usize, s: u64) -> (Array2<f64>, Vec<usize>) {
        let mut rng = seed::rng(s);
        let mut x = Array2::zeros((n, 2));
        let mut y = Vec::with_capacity(n);
        for i in 0..n {
            let a: f64 = rng.random_range(-1.0..1.0);
            let b: f64 = rng.random_range(-1.0..1.0);
            x[[i, 0]] = a;
            x[[i, 1]] = b;
            y.push(usize::from(a * b > 0.0));
        }
        (x, y)
    }

    fn accuracy(pred: &[usize], y: &[usize]) -> f64 {
        pred.iter().zip(y).filter(|(a, b)| a == b).count() as f64 / y.len() as f64
    }

    #[test]
    fn every_kind_fits_separated_blobs() {
        let (x, y) = blobs(100, 8.0, 1);
        for kind in ClassifierKind::ALL {
            let m = fit(kind, x.view(), &y, &HyperParams::default(), 0).unwrap();
            let acc = accuracy(&predict(&m, x.view()).unwrap(), &y);
            assert!(acc >= 0.95, "{kind}: {acc}");
        }
    }

    #[test]
    fn gaussian_svm_handles_xor_linear_does_not() {
        let (x, y) = xor(200, 4);
        let hp = HyperParams::default();
        let g = fit(ClassifierKind::Gsvm, x.view(), &y, &hp, 0).unwrap();
        let l = fit(ClassifierKind::Lsvm, x.view(), &y, &hp, 0).unwrap();
        let ga = accuracy(&predict(&g, x.view()).unwrap(), &y);
        let la = accuracy(&predict(&l, x.view()).unwrap(), &y);
        assert!(ga >= 0.9, "gsvm {ga}");
        assert!(la <= 0.7, "lsvm {la}");
    }

    #[test]
    fn knn_clamps_k_to_training_size() {
        let x = array![[0.0, 0.0], [10.0, 0.0], [0.0, 10.0]];
        let y = [0, 1, 2];
        let m = fit(ClassifierKind::Knn, x.view(), &y, &HyperParams::default(), 0).unwrap();
        // all three vote once each, so the tie goes to the first class
        assert_eq!(predict(&m, array![[9.0, 0.0]].view()).unwrap(), vec![0]);
        let hp = HyperParams {
            knn_k: 1,
            ..Default::default()
        };
        let m1 = fit(ClassifierKind::Knn, x.view(), &y, &hp, 0).unwrap();
        assert_eq!(predict(&m1, x.view()).unwrap(), vec![0, 1, 2]);
    }

    #[test]
    fn knn_distance_ties_prefer_lower_index() {
        let x = array![[1.0], [-1.0], [5.0]];
        let y = [2, 1, 0];
        let hp = HyperParams {
            knn_k: 1,
            ..Default::default()
        };
        let m = fit(ClassifierKind::Knn, x.view(), &y, &hp, 0).unwrap();
        assert_eq!(predict(&m, array![[0.0]].view()).unwrap(), vec![2]);
    }

    #[test]
    fn gnb_symmetric_tie_goes_to_first_class() {
        let x = array![[-1.0, 0.5], [-1.0, -0.5], [1.0, 0.5], [1.0, -0.5]];
        let y = [3, 3, 7, 7];
        let m = fit(ClassifierKind::Gnb, x.view(), &y, &HyperParams::default(), 0).unwrap();
        assert_eq!(predict(&m, array![[0.0, 0.0]].view()).unwrap(), vec![3]);
    }

    #[test]
    fn gnb_matches_brute_force_densities() {
        let x = array![
            [0.1, 2.0],
            [0.4, 1.5],
            [-0.3, 2.2],
            [1.0, -1.0],
            [1.4, -0.7],
            [0.9, -1.6],
            [1.2, -0.4],
            [-2.0, 0.3],
            [-2.5, 0.1],
            [-1.7, 0.9]
        ];
        let y = [0, 0, 0, 1, 1, 1, 1, 2, 2, 2];
        let hp = HyperParams::default();
        let m = fit(ClassifierKind::Gnb, x.view(), &y, &hp, 0).unwrap();
        let ModelParams::Gnb(state) = &m.params else { panic!() };

        // independent oracle: per-class moments by explicit filtering, density
        // as a product of normal pdfs
        let all_var = |j: usize| {
            let col: Vec<f64> = (0..10).map(|i| x[[i, j]]).collect();
            let mu = col.iter().sum::<f64>() / 10.0;
            col.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / 10.0
        };
        let eps = hp.gnb_var_smoothing * all_var(0).max(all_var(1));
        for q in x.rows() {
            for c in 0..3 {
                let members: Vec<usize> = (0..10).filter(|&i| y[i] == c).collect();
                let cnt = members.len() as f64;
                let mut dens = cnt / 10.0;
                for j in 0..2 {
                    let mu = members.iter().map(|&i| x[[i, j]]).sum::<f64>() / cnt;
                    let var = members.iter().map(|&i| (x[[i, j]] - mu).powi(2)).sum::<f64>() / cnt + eps;
                    dens *= (-(q[j] - mu).powi(2) / (2.0 * var)).exp() / (2.0 * std::f64::consts::PI * var).sqrt();
                }
                let got = state.log_scores(&q.to_vec())[c];
                approx::assert_relative_eq!(got, dens.ln(), max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn logreg_separable_and_monotone() {
        let x = array![[0.0, 0.0], [0.5, 0.2], [0.2, 0.7], [3.0, 3.0], [3.4, 2.8], [2.7, 3.5]];
        let y = [0, 0, 0, 1, 1, 1];
        let hp = HyperParams::default();
        let m = fit(ClassifierKind::LogReg, x.view(), &y, &hp, 0).unwrap();
        assert_eq!(predict(&m, x.view()).unwrap(), y.to_vec());

        let (bx, by) = blobs(50, 3.0, 9);
        let f = logreg::train(bx.view(), &by, 3, 1.0, 1000, 1e-6);
        assert!(f.objective_trace.windows(2).all(|w| w[1] <= w[0]));
        if f.state.converged {
            assert!(f.state.grad_norm < 1e-6);
        }
        assert!(f.state.converged, "grad norm {}", f.state.grad_norm);
    }

    #[test]
    fn gsvm_translation_invariant() {
        let (x, y) = blobs(30, 2.0, 5);
        let shift = array![123.0, -45.0];
        let xs = &x + &shift.view().insert_axis(ndarray::Axis(0));
        // shifted inputs round differently, so compare converged solutions
        let hp = HyperParams {
            svm_tol: 1e-10,
            ..Default::default()
        };
        let a = fit(ClassifierKind::Gsvm, x.view(), &y, &hp, 0).unwrap();
        let b = fit(ClassifierKind::Gsvm, xs.view(), &y, &hp, 0).unwrap();
        let (ModelParams::Svm(sa), ModelParams::Svm(sb)) = (&a.params, &b.params) else {
            panic!()
        };
        let da = sa.decision_values(x.view());
        let db = sb.decision_values(xs.view());
        for (u, v) in da.iter().zip(&db) {
            assert!((u - v).abs() < 1e-6, "{u} vs {v}");
        }
    }

    #[test]
    fn smo_satisfies_kkt() {
        let (x, y) = blobs(40, 2.0, 11);
        let sigma = svm::median_sq_distance(x.view()).unwrap();
        for kernel in [Kernel::Linear, Kernel::Gaussian { sigma }] {
            let k = svm::gram(x.view(), kernel);
            let yy: Vec<f64> = y.iter().map(|&l| if l == 0 { 1.0 } else { -1.0 }).collect();
            let sol = svm::smo(&k, &yy, 1.0, 1e-3, 1_000_000);
            assert!(sol.alpha.iter().all(|&a| (0.0..=1.0).contains(&a)));
            let eq: f64 = sol.alpha.iter().zip(&yy).map(|(a, y)| a * y).sum();
            assert!(eq.abs() < 1e-9);
            assert!(svm::kkt_gap(&k, &yy, 1.0, &sol.alpha) < 1e-3);
        }
    }

    #[test]
    fn label_permutation_equivariance() {
        // well separated so that no vote or score ties occur
        let (x, y) = blobs(30, 6.0, 2);
        let perm = [2usize, 0, 1];
        let yp: Vec<usize> = y.iter().map(|&l| perm[l]).collect();
        let hp = HyperParams::default();
        for kind in ClassifierKind::ALL {
            let a = predict(&fit(kind, x.view(), &y, &hp, 0).unwrap(), x.view()).unwrap();
            let b = predict(&fit(kind, x.view(), &yp, &hp, 0).unwrap(), x.view()).unwrap();
            let mapped: Vec<usize> = a.iter().map(|&l| perm[l]).collect();
            assert_eq!(mapped, b, "{kind}");
        }
    }

    #[test]
    fn predictions_are_repeatable() {
        let (x, y) = blobs(30, 1.5, 3);
        for kind in ClassifierKind::ALL {
            let m = fit(kind, x.view(), &y, &HyperParams::default(), 0).unwrap();
            assert_eq!(predict(&m, x.view()).unwrap(), predict(&m, x.view()).unwrap());
            let again = fit(kind, x.view(), &y, &HyperParams::default(), 0).unwrap();
            assert_eq!(m, again);
        }
    }

    #[test]
    fn fit_rejects_bad_input() {
        let x = array![[0.0], [1.0]];
        assert!(fit(ClassifierKind::Gnb, x.view(), &[1, 1], &HyperParams::default(), 0).is_err());
        let bad = array![[0.0], [f64::NAN]];
        assert!(fit(ClassifierKind::Gnb, bad.view(), &[0, 1], &HyperParams::default(), 0).is_err());
        let m = fit(ClassifierKind::Lda, x.view(), &[0, 1], &HyperParams::default(), 0).unwrap();
        assert!(matches!(predict(&m, array![[0.0, 1.0]].view()), Err(Error::Shape(_))));
        assert!(predict(&m, Array2::<f64>::zeros((0, 1)).view()).unwrap().is_empty());
    }

    #[test]
    fn model_json_round_trip() {
        let (x, y) = blobs(10, 3.0, 7);
        let dir = tempfile::tempdir().unwrap();
        for kind in ClassifierKind::ALL {
            let m = fit(kind, x.view(), &y, &HyperParams::default(), 42).unwrap();
            let p = dir.path().join(format!("{}.json", kind.key()));
            m.save(&p).unwrap();
            let back = TrainedModel::load(&p).unwrap();
            assert_eq!(predict(&back, x.view()).unwrap(), predict(&m, x.view()).unwrap());
        }
    }

    #[test]
    fn latency_reports_median_min_max() {
        let (x, y) = blobs(10, 3.0, 7);
        let m = fit(ClassifierKind::Gsvm, x.view(), &y, &HyperParams::default(), 0).unwrap();
        let l = predict_latency(&m, x.view(), 5).unwrap();
        assert!(l.min <= l.median && l.median <= l.max);
        assert!(predict_latency(&m, x.view(), 2).is_err());
        let e = predict_latency(&m, Array2::<f64>::zeros((0, 2)).view(), 3).unwrap();
        assert!(e.median < 0.01);
    }

    #[test]
    fn gsvm_latency_grows_with_width_at_fixed_support_count() {
        let (x, y) = crate::synth::gaussian_blobs(300, 300, 3, 4.0, 5);
        let wide = fit(ClassifierKind::Gsvm, x.view(), &y, &HyperParams::default(), 0).unwrap();
        let mut narrow = wide.clone();
        narrow.feature_dim = 20;
        if let ModelParams::Svm(state) = &mut narrow.params {
            state.support_vectors = state.support_vectors.slice(ndarray::s![.., ..20]).to_owned();
        }
        let (ModelParams::Svm(a), ModelParams::Svm(b)) = (&wide.params, &narrow.params) else {
            panic!("gsvm stores svm parameters");
        };
        assert_eq!(a.n_support(), b.n_support());
        let q = crate::synth::normal_matrix(1000, 300, 6);
        let full = predict_latency(&wide, q.view(), 5).unwrap();
        let reduced = predict_latency(&narrow, q.slice(ndarray::s![.., ..20]), 5).unwrap();
        println!("latency ratio 20/300 = {:.3}", reduced.median / full.median);
        assert!(reduced.median < full.median);
    }

    #[test]
    fn kind_names_parse() {
        for k in ClassifierKind::ALL {
            assert_eq!(k.key().parse::<ClassifierKind>().unwrap(), k);
            assert_eq!(k.to_string().parse::<ClassifierKind>().unwrap(), k);
        }
        assert!("tree".parse::<ClassifierKind>().is_err());
    }
}
