//! Stratified cross-validation over featurizer × reducer × classifier
//! combinations, plus the quantitative and per-comment reports.

mod report;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;
use std::time::Instant;

use ndarray::{Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify::{self, ClassifierKind, HyperParams};
use crate::corpus::{Category, LabeledCorpus};
use crate::depmeasure::{MmdConfig, RdcConfig};
use crate::embeddings::EmbeddingStore;
use crate::error::{Error, Result};
use crate::featsel::{greedy_select, pca_fit, PcaModel, Scorer, SelectionResult};
use crate::featurize::{bow_matrix, build_vocabulary, embedding_matrix, tfidf_matrix, FeatureMatrix};
use crate::seed;

pub use report::{
    markdown_table, qualitative_markdown, qualitative_report, strip_timing_fields, MethodPredictions,
    QualitativeReport, QualitativeRow, TIMING_FIELDS,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Featurizer {
    Bow,
    Tfidf,
    W2v,
}

impl Featurizer {
    pub const ALL: [Featurizer; 3] = [Featurizer::Bow, Featurizer::Tfidf, Featurizer::W2v];
}

impl fmt::Display for Featurizer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Featurizer::Bow => "BoW",
            Featurizer::Tfidf => "TF-IDF",
            Featurizer::W2v => "W2V",
        })
    }
}

impl FromStr for Featurizer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "bow" => Ok(Featurizer::Bow),
            "tfidf" => Ok(Featurizer::Tfidf),
            "w2v" | "word2vec" => Ok(Featurizer::W2v),
            _ => Err(Error::Config(format!("unknown featurizer '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Reducer {
    None,
    Pca,
    GreedyRdc,
    GreedyMmd,
}

impl Reducer {
    pub const ALL: [Reducer; 4] = [Reducer::None, Reducer::Pca, Reducer::GreedyRdc, Reducer::GreedyMmd];
}

impl fmt::Display for Reducer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Reducer::None => "none",
            Reducer::Pca => "PCA",
            Reducer::GreedyRdc => "RDC",
            Reducer::GreedyMmd => "MMD",
        })
    }
}

impl FromStr for Reducer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "none" => Ok(Reducer::None),
            "pca" => Ok(Reducer::Pca),
            "rdc" | "greedyrdc" => Ok(Reducer::GreedyRdc),
            "mmd" | "greedymmd" => Ok(Reducer::GreedyMmd),
            _ => Err(Error::Config(format!("unknown reducer '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub featurizers: Vec<Featurizer>,
    /// Applied to W2V features only; BoW and TF-IDF always run un-reduced.
    pub reducers: Vec<Reducer>,
    pub classifiers: Vec<ClassifierKind>,
    pub folds: usize,
    pub seed: u64,
    pub target_dim: usize,
    pub hyper: HyperParams,
    /// Projection count, weight scale and ridge for greedy RDC; the seed
    /// field is replaced per fold.
    pub rdc: RdcConfig,
}

impl Default for ExperimentPlan {
    fn default() -> Self {
        ExperimentPlan {
            featurizers: Featurizer::ALL.to_vec(),
            reducers: Reducer::ALL.to_vec(),
            classifiers: ClassifierKind::ALL.to_vec(),
            folds: 5,
            seed: 0,
            target_dim: 20,
            hyper: HyperParams::default(),
            rdc: RdcConfig::default(),
        }
    }
}

impl ExperimentPlan {
    pub fn validate(&self) -> Result<()> {
        if self.folds < 2 {
            return Err(Error::Config(format!("folds must be at least 2, got {}", self.folds)));
        }
        if self.featurizers.is_empty() {
            return Err(Error::Config("plan has no featurizers".into()));
        }
        if self.classifiers.is_empty() {
            return Err(Error::Config("plan has no classifiers".into()));
        }
        if self.featurizers.contains(&Featurizer::W2v) && self.reducers.is_empty() {
            return Err(Error::Config(
                "W2V requested but the plan has no reducers (use \"none\")".into(),
            ));
        }
        if self.target_dim == 0 {
            return Err(Error::Config("target_dim must be at least 1".into()));
        }
        self.hyper.validate()?;
        self.rdc.validate()
    }

    /// (featurizer, reducer) pairs in evaluation order.
    pub fn pipelines(&self) -> Vec<(Featurizer, Reducer)> {
        let mut out = Vec::new();
        for &f in dedup(&self.featurizers).iter() {
            if f == Featurizer::W2v {
                out.extend(dedup(&self.reducers).into_iter().map(|r| (f, r)));
            } else {
                out.push((f, Reducer::None));
            }
        }
        out
    }
}

fn dedup<T: Copy + Ord>(items: &[T]) -> Vec<T> {
    let mut seen = BTreeSet::new();
    items.iter().copied().filter(|x| seen.insert(*x)).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fold {
    /// Row positions, ascending.
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Each class's positions are shuffled, the per-class lists are concatenated
/// in class order, and the `p`-th position of the concatenation goes to test
/// fold `p mod folds`.
pub fn stratified_folds<L: Ord + Copy + fmt::Display>(labels: &[L], folds: usize, seed: u64) -> Result<Vec<Fold>> {
    if folds < 2 {
        return Err(Error::Config(format!("folds must be at least 2, got {folds}")));
    }
    let mut by_class: BTreeMap<L, Vec<usize>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        by_class.entry(l).or_default().push(i);
    }
    for (class, members) in &by_class {
        if members.len() < folds {
            return Err(Error::invalid(format!(
                "class {class} has {} items, fewer than {folds} folds",
                members.len()
            )));
        }
    }
    let mut assignment = vec![0usize; labels.len()];
    let mut p = 0usize;
    for (rank, members) in by_class.values_mut().enumerate() {
        members.shuffle(&mut seed::rng(seed::derive(seed, "folds", &[rank as u64])));
        for &i in members.iter() {
            assignment[i] = p % folds;
            p += 1;
        }
    }
    Ok((0..folds)
        .map(|f| {
            let (test, train): (Vec<usize>, Vec<usize>) = (0..labels.len()).partition(|&i| assignment[i] == f);
            Fold { train, test }
        })
        .collect())
}

/// A dimensionality reducer fitted on training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum FittedReducer {
    Identity { dim: usize },
    Pca(PcaModel),
    Selection(SelectionResult),
}

impl FittedReducer {
    pub fn transform(&self, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        match self {
            FittedReducer::Identity { dim } => {
                if x.ncols() != *dim {
                    return Err(Error::shape(format!("expected {dim} columns, got {}", x.ncols())));
                }
                Ok(x.to_owned())
            }
            FittedReducer::Pca(m) => m.transform(x),
            FittedReducer::Selection(s) => {
                if x.ncols() != s.source_dim {
                    return Err(Error::shape(format!(
                        "selection made on {} columns, got {}",
                        s.source_dim,
                        x.ncols()
                    )));
                }
                Ok(x.select(Axis(1), &s.selected))
            }
        }
    }

    /// Hash of the serialized state; equal fingerprints mean equal fitted state.
    pub fn fingerprint(&self) -> u64 {
        let json = serde_json::to_string(self).expect("reducer state serializes");
        let mut h = std::collections::hash_map::DefaultHasher::new();
        json.hash(&mut h);
        h.finish()
    }
}

/// Fit `reducer` on the given training rows only.
pub fn fit_reducer(
    reducer: Reducer,
    x_train: ArrayView2<'_, f64>,
    y_train: &[usize],
    target_dim: usize,
    rdc: &RdcConfig,
    seed: u64,
) -> Result<FittedReducer> {
    let (n, d) = x_train.dim();
    Ok(match reducer {
        Reducer::None => FittedReducer::Identity { dim: d },
        Reducer::Pca => {
            let cap = n.min(d);
            let k = if target_dim > cap {
                log::warn!("PCA target {target_dim} exceeds min(n, d) = {cap}; using {cap}");
                cap
            } else {
                target_dim
            };
            FittedReducer::Pca(pca_fit(x_train, k)?)
        }
        Reducer::GreedyRdc => {
            let cfg = rdc.with_seed(seed);
            FittedReducer::Selection(greedy_select(x_train, y_train, &Scorer::Rdc(cfg), target_dim)?)
        }
        Reducer::GreedyMmd => FittedReducer::Selection(greedy_select(
            x_train,
            y_train,
            &Scorer::Mmd(MmdConfig::default()),
            target_dim,
        )?),
    })
}

/// Fit `reducer` on the training rows of `fold`, taken from the full matrix
/// `x` with labels `y`. Held-out rows are never read.
pub fn fit_fold_reducer(
    reducer: Reducer,
    x: ArrayView2<'_, f64>,
    y: &[usize],
    fold: &Fold,
    target_dim: usize,
    rdc: &RdcConfig,
    seed: u64,
) -> Result<FittedReducer> {
    if y.len() != x.nrows() {
        return Err(Error::shape(format!("{} labels for {} rows", y.len(), x.nrows())));
    }
    let x_train = x.select(Axis(0), &fold.train);
    let y_train: Vec<usize> = fold.train.iter().map(|&i| y[i]).collect();
    fit_reducer(reducer, x_train.view(), &y_train, target_dim, rdc, seed)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub featurizer: Featurizer,
    pub reducer: Reducer,
    pub classifier: ClassifierKind,
    /// Test accuracy per fold, in percent.
    pub fold_accuracies: Vec<f64>,
    pub mean_accuracy: f64,
    /// `confusion[true][predicted]`, category order Disagree, Neutral, Agree,
    /// summed over folds.
    pub confusion: [[usize; 3]; 3],
    /// Out-of-fold prediction per evaluated document, aligned with
    /// [`EvalReport::doc_ids`].
    pub predictions: Vec<Category>,
    pub reduce_seconds: f64,
    pub fit_seconds: f64,
    pub predict_seconds: f64,
}

impl EvalRow {
    pub fn pipeline_label(&self) -> String {
        pipeline_label(self.featurizer, self.reducer)
    }

    pub fn method_label(&self) -> String {
        format!("{} {}", self.pipeline_label(), self.classifier)
    }
}

pub fn pipeline_label(f: Featurizer, r: Reducer) -> String {
    match r {
        Reducer::None => f.to_string(),
        r => format!("{f}+{r}"),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub seed: u64,
    pub folds: usize,
    pub target_dim: usize,
    /// Documents that took part, in corpus order.
    pub doc_ids: Vec<usize>,
    pub labels: Vec<Category>,
    /// Documents excluded because a featurizer could not represent them.
    pub dropped: Vec<usize>,
    /// Test-fold index per evaluated document.
    pub fold_of: Vec<usize>,
    pub rows: Vec<EvalRow>,
    pub qualitative: QualitativeReport,
    pub elapsed_seconds: f64,
}

impl EvalReport {
    pub fn row(&self, f: Featurizer, r: Reducer, c: ClassifierKind) -> Option<&EvalRow> {
        self.rows
            .iter()
            .find(|row| row.featurizer == f && row.reducer == r && row.classifier == c)
    }

    /// Out-of-fold predictions of every row, keyed by method label.
    pub fn method_predictions(&self) -> Vec<MethodPredictions> {
        self.rows
            .iter()
            .map(|r| MethodPredictions {
                method: r.method_label(),
                doc_ids: self.doc_ids.clone(),
                predicted: r.predictions.clone(),
            })
            .collect()
    }
}

fn features(
    f: Featurizer,
    corpus: &LabeledCorpus,
    store: Option<&EmbeddingStore>,
) -> Result<(FeatureMatrix, Vec<usize>)> {
    Ok(match f {
        Featurizer::Bow => (bow_matrix(corpus, &build_vocabulary(corpus)?), Vec::new()),
        Featurizer::Tfidf => (tfidf_matrix(corpus, &build_vocabulary(corpus)?), Vec::new()),
        Featurizer::W2v => {
            let store = store.ok_or_else(|| {
                Error::Config("W2V featurizer requested but no embeddings were supplied (--embeddings)".into())
            })?;
            let e = embedding_matrix(corpus, store);
            (e.matrix, e.dropped)
        }
    })
}

/// Feature matrices restricted to the documents every featurizer can
/// represent, rows in corpus order.
#[derive(Debug, Clone)]
pub struct FeatureTable {
    pub doc_ids: Vec<usize>,
    pub labels: Vec<Category>,
    /// Ids removed because some featurizer could not represent them.
    pub dropped: Vec<usize>,
    pub matrices: BTreeMap<Featurizer, Array2<f64>>,
}

pub fn build_feature_table(
    corpus: &LabeledCorpus,
    store: Option<&EmbeddingStore>,
    featurizers: &[Featurizer],
) -> Result<FeatureTable> {
    let featurizers = dedup(featurizers);
    if featurizers.contains(&Featurizer::W2v) && store.is_none() {
        return Err(Error::Config(
            "W2V featurizer requested but no embeddings were supplied (--embeddings)".into(),
        ));
    }
    let built: Vec<(Featurizer, FeatureMatrix, Vec<usize>)> = featurizers
        .iter()
        .map(|&f| features(f, corpus, store).map(|(m, d)| (f, m, d)))
        .collect::<Result<_>>()?;
    let dropped: BTreeSet<usize> = built.iter().flat_map(|(_, _, d)| d.iter().copied()).collect();
    let doc_ids: Vec<usize> = corpus.ids().into_iter().filter(|id| !dropped.contains(id)).collect();
    let labels: Vec<Category> = doc_ids
        .iter()
        .map(|&id| corpus.document(id).expect("id from corpus").category)
        .collect();
    let matrices = built
        .into_iter()
        .map(|(f, m, _)| {
            let pos: BTreeMap<usize, usize> = m.doc_ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
            let rows: Vec<usize> = doc_ids.iter().map(|id| pos[id]).collect();
            (f, m.values.select(Axis(0), &rows))
        })
        .collect();
    Ok(FeatureTable {
        doc_ids,
        labels,
        dropped: dropped.into_iter().collect(),
        matrices,
    })
}

/// Stable numeric code used in seed derivation.
pub fn featurizer_code(f: Featurizer) -> u64 {
    f as u64
}

/// Stable numeric code used in seed derivation.
pub fn reducer_code(r: Reducer) -> u64 {
    r as u64
}

struct Reduced {
    train: Array2<f64>,
    test: Array2<f64>,
    seconds: f64,
}

struct CellResult {
    accuracy: f64,
    predicted: Vec<usize>,
    fit_seconds: f64,
    predict_seconds: f64,
}

/// Run the plan: per fold, reducers and classifiers see training rows only.
pub fn run_experiment(
    corpus: &LabeledCorpus,
    store: Option<&EmbeddingStore>,
    plan: &ExperimentPlan,
) -> Result<EvalReport> {
    let started = Instant::now();
    plan.validate()?;
    for c in Category::ALL {
        if corpus.count(c) == 0 {
            return Err(Error::MissingCategory(c.to_string()));
        }
    }
    let featurizers = dedup(&plan.featurizers);
    let FeatureTable {
        doc_ids,
        labels,
        dropped,
        matrices,
    } = build_feature_table(corpus, store, &featurizers)?;
    let y: Vec<usize> = labels.iter().map(|c| c.index()).collect();

    let folds = stratified_folds(&labels, plan.folds, seed::derive(plan.seed, "folds", &[]))?;
    let mut fold_of = vec![0usize; doc_ids.len()];
    for (k, fold) in folds.iter().enumerate() {
        for &i in &fold.test {
            fold_of[i] = k;
        }
    }

    let pipelines = plan.pipelines();
    let stage1: Vec<(usize, usize)> = (0..pipelines.len())
        .flat_map(|p| (0..folds.len()).map(move |k| (p, k)))
        .collect();
    let reduced: Vec<Reduced> = stage1
        .par_iter()
        .map(|&(p, k)| {
            let (f, r) = pipelines[p];
            let x = &matrices[&f];
            let fold = &folds[k];
            let s = seed::derive(plan.seed, "reducer", &[featurizer_code(f), reducer_code(r), k as u64]);
            let t = Instant::now();
            let fitted = fit_fold_reducer(r, x.view(), &y, fold, plan.target_dim, &plan.rdc, s)?;
            let x_train = x.select(Axis(0), &fold.train);
            let x_test = x.select(Axis(0), &fold.test);
            let train = fitted.transform(x_train.view())?;
            let test = fitted.transform(x_test.view())?;
            Ok(Reduced {
                train,
                test,
                seconds: t.elapsed().as_secs_f64(),
            })
        })
        .collect::<Result<_>>()?;

    let classifiers = dedup(&plan.classifiers);
    let stage2: Vec<(usize, usize, usize)> = (0..pipelines.len())
        .flat_map(|p| (0..classifiers.len()).flat_map(move |c| (0..plan.folds).map(move |k| (p, c, k))))
        .collect();
    let cells: Vec<CellResult> = stage2
        .par_iter()
        .map(|&(p, c, k)| {
            let (f, r) = pipelines[p];
            let kind = classifiers[c];
            let data = &reduced[p * folds.len() + k];
            let fold = &folds[k];
            let y_train: Vec<usize> = fold.train.iter().map(|&i| y[i]).collect();
            let s = seed::derive(
                plan.seed,
                "classifier",
                &[featurizer_code(f), reducer_code(r), kind as u64, k as u64],
            );
            let t = Instant::now();
            let model = classify::fit(kind, data.train.view(), &y_train, &plan.hyper, s)?;
            let fit_seconds = t.elapsed().as_secs_f64();
            let t = Instant::now();
            let predicted = classify::predict(&model, data.test.view())?;
            let predict_seconds = t.elapsed().as_secs_f64();
            let correct = predicted.iter().zip(&fold.test).filter(|(p, &i)| **p == y[i]).count();
            Ok(CellResult {
                accuracy: 100.0 * correct as f64 / fold.test.len() as f64,
                predicted,
                fit_seconds,
                predict_seconds,
            })
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::with_capacity(pipelines.len() * classifiers.len());
    for (p, &(f, r)) in pipelines.iter().enumerate() {
        let reduce_seconds: f64 = (0..folds.len()).map(|k| reduced[p * folds.len() + k].seconds).sum();
        for (c, &kind) in classifiers.iter().enumerate() {
            let mut fold_accuracies = Vec::with_capacity(folds.len());
            let mut confusion = [[0usize; 3]; 3];
            let mut predictions = vec![Category::Neutral; doc_ids.len()];
            let (mut fit_seconds, mut predict_seconds) = (0.0, 0.0);
            for (k, fold) in folds.iter().enumerate() {
                let cell = &cells[(p * classifiers.len() + c) * folds.len() + k];
                fold_accuracies.push(cell.accuracy);
                fit_seconds += cell.fit_seconds;
                predict_seconds += cell.predict_seconds;
                for (&i, &pred) in fold.test.iter().zip(&cell.predicted) {
                    confusion[y[i]][pred] += 1;
                    predictions[i] = Category::from_index(pred).expect("class index below 3");
                }
            }
            let mean_accuracy = fold_accuracies.iter().sum::<f64>() / fold_accuracies.len() as f64;
            rows.push(EvalRow {
                featurizer: f,
                reducer: r,
                classifier: kind,
                fold_accuracies,
                mean_accuracy,
                confusion,
                predictions,
                reduce_seconds,
                fit_seconds,
                predict_seconds,
            });
        }
    }

    let focus_clf = if classifiers.contains(&ClassifierKind::Gsvm) {
        ClassifierKind::Gsvm
    } else {
        classifiers[0]
    };
    let focus_feat = if featurizers.contains(&Featurizer::W2v) {
        Featurizer::W2v
    } else {
        featurizers[0]
    };
    let focus: Vec<MethodPredictions> = rows
        .iter()
        .filter(|r| r.classifier == focus_clf && r.featurizer == focus_feat)
        .map(|r| MethodPredictions {
            method: r.method_label(),
            doc_ids: doc_ids.clone(),
            predicted: r.predictions.clone(),
        })
        .collect();
    let qualitative = qualitative_report(corpus, &focus)?;

    Ok(EvalReport {
        seed: plan.seed,
        folds: plan.folds,
        target_dim: plan.target_dim,
        doc_ids,
        labels,
        dropped,
        fold_of,
        rows,
        qualitative,
        elapsed_seconds: started.elapsed().as_secs_f64(),
    })
}
