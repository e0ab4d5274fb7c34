//! Subcommand implementations. Each writes its artifacts under the output
//! directory and returns a value the caller prints.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use depsel::classify::{self, ClassifierKind};
use depsel::corpus::{self, Category, LabeledCorpus, PreprocessOptions, Stopwords};
use depsel::embeddings::EmbeddingStore;
use depsel::evaluate::{
    self, build_feature_table, featurizer_code, fit_reducer, markdown_table, qualitative_markdown, reducer_code,
    EvalReport, Featurizer, FittedReducer, QualitativeReport, Reducer,
};
use depsel::featurize::{bow_matrix, build_vocabulary, embedding_matrix, tfidf_matrix, FeatureMatrix};
use depsel::seed;

use crate::config::RunConfig;
use crate::output::{atomic_with, write_bytes, write_json};
use crate::CliError;

/// Document counts before and after each ingestion step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestSummary {
    pub rows_read: usize,
    pub raw_score_counts: BTreeMap<u8, usize>,
    pub emptied_by_preprocessing: Vec<usize>,
    pub after_preprocessing: usize,
    pub categories_before_rebalance: BTreeMap<Category, usize>,
    pub categories_after_rebalance: BTreeMap<Category, usize>,
    pub seed: u64,
}

fn stopwords(cfg: &RunConfig) -> Result<Stopwords, CliError> {
    Ok(match &cfg.stopwords {
        Some(p) => Stopwords::from_file(p)?,
        None => Stopwords::english(),
    })
}

fn is_json(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

/// Preprocess, collapse and rebalance a review CSV.
pub fn ingest_corpus(cfg: &RunConfig) -> Result<(LabeledCorpus, IngestSummary), CliError> {
    let input = cfg.require_input()?;
    let raw = corpus::load_csv(input, &cfg.text_col, &cfg.score_col)?;
    let mut raw_score_counts = BTreeMap::new();
    for d in &raw.documents {
        *raw_score_counts.entry(d.raw_score).or_insert(0) += 1;
    }
    let pre = corpus::preprocess_with(
        &raw,
        &stopwords(cfg)?,
        PreprocessOptions {
            strip_numerals: cfg.strip_numerals,
        },
    );
    let collapsed = corpus::collapse_scores(&pre.corpus);
    let balanced = corpus::rebalance(&collapsed, seed::derive(cfg.seed, "ingest", &[]))?;
    let summary = IngestSummary {
        rows_read: raw.len(),
        raw_score_counts,
        emptied_by_preprocessing: pre.dropped,
        after_preprocessing: pre.corpus.len(),
        categories_before_rebalance: collapsed.class_counts.clone(),
        categories_after_rebalance: balanced.class_counts.clone(),
        seed: cfg.seed,
    };
    Ok((balanced, summary))
}

/// The corpus named by `--input`: an ingested JSON artifact, or a CSV that is
/// ingested on the fly.
pub fn load_corpus(cfg: &RunConfig) -> Result<(LabeledCorpus, Option<IngestSummary>), CliError> {
    let input = cfg.require_input()?;
    if is_json(input) {
        let text = std::fs::read_to_string(input)
            .map_err(|e| CliError::Input(format!("cannot read {}: {e}", input.display())))?;
        let c: LabeledCorpus = serde_json::from_str(&text)
            .map_err(|e| CliError::Input(format!("{} is not a corpus artifact: {e}", input.display())))?;
        Ok((c, None))
    } else {
        let (c, s) = ingest_corpus(cfg)?;
        Ok((c, Some(s)))
    }
}

fn load_store(cfg: &RunConfig) -> Result<Option<EmbeddingStore>, CliError> {
    cfg.embeddings
        .as_ref()
        .map(|p| EmbeddingStore::load(p, cfg.format).map_err(CliError::from))
        .transpose()
}

fn require_store(cfg: &RunConfig) -> Result<Option<EmbeddingStore>, CliError> {
    if cfg.featurizers.contains(&Featurizer::W2v) && cfg.embeddings.is_none() {
        return Err(CliError::Input(
            "W2V featurizer requested but --embeddings was not given".into(),
        ));
    }
    load_store(cfg)
}

pub fn cmd_ingest(cfg: &RunConfig) -> Result<IngestSummary, CliError> {
    let (corpus, summary) = ingest_corpus(cfg)?;
    write_json(&cfg.out.join("corpus.json"), &corpus)?;
    write_json(&cfg.out.join("ingest_summary.json"), &summary)?;
    Ok(summary)
}

pub fn featurizer_key(f: Featurizer) -> &'static str {
    match f {
        Featurizer::Bow => "bow",
        Featurizer::Tfidf => "tfidf",
        Featurizer::W2v => "w2v",
    }
}

pub fn reducer_key(r: Reducer) -> &'static str {
    match r {
        Reducer::None => "none",
        Reducer::Pca => "pca",
        Reducer::GreedyRdc => "rdc",
        Reducer::GreedyMmd => "mmd",
    }
}

pub fn pipeline_key(f: Featurizer, r: Reducer) -> String {
    match r {
        Reducer::None => featurizer_key(f).to_string(),
        r => format!("{}_{}", featurizer_key(f), reducer_key(r)),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeaturizeEntry {
    pub featurizer: Featurizer,
    pub file: PathBuf,
    pub rows: usize,
    pub columns: usize,
    pub dropped: Vec<usize>,
}

fn write_features(path: &Path, m: &FeatureMatrix, corpus: &LabeledCorpus) -> Result<(), CliError> {
    let labels: Vec<String> = m
        .doc_ids
        .iter()
        .map(|&id| {
            corpus
                .document(id)
                .expect("feature rows come from the corpus")
                .category
                .to_string()
        })
        .collect();
    atomic_with(path, |tmp| Ok(m.write_csv(tmp, Some(("label", &labels)))?))
}

pub fn cmd_featurize(cfg: &RunConfig) -> Result<Vec<FeaturizeEntry>, CliError> {
    let (corpus, _) = load_corpus(cfg)?;
    let store = require_store(cfg)?;
    let mut out = Vec::new();
    for &f in &cfg.featurizers {
        let (m, dropped) = match f {
            Featurizer::Bow => (bow_matrix(&corpus, &build_vocabulary(&corpus)?), Vec::new()),
            Featurizer::Tfidf => (tfidf_matrix(&corpus, &build_vocabulary(&corpus)?), Vec::new()),
            Featurizer::W2v => {
                let e = embedding_matrix(&corpus, store.as_ref().expect("checked above"));
                (e.matrix, e.dropped)
            }
        };
        let file = cfg.out.join(format!("features_{}.csv", featurizer_key(f)));
        write_features(&file, &m, &corpus)?;
        out.push(FeaturizeEntry {
            featurizer: f,
            file,
            rows: m.nrows(),
            columns: m.ncols(),
            dropped,
        });
    }
    write_json(&cfg.out.join("featurize_summary.json"), &out)?;
    Ok(out)
}

/// Class indices for label strings: category names when they all parse,
/// otherwise the rank of each distinct string.
fn encode_labels(labels: &[String]) -> Vec<usize> {
    let parsed: Option<Vec<usize>> = labels
        .iter()
        .map(|l| l.parse::<Category>().ok().map(Category::index))
        .collect();
    parsed.unwrap_or_else(|| {
        let mut distinct: Vec<&String> = labels.iter().collect();
        distinct.sort();
        distinct.dedup();
        labels
            .iter()
            .map(|l| distinct.binary_search(&l).expect("present"))
            .collect()
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SelectEntry {
    pub reducer: Reducer,
    pub state_file: PathBuf,
    pub features_file: PathBuf,
    pub columns: Vec<String>,
}

pub fn cmd_select(cfg: &RunConfig) -> Result<Vec<SelectEntry>, CliError> {
    let input = cfg.require_input()?;
    let (m, labels) = FeatureMatrix::read_csv(input, Some("label"))?;
    let labels = labels.ok_or_else(|| CliError::Input(format!("{} has no label column", input.display())))?;
    let y = encode_labels(&labels);
    let reducers: Vec<Reducer> = cfg.reducers.iter().copied().filter(|r| *r != Reducer::None).collect();
    let fitted: Vec<(Reducer, FittedReducer)> = reducers
        .par_iter()
        .map(|&r| {
            let s = seed::derive(cfg.seed, "select", &[reducer_code(r)]);
            fit_reducer(r, m.values.view(), &y, cfg.target_dim, &cfg.rdc, s).map(|f| (r, f))
        })
        .collect::<Result<_, _>>()?;
    let mut out = Vec::new();
    for (r, f) in fitted {
        let key = reducer_key(r);
        let state_file = cfg.out.join(format!("selection_{key}.json"));
        write_json(&state_file, &f)?;
        let reduced = match &f {
            FittedReducer::Pca(p) => p.transform_features(&m)?,
            FittedReducer::Selection(s) => m.select_columns(&s.selected)?,
            FittedReducer::Identity { .. } => m.clone(),
        };
        let features_file = cfg.out.join(format!("reduced_{key}.csv"));
        atomic_with(&features_file, |tmp| {
            Ok(reduced.write_csv(tmp, Some(("label", &labels)))?)
        })?;
        out.push(SelectEntry {
            reducer: r,
            state_file,
            features_file,
            columns: reduced.provenance.iter().map(ToString::to_string).collect(),
        });
    }
    Ok(out)
}

/// Cross-validate the plan, then refit every pipeline on all evaluated rows
/// and store the fitted reducers and models.
pub fn cmd_run(cfg: &RunConfig) -> Result<EvalReport, CliError> {
    let (corpus, summary) = load_corpus(cfg)?;
    if let Some(s) = &summary {
        write_json(&cfg.out.join("corpus.json"), &corpus)?;
        write_json(&cfg.out.join("ingest_summary.json"), s)?;
    }
    let store = require_store(cfg)?;
    let plan = cfg.plan();
    log::info!(
        "running {} pipelines x {} classifiers",
        plan.pipelines().len(),
        plan.classifiers.len()
    );
    let report = evaluate::run_experiment(&corpus, store.as_ref(), &plan)?;

    write_json(&cfg.out.join("report.json"), &report)?;
    let md = format!(
        "# Mean accuracy (%)\n\n{}\n# Per-comment agreement\n\n{}",
        markdown_table(&report),
        qualitative_markdown(&report.qualitative)
    );
    write_bytes(&cfg.out.join("report.md"), md.as_bytes())?;

    let table = build_feature_table(&corpus, store.as_ref(), &plan.featurizers)?;
    let y: Vec<usize> = table.labels.iter().map(|c| c.index()).collect();
    let pipelines = plan.pipelines();
    let fitted: Vec<(Featurizer, Reducer, FittedReducer, ndarray::Array2<f64>)> = pipelines
        .par_iter()
        .map(|&(f, r)| {
            let x = &table.matrices[&f];
            let s = seed::derive(cfg.seed, "final-reducer", &[featurizer_code(f), reducer_code(r)]);
            let red = fit_reducer(r, x.view(), &y, plan.target_dim, &plan.rdc, s)?;
            let z = red.transform(x.view())?;
            Ok((f, r, red, z))
        })
        .collect::<Result<_, depsel::Error>>()?;
    for (f, r, red, _) in &fitted {
        if *r != Reducer::None {
            write_json(
                &cfg.out
                    .join("selections")
                    .join(format!("{}.json", pipeline_key(*f, *r))),
                red,
            )?;
        }
    }
    let jobs: Vec<(usize, ClassifierKind)> = (0..fitted.len())
        .flat_map(|p| plan.classifiers.iter().map(move |&k| (p, k)))
        .collect();
    let models: Vec<(String, classify::TrainedModel)> = jobs
        .par_iter()
        .map(|&(p, kind)| {
            let (f, r, _, z) = &fitted[p];
            let s = seed::derive(
                cfg.seed,
                "final-classifier",
                &[featurizer_code(*f), reducer_code(*r), kind as u64],
            );
            let model = classify::fit(kind, z.view(), &y, &plan.hyper, s)?;
            Ok((format!("{}_{}", pipeline_key(*f, *r), kind.key()), model))
        })
        .collect::<Result<_, depsel::Error>>()?;
    for (name, model) in &models {
        write_json(&cfg.out.join("models").join(format!("{name}.json")), model)?;
    }
    Ok(report)
}

/// Report file used by `inspect`: `--input` when it is a JSON report,
/// otherwise `report.json` in the output directory.
fn report_path(cfg: &RunConfig) -> PathBuf {
    match &cfg.input {
        Some(p) if is_json(p) => p.clone(),
        _ => cfg.out.join("report.json"),
    }
}

pub fn load_report(path: &Path) -> Result<EvalReport, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        CliError::Input(format!(
            "cannot read report {} (run `depsel run` first): {e}",
            path.display()
        ))
    })?;
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{} is not a run report: {e}", path.display())))
}

/// Agreement table for the requested documents, using the out-of-fold
/// predictions stored in the run report.
pub fn cmd_inspect(cfg: &RunConfig, ids: &[usize]) -> Result<String, CliError> {
    let report = load_report(&report_path(cfg))?;
    let by_id: BTreeMap<usize, usize> = report
        .qualitative
        .rows
        .iter()
        .enumerate()
        .map(|(i, r)| (r.doc_id, i))
        .collect();
    let mut rows = Vec::with_capacity(ids.len());
    for &id in ids {
        if report.dropped.contains(&id) {
            return Err(CliError::Input(format!(
                "document {id} was dropped before evaluation: none of its tokens has a word vector"
            )));
        }
        let Some(&i) = by_id.get(&id) else {
            let lo = report.doc_ids.iter().min().copied().unwrap_or(0);
            let hi = report.doc_ids.iter().max().copied().unwrap_or(0);
            return Err(CliError::Input(format!(
                "unknown document id {id}; the report covers {} documents with ids in {lo}..={hi}",
                report.doc_ids.len()
            )));
        };
        rows.push(report.qualitative.rows[i].clone());
    }
    let table = qualitative_markdown(&QualitativeReport {
        methods: report.qualitative.methods.clone(),
        rows,
    });
    write_bytes(&cfg.out.join("inspect.md"), table.as_bytes())?;
    Ok(table)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TokenStats {
    pub min: usize,
    pub mean: f64,
    pub max: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EmbeddingCoverage {
    pub dim: usize,
    pub vocab_size: usize,
    pub tokens_found: usize,
    pub tokens_total: usize,
    pub documents_without_vectors: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorpusStats {
    pub documents: usize,
    pub categories: BTreeMap<Category, usize>,
    pub raw_score_counts: BTreeMap<u8, usize>,
    pub tokens_per_document: Option<TokenStats>,
    pub vocabulary_size: usize,
    pub embeddings: Option<EmbeddingCoverage>,
}

/// Descriptive statistics of a corpus after preprocessing (CSV input) or of
/// an ingested corpus artifact.
pub fn cmd_stat(cfg: &RunConfig) -> Result<CorpusStats, CliError> {
    let input = cfg.require_input()?;
    let corpus = if is_json(input) {
        load_corpus(cfg)?.0
    } else {
        let raw = corpus::load_csv(input, &cfg.text_col, &cfg.score_col)?;
        let pre = corpus::preprocess_with(
            &raw,
            &stopwords(cfg)?,
            PreprocessOptions {
                strip_numerals: cfg.strip_numerals,
            },
        );
        corpus::collapse_scores(&pre.corpus)
    };
    let mut raw_score_counts = BTreeMap::new();
    for d in &corpus.documents {
        *raw_score_counts.entry(d.raw_score).or_insert(0) += 1;
    }
    let lens: Vec<usize> = corpus.documents.iter().map(|d| d.tokens.len()).collect();
    let tokens_per_document = (!lens.is_empty()).then(|| TokenStats {
        min: *lens.iter().min().expect("non-empty"),
        mean: lens.iter().sum::<usize>() as f64 / lens.len() as f64,
        max: *lens.iter().max().expect("non-empty"),
    });
    let vocabulary_size = if corpus.is_empty() {
        0
    } else {
        build_vocabulary(&corpus)?.len()
    };
    let embeddings = load_store(cfg)?.map(|store| {
        let mut found = 0;
        let mut total = 0;
        let mut without = 0;
        for d in &corpus.documents {
            let hits = d.tokens.iter().filter(|t| store.lookup_folded(t).is_some()).count();
            found += hits;
            total += d.tokens.len();
            without += usize::from(hits == 0);
        }
        EmbeddingCoverage {
            dim: store.dim(),
            vocab_size: store.vocab_size(),
            tokens_found: found,
            tokens_total: total,
            documents_without_vectors: without,
        }
    });
    let stats = CorpusStats {
        documents: corpus.len(),
        categories: corpus.class_counts.clone(),
        raw_score_counts,
        tokens_per_document,
        vocabulary_size,
        embeddings,
    };
    if cfg.input.is_some() {
        write_json(&cfg.out.join("stat.json"), &stats)?;
    }
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_encode_by_category_or_rank() {
        let named: Vec<String> = ["Agree", "Disagree", "Neutral"].iter().map(|s| s.to_string()).collect();
        assert_eq!(encode_labels(&named), vec![2, 0, 1]);
        let other: Vec<String> = ["b", "a", "b"].iter().map(|s| s.to_string()).collect();
        assert_eq!(encode_labels(&other), vec![1, 0, 1]);
    }

    #[test]
    fn pipeline_keys() {
        assert_eq!(pipeline_key(Featurizer::W2v, Reducer::GreedyRdc), "w2v_rdc");
        assert_eq!(pipeline_key(Featurizer::Tfidf, Reducer::None), "tfidf");
    }
}
