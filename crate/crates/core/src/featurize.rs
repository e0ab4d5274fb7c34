//! Document feature matrices: bag-of-words counts, TF-IDF weights and
//! averaged, unit-normalized word vectors.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use ndarray::{Array2, Axis};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::LabeledCorpus;
use crate::embeddings::EmbeddingStore;
use crate::error::{Error, Result};

/// Where a feature column came from.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ColumnTag {
    Term(String),
    EmbeddingDim(usize),
    Component(usize),
}

impl fmt::Display for ColumnTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ColumnTag::Term(t) => write!(f, "term:{t}"),
            ColumnTag::EmbeddingDim(i) => write!(f, "dim:{i}"),
            ColumnTag::Component(i) => write!(f, "pc:{i}"),
        }
    }
}

impl FromStr for ColumnTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::invalid(format!("unrecognised column tag '{s}'"));
        let (kind, rest) = s.split_once(':').ok_or_else(bad)?;
        match kind {
            "term" => Ok(ColumnTag::Term(rest.to_string())),
            "dim" => rest.parse().map(ColumnTag::EmbeddingDim).map_err(|_| bad()),
            "pc" => rest.parse().map(ColumnTag::Component).map_err(|_| bad()),
            _ => Err(bad()),
        }
    }
}

/// Sorted term list with document frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    terms: Vec<String>,
    doc_freq: Vec<usize>,
    n_docs: usize,
    term_index: HashMap<String, usize>,
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.term_index.get(term).copied()
    }

    pub fn doc_freq(&self, term: &str) -> Option<usize> {
        self.index_of(term).map(|i| self.doc_freq[i])
    }

    fn idf(&self, col: usize) -> f64 {
        (self.n_docs as f64 / self.doc_freq[col] as f64).ln()
    }
}

pub fn build_vocabulary(corpus: &LabeledCorpus) -> Result<Vocabulary> {
    if corpus.is_empty() {
        return Err(Error::invalid("cannot build a vocabulary from an empty corpus"));
    }
    let mut df: BTreeMap<&str, usize> = BTreeMap::new();
    for doc in &corpus.documents {
        let distinct: BTreeSet<&str> = doc.tokens.iter().map(String::as_str).collect();
        for t in distinct {
            *df.entry(t).or_insert(0) += 1;
        }
    }
    let terms: Vec<String> = df.keys().map(|t| t.to_string()).collect();
    let doc_freq = df.values().copied().collect();
    let term_index = terms.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
    Ok(Vocabulary {
        terms,
        doc_freq,
        n_docs: corpus.len(),
        term_index,
    })
}

/// Dense `n × d` feature matrix with per-column provenance and per-row
/// document ids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    pub values: Array2<f64>,
    pub provenance: Vec<ColumnTag>,
    pub doc_ids: Vec<usize>,
}

impl FeatureMatrix {
    pub fn new(values: Array2<f64>, provenance: Vec<ColumnTag>, doc_ids: Vec<usize>) -> Result<Self> {
        if provenance.len() != values.ncols() {
            return Err(Error::shape(format!(
                "{} provenance tags for {} columns",
                provenance.len(),
                values.ncols()
            )));
        }
        if doc_ids.len() != values.nrows() {
            return Err(Error::shape(format!(
                "{} document ids for {} rows",
                doc_ids.len(),
                values.nrows()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("feature matrix contains non-finite entries"));
        }
        Ok(FeatureMatrix {
            values,
            provenance,
            doc_ids,
        })
    }

    pub fn nrows(&self) -> usize {
        self.values.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.values.ncols()
    }

    pub fn select_rows(&self, rows: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            values: self.values.select(Axis(0), rows),
            provenance: self.provenance.clone(),
            doc_ids: rows.iter().map(|&r| self.doc_ids[r]).collect(),
        }
    }

    pub fn select_columns(&self, cols: &[usize]) -> Result<FeatureMatrix> {
        if let Some(&c) = cols.iter().find(|&&c| c >= self.ncols()) {
            return Err(Error::shape(format!(
                "column {c} out of range for width {}",
                self.ncols()
            )));
        }
        Ok(FeatureMatrix {
            values: self.values.select(Axis(1), cols),
            provenance: cols.iter().map(|&c| self.provenance[c].clone()).collect(),
            doc_ids: self.doc_ids.clone(),
        })
    }

    /// Header `doc_id[,label_header],<tags...>`; one row per document.
    pub fn write_csv(&self, path: impl AsRef<Path>, labels: Option<(&str, &[String])>) -> Result<()> {
        let path = path.as_ref();
        let mut w = csv::Writer::from_path(path)?;
        let mut header = vec!["doc_id".to_string()];
        if let Some((name, values)) = labels {
            if values.len() != self.nrows() {
                return Err(Error::shape("label count differs from row count"));
            }
            header.push(name.to_string());
        }
        header.extend(self.provenance.iter().map(ToString::to_string));
        w.write_record(&header)?;
        for (r, row) in self.values.rows().into_iter().enumerate() {
            let mut rec = vec![self.doc_ids[r].to_string()];
            if let Some((_, values)) = labels {
                rec.push(values[r].clone());
            }
            rec.extend(row.iter().map(|v| format!("{v:e}")));
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }

    /// Reads the layout written by [`FeatureMatrix::write_csv`]. The optional
    /// label column is split off and returned as raw strings. Columns whose
    /// header is not a provenance tag are treated as terms.
    pub fn read_csv(
        path: impl AsRef<Path>,
        label_column: Option<&str>,
    ) -> Result<(FeatureMatrix, Option<Vec<String>>)> {
        let mut rdr = csv::Reader::from_path(path.as_ref())?;
        let headers = rdr.headers()?.clone();
        let id_idx = headers.iter().position(|h| h == "doc_id");
        let label_idx = match label_column {
            Some(name) => Some(
                headers
                    .iter()
                    .position(|h| h == name)
                    .ok_or_else(|| Error::MissingColumn(name.to_string()))?,
            ),
            None => None,
        };
        let feature_cols: Vec<usize> = (0..headers.len())
            .filter(|&i| Some(i) != id_idx && Some(i) != label_idx)
            .collect();
        let provenance = feature_cols
            .iter()
            .map(|&i| {
                let h = &headers[i];
                h.parse().unwrap_or_else(|_| ColumnTag::Term(h.to_string()))
            })
            .collect();

        let mut data = Vec::new();
        let mut ids = Vec::new();
        let mut labels = Vec::new();
        for (r, rec) in rdr.records().enumerate() {
            let row = r + 1;
            let rec = rec.map_err(|e| Error::Row {
                row,
                message: e.to_string(),
            })?;
            let id = match id_idx {
                Some(i) => rec[i].trim().parse().map_err(|_| Error::Row {
                    row,
                    message: format!("doc_id '{}' is not an integer", &rec[i]),
                })?,
                None => r,
            };
            ids.push(id);
            if let Some(i) = label_idx {
                labels.push(rec[i].to_string());
            }
            for &c in &feature_cols {
                let v: f64 = rec[c].trim().parse().map_err(|_| Error::Row {
                    row,
                    message: format!("'{}' is not a number", &rec[c]),
                })?;
                data.push(v);
            }
        }
        let values =
            Array2::from_shape_vec((ids.len(), feature_cols.len()), data).map_err(|e| Error::shape(e.to_string()))?;
        let fm = FeatureMatrix::new(values, provenance, ids)?;
        Ok((fm, label_idx.map(|_| labels)))
    }
}

fn count_matrix(corpus: &LabeledCorpus, vocab: &Vocabulary) -> Array2<f64> {
    let mut m = Array2::zeros((corpus.len(), vocab.len()));
    for (r, doc) in corpus.documents.iter().enumerate() {
        for t in &doc.tokens {
            if let Some(c) = vocab.index_of(t) {
                m[[r, c]] += 1.0;
            }
        }
    }
    m
}

fn term_tags(vocab: &Vocabulary) -> Vec<ColumnTag> {
    vocab.terms.iter().cloned().map(ColumnTag::Term).collect()
}

/// Raw term counts; tokens outside the vocabulary are ignored.
pub fn bow_matrix(corpus: &LabeledCorpus, vocab: &Vocabulary) -> FeatureMatrix {
    FeatureMatrix {
        values: count_matrix(corpus, vocab),
        provenance: term_tags(vocab),
        doc_ids: corpus.ids(),
    }
}

/// `tf × ln(N / df)` with raw in-document counts.
pub fn tfidf_matrix(corpus: &LabeledCorpus, vocab: &Vocabulary) -> FeatureMatrix {
    let mut values = count_matrix(corpus, vocab);
    for (c, mut col) in values.columns_mut().into_iter().enumerate() {
        let idf = vocab.idf(c);
        col.mapv_inplace(|tf| tf * idf);
    }
    FeatureMatrix {
        values,
        provenance: term_tags(vocab),
        doc_ids: corpus.ids(),
    }
}

#[derive(Debug, Clone)]
pub struct EmbeddedCorpus {
    pub matrix: FeatureMatrix,
    /// Ids of documents with no in-vocabulary token.
    pub dropped: Vec<usize>,
}

fn mean_unit_vector(tokens: &[String], store: &EmbeddingStore) -> Option<Vec<f64>> {
    let mut acc = vec![0.0; store.dim()];
    let mut found = 0usize;
    for t in tokens {
        if let Some(v) = store.lookup_folded(t) {
            acc.iter_mut().zip(v).for_each(|(a, x)| *a += x);
            found += 1;
        }
    }
    if found == 0 {
        return None;
    }
    acc.iter_mut().for_each(|a| *a /= found as f64);
    let norm = acc.iter().map(|a| a * a).sum::<f64>().sqrt();
    if norm == 0.0 {
        return None;
    }
    acc.iter_mut().for_each(|a| *a /= norm);
    Some(acc)
}

/// Per document: mean of the in-vocabulary token vectors, scaled to unit
/// norm. Documents without any in-vocabulary token (or whose mean vanishes)
/// are dropped.
pub fn embedding_matrix(corpus: &LabeledCorpus, store: &EmbeddingStore) -> EmbeddedCorpus {
    let rows: Vec<Option<Vec<f64>>> = corpus
        .documents
        .par_iter()
        .map(|d| mean_unit_vector(&d.tokens, store))
        .collect();
    let dim = store.dim();
    let mut data = Vec::new();
    let mut ids = Vec::new();
    let mut dropped = Vec::new();
    for (doc, row) in corpus.documents.iter().zip(rows) {
        match row {
            Some(v) => {
                data.extend(v);
                ids.push(doc.id);
            }
            None => dropped.push(doc.id),
        }
    }
    let values = Array2::from_shape_vec((ids.len(), dim), data).expect("rows have store dimension");
    EmbeddedCorpus {
        matrix: FeatureMatrix {
            values,
            provenance: (0..dim).map(ColumnTag::EmbeddingDim).collect(),
            doc_ids: ids,
        },
        dropped,
    }
}
