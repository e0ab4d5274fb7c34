use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{EvalReport, EvalRow};
use crate::corpus::{Category, LabeledCorpus};
use crate::error::{Error, Result};

/// One method's predictions for a set of documents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodPredictions {
    pub method: String,
    pub doc_ids: Vec<usize>,
    pub predicted: Vec<Category>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualitativeRow {
    pub doc_id: usize,
    pub text: String,
    pub truth: Category,
    /// One entry per method, in [`QualitativeReport::methods`] order.
    pub predicted: Vec<Category>,
    pub correct: Vec<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct QualitativeReport {
    pub methods: Vec<String>,
    pub rows: Vec<QualitativeRow>,
}

/// Per-document agreement table. Every method must cover the same documents;
/// rows follow the first method's order.
pub fn qualitative_report(corpus: &LabeledCorpus, predictions: &[MethodPredictions]) -> Result<QualitativeReport> {
    let Some(first) = predictions.first() else {
        return Ok(QualitativeReport::default());
    };
    let reference: BTreeSet<usize> = first.doc_ids.iter().copied().collect();
    let mut lookup: Vec<BTreeMap<usize, Category>> = Vec::with_capacity(predictions.len());
    for m in predictions {
        if m.doc_ids.len() != m.predicted.len() {
            return Err(Error::shape(format!(
                "method {}: {} ids but {} predictions",
                m.method,
                m.doc_ids.len(),
                m.predicted.len()
            )));
        }
        let ids: BTreeSet<usize> = m.doc_ids.iter().copied().collect();
        if ids != reference || ids.len() != m.doc_ids.len() {
            return Err(Error::invalid(format!(
                "method {} predicted a different document set than {}",
                m.method, first.method
            )));
        }
        lookup.push(m.doc_ids.iter().copied().zip(m.predicted.iter().copied()).collect());
    }
    let mut rows = Vec::with_capacity(first.doc_ids.len());
    for &id in &first.doc_ids {
        let doc = corpus
            .document(id)
            .ok_or_else(|| Error::invalid(format!("document {id} is not in the corpus")))?;
        let predicted: Vec<Category> = lookup.iter().map(|m| m[&id]).collect();
        rows.push(QualitativeRow {
            doc_id: id,
            text: doc.raw_text.clone(),
            truth: doc.category,
            correct: predicted.iter().map(|p| *p == doc.category).collect(),
            predicted,
        });
    }
    Ok(QualitativeReport {
        methods: predictions.iter().map(|m| m.method.clone()).collect(),
        rows,
    })
}

fn cell(text: &str) -> String {
    text.replace('|', "\\|").replace(['\n', '\r'], " ")
}

/// Mean accuracy (%) with one row per classifier and one column per
/// featurization pipeline, in report order.
pub fn markdown_table(report: &EvalReport) -> String {
    let mut columns: Vec<String> = Vec::new();
    let mut classifiers = Vec::new();
    let mut cells: BTreeMap<(String, String), f64> = BTreeMap::new();
    for row in &report.rows {
        let col = row.pipeline_label();
        if !columns.contains(&col) {
            columns.push(col.clone());
        }
        if !classifiers.contains(&row.classifier) {
            classifiers.push(row.classifier);
        }
        cells.insert((row.classifier.to_string(), col), row.mean_accuracy);
    }
    let mut out = String::from("| Classifier |");
    for c in &columns {
        let _ = write!(out, " {c} |");
    }
    out.push_str("\n|---|");
    out.push_str(&"---:|".repeat(columns.len()));
    out.push('\n');
    for k in classifiers {
        let name = k.to_string();
        let _ = write!(out, "| {name} |");
        for c in &columns {
            match cells.get(&(name.clone(), c.clone())) {
                Some(v) => {
                    let _ = write!(out, " {v:.2} |");
                }
                None => out.push_str(" - |"),
            }
        }
        out.push('\n');
    }
    out
}

/// Per-comment table: text, true category and one cell per method.
pub fn qualitative_markdown(report: &QualitativeReport) -> String {
    let mut out = String::from("| Doc | Comment | True |");
    for m in &report.methods {
        let _ = write!(out, " {} |", cell(m));
    }
    out.push_str("\n|---:|---|---|");
    out.push_str(&"---|".repeat(report.methods.len()));
    out.push('\n');
    for r in &report.rows {
        let _ = write!(out, "| {} | {} | {} |", r.doc_id, cell(&r.text), r.truth);
        for (p, ok) in r.predicted.iter().zip(&r.correct) {
            let mark = if *ok { "correct" } else { "wrong" };
            let _ = write!(out, " {p} ({mark}) |");
        }
        out.push('\n');
    }
    out
}

/// Keys holding wall-clock measurements in serialized reports.
pub const TIMING_FIELDS: [&str; 4] = ["reduce_seconds", "fit_seconds", "predict_seconds", "elapsed_seconds"];

/// Remove timing keys at any depth, leaving only reproducible content.
pub fn strip_timing_fields(value: &mut serde_json::Value) {
    match value {
        serde_json::Value::Object(map) => {
            for key in TIMING_FIELDS {
                map.remove(key);
            }
            map.values_mut().for_each(strip_timing_fields);
        }
        serde_json::Value::Array(items) => items.iter_mut().for_each(strip_timing_fields),
        _ => {}
    }
}

impl EvalRow {
    pub fn test_counts(&self) -> [usize; 3] {
        [0, 1, 2].map(|k| self.confusion[k].iter().sum())
    }
}
