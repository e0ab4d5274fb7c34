//! Review ingestion: CSV loading, text preprocessing, score collapsing and
//! class rebalancing.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::Read;
use std::path::Path;

use rand::seq::{index, SliceRandom};
use serde::{Deserialize, Serialize};
use unicode_general_category::{get_general_category, GeneralCategory};

use crate::error::{Error, Result};
use crate::seed;

/// Collapsed satisfaction category. Ordered `Disagree < Neutral < Agree`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Category {
    Disagree,
    Neutral,
    Agree,
}

impl Category {
    pub const ALL: [Category; 3] = [Category::Disagree, Category::Neutral, Category::Agree];

    /// Maps a 1–5 rating onto three categories: {1,2}, {3}, {4,5}.
    pub fn from_score(score: u8) -> Option<Category> {
        match score {
            1 | 2 => Some(Category::Disagree),
            3 => Some(Category::Neutral),
            4 | 5 => Some(Category::Agree),
            _ => None,
        }
    }

    /// Zero-based position in [`Category::ALL`].
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Category> {
        Category::ALL.get(i).copied()
    }

    /// Numeric class code 1, 2, 3.
    pub fn code(self) -> usize {
        self.index() + 1
    }

    /// Short form used in agreement tables.
    pub fn short(self) -> &'static str {
        match self {
            Category::Disagree => "Neg",
            Category::Neutral => "Neu",
            Category::Agree => "Pos",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Category::Disagree => "Disagree",
            Category::Neutral => "Neutral",
            Category::Agree => "Agree",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for Category {
    type Err = Error;

    /// Accepts the full name, the short form or the class code.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        Category::ALL
            .into_iter()
            .find(|c| {
                t.eq_ignore_ascii_case(&c.to_string()) || t.eq_ignore_ascii_case(c.short()) || t == c.code().to_string()
            })
            .ok_or_else(|| Error::invalid(format!("unknown category '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub id: usize,
    pub raw_text: String,
    pub tokens: Vec<String>,
    pub raw_score: u8,
    pub category: Category,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Stopwords(BTreeSet<String>);

impl Stopwords {
    pub fn empty() -> Self {
        Self::default()
    }

    /// The shipped English list.
    pub fn english() -> Self {
        Self::parse(include_str!("stopwords_en.txt"))
    }

    /// One word per line; blank lines and lines starting with `#` are skipped.
    pub fn parse(text: &str) -> Self {
        Stopwords(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(str::to_lowercase)
                .collect(),
        )
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::parse(&text))
    }

    pub fn contains(&self, word: &str) -> bool {
        self.0.contains(word)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl<S: Into<String>> FromIterator<S> for Stopwords {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        Stopwords(iter.into_iter().map(Into::into).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledCorpus {
    pub documents: Vec<Document>,
    pub class_counts: BTreeMap<Category, usize>,
    pub stopword_set: Stopwords,
    pub balanced: bool,
}

impl LabeledCorpus {
    pub fn new(documents: Vec<Document>) -> Self {
        let mut corpus = LabeledCorpus {
            documents,
            class_counts: BTreeMap::new(),
            stopword_set: Stopwords::empty(),
            balanced: false,
        };
        corpus.recount();
        corpus
    }

    fn recount(&mut self) {
        self.class_counts.clear();
        for d in &self.documents {
            *self.class_counts.entry(d.category).or_insert(0) += 1;
        }
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn count(&self, category: Category) -> usize {
        self.class_counts.get(&category).copied().unwrap_or(0)
    }

    pub fn labels(&self) -> Vec<Category> {
        self.documents.iter().map(|d| d.category).collect()
    }

    pub fn document(&self, id: usize) -> Option<&Document> {
        self.documents.iter().find(|d| d.id == id)
    }

    pub fn ids(&self) -> Vec<usize> {
        self.documents.iter().map(|d| d.id).collect()
    }

    /// Keep only documents whose id satisfies `keep`, preserving order.
    pub fn retain_ids(&self, keep: impl Fn(usize) -> bool) -> LabeledCorpus {
        let mut out = self.clone();
        out.documents.retain(|d| keep(d.id));
        out.recount();
        out
    }
}

/// Load a corpus from a CSV file with a header row. Columns are selected by name.
pub fn load_csv(path: impl AsRef<Path>, text_column: &str, score_column: &str) -> Result<LabeledCorpus> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, text_column, score_column)
}

/// Row numbers in errors count data rows from 1, excluding the header.
pub fn read_csv<R: Read>(reader: R, text_column: &str, score_column: &str) -> Result<LabeledCorpus> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    };
    let text_idx = find(text_column)?;
    let score_idx = find(score_column)?;

    let mut documents = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| Error::Row {
            row,
            message: e.to_string(),
        })?;
        let raw_text = record.get(text_idx).unwrap_or("").to_string();
        let score_str = record.get(score_idx).unwrap_or("").trim();
        let score: i64 = score_str.parse().map_err(|_| Error::Row {
            row,
            message: format!("score '{score_str}' is not an integer"),
        })?;
        let category = u8::try_from(score)
            .ok()
            .and_then(Category::from_score)
            .ok_or_else(|| Error::Row {
                row,
                message: format!("score {score} outside [1,5]"),
            })?;
        documents.push(Document {
            id: i,
            raw_text,
            tokens: Vec::new(),
            raw_score: score as u8,
            category,
        });
    }
    Ok(LabeledCorpus::new(documents))
}

/// Knobs left open by the preprocessing rules.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreprocessOptions {
    /// Drop tokens made only of numeric characters.
    pub strip_numerals: bool,
}

fn is_punct_or_symbol(c: char) -> bool {
    use GeneralCategory::*;
    matches!(
        get_general_category(c),
        ConnectorPunctuation
            | DashPunctuation
            | OpenPunctuation
            | ClosePunctuation
            | InitialPunctuation
            | FinalPunctuation
            | OtherPunctuation
            | MathSymbol
            | CurrencySymbol
            | ModifierSymbol
            | OtherSymbol
    )
}

/// Lowercase, replace punctuation and symbols by spaces, split on whitespace,
/// drop stopwords.
pub fn tokenize(text: &str, stopwords: &Stopwords, options: PreprocessOptions) -> Vec<String> {
    let cleaned: String = text
        .to_lowercase()
        .chars()
        .map(|c| if is_punct_or_symbol(c) { ' ' } else { c })
        .collect();
    cleaned
        .split_whitespace()
        .filter(|t| !stopwords.contains(t))
        .filter(|t| !(options.strip_numerals && t.chars().all(char::is_numeric)))
        .map(str::to_string)
        .collect()
}

#[derive(Debug, Clone)]
pub struct Preprocessed {
    pub corpus: LabeledCorpus,
    /// Ids of documents whose token list came out empty.
    pub dropped: Vec<usize>,
}

pub fn preprocess(corpus: &LabeledCorpus, stopwords: &Stopwords) -> Preprocessed {
    preprocess_with(corpus, stopwords, PreprocessOptions::default())
}

pub fn preprocess_with(corpus: &LabeledCorpus, stopwords: &Stopwords, options: PreprocessOptions) -> Preprocessed {
    let mut dropped = Vec::new();
    let mut documents = Vec::with_capacity(corpus.len());
    for doc in &corpus.documents {
        let tokens = tokenize(&doc.raw_text, stopwords, options);
        if tokens.is_empty() {
            dropped.push(doc.id);
        } else {
            documents.push(Document { tokens, ..doc.clone() });
        }
    }
    let mut out = LabeledCorpus::new(documents);
    out.stopword_set = stopwords.clone();
    out.balanced = corpus.balanced && dropped.is_empty();
    Preprocessed { corpus: out, dropped }
}

pub fn collapse_scores(corpus: &LabeledCorpus) -> LabeledCorpus {
    let mut out = corpus.clone();
    for d in &mut out.documents {
        // load_csv already rejected out-of-range scores
        d.category = Category::from_score(d.raw_score).expect("raw score validated at load");
    }
    out.recount();
    out
}

/// Downsample every category to the size of the smallest one, then shuffle.
pub fn rebalance(corpus: &LabeledCorpus, seed: u64) -> Result<LabeledCorpus> {
    let mut by_class: BTreeMap<Category, Vec<&Document>> = BTreeMap::new();
    for d in &corpus.documents {
        by_class.entry(d.category).or_default().push(d);
    }
    for c in Category::ALL {
        if !by_class.contains_key(&c) {
            return Err(Error::MissingCategory(c.to_string()));
        }
    }
    let min = by_class.values().map(Vec::len).min().unwrap_or(0);

    let mut survivors = Vec::with_capacity(min * 3);
    for (c, docs) in &by_class {
        let mut rng = seed::rng(seed::derive(seed, "rebalance", &[c.index() as u64]));
        let mut picked = index::sample(&mut rng, docs.len(), min).into_vec();
        picked.sort_unstable();
        survivors.extend(picked.into_iter().map(|i| docs[i].clone()));
    }
    let mut rng = seed::rng(seed::derive(seed, "rebalance-order", &[]));
    survivors.shuffle(&mut rng);

    let mut out = LabeledCorpus::new(survivors);
    out.stopword_set = corpus.stopword_set.clone();
    out.balanced = true;
    Ok(out)
}
