//! Seeded synthetic data: Gaussian blobs, XOR, planted-feature matrices and
//! a toy review corpus with matching word vectors.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::embeddings::EmbeddingStore;
use crate::error::{Error, Result};
use crate::seed;

fn normal(rng: &mut impl Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// `n × d` matrix of independent standard normal entries.
pub fn normal_matrix(n: usize, d: usize, seed: u64) -> Array2<f64> {
    let mut rng = seed::rng(seed::derive(seed, "normal-matrix", &[]));
    Array2::from_shape_simple_fn((n, d), || normal(&mut rng))
}

/// `n` rows with labels assigned round-robin over `n_classes`. Class means sit
/// on a circle in the first two coordinates so that neighbouring means are
/// `separation` apart; the noise is isotropic with unit variance.
pub fn gaussian_blobs(n: usize, d: usize, n_classes: usize, separation: f64, seed: u64) -> (Array2<f64>, Vec<usize>) {
    assert!(d >= 2 && n_classes >= 2);
    let radius = separation / (2.0 * (std::f64::consts::PI / n_classes as f64).sin());
    let mut rng = seed::rng(seed::derive(seed, "blobs", &[]));
    let mut x = Array2::zeros((n, d));
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let c = i % n_classes;
        let angle = 2.0 * std::f64::consts::PI * c as f64 / n_classes as f64;
        for j in 0..d {
            x[[i, j]] = normal(&mut rng);
        }
        x[[i, 0]] += radius * angle.cos();
        x[[i, 1]] += radius * angle.sin();
        y.push(c);
    }
    (x, y)
}

/// Uniform points in `[-1, 1]²`, label 1 when both coordinates share a sign.
pub fn xor(n: usize, seed: u64) -> (Array2<f64>, Vec<usize>) {
    let mut rng = seed::rng(seed::derive(seed, "xor", &[]));
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

#[derive(Debug, Clone)]
pub struct Planted {
    pub x: Array2<f64>,
    pub labels: Vec<usize>,
    /// Columns whose mean depends on the class, ascending.
    pub informative: Vec<usize>,
}

/// Standard normal noise in `d` columns; in `n_informative` randomly placed
/// columns class `c` has its mean shifted by `shift · (c − (C−1)/2)`.
pub fn planted(n: usize, d: usize, n_classes: usize, n_informative: usize, shift: f64, seed: u64) -> Planted {
    assert!(n_informative <= d && n_classes >= 2);
    let mut rng = seed::rng(seed::derive(seed, "planted", &[]));
    let mut informative: Vec<usize> = rand::seq::index::sample(&mut rng, d, n_informative).into_vec();
    informative.sort_unstable();
    let mut x = Array2::zeros((n, d));
    x.mapv_inplace(|_: f64| normal(&mut rng));
    let labels: Vec<usize> = (0..n).map(|i| i % n_classes).collect();
    let centre = (n_classes as f64 - 1.0) / 2.0;
    for &col in &informative {
        for (i, &c) in labels.iter().enumerate() {
            x[[i, col]] += shift * (c as f64 - centre);
        }
    }
    Planted { x, labels, informative }
}

/// Parameters of the toy review generator.
#[derive(Debug, Clone)]
pub struct ReviewSpec {
    pub n_docs: usize,
    pub dim: usize,
    /// Sentiment-bearing words per class.
    pub class_words: usize,
    /// Words shared by every class.
    pub filler_words: usize,
    pub min_len: usize,
    pub max_len: usize,
    /// Probability that a token is drawn from the document's class words.
    pub signal: f64,
    /// Norm of each class centroid relative to the unit per-coordinate noise.
    pub centroid_scale: f64,
    pub seed: u64,
}

impl Default for ReviewSpec {
    fn default() -> Self {
        ReviewSpec {
            n_docs: 300,
            dim: 50,
            class_words: 30,
            filler_words: 150,
            min_len: 6,
            max_len: 18,
            signal: 0.35,
            centroid_scale: 6.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticReviews {
    /// CSV with columns `text` and `score`.
    pub csv: String,
    pub store: EmbeddingStore,
    /// Class index (0 Disagree, 1 Neutral, 2 Agree) per row.
    pub classes: Vec<usize>,
}

const SYLLABLES: [&str; 16] = [
    "ka", "lo", "mi", "nu", "pe", "ra", "si", "to", "va", "ze", "bo", "da", "fi", "gu", "ho", "ju",
];

/// Distinct alphabetic pseudo-word for an index.
fn pseudo_word(prefix: &str, mut i: usize) -> String {
    let mut w = prefix.to_string();
    loop {
        w.push_str(SYLLABLES[i % SYLLABLES.len()]);
        i /= SYLLABLES.len();
        if i == 0 {
            break;
        }
        i -= 1;
    }
    w
}

const FUNCTION_WORDS: [&str; 6] = ["the", "and", "it", "was", "very", "of"];

impl ReviewSpec {
    pub fn generate(&self) -> SyntheticReviews {
        let base = self.seed;
        let mut rng = seed::rng(seed::derive(base, "reviews-vectors", &[]));
        let mut store = EmbeddingStore::new(self.dim);
        let centroid_scale = self.centroid_scale;
        let centroids: Vec<Vec<f64>> = (0..3)
            .map(|_| {
                let v: Vec<f64> = (0..self.dim).map(|_| normal(&mut rng)).collect();
                let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
                v.into_iter().map(|a| a / norm * centroid_scale).collect()
            })
            .collect();
        let prefixes = ["neg", "mid", "pos"];
        let mut class_vocab: Vec<Vec<String>> = Vec::new();
        for (c, centroid) in centroids.iter().enumerate() {
            let mut words = Vec::new();
            for i in 0..self.class_words {
                let w = pseudo_word(prefixes[c], i);
                let v: Vec<f64> = centroid.iter().map(|m| m + normal(&mut rng)).collect();
                store.insert(&w, &v).expect("finite vector of store dimension");
                words.push(w);
            }
            class_vocab.push(words);
        }
        let mut filler = Vec::new();
        for i in 0..self.filler_words {
            let w = pseudo_word("", i);
            let v: Vec<f64> = (0..self.dim).map(|_| normal(&mut rng)).collect();
            store.insert(&w, &v).expect("finite vector of store dimension");
            filler.push(w);
        }

        let mut rng = seed::rng(seed::derive(base, "reviews-docs", &[]));
        let mut csv = String::from("text,score\n");
        let mut classes = Vec::with_capacity(self.n_docs);
        for i in 0..self.n_docs {
            let c = i % 3;
            let len = rng.random_range(self.min_len..=self.max_len);
            let mut tokens: Vec<String> = Vec::with_capacity(len + 2);
            for _ in 0..len {
                let w = if rng.random_bool(self.signal) {
                    class_vocab[c].choose(&mut rng)
                } else {
                    filler.choose(&mut rng)
                };
                tokens.push(w.expect("non-empty word list").clone());
            }
            // stopwords and punctuation exercise the preprocessing path
            tokens.push(FUNCTION_WORDS.choose(&mut rng).expect("non-empty").to_string());
            tokens.shuffle(&mut rng);
            if rng.random_bool(0.5) {
                let first = tokens[0].to_uppercase();
                tokens[0] = first;
            }
            let score = match c {
                0 => rng.random_range(1..=2),
                1 => 3,
                _ => rng.random_range(4..=5),
            };
            tokens[0].push(',');
            let text = tokens.join(" ");
            let _ = writeln!(csv, "\"{text}!\",{score}");
            classes.push(c);
        }
        SyntheticReviews { csv, store, classes }
    }
}

impl SyntheticReviews {
    /// Writes `reviews.csv` and `vectors.txt` into `dir`.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<(PathBuf, PathBuf)> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let csv_path = dir.join("reviews.csv");
        std::fs::write(&csv_path, &self.csv).map_err(|e| Error::io(&csv_path, e))?;
        let vec_path = dir.join("vectors.txt");
        self.store.write_text(&vec_path)?;
        Ok((csv_path, vec_path))
    }
}
