//! Timing harnesses: prediction latency before and after reduction, and RDC
//! wall time as the sample size doubles.

use std::time::Instant;

use ndarray::s;
use serde::{Deserialize, Serialize};

use depsel::classify::{self, predict_latency, ClassifierKind, HyperParams, Latency};
use depsel::corpus::{collapse_scores, preprocess, read_csv, Stopwords};
use depsel::depmeasure::{rdc, RdcConfig};
use depsel::evaluate::{fit_reducer, Reducer};
use depsel::featurize::embedding_matrix;
use depsel::seed;
use depsel::synth::{normal_matrix, ReviewSpec};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LatencyBench {
    pub reducer: Reducer,
    pub train_rows: usize,
    pub test_rows: usize,
    pub full_dim: usize,
    pub reduced_dim: usize,
    pub full: Latency,
    pub reduced: Latency,
    pub full_support_vectors: usize,
    pub reduced_support_vectors: usize,
    /// `reduced.median / full.median`
    pub ratio: f64,
}

fn support_vectors(m: &classify::TrainedModel) -> usize {
    match &m.params {
        classify::ModelParams::Svm(s) => s.n_support(),
        _ => 0,
    }
}

/// G-SVM on `dim`-dimensional synthetic document embeddings versus the same
/// pipeline after reducing to `target_dim` dimensions on the training rows.
pub fn latency_benchmark(
    seed: u64,
    dim: usize,
    target_dim: usize,
    train_rows: usize,
    test_rows: usize,
    reducer: Reducer,
    repeats: usize,
) -> depsel::Result<LatencyBench> {
    let reviews = ReviewSpec {
        n_docs: train_rows + test_rows,
        dim,
        seed,
        ..Default::default()
    }
    .generate();
    let corpus = read_csv(reviews.csv.as_bytes(), "text", "score")?;
    let corpus = collapse_scores(&preprocess(&corpus, &Stopwords::english()).corpus);
    let emb = embedding_matrix(&corpus, &reviews.store);
    let x = emb.matrix.values;
    let y: Vec<usize> = emb
        .matrix
        .doc_ids
        .iter()
        .map(|&id| {
            corpus
                .document(id)
                .expect("embedded rows come from the corpus")
                .category
                .index()
        })
        .collect();
    let n_train = train_rows.min(x.nrows());
    let x_train = x.slice(s![..n_train, ..]);
    let x_test = x.slice(s![n_train.., ..]);
    let y_train = &y[..n_train];

    let hp = HyperParams::default();
    let full = classify::fit(ClassifierKind::Gsvm, x_train, y_train, &hp, seed)?;
    let red = fit_reducer(
        reducer,
        x_train,
        y_train,
        target_dim,
        &RdcConfig::default(),
        seed::derive(seed, "bench-reducer", &[]),
    )?;
    let z_train = red.transform(x_train)?;
    let z_test = red.transform(x_test)?;
    let reduced = classify::fit(ClassifierKind::Gsvm, z_train.view(), y_train, &hp, seed)?;

    let full_lat = predict_latency(&full, x_test, repeats)?;
    let reduced_lat = predict_latency(&reduced, z_test.view(), repeats)?;
    Ok(LatencyBench {
        reducer,
        train_rows: n_train,
        test_rows: x_test.nrows(),
        full_dim: x.ncols(),
        reduced_dim: z_train.ncols(),
        ratio: reduced_lat.median / full_lat.median,
        full: full_lat,
        reduced: reduced_lat,
        full_support_vectors: support_vectors(&full),
        reduced_support_vectors: support_vectors(&reduced),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScalingPoint {
    pub n: usize,
    pub median_seconds: f64,
    /// Median time at `n` over median time at `n / 2`; absent for the first point.
    pub ratio_to_previous: Option<f64>,
}

/// Median wall time of one univariate `rdc` call for each sample size. Sizes
/// are timed round-robin so that drift in machine load hits all of them alike.
pub fn rdc_scaling(seed: u64, sizes: &[usize], repeats: usize) -> depsel::Result<Vec<ScalingPoint>> {
    let cfg = RdcConfig::default().with_seed(seed);
    let data: Vec<_> = sizes
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            (
                normal_matrix(n, 1, seed::derive(seed, "bench-rdc-x", &[i as u64])),
                normal_matrix(n, 1, seed::derive(seed, "bench-rdc-y", &[i as u64])),
            )
        })
        .collect();
    for (x, y) in &data {
        rdc(x.view(), y.view(), &cfg)?;
    }
    let mut times = vec![Vec::with_capacity(repeats); sizes.len()];
    for _ in 0..repeats {
        for ((x, y), t) in data.iter().zip(times.iter_mut()) {
            let start = Instant::now();
            std::hint::black_box(rdc(x.view(), y.view(), &cfg)?);
            t.push(start.elapsed().as_secs_f64());
        }
    }
    let mut out: Vec<ScalingPoint> = Vec::with_capacity(sizes.len());
    for (&n, mut t) in sizes.iter().zip(times) {
        let median = depsel::linalg::median_in_place(&mut t).unwrap_or(0.0);
        let ratio_to_previous = out.last().map(|p| median / p.median_seconds);
        out.push(ScalingPoint {
            n,
            median_seconds: median,
            ratio_to_previous,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchReport {
    pub latency: LatencyBench,
    pub rdc_scaling: Vec<ScalingPoint>,
}
