use ndarray::{Array2, Axis};
use proptest::prelude::*;

use depsel::corpus::{
    collapse_scores, preprocess, rebalance, tokenize, Category, Document, LabeledCorpus, PreprocessOptions, Stopwords,
};
use depsel::depmeasure::{copula_transform, largest_canonical_correlation, mmd, rdc, MmdConfig, RdcConfig};
use depsel::embeddings::{EmbeddingFormat, EmbeddingStore};
use depsel::featsel::{apply_selection, greedy_select, pca_fit, Scorer};
use depsel::featurize::{bow_matrix, build_vocabulary, embedding_matrix, tfidf_matrix, ColumnTag, FeatureMatrix};
use depsel::linalg::median_in_place;
use depsel::synth::{normal_matrix, planted};

/// Random `n`x`n` orthogonal matrix from the QR factor of a Gaussian matrix.
fn orthogonal(n: usize, seed: u64) -> Array2<f64> {
    let q = nalgebra::DMatrix::from_iterator(n, n, normal_matrix(n, n, seed).iter().copied())
        .qr()
        .q();
    Array2::from_shape_fn((n, n), |(i, j)| q[(i, j)])
}

fn doc(id: usize, text: &str, score: u8) -> Document {
    Document {
        id,
        raw_text: text.to_string(),
        tokens: Vec::new(),
        raw_score: score,
        category: Category::from_score(score).unwrap(),
    }
}

fn word_text() -> impl Strategy<Value = String> {
    let piece = prop_oneof![
        Just("the".to_string()),
        Just("and".to_string()),
        Just("Great".to_string()),
        Just("unit".to_string()),
        Just("2024".to_string()),
        Just("!".to_string()),
        Just(",".to_string()),
        Just("café".to_string()),
        Just("—".to_string()),
        "[a-zA-Z]{1,6}",
    ];
    prop::collection::vec(piece, 0..12).prop_map(|v| v.join(" "))
}

fn matrix(max_rows: usize, max_cols: usize) -> impl Strategy<Value = Array2<f64>> {
    (1..=max_cols).prop_flat_map(move |d| matrix_with_cols(max_rows, d))
}

fn matrix_with_cols(max_rows: usize, d: usize) -> impl Strategy<Value = Array2<f64>> {
    (2..=max_rows).prop_flat_map(move |n| {
        prop::collection::vec(-5.0f64..5.0, n * d).prop_map(move |v| Array2::from_shape_vec((n, d), v).unwrap())
    })
}

/// Two matrices sharing a column count, row counts drawn independently.
fn matrix_pair(max_rows: usize, max_cols: usize) -> impl Strategy<Value = (Array2<f64>, Array2<f64>)> {
    (1..=max_cols).prop_flat_map(move |d| (matrix_with_cols(max_rows, d), matrix_with_cols(max_rows, d)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tokenize_is_idempotent(text in "\\PC{0,60}", strip in any::<bool>()) {
        let sw = Stopwords::english();
        let opts = PreprocessOptions { strip_numerals: strip };
        let once = tokenize(&text, &sw, opts);
        prop_assert_eq!(tokenize(&once.join(" "), &sw, opts), once);
    }

    #[test]
    fn preprocess_is_idempotent(texts in prop::collection::vec(word_text(), 1..8)) {
        let corpus = LabeledCorpus::new(texts.iter().enumerate().map(|(i, t)| doc(i, t, 1 + (i % 5) as u8)).collect());
        let sw = Stopwords::english();
        let first = preprocess(&corpus, &sw).corpus;
        let rejoined = LabeledCorpus::new(
            first.documents.iter().map(|d| Document { raw_text: d.tokens.join(" "), ..d.clone() }).collect(),
        );
        let second = preprocess(&rejoined, &sw).corpus;
        let a: Vec<&Vec<String>> = first.documents.iter().map(|d| &d.tokens).collect();
        let b: Vec<&Vec<String>> = second.documents.iter().map(|d| &d.tokens).collect();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn collapse_preserves_score_order(a in 1u8..=5, b in 1u8..=5) {
        let c = collapse_scores(&LabeledCorpus::new(vec![doc(0, "x", a), doc(1, "y", b)]));
        let (ca, cb) = (c.documents[0].category, c.documents[1].category);
        if a <= b {
            prop_assert!(ca <= cb);
        }
    }

    #[test]
    fn rebalance_keeps_original_ids(scores in prop::collection::vec(1u8..=5, 3..40), seed in any::<u64>()) {
        let mut docs: Vec<Document> = scores.iter().enumerate().map(|(i, &s)| doc(i, "w", s)).collect();
        for (i, s) in [1u8, 3, 5].into_iter().enumerate() {
            docs.push(doc(100 + i, "w", s));
        }
        let corpus = LabeledCorpus::new(docs);
        let a = rebalance(&corpus, seed).unwrap();
        let b = rebalance(&corpus, seed).unwrap();
        prop_assert_eq!(&a, &b);
        let original = corpus.ids();
        prop_assert!(a.ids().iter().all(|id| original.contains(id)));
        let n = a.count(Category::Disagree);
        prop_assert!(Category::ALL.iter().all(|&c| a.count(c) == n));
    }

    #[test]
    fn tfidf_zero_pattern_and_row_order(texts in prop::collection::vec("[a-d]{1,2}( [a-d]{1,2}){0,5}", 2..9), rot in 1usize..8) {
        let corpus = LabeledCorpus::new(texts.iter().enumerate().map(|(i, t)| {
            let mut d = doc(i, t, 3);
            d.tokens = t.split(' ').map(str::to_string).collect();
            d
        }).collect());
        let vocab = build_vocabulary(&corpus).unwrap();
        let bow = bow_matrix(&corpus, &vocab);
        let tfidf = tfidf_matrix(&corpus, &vocab);
        let n = corpus.len();
        for (j, tag) in tfidf.provenance.iter().enumerate() {
            let ColumnTag::Term(term) = tag else { unreachable!() };
            let everywhere = vocab.doc_freq(term) == Some(n);
            for i in 0..n {
                let v = tfidf.values[[i, j]];
                prop_assert!(v >= 0.0);
                prop_assert_eq!(v == 0.0, bow.values[[i, j]] == 0.0 || everywhere);
            }
        }
        let k = rot % n;
        let mut docs = corpus.documents.clone();
        docs.rotate_left(k);
        let shuffled = LabeledCorpus::new(docs);
        let t2 = tfidf_matrix(&shuffled, &build_vocabulary(&shuffled).unwrap());
        prop_assert_eq!(&t2.provenance, &tfidf.provenance);
        for i in 0..n {
            prop_assert_eq!(t2.values.row(i), tfidf.values.row((i + k) % n));
        }
    }

    #[test]
    fn mmd_is_symmetric_and_non_negative((x, y) in matrix_pair(12, 3), sigma in 0.1f64..10.0) {
        let cfg = MmdConfig::fixed(sigma);
        let a = mmd(x.view(), y.view(), &cfg).unwrap();
        let b = mmd(y.view(), x.view(), &cfg).unwrap();
        prop_assert!(a >= 0.0);
        prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
        prop_assert_eq!(mmd(x.view(), x.view(), &cfg).unwrap(), 0.0);
    }

    #[test]
    fn copula_is_row_permutation_equivariant(x in matrix(30, 3), rot in 0usize..30) {
        let n = x.nrows();
        let order: Vec<usize> = (0..n).map(|i| (i + rot) % n).collect();
        let permuted = x.select(Axis(0), &order);
        prop_assert_eq!(copula_transform(permuted.view()), copula_transform(x.view()).select(Axis(0), &order));
    }

    #[test]
    fn rdc_ignores_increasing_transforms(x in matrix(40, 2), seed in any::<u64>()) {
        let y = normal_matrix(x.nrows(), 1, seed);
        let fx = x.mapv(|v| v.exp() + v.powi(3));
        let cfg = RdcConfig::default().with_seed(seed);
        prop_assert_eq!(copula_transform(fx.view()), copula_transform(x.view()));
        prop_assert_eq!(rdc(fx.view(), y.view(), &cfg).unwrap(), rdc(x.view(), y.view(), &cfg).unwrap());
    }

    #[test]
    fn cca_invariant_to_column_recombination(seed in 0u64..1000, scales in prop::array::uniform3(0.5f64..2.0)) {
        let a = normal_matrix(200, 3, seed);
        let noise = normal_matrix(200, 2, seed + 1);
        let mut b = noise.clone();
        b.column_mut(0).zip_mut_with(&a.column(0), |bv, av| *bv = 0.5 * *bv + av);
        let m = orthogonal(3, seed + 2) * ndarray::arr1(&scales);
        let r1 = largest_canonical_correlation(a.view(), b.view(), 0.0).unwrap();
        let r2 = largest_canonical_correlation(a.dot(&m).view(), b.view(), 0.0).unwrap();
        prop_assert!(r1 <= 1.0 && r2 <= 1.0);
        prop_assert!((r1 - r2).abs() <= 1e-6, "{} vs {}", r1, r2);
    }

    #[test]
    fn embedding_rows_are_unit_and_formats_agree(vecs in prop::collection::vec(prop::collection::vec(-3.0f64..3.0, 4), 3..8)) {
        let mut store = EmbeddingStore::new(4);
        for (i, v) in vecs.iter().enumerate() {
            store.insert(&format!("w{i}"), v).unwrap();
        }
        let dir = tempfile::tempdir().unwrap();
        let (tp, bp) = (dir.path().join("v.txt"), dir.path().join("v.bin"));
        store.write_text(&tp).unwrap();
        store.write_binary(&bp).unwrap();
        let t = EmbeddingStore::load(&tp, EmbeddingFormat::Text).unwrap();
        let b = EmbeddingStore::load(&bp, EmbeddingFormat::Binary).unwrap();
        for i in 0..vecs.len() {
            let w = format!("w{i}");
            let (tv, bv) = (t.lookup(&w).unwrap(), b.lookup(&w).unwrap());
            prop_assert!(tv.iter().zip(bv).all(|(p, q)| (p - q).abs() <= 1e-6));
        }
        if let Ok(hits) = t.analogy("w0", "w1", "w2", 10) {
            for (w, score) in hits {
                prop_assert!(!["w0", "w1", "w2"].contains(&w.as_str()));
                prop_assert!((-1.0..=1.0).contains(&score));
            }
        }
        let corpus = LabeledCorpus::new((0..vecs.len()).map(|i| {
            let mut d = doc(i, "", 1 + (i % 5) as u8);
            d.tokens = vec![format!("w{i}"), format!("w{}", (i + 1) % vecs.len())];
            d
        }).collect());
        let emb = embedding_matrix(&corpus, &store);
        prop_assert!(emb.dropped.is_empty());
        for row in emb.matrix.values.rows() {
            prop_assert!((row.dot(&row).sqrt() - 1.0).abs() <= 1e-12);
        }
    }
}

#[test]
fn rdc_is_symmetric_in_median() {
    let (mut xy, mut yx) = (Vec::new(), Vec::new());
    for t in 0..20u64 {
        let x = normal_matrix(300, 1, 1000 + t);
        let y = x.mapv(|v| v.sin()) + normal_matrix(300, 1, 2000 + t) * 0.5;
        let cfg = RdcConfig::default().with_seed(t);
        xy.push(rdc(x.view(), y.view(), &cfg).unwrap());
        yx.push(rdc(y.view(), x.view(), &cfg).unwrap());
    }
    let a = median_in_place(&mut xy).unwrap();
    let b = median_in_place(&mut yx).unwrap();
    assert!((a - b).abs() <= 0.05, "{a} vs {b}");
}

#[test]
fn greedy_is_deterministic_and_selection_is_pure_subsetting() {
    let p = planted(120, 15, 3, 3, 1.0, 4);
    let fm = FeatureMatrix::new(
        p.x.clone(),
        (0..15).map(ColumnTag::EmbeddingDim).collect(),
        (0..120).collect(),
    )
    .unwrap();
    for scorer in [
        Scorer::Rdc(RdcConfig::default().with_seed(8)),
        Scorer::Mmd(MmdConfig::default()),
    ] {
        let a = greedy_select(p.x.view(), &p.labels, &scorer, 5).unwrap();
        let b = greedy_select(p.x.view(), &p.labels, &scorer, 5).unwrap();
        assert_eq!(a, b);
        let reduced = apply_selection(&fm, &a).unwrap();
        for (k, &j) in a.selected.iter().enumerate() {
            assert_eq!(reduced.values.column(k), p.x.column(j));
            assert_eq!(reduced.provenance[k], ColumnTag::EmbeddingDim(j));
        }
    }
}

#[test]
fn pca_spectrum_survives_orthogonal_rotation() {
    let x = normal_matrix(80, 6, 12) * ndarray::arr1(&[5.0, 3.0, 2.0, 1.0, 0.5, 0.1]);
    let rot = orthogonal(6, 13);
    let a = pca_fit(x.view(), 6).unwrap();
    let b = pca_fit(x.dot(&rot).view(), 6).unwrap();
    for (u, v) in a.explained_variance.iter().zip(&b.explained_variance) {
        assert!((u - v).abs() <= 1e-6 * u.abs().max(1e-12), "{u} vs {v}");
    }
}
