//! Pretrained word vectors in the word2vec text and binary interchange formats.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, ErrorKind, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::dot;

/// Immutable word → vector table with a fixed dimension.
#[derive(Debug, Clone, Default)]
pub struct EmbeddingStore {
    dim: usize,
    words: Vec<String>,
    vectors: Vec<f64>,
    index: HashMap<String, usize>,
    folded: HashMap<String, usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmbeddingFormat {
    Text,
    Binary,
}

impl std::str::FromStr for EmbeddingFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" => Ok(EmbeddingFormat::Text),
            "binary" => Ok(EmbeddingFormat::Binary),
            other => Err(Error::Config(format!(
                "unknown embedding format '{other}' (expected text or binary)"
            ))),
        }
    }
}

impl EmbeddingStore {
    pub fn new(dim: usize) -> Self {
        EmbeddingStore {
            dim,
            ..Default::default()
        }
    }

    /// Insert or replace a word. A repeated word overwrites the earlier
    /// vector in place and keeps its original vocabulary position.
    pub fn insert(&mut self, word: &str, vector: &[f64]) -> Result<()> {
        if vector.len() != self.dim {
            return Err(Error::shape(format!(
                "vector for '{word}' has {} entries, store dimension is {}",
                vector.len(),
                self.dim
            )));
        }
        if vector.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("non-finite value in vector for '{word}'")));
        }
        if let Some(&i) = self.index.get(word) {
            log::warn!("duplicate embedding for '{word}', keeping the last occurrence");
            self.vectors[i * self.dim..(i + 1) * self.dim].copy_from_slice(vector);
            return Ok(());
        }
        let i = self.words.len();
        self.words.push(word.to_string());
        self.vectors.extend_from_slice(vector);
        self.index.insert(word.to_string(), i);
        self.folded.entry(word.to_lowercase()).or_insert(i);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vocab_size(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.vectors[i * self.dim..(i + 1) * self.dim]
    }

    /// Exact, case-sensitive lookup.
    pub fn lookup(&self, word: &str) -> Option<&[f64]> {
        self.index.get(word).map(|&i| self.row(i))
    }

    /// Exact lookup, falling back to the first stored word whose lowercase
    /// form equals the lowercased query.
    pub fn lookup_folded(&self, word: &str) -> Option<&[f64]> {
        self.lookup(word)
            .or_else(|| self.folded.get(&word.to_lowercase()).map(|&i| self.row(i)))
    }

    pub fn similarity(&self, a: &str, b: &str) -> Option<f64> {
        Some(cosine(self.lookup(a)?, self.lookup(b)?))
    }

    /// Words closest by cosine to `V(b) - V(a) + V(c)`, excluding the three
    /// query words. Ties keep vocabulary order.
    pub fn analogy(&self, a: &str, b: &str, c: &str, top_n: usize) -> Result<Vec<(String, f64)>> {
        let get = |w: &str| self.lookup(w).ok_or_else(|| Error::UnknownWord(w.to_string()));
        let (va, vb, vc) = (get(a)?, get(b)?, get(c)?);
        let target: Vec<f64> = (0..self.dim).map(|k| vb[k] - va[k] + vc[k]).collect();

        let mut scored: Vec<(usize, f64)> = (0..self.words.len())
            .filter(|&i| {
                let w = self.words[i].as_str();
                w != a && w != b && w != c
            })
            .map(|i| (i, cosine(&target, self.row(i))))
            .collect();
        scored.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.cmp(&y.0)));
        scored.truncate(top_n);
        Ok(scored.into_iter().map(|(i, s)| (self.words[i].clone(), s)).collect())
    }

    pub fn load(path: impl AsRef<Path>, format: EmbeddingFormat) -> Result<Self> {
        match format {
            EmbeddingFormat::Text => load_text_format(path),
            EmbeddingFormat::Binary => load_binary_format(path),
        }
    }

    pub fn write_text(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let f = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(f);
        let mut emit = || -> std::io::Result<()> {
            writeln!(w, "{} {}", self.vocab_size(), self.dim)?;
            for (i, word) in self.words.iter().enumerate() {
                write!(w, "{word}")?;
                for v in self.row(i) {
                    write!(w, " {v}")?;
                }
                writeln!(w)?;
            }
            w.flush()
        };
        emit().map_err(|e| Error::io(path, e))
    }

    /// Vectors are narrowed to single precision.
    pub fn write_binary(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let f = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(f);
        let mut emit = || -> std::io::Result<()> {
            writeln!(w, "{} {}", self.vocab_size(), self.dim)?;
            for (i, word) in self.words.iter().enumerate() {
                w.write_all(word.as_bytes())?;
                w.write_all(b" ")?;
                for &v in self.row(i) {
                    w.write_all(&(v as f32).to_le_bytes())?;
                }
                w.write_all(b"\n")?;
            }
            w.flush()
        };
        emit().map_err(|e| Error::io(path, e))
    }
}

/// Cosine similarity, 0 when either vector has zero norm. Clamped to [-1, 1].
pub fn cosine(u: &[f64], v: &[f64]) -> f64 {
    let nu = dot(u, u).sqrt();
    let nv = dot(v, v).sqrt();
    if nu == 0.0 || nv == 0.0 {
        return 0.0;
    }
    (dot(u, v) / (nu * nv)).clamp(-1.0, 1.0)
}

fn parse_header(line: &str) -> Option<(usize, usize)> {
    let mut it = line.split_whitespace();
    let (a, b) = (it.next()?, it.next()?);
    if it.next().is_some() {
        return None;
    }
    Some((a.parse().ok()?, b.parse().ok()?))
}

/// `word v1 ... v_dim` per line, optionally preceded by a `vocab_size dim` header.
pub fn load_text_format(path: impl AsRef<Path>) -> Result<EmbeddingStore> {
    let path = path.as_ref();
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    read_text_format(BufReader::new(f))
}

pub fn read_text_format<R: BufRead>(reader: R) -> Result<EmbeddingStore> {
    let mut store: Option<EmbeddingStore> = None;
    let mut header: Option<(usize, usize)> = None;
    let mut values = Vec::new();

    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::Line {
            line: lineno,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        if lineno == 1 {
            if let Some(h) = parse_header(&line) {
                header = Some(h);
                store = Some(EmbeddingStore::new(h.1));
                continue;
            }
        }
        let mut parts = line.split_whitespace();
        let word = parts.next().expect("non-empty line");
        values.clear();
        for tok in parts {
            let v: f64 = tok.parse().map_err(|_| Error::Line {
                line: lineno,
                message: format!("cannot parse '{tok}' as a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::Line {
                    line: lineno,
                    message: format!("non-finite value '{tok}'"),
                });
            }
            values.push(v);
        }
        let store = store.get_or_insert_with(|| EmbeddingStore::new(values.len()));
        if values.len() != store.dim || values.is_empty() {
            return Err(Error::Line {
                line: lineno,
                message: format!("expected {} values, found {}", store.dim, values.len()),
            });
        }
        store.insert(word, &values)?;
    }

    let store = store.ok_or_else(|| Error::invalid("embedding file contains no vectors"))?;
    if let Some((vocab, _)) = header {
        if vocab != store.vocab_size() {
            log::warn!("header declares {vocab} words, file holds {}", store.vocab_size());
        }
    }
    Ok(store)
}

/// The word2vec binary layout: an ASCII `vocab_size dim\n` header followed by
/// records of `word<space>` and `dim` little-endian f32 values.
pub fn load_binary_format(path: impl AsRef<Path>) -> Result<EmbeddingStore> {
    let path = path.as_ref();
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    read_binary_format(BufReader::new(f))
}

pub fn read_binary_format<R: BufRead>(mut reader: R) -> Result<EmbeddingStore> {
    let mut header = Vec::new();
    reader
        .read_until(b'\n', &mut header)
        .map_err(|e| Error::invalid(format!("reading header: {e}")))?;
    let header = String::from_utf8_lossy(&header);
    let (vocab, dim) =
        parse_header(&header).ok_or_else(|| Error::invalid(format!("malformed binary header '{}'", header.trim())))?;
    if dim == 0 {
        return Err(Error::invalid("binary header declares dimension 0"));
    }

    let mut store = EmbeddingStore::new(dim);
    let mut word = Vec::new();
    let mut raw = vec![0u8; dim * 4];
    let mut values = vec![0f64; dim];
    let truncated = |records| Error::Truncated {
        records,
        expected: vocab,
    };

    for rec in 0..vocab {
        word.clear();
        loop {
            let mut b = [0u8; 1];
            match reader.read_exact(&mut b) {
                Ok(()) => {}
                Err(e) if e.kind() == ErrorKind::UnexpectedEof => return Err(truncated(rec)),
                Err(e) => return Err(Error::invalid(e.to_string())),
            }
            match b[0] {
                b' ' => break,
                b'\n' | b'\r' if word.is_empty() => {}
                c => word.push(c),
            }
        }
        match reader.read_exact(&mut raw) {
            Ok(()) => {}
            Err(e) if e.kind() == ErrorKind::UnexpectedEof => return Err(truncated(rec)),
            Err(e) => return Err(Error::invalid(e.to_string())),
        }
        for (v, chunk) in values.iter_mut().zip(raw.chunks_exact(4)) {
            *v = f64::from(f32::from_le_bytes(chunk.try_into().expect("4-byte chunk")));
        }
        let w = String::from_utf8_lossy(&word);
        store
            .insert(&w, &values)
            .map_err(|e| Error::invalid(format!("record {rec}: {e}")))?;
    }
    Ok(store)
}
