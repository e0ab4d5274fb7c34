//! Run configuration: a flat JSON file overridden by command-line flags.

use std::path::{Path, PathBuf};

use clap::Args;
use serde::Deserialize;

use depsel::classify::{ClassifierKind, HyperParams};
use depsel::depmeasure::RdcConfig;
use depsel::embeddings::EmbeddingFormat;
use depsel::evaluate::{ExperimentPlan, Featurizer, Reducer};

use crate::CliError;

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Default, Args)]
pub struct Options {
    /// JSON configuration file with flat keys; flags override its values
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Input file: review CSV, ingested corpus JSON, feature CSV or report JSON depending on the command
    #[arg(long, global = true, value_name = "FILE")]
    pub input: Option<PathBuf>,
    /// Name of the CSV column holding the review text [default: text]
    #[arg(long, global = true, value_name = "NAME")]
    pub text_col: Option<String>,
    /// Name of the CSV column holding the 1-5 score [default: score]
    #[arg(long, global = true, value_name = "NAME")]
    pub score_col: Option<String>,
    /// Stopword file, one word per line [default: built-in English list]
    #[arg(long, global = true, value_name = "FILE")]
    pub stopwords: Option<PathBuf>,
    /// Word-vector file (text or binary word2vec layout)
    #[arg(long, global = true, value_name = "FILE")]
    pub embeddings: Option<PathBuf>,
    /// Word-vector file format: text or binary [default: binary for .bin files, otherwise text]
    #[arg(long, global = true, value_name = "FORMAT")]
    pub format: Option<String>,
    /// Base seed for every random choice [default: 0]
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    /// Number of dimensions kept by the reducers [default: 20]
    #[arg(long, global = true, value_name = "N")]
    pub target_dim: Option<usize>,
    /// Cross-validation folds [default: 5]
    #[arg(long, global = true, value_name = "N")]
    pub folds: Option<usize>,
    /// Output directory [default: depsel-out]
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

/// Keys accepted in the configuration file. Relative paths are resolved
/// against the file's directory.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub input: Option<PathBuf>,
    pub text_col: Option<String>,
    pub score_col: Option<String>,
    pub stopwords: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub format: Option<String>,
    pub seed: Option<u64>,
    pub target_dim: Option<usize>,
    pub folds: Option<usize>,
    pub out: Option<PathBuf>,
    pub featurizers: Option<Vec<String>>,
    pub reducers: Option<Vec<String>>,
    pub classifiers: Option<Vec<String>>,
    pub strip_numerals: Option<bool>,
    pub knn_k: Option<usize>,
    pub c: Option<f64>,
    pub max_iter: Option<usize>,
    pub rdc_k: Option<usize>,
    pub rdc_s: Option<f64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<FileConfig, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read --config {}: {e}", path.display())))?;
        let mut cfg: FileConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::Input(format!("invalid --config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut cfg.input, &mut cfg.stopwords, &mut cfg.embeddings, &mut cfg.out]
            .into_iter()
            .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    pub text_col: String,
    pub score_col: String,
    pub stopwords: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub format: EmbeddingFormat,
    pub seed: u64,
    pub target_dim: usize,
    pub folds: usize,
    pub out: PathBuf,
    pub featurizers: Vec<Featurizer>,
    pub reducers: Vec<Reducer>,
    pub classifiers: Vec<ClassifierKind>,
    pub strip_numerals: bool,
    pub hyper: HyperParams,
    pub rdc: RdcConfig,
}

fn parse_list<T>(items: Option<Vec<String>>, key: &str) -> Result<Option<Vec<T>>, CliError>
where
    T: std::str::FromStr<Err = depsel::Error>,
{
    items
        .map(|v| {
            v.iter()
                .map(|s| {
                    s.parse::<T>()
                        .map_err(|e| CliError::Input(format!("config key {key}: {e}")))
                })
                .collect()
        })
        .transpose()
}

fn existing(path: Option<PathBuf>, flag: &str) -> Result<Option<PathBuf>, CliError> {
    match path {
        Some(p) if !p.exists() => Err(CliError::Input(format!("{flag}: {} does not exist", p.display()))),
        other => Ok(other),
    }
}

impl RunConfig {
    /// Merge the config file (if any) with the flags and validate the result.
    pub fn resolve(opts: &Options) -> Result<RunConfig, CliError> {
        let file = match &opts.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        let input = existing(opts.input.clone().or(file.input), "--input")?;
        let stopwords = existing(opts.stopwords.clone().or(file.stopwords), "--stopwords")?;
        let embeddings = existing(opts.embeddings.clone().or(file.embeddings), "--embeddings")?;
        let format = match opts.format.clone().or(file.format) {
            Some(f) => f
                .parse::<EmbeddingFormat>()
                .map_err(|e| CliError::Input(format!("--format: {e}")))?,
            None => match embeddings.as_ref().and_then(|p| p.extension()) {
                Some(ext) if ext == "bin" => EmbeddingFormat::Binary,
                _ => EmbeddingFormat::Text,
            },
        };
        let featurizers = match parse_list::<Featurizer>(file.featurizers, "featurizers")? {
            Some(f) => f,
            None => {
                let mut f = vec![Featurizer::Bow, Featurizer::Tfidf];
                if embeddings.is_some() {
                    f.push(Featurizer::W2v);
                }
                f
            }
        };
        let reducers = parse_list::<Reducer>(file.reducers, "reducers")?.unwrap_or_else(|| Reducer::ALL.to_vec());
        let classifiers = parse_list::<ClassifierKind>(file.classifiers, "classifiers")?
            .unwrap_or_else(|| ClassifierKind::ALL.to_vec());

        let mut hyper = HyperParams::default();
        if let Some(k) = file.knn_k {
            hyper.knn_k = k;
        }
        if let Some(c) = file.c {
            hyper.c = c;
        }
        if let Some(m) = file.max_iter {
            hyper.max_iter = m;
        }
        let mut rdc = RdcConfig::default();
        if let Some(k) = file.rdc_k {
            rdc.k = k;
        }
        if let Some(s) = file.rdc_s {
            rdc.s = s;
        }

        let cfg = RunConfig {
            input,
            text_col: opts.text_col.clone().or(file.text_col).unwrap_or_else(|| "text".into()),
            score_col: opts
                .score_col
                .clone()
                .or(file.score_col)
                .unwrap_or_else(|| "score".into()),
            stopwords,
            embeddings,
            format,
            seed: opts.seed.or(file.seed).unwrap_or(0),
            target_dim: opts.target_dim.or(file.target_dim).unwrap_or(20),
            folds: opts.folds.or(file.folds).unwrap_or(5),
            out: opts
                .out
                .clone()
                .or(file.out)
                .unwrap_or_else(|| PathBuf::from("depsel-out")),
            featurizers,
            reducers,
            classifiers,
            strip_numerals: file.strip_numerals.unwrap_or(false),
            hyper,
            rdc,
        };
        if cfg.target_dim == 0 {
            return Err(CliError::Input("--target-dim must be at least 1".into()));
        }
        if cfg.folds < 2 {
            return Err(CliError::Input("--folds must be at least 2".into()));
        }
        cfg.hyper.validate()?;
        cfg.rdc.validate()?;
        Ok(cfg)
    }

    pub fn require_input(&self) -> Result<&Path, CliError> {
        self.input
            .as_deref()
            .ok_or_else(|| CliError::Input("--input is required for this command".into()))
    }

    pub fn plan(&self) -> ExperimentPlan {
        ExperimentPlan {
            featurizers: self.featurizers.clone(),
            reducers: self.reducers.clone(),
            classifiers: self.classifiers.clone(),
            folds: self.folds,
            seed: self.seed,
            target_dim: self.target_dim,
            hyper: self.hyper.clone(),
            rdc: self.rdc,
        }
    }
}
