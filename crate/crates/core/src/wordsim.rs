//! Word-level senses and word-similarity evaluation.
//!
//! Two words score the largest dot product over all pairs of their senses;
//! predictions are compared with human judgments by Spearman correlation.

use std::collections::HashMap;
use std::path::Path;

use serde::Serialize;

use crate::clustering::KmeansConfig;
use crate::dictionary::{build_dictionary, BuildConfig, BuildMode, SenseDictionary, SenseSet};
use crate::store::OccurrenceRecord;
use crate::{dot, Dtype, Error, Result, TokenId};

pub const DEFAULT_WORD_K: usize = 5;

/// Word surface ↔ id map; ids are contiguous from 0.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct WordVocabulary {
    surfaces: Vec<String>,
    ids: HashMap<String, TokenId>,
}

impl WordVocabulary {
    pub fn from_surfaces<I, S>(surfaces: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut vocab = Self::default();
        for s in surfaces {
            let s = s.into();
            let id = TokenId(vocab.surfaces.len() as u32);
            if vocab.ids.insert(s.clone(), id).is_some() {
                return Err(Error::InvalidConfig(format!("duplicate word `{s}`")));
            }
            vocab.surfaces.push(s);
        }
        Ok(vocab)
    }

    /// Parses `id<TAB>surface` lines.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries: Vec<(u32, String, usize)> = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let (id, surface) = line.split_once('\t').ok_or_else(|| Error::Parse {
                line: line_no,
                msg: "expected `id<TAB>surface`".into(),
            })?;
            let id: u32 = id.trim().parse().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("bad id `{id}`"),
            })?;
            entries.push((id, surface.to_string(), line_no));
        }
        entries.sort_by_key(|e| e.0);
        for (expected, (id, _, line)) in entries.iter().enumerate() {
            if *id as usize != expected {
                return Err(Error::Parse {
                    line: *line,
                    msg: format!("ids must be unique and contiguous from 0; found {id} where {expected} was expected"),
                });
            }
        }
        Self::from_surfaces(entries.into_iter().map(|(_, s, _)| s))
    }

    pub fn read_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_tsv(&self) -> String {
        self.surfaces
            .iter()
            .enumerate()
            .map(|(i, s)| format!("{i}\t{s}\n"))
            .collect()
    }

    pub fn id(&self, surface: &str) -> Option<TokenId> {
        self.ids.get(surface).copied()
    }

    pub fn surface(&self, id: TokenId) -> Option<&str> {
        self.surfaces.get(id.0 as usize).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.surfaces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.surfaces.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WordPair {
    pub word1: String,
    pub word2: String,
    pub gold: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct WordPairBenchmark {
    pub pairs: Vec<WordPair>,
}

impl WordPairBenchmark {
    /// Parses `word1<TAB>word2<TAB>score` lines; `#` comments and blank lines are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let [w1, w2, score] = fields[..] else {
                return Err(Error::Parse {
                    line: i + 1,
                    msg: format!("expected 3 tab-separated fields, found {}", fields.len()),
                });
            };
            let gold: f64 = score.trim().parse().map_err(|_| Error::Parse {
                line: i + 1,
                msg: format!("bad score `{score}`"),
            })?;
            if !gold.is_finite() {
                return Err(Error::Parse {
                    line: i + 1,
                    msg: "score must be finite".into(),
                });
            }
            pairs.push(WordPair {
                word1: w1.trim().to_string(),
                word2: w2.trim().to_string(),
                gold,
            });
        }
        Ok(Self { pairs })
    }

    pub fn read_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }
}

/// Fixed-k sense dictionary over word-averaged embeddings (cap 8000 per word).
pub fn build_word_senses(
    dim: usize,
    words: &[OccurrenceRecord],
    k: usize,
    seed: u64,
) -> Result<SenseDictionary> {
    let config = BuildConfig {
        mode: BuildMode::FixedK(KmeansConfig::with_k(k)),
        max_per_token: 8000,
        seed,
        dtype: Dtype::F32,
    };
    build_dictionary(dim, words, &config)
}

/// Largest dot product over all sense pairs.
pub fn word_similarity(a: &SenseSet, b: &SenseSet) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    let best = a
        .senses
        .iter()
        .flat_map(|s| b.senses.iter().map(move |t| dot(s, t)))
        .fold(f64::NEG_INFINITY, f64::max);
    if best == f64::NEG_INFINITY {
        return Err(Error::EmptyInput);
    }
    Ok(best)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PairScores {
    pub predicted: Vec<f64>,
    pub gold: Vec<f64>,
    /// Pairs dropped because a word is absent from the vocabulary or dictionary.
    pub missing: usize,
}

pub fn score_pairs(
    dict: &SenseDictionary,
    vocab: &WordVocabulary,
    bench: &WordPairBenchmark,
) -> PairScores {
    let lookup = |w: &str| vocab.id(w).and_then(|id| dict.get(id));
    let mut out = PairScores::default();
    for pair in &bench.pairs {
        let scored = match (lookup(&pair.word1), lookup(&pair.word2)) {
            (Some(a), Some(b)) => word_similarity(a, b).ok(),
            _ => None,
        };
        match scored {
            Some(s) => {
                out.predicted.push(s);
                out.gold.push(pair.gold);
            }
            None => out.missing += 1,
        }
    }
    out
}

/// 1-based ranks with ties sharing their average rank.
fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // Positions start..end hold ranks start+1..=end.
        let rank = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

/// Spearman's ρ as the Pearson correlation of average ranks.
pub fn spearman(pred: &[f64], gold: &[f64]) -> Result<f64> {
    if pred.len() != gold.len() {
        return Err(Error::LengthMismatch(pred.len(), gold.len()));
    }
    if pred.len() < 2 {
        return Err(Error::DegenerateInput("at least two pairs are required"));
    }
    if pred.iter().chain(gold).any(|v| !v.is_finite()) {
        return Err(Error::DegenerateInput("scores must be finite"));
    }
    let rx = average_ranks(pred);
    let ry = average_ranks(gold);
    let mean = (pred.len() + 1) as f64 / 2.0;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in rx.iter().zip(&ry) {
        let (dx, dy) = (x - mean, y - mean);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::DegenerateInput("constant score list"));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WordSimReport {
    pub pairs_scored: usize,
    pub pairs_missing: usize,
    pub spearman: Option<f64>,
}

/// Scores a benchmark and correlates; `spearman` is `None` when fewer than two
/// pairs could be scored or a side is constant.
pub fn evaluate(
    dict: &SenseDictionary,
    vocab: &WordVocabulary,
    bench: &WordPairBenchmark,
) -> WordSimReport {
    let scores = score_pairs(dict, vocab, bench);
    WordSimReport {
        pairs_scored: scores.predicted.len(),
        pairs_missing: scores.missing,
        spearman: spearman(&scores.predicted, &scores.gold).ok(),
    }
}
