//! The multi-sense dictionary: per-token sense vectors with occupancy counts.

mod build;
mod io;
mod stats;

pub use build::{
    build_dictionary, build_dictionary_with_threads, build_sense_set, BuildConfig, BuildMode,
};
pub use io::{deserialize, read_file, serialize, serialized_len, to_bytes, write_file, MAGIC};
pub use stats::{estimate_active_memory, stats, DictStats};

use std::collections::BTreeMap;

use crate::{argmax, dot, Dtype, Embedding, Error, Result, TokenId};

/// Flag bit recorded when senses were sized by the adaptive MCL policy.
pub const FLAG_ADAPTIVE: u32 = 1;

/// Senses of one token, ordered by descending occupancy.
#[derive(Debug, Clone, PartialEq)]
pub struct SenseSet {
    pub token: TokenId,
    pub senses: Vec<Embedding>,
    pub counts: Vec<u32>,
    /// Occurrences of the token in the source corpus.
    pub total: u64,
}

impl SenseSet {
    pub fn len(&self) -> usize {
        self.senses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.senses.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.senses.first().map_or(0, Vec::len)
    }

    /// Index of the sense with the largest dot product; ties go to the lowest index.
    pub fn nearest(&self, query: &[f64]) -> Result<usize> {
        if query.len() != self.dim() {
            return Err(Error::DimMismatch {
                expected: self.dim(),
                got: query.len(),
            });
        }
        Ok(argmax(self.senses.iter().map(|s| dot(s, query))).unwrap_or(0))
    }

    /// Senses that do not retrieve themselves when used as a query.
    ///
    /// Replacement is idempotent exactly when this is zero for every token.
    pub fn non_self_dominant(&self) -> usize {
        self.senses
            .iter()
            .enumerate()
            .filter(|(i, s)| argmax(self.senses.iter().map(|o| dot(s, o))) != Some(*i))
            .count()
    }
}

/// Result of a successful dictionary lookup.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SenseMatch<'a> {
    pub index: usize,
    pub sense: &'a [f64],
}

#[derive(Debug, Clone, PartialEq)]
pub struct SenseDictionary {
    pub dim: usize,
    pub dtype: Dtype,
    pub seed: u64,
    pub flags: u32,
    pub entries: BTreeMap<TokenId, SenseSet>,
}

impl SenseDictionary {
    pub fn new(dim: usize, dtype: Dtype) -> Self {
        Self {
            dim,
            dtype,
            seed: 0,
            flags: 0,
            entries: BTreeMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, token: TokenId) -> Option<&SenseSet> {
        self.entries.get(&token)
    }

    /// Inserts a sense set after checking its shape against the dictionary.
    pub fn insert(&mut self, set: SenseSet) -> Result<()> {
        if set.is_empty() || set.counts.len() != set.senses.len() {
            return Err(Error::InvalidConfig(format!(
                "sense set for token {} has {} senses and {} counts",
                set.token,
                set.senses.len(),
                set.counts.len()
            )));
        }
        if let Some(s) = set.senses.iter().find(|s| s.len() != self.dim) {
            return Err(Error::DimMismatch {
                expected: self.dim,
                got: s.len(),
            });
        }
        self.entries.insert(set.token, set);
        Ok(())
    }
}

/// Selects the sense of `token` maximizing the dot product with `query`.
///
/// `Ok(None)` signals a token absent from the dictionary; callers decide the
/// fallback.
pub fn nearest_sense<'a>(
    dict: &'a SenseDictionary,
    token: TokenId,
    query: &[f64],
) -> Result<Option<SenseMatch<'a>>> {
    if query.len() != dict.dim {
        return Err(Error::DimMismatch {
            expected: dict.dim,
            got: query.len(),
        });
    }
    let Some(set) = dict.get(token) else {
        return Ok(None);
    };
    let index = set.nearest(query)?;
    Ok(Some(SenseMatch {
        index,
        sense: &set.senses[index],
    }))
}
