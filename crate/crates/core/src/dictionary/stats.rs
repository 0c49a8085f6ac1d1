use std::collections::BTreeMap;

use serde::Serialize;

use super::{serialized_len, SenseDictionary};

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct DictStats {
    pub token_count: usize,
    pub total_senses: usize,
    /// Number of tokens per sense count.
    pub sense_histogram: BTreeMap<usize, usize>,
    pub max_senses: usize,
    pub tokens_at_max: usize,
    pub storage_bytes: u64,
    /// Senses that retrieve some other sense of their token under dot-product lookup.
    pub non_self_dominant: usize,
}

pub fn stats(dict: &SenseDictionary) -> DictStats {
    if dict.is_empty() {
        return DictStats::default();
    }
    let mut s = DictStats {
        token_count: dict.len(),
        storage_bytes: serialized_len(dict),
        ..Default::default()
    };
    for set in dict.entries.values() {
        *s.sense_histogram.entry(set.len()).or_default() += 1;
        s.total_senses += set.len();
        s.non_self_dominant += set.non_self_dominant();
    }
    s.max_senses = s.sense_histogram.keys().next_back().copied().unwrap_or(0);
    s.tokens_at_max = s.sense_histogram.get(&s.max_senses).copied().unwrap_or(0);
    s
}

/// Worst-case bytes of sense vectors resident for one context window: every
/// position a distinct token holding `k` senses.
pub fn estimate_active_memory(context_len: u64, dim: u64, k: u64, bytes_per_value: u64) -> u64 {
    context_len
        .saturating_mul(k)
        .saturating_mul(dim)
        .saturating_mul(bytes_per_value)
}
