//! Quantized term-profile signatures.
//!
//! A text profile keeps each token with its frequency rounded down to a
//! multiple of a document-relative quantum, dropping tokens that quantize to
//! zero. Near-duplicate documents — small edits, low-frequency noise — thus
//! collapse to the same canonical string, which is what gets hashed into the
//! dedup code.

use crate::text::tokenize;
use std::collections::HashMap;

/// Ordered token/quantized-frequency entries plus their canonical rendering.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TextProfile {
    /// Sorted by quantized frequency descending, then token ascending.
    pub entries: Vec<(String, u64)>,
    /// Entries joined as `token:qfreq` with single spaces.
    pub canonical_string: String,
}

impl TextProfile {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Builds the profile for a body of text.
///
/// The quantum is `max(min_quant, floor(max_token_freq * quant_rate))`; each
/// token's frequency is floored to a multiple of the quantum and zero entries
/// are dropped. `quant_rate` must lie in (0, 1] and `min_quant` be at least 2.
pub fn build_profile(body: &str, quant_rate: f64, min_quant: u64) -> TextProfile {
    debug_assert!(quant_rate > 0.0 && quant_rate <= 1.0);
    debug_assert!(min_quant >= 2);
    let mut freqs: HashMap<String, u64> = HashMap::new();
    for token in tokenize(body) {
        *freqs.entry(token).or_insert(0) += 1;
    }
    let max_freq = freqs.values().copied().max().unwrap_or(0);
    let quant = min_quant.max((max_freq as f64 * quant_rate).floor() as u64);
    let mut entries: Vec<(String, u64)> = freqs
        .into_iter()
        .filter_map(|(token, freq)| {
            let q = (freq / quant) * quant;
            (q > 0).then_some((token, q))
        })
        .collect();
    entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    let canonical_string = entries
        .iter()
        .map(|(t, q)| format!("{t}:{q}"))
        .collect::<Vec<_>>()
        .join(" ");
    TextProfile {
        entries,
        canonical_string,
    }
}
