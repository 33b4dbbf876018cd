//! Mention spotting: greedy leftmost-longest alias matching over token
//! n-grams.

use crate::text::{tokenize_spans, TokenSpan};

use super::gazetteer::Gazetteer;

/// A surface span matched to a gazetteer alias, before disambiguation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mention {
    /// Byte offset of the first matched character.
    pub start: usize,
    /// Byte offset one past the last matched character.
    pub end: usize,
    pub surface: String,
    /// The alias dictionary key that matched.
    pub matched_alias: String,
}

/// Greedy longest-match spotting, left to right, non-overlapping. At each
/// token position the longest n-gram (up to `max_ngram`) with a gazetteer hit
/// wins and scanning resumes past it.
pub fn spot_mentions(text: &str, gazetteer: &Gazetteer, max_ngram: usize) -> Vec<Mention> {
    let tokens = tokenize_spans(text);
    spot_in_tokens(text, &tokens, gazetteer, max_ngram)
}

pub(crate) fn spot_in_tokens(
    text: &str,
    tokens: &[TokenSpan],
    gazetteer: &Gazetteer,
    max_ngram: usize,
) -> Vec<Mention> {
    let mut mentions = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        let mut matched = None;
        let longest = max_ngram.min(tokens.len() - i);
        for n in (1..=longest).rev() {
            let start = tokens[i].start;
            let end = tokens[i + n - 1].end;
            let surface = &text[start..end];
            if let Some((key, _)) = gazetteer.candidates(surface) {
                matched = Some((n, start, end, surface.to_string(), key.to_string()));
                break;
            }
        }
        match matched {
            Some((n, start, end, surface, key)) => {
                mentions.push(Mention {
                    start,
                    end,
                    surface,
                    matched_alias: key,
                });
                i += n;
            }
            None => i += 1,
        }
    }
    mentions
}
