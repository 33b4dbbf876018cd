//! News item records as they move through the pipeline, plus the stable
//! 128-bit item id that makes reprocessing idempotent.

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A news item as delivered inside a data chunk: one JSON object per line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawNewsItem {
    pub source_url: String,
    pub source_name: String,
    pub fetched_at: DateTime<Utc>,
    pub html: String,
    /// Title declared by the feed, if any.
    #[serde(default, rename = "title", skip_serializing_if = "Option::is_none")]
    pub declared_title: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub language: Option<String>,
}

#[derive(Debug, Error, PartialEq)]
pub enum ItemError {
    #[error("source_url is empty")]
    EmptyUrl,
    #[error("source_url is not an absolute URL: {0}")]
    NotAbsoluteUrl(String),
}

impl RawNewsItem {
    /// Checks the record-level invariants: non-empty absolute source URL.
    pub fn validate(&self) -> Result<(), ItemError> {
        if self.source_url.is_empty() {
            return Err(ItemError::EmptyUrl);
        }
        let Some((scheme, rest)) = self.source_url.split_once("://") else {
            return Err(ItemError::NotAbsoluteUrl(self.source_url.clone()));
        };
        let scheme_ok = !scheme.is_empty()
            && scheme
                .chars()
                .next()
                .is_some_and(|c| c.is_ascii_alphabetic())
            && scheme
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || matches!(c, '+' | '-' | '.'));
        if !scheme_ok || rest.is_empty() {
            return Err(ItemError::NotAbsoluteUrl(self.source_url.clone()));
        }
        Ok(())
    }

    /// Deterministic item id for this record.
    pub fn item_id(&self) -> String {
        item_id(&self.source_url, &self.html)
    }
}

/// A news item after content extraction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CleanNewsItem {
    pub item_id: String,
    pub source_url: String,
    pub source_name: String,
    pub fetched_at: DateTime<Utc>,
    pub language: Option<String>,
    pub title: String,
    /// Plain text, blocks separated by single blank lines, no markup.
    pub body: String,
}

const FNV128_OFFSET: u128 = 0x6c62_272e_07bb_0142_62b8_2175_6295_c58d;
const FNV128_PRIME: u128 = 0x0000_0000_0100_0000_0000_0000_0000_013b;

/// FNV-1a over 128 bits; stable across platforms and releases.
fn fnv1a128(parts: &[&[u8]]) -> u128 {
    let mut hash = FNV128_OFFSET;
    for part in parts {
        for &byte in *part {
            hash ^= byte as u128;
            hash = hash.wrapping_mul(FNV128_PRIME);
        }
    }
    hash
}

/// Deterministic item id: hex of a 128-bit hash over the source URL and a
/// digest of the raw content. Identical (url, html) pairs always map to the
/// same id, which is what makes chunk reprocessing an idempotent upsert.
pub fn item_id(source_url: &str, html: &str) -> String {
    let content_digest = fnv1a128(&[html.as_bytes()]).to_be_bytes();
    let id = fnv1a128(&[source_url.as_bytes(), &[0u8], &content_digest]);
    format!("{id:032x}")
}
