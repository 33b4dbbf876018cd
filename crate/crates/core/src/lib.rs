//! Core processing stages for the newsflow business-news pipeline.
//!
//! The pipeline turns raw HTML news items into enriched, searchable documents:
//! content extraction and quality scoring ([`cleanse`]), online near-duplicate
//! tagging via a quantized text profile hashed with Nilsimsa ([`dedup`]),
//! company mention linking against a gazetteer ([`entline`]), per-category
//! event classification with logistic regression ([`events`]), and a faceted
//! inverted index with an HTTP query service ([`index`]).
//!
//! Everything here is a pure function of its inputs except the dedup register
//! and the index, which own their persistence and concurrency contracts.

pub mod cleanse;
pub mod config;
pub mod dedup;
pub mod entline;
pub mod events;
pub mod index;
pub mod item;
pub mod rng;
pub mod text;
