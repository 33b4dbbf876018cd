//! Online near-duplicate detection.
//!
//! An item's body is reduced to a quantized [`TextProfile`], the profile's
//! canonical string is hashed with [`nilsimsa`], and the full digest hex is
//! the item's dedup code. An item is a duplicate iff another item with the
//! same code was recorded in the register before it — checked and recorded in
//! one atomic step so exactly one of any set of concurrent holders of a fresh
//! code wins.

pub mod nilsimsa;
pub mod profile;
pub mod register;

use serde::{Deserialize, Serialize};

pub use nilsimsa::{hamming_similarity, nilsimsa_digest, NilsimsaDigest};
pub use profile::{build_profile, TextProfile};
pub use register::{DedupRegister, RegisterError};

/// Dedup tuning knobs; the register path lives in the pipeline config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DedupParams {
    pub quant_rate: f64,
    pub min_quant: u64,
}

impl Default for DedupParams {
    fn default() -> Self {
        Self {
            quant_rate: 0.01,
            min_quant: 2,
        }
    }
}

/// Hex of the 256-bit digest of a profile's canonical string.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DedupCode(pub String);

impl DedupCode {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl std::fmt::Display for DedupCode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

/// Derives the dedup code from a text profile.
pub fn dedup_code(profile: &TextProfile) -> DedupCode {
    DedupCode(nilsimsa_digest(profile.canonical_string.as_bytes()).to_hex())
}

/// Convenience: body straight to code with the given parameters.
pub fn code_for_body(body: &str, params: &DedupParams) -> DedupCode {
    dedup_code(&build_profile(body, params.quant_rate, params.min_quant))
}

/// Outcome of a register check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DedupVerdict {
    pub is_duplicate: bool,
    /// Set iff `is_duplicate`: the item that recorded the code first.
    pub original_item_id: Option<String>,
}

impl DedupVerdict {
    pub fn original() -> Self {
        Self {
            is_duplicate: false,
            original_item_id: None,
        }
    }

    pub fn duplicate_of(original: &str) -> Self {
        Self {
            is_duplicate: true,
            original_item_id: Some(original.to_string()),
        }
    }
}

/// Checks `code` against the register and records it when fresh.
///
/// A code already held by the *same* item id is not a duplicate: that is the
/// same item coming around again on a redelivered chunk, and reprocessing must
/// stay idempotent.
pub fn check_and_record(
    register: &DedupRegister,
    code: &DedupCode,
    item_id: &str,
) -> Result<DedupVerdict, RegisterError> {
    match register.put_if_absent(code.as_str(), item_id)? {
        None => Ok(DedupVerdict::original()),
        Some(existing) if existing == item_id => Ok(DedupVerdict::original()),
        Some(existing) => Ok(DedupVerdict::duplicate_of(&existing)),
    }
}
