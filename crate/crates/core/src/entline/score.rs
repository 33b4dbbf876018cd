//! Disambiguation features: the heuristic company-NER score and the
//! confidence-weighted candidate ranking.

use std::collections::HashMap;

use crate::text::{tokenize, tokenize_spans, TokenSpan};

use super::gazetteer::normalize_suffix;
use super::spot::Mention;

/// Convex combination weights for (commonness, context similarity, NER score).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfidenceWeights {
    pub commonness: f64,
    pub context: f64,
    pub ner: f64,
}

impl Default for ConfidenceWeights {
    fn default() -> Self {
        Self {
            commonness: 0.5,
            context: 0.3,
            ner: 0.2,
        }
    }
}

impl ConfidenceWeights {
    pub fn validate(&self) -> Result<(), String> {
        let sum = self.commonness + self.context + self.ner;
        if (sum - 1.0).abs() > 1e-9 {
            return Err(format!("confidence weights must sum to 1, got {sum}"));
        }
        if self.commonness < 0.0 || self.context < 0.0 || self.ner < 0.0 {
            return Err("confidence weights must be non-negative".to_string());
        }
        Ok(())
    }
}

/// A scored candidate for one mention.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateAnnotation {
    pub mention: Mention,
    pub entity_id: String,
    pub commonness: f64,
    pub context_sim: f64,
    pub ner_score: f64,
    pub confidence: f64,
}

/// Heuristic company-NER score in [0,1]:
/// +0.4 when all mention tokens are capitalized (sentence-initial titlecase
/// alone does not count), +0.4 when a legal suffix occurs in the mention or
/// within the next two tokens, +0.2 when a cue word occurs within five tokens
/// of the mention.
pub fn ner_company_score(
    text: &str,
    mention: &Mention,
    cue_words: &[String],
    legal_suffixes: &[String],
) -> f64 {
    let tokens = tokenize_spans(text);
    ner_score_with_tokens(text, &tokens, mention, cue_words, legal_suffixes)
}

pub(crate) fn ner_score_with_tokens(
    text: &str,
    tokens: &[TokenSpan],
    mention: &Mention,
    cue_words: &[String],
    legal_suffixes: &[String],
) -> f64 {
    let first = tokens.partition_point(|t| t.end <= mention.start);
    let mut last = first;
    while last < tokens.len() && tokens[last].start < mention.end {
        last += 1;
    }
    if first >= last {
        return 0.0;
    }
    let mention_tokens = &tokens[first..last];

    let mut score = 0.0f64;
    if capitalization_credit(text, mention, mention_tokens) {
        score += 0.4;
    }

    let suffixes: Vec<String> = legal_suffixes.iter().map(|s| normalize_suffix(s)).collect();
    let after = &tokens[last..tokens.len().min(last + 2)];
    let has_suffix = mention_tokens
        .iter()
        .chain(after.iter())
        .any(|t| suffixes.contains(&normalize_suffix(t.surface(text))));
    if has_suffix {
        score += 0.4;
    }

    let cues: Vec<String> = cue_words.iter().map(|w| w.to_lowercase()).collect();
    let window_start = first.saturating_sub(5);
    let window_end = tokens.len().min(last + 5);
    let has_cue = tokens[window_start..first]
        .iter()
        .chain(tokens[last..window_end].iter())
        .any(|t| cues.contains(&t.surface(text).to_lowercase()));
    if has_cue {
        score += 0.2;
    }

    score.min(1.0)
}

/// All tokens start uppercase, discounting the forced titlecase of a single
/// token at a sentence start: "ACME" counts anywhere, "La" at a sentence
/// start does not.
fn capitalization_credit(text: &str, mention: &Mention, mention_tokens: &[TokenSpan]) -> bool {
    let all_capitalized = mention_tokens.iter().all(|t| {
        t.surface(text)
            .chars()
            .next()
            .is_some_and(|c| c.is_uppercase())
    });
    if !all_capitalized {
        return false;
    }
    if !at_sentence_start(text, mention.start) {
        return true;
    }
    if mention_tokens.len() >= 2 {
        return true;
    }
    mention_tokens[0]
        .surface(text)
        .chars()
        .skip(1)
        .any(|c| c.is_uppercase())
}

fn at_sentence_start(text: &str, offset: usize) -> bool {
    let before = text[..offset]
        .chars()
        .rev()
        .find(|c| !c.is_whitespace() && !matches!(c, '"' | '\'' | '«' | '»' | '(' | ')'));
    match before {
        None => true,
        Some(c) => matches!(c, '.' | '!' | '?' | ':' | ';'),
    }
}

/// Candidate features prior to confidence combination.
#[derive(Debug, Clone)]
pub struct ScoredCandidate {
    pub entity_id: String,
    pub commonness: f64,
    pub context_sim: f64,
    pub ner_score: f64,
}

/// Cosine similarity between a document term-frequency vector and an entity's
/// weighted context terms.
pub fn context_similarity(
    doc_terms: &HashMap<String, f64>,
    entity_terms: &HashMap<String, f64>,
) -> f64 {
    if doc_terms.is_empty() || entity_terms.is_empty() {
        return 0.0;
    }
    let mut dot = 0.0;
    for (term, w) in entity_terms {
        if let Some(dw) = doc_terms.get(term) {
            dot += w * dw;
        }
    }
    if dot == 0.0 {
        return 0.0;
    }
    let norm_doc: f64 = doc_terms.values().map(|w| w * w).sum::<f64>().sqrt();
    let norm_ent: f64 = entity_terms.values().map(|w| w * w).sum::<f64>().sqrt();
    dot / (norm_doc * norm_ent)
}

/// Term-frequency vector of a document body (uniform IDF; cosine is invariant
/// to uniform scaling).
pub fn doc_term_vector(text: &str) -> HashMap<String, f64> {
    let mut tf: HashMap<String, f64> = HashMap::new();
    for token in tokenize(text) {
        *tf.entry(token).or_insert(0.0) += 1.0;
    }
    tf
}

/// Picks the best candidate by confidence = clamp(λ1·commonness +
/// λ2·context_sim + λ3·ner, 0, 1). Ties break toward higher commonness, then
/// lexicographically smaller entity id. `candidates` must be non-empty.
pub fn disambiguate(
    mention: &Mention,
    candidates: &[ScoredCandidate],
    weights: &ConfidenceWeights,
) -> CandidateAnnotation {
    assert!(!candidates.is_empty(), "disambiguate needs candidates");
    let mut best: Option<(&ScoredCandidate, f64)> = None;
    for cand in candidates {
        let confidence = (weights.commonness * cand.commonness
            + weights.context * cand.context_sim
            + weights.ner * cand.ner_score)
            .clamp(0.0, 1.0);
        let better = match best {
            None => true,
            Some((b, bc)) => {
                confidence > bc
                    || (confidence == bc
                        && (cand.commonness > b.commonness
                            || (cand.commonness == b.commonness && cand.entity_id < b.entity_id)))
            }
        };
        if better {
            best = Some((cand, confidence));
        }
    }
    let (winner, confidence) = best.unwrap();
    CandidateAnnotation {
        mention: mention.clone(),
        entity_id: winner.entity_id.clone(),
        commonness: winner.commonness,
        context_sim: winner.context_sim,
        ner_score: winner.ner_score,
        confidence,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mention(text: &str, surface: &str) -> Mention {
        let start = text.find(surface).unwrap();
        Mention {
            start,
            end: start + surface.len(),
            surface: surface.to_string(),
            matched_alias: surface.to_lowercase(),
        }
    }

    fn default_cues() -> Vec<String> {
        ["azienda", "company", "società", "gruppo"]
            .iter()
            .map(|s| s.to_string())
            .collect()
    }

    fn default_sfx() -> Vec<String> {
        super::super::gazetteer::default_legal_suffixes()
    }

    #[test]
    fn capitalized_plus_suffix_scores_point_eight() {
        let text = "ACME S.p.A. announced cuts today";
        let m = mention(text, "ACME");
        let s = ner_company_score(text, &m, &default_cues(), &default_sfx());
        assert!((s - 0.8).abs() < 1e-12, "got {s}");
    }

    #[test]
    fn lowercase_mid_sentence_scores_zero() {
        let text = "una acme qualsiasi nel testo";
        let m = mention(text, "acme");
        let s = ner_company_score(text, &m, &default_cues(), &default_sfx());
        assert_eq!(s, 0.0);
    }

    #[test]
    fn capitalized_plus_cue_scores_point_six() {
        let text = "la società ACME ha vinto la gara";
        let m = mention(text, "ACME");
        let s = ner_company_score(text, &m, &default_cues(), &default_sfx());
        assert!((s - 0.6).abs() < 1e-12, "got {s}");
    }

    #[test]
    fn sentence_initial_titlecase_alone_gets_no_credit() {
        let text = "Acme vince la gara";
        let m = mention(text, "Acme");
        let s = ner_company_score(text, &m, &default_cues(), &default_sfx());
        assert_eq!(s, 0.0);
        // ...but an all-caps token does, even at the sentence start.
        let text2 = "ACME vince la gara";
        let m2 = mention(text2, "ACME");
        let s2 = ner_company_score(text2, &m2, &default_cues(), &default_sfx());
        assert!((s2 - 0.4).abs() < 1e-12);
    }

    #[test]
    fn score_caps_at_one() {
        let text = "la società ACME SpA ha assunto";
        let m = Mention {
            start: 11,
            end: dbg!(text.find("SpA").unwrap() + 3),
            surface: "ACME SpA".to_string(),
            matched_alias: "acme".to_string(),
        };
        let s = ner_company_score(text, &m, &default_cues(), &default_sfx());
        assert!((s - 1.0).abs() < 1e-12, "got {s}");
    }

    fn cand(id: &str, c: f64, sim: f64, ner: f64) -> ScoredCandidate {
        ScoredCandidate {
            entity_id: id.to_string(),
            commonness: c,
            context_sim: sim,
            ner_score: ner,
        }
    }

    #[test]
    fn commonness_dominates_when_other_features_tie() {
        let m = mention("testo con Delta dentro", "Delta");
        let w = ConfidenceWeights::default();
        let best = disambiguate(
            &m,
            &[cand("E1", 0.9, 0.2, 0.5), cand("E2", 0.1, 0.2, 0.5)],
            &w,
        );
        assert_eq!(best.entity_id, "E1");
    }

    #[test]
    fn context_breaks_commonness_tie() {
        let m = mention("testo con Delta dentro", "Delta");
        let w = ConfidenceWeights::default();
        let best = disambiguate(
            &m,
            &[cand("E1", 0.5, 0.1, 0.0), cand("E2", 0.5, 0.8, 0.0)],
            &w,
        );
        assert_eq!(best.entity_id, "E2");
    }

    #[test]
    fn winner_matches_brute_force_formula() {
        let m = mention("testo con Delta dentro", "Delta");
        let w = ConfidenceWeights {
            commonness: 0.4,
            context: 0.4,
            ner: 0.2,
        };
        let cands = vec![
            cand("E1", 0.30, 0.90, 0.1),
            cand("E2", 0.55, 0.40, 0.8),
            cand("E3", 0.15, 0.99, 0.9),
        ];
        let brute = cands
            .iter()
            .map(|c| {
                let conf =
                    (w.commonness * c.commonness + w.context * c.context_sim + w.ner * c.ner_score)
                        .clamp(0.0, 1.0);
                (c.entity_id.clone(), conf)
            })
            .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
            .unwrap();
        let best = disambiguate(&m, &cands, &w);
        assert_eq!(best.entity_id, brute.0);
        assert!((best.confidence - brute.1).abs() < 1e-12);
    }

    #[test]
    fn argmax_is_invariant_under_uniform_confidence_rescaling() {
        // Scaling all features by the same positive factor (before clamping
        // bites) cannot change the winner.
        let m = mention("testo con Delta dentro", "Delta");
        let w = ConfidenceWeights::default();
        let cands = vec![
            cand("E1", 0.4, 0.3, 0.2),
            cand("E2", 0.2, 0.6, 0.1),
            cand("E3", 0.3, 0.3, 0.3),
        ];
        let base = disambiguate(&m, &cands, &w);
        for scale in [0.25, 0.5, 2.0] {
            let scaled: Vec<ScoredCandidate> = cands
                .iter()
                .map(|c| {
                    cand(
                        &c.entity_id,
                        (c.commonness * scale).min(1.0),
                        (c.context_sim * scale).min(1.0),
                        (c.ner_score * scale).min(1.0),
                    )
                })
                .collect();
            let rescaled = disambiguate(&m, &scaled, &w);
            assert_eq!(rescaled.entity_id, base.entity_id, "scale {scale}");
        }
    }

    #[test]
    fn cosine_against_hand_computed_value() {
        let mut doc = HashMap::new();
        doc.insert("mercato".to_string(), 2.0);
        doc.insert("fusione".to_string(), 1.0);
        let mut ent = HashMap::new();
        ent.insert("mercato".to_string(), 1.0);
        ent.insert("borsa".to_string(), 1.0);
        // dot = 2, |doc| = sqrt(5), |ent| = sqrt(2)
        let expected = 2.0 / (5.0f64.sqrt() * 2.0f64.sqrt());
        assert!((context_similarity(&doc, &ent) - expected).abs() < 1e-12);
    }
}
