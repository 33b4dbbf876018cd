//! Shared tokenization and stopword lists.
//!
//! One tokenizer feeds the dedup profile, the classifier features and the
//! search index so that "term" means the same thing everywhere: a maximal run
//! of alphanumeric characters, lowercased.

/// Lowercased alphanumeric tokens, in document order.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    for ch in text.chars() {
        if ch.is_alphanumeric() {
            for lc in ch.to_lowercase() {
                current.push(lc);
            }
        } else if !current.is_empty() {
            tokens.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

/// Byte-offset span of a token within the original text.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TokenSpan {
    pub start: usize,
    pub end: usize,
}

impl TokenSpan {
    pub fn surface<'a>(&self, text: &'a str) -> &'a str {
        &text[self.start..self.end]
    }
}

/// Token spans for mention spotting. A token is a run of alphanumerics that
/// may contain `.`, `'`, `-` or `&` when the next character is alphanumeric
/// again, so "S.p.A" and "dell'azienda" stay single tokens while a sentence
/// period does not glue onto the word before it.
pub fn tokenize_spans(text: &str) -> Vec<TokenSpan> {
    let bytes: Vec<(usize, char)> = text.char_indices().collect();
    let mut spans = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        if !bytes[i].1.is_alphanumeric() {
            i += 1;
            continue;
        }
        let start = bytes[i].0;
        let mut j = i;
        loop {
            let ch = bytes[j].1;
            let next = bytes.get(j + 1).map(|&(_, c)| c);
            let continues = match next {
                Some(n) if n.is_alphanumeric() => true,
                Some(n) => {
                    matches!(n, '.' | '\'' | '-' | '&')
                        && bytes.get(j + 2).map(|&(_, c)| c.is_alphanumeric()) == Some(true)
                }
                None => false,
            };
            let _ = ch;
            if continues {
                j += 1;
            } else {
                break;
            }
        }
        let end = bytes[j].0 + bytes[j].1.len_utf8();
        spans.push(TokenSpan { start, end });
        i = j + 1;
    }
    spans
}

/// Small Italian stopword list; enough to keep function words out of
/// classifier features.
pub const STOPWORDS_IT: &[&str] = &[
    "a", "ad", "al", "alla", "alle", "allo", "anche", "che", "chi", "ci", "come", "con", "cui",
    "da", "dal", "dalla", "degli", "dei", "del", "della", "delle", "dello", "di", "dopo", "e",
    "ed", "era", "fra", "gli", "ha", "hanno", "il", "in", "la", "le", "lo", "loro", "ma", "nel",
    "nella", "non", "o", "per", "piu", "però", "quella", "quelle", "questo", "se", "si", "sono",
    "su", "sua", "sul", "sulla", "tra", "un", "una", "uno",
];

/// Small English stopword list.
pub const STOPWORDS_EN: &[&str] = &[
    "a", "an", "and", "are", "as", "at", "be", "been", "but", "by", "for", "from", "has", "have",
    "in", "is", "it", "its", "of", "on", "or", "that", "the", "their", "this", "to", "was", "were",
    "which", "with",
];
