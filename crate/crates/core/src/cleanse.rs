//! HTML content extraction and quality measures.
//!
//! The extractor is deliberately dependency-free and deterministic: a lenient
//! tokenizer walks the markup, invisible sections (head, script, style, nav,
//! comments) are dropped, text is decoded and whitespace-normalized into
//! block-level chunks, and the article body is the largest contiguous run of
//! blocks whose own text/(text+markup) ratio clears a threshold. Markup that
//! cannot be tokenized to the end degrades to a plain tag strip instead of
//! failing.

use serde::{Deserialize, Serialize};

use crate::item::{CleanNewsItem, RawNewsItem};

/// Thresholds deciding whether an extracted item is "good".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CleanseConfig {
    /// Minimum body length in characters.
    pub min_content_length: usize,
    /// Minimum body share of the document's visible+markup characters.
    pub min_text_density: f64,
    pub require_title: bool,
    /// Per-block text/(text+markup) ratio below which a block is boilerplate.
    pub block_density_threshold: f64,
}

impl Default for CleanseConfig {
    fn default() -> Self {
        Self {
            min_content_length: 350,
            min_text_density: 0.25,
            require_title: true,
            block_density_threshold: 0.25,
        }
    }
}

/// Quality measures for one extracted item. `is_good` is a pure function of
/// the other fields and the configured thresholds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityMeasures {
    pub content_length: usize,
    pub text_density: f64,
    pub paragraph_count: usize,
    pub has_title: bool,
    pub extraction_degraded: bool,
    pub is_good: bool,
}

/// The goodness rule, exposed separately so the monotonicity contract is
/// testable in isolation.
pub fn goodness(
    content_length: usize,
    text_density: f64,
    has_title: bool,
    cfg: &CleanseConfig,
) -> bool {
    content_length >= cfg.min_content_length
        && text_density >= cfg.min_text_density
        && (!cfg.require_title || has_title)
}

/// Extracts title and plain-text body from a raw item. Never fails: HTML the
/// tokenizer cannot take apart degrades to a tag-stripped body, and the
/// degradation is visible in [`compute_measures`].
pub fn extract_content(raw: &RawNewsItem, cfg: &CleanseConfig) -> CleanNewsItem {
    let parse = parse_html(&raw.html);
    let body = if parse.degraded {
        strip_tags(&raw.html)
    } else {
        select_body(&parse.blocks, cfg.block_density_threshold)
    };
    let title = raw
        .declared_title
        .as_deref()
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .or(parse.first_heading)
        .unwrap_or_default();
    CleanNewsItem {
        item_id: raw.item_id(),
        source_url: raw.source_url.clone(),
        source_name: raw.source_name.clone(),
        fetched_at: raw.fetched_at,
        language: raw.language.clone(),
        title,
        body,
    }
}

/// Quality measures for a clean item produced from `raw` with the same config.
pub fn compute_measures(
    clean: &CleanNewsItem,
    raw: &RawNewsItem,
    cfg: &CleanseConfig,
) -> QualityMeasures {
    let parse = parse_html(&raw.html);
    let content_length = clean.body.chars().count();
    let (visible, markup) = if parse.degraded {
        let total = raw.html.chars().count();
        (content_length, total.saturating_sub(content_length))
    } else {
        (parse.visible_chars, parse.markup_chars)
    };
    let denom = visible + markup;
    let text_density = if denom == 0 {
        0.0
    } else {
        (content_length as f64 / denom as f64).min(1.0)
    };
    let paragraph_count = if clean.body.is_empty() {
        0
    } else {
        clean.body.split("\n\n").count()
    };
    let has_title = !clean.title.is_empty();
    QualityMeasures {
        content_length,
        text_density,
        paragraph_count,
        has_title,
        extraction_degraded: parse.degraded,
        is_good: goodness(content_length, text_density, has_title, cfg),
    }
}

// --- parsing ---------------------------------------------------------------

/// Elements whose entire content is invisible and skipped.
const SKIP_CONTAINERS: &[&str] = &["script", "style", "nav", "head"];

/// Tags that terminate the current text block.
const BLOCK_TAGS: &[&str] = &[
    "address",
    "article",
    "aside",
    "blockquote",
    "body",
    "br",
    "caption",
    "dd",
    "div",
    "dl",
    "dt",
    "fieldset",
    "figcaption",
    "figure",
    "footer",
    "form",
    "h1",
    "h2",
    "h3",
    "h4",
    "h5",
    "h6",
    "header",
    "hr",
    "html",
    "li",
    "main",
    "ol",
    "p",
    "pre",
    "section",
    "table",
    "tbody",
    "td",
    "tfoot",
    "th",
    "thead",
    "title",
    "tr",
    "ul",
];

struct Block {
    text: String,
    chars: usize,
    markup_chars: usize,
}

struct Parse {
    blocks: Vec<Block>,
    first_heading: Option<String>,
    degraded: bool,
    visible_chars: usize,
    markup_chars: usize,
}

struct Parser<'a> {
    html: &'a str,
    blocks: Vec<Block>,
    cur_text: String,
    cur_markup: usize,
    pending_space: bool,
    visible_chars: usize,
    markup_chars: usize,
    first_heading: Option<String>,
    heading_open: Option<String>,
    heading_buf: String,
    degraded: bool,
}

fn parse_html(html: &str) -> Parse {
    let mut p = Parser {
        html,
        blocks: Vec::new(),
        cur_text: String::new(),
        cur_markup: 0,
        pending_space: false,
        visible_chars: 0,
        markup_chars: 0,
        first_heading: None,
        heading_open: None,
        heading_buf: String::new(),
        degraded: false,
    };
    p.run();
    Parse {
        blocks: p.blocks,
        first_heading: p.first_heading,
        degraded: p.degraded,
        visible_chars: p.visible_chars,
        markup_chars: p.markup_chars,
    }
}

impl<'a> Parser<'a> {
    fn run(&mut self) {
        let mut pos = 0;
        let len = self.html.len();
        while pos < len {
            let rest = &self.html[pos..];
            if !rest.starts_with('<') {
                let next = rest.find('<').map(|o| pos + o).unwrap_or(len);
                // Copy out of self.html to release the borrow for emit_text.
                let segment: String = self.html[pos..next].to_string();
                self.emit_text(&segment);
                pos = next;
                continue;
            }
            if rest.starts_with("<!--") {
                match rest.find("-->") {
                    Some(end) => {
                        self.count_markup(&rest[..end + 3]);
                        pos += end + 3;
                    }
                    None => {
                        self.degraded = true;
                        self.count_markup(rest);
                        pos = len;
                    }
                }
            } else if let Some(name) = skip_container_at(rest) {
                match find_container_end(rest, name) {
                    Some(end) => {
                        self.count_markup(&rest[..end]);
                        pos += end;
                    }
                    None => {
                        self.degraded = true;
                        self.count_markup(rest);
                        pos = len;
                    }
                }
            } else if rest.starts_with("<!") || rest.starts_with("<?") {
                match rest.find('>') {
                    Some(end) => {
                        self.count_markup(&rest[..end + 1]);
                        pos += end + 1;
                    }
                    None => {
                        self.degraded = true;
                        self.count_markup(rest);
                        pos = len;
                    }
                }
            } else if tag_starts_at(rest) {
                match rest.find('>') {
                    Some(end) => {
                        let raw_tag = &rest[..end + 1];
                        self.count_markup(raw_tag);
                        self.handle_tag(raw_tag);
                        pos += end + 1;
                    }
                    None => {
                        self.degraded = true;
                        self.count_markup(rest);
                        pos = len;
                    }
                }
            } else {
                // A lone '<' that opens no construct is literal text.
                self.emit_char('<');
                pos += 1;
            }
        }
        self.flush_block();
    }

    fn handle_tag(&mut self, raw_tag: &str) {
        let inner = raw_tag.trim_start_matches('<').trim_end_matches('>');
        let is_close = inner.starts_with('/');
        let name: String = inner
            .trim_start_matches('/')
            .chars()
            .take_while(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        if name.is_empty() {
            return;
        }
        if BLOCK_TAGS.contains(&name.as_str()) {
            self.flush_block();
        }
        let is_heading = matches!(name.as_str(), "h1" | "h2" | "h3" | "h4" | "h5" | "h6");
        if is_heading {
            if !is_close && self.first_heading.is_none() && self.heading_open.is_none() {
                self.heading_open = Some(name);
                self.heading_buf.clear();
            } else if is_close && self.heading_open.as_deref() == Some(name.as_str()) {
                let captured = self.heading_buf.trim();
                if !captured.is_empty() && self.first_heading.is_none() {
                    self.first_heading = Some(captured.to_string());
                }
                self.heading_open = None;
            }
        }
    }

    fn count_markup(&mut self, segment: &str) {
        self.cur_markup += segment.chars().count();
    }

    fn emit_text(&mut self, segment: &str) {
        let mut i = 0;
        while i < segment.len() {
            let rest = &segment[i..];
            let ch = rest.chars().next().unwrap();
            if ch == '&' {
                if let Some((decoded, consumed)) = decode_entity(rest) {
                    self.emit_char(decoded);
                    i += consumed;
                    continue;
                }
            }
            self.emit_char(ch);
            i += ch.len_utf8();
        }
    }

    fn emit_char(&mut self, c: char) {
        if c.is_whitespace() {
            self.pending_space = true;
            return;
        }
        if self.pending_space {
            if !self.cur_text.is_empty() {
                self.cur_text.push(' ');
            }
            if self.heading_open.is_some() && !self.heading_buf.is_empty() {
                self.heading_buf.push(' ');
            }
            self.pending_space = false;
        }
        self.cur_text.push(c);
        if self.heading_open.is_some() {
            self.heading_buf.push(c);
        }
    }

    fn flush_block(&mut self) {
        self.pending_space = false;
        let text = std::mem::take(&mut self.cur_text);
        let markup = std::mem::take(&mut self.cur_markup);
        self.markup_chars += markup;
        if text.is_empty() {
            return;
        }
        let chars = text.chars().count();
        self.visible_chars += chars;
        self.blocks.push(Block {
            text,
            chars,
            markup_chars: markup,
        });
    }
}

fn tag_starts_at(rest: &str) -> bool {
    let mut chars = rest.chars();
    let _lt = chars.next();
    match chars.next() {
        Some('/') => chars.next().is_some_and(|c| c.is_ascii_alphabetic()),
        Some(c) => c.is_ascii_alphabetic(),
        None => false,
    }
}

/// Returns the container name if `rest` opens a skip container like
/// `<script ...>`; boundary-checked so `<header>` does not match `head`.
fn skip_container_at(rest: &str) -> Option<&'static str> {
    for name in SKIP_CONTAINERS {
        let open_len = 1 + name.len();
        if rest.len() >= open_len
            && rest[1..open_len].eq_ignore_ascii_case(name)
            && rest[open_len..]
                .chars()
                .next()
                .is_none_or(|c| c == '>' || c == '/' || c.is_whitespace())
        {
            return Some(name);
        }
    }
    None
}

/// Byte offset just past `</name ...>` for a skip container, case-insensitive.
fn find_container_end(rest: &str, name: &str) -> Option<usize> {
    let close = format!("</{name}");
    let lower = rest.to_ascii_lowercase();
    let mut search_from = 0;
    loop {
        let at = lower[search_from..].find(&close)? + search_from;
        let after = lower[at + close.len()..].chars().next();
        if after.is_none_or(|c| c == '>' || c.is_whitespace()) {
            let gt = rest[at..].find('>')? + at;
            return Some(gt + 1);
        }
        search_from = at + close.len();
    }
}

fn decode_entity(rest: &str) -> Option<(char, usize)> {
    let semi = rest[..rest.len().min(12)].find(';')?;
    let body = &rest[1..semi];
    let decoded = if let Some(num) = body.strip_prefix('#') {
        let value = if let Some(hex) = num.strip_prefix('x').or_else(|| num.strip_prefix('X')) {
            u32::from_str_radix(hex, 16).ok()?
        } else {
            num.parse::<u32>().ok()?
        };
        char::from_u32(value)?
    } else {
        match body {
            "amp" => '&',
            "lt" => '<',
            "gt" => '>',
            "quot" => '"',
            "apos" => '\'',
            "nbsp" => ' ',
            _ => return None,
        }
    };
    Some((decoded, semi + 1))
}

/// Largest contiguous run of blocks that clear the density threshold, joined
/// with blank lines.
fn select_body(blocks: &[Block], threshold: f64) -> String {
    let kept: Vec<bool> = blocks
        .iter()
        .map(|b| {
            let denom = (b.chars + b.markup_chars) as f64;
            b.chars as f64 / denom >= threshold
        })
        .collect();
    let mut best: Option<(usize, usize, usize)> = None; // (start, end, text chars)
    let mut i = 0;
    while i < blocks.len() {
        if !kept[i] {
            i += 1;
            continue;
        }
        let start = i;
        let mut total = 0;
        while i < blocks.len() && kept[i] {
            total += blocks[i].chars;
            i += 1;
        }
        if best.is_none_or(|(_, _, t)| total > t) {
            best = Some((start, i, total));
        }
    }
    match best {
        Some((start, end, _)) => blocks[start..end]
            .iter()
            .map(|b| b.text.as_str())
            .collect::<Vec<_>>()
            .join("\n\n"),
        None => String::new(),
    }
}

/// Fallback for markup the tokenizer cannot terminate: drop `<...>` spans,
/// decode entities, collapse whitespace.
fn strip_tags(html: &str) -> String {
    let mut out = String::new();
    let mut pending_space = false;
    let mut emit = |c: char| {
        if c.is_whitespace() {
            pending_space = true;
            return;
        }
        if pending_space && !out.is_empty() {
            out.push(' ');
        }
        pending_space = false;
        out.push(c);
    };
    let mut i = 0;
    while i < html.len() {
        let rest = &html[i..];
        let ch = rest.chars().next().unwrap();
        if ch == '<' {
            match rest.find('>') {
                Some(end) => i += end + 1,
                None => break,
            }
            continue;
        }
        if ch == '&' {
            if let Some((decoded, consumed)) = decode_entity(rest) {
                emit(decoded);
                i += consumed;
                continue;
            }
        }
        emit(ch);
        i += ch.len_utf8();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn raw_with(html: &str, title: Option<&str>) -> RawNewsItem {
        RawNewsItem {
            source_url: "https://news.example/a".to_string(),
            source_name: "test".to_string(),
            fetched_at: "2016-07-17T00:00:00Z".parse().unwrap(),
            html: html.to_string(),
            declared_title: title.map(str::to_string),
            language: None,
        }
    }

    #[test]
    fn script_content_removed() {
        let raw = raw_with(
            "<html><body><p>Hello world</p><script>x()</script></body></html>",
            None,
        );
        let clean = extract_content(&raw, &CleanseConfig::default());
        assert_eq!(clean.body, "Hello world");
    }

    #[test]
    fn empty_html_yields_empty_body_and_declared_title() {
        let cfg = CleanseConfig::default();
        let clean = extract_content(&raw_with("", Some("Titolo")), &cfg);
        assert_eq!(clean.body, "");
        assert_eq!(clean.title, "Titolo");
        let clean = extract_content(&raw_with("", None), &cfg);
        assert_eq!(clean.title, "");
    }

    #[test]
    fn title_falls_back_to_first_heading() {
        let raw = raw_with("<h2>Prima</h2><h1>Seconda</h1><p>testo</p>", None);
        let clean = extract_content(&raw, &CleanseConfig::default());
        assert_eq!(clean.title, "Prima");
    }

    #[test]
    fn boilerplate_page_keeps_article_div() {
        // Hand-applied rule: the menu and footer blocks are markup-heavy and
        // fall below the 0.25 block density; the two article paragraphs pass
        // and form the largest contiguous run.
        let para1 = "Il consiglio di amministrazione ha approvato il piano industriale. "
            .repeat(8)
            .trim_end()
            .to_string();
        let para2 = "La nota della direzione conferma le cifre del trimestre.";
        let html = format!(
            "<html><head><title>Portale Notizie</title></head><body>\
             <nav><a href=\"/\">Home</a><a href=\"/economia\">Economia</a></nav>\
             <div id=\"menu\"><a href=\"/aa\">A</a> <a href=\"/bb\">B</a> <a href=\"/cc\">C</a></div>\
             <div class=\"articolo\"><p>{para1}</p><p>{para2}</p></div>\
             <footer><a href=\"/privacy\">Privacy</a> <a href=\"/termini\">Termini</a></footer>\
             </body></html>"
        );
        let clean = extract_content(&raw_with(&html, None), &CleanseConfig::default());
        assert_eq!(clean.body, format!("{para1}\n\n{para2}"));
    }

    #[test]
    fn nav_and_head_content_never_reach_the_body() {
        let html = "<head><title>SiteName</title></head>\
                    <nav>Home Economia Sport</nav><p>contenuto vero dell'articolo</p>";
        let clean = extract_content(&raw_with(html, None), &CleanseConfig::default());
        assert_eq!(clean.body, "contenuto vero dell'articolo");
    }

    #[test]
    fn entities_decoded_and_whitespace_normalized() {
        let html = "<p>AT&amp;T   conferma\n\n l&apos;accordo &#224; &lt;svolta&gt;</p>";
        let clean = extract_content(&raw_with(html, None), &CleanseConfig::default());
        assert_eq!(clean.body, "AT&T conferma l'accordo à <svolta>");
    }

    #[test]
    fn unterminated_tag_degrades_to_strip() {
        let raw = raw_with("<p>testo visibile <div class=\"unclosed", None);
        let cfg = CleanseConfig::default();
        let clean = extract_content(&raw, &cfg);
        assert_eq!(clean.body, "testo visibile");
        let m = compute_measures(&clean, &raw, &cfg);
        assert!(m.extraction_degraded);
    }

    #[test]
    fn measures_below_length_floor() {
        let cfg = CleanseConfig::default();
        let raw = raw_with("<p>Hello world</p>", None);
        let clean = extract_content(&raw, &cfg);
        let m = compute_measures(&clean, &raw, &cfg);
        assert_eq!(m.content_length, 11);
        assert!(!m.has_title);
        assert!(!m.is_good);
    }

    #[test]
    fn measures_good_when_all_thresholds_met() {
        let cfg = CleanseConfig::default();
        let body = "parola ".repeat(60).trim_end().to_string(); // 419 chars
        let raw = raw_with(&format!("<p>{body}</p>"), Some("Titolo"));
        let clean = extract_content(&raw, &cfg);
        let m = compute_measures(&clean, &raw, &cfg);
        assert!(m.content_length >= 350);
        assert!(m.text_density >= 0.25);
        assert!(m.has_title);
        assert!(m.is_good);
    }

    #[test]
    fn dense_markup_fails_density_even_when_long() {
        // 400 text chars against 3600 markup chars: density exactly 0.1.
        let cfg = CleanseConfig::default();
        let body = "a".repeat(400);
        let pad = "x".repeat(3561);
        let html = format!("<article>{body}</article><div style=\"{pad}\"></div>");
        let raw = raw_with(&html, Some("Titolo"));
        let clean = extract_content(&raw, &cfg);
        let m = compute_measures(&clean, &raw, &cfg);
        assert_eq!(m.content_length, 400);
        assert!((m.text_density - 0.1).abs() < 1e-12, "{}", m.text_density);
        assert!(!m.is_good);
    }

    #[test]
    fn goodness_is_monotone_in_length_and_density() {
        let cfg = CleanseConfig::default();
        for len in [0usize, 100, 349, 350, 351, 1000] {
            for dens in [0.0, 0.1, 0.24, 0.25, 0.26, 1.0] {
                let g = goodness(len, dens, true, &cfg);
                assert!(goodness(len + 1, dens, true, &cfg) || !g);
                assert!(goodness(len, (dens + 0.01).min(1.0), true, &cfg) || !g);
            }
        }
    }

    fn wrap_paragraphs(body: &str) -> String {
        body.split("\n\n")
            .map(|p| format!("<p>{p}</p>"))
            .collect::<String>()
    }

    proptest! {
        #[test]
        fn body_has_no_markup_chars(
            texts in proptest::collection::vec("[a-z ]{1,40}", 1..6),
            tags in proptest::collection::vec(
                prop::sample::select(vec!["p", "div", "li", "h3", "span", "em"]), 1..6),
        ) {
            let mut html = String::new();
            for (i, t) in texts.iter().enumerate() {
                let tag = tags[i % tags.len()];
                html.push_str(&format!("<{tag} class=\"c{i}\">{t}</{tag}>"));
            }
            let clean = extract_content(&raw_with(&html, None), &CleanseConfig::default());
            prop_assert!(!clean.body.contains('<'));
            prop_assert!(!clean.body.contains('>'));
        }

        #[test]
        fn extraction_is_idempotent_on_own_output(
            paras in proptest::collection::vec("[a-z]{3,9}( [a-z]{3,9}){0,7}", 1..5),
        ) {
            let body = paras.join("\n\n");
            let cfg = CleanseConfig::default();
            let once = extract_content(&raw_with(&wrap_paragraphs(&body), None), &cfg);
            prop_assert_eq!(&once.body, &body);
            let twice = extract_content(&raw_with(&wrap_paragraphs(&once.body), None), &cfg);
            prop_assert_eq!(twice.body, once.body);
        }
    }
}
