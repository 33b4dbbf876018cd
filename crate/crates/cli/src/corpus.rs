//! Synthetic corpus generator.
//!
//! Produces a self-contained, seed-deterministic working set: chunk files of
//! Italian-flavored news items with planted company mentions, planted event
//! vocabulary and exact duplicates; a gazetteer; per-category labeled
//! datasets; a small embedding table with per-category clusters; boolean
//! queries; a tuning dev set; a ready-to-run config; and a ground-truth
//! manifest. Same spec and seed twice gives byte-identical output.
//!
//! Two generation rules matter for the dedup contract: every article draws
//! its own word bag so distinct articles never collapse to one dedup code,
//! and a planted copy is emitted immediately after its original and never
//! split across a chunk boundary, so the original is always registered
//! first no matter how many workers run.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use chrono::{DateTime, Duration, Utc};
use serde::{Deserialize, Serialize};
use serde_json::json;

use newsflow_core::events::EventCategory;
use newsflow_core::item::{item_id, RawNewsItem};
use newsflow_core::rng::SplitMix64;
use newsflow_pipeline::{ChunkKey, ChunkStore};

/// Per-category planted vocabulary, in [`EventCategory::ALL`] order. Disjoint
/// from the filler pool and from each other.
pub const EVENT_VOCAB: &[(&str, [&str; 6])] = &[
    (
        "layoffs",
        [
            "esuberi",
            "licenziamenti",
            "cassintegrazione",
            "mobilita",
            "prepensionamenti",
            "ricollocamento",
        ],
    ),
    (
        "strikes",
        [
            "sciopero",
            "presidio",
            "astensione",
            "picchetto",
            "mobilitazione",
            "vertenza",
        ],
    ),
    (
        "shutdowns",
        [
            "chiusura",
            "serrata",
            "cessazione",
            "smantellamento",
            "dismissione",
            "fermata",
        ],
    ),
    (
        "material_damages",
        [
            "incendio",
            "crollo",
            "esplosione",
            "allagamento",
            "devastazione",
            "cedimento",
        ],
    ),
    (
        "financial_losses",
        [
            "perdite",
            "svalutazione",
            "deficit",
            "passivo",
            "insolvenza",
            "ammanco",
        ],
    ),
    (
        "frauds",
        [
            "frode",
            "truffa",
            "peculato",
            "falsificazione",
            "raggiro",
            "appropriazione",
        ],
    ),
    (
        "legal_issues",
        [
            "processo",
            "ricorso",
            "tribunale",
            "condanna",
            "sequestro",
            "citazione",
        ],
    ),
    (
        "mergers_acquisitions",
        [
            "fusione",
            "acquisizione",
            "incorporazione",
            "conferimento",
            "aggregazione",
            "integrazione",
        ],
    ),
    (
        "product_launches",
        [
            "lancio",
            "debutto",
            "presentazione",
            "prototipo",
            "gamma",
            "brevetto",
        ],
    ),
    (
        "management_changes",
        [
            "dimissioni",
            "nomine",
            "successione",
            "avvicendamento",
            "rimpasto",
            "insediamento",
        ],
    ),
];

/// Neutral filler vocabulary for article prose.
pub const FILLER: &[&str] = &[
    "mercato",
    "bilancio",
    "crescita",
    "impianto",
    "lavoro",
    "settore",
    "vendite",
    "accordo",
    "consiglio",
    "periodo",
    "prodotto",
    "regione",
    "sindacato",
    "trimestre",
    "utile",
    "verbale",
    "filiale",
    "dirigenza",
    "fornitori",
    "clienti",
    "margini",
    "capitale",
    "fabbrica",
    "rilancio",
    "contratto",
    "assemblea",
    "relazione",
    "investimento",
    "provincia",
    "stabilimento",
    "occupazione",
    "fatturato",
    "previsione",
    "rendiconto",
    "strategia",
    "revisione",
    "comparto",
    "distretto",
    "territorio",
    "produzione",
    "domanda",
    "offerta",
    "listino",
    "campagna",
    "piattaforma",
    "rete",
    "indotto",
    "cantiere",
];

const STEMS: &[&str] = &[
    "Aurora", "Borgo", "Cedro", "Dorsale", "Enna", "Fermo", "Gallio", "Imera", "Lanterna",
    "Maglio", "Nebbia", "Oriolo", "Pineta", "Quercia", "Rovere", "Sagitta", "Tremiti", "Urbino",
    "Vetra", "Zefiro", "Alcione", "Brina", "Corallo", "Drusa",
];

const SECTOR_WORDS: &[&str] = &[
    "Meccanica",
    "Finanza",
    "Energia",
    "Logistica",
    "Alimentare",
    "Edilizia",
    "Chimica",
    "Tessile",
];

const SOURCE_HOSTS: &[&str] = &[
    "agenziaalfa.example",
    "agenziabeta.example",
    "agenziagamma.example",
    "agenziadelta.example",
    "agenziaepsilon.example",
    "agenziazeta.example",
    "agenziaeta.example",
    "agenziateta.example",
    "agenziaiota.example",
    "agenziakappa.example",
    "agenzialambda.example",
    "agenziamy.example",
];

const BASE_TIME: &str = "2016-01-04T06:00:00Z";

#[derive(Debug, Clone)]
pub struct CorpusSpec {
    /// Total items emitted, planted duplicate copies included.
    pub size: usize,
    /// Fraction of `size` that are exact-duplicate copies.
    pub duplicate_rate: f64,
    pub seed: u64,
    pub chunk_size: usize,
    pub gzip_chunks: bool,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        Self {
            size: 1000,
            duplicate_rate: 0.1,
            seed: 7,
            chunk_size: 200,
            gzip_chunks: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DupPair {
    pub original_item_id: String,
    pub duplicate_item_id: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedMention {
    pub item_id: String,
    pub entity_id: String,
    pub alias: String,
}

/// Ground truth emitted next to the corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusManifest {
    pub size: usize,
    pub originals: usize,
    pub duplicate_count: usize,
    pub seed: u64,
    pub chunk_count: usize,
    pub duplicates: Vec<DupPair>,
    /// Planted mentions in original docs.
    pub mentions: Vec<PlantedMention>,
    /// Original item ids per category.
    pub events: BTreeMap<String, Vec<String>>,
    /// (positives, negatives) written to each category's label file.
    pub label_counts: BTreeMap<String, (usize, usize)>,
}

struct Company {
    entity_id: String,
    canonical_name: String,
    aliases: Vec<String>,
    commonness: Vec<(String, f64)>,
    context_terms: Vec<(String, f64)>,
}

fn companies() -> Vec<Company> {
    STEMS
        .iter()
        .enumerate()
        .map(|(k, stem)| {
            let sector = SECTOR_WORDS[k % SECTOR_WORDS.len()];
            let full = format!("{stem} {sector}");
            Company {
                entity_id: format!("E{k:03}"),
                canonical_name: format!("{full} S.p.A."),
                aliases: vec![full.clone(), stem.to_string()],
                commonness: vec![(full, 0.95), (stem.to_string(), 0.85)],
                context_terms: vec![
                    (sector.to_lowercase(), 1.0),
                    (FILLER[k % FILLER.len()].to_string(), 0.5),
                ],
            }
        })
        .collect()
}

struct GeneratedDoc {
    serial: usize,
    item: RawNewsItem,
    item_id: String,
    plain_body: String,
    categories: Vec<EventCategory>,
    mentions: Vec<(String, String)>, // (entity_id, alias surface)
}

fn base_time() -> DateTime<Utc> {
    BASE_TIME.parse().expect("valid base time")
}

/// One filler paragraph: a doc-specific word bag with frequencies that
/// survive profile quantization.
fn filler_paragraph(rng: &mut SplitMix64) -> String {
    let mut words: Vec<&str> = Vec::new();
    for _ in 0..7 {
        let word = *rng.choose(FILLER);
        let reps = 2 + rng.next_below(2); // 2..=3
        for _ in 0..reps {
            words.push(word);
        }
    }
    for _ in 0..4 {
        words.push(*rng.choose(FILLER));
    }
    rng.shuffle(&mut words);
    let mut sentence = words.join(" ");
    if let Some(first) = sentence.get_mut(0..1) {
        first.make_ascii_uppercase();
    }
    format!("{sentence}.")
}

fn mention_sentence(rng: &mut SplitMix64, alias: &str) -> String {
    match rng.next_below(3) {
        0 => format!("La società {alias} S.p.A. ha diffuso oggi una nota ufficiale."),
        1 => format!("Secondo il gruppo {alias} le prospettive del comparto restano solide."),
        _ => format!("I vertici della società {alias} S.p.A. hanno incontrato le parti sociali."),
    }
}

fn event_sentences(rng: &mut SplitMix64, category: EventCategory) -> Vec<String> {
    let vocab = EVENT_VOCAB
        .iter()
        .find(|(name, _)| *name == category.name())
        .expect("category vocabulary")
        .1;
    let mut order: Vec<&str> = vocab.to_vec();
    rng.shuffle(&mut order);
    vec![
        format!(
            "Il dossier parla di {} e {} dopo la {} delle ultime settimane.",
            order[0], order[1], order[2]
        ),
        format!(
            "Gli osservatori citano {} e {} accanto a {} come scenari concreti.",
            order[3], order[4], order[0]
        ),
    ]
}

fn generate_doc(rng: &mut SplitMix64, serial: usize, companies: &[Company]) -> GeneratedDoc {
    let has_title = rng.next_below(100) >= 3; // ~3% untitled
    let source = SOURCE_HOSTS[rng.next_below(SOURCE_HOSTS.len() as u64) as usize];
    let fetched_at = base_time() + Duration::minutes(53 * serial as i64);

    // Category assignment: none 35%, one 45%, two 20%.
    let mut categories: Vec<EventCategory> = Vec::new();
    let roll = rng.next_below(100);
    let n_cats = if roll < 35 {
        0
    } else if roll < 80 {
        1
    } else {
        2
    };
    while categories.len() < n_cats {
        let c = *rng.choose(&EventCategory::ALL);
        if !categories.contains(&c) {
            categories.push(c);
        }
    }

    // Mentions: none 25%, one 50%, two 25%; distinct companies per doc.
    let mut mentions: Vec<(String, String)> = Vec::new();
    let n_mentions = match rng.next_below(4) {
        0 => 0,
        1 | 2 => 1,
        _ => 2,
    };
    let mut picked: Vec<usize> = Vec::new();
    while picked.len() < n_mentions {
        let k = rng.next_below(companies.len() as u64) as usize;
        if !picked.contains(&k) {
            picked.push(k);
        }
    }
    for k in &picked {
        let company = &companies[*k];
        let alias = company.aliases[rng.next_below(company.aliases.len() as u64) as usize].clone();
        mentions.push((company.entity_id.clone(), alias));
    }

    // Assemble paragraphs: filler + mention sentences + event sentences.
    let mut paragraphs: Vec<String> = Vec::new();
    let n_filler = 4 + rng.next_below(3) as usize;
    for _ in 0..n_filler {
        paragraphs.push(filler_paragraph(rng));
    }
    for (_, alias) in &mentions {
        let at = rng.next_below(paragraphs.len() as u64 + 1) as usize;
        paragraphs.insert(at, mention_sentence(rng, alias));
    }
    for category in &categories {
        for sentence in event_sentences(rng, *category) {
            let at = rng.next_below(paragraphs.len() as u64 + 1) as usize;
            paragraphs.insert(at, sentence);
        }
    }

    let title = format!(
        "Rassegna {} {serial:05}",
        FILLER[rng.next_below(FILLER.len() as u64) as usize]
    );
    let mut body_parts: Vec<&str> = Vec::new();
    if has_title {
        body_parts.push(&title);
    }
    body_parts.extend(paragraphs.iter().map(|p| p.as_str()));
    let plain_body = body_parts.join("\n\n");

    let heading = if has_title {
        format!("<h1>{title}</h1>")
    } else {
        String::new()
    };
    let paras_html: String = paragraphs.iter().map(|p| format!("<p>{p}</p>")).collect();
    let html = format!(
        "<html><head><title>{title} — {source}</title>\
         <meta charset=\"utf-8\"><script>trk('{serial}')</script></head>\
         <body><nav><a href=\"/\">Home</a><a href=\"/economia\">Economia</a>\
         <a href=\"/imprese\">Imprese</a></nav>\
         <article>{heading}{paras_html}</article>\
         <footer><a href=\"/informativa-privacy-cookie-policy\">Privacy</a> \
         <a href=\"/contatti-della-redazione-centrale\">Contatti</a></footer></body></html>"
    );
    let source_url = format!("https://{source}/articoli/{serial:06}");
    let item = RawNewsItem {
        source_url: source_url.clone(),
        source_name: source.split('.').next().unwrap_or(source).to_string(),
        fetched_at,
        html,
        declared_title: has_title.then(|| title.clone()),
        language: Some("it".to_string()),
    };
    let id = item_id(&source_url, &item.html);
    GeneratedDoc {
        serial,
        item,
        item_id: id,
        plain_body,
        categories,
        mentions,
    }
}

/// The syndicated copy: identical html from a different source.
fn make_copy(rng: &mut SplitMix64, original: &GeneratedDoc) -> GeneratedDoc {
    let source = SOURCE_HOSTS[rng.next_below(SOURCE_HOSTS.len() as u64) as usize];
    let source_url = format!("https://{source}/syndication/{:06}", original.serial);
    let item = RawNewsItem {
        source_url: source_url.clone(),
        source_name: format!("{}-syndication", source.split('.').next().unwrap_or(source)),
        fetched_at: original.item.fetched_at + Duration::minutes(7),
        html: original.item.html.clone(),
        declared_title: original.item.declared_title.clone(),
        language: original.item.language.clone(),
    };
    let id = item_id(&source_url, &item.html);
    GeneratedDoc {
        serial: original.serial,
        item,
        item_id: id,
        plain_body: original.plain_body.clone(),
        categories: Vec::new(),
        mentions: Vec::new(),
    }
}

/// Output paths of a generated corpus.
#[derive(Debug, Clone)]
pub struct CorpusPaths {
    pub root: PathBuf,
    pub config: PathBuf,
    pub chunks: PathBuf,
    pub gazetteer: PathBuf,
    pub labels: PathBuf,
    pub embeddings: PathBuf,
    pub seeds: PathBuf,
    pub queries: PathBuf,
    pub dev_annotations: PathBuf,
    pub manifest: PathBuf,
}

impl CorpusPaths {
    pub fn new(root: &Path) -> Self {
        Self {
            root: root.to_path_buf(),
            config: root.join("config.json"),
            chunks: root.join("chunks"),
            gazetteer: root.join("gazetteer.jsonl"),
            labels: root.join("labels"),
            embeddings: root.join("embeddings.txt"),
            seeds: root.join("seeds.txt"),
            queries: root.join("queries"),
            dev_annotations: root.join("dev_annotations.jsonl"),
            manifest: root.join("truth/manifest.json"),
        }
    }

    pub fn label_file(&self, category: EventCategory) -> PathBuf {
        self.labels.join(format!("{}.jsonl", category.name()))
    }

    pub fn query_file(&self, category: EventCategory) -> PathBuf {
        self.queries.join(format!("{}.json", category.name()))
    }
}

/// Generates the corpus into `out_dir` and returns the manifest.
pub fn generate(out_dir: &Path, spec: &CorpusSpec) -> Result<CorpusManifest> {
    if spec.size == 0 {
        bail!("corpus size must be at least 1");
    }
    if !(0.0..1.0).contains(&spec.duplicate_rate) {
        bail!("duplicate_rate must be in [0, 1)");
    }
    if spec.chunk_size < 2 || spec.chunk_size > newsflow_pipeline::MAX_CHUNK_ITEMS {
        bail!(
            "chunk_size must be in 2..={}",
            newsflow_pipeline::MAX_CHUNK_ITEMS
        );
    }
    let root = std::path::absolute(out_dir).context("resolving output dir")?;
    let paths = CorpusPaths::new(&root);
    // Clear generated subdirectories so a rerun with a different spec never
    // leaves stale files behind.
    for dir in [&paths.chunks, &paths.labels, &paths.queries] {
        if dir.exists() {
            std::fs::remove_dir_all(dir)?;
        }
        std::fs::create_dir_all(dir)?;
    }
    std::fs::create_dir_all(paths.manifest.parent().expect("manifest has a parent"))?;

    let mut rng = SplitMix64::new(spec.seed);
    let companies = companies();

    let duplicate_count = (spec.size as f64 * spec.duplicate_rate).round() as usize;
    let original_count = spec.size - duplicate_count;
    if original_count == 0 {
        bail!("duplicate_rate leaves no original documents");
    }

    // Originals, then pick which get a syndicated copy.
    let originals: Vec<GeneratedDoc> = (0..original_count)
        .map(|serial| generate_doc(&mut rng, serial, &companies))
        .collect();
    let mut copy_of: Vec<usize> = (0..original_count).collect();
    rng.shuffle(&mut copy_of);
    copy_of.truncate(duplicate_count);
    copy_of.sort_unstable();
    let copy_set: std::collections::HashSet<usize> = copy_of.iter().copied().collect();

    // Emission units: an original alone, or [original, copy] kept adjacent.
    let mut units: Vec<Vec<&GeneratedDoc>> = Vec::new();
    let mut copies: Vec<GeneratedDoc> = Vec::new();
    for doc in &originals {
        if copy_set.contains(&doc.serial) {
            copies.push(make_copy(&mut rng, doc));
        }
    }
    let mut copy_iter = copies.iter();
    let mut duplicates = Vec::new();
    for doc in &originals {
        if copy_set.contains(&doc.serial) {
            let copy = copy_iter.next().expect("copy generated for this serial");
            duplicates.push(DupPair {
                original_item_id: doc.item_id.clone(),
                duplicate_item_id: copy.item_id.clone(),
            });
            units.push(vec![doc, copy]);
        } else {
            units.push(vec![doc]);
        }
    }

    // Greedy chunking that never splits a unit.
    let store = ChunkStore::open(&paths.chunks)?;
    let mut chunk_items: Vec<RawNewsItem> = Vec::new();
    let mut chunk_idx = 0u64;
    let flush = |items: &mut Vec<RawNewsItem>, idx: &mut u64| -> Result<()> {
        if items.is_empty() {
            return Ok(());
        }
        let key = ChunkKey::compose(base_time() + Duration::seconds(*idx as i64), "gen", *idx);
        store.write_chunk(&key, items, spec.gzip_chunks)?;
        items.clear();
        *idx += 1;
        Ok(())
    };
    for unit in &units {
        if chunk_items.len() + unit.len() > spec.chunk_size {
            flush(&mut chunk_items, &mut chunk_idx)?;
        }
        for doc in unit {
            chunk_items.push(doc.item.clone());
        }
    }
    flush(&mut chunk_items, &mut chunk_idx)?;

    write_gazetteer(&paths.gazetteer, &companies)?;
    let label_counts = write_labels(&paths, &originals, &mut rng)?;
    write_embeddings(&paths, spec.seed)?;
    write_queries(&paths)?;
    write_dev_annotations(&paths.dev_annotations, &originals, &mut rng)?;
    write_config(&paths)?;

    let mut events: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for category in EventCategory::ALL {
        events.insert(category.name().to_string(), Vec::new());
    }
    let mut mentions = Vec::new();
    for doc in &originals {
        for category in &doc.categories {
            events
                .get_mut(category.name())
                .expect("all categories present")
                .push(doc.item_id.clone());
        }
        for (entity_id, alias) in &doc.mentions {
            mentions.push(PlantedMention {
                item_id: doc.item_id.clone(),
                entity_id: entity_id.clone(),
                alias: alias.clone(),
            });
        }
    }

    let manifest = CorpusManifest {
        size: spec.size,
        originals: original_count,
        duplicate_count,
        seed: spec.seed,
        chunk_count: chunk_idx as usize,
        duplicates,
        mentions,
        events,
        label_counts,
    };
    std::fs::write(
        &paths.manifest,
        serde_json::to_string_pretty(&manifest).expect("manifest serializes"),
    )?;
    Ok(manifest)
}

fn write_gazetteer(path: &Path, companies: &[Company]) -> Result<()> {
    let mut out = String::new();
    for company in companies {
        let commonness: BTreeMap<&str, f64> = company
            .commonness
            .iter()
            .map(|(a, c)| (a.as_str(), *c))
            .collect();
        let context: BTreeMap<&str, f64> = company
            .context_terms
            .iter()
            .map(|(t, w)| (t.as_str(), *w))
            .collect();
        let line = json!({
            "entity_id": company.entity_id,
            "canonical_name": company.canonical_name,
            "aliases": company.aliases,
            "alias_commonness": commonness,
            "context_terms": context,
            "entity_type": "company",
        });
        out.push_str(&line.to_string());
        out.push('\n');
    }
    // Two entries sharing one ambiguous alias, plus a generic entity; never
    // planted, they exercise disambiguation and type filtering.
    out.push_str(
        &json!({
            "entity_id": "X900",
            "canonical_name": "Delta Molini S.p.A.",
            "aliases": ["Delta"],
            "alias_commonness": {"Delta": 0.7},
            "context_terms": {"alimentare": 1.0},
            "entity_type": "company",
        })
        .to_string(),
    );
    out.push('\n');
    out.push_str(
        &json!({
            "entity_id": "X901",
            "canonical_name": "Delta Navigazione S.p.A.",
            "aliases": ["Delta"],
            "alias_commonness": {"Delta": 0.3},
            "context_terms": {"logistica": 1.0},
            "entity_type": "company",
        })
        .to_string(),
    );
    out.push('\n');
    out.push_str(
        &json!({
            "entity_id": "X902",
            "canonical_name": "Fiera del Levante",
            "aliases": ["Fiera"],
            "alias_commonness": {"Fiera": 1.0},
            "context_terms": {},
            "entity_type": "generic",
        })
        .to_string(),
    );
    out.push('\n');
    std::fs::write(path, out)?;
    Ok(())
}

fn write_labels(
    paths: &CorpusPaths,
    originals: &[GeneratedDoc],
    rng: &mut SplitMix64,
) -> Result<BTreeMap<String, (usize, usize)>> {
    const TARGET_TOTAL: usize = 2000;
    const TARGET_POSITIVES: usize = 600;
    let mut counts = BTreeMap::new();
    for category in EventCategory::ALL {
        let mut positives: Vec<&GeneratedDoc> = originals
            .iter()
            .filter(|d| d.categories.contains(&category))
            .collect();
        let mut negatives: Vec<&GeneratedDoc> = originals
            .iter()
            .filter(|d| !d.categories.contains(&category))
            .collect();
        rng.shuffle(&mut positives);
        rng.shuffle(&mut negatives);
        positives.truncate(TARGET_POSITIVES);
        negatives.truncate(TARGET_TOTAL.saturating_sub(positives.len()));
        let mut rows: Vec<(&GeneratedDoc, bool)> = positives
            .iter()
            .map(|d| (*d, true))
            .chain(negatives.iter().map(|d| (*d, false)))
            .collect();
        rows.sort_by_key(|(d, _)| d.serial);
        let mut out = String::new();
        for (doc, label) in &rows {
            let line = json!({
                "doc_id": doc.item_id,
                "text": doc.plain_body,
                "label": label,
            });
            out.push_str(&line.to_string());
            out.push('\n');
        }
        std::fs::write(paths.label_file(category), out)?;
        counts.insert(
            category.name().to_string(),
            (positives.len(), negatives.len()),
        );
    }
    Ok(counts)
}

fn write_embeddings(paths: &CorpusPaths, seed: u64) -> Result<()> {
    const DIM: usize = 16;
    let mut rng = SplitMix64::new(seed ^ 0xE3BED);
    let mut lines: Vec<String> = Vec::new();
    let mut seeds_lines: Vec<String> = Vec::new();
    let unit = |v: &mut Vec<f64>| {
        let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            for x in v.iter_mut() {
                *x /= norm;
            }
        }
    };
    for (name, vocab) in EVENT_VOCAB {
        let mut center: Vec<f64> = (0..DIM).map(|_| rng.next_f64() * 2.0 - 1.0).collect();
        unit(&mut center);
        for (w_idx, word) in vocab.iter().enumerate() {
            let mut vector: Vec<f64> = center
                .iter()
                .map(|c| c + (rng.next_f64() * 2.0 - 1.0) * 0.12)
                .collect();
            unit(&mut vector);
            let comps: Vec<String> = vector.iter().map(|x| format!("{x:.4}")).collect();
            lines.push(format!("{word} {}", comps.join(" ")));
            if w_idx == 0 {
                seeds_lines.push(word.to_string());
            }
        }
        let _ = name;
    }
    for word in FILLER.iter().take(40) {
        let mut vector: Vec<f64> = (0..DIM).map(|_| rng.next_f64() * 2.0 - 1.0).collect();
        unit(&mut vector);
        let comps: Vec<String> = vector.iter().map(|x| format!("{x:.4}")).collect();
        lines.push(format!("{word} {}", comps.join(" ")));
    }
    let mut out = format!("{} {DIM}\n", lines.len());
    out.push_str(&lines.join("\n"));
    out.push('\n');
    std::fs::write(&paths.embeddings, out)?;
    std::fs::write(&paths.seeds, seeds_lines.join("\n") + "\n")?;
    Ok(())
}

fn write_queries(paths: &CorpusPaths) -> Result<()> {
    for category in EventCategory::ALL {
        let vocab = EVENT_VOCAB
            .iter()
            .find(|(name, _)| *name == category.name())
            .expect("category vocabulary")
            .1;
        let groups: Vec<Vec<&str>> = vocab.iter().map(|w| vec![*w]).collect();
        let doc = json!({ "groups": groups });
        std::fs::write(
            paths.query_file(category),
            serde_json::to_string_pretty(&doc).expect("query serializes"),
        )?;
    }
    Ok(())
}

fn write_dev_annotations(
    path: &Path,
    originals: &[GeneratedDoc],
    rng: &mut SplitMix64,
) -> Result<()> {
    let mut out = String::new();
    for doc in originals {
        for (entity_id, alias) in &doc.mentions {
            // Confidences on the 1e-3 lattice: a 1e-3 grid sweep realizes
            // every achievable threshold cut.
            let pos = ((0.55 + 0.45 * rng.next_f64()) * 1000.0).round() / 1000.0;
            let neg = ((0.45 * rng.next_f64()) * 1000.0).round() / 1000.0;
            let start = 0;
            let end = alias.len();
            out.push_str(
                &json!({
                    "doc_id": doc.item_id,
                    "start": start,
                    "end": end,
                    "entity_id": entity_id,
                    "gold": true,
                    "confidence": pos,
                })
                .to_string(),
            );
            out.push('\n');
            out.push_str(
                &json!({
                    "doc_id": doc.item_id,
                    "start": start,
                    "end": end,
                    "entity_id": "X999",
                    "gold": false,
                    "confidence": neg,
                })
                .to_string(),
            );
            out.push('\n');
        }
    }
    std::fs::write(path, out)?;
    Ok(())
}

fn write_config(paths: &CorpusPaths) -> Result<()> {
    let config = json!({
        "poll_interval_ms": 1000,
        "visibility_timeout_ms": 30000,
        "worker_concurrency": 4,
        "chunk_store_path": paths.chunks,
        "index_path": paths.root.join("index"),
        "queue_path": paths.root.join("queue.journal"),
        "dedup": {
            "register_path": paths.root.join("register.log"),
        },
        // Threshold tuned for this corpus's planted mention evidence; the
        // production default is 0.6.
        "entity_linking": {
            "gazetteer_path": paths.gazetteer,
            "threshold": 0.55,
        },
        // Long L2-normalized documents need more full-batch steps than the
        // production defaults to converge on this corpus.
        "events": {
            "models_path": paths.root.join("models"),
            "epochs": 400,
            "learning_rate": 2.0,
        },
    });
    std::fs::write(
        &paths.config,
        serde_json::to_string_pretty(&config).expect("config serializes"),
    )?;
    Ok(())
}
