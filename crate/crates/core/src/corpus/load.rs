use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Deserialize;

use super::{CorpusError, Document, DocumentStore, Entity, EntityStore, Store, Venue, VenueStore};

#[derive(Deserialize)]
struct EntityRecord {
    id: String,
    #[serde(default)]
    title: String,
    #[serde(default)]
    first_paragraph: String,
    #[serde(default)]
    kb_types: Vec<String>,
    #[serde(default)]
    out_links: Vec<String>,
    #[serde(flatten)]
    extra: BTreeMap<String, serde_json::Value>,
}

#[derive(Deserialize)]
struct DocumentRecord {
    id: String,
    #[serde(default)]
    title: String,
    #[serde(default)]
    keywords: Vec<String>,
    #[serde(default, rename = "abstract")]
    abstract_text: String,
    #[serde(default)]
    venue_id: Option<String>,
    #[serde(default)]
    references: Vec<String>,
    #[serde(flatten)]
    extra: BTreeMap<String, serde_json::Value>,
}

#[derive(Deserialize)]
struct VenueRecord {
    id: String,
    #[serde(default)]
    full_name: String,
    #[serde(flatten)]
    extra: BTreeMap<String, serde_json::Value>,
}

trait HasExtra {
    fn id(&self) -> &str;
    fn extra(&self) -> &BTreeMap<String, serde_json::Value>;
}

macro_rules! has_extra {
    ($($t:ty),*) => {$(
        impl HasExtra for $t {
            fn id(&self) -> &str { &self.id }
            fn extra(&self) -> &BTreeMap<String, serde_json::Value> { &self.extra }
        }
    )*};
}
has_extra!(EntityRecord, DocumentRecord, VenueRecord);

/// Parses one JSON record per non-blank line. Returns records paired with
/// their 1-based line numbers; rejects duplicate ids.
fn read_jsonl<R: DeserializeOwned + HasExtra>(
    path: &Path,
    kind: &'static str,
) -> Result<Vec<(usize, R)>, CorpusError> {
    let text = std::fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.to_owned(),
        source,
    })?;
    let mut records = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();
    let mut unknown_fields = BTreeSet::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let record: R = serde_json::from_str(line).map_err(|e| CorpusError::Malformed {
            path: path.to_owned(),
            line: line_no,
            message: e.to_string(),
        })?;
        if let Some(&first_line) = seen.get(record.id()) {
            return Err(CorpusError::DuplicateId {
                path: path.to_owned(),
                kind,
                id: record.id().to_owned(),
                first_line,
                second_line: line_no,
            });
        }
        seen.insert(record.id().to_owned(), line_no);
        unknown_fields.extend(record.extra().keys().cloned());
        records.push((line_no, record));
    }
    for field in unknown_fields {
        log::warn!("{}: ignoring unknown {kind} field {field:?}", path.display());
    }
    Ok(records)
}

/// Loads the entity link graph and derives in-links.
///
/// Out-links to ids outside the file, and self-links, are dropped with a
/// warning.
pub fn load_entities(path: &Path) -> Result<EntityStore, CorpusError> {
    load_entities_counting(path).map(|(store, _)| store)
}

pub(crate) fn load_entities_counting(path: &Path) -> Result<(EntityStore, usize), CorpusError> {
    let records: Vec<(usize, EntityRecord)> = read_jsonl(path, "entity")?;
    let entities = records
        .into_iter()
        .map(|(_, r)| Entity {
            id: r.id,
            title: r.title,
            first_paragraph: r.first_paragraph,
            kb_types: r.kb_types.into_iter().collect(),
            out_links: r.out_links.into_iter().collect(),
            in_links: BTreeSet::new(),
        })
        .collect();
    let (store, dropped) = build_entity_store(entities);
    if dropped > 0 {
        log::warn!(
            "{}: dropped {dropped} entity links that point outside the store",
            path.display()
        );
    }
    log::info!("{}: loaded {} entities", path.display(), store.len());
    Ok((store, dropped))
}

/// Builds an entity store from entities with their out-links set. In-links
/// are recomputed; out-links to unknown ids and self-links are removed and
/// counted. Ids are assumed unique.
pub fn build_entity_store(mut entities: Vec<Entity>) -> (EntityStore, usize) {
    let known: BTreeSet<String> = entities.iter().map(|e| e.id.clone()).collect();
    let mut dropped = 0usize;
    for e in &mut entities {
        let before = e.out_links.len();
        let id = e.id.clone();
        e.out_links.retain(|t| known.contains(t) && *t != id);
        dropped += before - e.out_links.len();
        e.in_links.clear();
    }
    let position: HashMap<String, usize> = entities
        .iter()
        .enumerate()
        .map(|(i, e)| (e.id.clone(), i))
        .collect();
    let position = &position;
    let edges: Vec<(usize, String)> = entities
        .iter()
        .flat_map(|e| e.out_links.iter().map(move |t| (position[t], e.id.clone())))
        .collect();
    for (target, source) in edges {
        entities[target].in_links.insert(source);
    }
    (Store::from_items(entities), dropped)
}

/// Loads publications and derives incoming citations.
///
/// Every reference must resolve inside the file; all offenders are listed in
/// one error.
pub fn load_documents(path: &Path) -> Result<DocumentStore, CorpusError> {
    let records: Vec<(usize, DocumentRecord)> = read_jsonl(path, "document")?;
    let docs = records
        .into_iter()
        .map(|(line, r)| {
            (
                line,
                Document {
                    id: r.id,
                    title: r.title,
                    keywords: r.keywords,
                    abstract_text: r.abstract_text,
                    venue_id: r.venue_id.filter(|v| !v.is_empty()),
                    references: r.references.into_iter().collect(),
                    citations: BTreeSet::new(),
                },
            )
        })
        .collect();
    let store = build_located(path, docs)?;
    log::info!("{}: loaded {} documents", path.display(), store.len());
    Ok(store)
}

/// Builds a document store from documents with their references set.
/// Citations are recomputed. Ids are assumed unique.
pub fn build_document_store(docs: Vec<Document>) -> Result<DocumentStore, CorpusError> {
    let located = docs.into_iter().enumerate().map(|(i, d)| (i + 1, d)).collect();
    build_located(Path::new("<memory>"), located)
}

fn build_located(path: &Path, docs: Vec<(usize, Document)>) -> Result<DocumentStore, CorpusError> {
    let known: BTreeSet<&str> = docs.iter().map(|(_, d)| d.id.as_str()).collect();
    let mut dangling = Vec::new();
    for (line, d) in &docs {
        if d.references.contains(&d.id) {
            return Err(CorpusError::SelfReference {
                path: path.to_owned(),
                line: *line,
                id: d.id.clone(),
            });
        }
        for reference in d.references.iter().filter(|r| !known.contains(r.as_str())) {
            dangling.push((d.id.clone(), reference.clone()));
        }
    }
    if !dangling.is_empty() {
        dangling.sort();
        return Err(CorpusError::DanglingReferences { offenders: dangling });
    }

    let mut citations: HashMap<String, BTreeSet<String>> = HashMap::new();
    for (_, d) in &docs {
        for reference in &d.references {
            citations
                .entry(reference.clone())
                .or_default()
                .insert(d.id.clone());
        }
    }
    let docs = docs
        .into_iter()
        .map(|(_, mut d)| {
            d.citations = citations.remove(&d.id).unwrap_or_default();
            d
        })
        .collect();
    Ok(Store::from_items(docs))
}

/// Loads venues. Member documents are filled in when the snapshot is
/// assembled.
pub fn load_venues(path: &Path) -> Result<VenueStore, CorpusError> {
    let records: Vec<(usize, VenueRecord)> = read_jsonl(path, "venue")?;
    let venues = records
        .into_iter()
        .map(|(_, r)| Venue {
            id: r.id,
            full_name: r.full_name,
            member_docs: BTreeSet::new(),
        })
        .collect();
    Ok(Store::from_items(venues))
}
