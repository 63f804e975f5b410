//! In-memory stores for the three input worlds: the entity link graph with
//! KB types, the publication corpus with its citation and venue structure,
//! and the curated seed taxonomy.
//!
//! Stores are built once by the loaders and never mutated afterwards. Derived
//! edge sets (entity in-links, document citations, venue members) are always
//! computed from their forward counterparts, never read from input.

mod load;
mod seeds;
mod validate;

use std::collections::{BTreeSet, HashMap};
use std::path::{Path, PathBuf};

use serde::ser::{Serialize, SerializeSeq, Serializer};
use serde::Deserialize;

pub use load::{
    build_document_store, build_entity_store, load_documents, load_entities, load_venues,
};
pub use seeds::{load_seed_taxonomy, SeedTaxonomy};
pub use validate::{validate_corpus, CorpusCounts, ValidationReport};

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: malformed record: {message}")]
    Malformed {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{path}: duplicate {kind} id {id:?} on lines {first_line} and {second_line}")]
    DuplicateId {
        path: PathBuf,
        kind: &'static str,
        id: String,
        first_line: usize,
        second_line: usize,
    },
    #[error("{path}:{line}: document {id:?} references itself")]
    SelfReference {
        path: PathBuf,
        line: usize,
        id: String,
    },
    #[error("dangling document references: {}", format_pairs(.offenders))]
    DanglingReferences { offenders: Vec<(String, String)> },
    #[error("seed taxonomy: {0}")]
    Seeds(String),
}

fn format_pairs(pairs: &[(String, String)]) -> String {
    pairs
        .iter()
        .map(|(from, to)| format!("{from} -> {to}"))
        .collect::<Vec<_>>()
        .join(", ")
}

/// Anything stored in a [`Store`] is keyed by a unique string id.
pub trait Keyed {
    fn key(&self) -> &str;
}

/// Immutable id-keyed collection. Items are kept in ascending id order so
/// positions double as dense, deterministic integer handles.
#[derive(Debug, Clone, PartialEq)]
pub struct Store<T> {
    items: Vec<T>,
    index: HashMap<String, usize>,
}

impl<T: Keyed> Store<T> {
    /// Builds a store as given; derived edge sets are not recomputed (see
    /// [`build_entity_store`] and [`build_document_store`] for that).
    pub fn from_items(mut items: Vec<T>) -> Self {
        items.sort_by(|a, b| a.key().cmp(b.key()));
        let index = items
            .iter()
            .enumerate()
            .map(|(i, item)| (item.key().to_owned(), i))
            .collect();
        Store { items, index }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&T> {
        self.index.get(id).map(|&i| &self.items[i])
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }

    /// Position of `id` in ascending id order.
    pub fn position(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn at(&self, position: usize) -> &T {
        &self.items[position]
    }

    pub fn iter(&self) -> std::slice::Iter<'_, T> {
        self.items.iter()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.items
    }
}

impl<T: Keyed> Default for Store<T> {
    fn default() -> Self {
        Store::from_items(Vec::new())
    }
}

impl<T: Serialize> Serialize for Store<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.items.len()))?;
        for item in &self.items {
            seq.serialize_element(item)?;
        }
        seq.end()
    }
}

impl<'a, T: Keyed> IntoIterator for &'a Store<T> {
    type Item = &'a T;
    type IntoIter = std::slice::Iter<'a, T>;

    fn into_iter(self) -> Self::IntoIter {
        self.items.iter()
    }
}

/// A knowledge-base entity backed by an encyclopedia article.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct Entity {
    pub id: String,
    pub title: String,
    /// Definitional first paragraph; the concept's simple representing text.
    pub first_paragraph: String,
    pub kb_types: BTreeSet<String>,
    pub out_links: BTreeSet<String>,
    /// Transpose of `out_links` across the store.
    pub in_links: BTreeSet<String>,
}

impl Keyed for Entity {
    fn key(&self) -> &str {
        &self.id
    }
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct Document {
    pub id: String,
    pub title: String,
    pub keywords: Vec<String>,
    pub abstract_text: String,
    pub venue_id: Option<String>,
    /// Outgoing references.
    pub references: BTreeSet<String>,
    /// Incoming citations, the transpose of `references`.
    pub citations: BTreeSet<String>,
}

impl Document {
    /// Title, keywords and abstract joined into one text.
    pub fn srt_text(&self) -> String {
        let mut parts: Vec<&str> = Vec::with_capacity(self.keywords.len() + 2);
        parts.push(&self.title);
        parts.extend(self.keywords.iter().map(String::as_str));
        parts.push(&self.abstract_text);
        parts.retain(|p| !p.trim().is_empty());
        parts.join("\n")
    }
}

impl Keyed for Document {
    fn key(&self) -> &str {
        &self.id
    }
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct Venue {
    pub id: String,
    pub full_name: String,
    pub member_docs: BTreeSet<String>,
}

impl Keyed for Venue {
    fn key(&self) -> &str {
        &self.id
    }
}

pub type EntityStore = Store<Entity>;
pub type DocumentStore = Store<Document>;
pub type VenueStore = Store<Venue>;

/// Locations of the four corpus input files.
#[derive(Debug, Clone, PartialEq, Eq, Deserialize, serde::Serialize)]
pub struct CorpusPaths {
    pub entities: PathBuf,
    pub documents: PathBuf,
    pub venues: PathBuf,
    pub seeds: PathBuf,
}

impl CorpusPaths {
    /// Conventional file names inside one directory.
    pub fn in_dir(dir: &Path) -> Self {
        CorpusPaths {
            entities: dir.join("entities.jsonl"),
            documents: dir.join("documents.jsonl"),
            venues: dir.join("venues.jsonl"),
            seeds: dir.join("seeds.json"),
        }
    }
}

/// All stores, frozen together. Cross references resolve once
/// [`validate_corpus`] reports no errors.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct CorpusSnapshot {
    pub entities: EntityStore,
    pub documents: DocumentStore,
    pub venues: VenueStore,
    pub seeds: SeedTaxonomy,
    /// Entity out-links that pointed outside the store and were dropped.
    #[serde(skip)]
    pub dropped_entity_links: usize,
}

impl CorpusSnapshot {
    /// Links documents to venues and freezes the result. Documents whose
    /// `venue_id` does not resolve keep the raw id but join no venue.
    pub fn assemble(
        entities: EntityStore,
        documents: DocumentStore,
        venues: VenueStore,
        seeds: SeedTaxonomy,
        dropped_entity_links: usize,
    ) -> Self {
        let mut venue_items = venues.items;
        for venue in &mut venue_items {
            venue.member_docs.clear();
        }
        let mut venues = Store::from_items(venue_items);
        for doc in documents.iter() {
            if let Some(pos) = doc.venue_id.as_deref().and_then(|v| venues.position(v)) {
                venues.items[pos].member_docs.insert(doc.id.clone());
            }
        }
        CorpusSnapshot {
            entities,
            documents,
            venues,
            seeds,
            dropped_entity_links,
        }
    }

    pub fn load(paths: &CorpusPaths) -> Result<Self, CorpusError> {
        let (entities, dropped) = load::load_entities_counting(&paths.entities)?;
        let documents = load_documents(&paths.documents)?;
        let venues = load_venues(&paths.venues)?;
        let seeds = load_seed_taxonomy(&paths.seeds, &entities, &venues)?;
        Ok(CorpusSnapshot::assemble(entities, documents, venues, seeds, dropped))
    }

    /// The venue a document was published in, when its id resolves.
    pub fn venue_of(&self, doc: &Document) -> Option<&Venue> {
        doc.venue_id.as_deref().and_then(|v| self.venues.get(v))
    }

    /// Deterministic JSON rendering of the whole snapshot.
    pub fn to_canonical_json(&self) -> String {
        serde_json::to_string(self).expect("snapshot serialization is infallible")
    }
}
