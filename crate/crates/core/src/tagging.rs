//! Concept-publication tagging.
//!
//! Every publication, venue and concept gets a simple representation built
//! from its own text. Extended representations add graph neighbors:
//!
//! * venue: the sum of a seeded sample of member publications plus the
//!   venue itself,
//! * publication: itself, plus discounted citations and references, plus
//!   the discounted (block-normalized) venue representation,
//! * curated L0/L1 concept: itself plus the extended representations of its
//!   mapped venues.
//!
//! Candidates per publication are all L0/L1 concepts plus concepts spotted in
//! the publication's extended text, capped. The confidence of a pair is the
//! cosine between concept and publication representations.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::sync::atomic::{AtomicUsize, Ordering};

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{CorpusSnapshot, Document, Entity, SeedTaxonomy, Venue};
use crate::discovery::FosRegistry;
use crate::seeding::derive_seed;
use crate::vectorize::{
    cosine, spot_entities, EmbeddingTable, FeatureContext, FeatureVector, NameIndex,
    VectorizeConfig, Vocabulary,
};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum TaggingError {
    #[error("invalid tagging parameters: {0}")]
    InvalidParams(String),
    #[error("embedding dimension {table} does not match configured {configured}")]
    DimensionMismatch { table: usize, configured: usize },
    #[error("tags file line {line}: {message}")]
    MalformedTags { line: usize, message: String },
}

/// Neighbor discounts for extended representations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ErtWeights {
    /// Per incoming citation.
    pub cit: f64,
    /// Per outgoing reference.
    #[serde(rename = "ref")]
    pub reference: f64,
    pub venue: f64,
    /// Citations and references used per publication, lowest ids first.
    pub neighbor_cap: usize,
    /// Member publications sampled into a venue representation.
    pub venue_sample: usize,
}

impl Default for ErtWeights {
    fn default() -> Self {
        ErtWeights {
            cit: 0.1,
            reference: 0.1,
            venue: 0.5,
            neighbor_cap: 50,
            venue_sample: 100,
        }
    }
}

impl ErtWeights {
    pub fn zero() -> Self {
        ErtWeights {
            cit: 0.0,
            reference: 0.0,
            venue: 0.0,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), TaggingError> {
        for (name, w) in [("cit", self.cit), ("ref", self.reference), ("venue", self.venue)] {
            if !(w >= 0.0 && w.is_finite()) {
                return Err(TaggingError::InvalidParams(format!("weight {name} = {w} must be >= 0")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaggingParams {
    /// Minimum confidence of an emitted pair.
    pub theta: f64,
    pub candidate_cap: usize,
}

impl Default for TaggingParams {
    fn default() -> Self {
        TaggingParams {
            theta: 0.5,
            candidate_cap: 400,
        }
    }
}

impl TaggingParams {
    pub fn validate(&self, seeds: &SeedTaxonomy) -> Result<(), TaggingError> {
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return Err(TaggingError::InvalidParams(format!(
                "theta {} must lie strictly between 0 and 1",
                self.theta
            )));
        }
        let floor = seeds.l0.len() + seeds.l1.len();
        if self.candidate_cap < floor {
            return Err(TaggingError::InvalidParams(format!(
                "candidate_cap {} is below |L0| + |L1| = {floor}",
                self.candidate_cap
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TagPair {
    pub concept: String,
    pub document: String,
    pub confidence: f64,
}

pub fn srt_publication(doc: &Document, context: &FeatureContext) -> FeatureVector {
    context.featurize(&doc.srt_text())
}

pub fn srt_venue(venue: &Venue, context: &FeatureContext) -> FeatureVector {
    context.featurize(&venue.full_name)
}

pub fn srt_concept(concept: &Entity, context: &FeatureContext) -> FeatureVector {
    context.featurize(&concept.first_paragraph)
}

/// Seeded sample of `min(size, |members|)` member ids, without replacement,
/// returned in ascending id order.
pub fn sample_venue_members(venue: &Venue, size: usize, seed: u64) -> Vec<&str> {
    let members: Vec<&str> = venue.member_docs.iter().map(String::as_str).collect();
    if size >= members.len() {
        return members;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &venue.id));
    let mut picked: Vec<usize> = sample(&mut rng, members.len(), size).into_vec();
    picked.sort_unstable();
    picked.into_iter().map(|i| members[i]).collect()
}

/// The venue's own representation plus those of its sampled members.
pub fn ert_venue(venue_srt: &FeatureVector, member_srts: &[&FeatureVector]) -> FeatureVector {
    let mut out = venue_srt.clone();
    for m in member_srts {
        out.add_scaled(m, 1.0);
    }
    out
}

/// The concept's own representation plus those of its curated venues.
pub fn ert_concept(concept_srt: &FeatureVector, venue_erts: &[&FeatureVector]) -> FeatureVector {
    let mut out = concept_srt.clone();
    for v in venue_erts {
        out.add_scaled(v, 1.0);
    }
    out
}

/// Own representation plus discounted citations, references and venue. The
/// venue term enters block-normalized, so its pull does not grow with the
/// venue sample size.
pub fn ert_publication(
    doc_srt: &FeatureVector,
    citations: &[&FeatureVector],
    references: &[&FeatureVector],
    venue_ert: Option<&FeatureVector>,
    weights: &ErtWeights,
) -> FeatureVector {
    let mut out = doc_srt.clone();
    for c in citations {
        out.add_scaled(c, weights.cit);
    }
    for r in references {
        out.add_scaled(r, weights.reference);
    }
    if let Some(v) = venue_ert {
        if weights.venue != 0.0 {
            out.add_scaled(&v.block_normalized(), weights.venue);
        }
    }
    out
}

/// Counters from one tagging pass.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct TaggingStats {
    pub documents: usize,
    pub scored_pairs: usize,
    pub emitted_pairs: usize,
    pub max_candidates: usize,
}

/// Frozen inputs for scoring: feature context, per-document simple
/// representations, venue and concept extended representations.
pub struct TaggingModel<'a> {
    snapshot: &'a CorpusSnapshot,
    context: FeatureContext,
    weights: ErtWeights,
    params: TaggingParams,
    doc_srts: Vec<FeatureVector>,
    venue_erts: Vec<FeatureVector>,
    concept_vectors: Vec<FeatureVector>,
    /// Ordinals of L0 and L1 concepts.
    floor: Vec<u32>,
}

impl<'a> TaggingModel<'a> {
    /// Builds every representation tagging needs. Without an embedding
    /// table, hashed stand-in vectors over the vocabulary are used.
    pub fn build(
        snapshot: &'a CorpusSnapshot,
        registry: &FosRegistry,
        embeddings: Option<EmbeddingTable>,
        vectorize: &VectorizeConfig,
        weights: ErtWeights,
        params: TaggingParams,
        rng_seed: u64,
    ) -> Result<Self, TaggingError> {
        weights.validate()?;
        params.validate(&snapshot.seeds)?;

        let concepts: Vec<&Entity> = registry
            .ids()
            .filter_map(|id| snapshot.entities.get(id))
            .collect();
        let doc_texts: Vec<String> = snapshot.documents.iter().map(Document::srt_text).collect();
        let vocabulary = Vocabulary::build(
            doc_texts
                .iter()
                .map(String::as_str)
                .chain(snapshot.venues.iter().map(|v| v.full_name.as_str()))
                .chain(concepts.iter().map(|c| c.first_paragraph.as_str())),
            vectorize.min_df,
        );
        let embeddings = match embeddings {
            Some(table) if table.dim() != vectorize.embedding_dim => {
                return Err(TaggingError::DimensionMismatch {
                    table: table.dim(),
                    configured: vectorize.embedding_dim,
                })
            }
            Some(table) => table,
            None => EmbeddingTable::hashed(
                vocabulary.terms().iter().map(String::as_str),
                vectorize.embedding_dim,
                derive_seed(rng_seed, "embeddings"),
            ),
        };
        let names = NameIndex::new(concepts.iter().map(|c| (c.id.as_str(), c.title.as_str())));
        let definitions: Vec<&str> = concepts.iter().map(|c| c.first_paragraph.as_str()).collect();
        let context = FeatureContext::new(
            vocabulary,
            embeddings,
            names,
            &definitions,
            vectorize.block_weights,
        );

        let doc_srts: Vec<FeatureVector> =
            doc_texts.par_iter().map(|t| context.featurize(t)).collect();
        let venue_seed = derive_seed(rng_seed, "venue-sample");
        let venue_erts: Vec<FeatureVector> = snapshot
            .venues
            .as_slice()
            .par_iter()
            .map(|v| {
                let members: Vec<&FeatureVector> = sample_venue_members(v, weights.venue_sample, venue_seed)
                    .into_iter()
                    .map(|id| &doc_srts[snapshot.documents.position(id).expect("member exists")])
                    .collect();
                ert_venue(&srt_venue(v, &context), &members)
            })
            .collect();
        let concept_vectors: Vec<FeatureVector> = concepts
            .par_iter()
            .map(|c| {
                let srt = srt_concept(c, &context);
                let mapped: Vec<&FeatureVector> = snapshot
                    .seeds
                    .concept_venue_map
                    .get(&c.id)
                    .into_iter()
                    .flatten()
                    .filter(|_| snapshot.seeds.is_curated_level(&c.id))
                    .filter_map(|v| snapshot.venues.position(v))
                    .map(|p| &venue_erts[p])
                    .collect();
                ert_concept(&srt, &mapped)
            })
            .collect();
        let floor = snapshot
            .seeds
            .l0
            .iter()
            .chain(&snapshot.seeds.l1)
            .filter_map(|id| context.names.ordinal(id))
            .collect();

        log::info!(
            "tagging model: {} concepts, {} terms, {} documents, {} venues",
            concept_vectors.len(),
            context.vocabulary.len(),
            doc_srts.len(),
            venue_erts.len()
        );
        Ok(TaggingModel {
            snapshot,
            context,
            weights,
            params,
            doc_srts,
            venue_erts,
            concept_vectors,
            floor,
        })
    }

    pub fn context(&self) -> &FeatureContext {
        &self.context
    }

    pub fn params(&self) -> &TaggingParams {
        &self.params
    }

    /// Concept ids in ordinal order.
    pub fn concept_ids(&self) -> &[String] {
        self.context.names.ids()
    }

    pub fn concept_vector(&self, concept: &str) -> Option<&FeatureVector> {
        self.context
            .names
            .ordinal(concept)
            .map(|o| &self.concept_vectors[o as usize])
    }

    pub fn publication_srt(&self, doc: &str) -> Option<&FeatureVector> {
        self.snapshot.documents.position(doc).map(|p| &self.doc_srts[p])
    }

    pub fn venue_ert(&self, venue: &str) -> Option<&FeatureVector> {
        self.snapshot.venues.position(venue).map(|p| &self.venue_erts[p])
    }

    fn neighbors<'s>(&'s self, ids: &'s BTreeSet<String>) -> impl Iterator<Item = &'s str> + 's {
        ids.iter().take(self.weights.neighbor_cap).map(String::as_str)
    }

    pub fn publication_ert(&self, doc: &Document) -> FeatureVector {
        let srt = |id: &str| &self.doc_srts[self.snapshot.documents.position(id).expect("neighbor exists")];
        let citations: Vec<&FeatureVector> = self.neighbors(&doc.citations).map(srt).collect();
        let references: Vec<&FeatureVector> = self.neighbors(&doc.references).map(srt).collect();
        let venue = self
            .snapshot
            .venue_of(doc)
            .and_then(|v| self.snapshot.venues.position(&v.id))
            .map(|p| &self.venue_erts[p]);
        let own = &self.doc_srts[self.snapshot.documents.position(&doc.id).expect("document exists")];
        ert_publication(own, &citations, &references, venue, &self.weights)
    }

    /// Own text, neighbor titles and venue name; the text concepts are
    /// spotted in.
    pub fn extended_text(&self, doc: &Document) -> String {
        let mut text = doc.srt_text();
        let docs = &self.snapshot.documents;
        for id in self.neighbors(&doc.citations).chain(self.neighbors(&doc.references)) {
            text.push('\n');
            text.push_str(&docs.get(id).expect("neighbor exists").title);
        }
        if let Some(v) = self.snapshot.venue_of(doc) {
            text.push('\n');
            text.push_str(&v.full_name);
        }
        text
    }

    fn candidate_ordinals(&self, doc: &Document) -> Vec<u32> {
        let mut chosen: BTreeSet<u32> = self.floor.iter().copied().collect();
        let mut spotted: Vec<(usize, u32)> = spot_entities(&self.extended_text(doc), &self.context.names)
            .into_iter()
            .filter(|m| !chosen.contains(&m.ordinal))
            .map(|m| (m.count, m.ordinal))
            .collect();
        spotted.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        let room = self.params.candidate_cap.saturating_sub(chosen.len());
        chosen.extend(spotted.into_iter().take(room).map(|(_, o)| o));
        chosen.into_iter().collect()
    }

    /// L0 ∪ L1 ∪ spotted concepts, spotted ones ranked by mention count then
    /// id and cut so the total stays within the candidate cap.
    pub fn candidate_concepts(&self, doc: &Document) -> Vec<String> {
        self.candidate_ordinals(doc)
            .into_iter()
            .map(|o| self.context.names.id(o).to_owned())
            .collect()
    }

    /// Pairs with confidence at least theta, by descending confidence, then
    /// concept id. Also returns the number of candidates scored.
    pub fn tag_document(&self, doc: &Document) -> (Vec<TagPair>, usize) {
        let candidates = self.candidate_ordinals(doc);
        let ert = self.publication_ert(doc);
        let mut pairs: Vec<TagPair> = candidates
            .iter()
            .filter_map(|&o| {
                let confidence = cosine(&self.concept_vectors[o as usize], &ert).expect("shared layout");
                (confidence >= self.params.theta).then(|| TagPair {
                    concept: self.context.names.id(o).to_owned(),
                    document: doc.id.clone(),
                    confidence,
                })
            })
            .collect();
        pairs.sort_by(|a, b| {
            b.confidence
                .total_cmp(&a.confidence)
                .then_with(|| a.concept.cmp(&b.concept))
        });
        (pairs, candidates.len())
    }

    /// Tags every document in parallel; output is ordered by document id,
    /// then descending confidence.
    pub fn tag_corpus(&self) -> (Vec<TagPair>, TaggingStats) {
        let scored = AtomicUsize::new(0);
        let max_candidates = AtomicUsize::new(0);
        let per_doc: Vec<Vec<TagPair>> = self
            .snapshot
            .documents
            .as_slice()
            .par_iter()
            .map(|doc| {
                let (pairs, n) = self.tag_document(doc);
                scored.fetch_add(n, Ordering::Relaxed);
                max_candidates.fetch_max(n, Ordering::Relaxed);
                pairs
            })
            .collect();
        let pairs: Vec<TagPair> = per_doc.into_iter().flatten().collect();
        let stats = TaggingStats {
            documents: self.snapshot.documents.len(),
            scored_pairs: scored.into_inner(),
            emitted_pairs: pairs.len(),
            max_candidates: max_candidates.into_inner(),
        };
        log::info!(
            "tagging: scored {} pairs over {} documents, emitted {}",
            stats.scored_pairs,
            stats.documents,
            stats.emitted_pairs
        );
        (pairs, stats)
    }
}

/// `doc_id \t concept_id \t confidence`, six decimals.
pub fn tags_to_tsv(pairs: &[TagPair]) -> String {
    let mut out = String::new();
    for p in pairs {
        let _ = writeln!(out, "{}\t{}\t{:.6}", p.document, p.concept, p.confidence);
    }
    out
}

pub fn tags_from_tsv(text: &str) -> Result<Vec<TagPair>, TaggingError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, line)| {
            let err = |message: String| TaggingError::MalformedTags { line: i + 1, message };
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 3 {
                return Err(err(format!("expected 3 fields, found {}", fields.len())));
            }
            let confidence = fields[2]
                .parse::<f64>()
                .map_err(|e| err(format!("bad confidence: {e}")))?;
            Ok(TagPair {
                document: fields[0].to_owned(),
                concept: fields[1].to_owned(),
                confidence,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{build_document_store, build_entity_store, Store};
    use crate::discovery::{Membership, Provenance};
    use crate::vectorize::{BlockLayout, BlockWeights, SparseBlock};

    fn layout() -> BlockLayout {
        BlockLayout { vocabulary: 3, entities: 0, dim: 0 }
    }

    fn v(weights: [f64; 3]) -> FeatureVector {
        let pairs = weights.iter().enumerate().map(|(i, w)| (i as u32, *w)).collect();
        FeatureVector { bow: SparseBlock::from_pairs(pairs), ..FeatureVector::zero(layout()) }
    }

    #[test]
    fn venue_ert_degenerates_and_sums() {
        let venue = v([0.0, 0.0, 1.0]);
        assert_eq!(ert_venue(&venue, &[]), venue);
        let (d1, d2) = (v([1.0, 0.0, 0.0]), v([0.6, 0.8, 0.0]));
        let ert = ert_venue(&venue, &[&d1, &d2]);
        assert_eq!(ert.bow.entries(), &[(0, 1.6), (1, 0.8), (2, 1.0)]);
    }

    #[test]
    fn publication_ert_with_one_reference() {
        let own = v([1.0, 0.0, 0.0]);
        let reference = v([0.0, 1.0, 0.0]);
        let weights = ErtWeights { reference: 0.5, ..ErtWeights::zero() };
        let ert = ert_publication(&own, &[], &[&reference], None, &weights);
        assert_eq!(ert.bow.entries(), &[(0, 1.0), (1, 0.5)]);
        let isolated = ert_publication(&own, &[], &[], None, &ErtWeights::default());
        assert_eq!(isolated, own);
        let zeroed = ert_publication(&own, &[&reference], &[&reference], Some(&reference), &ErtWeights::zero());
        assert_eq!(zeroed, own);
    }

    #[test]
    fn concept_ert_adds_mapped_venues() {
        let srt = v([1.0, 0.0, 0.0]);
        let venue = v([0.0, 2.0, 1.0]);
        assert_eq!(ert_concept(&srt, &[]), srt);
        assert_eq!(ert_concept(&srt, &[&venue]).bow.entries(), &[(0, 1.0), (1, 2.0), (2, 1.0)]);
    }

    #[test]
    fn venue_sampling_is_seeded() {
        let venue = Venue {
            id: "v".into(),
            full_name: "V".into(),
            member_docs: (0..20).map(|i| format!("d{i:02}")).collect(),
        };
        let a = sample_venue_members(&venue, 5, 9);
        assert_eq!(a.len(), 5);
        assert_eq!(a, sample_venue_members(&venue, 5, 9));
        assert!(a.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(sample_venue_members(&venue, 50, 9).len(), 20);
    }

    #[test]
    fn tsv_round_trip_keeps_six_decimals() {
        let pairs = vec![TagPair { concept: "c".into(), document: "d".into(), confidence: 0.123_456_789 }];
        let text = tags_to_tsv(&pairs);
        assert_eq!(text, "d\tc\t0.123457\n");
        assert_eq!(tags_from_tsv(&text).unwrap()[0].confidence, 0.123457);
        assert!(matches!(tags_from_tsv("a\tb\n"), Err(TaggingError::MalformedTags { line: 1, .. })));
    }

    fn entity(id: &str, title: &str, para: &str) -> Entity {
        Entity {
            id: id.into(),
            title: title.into(),
            first_paragraph: para.into(),
            kb_types: Default::default(),
            out_links: Default::default(),
            in_links: Default::default(),
        }
    }

    fn doc(id: &str, title: &str, refs: &[&str]) -> Document {
        Document {
            id: id.into(),
            title: title.into(),
            keywords: vec![],
            abstract_text: String::new(),
            venue_id: None,
            references: refs.iter().map(|s| s.to_string()).collect(),
            citations: Default::default(),
        }
    }

    fn small_corpus(docs: Vec<Document>) -> (CorpusSnapshot, FosRegistry) {
        let entities = build_entity_store(vec![
            entity("sci", "science", "science knowledge"),
            entity("ml", "machine learning", "machine learning models learn from data"),
            entity("gt", "graph theory", "graph theory studies graphs vertices edges"),
            entity("blank", "blank concept", ""),
        ])
        .0;
        let seeds = SeedTaxonomy {
            l0: ["sci".to_string()].into(),
            seed_fos: ["sci".to_string()].into(),
            ..Default::default()
        };
        let snap = CorpusSnapshot::assemble(
            entities,
            build_document_store(docs).unwrap(),
            Store::default(),
            seeds,
            0,
        );
        let mut registry = FosRegistry::default();
        for id in ["sci", "ml", "gt", "blank"] {
            registry
                .concepts
                .insert(id.into(), Membership { provenance: Provenance::Seed, iteration: 0 });
        }
        (snap, registry)
    }

    fn model<'a>(snap: &'a CorpusSnapshot, registry: &FosRegistry, params: TaggingParams) -> TaggingModel<'a> {
        let config = VectorizeConfig { embedding_dim: 16, block_weights: BlockWeights::default(), min_df: 1 };
        TaggingModel::build(snap, registry, None, &config, ErtWeights::default(), params, 3).unwrap()
    }

    #[test]
    fn candidates_always_include_l0_and_spotted_concepts() {
        let (snap, registry) = small_corpus(vec![
            doc("d1", "Machine learning for graph theory", &[]),
            doc("d2", "Nothing relevant here", &[]),
        ]);
        let m = model(&snap, &registry, TaggingParams::default());
        let d1 = snap.documents.get("d1").unwrap();
        assert_eq!(m.candidate_concepts(d1), ["gt", "ml", "sci"]);
        assert_eq!(m.candidate_concepts(snap.documents.get("d2").unwrap()), ["sci"]);
        let capped = model(&snap, &registry, TaggingParams { theta: 0.5, candidate_cap: 2 });
        assert_eq!(capped.candidate_concepts(d1), ["gt", "sci"]);
    }

    #[test]
    fn spotting_reaches_neighbor_titles() {
        let (snap, registry) = small_corpus(vec![
            doc("d1", "A survey", &["d2"]),
            doc("d2", "Machine learning", &[]),
        ]);
        let m = model(&snap, &registry, TaggingParams::default());
        assert!(m.candidate_concepts(snap.documents.get("d1").unwrap()).contains(&"ml".to_string()));
    }

    #[test]
    fn empty_definition_is_never_tagged() {
        let (snap, registry) = small_corpus(vec![doc("d1", "blank concept", &[])]);
        let m = model(&snap, &registry, TaggingParams { theta: 0.01, candidate_cap: 400 });
        assert!(m.concept_vector("blank").unwrap().is_zero());
        let (pairs, _) = m.tag_document(snap.documents.get("d1").unwrap());
        assert!(pairs.iter().all(|p| p.concept != "blank"));
    }

    #[test]
    fn emitted_pairs_clear_theta_and_are_sorted() {
        let (snap, registry) = small_corpus(vec![
            doc("d1", "machine learning models learn from data about graph theory", &[]),
            doc("d2", "graph theory studies graphs", &["d1"]),
        ]);
        let m = model(&snap, &registry, TaggingParams { theta: 0.2, candidate_cap: 400 });
        let (pairs, stats) = m.tag_corpus();
        assert!(!pairs.is_empty());
        assert!(pairs.iter().all(|p| p.confidence >= 0.2 && p.confidence <= 1.0 + 1e-12));
        assert!(pairs.windows(2).all(|w| {
            w[0].document < w[1].document
                || (w[0].document == w[1].document && w[0].confidence >= w[1].confidence)
        }));
        assert!(stats.scored_pairs <= 400 * 2);
    }

    #[test]
    fn invalid_params_are_rejected() {
        let seeds = SeedTaxonomy { l0: ["a".into(), "b".into()].into(), ..Default::default() };
        assert!(TaggingParams { theta: 0.0, candidate_cap: 10 }.validate(&seeds).is_err());
        assert!(TaggingParams { theta: 0.5, candidate_cap: 1 }.validate(&seeds).is_err());
        assert!(ErtWeights { cit: -1.0, ..Default::default() }.validate().is_err());
    }
}
