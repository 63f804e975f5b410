//! Deterministic synthetic corpora with planted structure.
//!
//! A topic forest of L0 → L1 → leaf concepts is planted three ways:
//!
//! * in the entity link graph, where all concepts plus a few blocklisted
//!   decoys form one complete cluster and the remaining entities form
//!   separate complete background clusters;
//! * in the documents, where every document belongs to one leaf and draws its
//!   tokens from the disjoint vocabularies of that leaf and its ancestors,
//!   plus a share of background noise;
//! * in the seed taxonomy, which names the L0/L1 concepts, a handful of
//!   leaves and the curated L1 → L0 edges.
//!
//! Some leaves carry an allowlisted KB type and sit outside the concept
//! cluster, so only type enrichment can find them.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::corpus::{
    build_document_store, build_entity_store, CorpusError, CorpusSnapshot, Document, Entity,
    SeedTaxonomy, Store, Venue,
};
use crate::seeding::derive_seed;

pub const ALLOWLISTED_TYPE: &str = "protein";
pub const DECOY_TYPE: &str = "person";
pub const BLOCKED_TYPES: [&str; 2] = ["person", "event"];

#[derive(Debug, thiserror::Error)]
pub enum SyngenError {
    #[error("invalid planted spec: {0}")]
    InvalidSpec(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}

/// Shape of the planted corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlantedSpec {
    pub n_l0: usize,
    pub n_l1_per_l0: usize,
    pub n_leaf_per_l1: usize,
    pub docs_per_leaf: usize,
    pub vocab_per_topic: usize,
    /// Share of generated document tokens drawn from the background
    /// vocabulary; also the rate of random references and random extra
    /// entity links.
    pub noise_rate: f64,
    pub rng_seed: u64,
    /// Total entity count; background entities fill the gap.
    pub n_entities: usize,
    /// Seed concept count: all L0/L1 concepts, then leaves.
    pub n_seeds: usize,
    /// Blocklisted entities planted inside the concept cluster.
    pub n_decoys: usize,
    pub background_cluster_size: usize,
    /// Every `enriched_every`-th leaf is typed with the allowlisted type and
    /// kept out of the concept cluster. 0 disables this.
    pub enriched_every: usize,
    pub words_per_doc: usize,
    /// Topic tokens in each concept's definitional paragraph.
    pub paragraph_words: usize,
    pub references_per_doc: usize,
    /// Leaf / L1 / L0 shares of the non-noise tokens.
    pub mixture: [f64; 3],
}

impl Default for PlantedSpec {
    fn default() -> Self {
        PlantedSpec {
            n_l0: 2,
            n_l1_per_l0: 4,
            n_leaf_per_l1: 5,
            docs_per_leaf: 125,
            vocab_per_topic: 40,
            noise_rate: 0.0,
            rng_seed: 7,
            n_entities: 500,
            n_seeds: 20,
            n_decoys: 5,
            background_cluster_size: 50,
            enriched_every: 10,
            words_per_doc: 60,
            paragraph_words: 120,
            references_per_doc: 3,
            mixture: [0.5, 0.3, 0.2],
        }
    }
}

impl PlantedSpec {
    pub fn validate(&self) -> Result<(), SyngenError> {
        let bad = |m: &str| Err(SyngenError::InvalidSpec(m.to_owned()));
        let counts = [
            ("n_l0", self.n_l0),
            ("n_l1_per_l0", self.n_l1_per_l0),
            ("n_leaf_per_l1", self.n_leaf_per_l1),
            ("docs_per_leaf", self.docs_per_leaf),
            ("vocab_per_topic", self.vocab_per_topic),
            ("background_cluster_size", self.background_cluster_size),
            ("words_per_doc", self.words_per_doc),
        ];
        if let Some((name, _)) = counts.iter().find(|(_, n)| *n == 0) {
            return Err(SyngenError::InvalidSpec(format!("{name} must be at least 1")));
        }
        if !(0.0..1.0).contains(&self.noise_rate) {
            return bad("noise_rate must lie in [0, 1)");
        }
        if self.mixture.iter().any(|m| !(m.is_finite() && *m >= 0.0)) || self.mixture.iter().sum::<f64>() <= 0.0 {
            return bad("mixture shares must be non-negative with a positive sum");
        }
        if self.n_seeds < self.n_l0 * (1 + self.n_l1_per_l0) {
            return bad("n_seeds must cover every L0 and L1 concept");
        }
        Ok(())
    }

    pub fn l1_count(&self) -> usize {
        self.n_l0 * self.n_l1_per_l0
    }

    pub fn leaf_count(&self) -> usize {
        self.l1_count() * self.n_leaf_per_l1
    }

    pub fn concept_count(&self) -> usize {
        self.n_l0 + self.l1_count() + self.leaf_count()
    }

    pub fn document_count(&self) -> usize {
        self.leaf_count() * self.docs_per_leaf
    }
}

/// One planted topic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topic {
    pub id: String,
    pub title: String,
    pub level: u8,
    pub parent: Option<usize>,
    /// Allowlisted and outside the concept cluster.
    pub enriched_only: bool,
}

/// What the generator planted.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GroundTruth {
    /// Concept id → planted level.
    pub fos: BTreeMap<String, u8>,
    /// `(child, parent)`, sorted.
    pub tree_edges: Vec<(String, String)>,
    /// `(document, concept)`: each document with its leaf and ancestors.
    pub tag_pairs: Vec<(String, String)>,
}

impl GroundTruth {
    /// Planted documents per concept.
    pub fn documents_of(&self) -> BTreeMap<&str, BTreeSet<&str>> {
        let mut out: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
        for (doc, concept) in &self.tag_pairs {
            out.entry(concept).or_default().insert(doc);
        }
        out
    }

    /// `(descendant, ancestor)` pairs of the planted forest.
    pub fn ancestor_pairs(&self) -> BTreeSet<(String, String)> {
        let parents: BTreeMap<&str, &str> =
            self.tree_edges.iter().map(|(c, p)| (c.as_str(), p.as_str())).collect();
        let mut out = BTreeSet::new();
        for child in self.fos.keys() {
            let mut at = child.as_str();
            while let Some(&p) = parents.get(at) {
                out.insert((child.clone(), p.to_owned()));
                at = p;
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlantedCorpus {
    pub spec: PlantedSpec,
    pub topics: Vec<Topic>,
    pub entities: Vec<Entity>,
    pub documents: Vec<Document>,
    pub venues: Vec<Venue>,
    pub seeds: SeedTaxonomy,
    pub truth: GroundTruth,
    /// Ordinal of each document's leaf topic, parallel to `documents`.
    pub document_topics: Vec<usize>,
}

struct Names {
    rng: ChaCha8Rng,
    used: HashSet<String>,
}

impl Names {
    fn word(&mut self) -> String {
        const CONSONANTS: &[u8] = b"bdfgklmnprstvz";
        const VOWELS: &[u8] = b"aeiou";
        (0..3)
            .map(|_| {
                let c = *CONSONANTS.choose(&mut self.rng).expect("non-empty");
                let v = *VOWELS.choose(&mut self.rng).expect("non-empty");
                format!("{}{}", c as char, v as char)
            })
            .collect()
    }

    /// Two pseudo-words, unique across the corpus.
    fn title(&mut self) -> String {
        loop {
            let t = format!("{} {}", self.word(), self.word());
            if self.used.insert(t.clone()) {
                return t;
            }
        }
    }
}

fn topic_token(topic: usize, k: usize) -> String {
    format!("t{topic}w{k}")
}

fn background_token(k: usize) -> String {
    format!("bgw{k}")
}

/// Builds the planted corpus in memory. A pure function of the spec.
pub fn generate(spec: &PlantedSpec) -> Result<PlantedCorpus, SyngenError> {
    spec.validate()?;
    let mut names = Names {
        rng: ChaCha8Rng::seed_from_u64(derive_seed(spec.rng_seed, "syngen/names")),
        used: HashSet::new(),
    };

    let mut topics = Vec::with_capacity(spec.concept_count());
    let mut leaf_ordinal = 0;
    for a in 0..spec.n_l0 {
        let l0 = topics.len();
        topics.push(Topic {
            id: format!("fos-{a:02}"),
            title: names.title(),
            level: 0,
            parent: None,
            enriched_only: false,
        });
        for b in 0..spec.n_l1_per_l0 {
            let l1 = topics.len();
            topics.push(Topic {
                id: format!("fos-{a:02}-{b:02}"),
                title: names.title(),
                level: 1,
                parent: Some(l0),
                enriched_only: false,
            });
            for c in 0..spec.n_leaf_per_l1 {
                leaf_ordinal += 1;
                topics.push(Topic {
                    id: format!("fos-{a:02}-{b:02}-{c:02}"),
                    title: names.title(),
                    level: 2,
                    parent: Some(l1),
                    enriched_only: spec.enriched_every > 0 && leaf_ordinal % spec.enriched_every == 0,
                });
            }
        }
    }
    let leaves: Vec<usize> = (0..topics.len()).filter(|&t| topics[t].level == 2).collect();
    let lineage = |leaf: usize| -> [usize; 3] {
        let l1 = topics[leaf].parent.expect("leaf has a parent");
        [leaf, l1, topics[l1].parent.expect("L1 has a parent")]
    };
    let background_vocab = spec.vocab_per_topic.max(50);

    let paragraph_words = spec.paragraph_words;
    let paragraph = |rng: &mut ChaCha8Rng, title: &str, tokens: &mut dyn FnMut(&mut ChaCha8Rng) -> String| {
        let mut words = vec![title.to_owned()];
        words.extend((0..paragraph_words).map(|_| tokens(rng)));
        words.join(" ")
    };

    // Entities.
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(spec.rng_seed, "syngen/entities"));
    let mut entities: Vec<Entity> = Vec::new();
    let mut cluster: Vec<usize> = Vec::new();
    let mut outsiders: Vec<usize> = Vec::new();
    for (t, topic) in topics.iter().enumerate() {
        let vocab = spec.vocab_per_topic;
        let first_paragraph = paragraph(&mut rng, &topic.title, &mut |r| topic_token(t, r.random_range(0..vocab)));
        let mut kb_types = BTreeSet::new();
        if topic.enriched_only {
            kb_types.insert(ALLOWLISTED_TYPE.to_owned());
            outsiders.push(entities.len());
        } else {
            cluster.push(entities.len());
        }
        entities.push(Entity {
            id: topic.id.clone(),
            title: topic.title.clone(),
            first_paragraph,
            kb_types,
            out_links: BTreeSet::new(),
            in_links: BTreeSet::new(),
        });
    }
    let background_paragraph = |rng: &mut ChaCha8Rng, title: &str| {
        paragraph(rng, title, &mut |r| background_token(r.random_range(0..background_vocab)))
    };
    for k in 0..spec.n_decoys {
        cluster.push(entities.len());
        let title = names.title();
        entities.push(Entity {
            id: format!("ent-decoy-{k:03}"),
            first_paragraph: background_paragraph(&mut rng, &title),
            title,
            kb_types: [DECOY_TYPE.to_owned()].into(),
            out_links: BTreeSet::new(),
            in_links: BTreeSet::new(),
        });
    }
    let n_background = spec.n_entities.saturating_sub(entities.len());
    let first_background = entities.len();
    for k in 0..n_background {
        let title = names.title();
        entities.push(Entity {
            id: format!("ent-bg-{k:04}"),
            first_paragraph: background_paragraph(&mut rng, &title),
            title,
            kb_types: if k % 7 == 0 { ["event".to_owned()].into() } else { BTreeSet::new() },
            out_links: BTreeSet::new(),
            in_links: BTreeSet::new(),
        });
    }
    let mut clusters = vec![cluster];
    let background: Vec<usize> = (first_background..entities.len()).collect();
    clusters.extend(background.chunks(spec.background_cluster_size).map(<[usize]>::to_vec));
    // Enrichment-only leaves join background clusters round-robin, or form
    // their own cluster when there is no background.
    let n_clusters = clusters.len();
    for (k, e) in outsiders.into_iter().enumerate() {
        if n_clusters > 1 {
            clusters[1 + k % (n_clusters - 1)].push(e);
        } else {
            clusters.push(vec![e]);
        }
    }
    let ids: Vec<String> = entities.iter().map(|e| e.id.clone()).collect();
    for members in &clusters {
        for &from in members {
            for &to in members {
                if from != to {
                    entities[from].out_links.insert(ids[to].clone());
                }
            }
        }
    }
    let extra = (spec.noise_rate * spec.background_cluster_size as f64).round() as usize;
    for e in entities.iter_mut() {
        for _ in 0..extra {
            let to = &ids[rng.random_range(0..ids.len())];
            if *to != e.id {
                e.out_links.insert(to.clone());
            }
        }
    }

    // Documents.
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(spec.rng_seed, "syngen/documents"));
    let mut documents = Vec::with_capacity(spec.document_count());
    let mut document_topics = Vec::with_capacity(spec.document_count());
    let n_noise = (spec.noise_rate * spec.words_per_doc as f64).floor() as usize;
    let clean = spec.words_per_doc - n_noise;
    let total: f64 = spec.mixture.iter().sum();
    let n_leaf = (clean as f64 * spec.mixture[0] / total).round() as usize;
    let n_l1 = ((clean as f64 * spec.mixture[1] / total).round() as usize).min(clean - n_leaf);
    let n_l0 = clean - n_leaf - n_l1;
    for &leaf in &leaves {
        let [_, l1, l0] = lineage(leaf);
        for k in 0..spec.docs_per_leaf {
            let mut tokens: Vec<String> = Vec::with_capacity(spec.words_per_doc);
            for (topic, n) in [(leaf, n_leaf), (l1, n_l1), (l0, n_l0)] {
                tokens.extend((0..n).map(|_| topic_token(topic, rng.random_range(0..spec.vocab_per_topic))));
            }
            tokens.extend((0..n_noise).map(|_| background_token(rng.random_range(0..background_vocab))));
            tokens.shuffle(&mut rng);
            let split = tokens.len().min(6);
            documents.push(Document {
                id: format!("doc-{}-{k:04}", &topics[leaf].id["fos-".len()..]),
                title: tokens[..split].join(" "),
                keywords: vec![
                    topics[leaf].title.clone(),
                    topics[l1].title.clone(),
                    topics[l0].title.clone(),
                ],
                abstract_text: tokens[split..].join(" "),
                venue_id: Some(venue_id(&topics[l1].id)),
                references: BTreeSet::new(),
                citations: BTreeSet::new(),
            });
            document_topics.push(leaf);
        }
    }
    let n_docs = documents.len();
    for d in 0..n_docs {
        let block = d - d % spec.docs_per_leaf;
        let mut refs = BTreeSet::new();
        let wanted = spec.references_per_doc.min(n_docs - 1);
        let mut attempts = 0;
        while refs.len() < wanted && attempts < 20 * wanted.max(1) {
            attempts += 1;
            let to = if spec.docs_per_leaf > 1 && !rng.random_bool(spec.noise_rate) {
                block + rng.random_range(0..spec.docs_per_leaf)
            } else {
                rng.random_range(0..n_docs)
            };
            if to != d {
                refs.insert(documents[to].id.clone());
            }
        }
        documents[d].references = refs;
    }

    // Venues: one per L1, plus one with no members.
    let mut venues: Vec<Venue> = topics
        .iter()
        .filter(|t| t.level == 1)
        .map(|t| Venue {
            id: venue_id(&t.id),
            full_name: format!("Journal of {}", t.title),
            member_docs: BTreeSet::new(),
        })
        .collect();
    venues.push(Venue {
        id: "venue-empty".into(),
        full_name: format!("Proceedings of {}", names.title()),
        member_docs: BTreeSet::new(),
    });

    // Seeds.
    let mut seeds = SeedTaxonomy {
        type_allowlist: [ALLOWLISTED_TYPE.to_owned()].into(),
        type_blocklist: BLOCKED_TYPES.iter().map(|t| (*t).to_owned()).collect(),
        ..Default::default()
    };
    for t in &topics {
        match t.level {
            0 => {
                seeds.l0.insert(t.id.clone());
            }
            1 => {
                seeds.l1.insert(t.id.clone());
                let parent = &topics[t.parent.expect("L1 has a parent")];
                seeds.l0_l1_edges.insert((t.id.clone(), parent.id.clone()));
                seeds.concept_venue_map.insert(t.id.clone(), vec![venue_id(&t.id)]);
                seeds
                    .concept_venue_map
                    .entry(parent.id.clone())
                    .or_default()
                    .push(venue_id(&t.id));
            }
            _ => {}
        }
    }
    seeds.seed_fos.extend(seeds.l0.iter().chain(&seeds.l1).cloned());
    let room = spec.n_seeds - seeds.seed_fos.len();
    seeds.seed_fos.extend(
        leaves
            .iter()
            .filter(|&&l| !topics[l].enriched_only)
            .take(room)
            .map(|&l| topics[l].id.clone()),
    );

    // Ground truth.
    let mut truth = GroundTruth::default();
    for t in &topics {
        truth.fos.insert(t.id.clone(), t.level);
        if let Some(p) = t.parent {
            truth.tree_edges.push((t.id.clone(), topics[p].id.clone()));
        }
    }
    truth.tree_edges.sort();
    for (doc, &leaf) in documents.iter().zip(&document_topics) {
        for t in lineage(leaf) {
            truth.tag_pairs.push((doc.id.clone(), topics[t].id.clone()));
        }
    }
    truth.tag_pairs.sort();

    Ok(PlantedCorpus {
        spec: spec.clone(),
        topics,
        entities,
        documents,
        venues,
        seeds,
        truth,
        document_topics,
    })
}

fn venue_id(l1: &str) -> String {
    format!("venue-{}", &l1["fos-".len()..])
}

impl PlantedCorpus {
    /// The corpus as the loaders would see it after reading the files.
    pub fn snapshot(&self) -> Result<CorpusSnapshot, SyngenError> {
        let (entities, dropped) = build_entity_store(self.entities.clone());
        let documents = build_document_store(self.documents.clone())?;
        let venues = Store::from_items(self.venues.clone());
        Ok(CorpusSnapshot::assemble(entities, documents, venues, self.seeds.clone(), dropped))
    }

    pub fn entities_jsonl(&self) -> String {
        let mut out = String::new();
        let mut sorted: Vec<&Entity> = self.entities.iter().collect();
        sorted.sort_by(|a, b| a.id.cmp(&b.id));
        for e in sorted {
            let line = json!({
                "id": e.id,
                "title": e.title,
                "first_paragraph": e.first_paragraph,
                "kb_types": e.kb_types,
                "out_links": e.out_links,
            });
            let _ = writeln!(out, "{line}");
        }
        out
    }

    pub fn documents_jsonl(&self) -> String {
        let mut out = String::new();
        for d in &self.documents {
            let line = json!({
                "id": d.id,
                "title": d.title,
                "keywords": d.keywords,
                "abstract": d.abstract_text,
                "venue_id": d.venue_id,
                "references": d.references,
            });
            let _ = writeln!(out, "{line}");
        }
        out
    }

    pub fn venues_jsonl(&self) -> String {
        let mut out = String::new();
        for v in &self.venues {
            let _ = writeln!(out, "{}", json!({ "id": v.id, "full_name": v.full_name }));
        }
        out
    }

    pub fn seeds_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(&self.seeds).expect("seed taxonomy serializes");
        text.push('\n');
        text
    }

    /// Pipeline settings suited to this corpus: the vote threshold sits
    /// halfway between zero and the number of seeds in the concept cluster.
    pub fn suggested_config(&self) -> String {
        let cluster_seeds = self
            .seeds
            .seed_fos
            .iter()
            .filter(|id| self.truth.fos.contains_key(*id))
            .count();
        let cluster = self.topics.iter().filter(|t| !t.enriched_only).count() + self.spec.n_decoys;
        format!(
            "entities = \"entities.jsonl\"\n\
             documents = \"documents.jsonl\"\n\
             venues = \"venues.jsonl\"\n\
             seeds = \"seeds.json\"\n\
             embedding_fallback = true\n\
             rng_seed = {seed}\n\
             neighbors_n = {n}\n\
             vote_k = {k}\n\
             rc_threshold = 0.3\n",
            seed = self.spec.rng_seed,
            n = cluster.max(1),
            k = cluster_seeds / 2,
        )
    }

    pub fn tree_edges_tsv(&self) -> String {
        let mut out = String::new();
        for (c, p) in &self.truth.tree_edges {
            let _ = writeln!(out, "{c}\t{p}");
        }
        out
    }

    pub fn fos_tsv(&self) -> String {
        let mut out = String::new();
        for (id, level) in &self.truth.fos {
            let _ = writeln!(out, "{id}\t{level}");
        }
        out
    }

    /// In the tag file layout, every confidence 1.
    pub fn tag_pairs_tsv(&self) -> String {
        let mut out = String::new();
        for (d, c) in &self.truth.tag_pairs {
            let _ = writeln!(out, "{d}\t{c}\t1.000000");
        }
        out
    }

    /// Writes the corpus files, `pipeline.toml` and `ground_truth/*.tsv`.
    pub fn write(&self, dir: &Path) -> Result<(), SyngenError> {
        let files = [
            ("entities.jsonl", self.entities_jsonl()),
            ("documents.jsonl", self.documents_jsonl()),
            ("venues.jsonl", self.venues_jsonl()),
            ("seeds.json", self.seeds_json()),
            ("pipeline.toml", self.suggested_config()),
            ("ground_truth/fos.tsv", self.fos_tsv()),
            ("ground_truth/tree_edges.tsv", self.tree_edges_tsv()),
            ("ground_truth/tag_pairs.tsv", self.tag_pairs_tsv()),
        ];
        let io = |path: &Path| {
            let path = path.to_owned();
            move |source| SyngenError::Io { path, source }
        };
        std::fs::create_dir_all(dir.join("ground_truth")).map_err(io(dir))?;
        for (name, text) in files {
            let path = dir.join(name);
            std::fs::write(&path, text).map_err(io(&path))?;
        }
        log::info!(
            "syngen: wrote {} entities, {} documents, {} venues to {}",
            self.entities.len(),
            self.documents.len(),
            self.venues.len(),
            dir.display()
        );
        Ok(())
    }
}
