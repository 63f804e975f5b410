//! Iterative concept discovery: nearest-neighbor voting over the link graph
//! alternating with KB-type filtering and enrichment, grown from the seed set
//! until nothing new is admitted.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{CorpusSnapshot, EntityStore};
use crate::relatedness::{LinkIndex, RelatednessError};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum DiscoveryError {
    #[error("invalid discovery parameters: {0}")]
    InvalidParams(String),
    #[error("types both allow- and block-listed: {0:?}")]
    OverlappingTypeLists(Vec<String>),
    #[error(transparent)]
    Relatedness(#[from] RelatednessError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiscoveryParams {
    /// Neighbors inspected per entity.
    pub neighbors: usize,
    /// An entity is voted in when strictly more than this many of its
    /// neighbors are already concepts.
    pub vote_threshold: usize,
    pub max_iterations: usize,
    #[serde(default)]
    pub type_allowlist: BTreeSet<String>,
    #[serde(default)]
    pub type_blocklist: BTreeSet<String>,
}

impl Default for DiscoveryParams {
    fn default() -> Self {
        DiscoveryParams {
            neighbors: 100,
            vote_threshold: 40,
            max_iterations: 10,
            type_allowlist: BTreeSet::new(),
            type_blocklist: BTreeSet::new(),
        }
    }
}

impl DiscoveryParams {
    /// Defaults with the type lists taken from the seed taxonomy.
    pub fn from_seeds(snapshot: &CorpusSnapshot) -> Self {
        DiscoveryParams {
            type_allowlist: snapshot.seeds.type_allowlist.clone(),
            type_blocklist: snapshot.seeds.type_blocklist.clone(),
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), DiscoveryError> {
        if self.vote_threshold < 1 || self.vote_threshold > self.neighbors {
            return Err(DiscoveryError::InvalidParams(format!(
                "vote threshold {} must lie in [1, {}]",
                self.vote_threshold, self.neighbors
            )));
        }
        if self.max_iterations < 1 {
            return Err(DiscoveryError::InvalidParams(
                "max_iterations must be at least 1".into(),
            ));
        }
        let overlap: Vec<String> = self
            .type_allowlist
            .intersection(&self.type_blocklist)
            .cloned()
            .collect();
        if !overlap.is_empty() {
            return Err(DiscoveryError::OverlappingTypeLists(overlap));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Seed,
    Vote,
    TypeEnrichment,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Membership {
    pub provenance: Provenance,
    /// 0 for seeds.
    pub iteration: usize,
}

/// The discovered concept set with per-concept provenance.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FosRegistry {
    pub concepts: BTreeMap<String, Membership>,
    /// Concepts added by each completed iteration, in order.
    pub growth: Vec<usize>,
    /// Whether the last iteration added nothing.
    pub converged: bool,
}

#[derive(Serialize, Deserialize)]
struct RegistryLine {
    id: String,
    provenance: Provenance,
    iteration: usize,
}

impl FosRegistry {
    pub fn contains(&self, id: &str) -> bool {
        self.concepts.contains_key(id)
    }

    pub fn len(&self) -> usize {
        self.concepts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.concepts.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.concepts.keys().map(String::as_str)
    }

    /// One `{"id", "provenance", "iteration"}` object per line, by id.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for (id, m) in &self.concepts {
            let line = RegistryLine {
                id: id.clone(),
                provenance: m.provenance,
                iteration: m.iteration,
            };
            out.push_str(&serde_json::to_string(&line).expect("registry line serializes"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Self, serde_json::Error> {
        let mut registry = FosRegistry::default();
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let r: RegistryLine = serde_json::from_str(line)?;
            registry.concepts.insert(
                r.id,
                Membership {
                    provenance: r.provenance,
                    iteration: r.iteration,
                },
            );
        }
        Ok(registry)
    }
}

/// True iff strictly more than `vote_threshold` of the entity's top
/// `neighbors` are in `current`. Zero-closeness filler entries in the
/// neighbor list are not counted: they share no in-link with the entity.
pub fn knn_vote(
    entity: &str,
    current: &HashSet<String>,
    params: &DiscoveryParams,
    index: &LinkIndex,
) -> Result<bool, DiscoveryError> {
    let position = index.position(entity)?;
    Ok(vote_at(position, &membership_mask(current, index), params, index))
}

fn membership_mask<'a>(current: impl IntoIterator<Item = &'a String>, index: &LinkIndex) -> Vec<bool> {
    let mut mask = vec![false; index.entity_count()];
    for id in current {
        if let Ok(p) = index.position(id) {
            mask[p as usize] = true;
        }
    }
    mask
}

fn vote_at(position: u32, members: &[bool], params: &DiscoveryParams, index: &LinkIndex) -> bool {
    let hits = index
        .top_n_positions(position, params.neighbors)
        .iter()
        .filter(|&&(p, score)| score > 0.0 && members[p as usize])
        .count();
    hits > params.vote_threshold
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TypeFilterOutcome {
    /// Candidates carrying no blocklisted type.
    pub accepted: BTreeSet<String>,
    /// Candidates carrying at least one blocklisted type.
    pub rejected: BTreeSet<String>,
    /// Every entity in the store with an allowlisted and no blocklisted type,
    /// whether or not it was a candidate.
    pub enriched: BTreeSet<String>,
}

pub fn type_filter(
    candidates: &BTreeSet<String>,
    params: &DiscoveryParams,
    entities: &EntityStore,
) -> Result<TypeFilterOutcome, DiscoveryError> {
    params.validate()?;
    let blocked = |id: &str| {
        entities
            .get(id)
            .is_some_and(|e| e.kb_types.iter().any(|t| params.type_blocklist.contains(t)))
    };
    let (rejected, accepted): (BTreeSet<String>, BTreeSet<String>) =
        candidates.iter().cloned().partition(|id| blocked(id));
    let enriched = entities
        .iter()
        .filter(|e| e.kb_types.iter().any(|t| params.type_allowlist.contains(t)))
        .filter(|e| !blocked(&e.id))
        .map(|e| e.id.clone())
        .collect();
    Ok(TypeFilterOutcome {
        accepted,
        rejected,
        enriched,
    })
}

/// Grows the seed set to a fixpoint, or until `max_iterations` passes.
///
/// Each iteration votes every non-member against a frozen copy of the
/// current set, filters the voted candidates by type, adds type-enriched
/// entities, and merges at the end. Seeds are never removed.
pub fn discover(
    snapshot: &CorpusSnapshot,
    index: &LinkIndex,
    params: &DiscoveryParams,
) -> Result<FosRegistry, DiscoveryError> {
    params.validate()?;
    let mut registry = FosRegistry::default();
    for id in &snapshot.seeds.seed_fos {
        registry.concepts.insert(
            id.clone(),
            Membership {
                provenance: Provenance::Seed,
                iteration: 0,
            },
        );
    }
    log::info!("discovery: starting from {} seeds", registry.len());

    for iteration in 1..=params.max_iterations {
        let members = membership_mask(registry.concepts.keys(), index);
        let candidates: BTreeSet<String> = (0..index.entity_count() as u32)
            .into_par_iter()
            .filter(|&p| !members[p as usize] && vote_at(p, &members, params, index))
            .map(|p| index.id(p).to_owned())
            .collect();
        let outcome = type_filter(&candidates, params, &snapshot.entities)?;

        let mut added = 0usize;
        for id in &outcome.accepted {
            if !registry.contains(id) {
                registry.concepts.insert(
                    id.clone(),
                    Membership {
                        provenance: Provenance::Vote,
                        iteration,
                    },
                );
                added += 1;
            }
        }
        for id in &outcome.enriched {
            if !registry.contains(id) {
                registry.concepts.insert(
                    id.clone(),
                    Membership {
                        provenance: Provenance::TypeEnrichment,
                        iteration,
                    },
                );
                added += 1;
            }
        }
        log::info!(
            "discovery iteration {iteration}: {} voted, {} rejected by type, {added} added, {} total",
            candidates.len(),
            outcome.rejected.len(),
            registry.len()
        );
        registry.growth.push(added);
        if added == 0 {
            registry.converged = true;
            break;
        }
    }
    Ok(registry)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{build_entity_store, Entity, SeedTaxonomy, Store};
    use crate::relatedness::build_link_index;

    fn entity(id: &str, types: &[&str], out: Vec<String>) -> Entity {
        Entity {
            id: id.into(),
            title: id.into(),
            first_paragraph: format!("{id} text"),
            kb_types: types.iter().map(|s| s.to_string()).collect(),
            out_links: out.into_iter().collect(),
            in_links: Default::default(),
        }
    }

    /// `e` shares all in-links with `t000..t099` and none with `u000..u049`.
    fn hundred_neighbor_fixture() -> (EntityStore, LinkIndex) {
        let near: Vec<String> = (0..100).map(|i| format!("t{i:03}")).collect();
        let mut entities = vec![];
        for h in 0..3 {
            let mut out = near.clone();
            out.push("e".into());
            entities.push(entity(&format!("hub{h}"), &[], out));
        }
        entities.push(entity("other_hub", &[], (0..50).map(|i| format!("u{i:03}")).collect()));
        entities.push(entity("e", &[], vec![]));
        for id in &near {
            entities.push(entity(id, &[], vec![]));
        }
        for i in 0..50 {
            entities.push(entity(&format!("u{i:03}"), &[], vec![]));
        }
        let store = build_entity_store(entities).0;
        let index = build_link_index(&store);
        (store, index)
    }

    #[test]
    fn vote_is_strictly_more_than_k() {
        let (_, index) = hundred_neighbor_fixture();
        let params = DiscoveryParams::default();
        let top = index.top_n_neighbors("e", 100).unwrap();
        assert!(top.iter().all(|(id, s)| id.starts_with('t') && *s == 1.0));

        let forty_one: HashSet<String> = (0..41).map(|i| format!("t{i:03}")).collect();
        assert!(knn_vote("e", &forty_one, &params, &index).unwrap());
        let forty: HashSet<String> = (0..40).map(|i| format!("t{i:03}")).collect();
        assert!(!knn_vote("e", &forty, &params, &index).unwrap());
        assert!(!knn_vote("e", &HashSet::new(), &params, &index).unwrap());
    }

    #[test]
    fn non_neighbors_do_not_count() {
        let (_, index) = hundred_neighbor_fixture();
        let far: HashSet<String> = (0..50).map(|i| format!("u{i:03}")).collect();
        assert!(!knn_vote("e", &far, &DiscoveryParams::default(), &index).unwrap());
    }

    #[test]
    fn type_filter_rejects_enriches_and_passes_untyped() {
        let entities = Store::from_items(vec![
            entity("alice", &["person"], vec![]),
            entity("insulin", &["protein"], vec![]),
            entity("plain", &[], vec![]),
        ]);
        let params = DiscoveryParams {
            type_allowlist: ["protein".to_string()].into(),
            type_blocklist: ["person".to_string()].into(),
            ..Default::default()
        };
        let candidates: BTreeSet<String> = ["alice".to_string(), "plain".to_string()].into();
        let out = type_filter(&candidates, &params, &entities).unwrap();
        assert_eq!(out.rejected, ["alice".to_string()].into());
        assert_eq!(out.accepted, ["plain".to_string()].into());
        assert_eq!(out.enriched, ["insulin".to_string()].into());
    }

    #[test]
    fn overlapping_type_lists_are_a_configuration_error() {
        let params = DiscoveryParams {
            type_allowlist: ["x".to_string()].into(),
            type_blocklist: ["x".to_string()].into(),
            ..Default::default()
        };
        assert_eq!(
            type_filter(&BTreeSet::new(), &params, &Store::default()),
            Err(DiscoveryError::OverlappingTypeLists(vec!["x".into()]))
        );
    }

    fn snapshot(entities: EntityStore, seeds: &[&str], block: &[&str]) -> CorpusSnapshot {
        let seeds = SeedTaxonomy {
            seed_fos: seeds.iter().map(|s| s.to_string()).collect(),
            type_blocklist: block.iter().map(|s| s.to_string()).collect(),
            ..Default::default()
        };
        CorpusSnapshot::assemble(entities, Store::default(), Store::default(), seeds, 0)
    }

    /// 20 seeds and 5 candidates all linked from the same 4 hubs; 30
    /// unrelated entities linked from a separate hub set.
    fn planted_cluster(blocked_candidate: bool) -> CorpusSnapshot {
        let cluster: Vec<String> = (0..20)
            .map(|i| format!("s{i:02}"))
            .chain((0..5).map(|i| format!("c{i}")))
            .collect();
        let outside: Vec<String> = (0..30).map(|i| format!("x{i:02}")).collect();
        let mut entities = vec![];
        for h in 0..4 {
            entities.push(entity(&format!("h{h}"), &[], cluster.clone()));
            entities.push(entity(&format!("g{h}"), &[], outside.clone()));
        }
        for id in &cluster {
            let types: &[&str] = if blocked_candidate && id == "c4" { &["person"] } else { &[] };
            entities.push(entity(id, types, vec![]));
        }
        for id in &outside {
            entities.push(entity(id, &[], vec![]));
        }
        let seeds: Vec<String> = (0..20).map(|i| format!("s{i:02}")).collect();
        let seed_refs: Vec<&str> = seeds.iter().map(String::as_str).collect();
        snapshot(build_entity_store(entities).0, &seed_refs, &["person"])
    }

    #[test]
    fn planted_cluster_is_found_in_one_iteration() {
        let snap = planted_cluster(false);
        let index = build_link_index(&snap.entities);
        let params = DiscoveryParams {
            neighbors: 24,
            vote_threshold: 15,
            type_blocklist: snap.seeds.type_blocklist.clone(),
            ..Default::default()
        };
        let registry = discover(&snap, &index, &params).unwrap();
        assert_eq!(registry.len(), 25);
        for i in 0..5 {
            let m = registry.concepts[&format!("c{i}")];
            assert_eq!(m, Membership { provenance: Provenance::Vote, iteration: 1 });
        }
        assert_eq!(registry.growth, vec![5, 0]);
        assert!(registry.converged);
    }

    #[test]
    fn blocklisted_entity_never_enters() {
        let snap = planted_cluster(true);
        let index = build_link_index(&snap.entities);
        let params = DiscoveryParams {
            neighbors: 24,
            vote_threshold: 15,
            type_blocklist: snap.seeds.type_blocklist.clone(),
            ..Default::default()
        };
        let registry = discover(&snap, &index, &params).unwrap();
        assert!(!registry.contains("c4"));
        assert_eq!(registry.len(), 24);
    }

    #[test]
    fn seeds_only_when_nothing_clears_the_vote() {
        let snap = planted_cluster(false);
        let index = build_link_index(&snap.entities);
        let registry = discover(&snap, &index, &DiscoveryParams::default()).unwrap();
        assert_eq!(registry.len(), 20);
        assert_eq!(registry.growth, vec![0]);
        assert!(registry.concepts.values().all(|m| m.provenance == Provenance::Seed));
    }

    #[test]
    fn seeds_survive_the_blocklist() {
        let mut snap = planted_cluster(false);
        snap.seeds.seed_fos.insert("x00".into());
        let registry = discover(&snap, &build_link_index(&snap.entities), &DiscoveryParams {
            type_blocklist: ["person".into()].into(),
            ..Default::default()
        })
        .unwrap();
        assert!(registry.contains("x00"));
    }

    #[test]
    fn registry_jsonl_round_trips() {
        let snap = planted_cluster(false);
        let index = build_link_index(&snap.entities);
        let params = DiscoveryParams { neighbors: 24, vote_threshold: 15, ..Default::default() };
        let registry = discover(&snap, &index, &params).unwrap();
        let text = registry.to_jsonl();
        assert!(text.lines().next().unwrap().starts_with(r#"{"id":"c0","provenance":"vote","iteration":1}"#));
        let back = FosRegistry::from_jsonl(&text).unwrap();
        assert_eq!(back.concepts, registry.concepts);
    }

    #[test]
    fn invalid_params_are_rejected() {
        let bad = DiscoveryParams { neighbors: 10, vote_threshold: 11, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = DiscoveryParams { max_iterations: 0, ..Default::default() };
        assert!(bad.validate().is_err());
    }
}
