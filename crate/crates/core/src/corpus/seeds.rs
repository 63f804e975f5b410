use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{CorpusError, EntityStore, VenueStore};

/// Curated starting point: top-level disciplines (L0), sub-domains (L1), the
/// wider seed concept set, curated L1→L0 edges, concept→venue curation and
/// the KB type lists used during discovery.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedTaxonomy {
    #[serde(default)]
    pub l0: BTreeSet<String>,
    #[serde(default)]
    pub l1: BTreeSet<String>,
    #[serde(default)]
    pub seed_fos: BTreeSet<String>,
    /// `(child, parent)` pairs.
    #[serde(default)]
    pub l0_l1_edges: BTreeSet<(String, String)>,
    #[serde(default)]
    pub concept_venue_map: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    pub type_allowlist: BTreeSet<String>,
    #[serde(default)]
    pub type_blocklist: BTreeSet<String>,
}

impl SeedTaxonomy {
    /// Parses a seed file and checks the invariants that need no other store.
    pub fn parse(text: &str) -> Result<Self, CorpusError> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| CorpusError::Seeds(e.to_string()))?;
        if let Some(obj) = value.as_object() {
            const KNOWN: [&str; 7] = [
                "l0",
                "l1",
                "seed_fos",
                "l0_l1_edges",
                "concept_venue_map",
                "type_allowlist",
                "type_blocklist",
            ];
            for key in obj.keys().filter(|k| !KNOWN.contains(&k.as_str())) {
                log::warn!("seed taxonomy: ignoring unknown field {key:?}");
            }
        }
        let seeds: SeedTaxonomy =
            serde_json::from_value(value).map_err(|e| CorpusError::Seeds(e.to_string()))?;
        seeds.check_shape()?;
        Ok(seeds)
    }

    fn check_shape(&self) -> Result<(), CorpusError> {
        let overlap: Vec<&String> = self.l0.intersection(&self.l1).collect();
        if !overlap.is_empty() {
            return Err(CorpusError::Seeds(format!(
                "ids listed as both L0 and L1: {overlap:?}"
            )));
        }
        let missing: Vec<&String> = self
            .l0
            .iter()
            .chain(&self.l1)
            .filter(|id| !self.seed_fos.contains(*id))
            .collect();
        if !missing.is_empty() {
            return Err(CorpusError::Seeds(format!(
                "L0/L1 ids missing from seed_fos: {missing:?}"
            )));
        }
        for (child, parent) in &self.l0_l1_edges {
            if !self.l1.contains(child) || !self.l0.contains(parent) {
                return Err(CorpusError::Seeds(format!(
                    "curated edge {child} -> {parent} must run from an L1 to an L0 concept"
                )));
            }
        }
        Ok(())
    }

    /// Checks that every referenced entity and venue exists.
    pub fn check_references(
        &self,
        entities: &EntityStore,
        venues: &VenueStore,
    ) -> Result<(), CorpusError> {
        if let Some(id) = self.seed_fos.iter().find(|id| !entities.contains(id)) {
            return Err(CorpusError::Seeds(format!("unknown entity id {id:?}")));
        }
        for (concept, mapped) in &self.concept_venue_map {
            if !entities.contains(concept) {
                return Err(CorpusError::Seeds(format!(
                    "concept_venue_map: unknown entity id {concept:?}"
                )));
            }
            if let Some(v) = mapped.iter().find(|v| !venues.contains(v)) {
                return Err(CorpusError::Seeds(format!(
                    "concept_venue_map: unknown venue id {v:?} for {concept:?}"
                )));
            }
        }
        Ok(())
    }

    pub fn is_l0(&self, id: &str) -> bool {
        self.l0.contains(id)
    }

    pub fn is_l1(&self, id: &str) -> bool {
        self.l1.contains(id)
    }

    /// True for concepts whose parents come only from curation.
    pub fn is_curated_level(&self, id: &str) -> bool {
        self.is_l0(id) || self.is_l1(id)
    }
}

/// Reads `seeds.json` and validates it against the loaded stores.
pub fn load_seed_taxonomy(
    path: &Path,
    entities: &EntityStore,
    venues: &VenueStore,
) -> Result<SeedTaxonomy, CorpusError> {
    let text = std::fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.to_owned(),
        source,
    })?;
    let seeds = SeedTaxonomy::parse(&text)?;
    seeds.check_references(entities, venues)?;
    Ok(seeds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Entity, Store};

    fn entity(id: &str) -> Entity {
        Entity {
            id: id.into(),
            title: id.into(),
            first_paragraph: format!("{id} is a field"),
            kb_types: Default::default(),
            out_links: Default::default(),
            in_links: Default::default(),
        }
    }

    #[test]
    fn two_seed_registry_is_valid() {
        let seeds = SeedTaxonomy::parse(
            r#"{"l0":["physics"],"l1":["machine_learning"],"seed_fos":["physics","machine_learning"]}"#,
        )
        .unwrap();
        let entities = Store::from_items(vec![entity("physics"), entity("machine_learning")]);
        seeds.check_references(&entities, &Store::default()).unwrap();
        assert_eq!(seeds.seed_fos.len(), 2);
    }

    #[test]
    fn unknown_seed_entity_is_named() {
        let seeds = SeedTaxonomy::parse(r#"{"seed_fos":["physics","ghost"]}"#).unwrap();
        let entities = Store::from_items(vec![entity("physics")]);
        let err = seeds.check_references(&entities, &Store::default()).unwrap_err();
        assert!(err.to_string().contains("ghost"), "{err}");
    }

    #[test]
    fn l0_l1_overlap_is_rejected() {
        let err = SeedTaxonomy::parse(r#"{"l0":["x"],"l1":["x"],"seed_fos":["x"]}"#).unwrap_err();
        assert!(err.to_string().contains("both L0 and L1"), "{err}");
    }

    #[test]
    fn unknown_mapped_venue_is_rejected() {
        let seeds = SeedTaxonomy::parse(
            r#"{"l0":["a"],"seed_fos":["a"],"concept_venue_map":{"a":["v9"]}}"#,
        )
        .unwrap();
        let entities = Store::from_items(vec![entity("a")]);
        let err = seeds.check_references(&entities, &Store::default()).unwrap_err();
        assert!(err.to_string().contains("v9"));
    }

    #[test]
    fn curated_edges_must_point_from_l1_to_l0() {
        let err = SeedTaxonomy::parse(
            r#"{"l0":["a"],"l1":["b"],"seed_fos":["a","b"],"l0_l1_edges":[["a","b"]]}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("L1 to an L0"));
    }

    #[test]
    fn l0_must_be_listed_in_seed_fos() {
        assert!(SeedTaxonomy::parse(r#"{"l0":["a"],"seed_fos":[]}"#).is_err());
    }
}
