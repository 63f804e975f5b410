//! Concept hierarchy induction from weighted subsumption.
//!
//! For concepts `i`, `j` with tagged document sets `I`, `J`, the weighted
//! relative coverage
//!
//! ```text
//! RC(i, j) = Σ_{k∈I∩J} w_ik / Σ_{k∈I} w_ik  -  Σ_{k∈I∩J} w_jk / Σ_{k∈J} w_jk
//! ```
//!
//! makes `i` a child of `j` when it exceeds a positive threshold. An edge is
//! kept only when the parent's total tag weight exceeds the child's (ids
//! break ties), which orders every path and rules out cycles. Parents of L0
//! and L1 concepts come only from the curated list.

mod dag;
mod index;

use std::collections::{BTreeSet, HashSet};
use std::fmt::Write as _;

use rayon::prelude::*;

pub use dag::{assign_levels, check_dag, DagDiagnostics, HierarchyEdge, LeveledDag, MAX_LEVEL, ORPHAN_LEVEL};
pub use index::{build_tag_index, PostingList, TagIndex};

use crate::corpus::SeedTaxonomy;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum HierarchyError {
    #[error("unknown concept {0:?}")]
    UnknownConcept(String),
    #[error("duplicate tag pair ({concept}, {document})")]
    DuplicatePair { concept: String, document: String },
    #[error("weight {weight} of ({concept}, {document}) is outside (0, 1]")]
    InvalidWeight {
        concept: String,
        document: String,
        weight: f64,
    },
    #[error("threshold {0} must be positive")]
    InvalidThreshold(f64),
    #[error("cycle: {}", .0.join(" -> "))]
    Cycle(Vec<String>),
}

/// Concept pairs sharing at least one document, each once with `a < b`.
pub fn overlapping_pairs(index: &TagIndex) -> Vec<(String, String)> {
    let names: Vec<&str> = index.concepts().map(|(c, _)| c).collect();
    let mut by_doc: Vec<Vec<u32>> = Vec::new();
    for (ci, (_, list)) in index.concepts().enumerate() {
        for &(d, _) in list.entries() {
            let d = d as usize;
            if by_doc.len() <= d {
                by_doc.resize_with(d + 1, Vec::new);
            }
            by_doc[d].push(ci as u32);
        }
    }
    let mut pairs: HashSet<(u32, u32)> = HashSet::new();
    for concepts in &by_doc {
        for (x, &a) in concepts.iter().enumerate() {
            for &b in &concepts[x + 1..] {
                pairs.insert((a.min(b), a.max(b)));
            }
        }
    }
    let mut pairs: Vec<(u32, u32)> = pairs.into_iter().collect();
    pairs.sort_unstable();
    pairs
        .into_iter()
        .map(|(a, b)| (names[a as usize].to_owned(), names[b as usize].to_owned()))
        .collect()
}

/// True when `parent` may sit above `child`: strictly larger tag mass, or
/// equal mass and a larger id.
pub fn mass_order_allows(index: &TagIndex, child: &str, parent: &str) -> Result<bool, HierarchyError> {
    let (mc, mp) = (index.mass(child)?, index.mass(parent)?);
    Ok(mp > mc || (mp == mc && parent > child))
}

/// Computed edges only: every ordered pair with `RC > threshold` that passes
/// the mass ordering.
pub fn computed_edges(index: &TagIndex, threshold: f64) -> Result<Vec<HierarchyEdge>, HierarchyError> {
    if threshold.is_nan() || threshold <= 0.0 {
        return Err(HierarchyError::InvalidThreshold(threshold));
    }
    let pairs = overlapping_pairs(index);
    let scored: Vec<Option<HierarchyEdge>> = pairs
        .par_iter()
        .map(|(a, b)| -> Result<Option<HierarchyEdge>, HierarchyError> {
            let rc = index.relative_coverage(a, b)?;
            let (child, parent, rc) = if rc > threshold {
                (a, b, rc)
            } else if -rc > threshold {
                (b, a, -rc)
            } else {
                return Ok(None);
            };
            if !mass_order_allows(index, child, parent)? {
                log::debug!("dropping {child} -> {parent}: parent mass does not exceed child mass");
                return Ok(None);
            }
            Ok(Some(HierarchyEdge {
                child: child.clone(),
                parent: parent.clone(),
                rc,
                curated: false,
            }))
        })
        .collect::<Result<_, _>>()?;
    let mut edges: Vec<HierarchyEdge> = scored.into_iter().flatten().collect();
    sort_edges(&mut edges);
    Ok(edges)
}

fn sort_edges(edges: &mut [HierarchyEdge]) {
    edges.sort_by(|a, b| (&a.child, &a.parent).cmp(&(&b.child, &b.parent)));
}

/// Builds the leveled DAG: computed edges for every concept outside L0/L1,
/// curated edges for L1 concepts, none for L0.
pub fn build_hierarchy(
    index: &TagIndex,
    threshold: f64,
    seeds: &SeedTaxonomy,
) -> Result<LeveledDag, HierarchyError> {
    let mut edges: Vec<HierarchyEdge> = computed_edges(index, threshold)?
        .into_iter()
        .filter(|e| !seeds.is_curated_level(&e.child))
        .collect();
    for (child, parent) in &seeds.l0_l1_edges {
        let rc = if index.contains(child) && index.contains(parent) {
            index.relative_coverage(child, parent)?
        } else {
            0.0
        };
        edges.push(HierarchyEdge {
            child: child.clone(),
            parent: parent.clone(),
            rc,
            curated: true,
        });
    }
    sort_edges(&mut edges);

    let mut nodes: BTreeSet<String> = index.concepts().map(|(c, _)| c.to_owned()).collect();
    nodes.extend(seeds.l0.iter().cloned());
    nodes.extend(seeds.l1.iter().cloned());
    let levels = assign_levels(&nodes, &edges, seeds)?;
    log::info!(
        "hierarchy: {} concepts, {} edges ({} curated)",
        nodes.len(),
        edges.len(),
        seeds.l0_l1_edges.len()
    );
    Ok(LeveledDag { nodes, edges, levels })
}

/// `child \t parent \t rc`, six decimals.
pub fn edges_to_tsv(dag: &LeveledDag) -> String {
    let mut out = String::new();
    for e in &dag.edges {
        let _ = writeln!(out, "{}\t{}\t{:.6}", e.child, e.parent, e.rc);
    }
    out
}

/// `concept \t level`.
pub fn levels_to_tsv(dag: &LeveledDag) -> String {
    let mut out = String::new();
    for (c, l) in &dag.levels {
        let _ = writeln!(out, "{c}\t{l}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tagging::TagPair;

    fn pair(concept: &str, document: &str, confidence: f64) -> TagPair {
        TagPair { concept: concept.into(), document: document.into(), confidence }
    }

    fn worked_example() -> TagIndex {
        build_tag_index(&[
            pair("i", "d1", 0.9),
            pair("i", "d2", 0.8),
            pair("j", "d1", 0.5),
            pair("j", "d2", 0.5),
            pair("j", "d3", 1.0),
        ])
        .unwrap()
    }

    #[test]
    fn threshold_gates_the_worked_example() {
        let idx = worked_example();
        let dag = build_hierarchy(&idx, 0.3, &SeedTaxonomy::default()).unwrap();
        assert_eq!(dag.edges.len(), 1);
        assert!(dag.has_edge("i", "j"));
        assert!((dag.edges[0].rc - 0.5).abs() < 1e-12);
        assert_eq!(dag.levels["j"], ORPHAN_LEVEL);
        assert_eq!(dag.levels["i"], 3);
        let none = build_hierarchy(&idx, 0.6, &SeedTaxonomy::default()).unwrap();
        assert!(none.edges.is_empty());
        assert!(matches!(
            build_hierarchy(&idx, 0.0, &SeedTaxonomy::default()),
            Err(HierarchyError::InvalidThreshold(_))
        ));
    }

    #[test]
    fn identical_lists_give_no_edge() {
        let idx = build_tag_index(&[pair("a", "d1", 0.4), pair("b", "d1", 0.4)]).unwrap();
        assert!(build_hierarchy(&idx, 0.2, &SeedTaxonomy::default()).unwrap().edges.is_empty());
    }

    #[test]
    fn mass_guard_blocks_lighter_parents() {
        // c covers all of x's one document, but x is heavier overall.
        let idx = build_tag_index(&[
            pair("x", "d1", 0.2),
            pair("x", "d2", 1.0),
            pair("x", "d3", 1.0),
            pair("c", "d1", 1.0),
            pair("c", "d4", 0.1),
        ])
        .unwrap();
        let rc = idx.relative_coverage("c", "x").unwrap();
        assert!(rc > 0.3, "{rc}");
        assert!(mass_order_allows(&idx, "c", "x").unwrap());
        // Reverse the masses: the lighter concept cannot become a parent.
        let idx = build_tag_index(&[
            pair("x", "d1", 0.2),
            pair("x", "d2", 0.1),
            pair("c", "d1", 1.0),
            pair("c", "d4", 1.0),
            pair("c", "d5", 1.0),
        ])
        .unwrap();
        let rc = idx.relative_coverage("x", "c").unwrap();
        assert!(rc > 0.3, "{rc}");
        assert!(computed_edges(&idx, 0.3).unwrap().iter().all(|e| e.parent == "c"));
    }

    #[test]
    fn curated_edges_replace_computed_ones_among_seed_levels() {
        // Tags make "b" look like a child of "a", but curation says b -> r.
        let mut tags = vec![];
        for k in 0..10 {
            tags.push(pair("a", &format!("d{k}"), 1.0));
            tags.push(pair("r", &format!("d{k}"), 1.0));
            tags.push(pair("r", &format!("e{k}"), 1.0));
        }
        for k in 0..6 {
            tags.push(pair("b", &format!("d{k}"), 1.0));
        }
        for k in 0..3 {
            tags.push(pair("leaf", &format!("d{k}"), 0.9));
        }
        let idx = build_tag_index(&tags).unwrap();
        let seeds = SeedTaxonomy {
            l0: ["r".to_string(), "a".to_string()].into(),
            l1: ["b".to_string()].into(),
            l0_l1_edges: [("b".to_string(), "r".to_string())].into(),
            ..Default::default()
        };
        let dag = build_hierarchy(&idx, 0.3, &seeds).unwrap();
        let b_parents: Vec<&str> = dag.parents_of("b").map(|e| e.parent.as_str()).collect();
        assert_eq!(b_parents, ["r"]);
        assert!(dag.parents_of("a").next().is_none());
        assert!(dag.parents_of("r").next().is_none());
        assert!(dag.has_edge("leaf", "b"));
        assert_eq!((dag.levels["r"], dag.levels["a"], dag.levels["b"]), (0, 0, 1));
        assert_eq!(dag.levels["leaf"], 2);
        assert!(check_dag(&dag).acyclic);
    }

    #[test]
    fn tsv_rendering() {
        let dag = build_hierarchy(&worked_example(), 0.3, &SeedTaxonomy::default()).unwrap();
        assert_eq!(edges_to_tsv(&dag), "i\tj\t0.500000\n");
        assert_eq!(levels_to_tsv(&dag), "i\t3\nj\t2\n");
    }
}
