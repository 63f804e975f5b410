//! Link-based semantic closeness between entities.
//!
//! Closeness is the normalized link distance over in-link sets, turned into a
//! similarity:
//!
//! ```text
//! closeness(a, b) = 1 - (ln max(|A|,|B|) - ln |A∩B|) / (ln W - ln min(|A|,|B|))
//! ```
//!
//! where `A`, `B` are the sets of entities linking to `a` and `b` and `W` is
//! the number of entities. The score is clamped to `[0, 1]` and is exactly 0
//! when the in-link sets are disjoint or either is empty.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt::Write as _;

use crate::corpus::EntityStore;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum RelatednessError {
    #[error("unknown entity {0:?}")]
    UnknownEntity(String),
}

/// Frozen in-link and out-link adjacency over dense entity positions.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkIndex {
    ids: Vec<String>,
    position: HashMap<String, u32>,
    in_links: Vec<Vec<u32>>,
    out_links: Vec<Vec<u32>>,
}

/// Builds the index over every entity in the store.
pub fn build_link_index(entities: &EntityStore) -> LinkIndex {
    let ids: Vec<String> = entities.iter().map(|e| e.id.clone()).collect();
    let position: HashMap<String, u32> = ids
        .iter()
        .enumerate()
        .map(|(i, id)| (id.clone(), i as u32))
        .collect();
    let resolve = |set: &std::collections::BTreeSet<String>| -> Vec<u32> {
        let mut v: Vec<u32> = set.iter().filter_map(|id| position.get(id).copied()).collect();
        v.sort_unstable();
        v
    };
    let in_links = entities.iter().map(|e| resolve(&e.in_links)).collect();
    let out_links = entities.iter().map(|e| resolve(&e.out_links)).collect();
    LinkIndex {
        ids,
        position,
        in_links,
        out_links,
    }
}

impl LinkIndex {
    /// Total entity count `W`.
    pub fn entity_count(&self) -> usize {
        self.ids.len()
    }

    pub fn id(&self, position: u32) -> &str {
        &self.ids[position as usize]
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn position(&self, id: &str) -> Result<u32, RelatednessError> {
        self.position
            .get(id)
            .copied()
            .ok_or_else(|| RelatednessError::UnknownEntity(id.to_owned()))
    }

    pub fn in_links(&self, position: u32) -> &[u32] {
        &self.in_links[position as usize]
    }

    pub fn semantic_closeness(&self, a: &str, b: &str) -> Result<f64, RelatednessError> {
        Ok(self.closeness_at(self.position(a)?, self.position(b)?))
    }

    pub(crate) fn closeness_at(&self, a: u32, b: u32) -> f64 {
        let (la, lb) = (self.in_links(a), self.in_links(b));
        let shared = if a == b { la.len() } else { intersection_len(la, lb) };
        closeness_from_counts(la.len(), lb.len(), shared, self.entity_count())
    }

    /// The `n` closest entities to `id` (excluding itself), by descending
    /// score with ascending id breaking ties. Entities sharing no in-link
    /// score 0 and fill the tail in id order.
    pub fn top_n_neighbors(&self, id: &str, n: usize) -> Result<Vec<(String, f64)>, RelatednessError> {
        let e = self.position(id)?;
        Ok(self
            .top_n_positions(e, n)
            .into_iter()
            .map(|(p, s)| (self.ids[p as usize].clone(), s))
            .collect())
    }

    /// Position-level variant of [`Self::top_n_neighbors`]. Only entities
    /// co-linked with `e` are scored explicitly; their shared in-link counts
    /// come from walking the out-links of `e`'s in-linkers.
    pub fn top_n_positions(&self, e: u32, n: usize) -> Vec<(u32, f64)> {
        let mut shared: HashMap<u32, usize> = HashMap::new();
        for &linker in self.in_links(e) {
            for &target in &self.out_links[linker as usize] {
                if target != e {
                    *shared.entry(target).or_default() += 1;
                }
            }
        }
        let size_e = self.in_links(e).len();
        let w = self.entity_count();
        let mut scored: Vec<(u32, f64)> = shared
            .into_iter()
            .map(|(t, s)| (t, closeness_from_counts(size_e, self.in_links(t).len(), s, w)))
            .collect();
        scored.sort_by(rank_order);
        let mut positive: Vec<(u32, f64)> = scored.into_iter().filter(|&(_, s)| s > 0.0).collect();
        positive.truncate(n);
        if positive.len() < n {
            let mut taken: Vec<u32> = positive.iter().map(|&(p, _)| p).collect();
            taken.push(e);
            taken.sort_unstable();
            let fill = n - positive.len();
            positive.extend(
                (0..w as u32)
                    .filter(|p| taken.binary_search(p).is_err())
                    .take(fill)
                    .map(|p| (p, 0.0)),
            );
        }
        positive
    }

    /// Tab-separated dump of every entity's top-`n` list.
    pub fn dump_top_n_tsv(&self, n: usize) -> String {
        let mut out = String::new();
        for e in 0..self.entity_count() as u32 {
            for (p, s) in self.top_n_positions(e, n) {
                let _ = writeln!(out, "{}\t{}\t{:.6}", self.id(e), self.id(p), s);
            }
        }
        out
    }
}

/// Descending score, ascending position (positions follow id order).
fn rank_order(a: &(u32, f64), b: &(u32, f64)) -> Ordering {
    b.1.partial_cmp(&a.1)
        .unwrap_or(Ordering::Equal)
        .then(a.0.cmp(&b.0))
}

pub(crate) fn intersection_len(a: &[u32], b: &[u32]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

/// Closeness from set sizes alone.
pub fn closeness_from_counts(size_a: usize, size_b: usize, shared: usize, total: usize) -> f64 {
    let (small, large) = (size_a.min(size_b), size_a.max(size_b));
    if small == 0 || shared == 0 {
        return 0.0;
    }
    let numerator = (large as f64).ln() - (shared as f64).ln();
    let denominator = (total as f64).ln() - (small as f64).ln();
    if denominator <= 0.0 {
        // Both sets span the whole graph.
        return if numerator <= 0.0 { 1.0 } else { 0.0 };
    }
    (1.0 - numerator / denominator).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{build_entity_store, Entity};

    fn store(links: &[(&str, &[&str])]) -> EntityStore {
        let entities = links
            .iter()
            .map(|(id, out)| Entity {
                id: id.to_string(),
                title: id.to_string(),
                first_paragraph: String::new(),
                kb_types: Default::default(),
                out_links: out.iter().map(|s| s.to_string()).collect(),
                in_links: Default::default(),
            })
            .collect();
        build_entity_store(entities).0
    }

    #[test]
    fn three_entity_index() {
        let idx = build_link_index(&store(&[("a", &["b"]), ("b", &["c"]), ("c", &[])]));
        assert_eq!(idx.entity_count(), 3);
        assert!(idx.in_links(idx.position("a").unwrap()).is_empty());
        let again = build_link_index(&store(&[("a", &["b"]), ("b", &["c"]), ("c", &[])]));
        assert_eq!(idx, again);
    }

    #[test]
    fn hand_evaluated_example() {
        // W = 16, |A| = 4, |B| = 2, |A∩B| = 2 -> 1 - ln2/ln8 = 2/3
        let s = closeness_from_counts(4, 2, 2, 16);
        assert!((s - 2.0 / 3.0).abs() < 1e-12, "{s}");
    }

    #[test]
    fn self_and_disjoint() {
        let idx = build_link_index(&store(&[
            ("h1", &["a", "b"]),
            ("h2", &["a"]),
            ("h3", &["c"]),
            ("a", &[]),
            ("b", &[]),
            ("c", &[]),
        ]));
        assert_eq!(idx.semantic_closeness("a", "a").unwrap(), 1.0);
        assert_eq!(idx.semantic_closeness("a", "c").unwrap(), 0.0);
        assert_eq!(idx.semantic_closeness("h1", "h1").unwrap(), 0.0);
        assert_eq!(
            idx.semantic_closeness("a", "zz"),
            Err(RelatednessError::UnknownEntity("zz".into()))
        );
    }

    #[test]
    fn star_ties_break_by_id() {
        let idx = build_link_index(&store(&[
            ("hub", &["e", "d", "c", "b"]),
            ("b", &[]),
            ("c", &[]),
            ("d", &[]),
            ("e", &[]),
        ]));
        let top = idx.top_n_neighbors("e", 3).unwrap();
        let ids: Vec<_> = top.iter().map(|(id, _)| id.as_str()).collect();
        assert_eq!(ids, ["b", "c", "d"]);
        assert!(top.windows(2).all(|w| w[0].1 == w[1].1));
    }

    #[test]
    fn n_beyond_entity_count_returns_all_others() {
        let idx = build_link_index(&store(&[("a", &["b"]), ("b", &["c"]), ("c", &[])]));
        let top = idx.top_n_neighbors("a", 10).unwrap();
        assert_eq!(top.len(), 2);
        assert!(top.iter().all(|(id, _)| id != "a"));
    }

    #[test]
    fn tsv_dump_uses_six_decimals() {
        let idx = build_link_index(&store(&[("h", &["a", "b"]), ("a", &[]), ("b", &[])]));
        let dump = idx.dump_top_n_tsv(1);
        assert!(dump.lines().any(|l| l == "a\tb\t1.000000"), "{dump}");
    }
}
