use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};

use super::HierarchyError;
use crate::tagging::TagPair;

/// Documents tagged with one concept, with their confidences.
#[derive(Debug, Clone, PartialEq)]
pub struct PostingList {
    /// `(document handle, weight)`, ascending handle (= ascending doc id).
    entries: Vec<(u32, f64)>,
    mass: f64,
}

impl PostingList {
    pub fn entries(&self) -> &[(u32, f64)] {
        &self.entries
    }

    /// Sum of the list's weights.
    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Per-concept posting lists over interned document handles.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TagIndex {
    documents: Vec<String>,
    concepts: BTreeMap<String, PostingList>,
}

/// Builds the index. Every weight must lie in `(0, 1]` and every
/// `(concept, document)` pair may occur once.
pub fn build_tag_index(tags: &[TagPair]) -> Result<TagIndex, HierarchyError> {
    let mut documents: Vec<&str> = tags.iter().map(|t| t.document.as_str()).collect();
    documents.sort_unstable();
    documents.dedup();
    let handle: HashMap<&str, u32> = documents
        .iter()
        .enumerate()
        .map(|(i, d)| (*d, i as u32))
        .collect();

    let mut raw: BTreeMap<&str, Vec<(u32, f64)>> = BTreeMap::new();
    for t in tags {
        if !(t.confidence > 0.0 && t.confidence <= 1.0) {
            return Err(HierarchyError::InvalidWeight {
                concept: t.concept.clone(),
                document: t.document.clone(),
                weight: t.confidence,
            });
        }
        raw.entry(&t.concept)
            .or_default()
            .push((handle[t.document.as_str()], t.confidence));
    }
    let mut concepts = BTreeMap::new();
    for (concept, mut entries) in raw {
        entries.sort_by_key(|&(d, _)| d);
        if let Some(w) = entries.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(HierarchyError::DuplicatePair {
                concept: concept.to_owned(),
                document: documents[w[0].0 as usize].to_owned(),
            });
        }
        let mass = entries.iter().map(|&(_, w)| w).sum();
        concepts.insert(concept.to_owned(), PostingList { entries, mass });
    }
    Ok(TagIndex {
        documents: documents.into_iter().map(str::to_owned).collect(),
        concepts,
    })
}

impl TagIndex {
    pub fn concept_count(&self) -> usize {
        self.concepts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.concepts.is_empty()
    }

    pub fn concepts(&self) -> impl Iterator<Item = (&str, &PostingList)> {
        self.concepts.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn contains(&self, concept: &str) -> bool {
        self.concepts.contains_key(concept)
    }

    pub fn posting(&self, concept: &str) -> Result<&PostingList, HierarchyError> {
        self.concepts
            .get(concept)
            .ok_or_else(|| HierarchyError::UnknownConcept(concept.to_owned()))
    }

    pub fn mass(&self, concept: &str) -> Result<f64, HierarchyError> {
        self.posting(concept).map(PostingList::mass)
    }

    pub fn document(&self, handle: u32) -> &str {
        &self.documents[handle as usize]
    }

    /// Weighted relative coverage of `i` by `j`:
    ///
    /// `Σ_{I∩J} w_i / Σ_I w_i  -  Σ_{I∩J} w_j / Σ_J w_j`
    ///
    /// Positive when `j` covers more of `i` than `i` covers of `j`. Exactly
    /// antisymmetric; 0 when the two share no document.
    pub fn relative_coverage(&self, i: &str, j: &str) -> Result<f64, HierarchyError> {
        let (pi, pj) = (self.posting(i)?, self.posting(j)?);
        let (shared_i, shared_j, overlap) = shared_weights(pi, pj);
        if overlap == 0 {
            return Ok(0.0);
        }
        Ok(shared_i / pi.mass - shared_j / pj.mass)
    }

    /// Count-based subsumption: `j` subsumes `i` iff `P(j|i) ≥ p` and
    /// `P(i|j) < 1`, weights ignored.
    pub fn classic_subsumption(&self, i: &str, j: &str, p: f64) -> Result<bool, HierarchyError> {
        let (pi, pj) = (self.posting(i)?, self.posting(j)?);
        let (_, _, overlap) = shared_weights(pi, pj);
        if overlap == 0 {
            return Ok(false);
        }
        let j_given_i = overlap as f64 / pi.len() as f64;
        let i_given_j = overlap as f64 / pj.len() as f64;
        Ok(j_given_i >= p && i_given_j < 1.0)
    }
}

/// `(Σ_{I∩J} w_i, Σ_{I∩J} w_j, |I∩J|)`, summed in document order.
fn shared_weights(a: &PostingList, b: &PostingList) -> (f64, f64, usize) {
    let (x, y) = (&a.entries, &b.entries);
    let (mut i, mut j) = (0, 0);
    let (mut sa, mut sb, mut n) = (0.0, 0.0, 0);
    while i < x.len() && j < y.len() {
        match x[i].0.cmp(&y[j].0) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => {
                sa += x[i].1;
                sb += y[j].1;
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    (sa, sb, n)
}

#[cfg(test)]
mod tests {
    use super::*;

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
    fn masses_and_lists() {
        let idx = build_tag_index(&[pair("a", "d2", 0.5), pair("a", "d1", 0.25), pair("b", "d1", 1.0)]).unwrap();
        assert_eq!(idx.concept_count(), 2);
        assert_eq!(idx.mass("a").unwrap(), 0.75);
        let docs: Vec<_> = idx.posting("a").unwrap().entries().iter().map(|&(d, _)| idx.document(d)).collect();
        assert_eq!(docs, ["d1", "d2"]);
        assert!(build_tag_index(&[]).unwrap().is_empty());
    }

    #[test]
    fn duplicates_and_bad_weights_are_errors() {
        assert!(matches!(
            build_tag_index(&[pair("a", "d", 0.5), pair("a", "d", 0.6)]),
            Err(HierarchyError::DuplicatePair { .. })
        ));
        assert!(matches!(
            build_tag_index(&[pair("a", "d", 0.0)]),
            Err(HierarchyError::InvalidWeight { .. })
        ));
        assert!(matches!(
            build_tag_index(&[pair("a", "d", 1.5)]),
            Err(HierarchyError::InvalidWeight { .. })
        ));
    }

    #[test]
    fn relative_coverage_worked_example() {
        let idx = worked_example();
        // 1.7/1.7 - 1.0/2.0
        assert!((idx.relative_coverage("i", "j").unwrap() - 0.5).abs() < 1e-12);
        assert!((idx.relative_coverage("j", "i").unwrap() + 0.5).abs() < 1e-12);
        assert!(matches!(idx.relative_coverage("i", "zz"), Err(HierarchyError::UnknownConcept(_))));
    }

    #[test]
    fn identical_and_disjoint_lists_score_zero() {
        let idx = build_tag_index(&[
            pair("a", "d1", 0.3),
            pair("a", "d2", 0.9),
            pair("b", "d1", 0.3),
            pair("b", "d2", 0.9),
            pair("c", "d9", 0.4),
        ])
        .unwrap();
        assert_eq!(idx.relative_coverage("a", "b").unwrap(), 0.0);
        assert_eq!(idx.relative_coverage("a", "c").unwrap(), 0.0);
    }

    #[test]
    fn classic_subsumption_examples() {
        let mut tags: Vec<TagPair> = (1..=10).map(|k| pair("j", &format!("d{k:02}"), 1.0)).collect();
        tags.extend((1..=8).map(|k| pair("i", &format!("d{k:02}"), 1.0)));
        tags.extend((1..=8).map(|k| pair("i2", &format!("d{k:02}"), 1.0)));
        tags.push(pair("x", "d99", 1.0));
        let idx = build_tag_index(&tags).unwrap();
        assert!(idx.classic_subsumption("i", "j", 0.8).unwrap());
        assert!(!idx.classic_subsumption("j", "i", 0.8).unwrap());
        assert!(!idx.classic_subsumption("i", "i2", 0.8).unwrap());
        assert!(!idx.classic_subsumption("i", "x", 0.8).unwrap());
    }
}
