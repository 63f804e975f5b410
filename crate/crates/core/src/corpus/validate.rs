use serde::Serialize;

use super::CorpusSnapshot;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CorpusCounts {
    pub entities: usize,
    pub entity_links: usize,
    pub documents: usize,
    pub references: usize,
    pub venues: usize,
    pub l0: usize,
    pub l1: usize,
    pub seed_fos: usize,
}

/// Outcome of [`validate_corpus`]. Hard invariant breaches land in `errors`;
/// everything else in `warnings`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub counts: CorpusCounts,
    pub dropped_entity_links: usize,
    pub empty_entity_paragraphs: usize,
    pub empty_document_srts: usize,
    pub unresolved_venue_docs: usize,
    pub empty_venues: usize,
    pub warnings: Vec<String>,
    pub errors: Vec<String>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.errors.is_empty()
    }
}

/// Checks every cross-store invariant of a snapshot. Never fails; the report
/// carries the findings.
pub fn validate_corpus(snapshot: &CorpusSnapshot) -> ValidationReport {
    let mut report = ValidationReport {
        dropped_entity_links: snapshot.dropped_entity_links,
        ..Default::default()
    };
    let entities = &snapshot.entities;
    let documents = &snapshot.documents;
    let seeds = &snapshot.seeds;

    report.counts = CorpusCounts {
        entities: entities.len(),
        entity_links: entities.iter().map(|e| e.out_links.len()).sum(),
        documents: documents.len(),
        references: documents.iter().map(|d| d.references.len()).sum(),
        venues: snapshot.venues.len(),
        l0: seeds.l0.len(),
        l1: seeds.l1.len(),
        seed_fos: seeds.seed_fos.len(),
    };

    for e in entities {
        for target in &e.out_links {
            match entities.get(target) {
                Some(t) if t.in_links.contains(&e.id) => {}
                _ => report
                    .errors
                    .push(format!("entity link {} -> {target} has no matching in-link", e.id)),
            }
        }
        for source in &e.in_links {
            if !entities.get(source).is_some_and(|s| s.out_links.contains(&e.id)) {
                report
                    .errors
                    .push(format!("entity in-link {source} -> {} has no matching out-link", e.id));
            }
        }
        if e.first_paragraph.trim().is_empty() {
            report.empty_entity_paragraphs += 1;
            if seeds.seed_fos.contains(&e.id) {
                report
                    .errors
                    .push(format!("seed concept {} has an empty first paragraph", e.id));
            }
        }
    }

    for d in documents {
        for r in &d.references {
            if r == &d.id {
                report.errors.push(format!("document {} references itself", d.id));
            }
            if !documents.get(r).is_some_and(|t| t.citations.contains(&d.id)) {
                report
                    .errors
                    .push(format!("document reference {} -> {r} does not resolve", d.id));
            }
        }
        for c in &d.citations {
            if !documents.get(c).is_some_and(|s| s.references.contains(&d.id)) {
                report
                    .errors
                    .push(format!("citation {c} -> {} has no matching reference", d.id));
            }
        }
        if d.srt_text().trim().is_empty() {
            report.empty_document_srts += 1;
        }
        if let Some(v) = &d.venue_id {
            match snapshot.venues.get(v) {
                Some(venue) if venue.member_docs.contains(&d.id) => {}
                Some(_) => report
                    .errors
                    .push(format!("document {} missing from members of venue {v}", d.id)),
                None => {
                    report.unresolved_venue_docs += 1;
                    report
                        .warnings
                        .push(format!("document {} names unknown venue {v}", d.id));
                }
            }
        }
    }

    for v in &snapshot.venues {
        if v.member_docs.is_empty() {
            report.empty_venues += 1;
            report.warnings.push(format!("venue {} has no member documents", v.id));
        }
        for m in &v.member_docs {
            if documents.get(m).and_then(|d| d.venue_id.as_deref()) != Some(v.id.as_str()) {
                report
                    .errors
                    .push(format!("venue {} lists {m}, which does not point back", v.id));
            }
        }
    }

    for id in &seeds.seed_fos {
        if !entities.contains(id) {
            report.errors.push(format!("seed concept {id} is not a known entity"));
        }
    }
    for (concept, venues) in &seeds.concept_venue_map {
        for v in venues.iter().filter(|v| !snapshot.venues.contains(v)) {
            report
                .errors
                .push(format!("concept {concept} is mapped to unknown venue {v}"));
        }
    }
    if let Some(both) = seeds.type_allowlist.intersection(&seeds.type_blocklist).next() {
        report
            .errors
            .push(format!("type {both:?} is both allow- and block-listed"));
    }
    if report.empty_entity_paragraphs > 0 {
        report.warnings.push(format!(
            "{} entities have an empty first paragraph",
            report.empty_entity_paragraphs
        ));
    }
    if report.empty_document_srts > 0 {
        report.warnings.push(format!(
            "{} documents have no title, keywords or abstract",
            report.empty_document_srts
        ));
    }
    report
}
