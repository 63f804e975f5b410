use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use super::{PipelineError, HIERARCHY_FILE, LEVELS_FILE, REGISTRY_FILE, TAGS_FILE};
use crate::discovery::{FosRegistry, Provenance};
use crate::tagging::tags_from_tsv;

/// Concepts listed in the tag-mass ranking.
pub const TOP_CONCEPTS: usize = 10;

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct StatsReport {
    pub concepts: usize,
    /// Registry size per provenance.
    pub provenance: BTreeMap<String, usize>,
    pub tag_pairs: usize,
    pub tagged_documents: usize,
    pub tagged_concepts: usize,
    pub edges: usize,
    /// Concepts per level 0..=5.
    pub level_histogram: [usize; 6],
    /// Tag confidences in ten equal bins over [0, 1].
    pub confidence_histogram: [usize; 10],
    /// `(concept, summed confidence)`, heaviest first, ties by id.
    pub top_concepts: Vec<(String, f64)>,
}

impl StatsReport {
    /// Pretty JSON, stable across runs.
    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("stats serialize");
        text.push('\n');
        text
    }
}

fn read_optional(path: &Path) -> Result<String, PipelineError> {
    match std::fs::read_to_string(path) {
        Ok(text) => Ok(text),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(String::new()),
        Err(source) => Err(PipelineError::Io {
            path: path.to_owned(),
            source,
        }),
    }
}

/// Summarizes whatever artifacts exist in `out_dir`; missing ones count as
/// empty.
pub fn compute_stats(out_dir: &Path) -> Result<StatsReport, PipelineError> {
    let artifact_error = |name: &str, message: String| PipelineError::Artifact {
        path: out_dir.join(name),
        message,
    };
    let mut report = StatsReport::default();

    let registry = FosRegistry::from_jsonl(&read_optional(&out_dir.join(REGISTRY_FILE))?)
        .map_err(|e| artifact_error(REGISTRY_FILE, e.to_string()))?;
    report.concepts = registry.len();
    for m in registry.concepts.values() {
        let name = match m.provenance {
            Provenance::Seed => "seed",
            Provenance::Vote => "vote",
            Provenance::TypeEnrichment => "type-enrichment",
        };
        *report.provenance.entry(name.to_owned()).or_default() += 1;
    }

    let pairs = tags_from_tsv(&read_optional(&out_dir.join(TAGS_FILE))?)?;
    report.tag_pairs = pairs.len();
    let mut mass: BTreeMap<&str, f64> = BTreeMap::new();
    let mut documents = std::collections::BTreeSet::new();
    for p in &pairs {
        let bin = ((p.confidence.clamp(0.0, 1.0) * 10.0) as usize).min(9);
        report.confidence_histogram[bin] += 1;
        *mass.entry(&p.concept).or_default() += p.confidence;
        documents.insert(p.document.as_str());
    }
    report.tagged_documents = documents.len();
    report.tagged_concepts = mass.len();
    let mut ranked: Vec<(&str, f64)> = mass.into_iter().collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(b.0)));
    report.top_concepts = ranked
        .into_iter()
        .take(TOP_CONCEPTS)
        .map(|(c, m)| (c.to_owned(), (m * 1e6).round() / 1e6))
        .collect();

    report.edges = read_optional(&out_dir.join(HIERARCHY_FILE))?
        .lines()
        .filter(|l| !l.trim().is_empty())
        .count();
    for (n, line) in read_optional(&out_dir.join(LEVELS_FILE))?.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let level: usize = line
            .rsplit('\t')
            .next()
            .and_then(|l| l.parse().ok())
            .filter(|l| *l < 6)
            .ok_or_else(|| artifact_error(LEVELS_FILE, format!("line {}: bad level", n + 1)))?;
        report.level_histogram[level] += 1;
    }
    Ok(report)
}
