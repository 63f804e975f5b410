use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{read_file, write_file, PipelineError, Stage, HIERARCHY_FILE, REGISTRY_FILE, TAGS_FILE};
use crate::corpus::CorpusSnapshot;
use crate::discovery::FosRegistry;
use crate::seeding::derive_seed;
use crate::tagging::tags_from_tsv;

pub const EVAL_SAMPLE_SIZE: usize = 500;
pub const EVAL_GROUPS: usize = 5;
/// Longest context snippet, in characters.
const CONTEXT_CHARS: usize = 300;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleReport {
    pub stage: Stage,
    pub available: usize,
    pub sampled: usize,
    pub files: Vec<PathBuf>,
}

/// One line, no tabs, at most `CONTEXT_CHARS` characters.
fn cell(text: &str) -> String {
    let flat: String = text
        .chars()
        .map(|c| if c.is_whitespace() { ' ' } else { c })
        .collect();
    let flat = flat.trim();
    match flat.char_indices().nth(CONTEXT_CHARS) {
        Some((cut, _)) => format!("{}…", &flat[..cut]),
        None => flat.to_owned(),
    }
}

/// Header and rows for one stage's artifact.
fn rows(stage: Stage, out_dir: &Path, snapshot: &CorpusSnapshot) -> Result<(String, Vec<String>), PipelineError> {
    let title = |id: &str| snapshot.entities.get(id).map_or(String::new(), |e| cell(&e.title));
    let definition = |id: &str| snapshot.entities.get(id).map_or(String::new(), |e| cell(&e.first_paragraph));
    let artifact = |name: &str, message: String| PipelineError::Artifact {
        path: out_dir.join(name),
        message,
    };
    Ok(match stage {
        Stage::Discovery => {
            let text = read_file(&out_dir.join(REGISTRY_FILE))?;
            let registry = FosRegistry::from_jsonl(&text).map_err(|e| artifact(REGISTRY_FILE, e.to_string()))?;
            let rows = registry
                .concepts
                .iter()
                .map(|(id, m)| {
                    let provenance = serde_json::to_value(m.provenance).expect("provenance serializes");
                    format!(
                        "{id}\t{}\t{}\t{}\t{}",
                        provenance.as_str().unwrap_or_default(),
                        m.iteration,
                        title(id),
                        definition(id)
                    )
                })
                .collect();
            ("concept\tprovenance\titeration\ttitle\tdefinition".to_owned(), rows)
        }
        Stage::Tagging => {
            let pairs = tags_from_tsv(&read_file(&out_dir.join(TAGS_FILE))?)?;
            let rows = pairs
                .iter()
                .map(|p| {
                    let doc = snapshot.documents.get(&p.document);
                    format!(
                        "{}\t{}\t{:.6}\t{}\t{}\t{}\t{}",
                        p.document,
                        p.concept,
                        p.confidence,
                        title(&p.concept),
                        definition(&p.concept),
                        doc.map_or(String::new(), |d| cell(&d.title)),
                        doc.map_or(String::new(), |d| cell(&d.abstract_text)),
                    )
                })
                .collect();
            (
                "document\tconcept\tconfidence\tconcept_title\tconcept_definition\tdocument_title\tdocument_abstract"
                    .to_owned(),
                rows,
            )
        }
        Stage::Hierarchy => {
            let text = read_file(&out_dir.join(HIERARCHY_FILE))?;
            let mut rows = Vec::new();
            for (n, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
                let fields: Vec<&str> = line.split('\t').collect();
                let [child, parent, rc] = fields[..] else {
                    return Err(artifact(HIERARCHY_FILE, format!("line {}: expected 3 fields", n + 1)));
                };
                rows.push(format!(
                    "{child}\t{parent}\t{rc}\t{}\t{}\t{}\t{}",
                    title(child),
                    title(parent),
                    definition(child),
                    definition(parent)
                ));
            }
            (
                "child\tparent\trc\tchild_title\tparent_title\tchild_definition\tparent_definition".to_owned(),
                rows,
            )
        }
    })
}

/// Draws up to 500 rows of a stage artifact uniformly without replacement
/// and splits them into five disjoint groups, written as
/// `eval/<stage>_group_<k>.tsv`. Smaller artifacts are sampled whole, with a
/// warning, and split as evenly as possible.
pub fn sample_for_eval(
    stage: Stage,
    out_dir: &Path,
    snapshot: &CorpusSnapshot,
    seed: u64,
) -> Result<SampleReport, PipelineError> {
    let (header, rows) = rows(stage, out_dir, snapshot)?;
    let available = rows.len();
    if available < EVAL_SAMPLE_SIZE {
        log::warn!("{stage}: only {available} rows available, sampling all of them");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &format!("sample/{stage}")));
    let picked = rand::seq::index::sample(&mut rng, available, available.min(EVAL_SAMPLE_SIZE)).into_vec();

    let dir = out_dir.join("eval");
    std::fs::create_dir_all(&dir).map_err(|source| PipelineError::Io {
        path: dir.clone(),
        source,
    })?;
    let mut files = Vec::with_capacity(EVAL_GROUPS);
    let (base, extra) = (picked.len() / EVAL_GROUPS, picked.len() % EVAL_GROUPS);
    let mut start = 0;
    for g in 0..EVAL_GROUPS {
        let len = base + usize::from(g < extra);
        let mut text = format!("{header}\n");
        for &i in &picked[start..start + len] {
            let _ = writeln!(text, "{}", rows[i]);
        }
        start += len;
        let path = dir.join(format!("{stage}_group_{}.tsv", g + 1));
        write_file(&path, &text)?;
        files.push(path);
    }
    Ok(SampleReport {
        stage,
        available,
        sampled: picked.len(),
        files,
    })
}
