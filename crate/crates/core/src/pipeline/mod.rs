//! Stage orchestration: discover → tag → hierarchy, with content-hashed,
//! resumable artifacts.
//!
//! Each stage reads its upstream input from the artifact files rather than
//! from memory, so a resumed run and a fresh run see the same bytes. A stage
//! is reused when the manifest records it complete under the same
//! fingerprint (its parameters plus the hashes of everything it reads) and
//! its outputs still hash to the recorded values.

mod config;
mod eval;
mod stats;

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::json;
use sha2::{Digest, Sha256};

pub use config::{PipelineConfig, DEFAULT_RC_THRESHOLD};
pub use eval::{sample_for_eval, SampleReport, EVAL_GROUPS, EVAL_SAMPLE_SIZE};
pub use stats::{compute_stats, StatsReport, TOP_CONCEPTS};

use crate::corpus::{validate_corpus, CorpusError, CorpusSnapshot};
use crate::discovery::{discover, DiscoveryError, FosRegistry};
use crate::hierarchy::{build_hierarchy, build_tag_index, edges_to_tsv, levels_to_tsv, HierarchyError};
use crate::relatedness::build_link_index;
use crate::seeding::derive_seed;
use crate::tagging::{tags_from_tsv, tags_to_tsv, TaggingError, TaggingModel};
use crate::vectorize::{EmbeddingError, EmbeddingTable};

pub const REGISTRY_FILE: &str = "fos_registry.jsonl";
pub const TAGS_FILE: &str = "tags.tsv";
pub const HIERARCHY_FILE: &str = "hierarchy.tsv";
pub const LEVELS_FILE: &str = "levels.tsv";
pub const STATS_FILE: &str = "stats.json";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("input file {0} does not exist")]
    MissingInput(PathBuf),
    #[error("embedding file {0} does not exist and the hashed fallback is disabled")]
    MissingEmbeddings(PathBuf),
    #[error("no embedding file configured and the hashed fallback is disabled")]
    NoEmbeddings,
    #[error("corpus validation failed: {}", .0.join("; "))]
    Validation(Vec<String>),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Artifact { path: PathBuf, message: String },
    #[error("unknown stage {0:?}; expected discovery, tagging or hierarchy")]
    UnknownStage(String),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Discovery(#[from] DiscoveryError),
    #[error(transparent)]
    Tagging(#[from] TaggingError),
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
    #[error(transparent)]
    Hierarchy(#[from] HierarchyError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Discovery,
    Tagging,
    Hierarchy,
}

impl Stage {
    pub const ALL: [Stage; 3] = [Stage::Discovery, Stage::Tagging, Stage::Hierarchy];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Discovery => "discovery",
            Stage::Tagging => "tagging",
            Stage::Hierarchy => "hierarchy",
        }
    }

    pub fn outputs(self) -> &'static [&'static str] {
        match self {
            Stage::Discovery => &[REGISTRY_FILE],
            Stage::Tagging => &[TAGS_FILE],
            Stage::Hierarchy => &[HIERARCHY_FILE, LEVELS_FILE],
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Stage {
    type Err = PipelineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "discovery" | "discover" => Ok(Stage::Discovery),
            "tagging" | "tag" => Ok(Stage::Tagging),
            "hierarchy" => Ok(Stage::Hierarchy),
            other => Err(PipelineError::UnknownStage(other.to_owned())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StageStatus {
    Complete,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageRecord {
    pub status: StageStatus,
    pub fingerprint: String,
    /// Output file name → sha256 of its contents.
    pub outputs: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// `manifest.json`: per-stage status and output hashes. `complete` is set
/// only once every stage and the stats report are written.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub complete: bool,
    pub stages: BTreeMap<Stage, StageRecord>,
}

impl Manifest {
    pub fn load(out_dir: &Path) -> Option<Manifest> {
        let text = std::fs::read_to_string(out_dir.join(MANIFEST_FILE)).ok()?;
        serde_json::from_str(&text).ok()
    }

    fn save(&self, out_dir: &Path) -> Result<(), PipelineError> {
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        write_file(&out_dir.join(MANIFEST_FILE), &text)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StageOutcome {
    Ran,
    Reused,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub stages: Vec<(Stage, StageOutcome)>,
    /// Present when the run reached the last stage.
    pub stats: Option<StatsReport>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io {
        path: path.to_owned(),
        source,
    }
}

fn read_file(path: &Path) -> Result<String, PipelineError> {
    std::fs::read_to_string(path).map_err(io_error(path))
}

/// Writes through a temporary sibling so readers never see a torn file.
fn write_file(path: &Path, text: &str) -> Result<(), PipelineError> {
    let tmp = path.with_extension("partial");
    std::fs::write(&tmp, text).map_err(io_error(&tmp))?;
    std::fs::rename(&tmp, path).map_err(io_error(path))
}

fn hash_file(path: &Path) -> Result<String, PipelineError> {
    Ok(sha256_hex(&std::fs::read(path).map_err(io_error(path))?))
}

/// Loads the corpus and fails on any validation error.
pub fn load_corpus(config: &PipelineConfig) -> Result<CorpusSnapshot, PipelineError> {
    config.check_inputs()?;
    let snapshot = CorpusSnapshot::load(&config.corpus)?;
    let report = validate_corpus(&snapshot);
    for w in &report.warnings {
        log::warn!("corpus: {w}");
    }
    if !report.is_ok() {
        return Err(PipelineError::Validation(report.errors));
    }
    Ok(snapshot)
}

struct Runner<'a> {
    config: &'a PipelineConfig,
    snapshot: &'a CorpusSnapshot,
    manifest: Manifest,
    input_hash: String,
    /// Once a stage reruns, everything downstream reruns.
    dirty: bool,
}

impl Runner<'_> {
    fn path(&self, name: &str) -> PathBuf {
        self.config.out_dir.join(name)
    }

    fn fingerprint(&self, stage: Stage) -> Result<String, PipelineError> {
        let c = self.config;
        let upstream = |name: &str| hash_file(&self.path(name));
        let key = match stage {
            Stage::Discovery => json!({
                "stage": stage,
                "inputs": self.input_hash,
                "params": c.discovery,
            }),
            Stage::Tagging => json!({
                "stage": stage,
                "inputs": self.input_hash,
                "registry": upstream(REGISTRY_FILE)?,
                "embeddings": match &c.embeddings {
                    Some(p) if p.is_file() => Some(hash_file(p)?),
                    _ => None,
                },
                "fallback": c.embedding_fallback,
                "vectorize": c.vectorize,
                "ert": c.ert,
                "tagging": c.tagging,
                "seed": derive_seed(c.rng_seed, "tagging"),
            }),
            Stage::Hierarchy => json!({
                "stage": stage,
                "seeds": hash_file(&c.corpus.seeds)?,
                "tags": upstream(TAGS_FILE)?,
                "rc_threshold": c.rc_threshold,
            }),
        };
        Ok(sha256_hex(key.to_string().as_bytes()))
    }

    fn reusable(&self, stage: Stage, fingerprint: &str) -> bool {
        let Some(record) = self.manifest.stages.get(&stage) else {
            return false;
        };
        record.status == StageStatus::Complete
            && record.fingerprint == fingerprint
            && stage.outputs().iter().all(|name| {
                hash_file(&self.path(name)).ok().as_ref() == record.outputs.get(*name)
            })
    }

    fn stage(&mut self, stage: Stage) -> Result<StageOutcome, PipelineError> {
        let fingerprint = self.fingerprint(stage)?;
        if !self.dirty && self.reusable(stage, &fingerprint) {
            log::info!("{stage}: reusing artifacts");
            return Ok(StageOutcome::Reused);
        }
        self.dirty = true;
        self.manifest.complete = false;
        log::info!("{stage}: running");
        let result = match stage {
            Stage::Discovery => self.discovery(),
            Stage::Tagging => self.tagging(),
            Stage::Hierarchy => self.hierarchy(),
        };
        let record = match &result {
            Ok(()) => StageRecord {
                status: StageStatus::Complete,
                fingerprint,
                outputs: stage
                    .outputs()
                    .iter()
                    .map(|name| Ok(((*name).to_owned(), hash_file(&self.path(name))?)))
                    .collect::<Result<_, PipelineError>>()?,
                error: None,
            },
            Err(e) => StageRecord {
                status: StageStatus::Failed,
                fingerprint,
                outputs: BTreeMap::new(),
                error: Some(e.to_string()),
            },
        };
        self.manifest.stages.insert(stage, record);
        // Downstream records are stale either way.
        self.manifest.stages.retain(|s, _| *s <= stage);
        self.manifest.save(&self.config.out_dir)?;
        result.map(|()| StageOutcome::Ran)
    }

    fn discovery(&self) -> Result<(), PipelineError> {
        let mut params = self.config.discovery.clone();
        params.type_allowlist = self.snapshot.seeds.type_allowlist.clone();
        params.type_blocklist = self.snapshot.seeds.type_blocklist.clone();
        let index = build_link_index(&self.snapshot.entities);
        let registry = discover(self.snapshot, &index, &params)?;
        write_file(&self.path(REGISTRY_FILE), &registry.to_jsonl())
    }

    fn embeddings(&self) -> Result<Option<EmbeddingTable>, PipelineError> {
        match (&self.config.embeddings, self.config.embedding_fallback) {
            (Some(path), _) if path.is_file() => Ok(Some(EmbeddingTable::load(path)?)),
            (Some(path), true) => {
                log::warn!("{}: not found, using hashed stand-in vectors", path.display());
                Ok(None)
            }
            (Some(path), false) => Err(PipelineError::MissingEmbeddings(path.clone())),
            (None, true) => Ok(None),
            (None, false) => Err(PipelineError::NoEmbeddings),
        }
    }

    fn tagging(&self) -> Result<(), PipelineError> {
        let registry_path = self.path(REGISTRY_FILE);
        let registry = FosRegistry::from_jsonl(&read_file(&registry_path)?).map_err(|e| PipelineError::Artifact {
            path: registry_path,
            message: e.to_string(),
        })?;
        let c = self.config;
        let model = TaggingModel::build(
            self.snapshot,
            &registry,
            self.embeddings()?,
            &c.vectorize,
            c.ert,
            c.tagging,
            derive_seed(c.rng_seed, "tagging"),
        )?;
        let (pairs, _) = model.tag_corpus();
        write_file(&self.path(TAGS_FILE), &tags_to_tsv(&pairs))
    }

    fn hierarchy(&self) -> Result<(), PipelineError> {
        let pairs = tags_from_tsv(&read_file(&self.path(TAGS_FILE))?)?;
        let index = build_tag_index(&pairs)?;
        let dag = build_hierarchy(&index, self.config.rc_threshold, &self.snapshot.seeds)?;
        write_file(&self.path(HIERARCHY_FILE), &edges_to_tsv(&dag))?;
        write_file(&self.path(LEVELS_FILE), &levels_to_tsv(&dag))
    }
}

/// Runs every stage up to and including `until`, reusing up-to-date
/// artifacts. Reaching the last stage also writes `stats.json` and marks
/// the manifest complete. On failure the manifest records the failed stage
/// and earlier artifacts are kept.
pub fn run(config: &PipelineConfig, until: Stage) -> Result<RunReport, PipelineError> {
    config.check_ranges()?;
    if !(35..=45).contains(&config.discovery.vote_threshold) {
        log::warn!(
            "vote_k = {} lies outside the recommended [35, 45] band",
            config.discovery.vote_threshold
        );
    }
    let snapshot = load_corpus(config)?;
    std::fs::create_dir_all(&config.out_dir).map_err(io_error(&config.out_dir))?;
    let c = &config.corpus;
    let input_hash = sha256_hex(
        [&c.entities, &c.documents, &c.venues, &c.seeds]
            .into_iter()
            .map(|p| hash_file(p))
            .collect::<Result<Vec<_>, _>>()?
            .join("")
            .as_bytes(),
    );
    let mut runner = Runner {
        config,
        snapshot: &snapshot,
        manifest: Manifest::load(&config.out_dir).unwrap_or_default(),
        input_hash,
        dirty: false,
    };
    let mut report = RunReport {
        stages: Vec::new(),
        stats: None,
    };
    for stage in Stage::ALL.into_iter().filter(|s| *s <= until) {
        report.stages.push((stage, runner.stage(stage)?));
    }
    if until == Stage::Hierarchy {
        let stats = compute_stats(&config.out_dir)?;
        write_file(&config.out_dir.join(STATS_FILE), &stats.to_json())?;
        runner.manifest.complete = true;
        runner.manifest.save(&config.out_dir)?;
        report.stats = Some(stats);
    }
    Ok(report)
}
