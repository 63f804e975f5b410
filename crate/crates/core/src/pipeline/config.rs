use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::corpus::CorpusPaths;
use crate::discovery::DiscoveryParams;
use crate::tagging::{ErtWeights, TaggingParams};
use crate::vectorize::{BlockWeights, VectorizeConfig};

/// Default subsumption threshold.
pub const DEFAULT_RC_THRESHOLD: f64 = 0.3;

/// On-disk layout: flat keys, with dotted keys for the grouped weights.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    entities: Option<PathBuf>,
    documents: Option<PathBuf>,
    venues: Option<PathBuf>,
    seeds: Option<PathBuf>,
    embeddings: Option<PathBuf>,
    embedding_fallback: Option<bool>,
    out_dir: Option<PathBuf>,
    rng_seed: Option<u64>,
    embedding_dim: Option<usize>,
    block_weights: Option<BlockWeightsFile>,
    min_df: Option<usize>,
    neighbors_n: Option<usize>,
    vote_k: Option<usize>,
    max_iterations: Option<usize>,
    weights: Option<ErtWeightsFile>,
    theta: Option<f64>,
    candidate_cap: Option<usize>,
    neighbor_cap: Option<usize>,
    venue_sample: Option<usize>,
    rc_threshold: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct BlockWeightsFile {
    bow: Option<f64>,
    boe: Option<f64>,
    eow: Option<f64>,
    eoe: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ErtWeightsFile {
    cit: Option<f64>,
    #[serde(rename = "ref")]
    reference: Option<f64>,
    venue: Option<f64>,
}

/// Fully resolved run configuration. Paths are absolute or relative to the
/// process working directory.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineConfig {
    pub corpus: CorpusPaths,
    pub embeddings: Option<PathBuf>,
    /// Use seeded stand-in word vectors when no embedding file is available.
    pub embedding_fallback: bool,
    pub out_dir: PathBuf,
    pub rng_seed: u64,
    pub vectorize: VectorizeConfig,
    /// Type lists are taken from the seed taxonomy at run time.
    pub discovery: DiscoveryParams,
    pub ert: ErtWeights,
    pub tagging: TaggingParams,
    pub rc_threshold: f64,
}

impl PipelineConfig {
    /// Defaults for a corpus laid out with the conventional file names.
    pub fn for_corpus_dir(dir: &Path, out_dir: &Path) -> Self {
        PipelineConfig {
            corpus: CorpusPaths::in_dir(dir),
            embeddings: None,
            embedding_fallback: true,
            out_dir: out_dir.to_owned(),
            rng_seed: 0,
            vectorize: VectorizeConfig::default(),
            discovery: DiscoveryParams::default(),
            ert: ErtWeights::default(),
            tagging: TaggingParams::default(),
            rc_threshold: DEFAULT_RC_THRESHOLD,
        }
    }

    /// Parses a TOML config; relative paths resolve against `base`. Unset
    /// corpus paths default to the conventional names in `base`, the output
    /// directory to `base/out`.
    pub fn parse(text: &str, base: &Path) -> Result<Self, PipelineError> {
        let file: ConfigFile = toml::from_str(text).map_err(|e| PipelineError::Config(e.message().to_owned()))?;
        let resolve = |p: PathBuf| if p.is_absolute() { p } else { base.join(p) };
        let defaults = PipelineConfig::for_corpus_dir(base, &base.join("out"));
        let mut config = PipelineConfig {
            corpus: CorpusPaths {
                entities: file.entities.map_or(defaults.corpus.entities, resolve),
                documents: file.documents.map_or(defaults.corpus.documents, resolve),
                venues: file.venues.map_or(defaults.corpus.venues, resolve),
                seeds: file.seeds.map_or(defaults.corpus.seeds, resolve),
            },
            embeddings: file.embeddings.map(resolve),
            embedding_fallback: file.embedding_fallback.unwrap_or(defaults.embedding_fallback),
            out_dir: file.out_dir.map_or(defaults.out_dir, resolve),
            rng_seed: file.rng_seed.unwrap_or(defaults.rng_seed),
            ..defaults
        };
        let v = &mut config.vectorize;
        v.embedding_dim = file.embedding_dim.unwrap_or(v.embedding_dim);
        v.min_df = file.min_df.unwrap_or(v.min_df);
        if let Some(b) = file.block_weights {
            let w: &mut BlockWeights = &mut v.block_weights;
            w.bow = b.bow.unwrap_or(w.bow);
            w.boe = b.boe.unwrap_or(w.boe);
            w.eow = b.eow.unwrap_or(w.eow);
            w.eoe = b.eoe.unwrap_or(w.eoe);
        }
        let d = &mut config.discovery;
        d.neighbors = file.neighbors_n.unwrap_or(d.neighbors);
        d.vote_threshold = file.vote_k.unwrap_or(d.vote_threshold);
        d.max_iterations = file.max_iterations.unwrap_or(d.max_iterations);
        let e = &mut config.ert;
        if let Some(w) = file.weights {
            e.cit = w.cit.unwrap_or(e.cit);
            e.reference = w.reference.unwrap_or(e.reference);
            e.venue = w.venue.unwrap_or(e.venue);
        }
        e.neighbor_cap = file.neighbor_cap.unwrap_or(e.neighbor_cap);
        e.venue_sample = file.venue_sample.unwrap_or(e.venue_sample);
        let t = &mut config.tagging;
        t.theta = file.theta.unwrap_or(t.theta);
        t.candidate_cap = file.candidate_cap.unwrap_or(t.candidate_cap);
        config.rc_threshold = file.rc_threshold.unwrap_or(config.rc_threshold);
        config.check_ranges()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path).map_err(|source| PipelineError::Io {
            path: path.to_owned(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base).map_err(|e| match e {
            PipelineError::Config(m) => PipelineError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Range checks that need no input data.
    pub fn check_ranges(&self) -> Result<(), PipelineError> {
        let bad = |m: String| Err(PipelineError::Config(m));
        self.discovery.validate()?;
        self.ert.validate()?;
        if !(self.tagging.theta > 0.0 && self.tagging.theta < 1.0) {
            return bad(format!("theta {} must lie strictly between 0 and 1", self.tagging.theta));
        }
        if !(self.rc_threshold > 0.0 && self.rc_threshold.is_finite()) {
            return bad(format!("rc_threshold {} must be positive", self.rc_threshold));
        }
        if self.vectorize.embedding_dim == 0 {
            return bad("embedding_dim must be positive".into());
        }
        if self.vectorize.min_df == 0 {
            return bad("min_df must be at least 1".into());
        }
        let w = self.vectorize.block_weights;
        if [w.bow, w.boe, w.eow, w.eoe].iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return bad("block weights must be finite and non-negative".into());
        }
        Ok(())
    }

    /// Checks that every input file exists. The embedding file is checked
    /// by the tagging stage.
    pub fn check_inputs(&self) -> Result<(), PipelineError> {
        let c = &self.corpus;
        for path in [&c.entities, &c.documents, &c.venues, &c.seeds] {
            if !path.is_file() {
                return Err(PipelineError::MissingInput(path.clone()));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_overrides() {
        let base = Path::new("/data/run");
        let c = PipelineConfig::parse(
            "entities = \"e.jsonl\"\nembeddings = \"/vec.txt\"\nvote_k = 12\nneighbors_n = 30\n\
             weights.cit = 0.2\nweights.ref = 0.3\nblock_weights.boe = 2.0\ntheta = 0.4\n",
            base,
        )
        .unwrap();
        assert_eq!(c.corpus.entities, base.join("e.jsonl"));
        assert_eq!(c.corpus.seeds, base.join("seeds.json"));
        assert_eq!(c.embeddings.as_deref(), Some(Path::new("/vec.txt")));
        assert_eq!(c.out_dir, base.join("out"));
        assert_eq!((c.discovery.neighbors, c.discovery.vote_threshold), (30, 12));
        assert_eq!((c.ert.cit, c.ert.reference, c.ert.venue), (0.2, 0.3, 0.5));
        assert_eq!(c.vectorize.block_weights.boe, 2.0);
        assert_eq!(c.vectorize.block_weights.bow, 1.0);
        assert_eq!(c.tagging.theta, 0.4);
        assert_eq!(c.rc_threshold, DEFAULT_RC_THRESHOLD);
    }

    #[test]
    fn section_tables_work_too() {
        let c = PipelineConfig::parse("[weights]\nvenue = 0.7\n", Path::new(".")).unwrap();
        assert_eq!(c.ert.venue, 0.7);
    }

    #[test]
    fn unknown_keys_and_bad_ranges_are_rejected() {
        let base = Path::new(".");
        assert!(matches!(PipelineConfig::parse("thetta = 0.5", base), Err(PipelineError::Config(_))));
        assert!(PipelineConfig::parse("theta = 1.5", base).is_err());
        assert!(PipelineConfig::parse("rc_threshold = 0", base).is_err());
        assert!(PipelineConfig::parse("vote_k = 200", base).is_err());
        assert!(PipelineConfig::parse("weights.venue = -1", base).is_err());
    }
}
