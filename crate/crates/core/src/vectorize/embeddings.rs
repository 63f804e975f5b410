use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use sha2::{Digest, Sha256};

#[derive(Debug, thiserror::Error)]
pub enum EmbeddingError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Format {
        path: PathBuf,
        line: usize,
        message: String,
    },
}

/// Token vectors of one fixed dimension. Lookup of an unknown token yields
/// `None`; callers skip such tokens.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    tokens: Vec<String>,
    vectors: Vec<Vec<f32>>,
    index: HashMap<String, usize>,
}

impl EmbeddingTable {
    pub fn new(dim: usize) -> Self {
        assert!(dim > 0, "embedding dimension must be positive");
        EmbeddingTable {
            dim,
            tokens: Vec::new(),
            vectors: Vec::new(),
            index: HashMap::new(),
        }
    }

    /// Inserts or replaces a vector. Returns `true` when a previous vector
    /// was replaced.
    pub fn insert(&mut self, token: &str, vector: Vec<f32>) -> bool {
        assert_eq!(vector.len(), self.dim, "vector dimension mismatch for {token:?}");
        match self.index.get(token) {
            Some(&i) => {
                self.vectors[i] = vector;
                true
            }
            None => {
                self.index.insert(token.to_owned(), self.tokens.len());
                self.tokens.push(token.to_owned());
                self.vectors.push(vector);
                false
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn get(&self, token: &str) -> Option<&[f32]> {
        self.index.get(token).map(|&i| self.vectors[i].as_slice())
    }

    /// Deterministic pseudo-random unit vectors, one per token, derived from
    /// a hash of `(seed, token)`. A stand-in for trained vectors so the
    /// pipeline can run without an embedding file; it carries no semantics.
    pub fn hashed<'a>(tokens: impl IntoIterator<Item = &'a str>, dim: usize, seed: u64) -> Self {
        let mut table = EmbeddingTable::new(dim);
        for token in tokens {
            let mut hasher = Sha256::new();
            hasher.update(seed.to_le_bytes());
            hasher.update(token.as_bytes());
            let digest: [u8; 32] = hasher.finalize().into();
            let mut rng = ChaCha8Rng::from_seed(digest);
            let raw: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
            let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
            table.insert(token, raw.iter().map(|x| (x / norm) as f32).collect());
        }
        table
    }

    /// Parses the word-vector text format: a `<count> <dim>` header, then one
    /// `token v1 .. vdim` line per entry.
    pub fn parse(text: &str, path: &Path) -> Result<Self, EmbeddingError> {
        let err = |line: usize, message: String| EmbeddingError::Format {
            path: path.to_owned(),
            line,
            message,
        };
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| err(1, "missing `<count> <dim>` header".into()))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        let parse_usize = |s: &str| s.parse::<usize>().map_err(|e| err(1, format!("bad header: {e}")));
        if fields.len() != 2 {
            return Err(err(1, format!("header must be `<count> <dim>`, got {header:?}")));
        }
        let count = parse_usize(fields[0])?;
        let dim = parse_usize(fields[1])?;
        if dim == 0 {
            return Err(err(1, "dimension must be positive".into()));
        }

        let mut table = EmbeddingTable::new(dim);
        let mut rows = 0;
        for (i, line) in lines {
            let line_no = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split(' ').filter(|p| !p.is_empty());
            let token = parts.next().expect("non-empty line has a first field");
            let vector = parts
                .map(|v| v.parse::<f32>())
                .collect::<Result<Vec<f32>, _>>()
                .map_err(|e| err(line_no, format!("bad float: {e}")))?;
            if vector.len() != dim {
                return Err(err(
                    line_no,
                    format!("expected {dim} values for {token:?}, found {}", vector.len()),
                ));
            }
            if table.insert(token, vector) {
                log::warn!("{}:{line_no}: duplicate token {token:?}, keeping the last vector", path.display());
            }
            rows += 1;
        }
        if rows != count {
            return Err(err(1, format!("header announces {count} vectors, file has {rows}")));
        }
        Ok(table)
    }

    pub fn load(path: &Path) -> Result<Self, EmbeddingError> {
        let text = std::fs::read_to_string(path).map_err(|source| EmbeddingError::Io {
            path: path.to_owned(),
            source,
        })?;
        let table = Self::parse(&text, path)?;
        log::info!("{}: loaded {} vectors of dimension {}", path.display(), table.len(), table.dim);
        Ok(table)
    }

    /// Renders in the format [`Self::parse`] reads, entries in insertion
    /// order, floats in shortest round-trip form.
    pub fn dump(&self) -> String {
        let mut out = format!("{} {}\n", self.len(), self.dim);
        for (token, vector) in self.tokens.iter().zip(&self.vectors) {
            out.push_str(token);
            for v in vector {
                let _ = write!(out, " {v}");
            }
            out.push('\n');
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<(), EmbeddingError> {
        std::fs::write(path, self.dump()).map_err(|source| EmbeddingError::Io {
            path: path.to_owned(),
            source,
        })
    }
}
