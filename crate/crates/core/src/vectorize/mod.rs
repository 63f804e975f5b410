//! Four-block text representation: bag-of-words, bag-of-entities,
//! embedding-of-words and embedding-of-entities.
//!
//! Each block is L2-normalized on its own and then scaled by its block
//! weight, so a text with content in every block has squared norm equal to
//! the sum of the squared block weights. Sums of such vectors (used for
//! extended representations) are plain block-wise sums.

mod embeddings;
mod text;
mod vocab;

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

pub use embeddings::{EmbeddingError, EmbeddingTable};
pub use text::{spot_entities, tokenize, tokenize_spans, Mention, NameIndex, Token};
pub use vocab::Vocabulary;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum VectorizeError {
    #[error("feature layouts differ: {0:?} vs {1:?}")]
    LayoutMismatch(BlockLayout, BlockLayout),
}

/// Sparse block as `(column, weight)` pairs, sorted by column, no zeros.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseBlock(Vec<(u32, f64)>);

impl SparseBlock {
    /// Accumulates duplicate columns and drops zeros.
    pub fn from_pairs(mut pairs: Vec<(u32, f64)>) -> Self {
        pairs.sort_by_key(|&(c, _)| c);
        let mut out: Vec<(u32, f64)> = Vec::with_capacity(pairs.len());
        for (c, w) in pairs {
            match out.last_mut() {
                Some(last) if last.0 == c => last.1 += w,
                _ => out.push((c, w)),
            }
        }
        out.retain(|&(_, w)| w != 0.0);
        SparseBlock(out)
    }

    pub fn entries(&self) -> &[(u32, f64)] {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn norm_squared(&self) -> f64 {
        self.0.iter().map(|(_, w)| w * w).sum()
    }

    pub fn dot(&self, other: &SparseBlock) -> f64 {
        let (a, b) = (&self.0, &other.0);
        let (mut i, mut j, mut sum) = (0, 0, 0.0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => i += 1,
                Ordering::Greater => j += 1,
                Ordering::Equal => {
                    sum += a[i].1 * b[j].1;
                    i += 1;
                    j += 1;
                }
            }
        }
        sum
    }

    /// `self + scale * other`.
    pub fn add_scaled(&mut self, other: &SparseBlock, scale: f64) {
        if scale == 0.0 || other.is_empty() {
            return;
        }
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() || j < b.len() {
            let take_a = j == b.len() || (i < a.len() && a[i].0 < b[j].0);
            let take_b = i == a.len() || (j < b.len() && b[j].0 < a[i].0);
            if take_a {
                out.push(a[i]);
                i += 1;
            } else if take_b {
                out.push((b[j].0, scale * b[j].1));
                j += 1;
            } else {
                out.push((a[i].0, a[i].1 + scale * b[j].1));
                i += 1;
                j += 1;
            }
        }
        out.retain(|&(_, w)| w != 0.0);
        self.0 = out;
    }

    fn scaled_to(mut self, length: f64) -> Self {
        let norm = self.norm_squared().sqrt();
        if norm > 0.0 {
            let factor = length / norm;
            for (_, w) in &mut self.0 {
                *w *= factor;
            }
            self.0.retain(|&(_, w)| w != 0.0);
        }
        self
    }
}

fn dense_scaled_to(mut v: Vec<f64>, length: f64) -> Vec<f64> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        let factor = length / norm;
        v.iter_mut().for_each(|x| *x *= factor);
    }
    v
}

/// Column counts of each block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockLayout {
    pub vocabulary: usize,
    pub entities: usize,
    pub dim: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Block {
    Bow,
    Boe,
    Eow,
    Eoe,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockWeights {
    pub bow: f64,
    pub boe: f64,
    pub eow: f64,
    pub eoe: f64,
}

impl Default for BlockWeights {
    fn default() -> Self {
        BlockWeights {
            bow: 1.0,
            boe: 1.0,
            eow: 1.0,
            eoe: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub bow: SparseBlock,
    pub boe: SparseBlock,
    pub eow: Vec<f64>,
    pub eoe: Vec<f64>,
    pub layout: BlockLayout,
}

impl FeatureVector {
    pub fn zero(layout: BlockLayout) -> Self {
        FeatureVector {
            bow: SparseBlock::default(),
            boe: SparseBlock::default(),
            eow: vec![0.0; layout.dim],
            eoe: vec![0.0; layout.dim],
            layout,
        }
    }

    /// Blocks that carry no signal.
    pub fn zero_blocks(&self) -> Vec<Block> {
        let mut out = Vec::new();
        if self.bow.is_empty() {
            out.push(Block::Bow);
        }
        if self.boe.is_empty() {
            out.push(Block::Boe);
        }
        if self.eow.iter().all(|x| *x == 0.0) {
            out.push(Block::Eow);
        }
        if self.eoe.iter().all(|x| *x == 0.0) {
            out.push(Block::Eoe);
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.zero_blocks().len() == 4
    }

    pub fn norm(&self) -> f64 {
        (self.bow.norm_squared()
            + self.boe.norm_squared()
            + dense_dot(&self.eow, &self.eow)
            + dense_dot(&self.eoe, &self.eoe))
        .sqrt()
    }

    pub fn dot(&self, other: &FeatureVector) -> Result<f64, VectorizeError> {
        self.check_layout(other)?;
        Ok(self.bow.dot(&other.bow)
            + self.boe.dot(&other.boe)
            + dense_dot(&self.eow, &other.eow)
            + dense_dot(&self.eoe, &other.eoe))
    }

    /// `self += scale * other`, block by block.
    ///
    /// # Panics
    /// When the layouts differ.
    pub fn add_scaled(&mut self, other: &FeatureVector, scale: f64) {
        assert_eq!(self.layout, other.layout, "adding feature vectors of different layouts");
        if scale == 0.0 {
            return;
        }
        self.bow.add_scaled(&other.bow, scale);
        self.boe.add_scaled(&other.boe, scale);
        for (a, b) in self.eow.iter_mut().zip(&other.eow) {
            *a += scale * b;
        }
        for (a, b) in self.eoe.iter_mut().zip(&other.eoe) {
            *a += scale * b;
        }
    }

    /// Each block rescaled to unit length; zero blocks stay zero.
    pub fn block_normalized(&self) -> FeatureVector {
        FeatureVector {
            bow: self.bow.clone().scaled_to(1.0),
            boe: self.boe.clone().scaled_to(1.0),
            eow: dense_scaled_to(self.eow.clone(), 1.0),
            eoe: dense_scaled_to(self.eoe.clone(), 1.0),
            layout: self.layout,
        }
    }

    fn check_layout(&self, other: &FeatureVector) -> Result<(), VectorizeError> {
        if self.layout == other.layout {
            Ok(())
        } else {
            Err(VectorizeError::LayoutMismatch(self.layout, other.layout))
        }
    }
}

fn dense_dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Cosine over the full concatenation; 0 when either vector is zero.
pub fn cosine(u: &FeatureVector, v: &FeatureVector) -> Result<f64, VectorizeError> {
    let dot = u.dot(v)?;
    let denom = u.norm() * v.norm();
    if denom == 0.0 {
        return Ok(0.0);
    }
    Ok((dot / denom).clamp(-1.0, 1.0))
}

/// tf·idf over in-vocabulary tokens, L2-normalized. Unknown tokens are
/// dropped; an all-unknown input gives an empty block.
pub fn bow(tokens: &[String], vocabulary: &Vocabulary) -> SparseBlock {
    let pairs = tokens
        .iter()
        .filter_map(|t| vocabulary.column(t))
        .map(|c| (c, 1.0))
        .collect();
    let tf = SparseBlock::from_pairs(pairs);
    let weighted = tf
        .entries()
        .iter()
        .map(|&(c, count)| (c, count * vocabulary.idf(c)))
        .collect();
    SparseBlock::from_pairs(weighted).scaled_to(1.0)
}

/// idf-weighted mean of the vectors of tokens present in the table.
pub fn eow(tokens: &[String], table: &EmbeddingTable, vocabulary: &Vocabulary) -> Vec<f64> {
    let mut sum = vec![0.0; table.dim()];
    let mut total = 0.0;
    for token in tokens {
        if let Some(v) = table.get(token) {
            let w = vocabulary.idf_of(token);
            for (s, x) in sum.iter_mut().zip(v) {
                *s += w * f64::from(*x);
            }
            total += w;
        }
    }
    if total > 0.0 {
        sum.iter_mut().for_each(|s| *s /= total);
    }
    sum
}

/// Count-weighted, L2-normalized sparse block over concept ordinals.
pub fn boe(mentions: &[Mention]) -> SparseBlock {
    SparseBlock::from_pairs(mentions.iter().map(|m| (m.ordinal, m.count as f64)).collect())
        .scaled_to(1.0)
}

/// Count-weighted mean of the mentioned concepts' vectors. Concepts whose
/// vector is all zeros are skipped.
pub fn eoe(mentions: &[Mention], entity_vectors: &[Vec<f64>], dim: usize) -> Vec<f64> {
    let mut sum = vec![0.0; dim];
    let mut total = 0.0;
    for m in mentions {
        let v = &entity_vectors[m.ordinal as usize];
        if v.iter().all(|x| *x == 0.0) {
            continue;
        }
        let w = m.count as f64;
        for (s, x) in sum.iter_mut().zip(v) {
            *s += w * x;
        }
        total += w;
    }
    if total > 0.0 {
        sum.iter_mut().for_each(|s| *s /= total);
    }
    sum
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VectorizeConfig {
    pub embedding_dim: usize,
    pub block_weights: BlockWeights,
    pub min_df: usize,
}

impl Default for VectorizeConfig {
    fn default() -> Self {
        VectorizeConfig {
            embedding_dim: 250,
            block_weights: BlockWeights::default(),
            min_df: 1,
        }
    }
}

/// Everything `featurize` reads. Built once, then shared read-only.
#[derive(Debug, Clone)]
pub struct FeatureContext {
    pub vocabulary: Vocabulary,
    pub embeddings: EmbeddingTable,
    pub names: NameIndex,
    /// Per concept ordinal: embedding-of-words of its definition text.
    pub entity_vectors: Vec<Vec<f64>>,
    pub weights: BlockWeights,
}

impl FeatureContext {
    /// `definitions[i]` is the definition text of concept ordinal `i`.
    pub fn new(
        vocabulary: Vocabulary,
        embeddings: EmbeddingTable,
        names: NameIndex,
        definitions: &[&str],
        weights: BlockWeights,
    ) -> Self {
        assert_eq!(definitions.len(), names.len(), "one definition per named concept");
        let entity_vectors = definitions
            .iter()
            .map(|text| eow(&tokenize(text), &embeddings, &vocabulary))
            .collect();
        FeatureContext {
            vocabulary,
            embeddings,
            names,
            entity_vectors,
            weights,
        }
    }

    pub fn layout(&self) -> BlockLayout {
        BlockLayout {
            vocabulary: self.vocabulary.len(),
            entities: self.names.len(),
            dim: self.embeddings.dim(),
        }
    }

    pub fn featurize(&self, text: &str) -> FeatureVector {
        let tokens = tokenize(text);
        let mentions = spot_entities(text, &self.names);
        let w = self.weights;
        FeatureVector {
            bow: bow(&tokens, &self.vocabulary).scaled_to(w.bow),
            boe: boe(&mentions).scaled_to(w.boe),
            eow: dense_scaled_to(eow(&tokens, &self.embeddings, &self.vocabulary), w.eow),
            eoe: dense_scaled_to(eoe(&mentions, &self.entity_vectors, self.embeddings.dim()), w.eoe),
            layout: self.layout(),
        }
    }
}
