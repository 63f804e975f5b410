use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::text::tokenize;

/// Term → column map with document frequencies over a reference text set.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Vocabulary {
    terms: Vec<String>,
    index: HashMap<String, u32>,
    df: Vec<u32>,
    doc_count: usize,
}

impl Vocabulary {
    /// Each text counts as one document. Terms seen in fewer than `min_df`
    /// documents are dropped; the rest get columns in lexical order.
    pub fn build<'a>(texts: impl IntoIterator<Item = &'a str>, min_df: usize) -> Self {
        let mut df: BTreeMap<String, u32> = BTreeMap::new();
        let mut doc_count = 0;
        for text in texts {
            doc_count += 1;
            let distinct: BTreeSet<String> = tokenize(text).into_iter().collect();
            for term in distinct {
                *df.entry(term).or_default() += 1;
            }
        }
        let min_df = min_df.max(1) as u32;
        let mut vocab = Vocabulary {
            doc_count,
            ..Default::default()
        };
        for (term, count) in df.into_iter().filter(|&(_, c)| c >= min_df) {
            vocab.index.insert(term.clone(), vocab.terms.len() as u32);
            vocab.terms.push(term);
            vocab.df.push(count);
        }
        vocab
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn doc_count(&self) -> usize {
        self.doc_count
    }

    pub fn column(&self, term: &str) -> Option<u32> {
        self.index.get(term).copied()
    }

    pub fn term(&self, column: u32) -> &str {
        &self.terms[column as usize]
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn df(&self, column: u32) -> u32 {
        self.df[column as usize]
    }

    /// `ln(1 + D / df)`.
    pub fn idf(&self, column: u32) -> f64 {
        (1.0 + self.doc_count as f64 / self.df[column as usize] as f64).ln()
    }

    /// idf of a term, treating out-of-vocabulary terms as seen once.
    pub fn idf_of(&self, term: &str) -> f64 {
        match self.column(term) {
            Some(c) => self.idf(c),
            None => (1.0 + self.doc_count as f64).ln(),
        }
    }
}
