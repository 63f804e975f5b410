use std::collections::{BTreeMap, HashMap};

/// A lowercased token with its byte span in the source text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub text: String,
    pub start: usize,
    pub end: usize,
}

/// Splits on every non-alphanumeric character and lowercases.
pub fn tokenize_spans(text: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut start: Option<usize> = None;
    for (i, c) in text.char_indices() {
        match (c.is_alphanumeric(), start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                tokens.push(token(text, s, i));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        tokens.push(token(text, s, text.len()));
    }
    tokens
}

fn token(text: &str, start: usize, end: usize) -> Token {
    Token {
        text: text[start..end].to_lowercase(),
        start,
        end,
    }
}

pub fn tokenize(text: &str) -> Vec<String> {
    tokenize_spans(text).into_iter().map(|t| t.text).collect()
}

/// Concept names keyed by their token sequence. Ordinals follow ascending
/// concept id and double as the bag-of-entities column index.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct NameIndex {
    ids: Vec<String>,
    names: HashMap<Vec<String>, u32>,
    longest: usize,
}

impl NameIndex {
    /// Builds from `(concept id, title)` pairs. When two concepts share a
    /// title the smaller id keeps it.
    pub fn new<'a>(concepts: impl IntoIterator<Item = (&'a str, &'a str)>) -> Self {
        let sorted: BTreeMap<&str, &str> = concepts.into_iter().collect();
        let mut index = NameIndex::default();
        for (ordinal, (id, title)) in sorted.into_iter().enumerate() {
            index.ids.push(id.to_owned());
            let key = tokenize(title);
            if key.is_empty() {
                continue;
            }
            index.longest = index.longest.max(key.len());
            if let Some(&holder) = index.names.get(&key) {
                log::debug!("name {title:?} of {id} already taken by {}", index.ids[holder as usize]);
                continue;
            }
            index.names.insert(key, ordinal as u32);
        }
        index
    }

    /// Number of concepts, named or not.
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn id(&self, ordinal: u32) -> &str {
        &self.ids[ordinal as usize]
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn ordinal(&self, id: &str) -> Option<u32> {
        self.ids.binary_search_by(|p| p.as_str().cmp(id)).ok().map(|i| i as u32)
    }
}

/// All occurrences of one concept in a text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mention {
    pub entity_id: String,
    pub ordinal: u32,
    /// Byte spans, in text order.
    pub spans: Vec<(usize, usize)>,
    pub count: usize,
}

/// Greedy, left-to-right, longest-match concept spotting over tokens.
/// Matches never overlap; mentions are aggregated per concept and returned
/// in ordinal order.
pub fn spot_entities(text: &str, names: &NameIndex) -> Vec<Mention> {
    let tokens = tokenize_spans(text);
    let mut found: BTreeMap<u32, Vec<(usize, usize)>> = BTreeMap::new();
    let mut i = 0;
    while i < tokens.len() {
        let max_len = names.longest.min(tokens.len() - i);
        let hit = (1..=max_len).rev().find_map(|len| {
            let key: Vec<String> = tokens[i..i + len].iter().map(|t| t.text.clone()).collect();
            names.names.get(&key).map(|&ordinal| (ordinal, len))
        });
        match hit {
            Some((ordinal, len)) => {
                found
                    .entry(ordinal)
                    .or_default()
                    .push((tokens[i].start, tokens[i + len - 1].end));
                i += len;
            }
            None => i += 1,
        }
    }
    found
        .into_iter()
        .map(|(ordinal, spans)| Mention {
            entity_id: names.id(ordinal).to_owned(),
            ordinal,
            count: spans.len(),
            spans,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokenize_examples() {
        assert_eq!(tokenize("Deep Learning, 2018!"), ["deep", "learning", "2018"]);
        assert!(tokenize("").is_empty());
        assert_eq!(tokenize("word2vec/GloVe"), ["word2vec", "glove"]);
    }

    #[test]
    fn token_spans_point_into_source() {
        let text = "Über  Größe";
        for t in tokenize_spans(text) {
            assert_eq!(text[t.start..t.end].to_lowercase(), t.text);
        }
    }

    /// Every (start, length) at which some name matches.
    fn all_matches(tokens: &[String], names: &[Vec<String>]) -> Vec<(usize, usize)> {
        let mut out = vec![];
        for i in 0..tokens.len() {
            for n in names {
                if tokens[i..].starts_with(n) {
                    out.push((i, n.len()));
                }
            }
        }
        out
    }

    #[test]
    fn longest_match_wins() {
        let names = NameIndex::new([("nlp", "Natural Language Processing"), ("lang", "language")]);
        let text = "natural language processing";
        let toks = tokenize(text);
        let keys = vec![tokenize("Natural Language Processing"), tokenize("language")];
        // Both names match somewhere; greedy keeps the one starting first and
        // covering the most tokens.
        assert_eq!(all_matches(&toks, &keys), vec![(0, 3), (1, 1)]);
        let mentions = spot_entities(text, &names);
        assert_eq!(mentions.len(), 1);
        assert_eq!(mentions[0].entity_id, "nlp");
        assert_eq!(mentions[0].spans, vec![(0, text.len())]);
    }

    #[test]
    fn counts_aggregate_per_entity() {
        let names = NameIndex::new([("learning", "Learning")]);
        let mentions = spot_entities("learning and learning", &names);
        assert_eq!(mentions.len(), 1);
        assert_eq!(mentions[0].count, 2);
        assert_eq!(mentions[0].spans, vec![(0, 8), (13, 21)]);
    }

    #[test]
    fn no_names_no_mentions() {
        let names = NameIndex::new([("ml", "machine learning")]);
        assert!(spot_entities("quantum chromodynamics", &names).is_empty());
    }

    #[test]
    fn shared_title_goes_to_smaller_id() {
        let names = NameIndex::new([("b", "Graph"), ("a", "graph")]);
        let m = spot_entities("graph", &names);
        assert_eq!(m[0].entity_id, "a");
        assert_eq!(names.ordinal("b"), Some(1));
    }
}
