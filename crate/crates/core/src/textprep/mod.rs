//! Text preprocessing and TF-IDF vector space.
//!
//! Pipeline order: identifier splitting (camel case, underscores, letter/digit
//! boundaries) → lowercase → stop-word removal → Porter stemming. The stop-word
//! list is frozen in `stopwords_en.txt`.

use std::collections::{BTreeMap, HashSet};
use std::io::Write;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TextError {
    #[error("cannot build a vector space over zero documents")]
    EmptyCorpus,
}

/// Ordered, lowercase, stemmed tokens.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenList(pub Vec<String>);

impl TokenList {
    pub fn tokens(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn join(&self) -> String {
        self.0.join(" ")
    }

    pub fn extend(&mut self, other: TokenList) {
        self.0.extend(other.0);
    }
}

impl<S: Into<String>> FromIterator<S> for TokenList {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        TokenList(iter.into_iter().map(Into::into).collect())
    }
}

fn stop_words() -> &'static HashSet<&'static str> {
    static WORDS: OnceLock<HashSet<&'static str>> = OnceLock::new();
    WORDS.get_or_init(|| include_str!("stopwords_en.txt").lines().map(str::trim).filter(|w| !w.is_empty()).collect())
}

pub fn is_stop_word(word: &str) -> bool {
    stop_words().contains(word)
}

/// Splits an identifier-like run into its parts: `NullPointerException` →
/// `Null`, `Pointer`, `Exception`; `HTTPServer2` → `HTTP`, `Server`, `2`.
pub fn split_identifier(word: &str) -> Vec<&str> {
    let chars: Vec<(usize, char)> = word.char_indices().collect();
    let mut parts = Vec::new();
    let mut start = 0;
    for i in 1..chars.len() {
        let (pos, cur) = chars[i];
        let prev = chars[i - 1].1;
        let next = chars.get(i + 1).map(|&(_, c)| c);
        let boundary = (prev.is_lowercase() && cur.is_uppercase())
            || (prev.is_uppercase() && cur.is_uppercase() && next.is_some_and(char::is_lowercase))
            || (prev.is_alphabetic() && cur.is_numeric())
            || (prev.is_numeric() && cur.is_alphabetic());
        if boundary {
            parts.push(&word[start..pos]);
            start = pos;
        }
    }
    if start < word.len() {
        parts.push(&word[start..]);
    }
    parts
}

/// Splits, lowercases, drops stop words, numbers and one-letter fragments, then stems.
pub fn preprocess(text: &str) -> TokenList {
    let mut out = Vec::new();
    for run in text.split(|c: char| !c.is_alphanumeric()) {
        if run.is_empty() {
            continue;
        }
        for part in split_identifier(run) {
            if part.chars().count() < 2 || part.chars().all(char::is_numeric) {
                continue;
            }
            let lower = part.to_lowercase();
            if is_stop_word(&lower) {
                continue;
            }
            let stem = porter_stemmer::stem(&lower);
            if !stem.is_empty() {
                out.push(stem);
            }
        }
    }
    TokenList(out)
}

/// Sparse vector as (term index, weight) pairs sorted by index.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SparseVector(pub Vec<(usize, f64)>);

impl SparseVector {
    pub fn from_pairs(mut pairs: Vec<(usize, f64)>) -> Self {
        pairs.sort_by_key(|&(i, _)| i);
        SparseVector(pairs)
    }

    pub fn norm_squared(&self) -> f64 {
        self.0.iter().map(|&(_, w)| w * w).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&(_, w)| w == 0.0)
    }

    pub fn dot(&self, other: &SparseVector) -> f64 {
        let (mut i, mut j, mut acc) = (0, 0, 0.0);
        while i < self.0.len() && j < other.0.len() {
            let (a, b) = (self.0[i], other.0[j]);
            match a.0.cmp(&b.0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    acc += a.1 * b.1;
                    i += 1;
                    j += 1;
                }
            }
        }
        acc
    }

    fn normalized(mut self) -> Self {
        let norm = self.norm_squared().sqrt();
        if norm > 0.0 {
            for (_, w) in &mut self.0 {
                *w /= norm;
            }
        }
        self
    }
}

/// Cosine similarity; 0 when either vector is all-zero. Clamped to [0, 1]
/// since TF-IDF weights are nonnegative.
pub fn cosine(a: &SparseVector, b: &SparseVector) -> f64 {
    let denom = (a.norm_squared() * b.norm_squared()).sqrt();
    if denom == 0.0 {
        return 0.0;
    }
    (a.dot(b) / denom).clamp(0.0, 1.0)
}

/// TF-IDF space: raw term counts, smoothed idf `ln((1+N)/(1+df)) + 1`, L2-normalized rows.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VectorSpace {
    vocabulary: BTreeMap<String, usize>,
    idf: Vec<f64>,
    doc_vectors: BTreeMap<String, SparseVector>,
}

impl VectorSpace {
    pub fn vocabulary(&self) -> &BTreeMap<String, usize> {
        &self.vocabulary
    }

    pub fn idf(&self, term: &str) -> Option<f64> {
        self.vocabulary.get(term).map(|&i| self.idf[i])
    }

    pub fn doc_vector(&self, id: &str) -> Option<&SparseVector> {
        self.doc_vectors.get(id)
    }

    pub fn doc_ids(&self) -> impl Iterator<Item = &String> {
        self.doc_vectors.keys()
    }

    /// Projects unseen tokens into this space; out-of-vocabulary terms are dropped.
    pub fn transform(&self, tokens: &TokenList) -> SparseVector {
        let mut counts: BTreeMap<usize, f64> = BTreeMap::new();
        for t in tokens.tokens() {
            if let Some(&i) = self.vocabulary.get(t) {
                *counts.entry(i).or_default() += 1.0;
            }
        }
        SparseVector(counts.into_iter().map(|(i, tf)| (i, tf * self.idf[i])).collect()).normalized()
    }

    /// Writes `term,index,idf` rows.
    pub fn write_vocabulary_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["term", "index", "idf"])?;
        for (term, &i) in &self.vocabulary {
            w.write_record([term.as_str(), &i.to_string(), &self.idf[i].to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn build_tfidf(docs: &BTreeMap<String, TokenList>) -> Result<VectorSpace, TextError> {
    if docs.is_empty() {
        return Err(TextError::EmptyCorpus);
    }
    let mut df: BTreeMap<&str, usize> = BTreeMap::new();
    for tokens in docs.values() {
        let distinct: HashSet<&str> = tokens.tokens().iter().map(String::as_str).collect();
        for t in distinct {
            *df.entry(t).or_default() += 1;
        }
    }
    let n = docs.len() as f64;
    let mut vocabulary = BTreeMap::new();
    let mut idf = Vec::with_capacity(df.len());
    for (i, (term, count)) in df.into_iter().enumerate() {
        vocabulary.insert(term.to_string(), i);
        idf.push(((1.0 + n) / (1.0 + count as f64)).ln() + 1.0);
    }
    let mut space = VectorSpace { vocabulary, idf, doc_vectors: BTreeMap::new() };
    let vectors = docs.iter().map(|(id, tokens)| (id.clone(), space.transform(tokens))).collect();
    space.doc_vectors = vectors;
    Ok(space)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(words: &[&str]) -> TokenList {
        words.iter().copied().collect()
    }

    #[test]
    fn preprocess_examples() {
        assert!(preprocess("").is_empty());
        assert!(preprocess("the of and").is_empty());
        assert_eq!(preprocess("NullPointerException in FooBar"), toks(&["null", "pointer", "except", "foo", "bar"]));
    }

    #[test]
    fn identifier_splitting() {
        assert_eq!(split_identifier("NullPointerException"), vec!["Null", "Pointer", "Exception"]);
        assert_eq!(split_identifier("HTTPServer2x"), vec!["HTTP", "Server", "2", "x"]);
        assert_eq!(split_identifier("lower"), vec!["lower"]);
        assert_eq!(preprocess("bar_count getHTTPResponse"), toks(&["bar", "count", "get", "http", "respons"]));
    }

    #[test]
    fn single_document_vector_is_unit_length() {
        let docs = BTreeMap::from([("d".to_string(), toks(&["a1", "b1", "b1"]))]);
        let space = build_tfidf(&docs).unwrap();
        assert!((space.doc_vector("d").unwrap().norm_squared() - 1.0).abs() < 1e-12);
        assert_eq!(space.idf("a1"), Some(1.0));
    }

    #[test]
    fn empty_corpus_is_an_error() {
        assert!(matches!(build_tfidf(&BTreeMap::new()), Err(TextError::EmptyCorpus)));
    }

    #[test]
    fn cosine_examples() {
        let v = SparseVector(vec![(0, 0.6), (2, 0.8)]);
        assert_eq!(cosine(&v, &v), 1.0);
        assert_eq!(cosine(&v, &SparseVector(vec![(1, 1.0)])), 0.0);
        assert_eq!(cosine(&v, &SparseVector::default()), 0.0);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let v1 = SparseVector(vec![(0, s), (1, s)]);
        let v2 = SparseVector(vec![(0, s), (2, s)]);
        assert!((cosine(&v1, &v2) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn vocabulary_csv_lists_every_term() {
        let docs = BTreeMap::from([("a".to_string(), toks(&["x1", "y1"])), ("b".to_string(), toks(&["y1"]))]);
        let space = build_tfidf(&docs).unwrap();
        let mut buf = Vec::new();
        space.write_vocabulary_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.starts_with("term,index,idf\n"));
    }
}
