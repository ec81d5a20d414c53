//! Vocabulary-indexed bag-of-words corpora.
//!
//! Two on-disk formats are understood:
//!
//! * plain text: one document per line, whitespace-separated tokens;
//! * BoW: one document per line of `termid:count` entries plus a vocabulary
//!   file with one term per line (line number = term id).
//!
//! Writing a corpus always produces the BoW format, and reading it back
//! yields the same ids and counts.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use log::info;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Splits on whitespace and lowercases. No other normalization is applied.
pub fn tokenize(line: &str) -> Vec<String> {
    line.split_whitespace().map(str::to_lowercase).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    terms: Vec<String>,
    index: HashMap<String, u32>,
}

impl Vocabulary {
    pub fn new(terms: Vec<String>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let mut index = HashMap::with_capacity(terms.len());
        for (i, t) in terms.iter().enumerate() {
            if t.is_empty() || t.chars().any(char::is_whitespace) {
                return Err(Error::Config(format!("invalid vocabulary term {t:?}")));
            }
            if index.insert(t.clone(), i as u32).is_some() {
                return Err(Error::Config(format!("duplicate vocabulary term `{t}`")));
            }
        }
        Ok(Self { terms, index })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn term(&self, id: usize) -> Option<&str> {
        self.terms.get(id).map(String::as_str)
    }

    pub fn id(&self, term: &str) -> Option<usize> {
        self.index.get(term).map(|&i| i as usize)
    }

    /// Maps tokens onto this vocabulary. Returns the document (if any token
    /// was known) and the number of unknown tokens dropped.
    pub fn encode<S: AsRef<str>>(&self, tokens: &[S]) -> (Option<BowDocument>, usize) {
        let mut unknown = 0;
        let ids: Vec<usize> = tokens
            .iter()
            .filter_map(|t| {
                let id = self.id(t.as_ref());
                if id.is_none() {
                    unknown += 1;
                }
                id
            })
            .collect();
        (BowDocument::from_ids(&ids).ok(), unknown)
    }
}

/// Sparse term counts of a single document, sorted by term id.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BowDocument {
    entries: Vec<(u32, u32)>,
    length: u32,
}

impl BowDocument {
    /// Builds a document from `(term id, count)` pairs. Repeated ids are
    /// merged; zero counts are ignored.
    pub fn from_counts<I: IntoIterator<Item = (usize, u32)>>(counts: I) -> Result<Self> {
        let mut entries: Vec<(u32, u32)> =
            counts.into_iter().filter(|&(_, c)| c > 0).map(|(t, c)| (t as u32, c)).collect();
        entries.sort_unstable_by_key(|&(t, _)| t);
        entries.dedup_by(|next, prev| {
            if next.0 == prev.0 {
                prev.1 += next.1;
                true
            } else {
                false
            }
        });
        let length: u32 = entries.iter().map(|&(_, c)| c).sum();
        if length == 0 {
            return Err(Error::EmptyDocument);
        }
        Ok(Self { entries, length })
    }

    pub fn from_ids(ids: &[usize]) -> Result<Self> {
        Self::from_counts(ids.iter().map(|&i| (i, 1)))
    }

    /// `(term id, count)` pairs in ascending term order.
    pub fn entries(&self) -> impl ExactSizeIterator<Item = (usize, u32)> + '_ {
        self.entries.iter().map(|&(t, c)| (t as usize, c))
    }

    /// Number of distinct terms.
    pub fn num_terms(&self) -> usize {
        self.entries.len()
    }

    /// Total token count `N_j`.
    pub fn length(&self) -> u32 {
        self.length
    }

    pub fn count(&self, term: usize) -> u32 {
        self.entries.binary_search_by_key(&(term as u32), |&(t, _)| t).map_or(0, |i| self.entries[i].1)
    }

    pub fn max_term(&self) -> usize {
        self.entries.last().map_or(0, |&(t, _)| t as usize)
    }

    /// Term ids repeated by count, ascending.
    pub fn tokens(&self) -> Vec<usize> {
        self.entries.iter().flat_map(|&(t, c)| std::iter::repeat_n(t as usize, c as usize)).collect()
    }

    /// Sum of the counts of two documents.
    pub fn merged(&self, other: &BowDocument) -> BowDocument {
        BowDocument::from_counts(self.entries().chain(other.entries())).expect("both documents are nonempty")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    vocab: Vocabulary,
    docs: Vec<BowDocument>,
}

impl Corpus {
    pub fn new(vocab: Vocabulary, docs: Vec<BowDocument>) -> Result<Self> {
        if docs.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        for d in &docs {
            if d.max_term() >= vocab.len() {
                return Err(Error::TermOutOfRange(d.max_term()));
            }
        }
        Ok(Self { vocab, docs })
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn docs(&self) -> &[BowDocument] {
        &self.docs
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn num_tokens(&self) -> u64 {
        self.docs.iter().map(|d| d.length() as u64).sum()
    }

    /// Writes the BoW file and its vocabulary file.
    pub fn write_bow(&self, bow_path: &Path, vocab_path: &Path) -> Result<()> {
        write_vocab(&self.vocab, vocab_path)?;
        write_bow_docs(&self.docs, bow_path)
    }

    pub fn read_bow(bow_path: &Path, vocab_path: &Path) -> Result<Self> {
        let vocab = read_vocab(vocab_path)?;
        let docs = read_bow_docs(bow_path, vocab.len())?;
        Corpus::new(vocab, docs)
    }
}

pub fn write_vocab(vocab: &Vocabulary, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for t in vocab.terms() {
        writeln!(w, "{t}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_vocab(path: &Path) -> Result<Vocabulary> {
    let reader = BufReader::new(File::open(path)?);
    let mut terms = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        let term = line.trim_end_matches('\r');
        if term.is_empty() {
            return Err(Error::Parse { path: path.to_path_buf(), line: n + 1, msg: "empty vocabulary entry".into() });
        }
        terms.push(term.to_string());
    }
    Vocabulary::new(terms)
}

pub fn write_bow_docs(docs: &[BowDocument], path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for d in docs {
        let mut first = true;
        for (t, c) in d.entries() {
            if !first {
                w.write_all(b" ")?;
            }
            write!(w, "{t}:{c}")?;
            first = false;
        }
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a BoW file. Blank lines are empty documents and are dropped.
pub fn read_bow_docs(path: &Path, vocab_size: usize) -> Result<Vec<BowDocument>> {
    let reader = BufReader::new(File::open(path)?);
    let mut docs = Vec::new();
    let mut dropped = 0usize;
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        let parse_err = |msg: String| Error::Parse { path: path.to_path_buf(), line: n + 1, msg };
        let mut counts = Vec::new();
        for entry in line.split_whitespace() {
            let (t, c) =
                entry.split_once(':').ok_or_else(|| parse_err(format!("expected `termid:count`, found `{entry}`")))?;
            let t: usize = t.parse().map_err(|_| parse_err(format!("bad term id `{t}`")))?;
            let c: u32 = c.parse().map_err(|_| parse_err(format!("bad count `{c}`")))?;
            if t >= vocab_size {
                return Err(parse_err(format!("term id {t} outside vocabulary of {vocab_size}")));
            }
            counts.push((t, c));
        }
        match BowDocument::from_counts(counts) {
            Ok(d) => docs.push(d),
            Err(_) => dropped += 1,
        }
    }
    if dropped > 0 {
        info!("dropped {dropped} empty documents from {}", path.display());
    }
    Ok(docs)
}

/// Reads a plain-text corpus, tokenizing each line.
pub fn read_text_lines(path: &Path) -> Result<Vec<Vec<String>>> {
    let reader = BufReader::new(File::open(path)?);
    reader.lines().map(|l| Ok(tokenize(&l?))).collect()
}

/// Builds a corpus from tokenized documents.
///
/// Keeps terms with corpus frequency at least `min_count`, then the
/// `max_vocab` most frequent of those (ties broken lexicographically). Term
/// ids follow that frequency order. Documents left empty are dropped.
pub fn build_corpus<D, S>(lines: &[D], min_count: u64, max_vocab: usize) -> Result<Corpus>
where
    D: AsRef<[S]>,
    S: AsRef<str>,
{
    if min_count < 1 {
        return Err(Error::Config("min_count must be at least 1".into()));
    }
    if max_vocab < 1 {
        return Err(Error::Config("max_vocab must be at least 1".into()));
    }
    let mut freq: HashMap<&str, u64> = HashMap::new();
    for line in lines {
        for tok in line.as_ref() {
            *freq.entry(tok.as_ref()).or_insert(0) += 1;
        }
    }
    let mut kept: Vec<(&str, u64)> = freq.into_iter().filter(|&(_, c)| c >= min_count).collect();
    kept.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    kept.truncate(max_vocab);
    if kept.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let vocab = Vocabulary::new(kept.iter().map(|(t, _)| t.to_string()).collect())?;

    let mut docs = Vec::with_capacity(lines.len());
    let mut dropped = 0usize;
    for line in lines {
        match vocab.encode(line.as_ref()).0 {
            Some(d) => docs.push(d),
            None => dropped += 1,
        }
    }
    if dropped > 0 {
        info!("dropped {dropped} documents with no in-vocabulary tokens");
    }
    Corpus::new(vocab, docs)
}

/// A test document divided into the part used to infer its topics and the
/// part that is scored.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitDocument {
    pub observed: BowDocument,
    pub heldout: BowDocument,
}

impl SplitDocument {
    pub fn merged(&self) -> BowDocument {
        self.observed.merged(&self.heldout)
    }
}

/// Splits one document token-wise: the token multiset is shuffled and
/// tokens are dealt alternately to the observed and held-out halves.
/// Requires at least two tokens.
pub fn split_document(doc: &BowDocument, rng: &mut ChaCha8Rng) -> Result<SplitDocument> {
    if doc.length() < 2 {
        return Err(Error::Split("a document needs at least two tokens to be halved".into()));
    }
    let mut tokens = doc.tokens();
    tokens.shuffle(rng);
    let observed: Vec<usize> = tokens.iter().step_by(2).copied().collect();
    let heldout: Vec<usize> = tokens.iter().skip(1).step_by(2).copied().collect();
    Ok(SplitDocument { observed: BowDocument::from_ids(&observed)?, heldout: BowDocument::from_ids(&heldout)? })
}

/// Halves every document with a generator seeded from `seed`.
pub fn split_documents(docs: &[BowDocument], seed: u64) -> Result<Vec<SplitDocument>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    docs.iter().map(|d| split_document(d, &mut rng)).collect()
}

/// Holds out `round(test_fraction · |D|)` documents (at least one, and at
/// least one left for training) and halves each of them.
///
/// Only documents with two or more tokens are eligible for the test set.
pub fn split_heldout(corpus: &Corpus, test_fraction: f64, seed: u64) -> Result<(Corpus, Vec<SplitDocument>)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::Config(format!("test fraction {test_fraction} must lie in (0, 1)")));
    }
    let n = corpus.len();
    if n < 2 {
        return Err(Error::Split(format!("need at least 2 documents, found {n}")));
    }
    let n_test = ((test_fraction * n as f64).round() as usize).clamp(1, n - 1);
    let eligible: Vec<usize> = (0..n).filter(|&i| corpus.docs[i].length() >= 2).collect();
    if eligible.len() < n_test {
        return Err(Error::Split(format!(
            "{n_test} test documents requested but only {} have two or more tokens",
            eligible.len()
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen: Vec<usize> =
        rand::seq::index::sample(&mut rng, eligible.len(), n_test).into_iter().map(|i| eligible[i]).collect();
    chosen.sort_unstable();

    let mut is_test = vec![false; n];
    for &i in &chosen {
        is_test[i] = true;
    }
    let train_docs = corpus.docs.iter().zip(&is_test).filter(|(_, &t)| !t).map(|(d, _)| d.clone()).collect();
    let test = chosen.iter().map(|&i| split_document(&corpus.docs[i], &mut rng)).collect::<Result<Vec<_>>>()?;
    Ok((Corpus::new(corpus.vocab.clone(), train_docs)?, test))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn docs(lines: &[&[&str]]) -> Vec<Vec<String>> {
        lines.iter().map(|l| l.iter().map(|s| s.to_string()).collect()).collect()
    }

    #[test]
    fn builds_single_document() {
        let c = build_corpus(&docs(&[&["a", "b", "a"]]), 1, 10).unwrap();
        assert_eq!(c.vocab().len(), 2);
        let a = c.vocab().id("a").unwrap();
        let b = c.vocab().id("b").unwrap();
        assert_eq!(c.docs()[0].count(a), 2);
        assert_eq!(c.docs()[0].count(b), 1);
        assert_eq!(c.docs()[0].length(), 3);
    }

    #[test]
    fn min_count_filters_terms() {
        let c = build_corpus(&docs(&[&["a", "b"], &["b"]]), 2, 10).unwrap();
        assert_eq!(c.vocab().terms(), &["b".to_string()]);
        assert_eq!(c.len(), 2);
        for d in c.docs() {
            assert_eq!(d.entries().collect::<Vec<_>>(), vec![(0, 1)]);
        }
    }

    #[test]
    fn drops_documents_emptied_by_filtering() {
        let c = build_corpus(&docs(&[&["x"], &["b", "b"], &["y"]]), 2, 10).unwrap();
        assert_eq!(c.len(), 1);
        assert!(matches!(build_corpus(&docs(&[&["x"], &["y"]]), 2, 10), Err(Error::EmptyCorpus)));
    }

    #[test]
    fn truncation_breaks_ties_lexicographically() {
        let c = build_corpus(&docs(&[&["d", "c", "b", "a", "a"]]), 1, 2).unwrap();
        assert_eq!(c.vocab().terms(), &["a".to_string(), "b".to_string()]);
    }

    #[test]
    fn tokenizer_lowercases() {
        assert_eq!(tokenize("  Hello\tWORLD  x "), vec!["hello", "world", "x"]);
    }

    #[test]
    fn document_merges_duplicates() {
        let d = BowDocument::from_counts([(3, 1), (1, 2), (3, 4), (2, 0)]).unwrap();
        assert_eq!(d.entries().collect::<Vec<_>>(), vec![(1, 2), (3, 5)]);
        assert_eq!(d.length(), 7);
        assert!(BowDocument::from_counts([(0, 0)]).is_err());
    }

    #[test]
    fn split_counts() {
        let lines: Vec<Vec<String>> = (0..10).map(|i| vec![format!("w{i}"), "common".into()]).collect();
        let c = build_corpus(&lines, 1, 100).unwrap();
        let (train, test) = split_heldout(&c, 0.1, 5).unwrap();
        assert_eq!(train.len(), 9);
        assert_eq!(test.len(), 1);
    }

    #[test]
    fn split_halves_length_four() {
        let d = BowDocument::from_counts([(0, 3), (1, 1)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = split_document(&d, &mut rng).unwrap();
        assert_eq!(s.observed.length(), 2);
        assert_eq!(s.heldout.length(), 2);
        assert_eq!(s.merged(), d);
    }

    #[test]
    fn split_is_deterministic() {
        let lines: Vec<Vec<String>> =
            (0..30).map(|i| (0..(i % 7 + 2)).map(|j| format!("t{}", (i * j) % 11)).collect()).collect();
        let c = build_corpus(&lines, 1, 100).unwrap();
        let a = split_heldout(&c, 0.3, 42).unwrap();
        let b = split_heldout(&c, 0.3, 42).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn split_rejects_tiny_corpus() {
        let c = build_corpus(&docs(&[&["a", "b"]]), 1, 10).unwrap();
        assert!(matches!(split_heldout(&c, 0.5, 0), Err(Error::Split(_))));
        let c = build_corpus(&docs(&[&["a", "b"], &["a"]]), 1, 10).unwrap();
        assert!(split_heldout(&c, 0.0, 0).is_err());
        assert!(split_heldout(&c, 1.0, 0).is_err());
    }

    #[test]
    fn bow_parse_errors_carry_line() {
        let dir = tempfile::tempdir().unwrap();
        let vocab = dir.path().join("vocab.txt");
        let bow = dir.path().join("docs.bow");
        std::fs::write(&vocab, "a\nb\n").unwrap();
        std::fs::write(&bow, "0:1 1:2\n1:x\n").unwrap();
        match Corpus::read_bow(&bow, &vocab) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        std::fs::write(&bow, "0:1 7:2\n").unwrap();
        assert!(Corpus::read_bow(&bow, &vocab).is_err());
    }

    #[test]
    fn encode_counts_unknown_tokens() {
        let v = Vocabulary::new(vec!["a".into(), "b".into()]).unwrap();
        let (d, unknown) = v.encode(&["a", "zz", "b", "a"]);
        assert_eq!(unknown, 1);
        assert_eq!(d.unwrap().length(), 3);
        let (d, unknown) = v.encode(&["q"]);
        assert!(d.is_none());
        assert_eq!(unknown, 1);
    }
}
