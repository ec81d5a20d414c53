//! Seeded synthetic corpora with known generating topics.

use rand::distr::weighted::WeightedIndex;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, LogNormal};

use crate::corpus::{BowDocument, Corpus, Vocabulary};
use crate::error::{Error, Result};

/// Topics with disjoint word supports; documents mix one or two of them.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantedSpec {
    pub topics: usize,
    pub words_per_topic: usize,
    /// Extra vocabulary entries that no topic uses.
    pub unused_words: usize,
    pub docs: usize,
    pub doc_length: usize,
    /// Within-topic word weights decay as `decay^rank`.
    pub decay: f64,
    pub seed: u64,
}

impl Default for PlantedSpec {
    fn default() -> Self {
        Self { topics: 5, words_per_topic: 20, unused_words: 0, docs: 2000, doc_length: 15, decay: 0.9, seed: 11 }
    }
}

#[derive(Debug, Clone)]
pub struct PlantedCorpus {
    pub corpus: Corpus,
    /// Word ids of each topic's support, heaviest first.
    pub topic_words: Vec<Vec<usize>>,
    /// Planted topics of each document.
    pub doc_topics: Vec<Vec<usize>>,
}

impl PlantedSpec {
    pub fn vocab_size(&self) -> usize {
        self.topics * self.words_per_topic + self.unused_words
    }

    pub fn generate(&self) -> Result<PlantedCorpus> {
        if self.topics < 2 || self.words_per_topic == 0 || self.docs == 0 || self.doc_length == 0 {
            return Err(Error::Config("planted corpus needs ≥2 topics and nonempty documents".into()));
        }
        if !(self.decay > 0.0 && self.decay <= 1.0) {
            return Err(Error::Config("decay must lie in (0, 1]".into()));
        }
        let v = self.vocab_size();
        let width = v.to_string().len();
        let vocab = Vocabulary::new((0..v).map(|i| format!("w{i:0width$}")).collect())?;
        let topic_words: Vec<Vec<usize>> =
            (0..self.topics).map(|k| (k * self.words_per_topic..(k + 1) * self.words_per_topic).collect()).collect();
        let within =
            WeightedIndex::new((0..self.words_per_topic).map(|r| self.decay.powi(r as i32))).expect("positive weights");

        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut docs = Vec::with_capacity(self.docs);
        let mut doc_topics = Vec::with_capacity(self.docs);
        for _ in 0..self.docs {
            let n_topics = rng.random_range(1..=2);
            let chosen = sample(&mut rng, self.topics, n_topics).into_vec();
            let share: f64 = if n_topics == 1 { 1.0 } else { rng.random_range(0.2..0.8) };
            let ids: Vec<usize> = (0..self.doc_length)
                .map(|_| {
                    let k = if n_topics == 1 || rng.random::<f64>() < share { chosen[0] } else { chosen[1] };
                    topic_words[k][within.sample(&mut rng)]
                })
                .collect();
            docs.push(BowDocument::from_ids(&ids)?);
            let mut t = chosen;
            t.sort_unstable();
            doc_topics.push(t);
        }
        Ok(PlantedCorpus { corpus: Corpus::new(vocab, docs)?, topic_words, doc_topics })
    }
}

/// A newsgroup-shaped corpus: LDA-style documents over a Zipfian vocabulary,
/// with a shared background distribution and sparse topic mixtures.
#[derive(Debug, Clone, PartialEq)]
pub struct NewsgroupLikeSpec {
    pub docs: usize,
    pub vocab: usize,
    pub topics: usize,
    /// Words that carry most of each topic's mass.
    pub focus_words: usize,
    /// Fraction of tokens drawn from the background distribution.
    pub background: f64,
    /// Dirichlet concentration of document-topic mixtures.
    pub alpha: f64,
    /// Median document length; lengths are log-normal.
    pub median_length: f64,
    pub seed: u64,
}

impl Default for NewsgroupLikeSpec {
    fn default() -> Self {
        Self {
            docs: 5000,
            vocab: 2000,
            topics: 20,
            focus_words: 80,
            background: 0.3,
            alpha: 0.1,
            median_length: 60.0,
            seed: 20,
        }
    }
}

fn dirichlet<R: Rng + ?Sized>(alpha: f64, k: usize, rng: &mut R) -> Vec<f64> {
    let g = Gamma::new(alpha, 1.0).expect("positive concentration");
    let mut x: Vec<f64> = (0..k).map(|_| g.sample(rng)).collect();
    let s: f64 = x.iter().sum();
    if s > 0.0 {
        x.iter_mut().for_each(|v| *v /= s);
    } else {
        let i = rng.random_range(0..k);
        x[i] = 1.0;
    }
    x
}

impl NewsgroupLikeSpec {
    pub fn generate(&self) -> Result<Corpus> {
        if self.docs == 0 || self.vocab < self.focus_words || self.topics < 2 || self.focus_words == 0 {
            return Err(Error::Config("invalid newsgroup-like corpus shape".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let v = self.vocab;
        let zipf: Vec<f64> = (0..v).map(|r| 1.0 / (r as f64 + 1.0)).collect();
        let background = WeightedIndex::new(&zipf).expect("positive weights");
        let topics: Vec<WeightedIndex<f64>> = (0..self.topics)
            .map(|_| {
                let focus = sample(&mut rng, v, self.focus_words).into_vec();
                let mut w: Vec<f64> = zipf.iter().map(|z| 0.05 * z).collect();
                let mass = dirichlet(0.5, self.focus_words, &mut rng);
                for (&i, m) in focus.iter().zip(mass) {
                    w[i] += m;
                }
                WeightedIndex::new(w).expect("positive weights")
            })
            .collect();
        let lengths = LogNormal::new(self.median_length.ln(), 0.6).expect("valid length distribution");

        let width = v.to_string().len();
        let vocab = Vocabulary::new((0..v).map(|i| format!("w{i:0width$}")).collect())?;
        let mut docs = Vec::with_capacity(self.docs);
        for _ in 0..self.docs {
            let len = (lengths.sample(&mut rng).round() as usize).clamp(8, 600);
            let mix = WeightedIndex::new(dirichlet(self.alpha, self.topics, &mut rng)).expect("simplex weights");
            let ids: Vec<usize> = (0..len)
                .map(|_| {
                    if rng.random::<f64>() < self.background {
                        background.sample(&mut rng)
                    } else {
                        topics[mix.sample(&mut rng)].sample(&mut rng)
                    }
                })
                .collect();
            docs.push(BowDocument::from_ids(&ids)?);
        }
        Corpus::new(vocab, docs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn planted_shape() {
        let p = PlantedSpec::default().generate().unwrap();
        assert_eq!(p.corpus.len(), 2000);
        assert_eq!(p.corpus.vocab().len(), 100);
        assert!(p.corpus.docs().iter().all(|d| d.length() == 15));
        for (doc, topics) in p.corpus.docs().iter().zip(&p.doc_topics) {
            assert!((1..=2).contains(&topics.len()));
            for (t, _) in doc.entries() {
                assert!(topics.contains(&(t / 20)));
            }
        }
    }

    #[test]
    fn planted_is_seeded() {
        let a = PlantedSpec::default().generate().unwrap();
        let b = PlantedSpec::default().generate().unwrap();
        assert_eq!(a.corpus, b.corpus);
        let c = PlantedSpec { seed: 12, ..PlantedSpec::default() }.generate().unwrap();
        assert_ne!(a.corpus, c.corpus);
    }

    #[test]
    fn newsgroup_like_shape() {
        let spec = NewsgroupLikeSpec { docs: 300, ..NewsgroupLikeSpec::default() };
        let c = spec.generate().unwrap();
        assert_eq!(c.len(), 300);
        assert_eq!(c.vocab().len(), 2000);
        assert_eq!(c, spec.generate().unwrap());
    }
}
