//! Synthetic corpus generation for tests and benchmarks.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{Corpus, Review, Sentiment};

/// Shape of a synthetic corpus: class/vocabulary sizes and text length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    /// Number of sentiment classes (1..=3, mapped onto positive/negative/neutral).
    pub classes: usize,
    /// Reviews per class.
    pub per_class: usize,
    /// Size of each class's indicative vocabulary.
    pub indicative_tokens_per_class: usize,
    /// Size of the shared noise vocabulary.
    pub noise_tokens: usize,
    /// Tokens per generated text.
    pub tokens_per_text: usize,
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.classes == 0 || self.classes > Sentiment::ALL.len() {
            return Err(Error::Config(format!(
                "synthetic classes must lie in 1..={}, got {}",
                Sentiment::ALL.len(),
                self.classes
            )));
        }
        for (name, v) in [
            ("per_class", self.per_class),
            ("indicative_tokens_per_class", self.indicative_tokens_per_class),
            ("noise_tokens", self.noise_tokens),
            ("tokens_per_text", self.tokens_per_text),
        ] {
            if v == 0 {
                return Err(Error::Config(format!("synthetic {name} must be positive")));
            }
        }
        Ok(())
    }
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            classes: 3,
            per_class: 100,
            indicative_tokens_per_class: 30,
            noise_tokens: 60,
            tokens_per_text: 12,
        }
    }
}

fn random_token(rng: &mut ChaCha8Rng) -> String {
    (0..6)
        .map(|_| (b'a' + rng.gen_range(0..26u8)) as char)
        .collect()
}

/// Disjoint vocabularies for the spec: one indicative list per class plus the
/// shared noise list, all drawn deterministically from the seed.
pub fn synthetic_vocabularies(
    spec: &SyntheticSpec,
    seed: u64,
) -> Result<(Vec<Vec<String>>, Vec<String>)> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut used = HashSet::new();
    let mut next = |rng: &mut ChaCha8Rng| loop {
        let t = random_token(rng);
        if used.insert(t.clone()) {
            return t;
        }
    };
    let indicative: Vec<Vec<String>> = (0..spec.classes)
        .map(|_| {
            (0..spec.indicative_tokens_per_class)
                .map(|_| next(&mut rng))
                .collect()
        })
        .collect();
    let noise: Vec<String> = (0..spec.noise_tokens).map(|_| next(&mut rng)).collect();
    Ok((indicative, noise))
}

/// Generates a labeled synthetic corpus.
///
/// Each text draws `ceil(0.6 * tokens_per_text)` tokens from its class's
/// indicative vocabulary and the rest from the shared noise vocabulary, then
/// shuffles token positions. Labels are assigned round-robin and dialects
/// alternate between two synthetic tags. Fully deterministic under the seed.
pub fn generate_synthetic_corpus(spec: &SyntheticSpec, seed: u64) -> Result<Corpus> {
    let (indicative, noise) = synthetic_vocabularies(spec, seed)?;
    // vocabulary draws above consumed part of the stream; texts get their own
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));

    let total = spec.classes * spec.per_class;
    let n_indicative = (spec.tokens_per_text * 3 + 4) / 5; // ceil(0.6 * T)
    let mut reviews = Vec::with_capacity(total);
    for i in 0..total {
        let class = i % spec.classes;
        let mut tokens: Vec<&str> = Vec::with_capacity(spec.tokens_per_text);
        for _ in 0..n_indicative {
            tokens.push(indicative[class][rng.gen_range(0..indicative[class].len())].as_str());
        }
        for _ in n_indicative..spec.tokens_per_text {
            tokens.push(noise[rng.gen_range(0..noise.len())].as_str());
        }
        tokens.shuffle(&mut rng);
        reviews.push(Review {
            id: format!("synth-{i:05}"),
            text: tokens.join(" "),
            dialect: if i % 2 == 0 { "synth-a" } else { "synth-b" }.to_string(),
            sentiment: Some(Sentiment::ALL[class]),
        });
    }
    Corpus::new(reviews)
}
