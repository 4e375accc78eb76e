//! Sentence embeddings from a trainable hashed character-n-gram backbone,
//! or from a precomputed embedding table standing in for an external encoder.

use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::Review;
use crate::error::{Error, Result};

mod precomputed;

pub use precomputed::{load_precomputed_provider, PrecomputedProvider};

/// Leading boundary marker, outside any normalized review alphabet.
const MARK_START: char = '\u{0002}';
/// Trailing boundary marker.
const MARK_END: char = '\u{0003}';

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// FNV-1a over the UTF-8 bytes of a character window.
fn fnv1a64(chars: &[char]) -> u64 {
    let mut h = FNV_OFFSET;
    let mut buf = [0u8; 4];
    for &c in chars {
        for &b in c.encode_utf8(&mut buf).as_bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(FNV_PRIME);
        }
    }
    h
}

/// Configuration of the hashed n-gram backbone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct EncoderConfig {
    pub ngram_min: usize,
    pub ngram_max: usize,
    /// Number of hash buckets; must be a power of two.
    pub buckets: usize,
    /// Embedding dimension.
    pub dim: usize,
    pub seed: u64,
}

impl Default for EncoderConfig {
    fn default() -> Self {
        EncoderConfig {
            ngram_min: 3,
            ngram_max: 5,
            buckets: 1 << 16,
            dim: 64,
            seed: 0,
        }
    }
}

impl EncoderConfig {
    pub fn validate(&self) -> Result<()> {
        if self.ngram_min < 1 {
            return Err(Error::Config("ngram_min must be at least 1".into()));
        }
        if self.ngram_max < self.ngram_min {
            return Err(Error::Config(format!(
                "ngram_max ({}) must be >= ngram_min ({})",
                self.ngram_max, self.ngram_min
            )));
        }
        if self.buckets < 2 || !self.buckets.is_power_of_two() {
            return Err(Error::Config(format!(
                "buckets must be a power of two >= 2, got {}",
                self.buckets
            )));
        }
        if self.dim < 2 {
            return Err(Error::Config(format!("dim must be >= 2, got {}", self.dim)));
        }
        Ok(())
    }
}

/// Hashed feature multiset of one text: bucket indices with multiplicities,
/// sorted by bucket.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TextFeatures {
    counts: Vec<(usize, u32)>,
    total: u32,
}

impl TextFeatures {
    /// (bucket, multiplicity) pairs in ascending bucket order.
    pub fn counts(&self) -> &[(usize, u32)] {
        &self.counts
    }

    /// Total multiset size.
    pub fn total(&self) -> u32 {
        self.total
    }

    /// Expanded index list (multiplicities unrolled), ascending.
    pub fn indices(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.total as usize);
        for &(bucket, count) in &self.counts {
            for _ in 0..count {
                out.push(bucket);
            }
        }
        out
    }
}

/// Hashes every character n-gram of the boundary-marked text into buckets.
///
/// The text is wrapped in one leading and one trailing sentinel so edge
/// n-grams differ from interior ones. Errors on empty text.
pub fn featurize(text: &str, config: &EncoderConfig) -> Result<TextFeatures> {
    if text.is_empty() {
        return Err(Error::NoFeatures);
    }
    let chars: Vec<char> = std::iter::once(MARK_START)
        .chain(text.chars())
        .chain(std::iter::once(MARK_END))
        .collect();
    let mask = (config.buckets - 1) as u64;
    let mut map = std::collections::BTreeMap::new();
    for n in config.ngram_min..=config.ngram_max {
        if chars.len() < n {
            continue;
        }
        for window in chars.windows(n) {
            let bucket = (fnv1a64(window) & mask) as usize;
            *map.entry(bucket).or_insert(0u32) += 1;
        }
    }
    let total = map.values().sum();
    Ok(TextFeatures {
        counts: map.into_iter().collect(),
        total,
    })
}

/// Read-only access to embedding-matrix rows, generic over the backing
/// precision. Training reads `f32` parameters; gradient-check oracles use a
/// dense `f64` matrix so both run through the same arithmetic.
pub trait RowSource {
    fn dim(&self) -> usize;
    /// `out += scale * row`
    fn accumulate_row(&self, row: usize, scale: f64, out: &mut [f64]);
}

/// Dense `f64` row-major matrix view, used by tests and finite-difference
/// oracles.
pub struct DenseRows<'a> {
    pub data: &'a [f64],
    pub dim: usize,
}

impl RowSource for DenseRows<'_> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn accumulate_row(&self, row: usize, scale: f64, out: &mut [f64]) {
        let base = row * self.dim;
        for (o, &v) in out.iter_mut().zip(&self.data[base..base + self.dim]) {
            *o += scale * v;
        }
    }
}

/// Mean-pooled embedding of a feature multiset, accumulated in 64-bit.
pub fn encode_features(rows: &impl RowSource, features: &TextFeatures) -> Vec<f64> {
    let mut out = vec![0.0; rows.dim()];
    let inv_total = 1.0 / f64::from(features.total());
    for &(bucket, count) in features.counts() {
        rows.accumulate_row(bucket, f64::from(count) * inv_total, &mut out);
    }
    out
}

/// Trainable parameters of the hashed n-gram backbone: a buckets x dim
/// row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderParams {
    matrix: Vec<f32>,
    config: EncoderConfig,
}

impl EncoderParams {
    pub fn config(&self) -> &EncoderConfig {
        &self.config
    }

    pub fn matrix(&self) -> &[f32] {
        &self.matrix
    }

    pub fn matrix_mut(&mut self) -> &mut [f32] {
        &mut self.matrix
    }

    pub fn row(&self, bucket: usize) -> &[f32] {
        let d = self.config.dim;
        &self.matrix[bucket * d..(bucket + 1) * d]
    }

    /// Rebuilds params from a raw matrix, checking the shape.
    pub fn from_matrix(matrix: Vec<f32>, config: EncoderConfig) -> Result<Self> {
        config.validate()?;
        let expected = config.buckets * config.dim;
        if matrix.len() != expected {
            return Err(Error::Dimension {
                expected,
                got: matrix.len(),
            });
        }
        Ok(EncoderParams { matrix, config })
    }
}

impl RowSource for EncoderParams {
    fn dim(&self) -> usize {
        self.config.dim
    }

    fn accumulate_row(&self, row: usize, scale: f64, out: &mut [f64]) {
        for (o, &v) in out.iter_mut().zip(self.row(row)) {
            *o += scale * f64::from(v);
        }
    }
}

/// Initializes the embedding matrix with entries drawn independently from
/// Uniform(-1/sqrt(dim), +1/sqrt(dim)) using the config seed.
pub fn init_encoder(config: &EncoderConfig) -> Result<EncoderParams> {
    config.validate()?;
    let bound = 1.0 / (config.dim as f32).sqrt();
    let dist = Uniform::new(-bound, bound);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let matrix = (0..config.buckets * config.dim)
        .map(|_| dist.sample(&mut rng))
        .collect();
    Ok(EncoderParams {
        matrix,
        config: *config,
    })
}

/// A sentence embedding tagged with the review id it encodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentenceEmbedding {
    pub vector: Vec<f32>,
    pub source_id: String,
}

/// Embeds raw text: featurize, then mean-pool matrix rows.
pub fn embed_text(params: &EncoderParams, text: &str) -> Result<Vec<f32>> {
    let features = featurize(text, &params.config)?;
    Ok(encode_features(params, &features)
        .into_iter()
        .map(|v| v as f32)
        .collect())
}

/// Anything that can turn a review into a sentence embedding: the trainable
/// backbone embeds the text, a precomputed provider looks the id up.
pub trait ReviewEmbedder {
    fn embedding_dim(&self) -> usize;
    fn embed_review(&self, review: &Review) -> Result<SentenceEmbedding>;
}

impl ReviewEmbedder for EncoderParams {
    fn embedding_dim(&self) -> usize {
        self.config.dim
    }

    fn embed_review(&self, review: &Review) -> Result<SentenceEmbedding> {
        let vector = embed_text(self, &review.text).map_err(|e| match e {
            Error::NoFeatures => Error::EmptyText(review.id.clone()),
            other => other,
        })?;
        Ok(SentenceEmbedding {
            vector,
            source_id: review.id.clone(),
        })
    }
}
